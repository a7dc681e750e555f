# Copyright (c) 2025, GARec contributors
# For license information, please see license.txt

import contextlib
import io
import json
import os
import tempfile
import unittest

import numpy as np

from garec.config import load_config
from garec.data import build_matrix, load_prepared
from garec.evalcli.commands import build_parser, main
from garec.nmf import factorize
from garec.train import carve_validation, load_checkpoint

RESULT_KEYS = {"rmse", "mae", "n_evaluated", "n_cold_fallback", "method", "split", "seed", "config_echo"}


class TestCommands(unittest.TestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        rng = np.random.default_rng(3)
        lines = [
            f"{100 + u}\t{500 + i}\t{int(rng.integers(1, 6))}\t{u * 100 + i}"
            for u in range(12)
            for i in range(12)
            if rng.random() < 0.7
        ]
        self.input = self.path("u.data")
        with open(self.input, "w", encoding="utf-8") as handle:
            handle.write("\n".join(lines) + "\n")
        self.config = self.path("run.cfg")
        with open(self.config, "w", encoding="utf-8") as handle:
            handle.write("# toy run\nd = 2\nd' = 2\nmax_epochs = 2\nbatch_size = 32\nT = 10\nnmf_max_iters = 20\n")

    def tearDown(self):
        self.tmp.cleanup()

    def path(self, *parts: str) -> str:
        return os.path.join(self.tmp.name, *parts)

    def run_cli(self, *argv: str) -> tuple[int, str]:
        stderr = io.StringIO()
        with contextlib.redirect_stderr(stderr):
            code = main(list(argv))
        return code, stderr.getvalue()

    def read_json(self, name: str) -> dict:
        with open(self.path(name), encoding="utf-8") as handle:
            return json.load(handle)

    def test_pipeline(self):
        data = self.path("data")
        self.assertEqual(self.run_cli("prepare", "--input", self.input, "--format", "tab100k", "--out", data)[0], 0)
        self.assertTrue(os.path.exists(os.path.join(data, "meta.json")))
        factors = self.path("factors.ckpt")
        self.assertEqual(self.run_cli("factorize", "--data", data, "--config", self.config, "--seed", "4", "--out", factors)[0], 0)

        model = self.path("model.ckpt")
        code, _ = self.run_cli(
            "train", "--data", data, "--factors", factors, "--config", self.config,
            "--seed", "4", "--out", model, "--report", self.path("report.jsonl"),
        )
        self.assertEqual(code, 0)
        state = load_checkpoint(model)
        self.assertEqual((state.d, state.seed, state.config["max_epochs"]), (2, 4, 2))
        with open(self.path("report.jsonl"), encoding="utf-8") as handle:
            self.assertEqual(len(handle.readlines()), 2)

        self.assertEqual(self.run_cli("evaluate", "--data", data, "--model", model, "--out", self.path("result.json"))[0], 0)
        result = self.read_json("result.json")
        self.assertEqual(set(result), RESULT_KEYS)
        self.assertEqual((result["method"], result["split"], result["seed"]), ("garec", 0.8, 4))
        self.assertEqual(result["config_echo"]["cap"], 10)
        self.assertGreater(result["n_evaluated"], 0)

        code, _ = self.run_cli("baseline-nmf", "--data", data, "--factors", factors, "--out", self.path("nmf.json"))
        self.assertEqual(code, 0)
        self.assertEqual(self.read_json("nmf.json")["method"], "nmf")
        self.assertEqual(self.read_json("nmf.json")["n_evaluated"], result["n_evaluated"])

    def test_frozen_factors_come_from_the_fit_portion(self):
        data = self.path("data")
        self.run_cli("prepare", "--input", self.input, "--format", "tab100k", "--out", data)
        factors = self.path("factors.ckpt")
        self.assertEqual(self.run_cli("factorize", "--data", data, "--config", self.config, "--out", factors)[0], 0)
        model = self.path("model.ckpt")
        code, _ = self.run_cli(
            "train", "--data", data, "--factors", factors, "--config", self.config, "--freeze-factors", "--out", model
        )
        self.assertEqual(code, 0)

        train = load_prepared(data).train
        cfg = load_config(self.config)
        fit_part, val_part = carve_validation(train, cfg.validation_fraction, cfg.seed)
        self.assertGreater(len(val_part), 0)
        expected = factorize(build_matrix(fit_part), cfg.nmf_config())
        state = load_checkpoint(model)
        self.assertEqual(state.factors.user.tobytes(), expected.user.tobytes())
        self.assertEqual(state.factors.item.tobytes(), expected.item.tobytes())
        full = factorize(build_matrix(train), cfg.nmf_config())
        self.assertNotEqual(state.factors.user.tobytes(), full.user.tobytes())

    def test_train_rejects_factors_from_another_portion(self):
        data = self.path("data")
        self.run_cli("prepare", "--input", self.input, "--format", "tab100k", "--out", data)
        factors = self.path("factors.ckpt")
        self.run_cli("factorize", "--data", data, "--config", self.config, "--seed", "0", "--out", factors)
        code, err = self.run_cli(
            "train", "--data", data, "--factors", factors, "--config", self.config, "--seed", "1", "--out", self.path("m")
        )
        self.assertEqual(code, 2)
        self.assertIn("factors were fitted on", err)

    def test_baseline_nmf_echoes_factor_settings(self):
        data = self.path("data")
        self.run_cli("prepare", "--input", self.input, "--format", "tab100k", "--out", data, "--seed", "1")
        factors = self.path("factors.ckpt")
        code, _ = self.run_cli(
            "factorize", "--data", data, "--d", "2", "--seed", "5", "--iters", "7", "--rel-tol", "0", "--out", factors
        )
        self.assertEqual(code, 0)
        self.assertEqual(self.run_cli("baseline-nmf", "--data", data, "--factors", factors, "--out", self.path("nmf.json"))[0], 0)
        nmf = self.read_json("nmf.json")
        self.assertEqual(nmf["seed"], 5)
        self.assertEqual(
            nmf["config_echo"], {"d": 2, "max_iters": 7, "rel_tol": 0.0, "epsilon": 1e-9, "seed": 5}
        )

    def test_prepare_folds(self):
        data = self.path("folds")
        code, _ = self.run_cli(
            "prepare", "--input", self.input, "--format", "tab100k", "--out", data, "--folds", "3"
        )
        self.assertEqual(code, 0)
        self.assertEqual(sorted(os.listdir(data)), ["fold_0", "fold_1", "fold_2"])

    def test_crossval(self):
        code, _ = self.run_cli(
            "crossval", "--input", self.input, "--format", "tab100k", "--folds", "2",
            "--config", self.config, "--out", self.path("cv.json"),
        )
        self.assertEqual(code, 0)
        cv = self.read_json("cv.json")
        self.assertEqual((cv["n_folds"], cv["split"]), (2, "2-fold"))
        self.assertEqual(len(cv["rmse"]["per_fold"]), 2)

    def test_errors_exit_with_status_two(self):
        code, err = self.run_cli(
            "evaluate", "--data", self.path("nowhere"), "--model", self.path("m.ckpt"), "--out", self.path("r.json")
        )
        self.assertEqual(code, 2)
        self.assertIn("garec: error:", err)

        bad = self.path("bad.data")
        with open(bad, "w", encoding="utf-8") as handle:
            handle.write("1\t2\tfive\t0\n")
        code, err = self.run_cli("prepare", "--input", bad, "--format", "tab100k", "--out", self.path("x"))
        self.assertEqual(code, 2)
        self.assertIn(":1:", err)

    def test_factor_dimension_mismatch(self):
        data = self.path("data")
        self.run_cli("prepare", "--input", self.input, "--format", "tab100k", "--out", data)
        factors = self.path("factors.ckpt")
        self.run_cli("factorize", "--data", data, "--d", "2", "--iters", "5", "--out", factors)
        code, err = self.run_cli(
            "train", "--data", data, "--factors", factors, "--config", self.config, "--d", "3", "--out", self.path("m")
        )
        self.assertEqual(code, 2)
        self.assertIn("expected d=3", err)

    def test_parser_rejects_unknown_format(self):
        with self.assertRaises(SystemExit), contextlib.redirect_stderr(io.StringIO()):
            build_parser().parse_args(["prepare", "--input", "x", "--format", "csv", "--out", "y"])
