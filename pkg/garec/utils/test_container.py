# Copyright (c) 2025, GARec contributors
# For license information, please see license.txt

import os
import struct
import tempfile
import unittest

import numpy as np

from garec.exceptions import CheckpointError, ValidationError
from garec.utils import require_in_range, require_positive, throw
from garec.utils.container import FORMAT_VERSION, MAGIC, read_container, write_container


class TestContainer(unittest.TestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.path = os.path.join(self.tmp.name, "blob.ckpt")

    def tearDown(self):
        self.tmp.cleanup()

    def test_round_trip_is_bit_exact(self):
        rng = np.random.default_rng(3)
        tensors = {"a": rng.normal(size=(3, 4)), "b": rng.normal(size=5), "empty": np.zeros((0, 2))}
        write_container(self.path, "thing", tensors, {"seed": 9})
        header, loaded = read_container(self.path, "thing")
        self.assertEqual(header["seed"], 9)
        self.assertEqual(list(loaded), ["a", "b", "empty"])
        for name, tensor in tensors.items():
            self.assertEqual(loaded[name].shape, tensor.shape)
            self.assertEqual(loaded[name].tobytes(), tensor.tobytes())

    def test_wrong_magic(self):
        write_container(self.path, "thing", {"a": np.ones(2)})
        with open(self.path, "r+b") as handle:
            handle.write(b"NOPE!")
        with self.assertRaises(CheckpointError) as ctx:
            read_container(self.path, "thing")
        self.assertEqual(ctx.exception.expected, MAGIC)

    def test_wrong_version(self):
        write_container(self.path, "thing", {"a": np.ones(2)})
        with open(self.path, "r+b") as handle:
            handle.seek(len(MAGIC))
            handle.write(struct.pack("<H", FORMAT_VERSION + 1))
        with self.assertRaises(CheckpointError) as ctx:
            read_container(self.path, "thing")
        self.assertIn("version", str(ctx.exception))

    def test_truncated(self):
        write_container(self.path, "thing", {"a": np.ones(10)})
        with open(self.path, "rb") as handle:
            blob = handle.read()
        with open(self.path, "wb") as handle:
            handle.write(blob[:-3])
        with self.assertRaises(CheckpointError):
            read_container(self.path, "thing")

    def test_wrong_kind_and_missing_file(self):
        write_container(self.path, "factors", {"a": np.ones(1)})
        with self.assertRaises(CheckpointError):
            read_container(self.path, "model")
        with self.assertRaises(CheckpointError):
            read_container(os.path.join(self.tmp.name, "absent"), "model")


class TestValidation(unittest.TestCase):
    def test_throw_defaults_to_validation_error(self):
        with self.assertRaises(ValidationError):
            throw("bad")

    def test_require_helpers(self):
        require_positive("x", 1)
        require_positive("x", 0, allow_zero=True)
        with self.assertRaises(ValidationError):
            require_positive("x", 0)
        require_in_range("f", 0.5, 0.0, 1.0)
        with self.assertRaises(ValidationError):
            require_in_range("f", 1.0, 0.0, 1.0, high_inclusive=False)

    def test_missing_values_are_validation_errors(self):
        with self.assertRaises(ValidationError):
            require_positive("x", None)
        with self.assertRaises(ValidationError) as ctx:
            require_in_range("validation_fraction", None, 0.0, 0.5)
        self.assertIn("validation_fraction", str(ctx.exception))
