# Copyright (c) 2025, GARec contributors
# For license information, please see license.txt

from __future__ import annotations

from garec.attn import AttentionParams, MlpParams, ModelState
from garec.exceptions import CheckpointError, ValidationError
from garec.nmf import FactorPair
from garec.utils import logger
from garec.utils.container import read_container, write_container

LOGGER = logger("train")

MODEL_KIND = "model"


def save_checkpoint(state: ModelState, path: str) -> str:
    """Write every tensor of ``state`` bit-exactly, with dimensions and flags in the header."""
    meta = {
        "n": state.factors.n_users,
        "m": state.factors.n_items,
        "d": state.d,
        "d_prime": state.d_prime,
        "seed": int(state.seed),
        "freeze_factors": bool(state.freeze_factors),
        "activation": state.activation,
        "rating_bounds": list(state.rating_bounds),
        "n_layers": len(state.mlp.layers),
        "config": state.config,
    }
    write_container(path, MODEL_KIND, state.tensors(), meta)
    LOGGER.info(f"Saved model checkpoint (d={state.d}, d'={state.d_prime}) to {path}")
    return path


def load_checkpoint(path: str, expect_d: int | None = None) -> ModelState:
    header, tensors = read_container(path, MODEL_KIND)
    if expect_d is not None and header["d"] != expect_d:
        raise CheckpointError(
            f"{path}: checkpoint has d={header['d']}, expected d={expect_d}",
            expected=expect_d,
            found=header["d"],
        )

    def side(prefix: str) -> AttentionParams:
        return AttentionParams(
            tensors[f"{prefix}.W"],
            tensors[f"{prefix}.w_nei"],
            tensors[f"{prefix}.w_self"],
            tensors.get(f"{prefix}.W_key"),
        )

    try:
        factors = FactorPair(tensors["factors.user"], tensors["factors.item"])
        layers = [(tensors[f"mlp.{k}.weight"], tensors[f"mlp.{k}.bias"]) for k in range(header["n_layers"])]
        state = ModelState(
            factors,
            side("user_attn"),
            side("item_attn"),
            MlpParams(layers),
            activation=header["activation"],
            rating_bounds=tuple(header["rating_bounds"]),
            freeze_factors=header["freeze_factors"],
            seed=header["seed"],
            config=header.get("config", {}),
        )
    except KeyError as e:
        raise CheckpointError(f"{path}: checkpoint is missing {e}")
    except ValidationError as e:
        raise CheckpointError(f"{path}: inconsistent checkpoint ({e})")
    found = (factors.n_users, factors.n_items, state.d, state.d_prime)
    expected = (header["n"], header["m"], header["d"], header["d_prime"])
    if found != expected:
        raise CheckpointError(
            f"{path}: tensor shapes (n, m, d, d') = {found} disagree with header {expected}",
            expected=expected,
            found=found,
        )
    return state
