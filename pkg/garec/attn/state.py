"""
Trainable parameters of the model.

This module handles:
- AttentionParams (one per side), MlpParams and the ModelState bundle
- Flat, ordered name -> tensor views used by the optimizer, gradients and checkpoints
- Seeded initialization from NMF factors
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from garec.config import ACTIVATIONS, TrainConfig, config_echo
from garec.nmf import FactorPair
from garec.utils import throw

FACTOR_TENSORS = ("factors.user", "factors.item")


@dataclass(eq=False)
class AttentionParams:
    """Per-side transforms.

    W (d x d') makes the query from the node's own vector and, unless ``W_key`` is set, the
    keys from neighbor vectors; w_nei (d' x d') scores the aggregated neighborhood; w_self
    (d x d') projects the node's own vector for the updater.
    """

    W: np.ndarray
    w_nei: np.ndarray
    w_self: np.ndarray
    W_key: np.ndarray | None = None

    @property
    def key_transform(self) -> np.ndarray:
        return self.W if self.W_key is None else self.W_key

    @property
    def d(self) -> int:
        return self.W.shape[0]

    @property
    def d_prime(self) -> int:
        return self.W.shape[1]

    def tensors(self) -> dict[str, np.ndarray]:
        named = {"W": self.W, "w_nei": self.w_nei, "w_self": self.w_self}
        if self.W_key is not None:
            named["W_key"] = self.W_key
        return named

    def validate(self, side: str) -> None:
        d, dp = self.W.shape
        expected = {"W": (d, dp), "w_nei": (dp, dp), "w_self": (d, dp), "W_key": (d, dp)}
        for name, tensor in self.tensors().items():
            if tensor.shape != expected[name]:
                throw(f"{side}.{name} has shape {tensor.shape}, expected {expected[name]}")
            if not np.isfinite(tensor).all():
                throw(f"{side}.{name} has non-finite entries")


@dataclass(eq=False)
class MlpParams:
    """Dense layers as (weight (in x out), bias (out,)) pairs; hidden layers use the rectifier."""

    layers: list[tuple[np.ndarray, np.ndarray]]

    def validate(self, input_dim: int) -> None:
        if not self.layers:
            throw("MLP needs at least one layer")
        width = input_dim
        for index, (weight, bias) in enumerate(self.layers):
            if weight.shape[0] != width or bias.shape != (weight.shape[1],):
                throw(f"mlp.{index} has shapes {weight.shape}/{bias.shape}, expected input width {width}")
            width = weight.shape[1]
        if width != 1:
            throw(f"MLP output width is {width}, expected 1")

    def forward(self, x: np.ndarray) -> tuple[np.ndarray, list[np.ndarray], list[np.ndarray]]:
        """Return (output, layer inputs, pre-activations). Works on a vector or a row batch."""
        inputs, pre = [], []
        h = x
        last = len(self.layers) - 1
        for index, (weight, bias) in enumerate(self.layers):
            inputs.append(h)
            z = h @ weight + bias
            pre.append(z)
            h = z if index == last else np.maximum(z, 0.0)
        return h, inputs, pre


@dataclass(eq=False)
class ModelState:
    factors: FactorPair
    user_attn: AttentionParams
    item_attn: AttentionParams
    mlp: MlpParams
    activation: str = "tanh"
    rating_bounds: tuple[float, float] = (1.0, 5.0)
    freeze_factors: bool = False
    seed: int = 0
    config: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.activation not in ACTIVATIONS:
            throw(f"Unknown activation {self.activation!r}")
        if self.user_attn.d != self.d or self.item_attn.d != self.d:
            throw(f"Attention input width must equal factor width d={self.d}")
        if self.user_attn.d_prime != self.item_attn.d_prime:
            throw("User and item attention must share d'")
        self.user_attn.validate("user_attn")
        self.item_attn.validate("item_attn")
        self.mlp.validate(2 * self.d_prime)

    @property
    def d(self) -> int:
        return self.factors.d

    @property
    def d_prime(self) -> int:
        return self.user_attn.d_prime

    def tensors(self) -> dict[str, np.ndarray]:
        """Every parameter tensor, in a fixed order, by dotted name (views, not copies)."""
        named = {"factors.user": self.factors.user, "factors.item": self.factors.item}
        for side, params in (("user_attn", self.user_attn), ("item_attn", self.item_attn)):
            for name, tensor in params.tensors().items():
                named[f"{side}.{name}"] = tensor
        for index, (weight, bias) in enumerate(self.mlp.layers):
            named[f"mlp.{index}.weight"] = weight
            named[f"mlp.{index}.bias"] = bias
        return named

    def trainable_names(self) -> list[str]:
        return [name for name in self.tensors() if not (self.freeze_factors and name in FACTOR_TENSORS)]

    def replace_tensors(self, updates: dict[str, np.ndarray]) -> ModelState:
        """New state with the named tensors swapped in; the others are shared."""
        named = {**self.tensors(), **updates}

        def side(prefix: str, params: AttentionParams) -> AttentionParams:
            return AttentionParams(
                named[f"{prefix}.W"],
                named[f"{prefix}.w_nei"],
                named[f"{prefix}.w_self"],
                named.get(f"{prefix}.W_key") if params.W_key is not None else None,
            )

        layers = [(named[f"mlp.{k}.weight"], named[f"mlp.{k}.bias"]) for k in range(len(self.mlp.layers))]
        return ModelState(
            FactorPair(named["factors.user"], named["factors.item"]),
            side("user_attn", self.user_attn),
            side("item_attn", self.item_attn),
            MlpParams(layers),
            self.activation,
            self.rating_bounds,
            self.freeze_factors,
            self.seed,
            dict(self.config),
        )

    def copy(self) -> ModelState:
        return self.replace_tensors({name: tensor.copy() for name, tensor in self.tensors().items()})


def _near_identity(rng: np.random.Generator, rows: int, cols: int, scale: float) -> np.ndarray:
    return np.eye(rows, cols) + rng.normal(0.0, scale, size=(rows, cols))


def init_state(factors: FactorPair, cfg: TrainConfig, rating_mean: float = 3.0) -> ModelState:
    """Seeded initial parameters around the NMF factors.

    Attention transforms start near the (rectangular) identity so that early relevance scores
    follow factor similarity; the MLP uses He-scaled hidden layers and an output bias at the
    mean training rating.
    """
    if factors.d != cfg.d:
        throw(f"Factors have d={factors.d}, config expects d={cfg.d}")
    rng = np.random.default_rng([cfg.seed, 1])
    d, dp = cfg.d, cfg.d_prime

    def attention() -> AttentionParams:
        return AttentionParams(
            _near_identity(rng, d, dp, cfg.init_scale),
            _near_identity(rng, dp, dp, cfg.init_scale),
            _near_identity(rng, d, dp, cfg.init_scale),
            _near_identity(rng, d, dp, cfg.init_scale) if cfg.separate_query_key else None,
        )

    user_attn = attention()
    item_attn = attention()

    widths = [2 * dp, *cfg.hidden_sizes, 1]
    layers = []
    for index, (fan_in, fan_out) in enumerate(zip(widths[:-1], widths[1:], strict=True)):
        last = index == len(widths) - 2
        std = np.sqrt((1.0 if last else 2.0) / fan_in)
        weight = rng.normal(0.0, std, size=(fan_in, fan_out))
        bias = np.full(fan_out, float(rating_mean)) if last else np.zeros(fan_out)
        layers.append((weight, bias))

    return ModelState(
        factors.copy(),
        user_attn,
        item_attn,
        MlpParams(layers),
        activation=cfg.activation,
        freeze_factors=cfg.freeze_factors,
        seed=cfg.seed,
        config=config_echo(cfg),
    )
