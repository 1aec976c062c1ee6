"""Samplers for low-rank random projection tensors.

A projection tensor is drawn so that for any fixed tensor X the inner
product <P, X> has mean 0, variance ||X||_F^2, and covariance <X, Y> against
a second input -- exactly, at any rank. The format dictates the compensating
scale baked into the sampled tensor:

* CP with rank R:  entries of every factor are iid Rademacher (+-1) or
  standard normal; scale = 1 / sqrt(R).
* TT with rank R:  core entries iid from the same distributions;
  scale = 1 / sqrt(R**(N-1)) for an order-N tensor.

``project`` evaluates a K-component random map x -> (1/sqrt(K)) * <P_k, x>,
which preserves squared distances in expectation. Hash families consume the
raw single-component inner products and apply no 1/sqrt(K).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numpy as np

from . import rng
from .tensors import CpTensor, Tensor, TtTensor, inner, validate_shape

__all__ = [
    "Distribution",
    "Decomposition",
    "SamplerConfig",
    "sample_cp",
    "sample_tt",
    "sample_projection",
    "project",
]


class Distribution(enum.Enum):
    """Entry distribution for sampled factors/cores."""

    RADEMACHER = "rademacher"
    GAUSSIAN = "gaussian"


class Decomposition(enum.Enum):
    """Low-rank format of the sampled projection tensor."""

    CP = "cp"
    TT = "tt"


@dataclass(frozen=True)
class SamplerConfig:
    """Everything that determines a projection tensor, bit for bit.

    ``component_index`` selects one of the K independent projection tensors
    of a multi-component map; distinct indices use disjoint RNG streams.
    """

    shape: tuple[int, ...]
    rank: int
    distribution: Distribution = Distribution.RADEMACHER
    decomposition: Decomposition = Decomposition.CP
    seed: int = 0
    component_index: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "shape", validate_shape(self.shape))
        if self.rank < 1:
            raise ValueError("rank must be a positive integer")
        if not 0 <= self.seed <= rng.MASK64:
            raise ValueError("seed must fit in an unsigned 64-bit integer")
        if self.component_index < 0:
            raise ValueError("component_index must be nonnegative")


def _draw(cfg: SamplerConfig, mode: int, shape: tuple[int, ...]) -> np.ndarray:
    g = rng.stream(cfg.seed, rng.DOMAIN_FACTOR, cfg.component_index, mode)
    if cfg.distribution is Distribution.RADEMACHER:
        # Exact +-1.0 values; one stream entry per tensor entry, row-major order.
        return g.integers(0, 2, size=shape).astype(np.float64) * 2.0 - 1.0
    return g.standard_normal(size=shape)


def sample_cp(cfg: SamplerConfig) -> CpTensor:
    """Draw a CP projection tensor (factors iid, scale 1/sqrt(R))."""
    if cfg.decomposition is not Decomposition.CP:
        raise ValueError("sample_cp requires a CP sampler config")
    factors = [_draw(cfg, n, (d, cfg.rank)) for n, d in enumerate(cfg.shape)]
    return CpTensor._wrap(factors, 1.0 / math.sqrt(cfg.rank))


def sample_tt(cfg: SamplerConfig) -> TtTensor:
    """Draw a TT projection tensor (cores iid, scale 1/sqrt(R^(N-1)))."""
    if cfg.decomposition is not Decomposition.TT:
        raise ValueError("sample_tt requires a TT sampler config")
    n_modes = len(cfg.shape)
    if n_modes == 1:
        core_shapes = [(1, cfg.shape[0], 1)]
    else:
        bonds = [1] + [cfg.rank] * (n_modes - 1) + [1]
        core_shapes = [(bonds[i], cfg.shape[i], bonds[i + 1]) for i in range(n_modes)]
    cores = [_draw(cfg, n, cs) for n, cs in enumerate(core_shapes)]
    return TtTensor._wrap(cores, 1.0 / math.sqrt(float(cfg.rank) ** (n_modes - 1)))


def sample_projection(cfg: SamplerConfig) -> CpTensor | TtTensor:
    """Draw the projection tensor in whichever format the config selects."""
    if cfg.decomposition is Decomposition.CP:
        return sample_cp(cfg)
    return sample_tt(cfg)


def project(cfg: SamplerConfig, x: Tensor, num_components: int) -> np.ndarray:
    """Random map of x to ``num_components`` values, scaled by 1/sqrt(K).

    Component k uses the projection tensor at ``component_index = k``; the
    config's own component_index is the base offset. Squared Euclidean
    distances are preserved in expectation.
    """
    if num_components < 1:
        raise ValueError("num_components must be positive")
    out = np.empty(num_components)
    for k in range(num_components):
        p = sample_projection(replace(cfg, component_index=cfg.component_index + k))
        out[k] = inner(p, x)
    return out / math.sqrt(num_components)
