"""Deterministic generators for test tensors.

Everything here draws from the package's keyed streams, so one (seed, tag)
pair always produces the same tensors regardless of call order.

Planted pairs are constructed in the flattened vector space: a pair at
angle theta comes from an orthonormal 2-frame (Gram-Schmidt), a pair at
Frobenius distance r from a unit perturbation direction. The requested
geometry holds to floating-point accuracy, not just in expectation.
"""

from __future__ import annotations

import math

import numpy as np

from . import rng
from .tensors import CpTensor, DenseTensor, TtTensor, validate_shape

__all__ = [
    "random_dense",
    "random_cp",
    "random_tt",
    "pair_at_angle",
    "pair_at_distance",
]


def random_dense(shape, seed: int, tag: int = 0) -> DenseTensor:
    """Dense tensor with iid standard normal entries."""
    shape = validate_shape(shape)
    g = rng.stream(seed, rng.DOMAIN_DATA, tag, 0)
    return DenseTensor._wrap(g.standard_normal(shape))


def random_cp(shape, rank: int, seed: int, tag: int = 0) -> CpTensor:
    """CP tensor with iid standard normal factor entries, scale 1."""
    shape = validate_shape(shape)
    if rank < 1:
        raise ValueError("rank must be positive")
    factors = [
        rng.stream(seed, rng.DOMAIN_DATA, tag, n + 1).standard_normal((d, rank))
        for n, d in enumerate(shape)
    ]
    return CpTensor._wrap(factors, 1.0)


def random_tt(shape, rank: int, seed: int, tag: int = 0) -> TtTensor:
    """TT tensor with iid standard normal core entries, scale 1."""
    shape = validate_shape(shape)
    if rank < 1:
        raise ValueError("rank must be positive")
    n_modes = len(shape)
    if n_modes == 1:
        core_shapes = [(1, shape[0], 1)]
    else:
        bonds = [1] + [rank] * (n_modes - 1) + [1]
        core_shapes = [(bonds[i], shape[i], bonds[i + 1]) for i in range(n_modes)]
    cores = [
        rng.stream(seed, rng.DOMAIN_DATA, tag, n + 1).standard_normal(cs)
        for n, cs in enumerate(core_shapes)
    ]
    return TtTensor._wrap(cores, 1.0)


def _orthonormal_frame(size: int, g: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    if size < 2:
        raise ValueError("planted-angle pairs need at least 2 elements")
    u = g.standard_normal(size)
    u /= np.linalg.norm(u)
    v = g.standard_normal(size)
    v -= (v @ u) * u
    norm = np.linalg.norm(v)
    if norm < 1e-12:  # astronomically unlikely; redraw once for safety
        v = g.standard_normal(size)
        v -= (v @ u) * u
        norm = np.linalg.norm(v)
    return u, v / norm


def pair_at_angle(shape, angle: float, seed: int, tag: int = 0) -> tuple[DenseTensor, DenseTensor]:
    """Two unit-norm dense tensors at exactly the requested angle (radians)."""
    shape = validate_shape(shape)
    if not 0.0 <= angle <= math.pi:
        raise ValueError("angle must lie in [0, pi]")
    g = rng.stream(seed, rng.DOMAIN_DATA, tag, 101)
    size = int(np.prod(shape))
    u, v = _orthonormal_frame(size, g)
    y = math.cos(angle) * u + math.sin(angle) * v
    return (
        DenseTensor._wrap(u.reshape(shape)),
        DenseTensor._wrap(y.reshape(shape)),
    )


def pair_at_distance(
    shape, distance: float, seed: int, tag: int = 0
) -> tuple[DenseTensor, DenseTensor]:
    """A random dense tensor and a copy displaced by exactly ``distance`` in Frobenius norm."""
    shape = validate_shape(shape)
    if distance < 0:
        raise ValueError("distance must be nonnegative")
    g = rng.stream(seed, rng.DOMAIN_DATA, tag, 102)
    x = g.standard_normal(int(np.prod(shape)))
    step = g.standard_normal(x.size)
    step /= np.linalg.norm(step)
    y = x + distance * step
    return (
        DenseTensor._wrap(x.reshape(shape)),
        DenseTensor._wrap(y.reshape(shape)),
    )
