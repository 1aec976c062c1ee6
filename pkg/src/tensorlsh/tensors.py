"""Tensor formats and contraction kernels.

Three interchangeable representations of an N-mode real tensor:

* ``DenseTensor``  -- the full value array, last index varying fastest.
* ``CpTensor``     -- sum of R rank-one outer products, stored as N factor
  matrices of shape (d_n, R) plus a global scale.
* ``TtTensor``     -- tensor-train: a chain of N third-order cores with
  boundary ranks 1, interior ranks R, plus a global scale.

Inner products are defined between any pair of formats. The structured
kernels never materialize a dense intermediate: CP-CP runs on per-mode Gram
matrices, TT-TT and CP-TT on boundary-matrix sweeps, and structured-vs-dense
contracts mode by mode. All kernels fix their reduction order, so results
are reproducible bit-for-bit on one platform.
"""

from __future__ import annotations

import math

import numpy as np
from numpy.typing import NDArray

__all__ = [
    "CapacityError",
    "ShapeMismatchError",
    "DenseTensor",
    "CpTensor",
    "TtTensor",
    "validate_shape",
    "num_elements",
    "densify",
    "densify_cp",
    "densify_tt",
    "inner",
    "inner_dense_dense",
    "inner_cp_dense",
    "inner_tt_dense",
    "inner_cp_cp",
    "inner_tt_tt",
    "inner_cp_tt",
    "frobenius_norm",
    "frobenius_distance",
    "angle_between",
    "DENSIFY_LIMIT",
]

# Largest element count a shape may declare (indexable with a signed 64-bit int).
_MAX_TOTAL_ELEMENTS = 2**63 - 1

# Default cap on materialized dense elements (2**26 doubles = 512 MiB).
DENSIFY_LIMIT = 2**26


class CapacityError(ValueError):
    """A shape or materialization request exceeds the supported size."""


class ShapeMismatchError(ValueError):
    """Two operands do not share the same mode sizes."""


def validate_shape(dims) -> tuple[int, ...]:
    """Check mode sizes (N >= 1, every d_n >= 1, total addressable) and return them as a tuple."""
    shape = tuple(int(d) for d in dims)
    if len(shape) < 1:
        raise ValueError("tensor order must be at least 1")
    if any(d < 1 for d in shape):
        raise ValueError(f"mode sizes must be positive, got {shape}")
    total = 1
    for d in shape:
        total *= d
        if total > _MAX_TOTAL_ELEMENTS:
            raise CapacityError(f"shape {shape} exceeds addressable element count")
    return shape


def num_elements(shape) -> int:
    """Product of the mode sizes."""
    total = 1
    for d in shape:
        total *= int(d)
    return total


def _as_readonly_f64(arr, *, copy: bool) -> NDArray[np.float64]:
    out = np.array(arr, dtype=np.float64, order="C", copy=copy)
    out.flags.writeable = False
    return out


def _check_finite(arr: np.ndarray, what: str) -> None:
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{what} contains non-finite entries")


class DenseTensor:
    """Fully materialized tensor of float64 values in row-major (C) layout."""

    __slots__ = ("data",)

    def __init__(self, data) -> None:
        arr = _as_readonly_f64(data, copy=True)
        validate_shape(arr.shape)
        _check_finite(arr, "dense tensor")
        self.data = arr

    @classmethod
    def _wrap(cls, arr: np.ndarray) -> "DenseTensor":
        # Internal constructor for freshly created arrays: skips the defensive copy.
        obj = object.__new__(cls)
        arr = np.ascontiguousarray(arr, dtype=np.float64)
        arr.flags.writeable = False
        object.__setattr__(obj, "data", arr)
        return obj

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def order(self) -> int:
        return self.data.ndim

    def max_abs(self) -> float:
        """Largest entry magnitude."""
        return float(np.max(np.abs(self.data)))

    def __repr__(self) -> str:
        return f"DenseTensor(shape={self.shape})"


class CpTensor:
    """CP-format tensor: ``scale * sum_r  factors[0][:,r] o ... o factors[N-1][:,r]``.

    ``factors[n]`` has shape (d_n, R); column r holds mode-n's contribution to
    the r-th rank-one term.
    """

    __slots__ = ("factors", "scale")

    def __init__(self, factors, scale: float = 1.0) -> None:
        mats = [_as_readonly_f64(f, copy=True) for f in factors]
        self._validate(mats, scale)
        self.factors = mats
        self.scale = float(scale)

    @classmethod
    def _wrap(cls, mats: list[np.ndarray], scale: float) -> "CpTensor":
        obj = object.__new__(cls)
        locked = []
        for m in mats:
            m = np.ascontiguousarray(m, dtype=np.float64)
            m.flags.writeable = False
            locked.append(m)
        object.__setattr__(obj, "factors", locked)
        object.__setattr__(obj, "scale", float(scale))
        return obj

    @staticmethod
    def _validate(mats: list[np.ndarray], scale: float) -> None:
        if not mats:
            raise ValueError("CP tensor needs at least one factor matrix")
        if any(m.ndim != 2 for m in mats):
            raise ValueError("CP factors must be 2-D (d_n, R) matrices")
        rank = mats[0].shape[1]
        if rank < 1:
            raise ValueError("CP rank must be positive")
        if any(m.shape[1] != rank for m in mats):
            raise ValueError("all CP factors must share the same column count R")
        validate_shape(tuple(m.shape[0] for m in mats))
        for n, m in enumerate(mats):
            _check_finite(m, f"CP factor {n}")
        if not math.isfinite(scale):
            raise ValueError("CP scale must be finite")

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(m.shape[0] for m in self.factors)

    @property
    def rank(self) -> int:
        return self.factors[0].shape[1]

    @property
    def order(self) -> int:
        return len(self.factors)

    def max_abs(self) -> float:
        """Largest entry magnitude of the *represented* tensor (via densification)."""
        return densify_cp(self).max_abs()

    def __repr__(self) -> str:
        return f"CpTensor(shape={self.shape}, rank={self.rank})"


class TtTensor:
    """Tensor-train-format tensor: entries are products of core slices.

    ``cores[n]`` has shape (r_left, d_n, r_right); the first core has
    r_left = 1 and the last r_right = 1, interior bonds all equal R. Entry
    (i_1, ..., i_N) is ``scale * cores[0][:, i_1, :] @ ... @ cores[N-1][:, i_N, :]``
    (a 1x1 matrix product).
    """

    __slots__ = ("cores", "scale")

    def __init__(self, cores, scale: float = 1.0) -> None:
        mats = [_as_readonly_f64(c, copy=True) for c in cores]
        self._validate(mats, scale)
        self.cores = mats
        self.scale = float(scale)

    @classmethod
    def _wrap(cls, mats: list[np.ndarray], scale: float) -> "TtTensor":
        obj = object.__new__(cls)
        locked = []
        for m in mats:
            m = np.ascontiguousarray(m, dtype=np.float64)
            m.flags.writeable = False
            locked.append(m)
        object.__setattr__(obj, "cores", locked)
        object.__setattr__(obj, "scale", float(scale))
        return obj

    @staticmethod
    def _validate(mats: list[np.ndarray], scale: float) -> None:
        if not mats:
            raise ValueError("TT tensor needs at least one core")
        if any(c.ndim != 3 for c in mats):
            raise ValueError("TT cores must be 3-D (r_left, d_n, r_right)")
        if mats[0].shape[0] != 1:
            raise ValueError("first TT core must have left rank 1")
        if mats[-1].shape[2] != 1:
            raise ValueError("last TT core must have right rank 1")
        for a, b in zip(mats[:-1], mats[1:]):
            if a.shape[2] != b.shape[0]:
                raise ValueError("adjacent TT cores must have matching bond ranks")
        interior = {c.shape[2] for c in mats[:-1]}
        if len(interior) > 1:
            raise ValueError("interior TT bond ranks must all be equal")
        validate_shape(tuple(c.shape[1] for c in mats))
        for n, c in enumerate(mats):
            _check_finite(c, f"TT core {n}")
        if not math.isfinite(scale):
            raise ValueError("TT scale must be finite")

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(c.shape[1] for c in self.cores)

    @property
    def rank(self) -> int:
        if len(self.cores) == 1:
            return 1
        return self.cores[0].shape[2]

    @property
    def order(self) -> int:
        return len(self.cores)

    def max_abs(self) -> float:
        """Largest entry magnitude of the *represented* tensor (via densification)."""
        return densify_tt(self).max_abs()

    def __repr__(self) -> str:
        return f"TtTensor(shape={self.shape}, rank={self.rank})"


Tensor = DenseTensor | CpTensor | TtTensor


# ---------------------------------------------------------------------------
# densification

def _check_densify(shape: tuple[int, ...], max_elements: int) -> None:
    if num_elements(shape) > max_elements:
        raise CapacityError(
            f"refusing to materialize {num_elements(shape)} elements "
            f"(limit {max_elements}); raise max_elements to override"
        )


def densify_cp(t: CpTensor, max_elements: int = DENSIFY_LIMIT) -> DenseTensor:
    """Materialize a CP tensor as the scaled sum of its rank-one terms."""
    _check_densify(t.shape, max_elements)
    out = None
    for r in range(t.rank):
        term = t.factors[0][:, r]
        for m in t.factors[1:]:
            term = np.multiply.outer(term, m[:, r])
        out = term if out is None else out + term
    return DenseTensor._wrap(t.scale * out.reshape(t.shape))


def densify_tt(t: TtTensor, max_elements: int = DENSIFY_LIMIT) -> DenseTensor:
    """Materialize a TT tensor by absorbing cores left to right."""
    _check_densify(t.shape, max_elements)
    cur = t.cores[0][0]  # (d_1, r_1)
    for core in t.cores[1:]:
        cur = np.tensordot(cur, core, axes=([-1], [0]))
    return DenseTensor._wrap(t.scale * cur[..., 0])


def densify(t: Tensor, max_elements: int = DENSIFY_LIMIT) -> DenseTensor:
    """Materialize any format as a ``DenseTensor``."""
    if isinstance(t, DenseTensor):
        return t
    if isinstance(t, CpTensor):
        return densify_cp(t, max_elements)
    if isinstance(t, TtTensor):
        return densify_tt(t, max_elements)
    raise TypeError(f"not a tensor: {t!r}")


# ---------------------------------------------------------------------------
# inner products

def _require_same_shape(a: Tensor, b: Tensor) -> None:
    if a.shape != b.shape:
        raise ShapeMismatchError(f"operand shapes differ: {a.shape} vs {b.shape}")


def inner_dense_dense(a: DenseTensor, b: DenseTensor) -> float:
    """Frobenius inner product of two dense tensors."""
    _require_same_shape(a, b)
    return float(np.dot(a.data.ravel(), b.data.ravel()))


def inner_cp_dense(p: CpTensor, x: DenseTensor) -> float:
    """Contract a CP tensor against a dense tensor, one mode at a time.

    Cost O(R * prod d_n): the first mode contraction touches every dense
    entry once per rank column; later modes shrink geometrically.
    """
    _require_same_shape(p, x)
    rank = p.rank
    # cur[r, j] after absorbing modes 0..n-1, j flat over the remaining modes.
    cur = p.factors[0].T @ x.data.reshape(p.shape[0], -1)  # (R, rest)
    for n in range(1, p.order):
        d = p.shape[n]
        cur = cur.reshape(rank, d, -1)
        cur = np.einsum("rij,ir->rj", cur, p.factors[n])
    return p.scale * float(cur.reshape(rank).sum())


def inner_tt_dense(t: TtTensor, x: DenseTensor) -> float:
    """Contract a TT tensor against a dense tensor by absorbing modes left to right."""
    _require_same_shape(t, x)
    # cur[b, j]: bond index after modes 0..n-1, j flat over remaining modes.
    cur = t.cores[0][0].T @ x.data.reshape(t.shape[0], -1)  # (r_1, rest)
    for n in range(1, t.order):
        core = t.cores[n]  # (r_prev, d_n, r_next)
        cur = cur.reshape(core.shape[0], core.shape[1], -1)
        cur = np.einsum("aij,aib->bj", cur, core)
    return t.scale * float(cur[0, 0])


def inner_cp_cp(p: CpTensor, q: CpTensor) -> float:
    """Inner product of two CP tensors via per-mode Gram matrices.

    Accumulates the entrywise product of ``factors_p[n].T @ factors_q[n]``
    over modes in ascending order, then sums over both rank indices.
    Cost O(N * d * R * R').
    """
    _require_same_shape(p, q)
    acc = p.factors[0].T @ q.factors[0]  # (R, R')
    for n in range(1, p.order):
        acc = acc * (p.factors[n].T @ q.factors[n])
    return p.scale * q.scale * float(acc.sum())


def inner_tt_tt(t: TtTensor, u: TtTensor) -> float:
    """Inner product of two TT tensors via a left-to-right transfer sweep.

    Carries a boundary matrix over the bond-rank pair, contracting one mode
    at a time. Cost O(N * d * max(R, R')^3); no dense intermediate.
    """
    _require_same_shape(t, u)
    acc = np.einsum("aib,aic->bc", t.cores[0], u.cores[0])  # (r_t, r_u)
    for n in range(1, t.order):
        step = np.einsum("ab,aic->bic", acc, t.cores[n])
        acc = np.einsum("bic,bie->ce", step, u.cores[n])
    return t.scale * u.scale * float(acc[0, 0])


def inner_cp_tt(p: CpTensor, t: TtTensor) -> float:
    """Inner product of a CP and a TT tensor.

    Treats each rank-one CP term as a unit-bond train and sweeps a boundary
    matrix over (CP rank, TT bond). Cost O(N * d * R * R'^2).
    """
    _require_same_shape(p, t)
    acc = p.factors[0].T @ t.cores[0][0]  # (R, r_1)
    for n in range(1, p.order):
        step = np.einsum("rb,bic->ric", acc, t.cores[n])
        acc = np.einsum("ric,ir->rc", step, p.factors[n])
    return p.scale * t.scale * float(acc[:, 0].sum())


_INNER_DISPATCH = {
    (DenseTensor, DenseTensor): inner_dense_dense,
    (CpTensor, DenseTensor): inner_cp_dense,
    (DenseTensor, CpTensor): lambda a, b: inner_cp_dense(b, a),
    (TtTensor, DenseTensor): inner_tt_dense,
    (DenseTensor, TtTensor): lambda a, b: inner_tt_dense(b, a),
    (CpTensor, CpTensor): inner_cp_cp,
    (TtTensor, TtTensor): inner_tt_tt,
    (CpTensor, TtTensor): inner_cp_tt,
    (TtTensor, CpTensor): lambda a, b: inner_cp_tt(b, a),
}


def inner(a: Tensor, b: Tensor) -> float:
    """Frobenius inner product between tensors in any pair of formats."""
    try:
        fn = _INNER_DISPATCH[(type(a), type(b))]
    except KeyError:
        raise TypeError(f"unsupported operand types: {type(a).__name__}, {type(b).__name__}")
    return fn(a, b)


def frobenius_norm(x: Tensor) -> float:
    """Frobenius norm in any format, via the format's own self inner product."""
    if isinstance(x, DenseTensor):
        return float(np.linalg.norm(x.data.ravel()))
    # Self inner product can dip below zero by rounding; clamp before the root.
    return math.sqrt(max(inner(x, x), 0.0))


def frobenius_distance(a: Tensor, b: Tensor) -> float:
    """Frobenius distance ||a - b||_F between tensors in any pair of formats."""
    if isinstance(a, DenseTensor) and isinstance(b, DenseTensor):
        _require_same_shape(a, b)
        return float(np.linalg.norm((a.data - b.data).ravel()))
    gap = inner(a, a) + inner(b, b) - 2.0 * inner(a, b)
    return math.sqrt(max(gap, 0.0))


def angle_between(a: Tensor, b: Tensor) -> float:
    """Angle (radians) between two nonzero tensors under the Frobenius inner product."""
    na = frobenius_norm(a)
    nb = frobenius_norm(b)
    if na == 0.0 or nb == 0.0:
        raise ValueError("angle is undefined for a zero tensor")
    cos = inner(a, b) / (na * nb)
    return math.acos(min(1.0, max(-1.0, cos)))
