"""Hash families built on low-rank random projections.

Two classic families, each available with a CP-format projection, a
TT-format projection, or the dense-Gaussian baseline:

* Euclidean (bucketed) hashing: ``floor((<proj, x> + offset) / width)`` with
  the offset drawn uniformly from [0, width). Nearby tensors land in the
  same bucket with probability decreasing in their Frobenius distance.
* Sign hashing: ``1 if <proj, x> > 0 else 0``. Collision probability is
  ``1 - angle / pi`` for unit vectors at a given angle.

All arithmetic uses the raw inner product -- no 1/sqrt(K) -- so the
collision laws above hold per code. ``hash_k`` evaluates K independent
families (component indices base..base+K-1) into one code vector.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import rng
from .projection import Decomposition, Distribution, SamplerConfig, sample_projection
from .tensors import CpTensor, DenseTensor, Tensor, TtTensor, inner, num_elements, validate_shape

__all__ = [
    "FamilyKind",
    "E2lshFamily",
    "SrpFamily",
    "HashVector",
    "RankConditionReport",
    "DEFAULT_WIDTH",
    "make_e2lsh_family",
    "make_srp_family",
    "e2lsh_hash",
    "srp_hash",
    "hash_k",
    "naive_hash",
    "rank_condition_check",
]

# Preset quantization width; callers tune per data scale.
DEFAULT_WIDTH = 4.0


class FamilyKind(enum.Enum):
    """Which projection structure and which hash law a family uses."""

    CP_E2LSH = "cp-e2lsh"
    TT_E2LSH = "tt-e2lsh"
    CP_SRP = "cp-srp"
    TT_SRP = "tt-srp"
    NAIVE_E2LSH = "naive-e2lsh"
    NAIVE_SRP = "naive-srp"

    @property
    def is_euclidean(self) -> bool:
        return self in (FamilyKind.CP_E2LSH, FamilyKind.TT_E2LSH, FamilyKind.NAIVE_E2LSH)

    @property
    def is_sign(self) -> bool:
        return not self.is_euclidean

    @property
    def is_naive(self) -> bool:
        return self in (FamilyKind.NAIVE_E2LSH, FamilyKind.NAIVE_SRP)

    @property
    def decomposition(self) -> Decomposition | None:
        if self in (FamilyKind.CP_E2LSH, FamilyKind.CP_SRP):
            return Decomposition.CP
        if self in (FamilyKind.TT_E2LSH, FamilyKind.TT_SRP):
            return Decomposition.TT
        return None


@dataclass(frozen=True)
class E2lshFamily:
    """One Euclidean hash function: projection tensor, width, and offset.

    The offset is fixed at construction from the family's seed stream, so a
    family hashes identically for its whole lifetime.
    """

    projection: CpTensor | TtTensor
    width: float
    offset: float
    seed: int = 0
    component_index: int = 0

    def __post_init__(self) -> None:
        if not (self.width > 0 and math.isfinite(self.width)):
            raise ValueError("width must be positive and finite")
        if not 0 <= self.offset < self.width:
            raise ValueError("offset must lie in [0, width)")


@dataclass(frozen=True)
class SrpFamily:
    """One sign hash function: just the projection tensor."""

    projection: CpTensor | TtTensor
    seed: int = 0
    component_index: int = 0


@dataclass(frozen=True)
class HashVector:
    """K codes for one input plus the family kind that produced them."""

    codes: np.ndarray  # int64, shape (K,)
    kind: FamilyKind

    def __post_init__(self) -> None:
        codes = np.ascontiguousarray(self.codes, dtype=np.int64)
        codes.flags.writeable = False
        object.__setattr__(self, "codes", codes)

    def __len__(self) -> int:
        return len(self.codes)


def _projection_config(
    kind: FamilyKind, shape, rank: int, seed: int, component_index: int
) -> SamplerConfig:
    decomposition = kind.decomposition
    if decomposition is None:
        raise ValueError(f"{kind.value} has no low-rank projection")
    return SamplerConfig(
        shape=tuple(shape),
        rank=rank,
        distribution=Distribution.RADEMACHER,
        decomposition=decomposition,
        seed=seed,
        component_index=component_index,
    )


def make_e2lsh_family(
    kind: FamilyKind,
    shape,
    rank: int,
    width: float = DEFAULT_WIDTH,
    seed: int = 0,
    component_index: int = 0,
) -> E2lshFamily:
    """Construct a Euclidean family with a CP or TT projection.

    The projection tensor and the uniform offset come from disjoint streams
    of the same (seed, component_index), so the family is a pure function of
    its arguments.
    """
    if not kind.is_euclidean or kind.is_naive:
        raise ValueError(f"{kind.value} is not a low-rank Euclidean family")
    cfg = _projection_config(kind, shape, rank, seed, component_index)
    projection = sample_projection(cfg)
    offset_stream = rng.stream(seed, rng.DOMAIN_OFFSET, component_index)
    offset = float(offset_stream.uniform(0.0, width))
    return E2lshFamily(projection, float(width), offset, seed, component_index)


def make_srp_family(
    kind: FamilyKind,
    shape,
    rank: int,
    seed: int = 0,
    component_index: int = 0,
) -> SrpFamily:
    """Construct a sign family with a CP or TT projection."""
    if not kind.is_sign or kind.is_naive:
        raise ValueError(f"{kind.value} is not a low-rank sign family")
    cfg = _projection_config(kind, shape, rank, seed, component_index)
    return SrpFamily(sample_projection(cfg), seed, component_index)


def e2lsh_hash(family: E2lshFamily, x: Tensor) -> int:
    """Bucket index floor((<proj, x> + offset) / width); floor is toward -inf."""
    value = inner(family.projection, x)
    return int(math.floor((value + family.offset) / family.width))


def srp_hash(family: SrpFamily, x: Tensor) -> int:
    """Sign bit of the projection: 1 if strictly positive, else 0."""
    return 1 if inner(family.projection, x) > 0 else 0


def hash_k(
    kind: FamilyKind,
    x: Tensor,
    rank: int,
    num_codes: int,
    width: float = DEFAULT_WIDTH,
    seed: int = 0,
    base_component: int = 0,
) -> HashVector:
    """Evaluate K independent families of one kind on x.

    Families use component indices base..base+K-1, each with its own
    projection (and, for Euclidean kinds, its own offset).
    """
    if num_codes < 1:
        raise ValueError("num_codes must be positive")
    if kind.is_naive:
        return naive_hash(kind, x, num_codes, width, seed, base_component)
    codes = np.empty(num_codes, dtype=np.int64)
    for k in range(num_codes):
        component = base_component + k
        if kind.is_euclidean:
            fam = make_e2lsh_family(kind, x.shape, rank, width, seed, component)
            codes[k] = e2lsh_hash(fam, x)
        else:
            fam = make_srp_family(kind, x.shape, rank, seed, component)
            codes[k] = srp_hash(fam, x)
    return HashVector(codes, kind)


def naive_hash(
    kind: FamilyKind,
    x: DenseTensor,
    num_codes: int,
    width: float = DEFAULT_WIDTH,
    seed: int = 0,
    base_component: int = 0,
) -> HashVector:
    """Dense-Gaussian baseline hashes of a dense tensor.

    Flattens x and projects onto iid N(0,1) vectors -- one per code -- then
    applies the same bucket or sign law as the structured families. Only
    dense input is supported; cost is O(K * prod d_n) per call.
    """
    if not kind.is_naive:
        raise ValueError(f"{kind.value} is not a naive baseline kind")
    if not isinstance(x, DenseTensor):
        raise TypeError("naive baseline families hash dense tensors only")
    if num_codes < 1:
        raise ValueError("num_codes must be positive")
    if kind is FamilyKind.NAIVE_E2LSH and not width > 0:
        raise ValueError("width must be positive")
    flat = x.data.ravel()
    codes = np.empty(num_codes, dtype=np.int64)
    for k in range(num_codes):
        component = base_component + k
        direction = rng.stream(seed, rng.DOMAIN_NAIVE, component).standard_normal(flat.size)
        value = float(direction @ flat)
        if kind is FamilyKind.NAIVE_E2LSH:
            offset = float(rng.stream(seed, rng.DOMAIN_OFFSET, component).uniform(0.0, width))
            codes[k] = math.floor((value + offset) / width)
        else:
            codes[k] = 1 if value > 0 else 0
    return HashVector(codes, kind)


@dataclass(frozen=True)
class RankConditionReport:
    """Diagnostic for the heuristic rank-growth condition behind normality.

    The asymptotic analysis wants ``lhs`` to grow strictly slower than
    ``rhs``; at any finite size only the ratio is observable, so this is
    advisory, never a gate. ``rhs`` uses exponent (3N - 8) / (10N), which is
    negative for order-2 tensors -- no rank satisfies the condition there.
    """

    lhs: float
    rhs: float
    ratio: float
    exponent: float
    satisfied_margin: float  # rhs - lhs; positive means the heuristic holds
    note: str

    @property
    def heuristic_ok(self) -> bool:
        return self.ratio <= 1.0


def rank_condition_check(shape, rank: int, decomposition: Decomposition) -> RankConditionReport:
    """Evaluate the rank-growth heuristic for a shape/rank/format triple."""
    shape = validate_shape(shape)
    if rank < 1:
        raise ValueError("rank must be positive")
    n = len(shape)
    if decomposition is Decomposition.CP:
        lhs = math.sqrt(rank) * n ** 0.8
    else:
        lhs = math.sqrt(float(rank) ** (n - 1)) * n ** 0.8
    exponent = (3 * n - 8) / (10 * n)
    rhs = float(num_elements(shape)) ** exponent
    ratio = lhs / rhs
    if exponent <= 0:
        note = "asymptotic condition unsatisfiable at this order"
    elif ratio > 1.0:
        note = "asymptotic regime not reached"
    else:
        note = "heuristic satisfied"
    return RankConditionReport(
        lhs=lhs,
        rhs=rhs,
        ratio=ratio,
        exponent=exponent,
        satisfied_margin=rhs - lhs,
        note=note,
    )
