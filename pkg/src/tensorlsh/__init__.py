"""Locality-sensitive hashing with low-rank tensorized random projections.

Tensors in dense, CP, or tensor-train format are hashed by structured
random projections that never materialize a dense projection tensor, with
per-code collision behavior matching the classic Euclidean-bucket and
sign-hash laws.
"""

from .datagen import pair_at_angle, pair_at_distance, random_cp, random_dense, random_tt
from .families import (
    DEFAULT_WIDTH,
    E2lshFamily,
    FamilyKind,
    HashVector,
    RankConditionReport,
    SrpFamily,
    e2lsh_hash,
    hash_k,
    make_e2lsh_family,
    make_srp_family,
    naive_hash,
    rank_condition_check,
    srp_hash,
)
from .index import IndexParams, LshIndex, load_index, retrieval_probability
from .projection import (
    Decomposition,
    Distribution,
    SamplerConfig,
    project,
    sample_cp,
    sample_projection,
    sample_tt,
)
from .tensorio import FormatError, read_tensor, write_tensor
from .tensors import (
    DENSIFY_LIMIT,
    CapacityError,
    CpTensor,
    DenseTensor,
    ShapeMismatchError,
    Tensor,
    TtTensor,
    angle_between,
    densify,
    densify_cp,
    densify_tt,
    frobenius_distance,
    frobenius_norm,
    inner,
    inner_cp_cp,
    inner_cp_dense,
    inner_cp_tt,
    inner_dense_dense,
    inner_tt_dense,
    inner_tt_tt,
    num_elements,
    validate_shape,
)
from .validate import (
    CollisionReport,
    MomentReport,
    NormalityReport,
    angle_estimator,
    e2lsh_collision_oracle,
    empirical_collision,
    normality_test,
    projection_moments,
    run_default_suite,
    srp_collision_oracle,
)

__version__ = "0.1.0"
