"""Statistical validation: analytic collision laws vs Monte Carlo estimates.

The module answers one question in several forms: do the implemented hash
families behave like their asymptotic theory says they should?

* Analytic side: the bucketed-Euclidean collision law as an adaptive
  quadrature (absolute error <= 1e-10) and the sign-hash law 1 - theta/pi.
* Empirical side: collision rates over freshly drawn families, exact
  finite-sample moment identities of the projections, and a KS test for
  asymptotic normality of the projection values.

Every check reports observed value, expected value, and a 3-sigma band;
``passed`` compares the two at that band. Monte Carlo trials use one keyed
sub-stream per trial index, so results are reproducible and independent of
execution order.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np
from scipy import integrate, stats

from .datagen import pair_at_angle, pair_at_distance, random_dense
from .families import (
    FamilyKind,
    e2lsh_hash,
    make_e2lsh_family,
    make_srp_family,
    naive_hash,
    rank_condition_check,
    srp_hash,
)
from .projection import Decomposition, Distribution, SamplerConfig, sample_projection
from .tensors import Tensor, angle_between, frobenius_distance, frobenius_norm, inner

__all__ = [
    "e2lsh_collision_oracle",
    "srp_collision_oracle",
    "angle_estimator",
    "CollisionReport",
    "AgreementReport",
    "MomentReport",
    "NormalityReport",
    "empirical_collision",
    "agreement_report",
    "projection_moments",
    "normality_test",
    "run_default_suite",
    "report_rows",
    "render_text",
    "write_csv",
    "CSV_COLUMNS",
    "LOW_POWER_TRIALS",
]

# Below this many trials a 3-sigma band is wide enough that a pass carries
# little evidence; reports flag it rather than refusing to run.
LOW_POWER_TRIALS = 1000


# ---------------------------------------------------------------------------
# analytic oracles

def e2lsh_collision_oracle(distance: float, width: float) -> float:
    """Per-code collision probability of bucketed Euclidean hashing.

    Integrates (1/r) * f(t/r) * (1 - t/w) over t in [0, w], where f is the
    density of |N(0, 1)|, r the Frobenius distance, w the bucket width.
    Adaptive quadrature, absolute error <= 1e-10. Depends on (r, w) only
    through r/w.
    """
    if distance < 0:
        raise ValueError("distance must be nonnegative")
    if not width > 0:
        raise ValueError("width must be positive")
    if distance == 0.0:
        return 1.0

    def integrand(t: float) -> float:
        u = t / distance
        return (2.0 / distance) * _PHI_PDF(u) * (1.0 - t / width)

    value, _ = integrate.quad(integrand, 0.0, width, epsabs=1e-12, limit=200)
    return float(value)


def _PHI_PDF(u: float) -> float:
    return math.exp(-0.5 * u * u) / math.sqrt(2.0 * math.pi)


def srp_collision_oracle(angle: float) -> float:
    """Per-code collision probability of sign hashing: 1 - angle/pi."""
    if not 0.0 <= angle <= math.pi:
        raise ValueError("angle must lie in [0, pi]")
    return 1.0 - angle / math.pi


def angle_estimator(collision_fraction: float) -> float:
    """Invert the sign-hash law: angle estimate pi * (1 - fraction)."""
    if not 0.0 <= collision_fraction <= 1.0:
        raise ValueError("collision fraction must lie in [0, 1]")
    return math.pi * (1.0 - collision_fraction)


# ---------------------------------------------------------------------------
# report records

CSV_COLUMNS = [
    "check",
    "family",
    "shape",
    "rank",
    "width",
    "distance",
    "angle",
    "trials",
    "observed",
    "expected",
    "band_3sigma",
    "passed",
    "note",
]


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        return "x".join(str(v) for v in value)
    return str(value)


@dataclass(frozen=True)
class CollisionReport:
    """Empirical vs analytic collision rate for one family kind and one pair."""

    kind: FamilyKind
    shape: tuple[int, ...]
    rank: int | None
    width: float | None
    distance: float
    angle: float
    trials: int
    empirical_rate: float
    analytic_rate: float
    band_3sigma: float
    passed: bool
    note: str = ""

    def rows(self) -> list[dict]:
        return [
            {
                "check": "collision-rate",
                "family": self.kind.value,
                "shape": self.shape,
                "rank": self.rank,
                "width": self.width,
                "distance": self.distance,
                "angle": self.angle,
                "trials": self.trials,
                "observed": self.empirical_rate,
                "expected": self.analytic_rate,
                "band_3sigma": self.band_3sigma,
                "passed": self.passed,
                "note": self.note,
            }
        ]

    @property
    def gating(self) -> bool:
        return True


@dataclass(frozen=True)
class AgreementReport:
    """Two empirical collision rates on the same pair, compared at joint 3-sigma."""

    kind_a: FamilyKind
    kind_b: FamilyKind
    rate_a: float
    rate_b: float
    trials_a: int
    trials_b: int
    band_3sigma: float
    passed: bool
    note: str = ""

    def rows(self) -> list[dict]:
        return [
            {
                "check": "rate-agreement",
                "family": f"{self.kind_a.value}~{self.kind_b.value}",
                "shape": None,
                "rank": None,
                "width": None,
                "distance": None,
                "angle": None,
                "trials": self.trials_a,
                "observed": self.rate_a - self.rate_b,
                "expected": 0.0,
                "band_3sigma": self.band_3sigma,
                "passed": self.passed,
                "note": self.note,
            }
        ]

    @property
    def gating(self) -> bool:
        return True


@dataclass(frozen=True)
class MomentReport:
    """Sample mean / variance / covariance of projections vs exact targets."""

    decomposition: Decomposition
    shape: tuple[int, ...]
    rank: int
    samples: int
    mean: float
    mean_band: float
    variance: float
    variance_target: float
    variance_band: float
    covariance: float
    covariance_target: float
    covariance_band: float
    mean_ok: bool
    variance_ok: bool
    covariance_ok: bool

    @property
    def passed(self) -> bool:
        return self.mean_ok and self.variance_ok and self.covariance_ok

    @property
    def gating(self) -> bool:
        return True

    def rows(self) -> list[dict]:
        base = {
            "family": self.decomposition.value,
            "shape": self.shape,
            "rank": self.rank,
            "width": None,
            "distance": None,
            "angle": None,
            "trials": self.samples,
            "note": "",
        }
        return [
            {
                **base,
                "check": "moment-mean",
                "observed": self.mean,
                "expected": 0.0,
                "band_3sigma": self.mean_band,
                "passed": self.mean_ok,
            },
            {
                **base,
                "check": "moment-variance",
                "observed": self.variance,
                "expected": self.variance_target,
                "band_3sigma": self.variance_band,
                "passed": self.variance_ok,
            },
            {
                **base,
                "check": "moment-covariance",
                "observed": self.covariance,
                "expected": self.covariance_target,
                "band_3sigma": self.covariance_band,
                "passed": self.covariance_ok,
            },
        ]


@dataclass(frozen=True)
class NormalityReport:
    """KS test of standardized projection values against N(0, 1)."""

    decomposition: Decomposition
    shape: tuple[int, ...]
    rank: int
    samples: int
    ks_statistic: float
    ks_pvalue: float
    alpha: float
    rank_ratio: float
    rank_note: str
    asserted: bool  # False: recorded for information, never gates the suite

    @property
    def passed(self) -> bool:
        return self.ks_pvalue > self.alpha

    @property
    def gating(self) -> bool:
        return self.asserted

    def rows(self) -> list[dict]:
        note = self.rank_note if self.asserted else f"not asserted; {self.rank_note}"
        return [
            {
                "check": "normality-ks",
                "family": self.decomposition.value,
                "shape": self.shape,
                "rank": self.rank,
                "width": None,
                "distance": None,
                "angle": None,
                "trials": self.samples,
                "observed": self.ks_statistic,
                "expected": self.ks_pvalue,
                "band_3sigma": self.alpha,
                "passed": self.passed,
                "note": note,
            }
        ]


# ---------------------------------------------------------------------------
# empirical estimators

def _hash_pair_collides(
    kind: FamilyKind,
    x: Tensor,
    y: Tensor,
    rank: int,
    width: float | None,
    seed: int,
    component: int,
) -> bool:
    if kind.is_naive:
        cx = naive_hash(kind, x, 1, width or 1.0, seed, component).codes[0]
        cy = naive_hash(kind, y, 1, width or 1.0, seed, component).codes[0]
        return bool(cx == cy)
    if kind.is_euclidean:
        fam = make_e2lsh_family(kind, x.shape, rank, width, seed, component)
        return e2lsh_hash(fam, x) == e2lsh_hash(fam, y)
    fam = make_srp_family(kind, x.shape, rank, seed, component)
    return srp_hash(fam, x) == srp_hash(fam, y)


def empirical_collision(
    kind: FamilyKind,
    x: Tensor,
    y: Tensor,
    rank: int,
    trials: int,
    width: float | None = None,
    seed: int = 0,
) -> CollisionReport:
    """Collision rate of ``trials`` freshly drawn families on the pair (x, y).

    Trial t uses component index t of the given seed, so any trial subset
    gives the same codes no matter how the loop is scheduled. The 3-sigma
    band is binomial around the analytic rate: 3 * sqrt(p(1-p)/trials).
    """
    if trials < 1:
        raise ValueError("trials must be positive")
    if kind.is_euclidean and not (width and width > 0):
        raise ValueError("Euclidean kinds need a positive width")
    distance = frobenius_distance(x, y)
    angle = angle_between(x, y)
    if kind.is_euclidean:
        analytic = e2lsh_collision_oracle(distance, width)
    else:
        analytic = srp_collision_oracle(angle)
    hits = 0
    for t in range(trials):
        if _hash_pair_collides(kind, x, y, rank, width, seed, t):
            hits += 1
    empirical = hits / trials
    band = 3.0 * math.sqrt(analytic * (1.0 - analytic) / trials)
    note = "widened band (low trial count)" if trials < LOW_POWER_TRIALS else ""
    return CollisionReport(
        kind=kind,
        shape=x.shape,
        rank=None if kind.is_naive else rank,
        width=width if kind.is_euclidean else None,
        distance=distance,
        angle=angle,
        trials=trials,
        empirical_rate=empirical,
        analytic_rate=analytic,
        band_3sigma=band,
        passed=abs(empirical - analytic) <= band,
        note=note,
    )


def agreement_report(a: CollisionReport, b: CollisionReport) -> AgreementReport:
    """Compare two empirical rates at a joint 3-sigma band.

    The band combines both binomial standard errors (computed at the shared
    analytic rate): 3 * sqrt(p(1-p) * (1/n_a + 1/n_b)).
    """
    p = a.analytic_rate
    band = 3.0 * math.sqrt(p * (1.0 - p) * (1.0 / a.trials + 1.0 / b.trials))
    diff = abs(a.empirical_rate - b.empirical_rate)
    return AgreementReport(
        kind_a=a.kind,
        kind_b=b.kind,
        rate_a=a.empirical_rate,
        rate_b=b.empirical_rate,
        trials_a=a.trials,
        trials_b=b.trials,
        band_3sigma=band,
        passed=diff <= band,
    )


def _sample_inners(
    decomposition: Decomposition,
    x: Tensor,
    y: Tensor | None,
    rank: int,
    samples: int,
    seed: int,
) -> tuple[np.ndarray, np.ndarray | None]:
    alphas = np.empty(samples)
    betas = np.empty(samples) if y is not None else None
    cfg = SamplerConfig(
        shape=x.shape,
        rank=rank,
        distribution=Distribution.RADEMACHER,
        decomposition=decomposition,
        seed=seed,
    )
    for t in range(samples):
        p = sample_projection(replace(cfg, component_index=t))
        alphas[t] = inner(p, x)
        if betas is not None:
            betas[t] = inner(p, y)
    return alphas, betas


def projection_moments(
    decomposition: Decomposition,
    x: Tensor,
    y: Tensor,
    rank: int,
    samples: int,
    seed: int = 0,
) -> MomentReport:
    """Check the exact projection moment identities by Monte Carlo.

    Targets: mean 0, variance ||x||_F^2, covariance <x, y> against a second
    fixed tensor. Bands are 3 estimated standard errors: the mean uses the
    exact sd ||x||_F; variance and covariance use their sample fourth-moment
    standard errors.
    """
    if samples < 2:
        raise ValueError("need at least 2 samples")
    alphas, betas = _sample_inners(decomposition, x, y, rank, samples, seed)
    n = samples
    norm_sq = inner(x, x)
    cross = inner(x, y)

    mean = float(alphas.mean())
    mean_band = 3.0 * math.sqrt(norm_sq / n)

    centered = alphas - mean
    m2 = float(np.mean(centered**2))
    m4 = float(np.mean(centered**4))
    variance = m2 * n / (n - 1)
    variance_band = 3.0 * math.sqrt(max(m4 - m2 * m2, 0.0) / n)

    beta_centered = betas - betas.mean()
    cov = float(np.mean(centered * beta_centered)) * n / (n - 1)
    m22 = float(np.mean((centered * beta_centered) ** 2))
    cov_band = 3.0 * math.sqrt(max(m22 - cov * cov, 0.0) / n)

    return MomentReport(
        decomposition=decomposition,
        shape=x.shape,
        rank=rank,
        samples=n,
        mean=mean,
        mean_band=mean_band,
        variance=variance,
        variance_target=norm_sq,
        variance_band=variance_band,
        covariance=cov,
        covariance_target=cross,
        covariance_band=cov_band,
        mean_ok=abs(mean - 0.0) <= mean_band,
        variance_ok=abs(variance - norm_sq) <= variance_band,
        covariance_ok=abs(cov - cross) <= cov_band,
    )


def normality_test(
    decomposition: Decomposition,
    x: Tensor,
    rank: int,
    samples: int,
    seed: int = 0,
    alpha: float = 0.001,
    asserted: bool = True,
) -> NormalityReport:
    """KS test of <P, x> / ||x||_F against N(0, 1) over fresh projections.

    Carries the rank-growth heuristic alongside the decision: when the
    heuristic ratio exceeds 1 the asymptotic regime is not certified and the
    caller should record rather than gate (``asserted=False``).
    """
    if samples < 2:
        raise ValueError("need at least 2 samples")
    alphas, _ = _sample_inners(decomposition, x, None, rank, samples, seed)
    z = alphas / frobenius_norm(x)
    result = stats.kstest(z, "norm")
    cond = rank_condition_check(x.shape, rank, decomposition)
    return NormalityReport(
        decomposition=decomposition,
        shape=x.shape,
        rank=rank,
        samples=samples,
        ks_statistic=float(result.statistic),
        ks_pvalue=float(result.pvalue),
        alpha=alpha,
        rank_ratio=cond.ratio,
        rank_note=cond.note,
        asserted=asserted,
    )


# ---------------------------------------------------------------------------
# suite + serialization

def run_default_suite(seed: int = 42, trials: int = 20_000) -> list:
    """The standard end-to-end statistical suite.

    Deterministic in (seed, trials). Sections: exact moment identities (CP
    and TT), the bucketed-Euclidean collision law at r/w in {0.5, 1, 2}, the
    sign-hash law at angles {pi/6, pi/4, pi/2}, structured-vs-naive rate
    agreement, and KS normality (one gated large-shape setting, plus
    recorded-only settings where the rank heuristic is not met).
    """
    reports: list = []
    width = 1.0
    rank = 3

    # exact moment identities at a small third-order shape
    mx = random_dense((8, 8, 8), seed, tag=11)
    my = random_dense((8, 8, 8), seed, tag=12)
    for decomposition in (Decomposition.CP, Decomposition.TT):
        reports.append(
            projection_moments(decomposition, mx, my, rank=3, samples=trials, seed=seed + 1)
        )

    # bucketed-Euclidean law across distance/width ratios
    for i, ratio in enumerate((0.5, 1.0, 2.0)):
        x, y = pair_at_distance((16, 16, 16), ratio * width, seed, tag=20 + i)
        for kind in (FamilyKind.CP_E2LSH, FamilyKind.TT_E2LSH):
            reports.append(
                empirical_collision(kind, x, y, rank, trials, width=width, seed=seed + 2 + i)
            )

    # sign-hash law across angles
    for i, angle in enumerate((math.pi / 6, math.pi / 4, math.pi / 2)):
        x, y = pair_at_angle((16, 16, 16), angle, seed, tag=30 + i)
        for kind in (FamilyKind.CP_SRP, FamilyKind.TT_SRP):
            reports.append(
                empirical_collision(kind, x, y, rank, trials, seed=seed + 5 + i)
            )

    # structured vs naive baseline on one shared Euclidean setting
    x, y = pair_at_distance((16, 16, 16), width, seed, tag=40)
    naive = empirical_collision(
        FamilyKind.NAIVE_E2LSH, x, y, rank, trials, width=width, seed=seed + 8
    )
    for kind in (FamilyKind.CP_E2LSH, FamilyKind.TT_E2LSH):
        structured = empirical_collision(kind, x, y, rank, trials, width=width, seed=seed + 9)
        reports.append(agreement_report(structured, naive))

    # asymptotic normality: gated at a large fourth-order shape ...
    nx = random_dense((16, 16, 16, 16), seed, tag=50)
    reports.append(
        normality_test(Decomposition.CP, nx, rank=2, samples=trials, seed=seed + 10)
    )
    # ... and recorded (never gated) at a small shape outside the regime
    sx = random_dense((3, 3), seed, tag=51)
    reports.append(
        normality_test(
            Decomposition.CP, sx, rank=2, samples=trials, seed=seed + 11, asserted=False
        )
    )
    return reports


def report_rows(reports) -> list[dict]:
    """Flatten report objects into CSV-ready rows."""
    rows = []
    for r in reports:
        rows.extend(r.rows())
    return rows


def render_text(reports) -> str:
    """Human-readable one-line-per-row rendering (deterministic)."""
    lines = []
    for row in report_rows(reports):
        status = "PASS" if row["passed"] else "FAIL"
        if row["check"] == "normality-ks" and row["note"].startswith("not asserted"):
            status = "INFO"
        fields = " ".join(
            f"{key}={_fmt(row[key])}"
            for key in CSV_COLUMNS
            if key != "passed" and row[key] not in (None, "")
        )
        lines.append(f"{status} {fields}")
    return "\n".join(lines) + "\n"


def write_csv(reports, path: str | Path) -> None:
    """Write the flattened rows as CSV with a fixed header."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for row in report_rows(reports):
            writer.writerow([_fmt(row[key]) for key in CSV_COLUMNS])


def suite_passed(reports) -> bool:
    """True when every gating report passed (recorded-only rows never gate)."""
    return all(r.passed for r in reports if r.gating)
