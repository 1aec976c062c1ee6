"""Projection sampler tests: determinism, scales, moments, stream disjointness."""

import math

import numpy as np
import pytest
from scipy import stats

from tensorlsh import (
    Decomposition,
    Distribution,
    DenseTensor,
    SamplerConfig,
    inner,
    project,
    sample_cp,
    sample_projection,
    sample_tt,
)


def _cfg(**kw):
    base = dict(shape=(4, 4, 4), rank=2, seed=7)
    base.update(kw)
    return SamplerConfig(**base)


class TestDeterminism:
    @pytest.mark.parametrize("decomposition", [Decomposition.CP, Decomposition.TT])
    @pytest.mark.parametrize(
        "distribution", [Distribution.RADEMACHER, Distribution.GAUSSIAN]
    )
    def test_identical_configs_identical_tensors(self, decomposition, distribution):
        cfg = _cfg(decomposition=decomposition, distribution=distribution)
        a = sample_projection(cfg)
        b = sample_projection(cfg)
        parts_a = a.factors if decomposition is Decomposition.CP else a.cores
        parts_b = b.factors if decomposition is Decomposition.CP else b.cores
        for pa, pb in zip(parts_a, parts_b):
            assert np.array_equal(pa, pb)

    def test_component_index_changes_tensor(self):
        a = sample_cp(_cfg())
        b = sample_cp(_cfg(component_index=1))
        assert any(
            not np.array_equal(fa, fb) for fa, fb in zip(a.factors, b.factors)
        )

    def test_seed_changes_tensor(self):
        a = sample_cp(_cfg(seed=7))
        b = sample_cp(_cfg(seed=8))
        assert any(
            not np.array_equal(fa, fb) for fa, fb in zip(a.factors, b.factors)
        )

    def test_mode_streams_disjoint(self):
        # square modes: factor arrays are same-shaped but must differ per mode
        t = sample_cp(_cfg(shape=(5, 5, 5)))
        assert not np.array_equal(t.factors[0], t.factors[1])
        assert not np.array_equal(t.factors[1], t.factors[2])


class TestScalesAndEntries:
    def test_cp_scale(self):
        for rank in (1, 2, 5):
            t = sample_cp(_cfg(rank=rank))
            assert t.scale == 1.0 / math.sqrt(rank)

    def test_tt_scale(self):
        for order, rank in ((2, 3), (3, 3), (4, 2)):
            t = sample_tt(
                _cfg(shape=(3,) * order, rank=rank, decomposition=Decomposition.TT)
            )
            assert t.scale == pytest.approx(1.0 / math.sqrt(float(rank) ** (order - 1)), abs=0)

    def test_rademacher_entries_exact(self):
        t = sample_cp(_cfg(rank=3))
        for f in t.factors:
            assert set(np.unique(f)) <= {-1.0, 1.0}

    def test_gaussian_entries_continuous(self):
        t = sample_cp(_cfg(rank=3, distribution=Distribution.GAUSSIAN))
        flat = np.concatenate([f.ravel() for f in t.factors])
        assert len(np.unique(flat)) == flat.size

    def test_tt_core_shapes(self):
        t = sample_tt(_cfg(shape=(3, 4, 5), rank=2, decomposition=Decomposition.TT))
        assert [c.shape for c in t.cores] == [(1, 3, 2), (2, 4, 2), (2, 5, 1)]

    def test_tt_order_one(self):
        t = sample_tt(_cfg(shape=(6,), rank=4, decomposition=Decomposition.TT))
        assert [c.shape for c in t.cores] == [(1, 6, 1)]
        assert t.scale == 1.0

    def test_wrong_decomposition_rejected(self):
        with pytest.raises(ValueError):
            sample_cp(_cfg(decomposition=Decomposition.TT))
        with pytest.raises(ValueError):
            sample_tt(_cfg(decomposition=Decomposition.CP))

    def test_config_validation(self):
        with pytest.raises(ValueError):
            SamplerConfig(shape=(4, 4), rank=0)
        with pytest.raises(ValueError):
            SamplerConfig(shape=(4, 4), rank=1, seed=-1)
        with pytest.raises(ValueError):
            SamplerConfig(shape=(4, 4), rank=1, component_index=-1)


class TestMomentIdentities:
    """Sample mean/variance of <P, X> vs the exact targets (0, ||X||_F^2)."""

    SAMPLES = 10_000

    @pytest.mark.parametrize("decomposition", [Decomposition.CP, Decomposition.TT])
    @pytest.mark.parametrize(
        "distribution", [Distribution.RADEMACHER, Distribution.GAUSSIAN]
    )
    @pytest.mark.parametrize("rank", [1, 2, 4])
    def test_mean_and_variance(self, decomposition, distribution, rank):
        rng = np.random.default_rng(42)
        x = DenseTensor(rng.standard_normal((4, 4, 4)))
        norm_sq = inner(x, x)
        vals = np.empty(self.SAMPLES)
        for t in range(self.SAMPLES):
            cfg = SamplerConfig(
                shape=(4, 4, 4),
                rank=rank,
                distribution=distribution,
                decomposition=decomposition,
                seed=99,
                component_index=t,
            )
            vals[t] = inner(sample_projection(cfg), x)
        n = self.SAMPLES
        assert abs(vals.mean()) <= 3.0 * math.sqrt(norm_sq / n)
        sample_var = vals.var(ddof=1)
        centered = vals - vals.mean()
        m2 = float(np.mean(centered**2))
        m4 = float(np.mean(centered**4))
        var_band = 3.0 * math.sqrt(max(m4 - m2 * m2, 0.0) / n)
        assert abs(sample_var - norm_sq) <= var_band


class TestProject:
    def test_scaling_by_sqrt_k(self):
        rng = np.random.default_rng(1)
        x = DenseTensor(rng.standard_normal((3, 3)))
        cfg = SamplerConfig(shape=(3, 3), rank=2, seed=5)
        out = project(cfg, x, num_components=4)
        manual = np.array(
            [
                inner(sample_projection(SamplerConfig(
                    shape=(3, 3), rank=2, seed=5, component_index=k)), x)
                for k in range(4)
            ]
        )
        np.testing.assert_allclose(out, manual / 2.0, rtol=0, atol=0)

    def test_component_offset(self):
        rng = np.random.default_rng(2)
        x = DenseTensor(rng.standard_normal((3, 3)))
        base = SamplerConfig(shape=(3, 3), rank=2, seed=5)
        shifted = SamplerConfig(shape=(3, 3), rank=2, seed=5, component_index=2)
        np.testing.assert_array_equal(
            project(base, x, num_components=4)[2:], project(shifted, x, num_components=2) * math.sqrt(2.0 / 4.0)
        )

    def test_rejects_zero_components(self):
        x = DenseTensor(np.ones((2, 2)))
        with pytest.raises(ValueError):
            project(SamplerConfig(shape=(2, 2), rank=1), x, num_components=0)


class TestStreamIndependence:
    """Adjacent components' entries show no correlation (chi-square, alpha=0.001)."""

    def test_rademacher_entry_independence(self):
        pairs = 50_000  # 1e5 samples in total
        a = np.empty(pairs, dtype=np.int64)
        b = np.empty(pairs, dtype=np.int64)
        for k in range(pairs):
            fa = sample_cp(
                SamplerConfig(shape=(2, 2), rank=1, seed=77, component_index=2 * k)
            ).factors[0]
            fb = sample_cp(
                SamplerConfig(shape=(2, 2), rank=1, seed=77, component_index=2 * k + 1)
            ).factors[0]
            a[k] = fa[0, 0] > 0
            b[k] = fb[0, 0] > 0
        table = np.zeros((2, 2))
        for i in range(2):
            for j in range(2):
                table[i, j] = np.sum((a == i) & (b == j))
        chi2, _, _, _ = stats.chi2_contingency(table, correction=False)
        critical = stats.chi2.ppf(1 - 0.001, df=1)
        assert chi2 <= critical, f"chi2={chi2:.2f} exceeds {critical:.2f}"
