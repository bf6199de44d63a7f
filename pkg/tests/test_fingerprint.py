import numpy as np
import pytest

from conftest import random_offgrid_set, random_ongrid_set

from tbf import (
    ArrayGeometry,
    MultipathSet,
    OfdmConfig,
    add_awgn,
    assemble_sft,
    sft_to_tb,
    sftf_inner_closed,
    sftf_small,
    sftf_trace,
    tbf_exact,
    tbf_monte_carlo,
    transform_matrices,
)
from tbf.analysis import path_from_grid_coords
from tbf.errors import ParameterError, SftfSizeError
from tbf.fingerprint import Tbf


class TestExact:
    def test_single_ongrid_path_one_hot(self, tiny_geom, tiny_cfg):
        p = path_from_grid_coords(1, 1, 2, 1, 1.0, tiny_geom, tiny_cfg)
        f = tbf_exact(MultipathSet(paths=(p,)), tiny_geom, tiny_cfg)
        # dense oracle: project the unit-gain channel and square it
        t = transform_matrices(tiny_geom, tiny_cfg)
        h = assemble_sft(MultipathSet(paths=(p,)), [1.0], tiny_geom, tiny_cfg)
        oracle = np.abs(sft_to_tb(h, t)) ** 2
        np.testing.assert_allclose(f.data, oracle, atol=1e-12)
        assert np.count_nonzero(f.data > 1e-12) == 1
        assert f.data.max() == pytest.approx(1.0, abs=1e-12)

    def test_power_scale_linearity(self, tiny_geom, tiny_cfg):
        rng = np.random.default_rng(0)
        mp = random_offgrid_set(rng, tiny_geom, tiny_cfg)
        scaled = MultipathSet(paths=tuple(
            type(p)(p.gain_variance * 3.0, p.elevation, p.azimuth, p.delay, p.doppler)
            for p in mp))
        f1 = tbf_exact(mp, tiny_geom, tiny_cfg)
        f3 = tbf_exact(scaled, tiny_geom, tiny_cfg)
        np.testing.assert_allclose(f3.data, 3.0 * f1.data, rtol=1e-12)

    def test_two_disjoint_paths_two_spikes(self, tiny_geom, tiny_cfg):
        p1 = path_from_grid_coords(0, 1, 1, 1, 0.6, tiny_geom, tiny_cfg)
        p2 = path_from_grid_coords(1, 0, 3, 2, 0.4, tiny_geom, tiny_cfg)
        f = tbf_exact(MultipathSet(paths=(p1, p2)), tiny_geom, tiny_cfg)
        assert np.count_nonzero(f.data > 1e-6 * f.data.max()) == 2

    def test_ongrid_power_accounting(self, tiny_geom, tiny_cfg):
        rng = np.random.default_rng(1)
        mp = random_ongrid_set(rng, tiny_geom, tiny_cfg)
        f = tbf_exact(mp, tiny_geom, tiny_cfg)
        assert f.total == pytest.approx(sum(p.gain_variance for p in mp), abs=1e-9)

    def test_offgrid_power_bounded(self, tiny_geom, tiny_cfg):
        rng = np.random.default_rng(2)
        mp = random_offgrid_set(rng, tiny_geom, tiny_cfg)
        f = tbf_exact(mp, tiny_geom, tiny_cfg)
        assert 0 < f.total <= sum(p.gain_variance for p in mp) + 1e-12

    def test_nonnegative_finite(self, tiny_geom, tiny_cfg):
        rng = np.random.default_rng(3)
        f = tbf_exact(random_offgrid_set(rng, tiny_geom, tiny_cfg),
                      tiny_geom, tiny_cfg)
        assert np.all(np.isfinite(f.data)) and np.all(f.data >= 0)
        with pytest.raises(ParameterError):
            Tbf(data=np.array([[[-1.0]]]))


class TestMonteCarlo:
    def test_reproducible(self, tiny_geom, tiny_cfg):
        rng = np.random.default_rng(4)
        mp = random_offgrid_set(rng, tiny_geom, tiny_cfg)
        a = tbf_monte_carlo(mp, tiny_geom, tiny_cfg, n_draws=16, seed=5)
        b = tbf_monte_carlo(mp, tiny_geom, tiny_cfg, n_draws=16, seed=5)
        np.testing.assert_array_equal(a.data, b.data)

    def test_rejects_zero_draws(self, tiny_geom, tiny_cfg):
        rng = np.random.default_rng(5)
        mp = random_offgrid_set(rng, tiny_geom, tiny_cfg)
        with pytest.raises(ParameterError):
            tbf_monte_carlo(mp, tiny_geom, tiny_cfg, n_draws=0, seed=0)

    def test_infinite_snr_equals_noiseless(self, tiny_geom, tiny_cfg):
        rng = np.random.default_rng(6)
        mp = random_offgrid_set(rng, tiny_geom, tiny_cfg)
        a = tbf_monte_carlo(mp, tiny_geom, tiny_cfg, n_draws=32, seed=1)
        b = tbf_monte_carlo(mp, tiny_geom, tiny_cfg, n_draws=32, seed=1,
                            snr_db=float("inf"))
        np.testing.assert_array_equal(a.data, b.data)
        assert b.snr_db is None

    def test_converges_to_exact(self, tiny_geom, tiny_cfg):
        rng = np.random.default_rng(7)
        mp = random_ongrid_set(rng, tiny_geom, tiny_cfg)
        exact = tbf_exact(mp, tiny_geom, tiny_cfg)
        mc = tbf_monte_carlo(mp, tiny_geom, tiny_cfg, n_draws=20_000, seed=2)
        sel = exact.data >= 0.01 * exact.total
        rel = np.abs(mc.data[sel] - exact.data[sel]) / exact.data[sel]
        assert rel.max() <= 0.05

    def test_beam_noise_matches_dense_noise_statistically(self, tiny_geom, tiny_cfg):
        # the factorized noisy path injects equivalent beam-domain noise;
        # its mean must agree with the materialize-and-transform oracle
        rng = np.random.default_rng(8)
        mp = random_ongrid_set(rng, tiny_geom, tiny_cfg)
        fast = tbf_monte_carlo(mp, tiny_geom, tiny_cfg, n_draws=4000, seed=3,
                               snr_db=10.0)
        dense = tbf_monte_carlo(mp, tiny_geom, tiny_cfg, n_draws=4000, seed=4,
                                snr_db=10.0, dense_noise=True)
        assert abs(fast.data.sum() - dense.data.sum()) / dense.data.sum() < 0.05
        np.testing.assert_allclose(fast.data.mean(), dense.data.mean(), rtol=0.05)

    def test_noise_floor_rises_with_lower_snr(self, tiny_geom, tiny_cfg):
        rng = np.random.default_rng(9)
        mp = random_ongrid_set(rng, tiny_geom, tiny_cfg, n_paths=1)
        f_hi = tbf_monte_carlo(mp, tiny_geom, tiny_cfg, n_draws=500, seed=5, snr_db=30.0)
        f_lo = tbf_monte_carlo(mp, tiny_geom, tiny_cfg, n_draws=500, seed=5, snr_db=0.0)
        off_peak = f_lo.data.copy()
        off_peak[np.unravel_index(f_lo.data.argmax(), f_lo.data.shape)] = 0
        off_peak_hi = f_hi.data.copy()
        off_peak_hi[np.unravel_index(f_hi.data.argmax(), f_hi.data.shape)] = 0
        assert off_peak.sum() > off_peak_hi.sum()


class TestSftf:
    def test_cap_enforced(self, tiny_geom):
        cfg = OfdmConfig(n_subcarriers=2048, cp_length=16, subcarrier_spacing=15e3,
                         slots_per_frame=4, symbols_per_slot=2)
        rng = np.random.default_rng(10)
        mp = random_offgrid_set(rng, tiny_geom, cfg)
        with pytest.raises(SftfSizeError):
            sftf_small(mp, tiny_geom, cfg)

    def test_rank1_trace_equals_element_count(self, tiny_geom, tiny_cfg):
        p = path_from_grid_coords(1, 1, 0, 2, 1.0, tiny_geom, tiny_cfg)
        x = sftf_small(MultipathSet(paths=(p,)), tiny_geom, tiny_cfg)
        # pseudo-diagonal: all |G|^2 entries are 1
        trace = sftf_trace(x, x)
        size = 4 * 8 * 8
        assert trace.real == pytest.approx(size ** 2, rel=1e-12)
        diag = np.einsum("acnacn->", x).real
        assert diag == pytest.approx(size, rel=1e-12)

    def test_zero_variance_zero_tensor(self, tiny_geom, tiny_cfg):
        p = path_from_grid_coords(1, 1, 0, 2, 0.0, tiny_geom, tiny_cfg)
        x = sftf_small(MultipathSet(paths=(p,)), tiny_geom, tiny_cfg)
        assert np.all(x == 0)

    def test_hermitian_under_triple_swap(self, tiny_geom, tiny_cfg):
        rng = np.random.default_rng(11)
        mp = random_offgrid_set(rng, tiny_geom, tiny_cfg)
        x = sftf_small(mp, tiny_geom, tiny_cfg)
        for _ in range(20):
            i = tuple(rng.integers(0, s) for s in (4, 8, 8))
            j = tuple(rng.integers(0, s) for s in (4, 8, 8))
            assert x[i + j] == pytest.approx(np.conj(x[j + i]), abs=1e-10)

    def test_closed_form_self_collinearity(self, tiny_geom, tiny_cfg):
        rng = np.random.default_rng(12)
        mp = random_offgrid_set(rng, tiny_geom, tiny_cfg)
        trace, n1, n2 = sftf_inner_closed(mp, mp, tiny_geom, tiny_cfg)
        assert trace / (n1 * n2) == pytest.approx(1.0, abs=1e-12)

    def test_disjoint_ongrid_paths_orthogonal(self, tiny_geom, tiny_cfg):
        mp1 = MultipathSet(paths=(path_from_grid_coords(0, 1, 1, 1, 1.0,
                                                        tiny_geom, tiny_cfg),))
        mp2 = MultipathSet(paths=(path_from_grid_coords(1, 0, 2, 3, 1.0,
                                                        tiny_geom, tiny_cfg),))
        trace, _, _ = sftf_inner_closed(mp1, mp2, tiny_geom, tiny_cfg)
        assert abs(trace) <= 1e-12

    def test_closed_form_matches_materialized(self, tiny_geom, tiny_cfg):
        rng = np.random.default_rng(13)
        for _ in range(5):
            mp1 = random_offgrid_set(rng, tiny_geom, tiny_cfg)
            mp2 = random_offgrid_set(rng, tiny_geom, tiny_cfg)
            trace, n1, n2 = sftf_inner_closed(mp1, mp2, tiny_geom, tiny_cfg)
            mat = sftf_trace(sftf_small(mp1, tiny_geom, tiny_cfg),
                             sftf_small(mp2, tiny_geom, tiny_cfg))
            assert abs(mat.real - trace) / (n1 * n2) <= 1e-8
            assert abs(mat.imag) / (n1 * n2) <= 1e-8


class TestAwgn:
    def test_infinite_snr_unchanged(self, tiny_geom, tiny_cfg):
        rng = np.random.default_rng(14)
        h = rng.standard_normal((4, 8, 8)) + 1j * rng.standard_normal((4, 8, 8))
        out = add_awgn(h, float("inf"), seed=0)
        np.testing.assert_array_equal(out, h)
        assert out is not h

    def test_zero_db_noise_power(self):
        rng = np.random.default_rng(15)
        n = 100_000
        h = np.ones(n, dtype=complex)
        out = add_awgn(h, 0.0, seed=1)
        noise_power = np.mean(np.abs(out - h) ** 2)
        # per-element |noise|^2 is exponential with unit mean
        assert abs(noise_power - 1.0) <= 3.0 / np.sqrt(n)

    def test_seed_determinism(self):
        h = np.ones((16, 16), dtype=complex)
        a = add_awgn(h, 10.0, seed=2)
        b = add_awgn(h, 10.0, seed=2)
        np.testing.assert_array_equal(a, b)
