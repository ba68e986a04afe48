import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.special import ndtr

from golden import ORACLE
from qng import fock, info, states
from qng.errors import NormalizationError, SampleSizeError, ShapeError, SupportError
from qng.quadrature import QuadratureDirection, QuadratureDistribution, QuadratureGrid, distribution

GRID = QuadratureGrid(0.0, 10.0, 4096)


def gauss(var, mean=0.0, grid=GRID):
    return QuadratureDistribution.from_density(grid, info.gaussian_density(grid.x, mean, var))


def fock_dist(n, grid=GRID):
    return QuadratureDistribution.from_density(grid, states.fock_density(n, grid.x))


class TestEntropy:
    def test_vacuum(self):
        assert info.differential_entropy(gauss(0.5)) == pytest.approx(0.5 * math.log(math.pi * math.e), abs=1e-10)
        assert 0.5 * math.log(math.pi * math.e) == pytest.approx(1.07236, abs=1e-5)

    def test_wide(self):
        assert info.differential_entropy(gauss(1.5)) == pytest.approx(0.5 * math.log(3 * math.pi * math.e), abs=1e-10)
        assert 0.5 * math.log(3 * math.pi * math.e) == pytest.approx(1.621671, abs=1e-6)

    def test_fock1_oracle(self):
        h = info.differential_entropy(fock_dist(1))
        assert h == pytest.approx(ORACLE["fock1_entropy"], abs=1e-7)

    def test_error_estimate_small(self):
        _, err = info.entropy_with_error(fock_dist(1))
        assert err < 1e-6

    def test_unnormalized_rejected(self):
        d = QuadratureDistribution(GRID, 2 * info.gaussian_density(GRID.x, 0, 0.5))
        with pytest.raises(NormalizationError):
            info.differential_entropy(d)


class TestNegentropy:
    @pytest.mark.parametrize("var,mean", [(0.5, 0.0), (0.2, 1.0), (2.0, -0.5)])
    def test_gaussian_zero(self, var, mean):
        assert info.negentropy(gauss(var, mean)) < 1e-7

    def test_fock1(self):
        assert info.negentropy(fock_dist(1)) == pytest.approx(ORACLE["fock1_negentropy"], abs=1e-7)

    @given(st.floats(0.3, 3.0), st.floats(-2.0, 2.0), st.sampled_from([1, 2, 3]))
    def test_affine_invariance(self, a, b, n):
        d = fock_dist(n)
        moved = d.affine(a, b)
        assert info.negentropy(moved) == pytest.approx(info.negentropy(d), abs=1e-7)

    def test_reflection(self):
        d = distribution(states.build(states.parse_spec("randpure:3:seed=1")), QuadratureDirection.single(0.2))
        assert info.negentropy(d.affine(-1.0, 0.0)) == pytest.approx(info.negentropy(d), abs=1e-12)


class TestKL:
    def test_self(self):
        d = fock_dist(2)
        assert info.kl_divergence(d, d) == 0.0

    def test_gaussian_closed_form(self):
        val = info.kl_divergence(gauss(0.5), gauss(1.0))
        assert val == pytest.approx(0.5 * (math.log(2) - 0.5), abs=1e-10)
        assert val == pytest.approx(0.09657, abs=1e-5)

    def test_matched_gaussian_equals_negentropy(self):
        d = fock_dist(1)
        assert info.kl_divergence(d, info.matched_gaussian(d)) == pytest.approx(ORACLE["fock1_negentropy"], abs=1e-7)

    def test_support(self):
        q = QuadratureDistribution(GRID, np.where(GRID.x > 0, 2 * info.gaussian_density(GRID.x, 0, 0.5), 0.0))
        with pytest.raises(SupportError):
            info.kl_divergence(gauss(0.5), q)

    def test_grid_mismatch(self):
        with pytest.raises(ShapeError):
            info.kl_divergence(gauss(0.5), gauss(0.5, grid=QuadratureGrid(0.0, 9.0, 4096)))


class TestBinning:
    def test_vacuum_bins_match_erf(self):
        w = 0.25
        b = info.bin(gauss(0.5), w)
        ref = np.diff(ndtr(b.edges / math.sqrt(0.5)))
        assert np.max(np.abs(b.masses - ref / ref.sum())) < 1e-9

    def test_gaussian_bins_sum(self):
        b = info.gaussian_bins(0.0, 0.5, -10, 10, 0.1)
        assert b.masses.sum() == pytest.approx(1.0)

    def test_merge_nests(self):
        fine = info.bin(fock_dist(1), 0.05, origin=-0.1)
        coarse = info.bin(fock_dist(1), 0.2, origin=-0.1)
        merged = fine.merge(4)
        assert merged.same_binning(coarse)
        assert np.allclose(merged.masses, coarse.masses, atol=1e-9)

    def test_self_zero(self):
        b = info.bin(fock_dist(1), 0.3)
        assert info.binned_kl(b, b) == 0.0

    def test_mismatch(self):
        with pytest.raises(ShapeError):
            info.binned_kl(info.bin(fock_dist(1), 0.3), info.bin(fock_dist(1), 0.2))

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_refinement_monotone_and_converges(self, n):
        p = fock_dist(n)
        mean, var = p.mean, p.variance
        cont = info.kl_divergence(p, info.matched_gaussian(p))
        sigma = 0.8
        prev = None
        for m in (1, 2, 4, 8):
            w = sigma / m
            bp = info.bin(p, w)
            bq = info.gaussian_bins(mean, var, GRID.x[0], GRID.x[-1], w)
            val = info.binned_kl(bp, bq)
            if prev is not None:
                assert val >= prev - 1e-12
            prev = val
        w = GRID.half_width / 2**12
        fine = info.binned_kl(info.bin(p, w), info.gaussian_bins(mean, var, GRID.x[0], GRID.x[-1], w))
        assert abs(fine - cont) < 1e-4
        assert fine <= cont + 1e-9


class TestSamples:
    def test_sample_size(self):
        with pytest.raises(SampleSizeError):
            info.sample_negentropy(np.zeros(10))

    def test_gaussian_samples_near_zero(self):
        x = np.random.default_rng(0).normal(0, math.sqrt(0.5), 200_000)
        est = info.sample_negentropy(x, bins=200, bootstrap=20)
        assert abs(est.value) < 0.01

    def test_fock1_samples(self):
        samples = info.inverse_cdf_samples(fock_dist(1), 200_000, seed=1)
        est = info.sample_negentropy(samples, bins=200, bootstrap=20)
        assert est.value == pytest.approx(ORACLE["fock1_negentropy"], abs=max(0.02, 2 * est.half_width))


class TestDataProcessing:
    def test_convolution_of_gaussians(self):
        g = QuadratureGrid(0.0, 10.0, 4096)
        out = info.convolve_scaled(gauss(0.2, grid=g), gauss(0.5, grid=g), 0.4)
        expected = info.gaussian_density(g.x, 0.0, 0.4 * 0.2 + 0.6 * 0.5)
        assert np.max(np.abs(out.density - expected)) < 1e-5
        assert out.mass == pytest.approx(1.0, abs=1e-6)

    def test_mean_carried(self):
        g = QuadratureGrid(0.0, 10.0, 4096)
        out = info.convolve_scaled(gauss(0.5, 1.0, grid=g), gauss(0.5, grid=g), 0.5)
        assert out.mean == pytest.approx(math.sqrt(0.5), abs=1e-5)

    @pytest.mark.parametrize("eta", [0.3, 0.6, 0.9])
    def test_loss_does_not_raise_negentropy(self, eta):
        p = fock_dist(2)
        vac = gauss(0.5)
        mixed = info.convolve_scaled(p, vac, eta)
        assert info.negentropy(mixed) <= info.negentropy(p) + 1e-7
