import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qng import fock, gaussian, measures
from qng.errors import DomainError
from qng.gaussian import CovarianceData
from qng.states import StateSpec, build, parse_spec


class TestH:
    def test_pure(self):
        assert gaussian.h(0.5) == 0.0

    def test_thermal_one(self):
        assert gaussian.h(1.5) == pytest.approx(2 * math.log(2), abs=1e-14)

    def test_below_domain(self):
        with pytest.raises(DomainError):
            gaussian.h(0.3)

    def test_inverse_zero(self):
        assert gaussian.h_inverse(0.0) == 0.5

    def test_inverse_negative(self):
        with pytest.raises(DomainError):
            gaussian.h_inverse(-0.1)

    @given(st.floats(0.5, 500.0))
    def test_round_trip(self, x):
        assert gaussian.h_inverse(gaussian.h(x)) == pytest.approx(x, rel=1e-10, abs=1e-10)

    @given(st.floats(0.5, 50.0), st.floats(0.0, 5.0))
    def test_monotone(self, x, dx):
        assert gaussian.h(x + dx) >= gaussian.h(x)


class TestCovariance:
    def test_vacuum(self):
        cov = gaussian.covariance(fock.vacuum(1, 6))
        assert np.allclose(cov.gamma, 0.5 * np.eye(2))
        assert np.allclose(cov.means, 0)

    @pytest.mark.parametrize("n", range(5))
    def test_fock(self, n):
        cov = gaussian.covariance(fock.basis_state(n, 10))
        assert np.allclose(cov.gamma, (n + 0.5) * np.eye(2), atol=1e-13)

    def test_coherent_means(self):
        cov = gaussian.covariance(build(StateSpec("coherent", (0.7, -0.4))))
        assert np.allclose(cov.means, [math.sqrt(2) * 0.7, math.sqrt(2) * -0.4], atol=1e-10)
        assert np.allclose(cov.gamma, 0.5 * np.eye(2), atol=1e-9)

    def test_squeezed(self):
        r = 0.5
        cov = gaussian.covariance(build(StateSpec("squeezed", (r,))))
        assert np.allclose(cov.gamma, 0.5 * np.diag([math.exp(-2 * r), math.exp(2 * r)]), atol=1e-9)

    def test_tmsv(self):
        s = 0.5
        cov = gaussian.covariance(build(parse_spec("tmsv:0.5")))
        ch, sh = math.cosh(2 * s) / 2, math.sinh(2 * s) / 2
        assert np.allclose(cov.gamma[:2, :2], ch * np.eye(2), atol=1e-9)
        assert np.allclose(cov.gamma[2:, 2:], ch * np.eye(2), atol=1e-9)
        assert np.allclose(np.abs(cov.gamma[:2, 2:]), sh * np.eye(2), atol=1e-9)
        assert cov.gamma[0, 2] * cov.gamma[1, 3] < 0

    def test_physicality(self):
        cov = gaussian.covariance(build(parse_spec("evencat:1")))
        assert cov.physicality_margin() >= -1e-12


class TestSymplectic:
    def test_vacuum(self):
        assert gaussian.symplectic_eigenvalues(gaussian.covariance(fock.vacuum(1, 4))).nus == pytest.approx((0.5,))

    def test_thermal(self):
        cov = gaussian.covariance(build(StateSpec("thermal", (1.0,)), 80))
        assert gaussian.symplectic_eigenvalues(cov).nus[0] == pytest.approx(1.5, abs=1e-9)

    def test_pure_two_mode(self):
        nus = gaussian.symplectic_eigenvalues(gaussian.covariance(build(parse_spec("tmsv:0.5")))).nus
        assert nus == pytest.approx((0.5, 0.5), abs=1e-8)

    def test_partial_transpose_tmsv(self):
        state = build(parse_spec("tmsv:0.5"))
        pt = fock.partial_transpose(state)
        cov = gaussian.covariance_of_matrix(pt, state.cutoff, 2)
        nus = gaussian.symplectic_eigenvalues(cov).nus
        assert nus[0] == pytest.approx(math.exp(-1.0) / 2, abs=1e-8)
        assert nus[0] == pytest.approx(0.18394, abs=1e-5)

    def test_partial_transpose_flips_momentum(self):
        state = build(parse_spec("pnes:0.4"), 6)
        a = gaussian.covariance(state)
        b = gaussian.covariance_of_matrix(fock.partial_transpose(state), 6, 2)
        flip = np.diag([1, 1, 1, -1])
        assert np.allclose(b.gamma, flip @ a.gamma @ flip, atol=1e-12)


class TestEntropies:
    def test_pure(self):
        s = build(parse_spec("evencat:1"))
        assert gaussian.von_neumann_entropy(s) == 0.0
        assert gaussian.renyi2_entropy(s) == 0.0

    def test_maximally_mixed_qubit(self):
        s = fock.make_mixed(np.diag([0.5, 0.5]))
        assert gaussian.von_neumann_entropy(s) == pytest.approx(math.log(2))
        assert gaussian.renyi2_entropy(s) == pytest.approx(math.log(2))

    def test_thermal_one(self):
        s = build(StateSpec("thermal", (1.0,)), 64)
        assert gaussian.von_neumann_entropy(s) == pytest.approx(2 * math.log(2), abs=1e-9)
        assert gaussian.renyi2_entropy(s) == pytest.approx(math.log(3), abs=1e-9)

    def test_shannon(self):
        assert gaussian.shannon_entropy([0.25] * 4) == pytest.approx(math.log(4))


class TestGap:
    def test_pure(self):
        assert gaussian.gaussian_entropy_gap(gaussian.SymplecticSpectrum((0.5,))) == pytest.approx(math.log(1.0))
        assert 0.0 >= gaussian.LN2_OVER_E

    def test_thermal_one(self):
        val = gaussian.gaussian_entropy_gap(gaussian.SymplecticSpectrum((1.5,)))
        assert val == pytest.approx(math.log(3) - 2 * math.log(2), abs=1e-14)

    def test_limit(self):
        val = gaussian.gaussian_entropy_gap(gaussian.SymplecticSpectrum((1000.5,)))
        assert abs(val - math.log(2 / math.e)) < 1e-3

    @given(st.lists(st.floats(0.5, 1e4), min_size=1, max_size=3))
    def test_lower_bound(self, nus):
        gap = gaussian.gaussian_entropy_gap(gaussian.SymplecticSpectrum(tuple(nus)))
        assert gap >= len(nus) * math.log(2 / math.e) - 1e-12

    def test_thermal_difference_monotone(self):
        grid = np.logspace(-3, 3, 40)
        vals = [gaussian.entropy_gap_thermal(n) for n in grid]
        assert np.all(np.diff(vals) > 0)


class TestReference:
    def test_vacuum(self):
        ref = gaussian.reference_gaussian_fock(gaussian.covariance(fock.vacuum(1, 8)), 8)
        assert np.allclose(ref.matrix, fock.vacuum(1, 8).dm(), atol=1e-14)

    def test_fock1_is_thermal(self):
        ref = gaussian.reference_gaussian_fock(gaussian.covariance(fock.basis_state(1, 64)), 64)
        assert np.allclose(np.diag(ref.matrix)[:10].real, 0.5 ** (np.arange(10) + 1), atol=1e-12)

    @pytest.mark.parametrize("spec", ["evencat:1", "oddcat:0.8", "randmixed:3:seed=4", "coherent:0.5,0.3",
                                      "squeezed:0.4", "randpure:4:seed=2"])
    def test_round_trip(self, spec):
        state = build(parse_spec(spec), 48)
        cov = gaussian.covariance(state)
        ref = measures.reference_state(state)
        back = gaussian.covariance(ref)
        assert np.allclose(back.gamma, cov.gamma, atol=1e-6)
        assert np.allclose(back.means, cov.means, atol=1e-6)

    def test_unphysical(self):
        with pytest.raises(DomainError):
            gaussian.reference_gaussian_fock(CovarianceData(np.zeros(2), 0.1 * np.eye(2)), 8)
