import math

import numpy as np
import pytest

from qng import entanglement as ent
from qng import fock, gaussian, states
from qng.errors import DomainError, NoThreshold, TruncationError
from qng.fock import ModeOperator
from qng.states import StateSpec, build


def gram_oracle_min_eigenvalue(gamma):
    """Smallest eigenvalue of c(2|0><0| - |b><-b| - |-b><b|) from its 3 x 3 Gram form."""
    b = math.sqrt(2) * gamma
    c = 1.0 / (2.0 - 2.0 * math.exp(-4 * gamma**2))
    m = c * np.array([[2.0, 0, 0], [0, 0, -1.0], [0, -1.0, 0]])
    o0 = math.exp(-b * b / 2)
    g = np.array([[1.0, o0, o0], [o0, 1.0, math.exp(-2 * b * b)], [o0, math.exp(-2 * b * b), 1.0]])
    return float(np.min(np.linalg.eigvals(m @ g).real))


class TestLocalModes:
    @pytest.mark.parametrize("gamma", [0.3, 0.82, 1.0, 1.6])
    def test_closed_form_matches_pipeline(self, gamma):
        d = ent.ecs_cutoff(gamma)
        a1, a2 = ent.ecs_local_modes(gamma, d)
        b1, b2 = ent.ecs_local_modes_generic(gamma, d)
        assert np.max(np.abs(a1 - b1)) < 1e-7
        assert np.max(np.abs(a2 - b2)) < 1e-7

    @pytest.mark.parametrize("gamma", [0.05, 0.5, 1.0, 2.0])
    def test_traces(self, gamma):
        r1, r2 = ent.ecs_local_modes(gamma)
        assert np.trace(r1).real == pytest.approx(1.0, abs=1e-10)
        assert np.trace(r2).real == pytest.approx(1.0, abs=1e-10)

    def test_small_gamma_limit(self):
        # the state tends to (|01> - |10>)/sqrt 2, whose local modes are diag(1/2, 1/2)
        for r in ent.ecs_local_modes(0.01):
            assert np.allclose(r[:2, :2], 0.5 * np.eye(2), atol=1e-3)
            assert np.max(np.abs(r[2:, 2:])) < 1e-3

    @pytest.mark.parametrize("gamma", [0.7, 1.0, 1.3])
    def test_mode2_negative_eigenvalue(self, gamma):
        _, r2 = ent.ecs_local_modes(gamma)
        lo = np.linalg.eigvalsh(r2)[0]
        assert lo < 0
        assert lo == pytest.approx(gram_oracle_min_eigenvalue(gamma), abs=1e-9)

    def test_cutoff_too_small(self):
        with pytest.raises(TruncationError):
            ent.ecs_local_modes(2.0, 10)

    def test_bad_gamma(self):
        with pytest.raises(DomainError):
            ent.ecs_local_modes(0.0)


class TestWitness:
    def test_detects_at_one(self):
        rep = ent.ecs_witness(1.0)
        assert rep.enhanced_detects
        assert not rep.gaussian_ppt_detects
        assert rep.margin < 0

    def test_silent_at_half(self):
        rep = ent.ecs_witness(0.5)
        assert not rep.enhanced_detects
        assert not rep.gaussian_ppt_detects
        assert rep.margin > 0

    def test_mode2_densities_nonnegative(self):
        rep = ent.ecs_witness(1.0)
        assert not rep.modes[1].unphysical_by_density
        assert rep.modes[1].nkl is not None

    @pytest.mark.parametrize("seed", range(10))
    def test_separable_mixed_products(self, seed):
        rng = np.random.default_rng(seed)
        a = states.random_mixed(3, rng, cutoff=8)
        b = states.random_mixed(3, rng, cutoff=8)
        theta = rng.uniform(0, math.pi / 2)
        rep = ent.enhanced_ppt_witness(fock.tensor(a, b), fock.beam_splitter(theta, 8))
        assert not rep.enhanced_detects
        assert not rep.gaussian_ppt_detects

    @pytest.mark.parametrize("seed", range(10))
    def test_separable_coherent_products(self, seed):
        rng = np.random.default_rng(100 + seed)
        d = 20
        a = build(StateSpec("coherent", tuple(rng.uniform(-0.5, 0.5, 2))), d)
        b = build(StateSpec("coherent", tuple(rng.uniform(-0.5, 0.5, 2))), d)
        rep = ent.enhanced_ppt_witness(fock.tensor(a, b), fock.beam_splitter(math.pi / 4, d))
        assert not rep.enhanced_detects
        assert not rep.gaussian_ppt_detects

    def test_tmsv_gaussian_ppt(self):
        d = 24
        rep = ent.enhanced_ppt_witness(build(StateSpec("tmsv", (0.5,)), d), fock.beam_splitter(math.pi / 4, d))
        assert rep.gaussian_ppt_detects and rep.enhanced_detects

    def test_non_gaussian_diagonalizer(self):
        d = 6
        # Kerr phase exp(i n^2) is unitary but not linear
        kerr = np.diag(np.exp(1j * np.arange(d) ** 2 * 0.3))
        op = ModeOperator(d, 2, np.kron(kerr, np.eye(d)).astype(complex))
        with pytest.raises(DomainError):
            ent.enhanced_ppt_witness(build(StateSpec("pnes", (0.5,)), d), op)

    def test_rejects_single_mode(self):
        with pytest.raises(DomainError):
            ent.transformed_partial_transpose(fock.vacuum(1, 4), fock.beam_splitter(0.1, 4))

    def test_csv(self):
        sweep = ent.SweepResult(0.8, [ent.ecs_witness(0.9)])
        lines = sweep.to_csv().splitlines()
        assert lines[0] == "gamma,lhs,rhs,gaussian_ppt_detects,enhanced_detects"
        assert lines[1].startswith("0.9,")


class TestSweep:
    def test_threshold(self):
        res = ent.witness_sweep(np.linspace(0.5, 1.2, 15))
        assert res.threshold == pytest.approx(0.82, abs=0.01)
        assert not any(r.gaussian_ppt_detects for r in res.reports)

    def test_above(self):
        with pytest.raises(NoThreshold) as info:
            ent.witness_sweep(np.linspace(1.0, 2.0, 6))
        assert info.value.detects is True

    def test_below(self):
        with pytest.raises(NoThreshold) as info:
            ent.witness_sweep(np.linspace(0.1, 0.4, 4))
        assert info.value.detects is False

    def test_grid_order(self):
        with pytest.raises(DomainError):
            ent.witness_sweep([0.9, 0.8])


def test_partial_transpose_covariance_sign():
    d = 20
    s = build(StateSpec("ecs", (0.7,)), d)
    a = gaussian.covariance(s).gamma
    b = gaussian.covariance_of_matrix(fock.partial_transpose(s), d, 2).gamma
    flip = np.diag([1, 1, 1, -1])
    assert np.allclose(b, flip @ a @ flip, atol=1e-8)
