import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.special import i0e

from qng import fock, states
from qng.errors import SpecParseError, TruncationError
from qng.states import StateSpec, build, parse_spec


class TestSpecGrammar:
    @pytest.mark.parametrize("text,family,params", [
        ("fock:3", "fock", (3.0,)),
        ("evencat:1.2", "evencat", (1.2,)),
        ("coherent:1,0.5", "coherent", (1.0, 0.5)),
        ("tmsv:0.5", "tmsv", (0.5, 0.0)),
        ("phaseavg:1", "pac", (1.0,)),
        ("PNES:0.25", "pnes", (0.25,)),
    ])
    def test_parse(self, text, family, params):
        spec = parse_spec(text)
        assert spec.family == family
        assert spec.params == params

    def test_seed(self):
        spec = parse_spec("randpure:5:seed=42")
        assert spec.seed == 42
        assert str(spec) == "randpure:5:seed=42"

    def test_random_defaults_seed(self):
        assert parse_spec("randmixed:3").seed == 0

    @pytest.mark.parametrize("text", ["", "nope:1", "fock:1.5", "fock:-1", "pnes:1.5", "evencat:x",
                                      "randpure:0", "fock:1,2"])
    def test_rejects(self, text):
        with pytest.raises(SpecParseError):
            parse_spec(text)

    @pytest.mark.parametrize("text", ["fock:3", "evencat:1.2", "tmsv:0.5,0.3", "noisy1:0.25", "vacuum"])
    def test_round_trip(self, text):
        spec = parse_spec(text)
        assert parse_spec(str(spec)) == spec


class TestFamilies:
    def test_pac_purity(self):
        # sum_n Poisson(n; 1)^2 = e^{-2} I0(2)
        s = build(parse_spec("pac:1"))
        assert s.purity() == pytest.approx(i0e(2.0), abs=1e-12)
        assert s.purity() == pytest.approx(0.30850832255367105, abs=1e-12)

    def test_pac_mean(self):
        assert build(parse_spec("pac:1.5")).mean_photon() == pytest.approx(2.25, abs=1e-10)

    @pytest.mark.parametrize("g", [0.4, 1.0, 1.7])
    def test_cat_means(self, g):
        e = build(StateSpec("evencat", (g,))).mean_photon()
        o = build(StateSpec("oddcat", (g,))).mean_photon()
        assert e == pytest.approx(g * g * math.tanh(g * g), abs=1e-10)
        assert o == pytest.approx(g * g / math.tanh(g * g), abs=1e-10)

    def test_cat_parity(self):
        v = build(parse_spec("oddcat:1.1")).vector
        assert np.all(v[::2] == 0)

    def test_squeezed_variance(self):
        r = 0.4
        s = build(StateSpec("squeezed", (r,)))
        assert s.mean_photon() == pytest.approx(math.sinh(r) ** 2, abs=1e-10)

    def test_squeezed_matches_operator(self):
        d = 40
        a = build(StateSpec("squeezed", (0.3,)), d)
        b = fock.apply_unitary(fock.vacuum(1, d), fock.squeezer(0.3, d))
        assert fock.fidelity(a, b) == pytest.approx(1.0, abs=1e-10)

    def test_coherent_matches_displacement(self):
        d = 40
        a = build(StateSpec("coherent", (0.8, -0.3)), d)
        b = fock.apply_unitary(fock.vacuum(1, d), fock.displacement(complex(0.8, -0.3), d))
        assert fock.fidelity(a, b) == pytest.approx(1.0, abs=1e-10)

    def test_thermal(self):
        s = build(StateSpec("thermal", (0.7,)))
        assert s.mean_photon() == pytest.approx(0.7, abs=1e-10)
        assert s.purity() == pytest.approx(1 / (1 + 2 * 0.7), abs=1e-10)

    def test_noisy_single_photon(self):
        s = build(parse_spec("noisy1:0.3"))
        assert np.allclose(np.diag(s.matrix)[:3].real, [0.7, 0.3, 0.0])

    def test_pnes_amplitudes(self):
        s = build(parse_spec("pnes:0.2"), 4)
        v = s.vector.reshape(4, 4)
        assert v[0, 0] == pytest.approx(math.sqrt(0.8))
        assert v[1, 1] == pytest.approx(math.sqrt(0.2))
        assert np.count_nonzero(v) == 2

    def test_tmsv_mean_photon(self):
        s = build(parse_spec("tmsv:0.5"))
        assert s.mean_photon(0) == pytest.approx(math.sinh(0.5) ** 2, abs=1e-9)
        assert s.mean_photon(1) == pytest.approx(math.sinh(0.5) ** 2, abs=1e-9)

    def test_ecs_normalized_and_odd(self):
        s = build(parse_spec("ecs:1"))
        v = s.vector.reshape(s.cutoff, s.cutoff)
        n = np.arange(s.cutoff)
        assert np.linalg.norm(v) == pytest.approx(1.0, abs=1e-12)
        assert np.all(v[(n[:, None] + n[None, :]) % 2 == 0] == 0)

    def test_small_cutoff_raises_with_hint(self):
        with pytest.raises(TruncationError) as info:
            build(parse_spec("coherent:3"), 8)
        assert info.value.required_cutoff and info.value.required_cutoff > 8

    def test_oddcat_zero_undefined(self):
        with pytest.raises(TruncationError):
            build(StateSpec("oddcat", (0.0,)))


class TestPhotonSubtracted:
    def test_f_from_squeezing(self):
        # (e^s - e^-s)^2 / (2 (e^2s + e^-2s)) evaluated at s = 1/2
        assert states.pnes_f_from_squeezing(0.5) == pytest.approx(0.1759728631680573, abs=1e-12)

    @given(st.floats(0.0, 5.0))
    def test_f_below_half(self, s):
        assert 0.0 <= states.pnes_f_from_squeezing(s) <= 0.5

    def test_equivalent_to_squeezed_pnes(self):
        s, phi, d = 0.3, 0.3, 16
        target = build(StateSpec("pstmsv", (s, phi)), d)
        pn = build(StateSpec("pnes", (states.pnes_f_from_squeezing(s),)), d)
        u = fock.two_mode_squeezer(s, phi, d) @ fock.embed(fock.rotation(phi + math.pi, d), 0)
        assert fock.fidelity(fock.apply_unitary(pn, u), target) > 1 - 1e-8


class TestRandom:
    def test_deterministic(self):
        a = states.random_pure(5, 7)
        b = states.random_pure(5, 7)
        assert np.array_equal(a.vector, b.vector)
        assert not np.array_equal(a.vector, states.random_pure(5, 8).vector)

    def test_real_and_normalized(self):
        v = states.random_pure(4, 3).vector
        assert np.all(v.imag == 0)
        assert np.linalg.norm(v) == pytest.approx(1.0)

    def test_ensemble_mean_population(self):
        # uniform on the real sphere in n_max + 1 dimensions
        n_max = 4
        pops = [abs(states.random_pure(n_max, states.derive_seed(11, i)).vector[0]) ** 2 for i in range(4000)]
        assert np.mean(pops) == pytest.approx(1 / (n_max + 1), abs=0.01)

    @pytest.mark.parametrize("seed", range(5))
    def test_mixed_purity_formula(self, seed):
        rho, c1, c2, f = states.random_mixed(3, seed, return_parts=True)
        ov = abs(np.vdot(c1.vector, c2.vector)) ** 2
        assert rho.purity() == pytest.approx(f * f + (1 - f) ** 2 + 2 * f * (1 - f) * ov, abs=1e-12)

    def test_derive_seed_stable(self):
        assert states.derive_seed(0, 1) == states.derive_seed(0, 1)
        assert states.derive_seed(0, 1) != states.derive_seed(0, 2)
        assert states.derive_seed(1, 0) != states.derive_seed(0, 1)

    def test_spec_build(self):
        a = build(parse_spec("randmixed:3:seed=5"))
        b = states.random_mixed(3, 5)
        assert np.allclose(a.matrix, b.matrix)
