"""Catalog of the state families used throughout, with closed-form quadrature densities.

Every family has a canonical text form (``fock:3``, ``evencat:1.2``,
``randpure:5:seed=42``) accepted by :func:`parse_spec` and the CLI.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import eval_hermite, gammaln
from scipy.stats import poisson

from . import fock
from .errors import NotAnalytic, SpecParseError, TruncationError
from .fock import FockState

FAMILIES = {
    # name: (modes, parameter names)
    "vacuum": (1, ()),
    "fock": (1, ("n",)),
    "coherent": (1, ("re", "im")),
    "squeezed": (1, ("r",)),
    "thermal": (1, ("nbar",)),
    "pac": (1, ("gamma",)),
    "evencat": (1, ("gamma",)),
    "oddcat": (1, ("gamma",)),
    "noisy1": (1, ("f",)),
    "randpure": (1, ("n_max",)),
    "randmixed": (1, ("n_max",)),
    "pnes": (2, ("f",)),
    "tmsv": (2, ("s", "phi")),
    "pstmsv": (2, ("s", "phi")),
    "ecs": (2, ("gamma",)),
}

ALIASES = {
    "phaseavg": "pac",
    "phase-averaged-coherent": "pac",
    "noisysinglephoton": "noisy1",
    "photonsubtracted": "pstmsv",
    "entangledcoherent": "ecs",
}

GAUSSIAN_FAMILIES = {"vacuum", "coherent", "squeezed", "thermal", "tmsv"}


@dataclass(frozen=True)
class StateSpec:
    family: str
    params: tuple = ()
    seed: int | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise SpecParseError(f"unknown family {self.family!r}")
        names = FAMILIES[self.family][1]
        params = tuple(float(p) for p in self.params)
        # trailing optional parameters default to 0
        if len(params) > len(names):
            raise SpecParseError(f"{self.family} takes at most {len(names)} parameters")
        params = params + (0.0,) * (len(names) - len(params))
        object.__setattr__(self, "params", params)
        p = dict(zip(names, params))
        if "f" in p and not 0.0 <= p["f"] <= 1.0:
            raise SpecParseError("f must lie in [0, 1]")
        if "gamma" in p and p["gamma"] < 0:
            raise SpecParseError("gamma must be >= 0")
        if "n" in p and (p["n"] < 0 or p["n"] != int(p["n"])):
            raise SpecParseError("n must be a non-negative integer")
        if "n_max" in p and (p["n_max"] < 1 or p["n_max"] != int(p["n_max"])):
            raise SpecParseError("n_max must be an integer >= 1")
        if self.family in ("randpure", "randmixed") and self.seed is None:
            object.__setattr__(self, "seed", 0)

    @property
    def modes(self) -> int:
        return FAMILIES[self.family][0]

    @property
    def is_gaussian(self) -> bool:
        return self.family in GAUSSIAN_FAMILIES

    def param(self, name):
        return self.params[FAMILIES[self.family][1].index(name)]

    def __str__(self):
        names = FAMILIES[self.family][1]
        parts = [self.family]
        vals = list(self.params)
        # drop trailing zero optionals, keep the first parameter always
        while len(vals) > 1 and vals[-1] == 0.0:
            vals.pop()
        for v in vals[: len(names)]:
            parts.append(str(int(v)) if float(v).is_integer() else repr(v))
        if self.seed is not None:
            parts.append(f"seed={self.seed}")
        return ":".join(parts)


def parse_spec(text: str) -> StateSpec:
    """Parse ``family[:p1[,p2]][:p...][:seed=S]``."""
    fields = [t.strip() for t in text.strip().split(":") if t.strip()]
    if not fields:
        raise SpecParseError("empty state spec")
    family = ALIASES.get(fields[0].lower(), fields[0].lower())
    if family not in FAMILIES:
        raise SpecParseError(f"unknown family {fields[0]!r}; choose from {sorted(FAMILIES)}")
    params, seed = [], None
    for tok in fields[1:]:
        if tok.startswith("seed="):
            seed = int(tok[5:])
            continue
        for sub in tok.split(","):
            try:
                params.append(float(sub))
            except ValueError as exc:
                raise SpecParseError(f"bad parameter {sub!r} in {text!r}") from exc
    return StateSpec(family, tuple(params), seed)


def derive_seed(seed: int, index: int) -> int:
    """Per-draw 64-bit seed from a master seed; stable across platforms."""
    return int(np.random.SeedSequence([seed, index]).generate_state(1, np.uint64)[0])


# --------------------------------------------------------------- amplitudes


def _log_fact(n):
    return gammaln(np.asarray(n, dtype=float) + 1.0)


def coherent_amplitudes(alpha: complex, cutoff: int) -> np.ndarray:
    n = np.arange(cutoff)
    mag = abs(alpha)
    if mag == 0:
        out = np.zeros(cutoff, dtype=complex)
        out[0] = 1.0
        return out
    logc = -0.5 * mag**2 + n * np.log(mag) - 0.5 * _log_fact(n)
    return np.exp(logc) * np.exp(1j * n * np.angle(alpha))


def cat_amplitudes(gamma: float, cutoff: int, parity: int) -> np.ndarray:
    """Normalized (infinite-space) amplitudes of |gamma> + parity |-gamma>."""
    n = np.arange(cutoff)
    keep = (n % 2 == 0) if parity > 0 else (n % 2 == 1)
    if gamma == 0:
        if parity < 0:
            raise TruncationError("odd cat is undefined at gamma = 0")
        out = np.zeros(cutoff)
        out[0] = 1.0
        return out
    norm2 = 2.0 * (1.0 + parity * np.exp(-2.0 * gamma**2))
    logc = -0.5 * gamma**2 + n * np.log(gamma) - 0.5 * _log_fact(n) + np.log(2.0) - 0.5 * np.log(norm2)
    return np.where(keep, np.exp(logc), 0.0)


def squeezed_amplitudes(r: float, cutoff: int) -> np.ndarray:
    """S(r)|0> with S(r) = exp(r/2 (a^2 - a^dag^2))."""
    out = np.zeros(cutoff)
    t = np.tanh(r)
    m = np.arange((cutoff + 1) // 2)
    if r == 0:
        out[0] = 1.0
        return out
    logmag = m * np.log(abs(t)) + 0.5 * _log_fact(2 * m) - m * np.log(2.0) - _log_fact(m) - 0.5 * np.log(np.cosh(r))
    out[2 * m] = np.exp(logmag) * np.sign(-t) ** m
    return out


def thermal_weights(nbar: float, cutoff: int) -> np.ndarray:
    n = np.arange(cutoff)
    if nbar == 0:
        w = np.zeros(cutoff)
        w[0] = 1.0
        return w
    return nbar**n / (nbar + 1.0) ** (n + 1)


def tmsv_amplitudes(s: float, phi: float, cutoff: int) -> np.ndarray:
    """S12(zeta)|00>: c_nn = (-e^{i phi} tanh s)^n / cosh s."""
    n = np.arange(cutoff)
    c = (-np.exp(1j * phi) * np.tanh(s)) ** n / np.cosh(s)
    out = np.zeros((cutoff, cutoff), dtype=complex)
    out[n, n] = c
    return out.ravel()


def pnes_f_from_squeezing(s: float) -> float:
    """Fraction f of the PNES equivalent to the photon-subtracted TMSV."""
    return float(np.sinh(s) ** 2 / np.cosh(2 * s))


def _tail_of(amps) -> float:
    return max(0.0, 1.0 - float(np.sum(np.abs(amps) ** 2)))


def _required(fn, cutoff, tol):
    c = cutoff
    while c < 4096:
        c *= 2
        if fn(c) <= tol:
            return c
    return None


def default_cutoff(spec: StateSpec) -> int:
    if spec.family in ("randpure", "randmixed"):
        return int(spec.param("n_max")) + 1
    if spec.family == "fock":
        return max(fock.DEFAULT_CUTOFF_1, int(spec.param("n")) + 1)
    return fock.DEFAULT_CUTOFF_1 if spec.modes == 1 else fock.DEFAULT_CUTOFF_2


def _tail(spec: StateSpec, cutoff: int) -> float:
    fam = spec.family
    if fam in ("vacuum", "noisy1", "randpure", "randmixed", "pnes"):
        return 0.0 if fam != "pnes" or cutoff >= 2 else 1.0
    if fam == "fock":
        return 0.0 if spec.param("n") < cutoff else 1.0
    if fam == "coherent":
        mean = spec.param("re") ** 2 + spec.param("im") ** 2
        return float(poisson.sf(cutoff - 1, mean)) if mean > 0 else 0.0
    if fam == "pac":
        g = spec.param("gamma")
        return float(poisson.sf(cutoff - 1, g * g)) if g > 0 else 0.0
    if fam == "squeezed":
        return _tail_of(squeezed_amplitudes(spec.param("r"), cutoff))
    if fam == "thermal":
        nb = spec.param("nbar")
        return float((nb / (nb + 1.0)) ** cutoff) if nb > 0 else 0.0
    if fam in ("evencat", "oddcat"):
        return _tail_of(cat_amplitudes(spec.param("gamma"), cutoff, 1 if fam == "evencat" else -1))
    if fam == "tmsv":
        return float(np.tanh(spec.param("s")) ** (2 * cutoff))
    if fam == "pstmsv":
        t2 = np.tanh(spec.param("s")) ** 2
        n = np.arange(1, cutoff + 1)
        total = t2 * (1 + t2) / (1 - t2) ** 3
        return max(0.0, 1.0 - float(np.sum(n**2 * t2**n)) / total)
    if fam == "ecs":
        return _tail_of(_ecs_amplitudes(spec.param("gamma"), cutoff))
    raise AssertionError(fam)


def _ecs_amplitudes(gamma: float, cutoff: int) -> np.ndarray:
    """sqrt(N)(|g,g> - |-g,-g>) with N = 1 / (2 - 2 e^{-4 g^2})."""
    c = coherent_amplitudes(gamma, cutoff).real
    n = np.arange(cutoff)
    odd = ((n[:, None] + n[None, :]) % 2 == 1).astype(float)
    norm = 1.0 / np.sqrt(2.0 - 2.0 * np.exp(-4.0 * gamma**2))
    return (2.0 * norm * np.outer(c, c) * odd).ravel()


def build(spec: StateSpec, cutoff: int | None = None, tail_tol: float = fock.TAIL_TOL) -> FockState:
    """Construct the Fock-basis state for a spec; raises when the cutoff is too small."""
    cutoff = cutoff or default_cutoff(spec)
    tail = _tail(spec, cutoff)
    if tail > tail_tol:
        need = _required(lambda c: _tail(spec, c), cutoff, tail_tol)
        raise TruncationError(f"{spec} leaves tail mass {tail:.2e} at cutoff {cutoff}", need)
    fam = spec.family
    if fam == "vacuum":
        return fock.vacuum(1, cutoff)
    if fam == "fock":
        return fock.basis_state(int(spec.param("n")), cutoff)
    if fam == "coherent":
        amps = coherent_amplitudes(complex(spec.param("re"), spec.param("im")), cutoff)
        return fock.make_pure(amps, 1, cutoff, tail)
    if fam == "squeezed":
        return fock.make_pure(squeezed_amplitudes(spec.param("r"), cutoff), 1, cutoff, tail)
    if fam == "thermal":
        w = thermal_weights(spec.param("nbar"), cutoff)
        return fock.make_mixed(np.diag(w), 1, tail, check_positive=False)
    if fam == "pac":
        g = spec.param("gamma")
        w = poisson.pmf(np.arange(cutoff), g * g) if g > 0 else np.eye(cutoff)[0]
        return fock.make_mixed(np.diag(w), 1, tail, check_positive=False)
    if fam in ("evencat", "oddcat"):
        amps = cat_amplitudes(spec.param("gamma"), cutoff, 1 if fam == "evencat" else -1)
        return fock.make_pure(amps, 1, cutoff, tail)
    if fam == "noisy1":
        f = spec.param("f")
        w = np.zeros(cutoff)
        w[0], w[1] = 1.0 - f, f
        return fock.make_mixed(np.diag(w), 1, 0.0, check_positive=False)
    if fam == "randpure":
        return random_pure(int(spec.param("n_max")), spec.seed, cutoff)
    if fam == "randmixed":
        return random_mixed(int(spec.param("n_max")), spec.seed, cutoff)
    if fam == "pnes":
        f = spec.param("f")
        v = np.zeros(cutoff * cutoff, dtype=complex)
        v[0] = np.sqrt(1.0 - f)
        v[cutoff + 1] = np.sqrt(f)
        return fock.make_pure(v, 2, cutoff)
    if fam == "tmsv":
        return fock.make_pure(tmsv_amplitudes(spec.param("s"), spec.param("phi"), cutoff), 2, cutoff, tail)
    if fam == "pstmsv":
        s, phi = spec.param("s"), spec.param("phi")
        amps = tmsv_amplitudes(s, phi, cutoff + 1).reshape(cutoff + 1, cutoff + 1)
        n = np.arange(1, cutoff + 1)
        sub = np.zeros((cutoff, cutoff), dtype=complex)
        # a1 a2 |n, n> = n |n-1, n-1>
        sub[n - 1, n - 1] = n * amps[n, n]
        return fock.make_pure(sub.ravel(), 2, cutoff, tail)
    if fam == "ecs":
        return fock.make_pure(_ecs_amplitudes(spec.param("gamma"), cutoff), 2, cutoff, tail)
    raise AssertionError(fam)


def random_pure(n_max: int, seed, cutoff: int | None = None) -> FockState:
    """Real Gaussian coefficients on levels 0..n_max, normalized.

    ``seed`` may be an int or a ``numpy.random.Generator``.
    """
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    cutoff = cutoff or n_max + 1
    if cutoff < n_max + 1:
        raise TruncationError(f"random state needs n_max + 1 = {n_max + 1} levels", n_max + 1)
    c = np.zeros(cutoff)
    c[: n_max + 1] = rng.standard_normal(n_max + 1)
    return fock.make_pure(c, 1, cutoff)


def random_mixed(n_max: int, seed, cutoff: int | None = None, return_parts: bool = False):
    """f |chi1><chi1| + (1 - f) |chi2><chi2|; draw order chi1, chi2, f."""
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    chi1 = random_pure(n_max, rng, cutoff)
    chi2 = random_pure(n_max, rng, cutoff)
    f = rng.uniform()
    rho = f * chi1.dm() + (1.0 - f) * chi2.dm()
    state = fock.make_mixed(rho, 1, check_positive=False)
    if return_parts:
        return state, chi1, chi2, f
    return state


# --------------------------------------------------- closed-form densities


def fock_density(n: int, x) -> np.ndarray:
    """|<x|n>|^2 from the Hermite polynomial; independent of the recurrence."""
    x = np.asarray(x, dtype=float)
    h = eval_hermite(n, x)
    with np.errstate(divide="ignore"):
        logp = -(x**2) - n * np.log(2.0) - _log_fact(n) - 0.5 * np.log(np.pi) + 2.0 * np.log(np.abs(h))
    return np.exp(logp)


def cat_density(gamma: float, phi: float, x, parity: int) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    g = gamma
    arg = 2.0 * np.sqrt(2.0) * g * x
    # e^{-2 g^2 cos^2 phi} cosh(...) written as a sum of two exponentials to avoid overflow
    c2 = np.cos(phi) ** 2
    a = arg * np.cos(phi)
    ch = 0.5 * (np.exp(-(x**2) - 2 * g * g * c2 + a) + np.exp(-(x**2) - 2 * g * g * c2 - a))
    osc = np.exp(-(x**2) - 2 * g * g * c2) * np.cos(arg * np.sin(phi))
    return (ch + parity * osc) / (np.sqrt(np.pi) * (1.0 + parity * np.exp(-2 * g * g)))


def pnes_density(f: float, theta1: float, phi1: float, phi2: float, x) -> np.ndarray:
    # cross term sign fixed by <x1 x2> = +sqrt(f (1 - f)) for this state
    x = np.asarray(x, dtype=float)
    x2 = x * x
    body = (
        8.0
        + f * (-5.0 + 4.0 * x2 + 4.0 * x2 * x2)
        + f * (-3.0 + 12.0 * x2 - 4.0 * x2 * x2) * np.cos(4.0 * theta1)
        - 8.0 * np.sqrt(f * (1.0 - f)) * (1.0 - 2.0 * x2) * np.cos(phi1 + phi2) * np.sin(2.0 * theta1)
    )
    return np.exp(-x2) * body / (8.0 * np.sqrt(np.pi))


def analytic_quadrature(spec: StateSpec, direction, grid):
    """Closed-form density of the quadrature along ``direction`` on ``grid``."""
    from .quadrature import QuadratureDistribution

    x = grid.x
    fam = spec.family
    if fam == "vacuum":
        dens = fock_density(0, x)
    elif fam == "fock":
        dens = fock_density(int(spec.param("n")), x)
    elif fam == "pac":
        g = spec.param("gamma")
        nmax = max(1, int(g * g + 12 * (g + 1) + 10))
        w = poisson.pmf(np.arange(nmax), g * g) if g > 0 else np.eye(nmax)[0]
        dens = sum(wn * fock_density(n, x) for n, wn in enumerate(w) if wn > 1e-18)
    elif fam in ("evencat", "oddcat"):
        g = spec.param("gamma")
        if g == 0 and fam == "evencat":
            dens = fock_density(0, x)
        else:
            dens = cat_density(g, direction.phis[0], x, 1 if fam == "evencat" else -1)
    elif fam == "pnes":
        (t1,), (p1, p2) = direction.thetas, direction.phis
        dens = pnes_density(spec.param("f"), t1, p1, p2, x)
    else:
        raise NotAnalytic(f"no closed-form quadrature density for {fam}")
    return QuadratureDistribution.from_density(grid, dens)
