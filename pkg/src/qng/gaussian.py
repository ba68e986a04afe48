"""Reference Gaussian quantities: covariance, symplectic spectrum, entropies.

Conventions: hbar = 1, x = (a + a^dag)/sqrt 2, vacuum variance 1/2, and the
covariance is the symmetrized Gamma_jk = <{R_j, R_k}>/2 - <R_j><R_k> with
R = (x1, p1, x2, p2).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from . import fock
from .errors import DomainError, NotAState, NumericsError, ShapeError, TruncationError
from .fock import FockState

LN2_OVER_E = np.log(2.0 / np.e)


@dataclass(frozen=True, eq=False)
class CovarianceData:
    means: np.ndarray
    gamma: np.ndarray

    @property
    def modes(self) -> int:
        return len(self.means) // 2

    def det(self) -> float:
        return float(np.linalg.det(self.gamma))

    def physicality_margin(self) -> float:
        """Smallest eigenvalue of Gamma + i Omega / 2 (>= 0 for physical states)."""
        om = symplectic_form(self.modes)
        return float(np.linalg.eigvalsh(self.gamma + 0.5j * om)[0])


@dataclass(frozen=True)
class SymplecticSpectrum:
    nus: tuple

    @property
    def modes(self) -> int:
        return len(self.nus)


def symplectic_form(modes: int) -> np.ndarray:
    return np.kron(np.eye(modes), np.array([[0.0, 1.0], [-1.0, 0.0]]))


def _quadrature_transform(modes: int) -> np.ndarray:
    """T with R = T (a_1..a_N, a_1^dag..a_N^dag)."""
    t = np.zeros((2 * modes, 2 * modes), dtype=complex)
    s = 1.0 / np.sqrt(2.0)
    for j in range(modes):
        t[2 * j, j], t[2 * j, modes + j] = s, s
        t[2 * j + 1, j], t[2 * j + 1, modes + j] = -1j * s, 1j * s
    return t


def covariance_of_matrix(rho: np.ndarray, cutoff: int, modes: int) -> CovarianceData:
    """Means and covariance of any trace-one Hermitian matrix (physical or not).

    Only normal-ordered products a_j^dag a_k, a_j a_k enter, which are exact on
    the truncated space for states without weight on the last level.
    """
    ladders = fock.mode_ladders(cutoff, modes)
    ex = lambda op: np.sum(rho * op.T)  # tr(rho op)
    a = np.array([ex(al) for al in ladders])
    aa = np.array([[ex(ladders[j] @ ladders[k]) for k in range(modes)] for j in range(modes)])
    ada = np.array([[ex(ladders[j].conj().T @ ladders[k]) for k in range(modes)] for j in range(modes)])
    # symmetrized second moments of b = (a, a^dag)
    m = np.zeros((2 * modes, 2 * modes), dtype=complex)
    eye = np.eye(modes)
    m[:modes, :modes] = aa
    m[modes:, modes:] = aa.conj()
    # {a_j, a_k^dag}/2 = a_k^dag a_j + delta/2
    m[:modes, modes:] = ada.T + 0.5 * eye
    m[modes:, :modes] = ada + 0.5 * eye
    first = np.concatenate([a, a.conj()])
    t = _quadrature_transform(modes)
    means = (t @ first).real
    second = (t @ m @ t.T).real
    gamma = second - np.outer(means, means)
    gamma = 0.5 * (gamma + gamma.T)
    return CovarianceData(means, gamma)


def covariance(state: FockState) -> CovarianceData:
    state.require_safe()
    return covariance_of_matrix(state.dm(), state.cutoff, state.modes)


def symplectic_eigenvalues(cov: CovarianceData, tol: float = 1e-9) -> SymplecticSpectrum:
    g = cov.gamma
    if g.shape == (2, 2):
        det = np.linalg.det(g)
        if det < -tol:
            raise NumericsError(f"negative covariance determinant {det:.3e}")
        return SymplecticSpectrum((float(np.sqrt(max(det, 0.0))),))
    if g.shape != (4, 4):
        raise ShapeError("closed forms cover one and two modes only")
    a, b, c = g[:2, :2], g[2:, 2:], g[:2, 2:]
    delta = np.linalg.det(a) + np.linalg.det(b) + 2.0 * np.linalg.det(c)
    det = np.linalg.det(g)
    disc = delta**2 - 4.0 * det
    if disc < -tol:
        raise NumericsError(f"symplectic discriminant {disc:.3e} < 0")
    root = np.sqrt(max(disc, 0.0))
    lo2, hi2 = 0.5 * (delta - root), 0.5 * (delta + root)
    if lo2 < -tol:
        raise NumericsError(f"negative squared symplectic eigenvalue {lo2:.3e}")
    return SymplecticSpectrum((float(np.sqrt(max(lo2, 0.0))), float(np.sqrt(hi2))))


# ------------------------------------------------------------------ entropy


def h(x: float) -> float:
    """Entropy of a single Gaussian mode with symplectic eigenvalue x."""
    if x < 0.5 - 1e-9:
        raise DomainError(f"h is defined for x >= 1/2, got {x!r}")
    x = max(float(x), 0.5)
    lo = x - 0.5
    hi = x + 0.5
    out = hi * np.log(hi)
    if lo > 0:
        out -= lo * np.log(lo)
    return float(out)


def _h_prime(x: float) -> float:
    return float(np.log((x + 0.5) / (x - 0.5)))


def h_inverse(y: float, tol: float = 1e-13) -> float:
    """Inverse of h on [1/2, inf): bracketing bisection, then Newton polish."""
    if y < 0:
        raise DomainError(f"h_inverse needs y >= 0, got {y!r}")
    if y == 0:
        return 0.5
    lo, hi = 0.5, 1.0
    while h(hi) < y:
        hi *= 2.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if h(mid) < y:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-9:
            break
    x = 0.5 * (lo + hi)
    for _ in range(20):
        if x <= 0.5:
            break
        step = (h(x) - y) / _h_prime(x)
        x_new = min(max(x - step, lo), hi)
        if abs(x_new - x) < tol:
            x = x_new
            break
        x = x_new
    return float(x)


def thermal_entropy(nbar: float) -> float:
    """S1 of a thermal state: (n+1) ln(n+1) - n ln n."""
    return h(nbar + 0.5)


def thermal_renyi2(nbar: float) -> float:
    return float(np.log1p(2.0 * nbar))


def entropy_gap_thermal(nbar: float) -> float:
    """D(n) = S1 - S2 of a thermal state; increases towards ln(e/2)."""
    return thermal_entropy(nbar) - thermal_renyi2(nbar)


def gaussian_entropy_gap(spectrum: SymplecticSpectrum) -> float:
    """S2 - S1 of the Gaussian state with this spectrum; >= N ln(2/e)."""
    return float(sum(np.log(2.0 * nu) - h(nu) for nu in spectrum.nus))


def gaussian_von_neumann(spectrum: SymplecticSpectrum) -> float:
    return float(sum(h(nu) for nu in spectrum.nus))


def von_neumann_entropy(state: FockState, clamp_tol: float = 1e-9) -> float:
    """S1 = -tr rho ln rho from Hermitian eigenvalues."""
    if state.is_pure:
        return 0.0
    w = np.linalg.eigvalsh(state.matrix)
    if w[0] < -1e-7:
        raise NotAState(f"negative eigenvalue {w[0]:.3e}")
    w = np.clip(w, 0.0, 1.0)
    w = w / w.sum()
    w = w[w > 0]
    return float(-np.sum(w * np.log(w)))


def renyi2_entropy(state: FockState) -> float:
    """S2 = -ln tr rho^2 directly from the matrix."""
    if state.is_pure:
        return 0.0
    return float(-np.log(state.purity()))


def shannon_entropy(p) -> float:
    p = np.asarray(p, dtype=float).ravel()
    p = p[p > 0]
    return float(-np.sum(p * np.log(p)))


# ---------------------------------------------------- Fock-basis reference


def reference_gaussian_fock(cov: CovarianceData, cutoff: int, inflate: int = 2,
                            tail_tol: float = fock.TAIL_TOL) -> FockState:
    """Single-mode Gaussian state with the given moments, in the Fock basis.

    rho_G = D(alpha) R(theta) S(r) tau_nbar S^dag R^dag D^dag, built at an
    inflated cutoff and truncated. The truncated weight becomes tail_mass and
    must stay below ``tail_tol``.
    """
    if cov.modes != 1:
        raise ShapeError("Fock-basis reference states are built for one mode only")
    if cov.physicality_margin() < -1e-8:
        raise DomainError("covariance matrix is unphysical")
    g = cov.gamma
    nu = np.sqrt(max(np.linalg.det(g), 0.25))
    nbar = nu - 0.5
    evals, evecs = np.linalg.eigh(g)
    # Gamma = nu * Rot(theta) diag(e^{-2r}, e^{2r}) Rot(theta)^T
    r = 0.25 * np.log(max(evals[1], 1e-300) / max(evals[0], 1e-300))
    theta = np.arctan2(evecs[1, 0], evecs[0, 0])
    alpha = (cov.means[0] + 1j * cov.means[1]) / np.sqrt(2.0)

    big = inflate * cutoff
    a = fock.annihilation(big)
    ad = a.conj().T
    w = np.zeros(big)
    if nbar > 1e-15:
        k = np.arange(big)
        w = np.exp(k * np.log(nbar) - (k + 1) * np.log1p(nbar))
    else:
        w[0] = 1.0
    rho = np.diag(w).astype(complex)
    u = np.eye(big, dtype=complex)
    if abs(r) > 1e-15:
        u = expm(0.5 * r * (a @ a - ad @ ad))
    if abs(theta) > 0:
        u = np.diag(np.exp(1j * theta * np.arange(big))) @ u
    if abs(alpha) > 0:
        u = expm(alpha * ad - np.conj(alpha) * a) @ u
    rho = u @ rho @ u.conj().T
    kept = rho[:cutoff, :cutoff]
    tail = max(0.0, 1.0 - float(np.trace(kept).real))
    if tail > tail_tol:
        raise TruncationError(f"reference Gaussian leaks {tail:.2e} beyond cutoff {cutoff}",
                              required_cutoff=2 * cutoff)
    kept = 0.5 * (kept + kept.conj().T)
    return FockState(1, cutoff, matrix=kept / np.trace(kept).real, tail_mass=tail)
