"""Partial-transpose entanglement test sharpened by quadrature negentropy.

After partial transposition and a Gaussian diagonalizing unitary, every local
mode of a separable state obeys sqrt(det Gamma_i) >= h^{-1}(N_KL_i). A local
mode that violates this, or whose quadrature densities go negative, certifies
entanglement.
"""

from __future__ import annotations

import csv
import io
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import fock, gaussian, measures, states
from .errors import DomainError, NotDistribution, NoThreshold, TruncationError
from .fock import FockState, ModeOperator

log = logging.getLogger(__name__)

LINEARITY_TOL = 1e-8
# N_KL is accurate to about this level; smaller gaps are not evidence
VIOLATION_TOL = 1e-7


@dataclass
class LocalMode:
    sqrt_det: float
    nkl: float | None
    unphysical_by_density: bool = False

    @property
    def gaussian_violation(self) -> bool:
        return self.sqrt_det < 0.5 - 1e-12

    @property
    def bound(self) -> float | None:
        """h(sqrt det Gamma), or None when sqrt det Gamma < 1/2."""
        return None if self.gaussian_violation else gaussian.h(self.sqrt_det)

    @property
    def violated(self) -> bool:
        if self.gaussian_violation or self.unphysical_by_density:
            return True
        return self.bound < self.nkl - VIOLATION_TOL


@dataclass
class WitnessReport:
    gamma_parameter: float | None
    lhs: float | None
    rhs: float | None
    gaussian_ppt_detects: bool
    enhanced_detects: bool
    modes: list = field(default_factory=list)

    @property
    def margin(self) -> float:
        """lhs - rhs on mode 2; negative means detection."""
        if self.lhs is None or self.rhs is None:
            return -math.inf
        return self.lhs - self.rhs

    CSV_FIELDS = ("gamma", "lhs", "rhs", "gaussian_ppt_detects", "enhanced_detects")

    def csv_row(self) -> list[str]:
        vals = (self.gamma_parameter, self.lhs, self.rhs, self.gaussian_ppt_detects, self.enhanced_detects)
        return [f"{v:.12g}" if isinstance(v, float) else str(v) for v in vals]


def _is_linear_optics(op: ModeOperator) -> bool:
    """Check U^dag a_j U lies in span{1, a_k, a_k^dag} on low-photon states."""
    d = op.cutoff
    u = op.matrix
    lad = fock.mode_ladders(d, 2)
    basis = [np.eye(d * d)] + lad + [a.conj().T for a in lad]
    n1, n2 = np.divmod(np.arange(d * d), d)
    low = np.flatnonzero(n1 + n2 <= max(1, d // 2 - 1))
    for a in lad:
        target = (u.conj().T @ a @ u)[np.ix_(low, low)].ravel()
        mat = np.stack([b[np.ix_(low, low)].ravel() for b in basis], axis=1)
        coef, *_ = np.linalg.lstsq(mat, target, rcond=None)
        if np.linalg.norm(mat @ coef - target) > LINEARITY_TOL * max(1.0, np.linalg.norm(target)):
            return False
    return True


def _local_mode(matrix: np.ndarray, cutoff: int, opts: measures.OptimizerOptions) -> LocalMode:
    cov = gaussian.covariance_of_matrix(matrix, cutoff, 1)
    det = cov.det()
    sqrt_det = math.sqrt(max(det, 0.0))
    try:
        nkl = measures.n_kl_single(matrix, opts, clip_tol=1e-10).value
    except NotDistribution as exc:
        log.info("local mode is unphysical by density: %s", exc)
        return LocalMode(sqrt_det, None, unphysical_by_density=True)
    return LocalMode(sqrt_det, nkl)


def analyze_local_modes(rho1: np.ndarray, rho2: np.ndarray, cutoff: int, gamma: float | None = None,
                        opts: measures.OptimizerOptions = measures.OptimizerOptions()) -> WitnessReport:
    m1 = _local_mode(rho1, cutoff, opts)
    m2 = _local_mode(rho2, cutoff, opts)
    gauss = m1.gaussian_violation or m2.gaussian_violation
    enhanced = m1.violated or m2.violated
    return WitnessReport(gamma, m2.bound, m2.nkl, gauss, enhanced, [m1, m2])


def transformed_partial_transpose(state: FockState, diagonalizer: ModeOperator) -> np.ndarray:
    if state.modes != 2:
        raise DomainError("the witness needs a two-mode state")
    if diagonalizer.modes != 2 or diagonalizer.cutoff != state.cutoff:
        raise DomainError("diagonalizer must act on the state's two-mode space")
    if diagonalizer.unitarity_error() > 1e-9 or not _is_linear_optics(diagonalizer):
        raise DomainError("diagonalizer is not a Gaussian (linear) unitary")
    u = diagonalizer.matrix
    return u @ fock.partial_transpose(state, on=1) @ u.conj().T


def enhanced_ppt_witness(state: FockState, diagonalizer: ModeOperator, gamma: float | None = None,
                         opts: measures.OptimizerOptions = measures.OptimizerOptions()) -> WitnessReport:
    """Compare sqrt(det Gamma) with h^{-1}(N_KL) on both local modes of U rho^PT U^dag."""
    bar = transformed_partial_transpose(state, diagonalizer)
    d = state.cutoff
    return analyze_local_modes(fock.reduce_matrix(bar, d, 0), fock.reduce_matrix(bar, d, 1), d, gamma, opts)


# ------------------------------------------------- entangled coherent states


def ecs_cutoff(gamma: float) -> int:
    beta = math.sqrt(2.0) * gamma
    return int(max(24, math.ceil(beta * beta + 10.0 * beta + 16.0)))


def ecs_local_modes(gamma: float, cutoff: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Closed-form local modes after partial transpose and a 50:50 splitter.

    With beta = sqrt(2) gamma and c = 1 / (2 - 2 exp(-4 gamma^2)):
      mode 1: c (|beta><beta| + |-beta><-beta| - 2 exp(-4 gamma^2) |0><0|)
      mode 2: c (2 |0><0| - |beta><-beta| - |-beta><beta|)
    """
    if gamma <= 0:
        raise DomainError("gamma must be positive")
    d = cutoff or ecs_cutoff(gamma)
    beta = math.sqrt(2.0) * gamma
    plus = states.coherent_amplitudes(beta, d).real
    tail = max(0.0, 1.0 - float(np.sum(np.abs(plus) ** 2)))
    if tail > fock.TAIL_TOL:
        raise TruncationError(f"coherent amplitude {beta:.3f} leaks {tail:.1e} past cutoff {d}",
                              required_cutoff=ecs_cutoff(gamma))
    minus = plus * (-1.0) ** np.arange(d)
    overlap = math.exp(-4.0 * gamma * gamma)
    norm = 1.0 / (2.0 - 2.0 * overlap)
    vac = np.zeros(d)
    vac[0] = 1.0
    rho1 = norm * (np.outer(plus, plus) + np.outer(minus, minus) - 2.0 * overlap * np.outer(vac, vac))
    rho2 = norm * (2.0 * np.outer(vac, vac) - np.outer(plus, minus) - np.outer(minus, plus))
    return rho1.astype(complex), rho2.astype(complex)


def ecs_local_modes_generic(gamma: float, cutoff: int) -> tuple[np.ndarray, np.ndarray]:
    """Same local modes via partial transpose, beam splitter and partial trace."""
    state = states.build(states.StateSpec("ecs", (gamma,)), cutoff)
    bar = transformed_partial_transpose(state, fock.beam_splitter(math.pi / 4, cutoff))
    return fock.reduce_matrix(bar, cutoff, 0), fock.reduce_matrix(bar, cutoff, 1)


def ecs_witness(gamma: float, opts: measures.OptimizerOptions = measures.OptimizerOptions()) -> WitnessReport:
    d = ecs_cutoff(gamma)
    rho1, rho2 = ecs_local_modes(gamma, d)
    return analyze_local_modes(rho1, rho2, d, gamma, opts)


@dataclass
class SweepResult:
    threshold: float
    reports: list

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(WitnessReport.CSV_FIELDS)
        for r in self.reports:
            w.writerow(r.csv_row())
        return buf.getvalue()


def witness_sweep(gammas, evaluate=ecs_witness, tol: float = 1e-4) -> SweepResult:
    """Locate the detection onset by bisection on the sign of lhs - rhs.

    Raises NoThreshold when the detection flag never changes across ``gammas``.
    """
    gammas = [float(g) for g in gammas]
    if any(b <= a for a, b in zip(gammas, gammas[1:])):
        raise DomainError("gamma grid must be strictly increasing")
    reports = [evaluate(g) for g in gammas]
    flags = [r.enhanced_detects for r in reports]
    for i in range(len(flags) - 1):
        if flags[i] != flags[i + 1]:
            lo, hi, lo_flag = gammas[i], gammas[i + 1], flags[i]
            break
    else:
        raise NoThreshold("no change of the detection flag in range", detects=bool(flags[0]))
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if evaluate(mid).enhanced_detects == lo_flag:
            lo = mid
        else:
            hi = mid
    return SweepResult(0.5 * (lo + hi), reports)
