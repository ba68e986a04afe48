"""Truncated Fock-space states and the Gaussian operator algebra acting on them.

Two-mode tensors use the ``kron`` ordering: basis index ``n1 * d + n2``.
All states are immutable; operations return new objects.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from .errors import DegenerateInput, NotAState, NumericsError, ShapeError, TruncationError

DEFAULT_CUTOFF_1 = 64
DEFAULT_CUTOFF_2 = 24
TAIL_TOL = 1e-10
UNITARY_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class FockState:
    """A pure vector or density matrix in a truncated number basis.

    ``tail_mass`` is the population that the truncation could not hold. States
    whose tail exceeds ``tail_tol`` are kept but flagged truncation-unsafe.
    """

    modes: int
    cutoff: int
    vector: np.ndarray | None = None
    matrix: np.ndarray | None = None
    tail_mass: float = 0.0
    tail_tol: float = TAIL_TOL

    def __post_init__(self):
        if self.modes not in (1, 2):
            raise ShapeError(f"modes must be 1 or 2, got {self.modes}")
        dim = self.cutoff**self.modes
        if (self.vector is None) == (self.matrix is None):
            raise ShapeError("exactly one of vector/matrix must be given")
        if self.vector is not None:
            v = np.asarray(self.vector, dtype=complex)
            if v.shape != (dim,):
                raise ShapeError(f"expected vector of length {dim}, got {v.shape}")
            if abs(np.linalg.norm(v) - 1.0) > 1e-10:
                raise NotAState("pure vector is not normalized")
            v.setflags(write=False)
            object.__setattr__(self, "vector", v)
        else:
            m = np.asarray(self.matrix, dtype=complex)
            if m.shape != (dim, dim):
                raise ShapeError(f"expected {dim}x{dim} matrix, got {m.shape}")
            if np.max(np.abs(m - m.conj().T), initial=0.0) > 1e-12:
                raise NotAState("density matrix is not Hermitian")
            if abs(np.trace(m).real - 1.0) > 1e-10:
                raise NotAState(f"density matrix trace {np.trace(m).real!r} != 1")
            m.setflags(write=False)
            object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.cutoff**self.modes

    @property
    def is_pure(self) -> bool:
        return self.vector is not None

    @property
    def truncation_safe(self) -> bool:
        return self.tail_mass <= self.tail_tol

    def dm(self) -> np.ndarray:
        if self.vector is not None:
            return np.outer(self.vector, self.vector.conj())
        return self.matrix

    def purity(self) -> float:
        if self.vector is not None:
            return 1.0
        m = self.matrix
        return float(np.real(np.sum(m * m.T)))

    def photon_distribution(self) -> np.ndarray:
        """Diagonal of the density matrix, shape ``(d,)*modes``."""
        if self.vector is not None:
            p = np.abs(self.vector) ** 2
        else:
            p = np.real(np.diag(self.matrix))
        return p.reshape((self.cutoff,) * self.modes)

    def mean_photon(self, mode: int = 0) -> float:
        p = self.photon_distribution()
        n = np.arange(self.cutoff)
        if self.modes == 1:
            return float(p @ n)
        marg = p.sum(axis=1 - mode)
        return float(marg @ n)

    def require_safe(self):
        if not self.truncation_safe:
            raise TruncationError(
                f"state tail mass {self.tail_mass:.2e} exceeds {self.tail_tol:.0e}",
                required_cutoff=2 * self.cutoff,
            )
        return self


@dataclass(frozen=True, eq=False)
class ModeOperator:
    """Matrix of an operator on one or two truncated modes.

    ``exact`` marks operators that are exactly unitary on the retained block
    (number-conserving ones); the others are truncations of operators built at
    an inflated cutoff.
    """

    cutoff: int
    modes: int
    matrix: np.ndarray
    exact: bool = True
    name: str = field(default="")

    def unitarity_error(self) -> float:
        u = self.matrix
        return float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))))

    def dagger(self) -> "ModeOperator":
        return ModeOperator(self.cutoff, self.modes, self.matrix.conj().T, self.exact, self.name + "^dag")

    def __matmul__(self, other: "ModeOperator") -> "ModeOperator":
        if (self.cutoff, self.modes) != (other.cutoff, other.modes):
            raise ShapeError("operator dimensions differ")
        return ModeOperator(
            self.cutoff, self.modes, self.matrix @ other.matrix, self.exact and other.exact,
            f"{self.name}*{other.name}",
        )


def make_pure(amplitudes, modes: int = 1, cutoff: int | None = None, tail_mass: float = 0.0) -> FockState:
    amps = np.asarray(amplitudes, dtype=complex).ravel()
    if cutoff is None:
        cutoff = round(len(amps) ** (1.0 / modes))
    if len(amps) != cutoff**modes:
        raise ShapeError(f"{len(amps)} amplitudes do not fit {modes} mode(s) at cutoff {cutoff}")
    norm = np.linalg.norm(amps)
    if norm == 0.0:
        raise DegenerateInput("all-zero amplitude vector")
    return FockState(modes, cutoff, vector=amps / norm, tail_mass=tail_mass)


def make_mixed(matrix, modes: int = 1, tail_mass: float = 0.0, check_positive: bool = True) -> FockState:
    m = np.asarray(matrix, dtype=complex)
    m = 0.5 * (m + m.conj().T)
    tr = np.trace(m).real
    if tr <= 0:
        raise DegenerateInput("density matrix with non-positive trace")
    m = m / tr
    cutoff = round(m.shape[0] ** (1.0 / modes))
    if check_positive:
        lo = np.linalg.eigvalsh(m)[0]
        if lo < -1e-9:
            raise NotAState(f"density matrix has eigenvalue {lo:.3e}")
    return FockState(modes, cutoff, matrix=m, tail_mass=tail_mass)


def vacuum(modes: int = 1, cutoff: int | None = None) -> FockState:
    cutoff = cutoff or (DEFAULT_CUTOFF_1 if modes == 1 else DEFAULT_CUTOFF_2)
    v = np.zeros(cutoff**modes, dtype=complex)
    v[0] = 1.0
    return FockState(modes, cutoff, vector=v)


def basis_state(n: int, cutoff: int) -> FockState:
    if not 0 <= n < cutoff:
        raise TruncationError(f"|{n}> does not fit", required_cutoff=n + 1)
    v = np.zeros(cutoff, dtype=complex)
    v[n] = 1.0
    return FockState(1, cutoff, vector=v)


def tensor(a: FockState, b: FockState) -> FockState:
    if a.modes != 1 or b.modes != 1 or a.cutoff != b.cutoff:
        raise ShapeError("tensor needs two single-mode states with equal cutoff")
    tail = 1.0 - (1.0 - a.tail_mass) * (1.0 - b.tail_mass)
    if a.is_pure and b.is_pure:
        return FockState(2, a.cutoff, vector=np.kron(a.vector, b.vector), tail_mass=tail)
    return FockState(2, a.cutoff, matrix=np.kron(a.dm(), b.dm()), tail_mass=tail)


# ---------------------------------------------------------------- operators


def annihilation(cutoff: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, cutoff, dtype=float)), 1).astype(complex)


def number_diag(cutoff: int) -> np.ndarray:
    return np.arange(cutoff, dtype=float)


def mode_ladders(cutoff: int, modes: int) -> list[np.ndarray]:
    """Annihilation operators of each mode on the full (tensor) space."""
    a = annihilation(cutoff)
    if modes == 1:
        return [a]
    eye = np.eye(cutoff)
    return [np.kron(a, eye), np.kron(eye, a)]


def rotation(phi: float, cutoff: int, modes: int = 1, mode: int = 0) -> ModeOperator:
    """Phase rotation exp(i phi n) on one mode."""
    ph = np.exp(1j * phi * number_diag(cutoff))
    if modes == 2:
        ones = np.ones(cutoff)
        ph = np.kron(ph, ones) if mode == 0 else np.kron(ones, ph)
    return ModeOperator(cutoff, modes, np.diag(ph), True, f"R{mode}({phi:g})")


def _blockwise_expm(generator: np.ndarray, labels: np.ndarray) -> np.ndarray:
    """exp(generator) for a generator that conserves the integer ``labels``."""
    out = np.zeros_like(generator)
    for lab in np.unique(labels):
        idx = np.flatnonzero(labels == lab)
        out[np.ix_(idx, idx)] = expm(generator[np.ix_(idx, idx)])
    return out


def _two_mode_labels(cutoff: int):
    n = np.arange(cutoff)
    n1 = np.repeat(n, cutoff)
    n2 = np.tile(n, cutoff)
    return n1, n2


def beam_splitter(theta: float, cutoff: int) -> ModeOperator:
    """exp(theta (a1^dag a2 - a2^dag a1)), transmittance cos^2 theta.

    Built block by block in total photon number, so it is exactly unitary and
    number conserving on the truncated space. Blocks with total number
    >= cutoff are incomplete; states living there are flagged by callers.
    """
    a1, a2 = mode_ladders(cutoff, 2)
    gen = theta * (a1.conj().T @ a2 - a2.conj().T @ a1)
    n1, n2 = _two_mode_labels(cutoff)
    u = _blockwise_expm(gen, n1 + n2)
    return ModeOperator(cutoff, 2, u, True, f"B({theta:g})")


def two_mode_squeezer(s: float, varphi: float, cutoff: int, inflate: int = 2) -> ModeOperator:
    """exp(-zeta a1^dag a2^dag + zeta* a1 a2) with zeta = s e^{i varphi}.

    Built at ``inflate * cutoff`` per mode, block by block in n1 - n2, then
    truncated.
    """
    big = inflate * cutoff
    a1, a2 = mode_ladders(big, 2)
    zeta = s * np.exp(1j * varphi)
    gen = -zeta * (a1.conj().T @ a2.conj().T) + np.conj(zeta) * (a1 @ a2)
    n1, n2 = _two_mode_labels(big)
    u = _blockwise_expm(gen, n1 - n2)
    keep = np.flatnonzero((n1 < cutoff) & (n2 < cutoff))
    return ModeOperator(cutoff, 2, u[np.ix_(keep, keep)], False, f"S12({s:g})")


def squeezer(r: float, cutoff: int, inflate: int = 2) -> ModeOperator:
    """exp(r/2 (a^2 - a^dag^2)); squeezes x by e^{-r}."""
    big = inflate * cutoff
    a = annihilation(big)
    u = expm(0.5 * r * (a @ a - a.conj().T @ a.conj().T))
    return ModeOperator(cutoff, 1, u[:cutoff, :cutoff], False, f"S({r:g})")


def displacement(alpha: complex, cutoff: int, inflate: int = 2) -> ModeOperator:
    big = inflate * cutoff
    a = annihilation(big)
    u = expm(alpha * a.conj().T - np.conj(alpha) * a)
    return ModeOperator(cutoff, 1, u[:cutoff, :cutoff], False, f"D({alpha:g})")


def embed(op: ModeOperator, mode: int) -> ModeOperator:
    """Lift a single-mode operator to act on ``mode`` of a two-mode space."""
    if op.modes != 1:
        raise ShapeError("embed expects a single-mode operator")
    eye = np.eye(op.cutoff)
    m = np.kron(op.matrix, eye) if mode == 0 else np.kron(eye, op.matrix)
    return ModeOperator(op.cutoff, 2, m, op.exact, f"{op.name}@{mode}")


def apply_unitary(state: FockState, op: ModeOperator) -> FockState:
    """rho -> U rho U^dag.

    Exact operators must be unitary to 1e-10. Truncated ones may leak norm out
    of the retained block; the leak is added to ``tail_mass`` and the result is
    renormalized. Norm growth signals a non-unitary input.
    """
    if (state.cutoff, state.modes) != (op.cutoff, op.modes):
        raise ShapeError("state and operator dimensions differ")
    if op.exact:
        err = op.unitarity_error()
        if err > UNITARY_TOL:
            raise NumericsError(f"operator {op.name} is not unitary (err {err:.2e})")
    u = op.matrix
    if state.is_pure:
        v = u @ state.vector
        norm2 = float(np.vdot(v, v).real)
    else:
        m = u @ state.matrix @ u.conj().T
        norm2 = float(np.trace(m).real)
    if norm2 > 1.0 + 1e-9:
        raise NumericsError(f"operator {op.name} increased the norm to {norm2:.12f}")
    leak = max(0.0, 1.0 - norm2)
    tail = state.tail_mass + leak
    if state.is_pure:
        return FockState(state.modes, state.cutoff, vector=v / np.sqrt(norm2), tail_mass=tail,
                         tail_tol=state.tail_tol)
    m = 0.5 * (m + m.conj().T) / norm2
    return FockState(state.modes, state.cutoff, matrix=m, tail_mass=tail, tail_tol=state.tail_tol)


def apply_operator(state: FockState, matrix: np.ndarray) -> FockState:
    """Apply a non-unitary operator (e.g. photon subtraction) and renormalize."""
    if state.is_pure:
        return make_pure(matrix @ state.vector, state.modes, state.cutoff, state.tail_mass)
    return make_mixed(matrix @ state.matrix @ matrix.conj().T, state.modes, state.tail_mass)


def _check_two_mode(state_or_matrix, cutoff=None):
    if isinstance(state_or_matrix, FockState):
        if state_or_matrix.modes != 2:
            raise ShapeError("operation needs a two-mode state")
        return state_or_matrix.dm(), state_or_matrix.cutoff
    return np.asarray(state_or_matrix), cutoff


def partial_trace(state: FockState, keep: int = 0) -> FockState:
    if state.modes != 2:
        raise ShapeError("partial_trace needs a two-mode state")
    d = state.cutoff
    if state.is_pure:
        psi = state.vector.reshape(d, d)
        red = psi @ psi.conj().T if keep == 0 else psi.T @ psi.conj()
    else:
        t = state.matrix.reshape(d, d, d, d)
        red = np.einsum("ijkj->ik", t) if keep == 0 else np.einsum("ijil->jl", t)
    red = 0.5 * (red + red.conj().T)
    return FockState(1, d, matrix=red / np.trace(red).real, tail_mass=state.tail_mass,
                     tail_tol=state.tail_tol)


def partial_transpose_matrix(rho: np.ndarray, cutoff: int, on: int = 1) -> np.ndarray:
    """<m1 n1|rho^PT|m2 n2> = <m1 n2|rho|m2 n1> for ``on=1`` (second mode)."""
    t = np.asarray(rho).reshape(cutoff, cutoff, cutoff, cutoff)
    t = t.transpose(0, 3, 2, 1) if on == 1 else t.transpose(2, 1, 0, 3)
    return t.reshape(cutoff**2, cutoff**2)


def partial_transpose(state: FockState, on: int = 1) -> np.ndarray:
    """Partially transposed density matrix.

    Returned as a bare Hermitian matrix because the result is generally not
    a state.
    """
    if state.modes != 2:
        raise ShapeError("partial_transpose needs a two-mode state")
    return partial_transpose_matrix(state.dm(), state.cutoff, on)


def reduce_matrix(rho: np.ndarray, cutoff: int, keep: int = 0) -> np.ndarray:
    """Partial trace of a (possibly non-positive) two-mode matrix."""
    t = np.asarray(rho).reshape(cutoff, cutoff, cutoff, cutoff)
    return np.einsum("ijkj->ik", t) if keep == 0 else np.einsum("ijil->jl", t)


def fidelity(a: FockState, b: FockState) -> float:
    """Uhlmann fidelity; the pure-pure and pure-mixed cases avoid square roots."""
    if a.is_pure and b.is_pure:
        return float(abs(np.vdot(a.vector, b.vector)) ** 2)
    if a.is_pure:
        return float(np.real(a.vector.conj() @ b.dm() @ a.vector))
    if b.is_pure:
        return float(np.real(b.vector.conj() @ a.dm() @ b.vector))
    from scipy.linalg import sqrtm

    s = sqrtm(a.dm())
    return float(np.real(np.trace(sqrtm(s @ b.dm() @ s))) ** 2)
