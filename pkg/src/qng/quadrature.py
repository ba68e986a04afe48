"""Probability distributions of multimode quadratures.

A direction (thetas, phis) selects ``Q = sum_j c_j q_{j, phi_j}`` with
``q_phi = (a e^{i phi} + a^dag e^{-i phi}) / sqrt(2)``. Two-mode directions are
reduced to a single-mode homodyne measurement behind a linear network
``L = B(theta) R1(phi1) R2(phi2)``: the distribution of Q in rho equals the
distribution of x on mode 1 of ``L rho L^dag``.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import fock
from .errors import GridError, NotDistribution, NumericsError, ShapeError, TruncationError
from .fock import FockState

DEFAULT_POINTS = 4096
CLIP_TOL = 1e-14
MASS_TOL = 1e-8


@dataclass(frozen=True)
class QuadratureDirection:
    thetas: tuple = ()
    phis: tuple = (0.0,)

    def __post_init__(self):
        object.__setattr__(self, "thetas", tuple(float(t) for t in self.thetas))
        object.__setattr__(self, "phis", tuple(float(p) for p in self.phis))
        if len(self.thetas) != len(self.phis) - 1:
            raise ShapeError("need len(thetas) == len(phis) - 1")

    @classmethod
    def single(cls, phi: float) -> "QuadratureDirection":
        return cls((), (phi,))

    @classmethod
    def two_mode(cls, theta: float, phi1: float, phi2: float) -> "QuadratureDirection":
        return cls((theta,), (phi1, phi2))

    @property
    def modes(self) -> int:
        return len(self.phis)

    @property
    def coeffs(self) -> np.ndarray:
        """Hyperspherical coefficients: cos t1, cos t2 sin t1, ..., prod sin t_k."""
        n = self.modes
        c = np.ones(n)
        running = 1.0
        for j in range(n - 1):
            c[j] = np.cos(self.thetas[j]) * running
            running *= np.sin(self.thetas[j])
        c[n - 1] = running
        return c

    def unit_vector(self) -> np.ndarray:
        """Direction in the (x1, p1, x2, p2, ...) basis: c_j (cos phi_j, -sin phi_j)."""
        c = self.coeffs
        out = np.empty(2 * self.modes)
        for j, phi in enumerate(self.phis):
            out[2 * j] = c[j] * np.cos(phi)
            out[2 * j + 1] = -c[j] * np.sin(phi)
        return out


@dataclass(frozen=True)
class QuadratureGrid:
    """Uniform grid with ``points`` intervals (``points + 1`` nodes) for Simpson's rule."""

    center: float = 0.0
    half_width: float = 8.0
    points: int = DEFAULT_POINTS

    def __post_init__(self):
        if self.half_width <= 0:
            raise GridError("half_width must be positive")
        if self.points < 256 or self.points % 4:
            raise GridError("points must be >= 256 and divisible by 4")

    @cached_property
    def x(self) -> np.ndarray:
        return np.linspace(self.center - self.half_width, self.center + self.half_width, self.points + 1)

    @property
    def dx(self) -> float:
        return 2.0 * self.half_width / self.points

    @cached_property
    def weights(self) -> np.ndarray:
        return simpson_weights(self.points + 1, self.dx)

    def coarsened(self) -> "QuadratureGrid":
        return QuadratureGrid(self.center, self.half_width, self.points // 2)


def simpson_weights(nodes: int, dx: float) -> np.ndarray:
    w = np.ones(nodes)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return w * dx / 3.0


@dataclass(frozen=True, eq=False)
class QuadratureDistribution:
    grid: QuadratureGrid
    density: np.ndarray = field(repr=False)

    @classmethod
    def from_density(cls, grid: QuadratureGrid, density, clip_tol: float = CLIP_TOL,
                     check_mass: bool = True) -> "QuadratureDistribution":
        d = np.array(density, dtype=float)
        lo = d.min()
        if lo < -clip_tol:
            raise NotDistribution(f"density reaches {lo:.3e}")
        d[d < 0] = 0.0
        d.setflags(write=False)
        out = cls(grid, d)
        if check_mass and abs(out.mass - 1.0) > MASS_TOL:
            raise GridError(f"grid captures mass {out.mass:.12f}", suggested_half_width=1.5 * grid.half_width)
        return out

    @property
    def x(self) -> np.ndarray:
        return self.grid.x

    @cached_property
    def mass(self) -> float:
        return float(self.grid.weights @ self.density)

    @cached_property
    def mean(self) -> float:
        return float(self.grid.weights @ (self.x * self.density)) / self.mass

    def central_moment(self, k: int) -> float:
        return float(self.grid.weights @ ((self.x - self.mean) ** k * self.density)) / self.mass

    @cached_property
    def variance(self) -> float:
        return self.central_moment(2)

    @cached_property
    def moments(self) -> dict:
        return {
            "mean": self.mean,
            "variance": self.variance,
            "m3": self.central_moment(3),
            "m4": self.central_moment(4),
        }

    @property
    def kurtosis(self) -> float:
        return self.moments["m4"] / self.variance**2

    def affine(self, a: float, b: float) -> "QuadratureDistribution":
        """Density of (X - b) / a, i.e. ``a X(a mu + b)``, on a matching grid."""
        g = self.grid
        new = QuadratureGrid((g.center - b) / a, g.half_width / abs(a), g.points)
        dens = abs(a) * self.density
        if a < 0:
            dens = dens[::-1]
        return QuadratureDistribution(new, dens)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["x", "density"])
        for xi, di in zip(self.x, self.density):
            w.writerow([f"{xi:.12g}", f"{di:.12g}"])
        return buf.getvalue()


# --------------------------------------------------------- oscillator table


def oscillator_table(nmax: int, x) -> np.ndarray:
    """Rows psi_0..psi_{nmax-1} of the normalized oscillator eigenfunctions.

    Stable recurrence psi_{n+1} = x sqrt(2/(n+1)) psi_n - sqrt(n/(n+1)) psi_{n-1};
    no factorials, so no overflow at large n.
    """
    x = np.asarray(x, dtype=float)
    out = np.empty((max(nmax, 1), x.size))
    out[0] = np.pi**-0.25 * np.exp(-0.5 * x * x)
    if nmax > 1:
        out[1] = np.sqrt(2.0) * x * out[0]
    for n in range(1, nmax - 1):
        out[n + 1] = x * np.sqrt(2.0 / (n + 1)) * out[n] - np.sqrt(n / (n + 1)) * out[n - 1]
    return out[:nmax]


def quadrature_matrix(cutoff: int) -> np.ndarray:
    a = fock.annihilation(cutoff)
    return (a + a.conj().T) / np.sqrt(2.0)


def _support(matrix: np.ndarray, tol: float = 1e-30) -> int:
    """Number of leading levels carrying any weight."""
    mag = np.max(np.abs(matrix), axis=0)
    nz = np.flatnonzero(mag > tol)
    return int(nz[-1]) + 1 if nz.size else 1


class SingleModeEngine:
    """Quadrature densities and moments of one single-mode matrix at any phase.

    The density is expanded in phase harmonics,
    ``p(x, phi) = D_0(x) + 2 Re sum_k e^{i k phi} D_k(x)`` with
    ``D_k = sum_{m - n = k} rho_mn psi_m psi_n``, so each phase costs O(K G).
    Accepts non-positive Hermitian matrices (partial transposes); their
    densities are checked, not assumed, to be non-negative.
    """

    def __init__(self, matrix, grid: QuadratureGrid | None = None, clip_tol: float = CLIP_TOL):
        rho = np.asarray(matrix, dtype=complex)
        k = _support(rho)
        self.rho = rho[:k, :k]
        self.levels = k
        self.clip_tol = clip_tol
        self.grid = grid or self.default_grid()
        psi = oscillator_table(k, self.grid.x)
        harm = np.empty((k, psi.shape[1]), dtype=complex)
        for j in range(k):
            # rho_{n+j, n} psi_{n+j} psi_n
            diag = np.diagonal(self.rho, offset=-j)
            harm[j] = np.einsum("n,nx,nx->x", diag, psi[j:], psi[: k - j])
        self._harm = harm

    @cached_property
    def _moment_coeffs(self) -> dict:
        """Exact trig coefficients of <q_phi^k>, k = 1..4, from ladder algebra."""
        k = self.levels
        big = k + 4
        rho = np.zeros((big, big), dtype=complex)
        rho[:k, :k] = self.rho
        q = quadrature_matrix(big)
        qk = np.eye(big, dtype=complex)
        out = {}
        for order in range(1, 5):
            qk = qk @ q
            # <q_phi^k> = sum_{m,n} e^{i phi (m - n)} rho_mn (q^k)_nm
            prod = rho * qk.T
            out[order] = {j: np.trace(prod, offset=-j) for j in range(0, order + 1)}
        return out

    def raw_moment(self, phi: float, order: int) -> float:
        if order not in (1, 2, 3, 4):
            raise ShapeError("moment order must be 1..4")
        c = self._moment_coeffs[order]
        val = c[0].real + 2.0 * sum((np.exp(1j * j * phi) * c[j]).real for j in range(1, order + 1))
        return float(val)

    def central_moments(self, phi: float):
        m1, m2, m3, m4 = (self.raw_moment(phi, k) for k in (1, 2, 3, 4))
        var = m2 - m1 * m1
        c3 = m3 - 3 * m2 * m1 + 2 * m1**3
        c4 = m4 - 4 * m3 * m1 + 6 * m2 * m1 * m1 - 3 * m1**4
        return m1, var, c3, c4

    def default_grid(self, points: int = DEFAULT_POINTS) -> QuadratureGrid:
        """A phase-independent grid wide enough for every phase."""
        a = fock.annihilation(self.levels)
        alpha = np.trace(self.rho @ a)
        n_mean = float(np.real(np.trace(self.rho @ np.diag(np.arange(self.levels)))))
        a2 = np.trace(self.rho @ a @ a)
        # largest quadrature variance over phases
        var_max = n_mean + 0.5 + abs(a2 - alpha**2) - abs(alpha) ** 2
        hw = np.sqrt(2.0) * abs(alpha) + 8.0 * max(1.0, np.sqrt(max(var_max, 0.0)))
        return QuadratureGrid(0.0, float(hw), points)

    def density(self, phi: float) -> np.ndarray:
        ph = np.exp(1j * phi * np.arange(1, self.levels))
        return self._harm[0].real + 2.0 * (ph @ self._harm[1:]).real

    def distribution(self, phi: float, check_mass: bool = True) -> QuadratureDistribution:
        return QuadratureDistribution.from_density(self.grid, self.density(phi), self.clip_tol, check_mass)


class TwoModeNetwork:
    """Reduces two-mode quadratures to mode-1 homodyne behind B(theta) R1 R2.

    Works on the subspace of total photon number <= K, which the beam splitter
    preserves, so no truncation happens inside the network. K may exceed the
    per-mode cutoff (up to 2 (cutoff - 1)); it is the smallest total beyond
    which the state carries less than ``drop_tol`` weight. The state is stored
    as weighted eigenvectors, so each evaluation costs a few mat-vecs.
    """

    def __init__(self, matrix, cutoff: int, drop_tol: float = 1e-13):
        rho = np.asarray(matrix, dtype=complex)
        d = cutoff
        m1, m2 = np.divmod(np.arange(d * d), d)
        total = m1 + m2
        diag = np.real(np.diag(rho))
        per_total = np.bincount(total, weights=np.clip(diag, 0.0, None), minlength=2 * d - 1)
        beyond = np.cumsum(per_total[::-1])[::-1]  # weight at totals >= n
        k = 0
        while k + 1 < len(beyond) and beyond[k + 1] > drop_tol:
            k += 1
        self.cutoff = d
        self.max_total = k
        self.dropped = float(beyond[k + 1]) if k + 1 < len(beyond) else 0.0
        # enumerate (n1, n2) with n1 + n2 <= k, grouped by total
        pairs = [(a, n - a) for n in range(k + 1) for a in range(n + 1)]
        self.n1 = np.array([p[0] for p in pairs])
        self.n2 = np.array([p[1] for p in pairs])
        self._blocks = [np.flatnonzero(self.n1 + self.n2 == n) for n in range(k + 1)]
        inside = (self.n1 < d) & (self.n2 < d)
        src = self.n1[inside] * d + self.n2[inside]
        dst = np.flatnonzero(inside)
        sub = np.zeros((len(pairs), len(pairs)), dtype=complex)
        sub[np.ix_(dst, dst)] = rho[np.ix_(src, src)]
        w, v = np.linalg.eigh(0.5 * (sub + sub.conj().T))
        keep = np.abs(w) > 1e-15 * max(1.0, np.abs(w).max())
        self.weights = w[keep]
        self.vectors = v[:, keep]
        self._bs_cache = {}
        self._gen = self._generator()
        self._eig = [np.linalg.eigh(1j * self._gen[np.ix_(b, b)]) for b in self._blocks]

    @property
    def rho(self) -> np.ndarray:
        return (self.vectors * self.weights) @ self.vectors.conj().T

    def _generator(self):
        n1, n2 = self.n1, self.n2
        pos = {(a, b): i for i, (a, b) in enumerate(zip(n1, n2))}
        dim = len(n1)
        g = np.zeros((dim, dim))
        # (a1^dag a2 - a2^dag a1)
        for i, (a, b) in enumerate(zip(n1, n2)):
            if b > 0:
                j = pos[(a + 1, b - 1)]
                g[j, i] += np.sqrt((a + 1) * b)
            if a > 0:
                j = pos[(a - 1, b + 1)]
                g[j, i] -= np.sqrt(a * (b + 1))
        return g

    def beam_splitter_blocks(self, theta: float) -> list:
        key = round(theta, 15)
        blocks = self._bs_cache.get(key)
        if blocks is None:
            # each block generator is real antisymmetric: G = -i V diag(lam) V^dag
            blocks = [(v * np.exp(-1j * theta * lam)) @ v.conj().T for lam, v in self._eig]
            if len(self._bs_cache) > 256:
                self._bs_cache.clear()
            self._bs_cache[key] = blocks
        return blocks

    def beam_splitter(self, theta: float) -> np.ndarray:
        u = np.zeros(self._gen.shape, dtype=complex)
        for b, ub in zip(self._blocks, self.beam_splitter_blocks(theta)):
            u[np.ix_(b, b)] = ub
        return u

    def output_vectors(self, theta: float, phi1: float, phi2: float) -> np.ndarray:
        ph = np.exp(1j * (phi1 * self.n1 + phi2 * self.n2))
        vecs = ph[:, None] * self.vectors
        out = np.empty_like(vecs)
        for b, ub in zip(self._blocks, self.beam_splitter_blocks(theta)):
            out[b] = ub @ vecs[b]
        return out

    def output(self, theta: float, phi1: float, phi2: float) -> np.ndarray:
        """L rho L^dag on the support subspace."""
        v = self.output_vectors(theta, phi1, phi2)
        return (v * self.weights) @ v.conj().T

    def reduced(self, theta: float, phi1: float, phi2: float) -> np.ndarray:
        """Mode-1 reduced matrix after the network, size (K+1) x (K+1)."""
        v = self.output_vectors(theta, phi1, phi2)
        k = self.max_total + 1
        grid = np.zeros((k, k, v.shape[1]), dtype=complex)
        grid[self.n1, self.n2] = v
        # sum over the mode-2 index and the eigen-components
        flat = grid.reshape(k, -1)
        w = np.tile(self.weights, k)
        return (flat * w) @ flat.conj().T

    def reduced_for(self, direction: QuadratureDirection) -> np.ndarray:
        (t,), (p1, p2) = direction.thetas, direction.phis
        return self.reduced(t, p1, p2)


def _matrix_and_modes(state):
    if isinstance(state, FockState):
        return state.dm(), state.modes, state.cutoff
    raise TypeError("expected a FockState")


def default_grid(state: FockState, direction: QuadratureDirection, points: int = DEFAULT_POINTS) -> QuadratureGrid:
    """center = <Q>, half_width = 8 max(1, sqrt Var Q)."""
    mean = moment(state, direction, 1)
    var = moment(state, direction, 2) - mean**2
    return QuadratureGrid(mean, 8.0 * max(1.0, float(np.sqrt(max(var, 0.0)))), points)


def _single_mode_matrix(state: FockState, direction: QuadratureDirection):
    """Single-mode matrix and phase whose x_phi statistics equal those of Q."""
    rho = state.dm()
    if state.modes == 1:
        if direction.modes != 1:
            raise ShapeError("direction arity does not match the state")
        return rho, direction.phis[0]
    if direction.modes != 2:
        raise ShapeError("direction arity does not match the state")
    net = TwoModeNetwork(rho, state.cutoff)
    return net.reduced_for(direction), 0.0


def distribution(state: FockState, direction: QuadratureDirection, grid: QuadratureGrid | None = None
                 ) -> QuadratureDistribution:
    """Quadrature distribution of ``state`` along ``direction``."""
    state.require_safe()
    matrix, phi = _single_mode_matrix(state, direction)
    if grid is None:
        grid = default_grid(state, direction)
    eng = SingleModeEngine(matrix, grid)
    dens = eng.density(phi)
    try:
        return QuadratureDistribution.from_density(grid, dens)
    except NotDistribution as exc:
        raise NumericsError(str(exc)) from exc


def marginal_distribution(state: FockState, direction: QuadratureDirection, grid: QuadratureGrid | None = None,
                          v_points: int | None = None) -> QuadratureDistribution:
    """Two-mode density by rotating coordinates and integrating out v.

    u = c1 x1 + c2 x2, v = -c2 x1 + c1 x2 over the joint distribution of the
    phase-rotated quadratures. Independent of the network route; used as a
    cross-check. Mixed states are handled through their eigen-decomposition.
    """
    if state.modes != 2:
        raise ShapeError("marginal_distribution needs a two-mode state")
    if grid is None:
        grid = default_grid(state, direction)
    d = state.cutoff
    c1, c2 = direction.coeffs
    p1, p2 = direction.phis
    vg = QuadratureGrid(0.0, grid.half_width + abs(grid.center), v_points or grid.points)
    u = grid.x[:, None]
    v = vg.x[None, :]
    x1 = c1 * u - c2 * v
    x2 = c2 * u + c1 * v
    if state.is_pure:
        vals, vecs = np.array([1.0]), state.vector[:, None]
    else:
        vals, vecs = np.linalg.eigh(state.matrix)
        keep = vals > 1e-14
        vals, vecs = vals[keep], vecs[:, keep]
    n = np.arange(d)
    rho = state.dm()
    live = max(_support(fock.reduce_matrix(rho, d, 0)), _support(fock.reduce_matrix(rho, d, 1)))
    psi1 = oscillator_table(live, x1.ravel()).reshape(live, *x1.shape)
    psi2 = oscillator_table(live, x2.ravel()).reshape(live, *x2.shape)
    total = np.zeros(x1.shape)
    for lam, vec in zip(vals, vecs.T):
        c = vec.reshape(d, d)[:live, :live] * np.exp(1j * (p1 * n[:live, None] + p2 * n[None, :live]))
        amp = np.einsum("mn,muv,nuv->uv", c, psi1, psi2)
        total += lam * np.abs(amp) ** 2
    dens = total @ vg.weights
    return QuadratureDistribution.from_density(grid, dens)


def moment(state: FockState, direction: QuadratureDirection, order: int) -> float:
    """Raw moment <Q^order> from ladder-operator algebra (no grid)."""
    matrix, phi = _single_mode_matrix(state, direction)
    return SingleModeEngine(matrix, QuadratureGrid(0.0, 1.0, 256)).raw_moment(phi, order)


@dataclass(frozen=True)
class MomentField:
    """<q_phi^n> as a degree-n trig polynomial with harmonics n, n-2, ..."""

    order: int
    harmonics: tuple
    cos_coeffs: np.ndarray
    sin_coeffs: np.ndarray

    def __call__(self, phi):
        phi = np.asarray(phi, dtype=float)
        out = np.zeros_like(phi)
        for k, a, b in zip(self.harmonics, self.cos_coeffs, self.sin_coeffs):
            out = out + a * np.cos(k * phi) + b * np.sin(k * phi)
        return out


def _field_basis(order: int, phis) -> tuple:
    harmonics = tuple(range(order % 2, order + 1, 2))
    cols = []
    for k in harmonics:
        if k == 0:
            cols.append(np.ones_like(phis))
        else:
            cols.append(np.cos(k * phis))
            cols.append(np.sin(k * phis))
    return harmonics, np.column_stack(cols)


def sample_phases(order: int, phi0: float = 0.0) -> np.ndarray:
    return phi0 + np.arange(order + 1) * np.pi / (order + 1)


def reconstruct_moment_field(samples, order: int, phi0: float = 0.0) -> MomentField:
    """Recover <q_phi^order> for all phi from order + 1 equally spaced phases.

    ``samples[j]`` is the moment measured at ``phi0 + j pi / (order + 1)``.
    """
    samples = np.asarray(samples, dtype=float)
    if samples.shape != (order + 1,):
        raise ShapeError(f"order {order} needs exactly {order + 1} samples, got {samples.shape}")
    phis = sample_phases(order, phi0)
    harmonics, basis = _field_basis(order, phis)
    sol = np.linalg.solve(basis, samples)
    cos_c, sin_c, i = [], [], 0
    for k in harmonics:
        if k == 0:
            cos_c.append(sol[i])
            sin_c.append(0.0)
            i += 1
        else:
            cos_c.append(sol[i])
            sin_c.append(sol[i + 1])
            i += 2
    return MomentField(order, harmonics, np.array(cos_c), np.array(sin_c))
