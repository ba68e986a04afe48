"""Non-Gaussianity measures and the bounds that tie them together.

``n_kl`` maximizes the negentropy of quadrature distributions over all
directions; the other measures need the reference Gaussian state.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.optimize import minimize

from . import gaussian, info
from .errors import NotDistribution, ShapeError, TruncationError
from .fock import FockState
from .quadrature import (
    DEFAULT_POINTS,
    QuadratureDirection,
    QuadratureDistribution,
    QuadratureGrid,
    SingleModeEngine,
    TwoModeNetwork,
    oscillator_table,
    quadrature_matrix,
    reconstruct_moment_field,
    sample_phases,
)

log = logging.getLogger(__name__)

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class OptimizerOptions:
    phases: int = 180
    golden_tol: float = 1e-6
    top_brackets: int = 3
    theta_points: int = 12
    phi_points: int = 24
    top_cells: int = 5
    simplex_tol: float = 1e-5
    grid_points: int = DEFAULT_POINTS


@dataclass
class NKLResult:
    value: float
    direction: QuadratureDirection
    coarse_value: float
    refined_values: list
    iterations: int
    multimodal: bool
    converged: bool = True
    raw_value: float = 0.0

    def diagnostics(self) -> dict:
        return {
            "best_thetas": list(self.direction.thetas),
            "best_phis": list(self.direction.phis),
            "coarse_value": self.coarse_value,
            "refined_values": list(self.refined_values),
            "iterations": self.iterations,
            "multimodal": self.multimodal,
            "converged": self.converged,
            "raw_value": self.raw_value,
        }


def golden_section_max(f, a: float, b: float, tol: float = 1e-6, max_iter: int = 200):
    """Maximize a unimodal f on [a, b]; returns (x, f(x), iterations)."""
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    it = 0
    while abs(b - a) > tol and it < max_iter:
        it += 1
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = f(d)
    if fc >= fd:
        return c, fc, it
    return d, fd, it


def _negentropy_of_density(grid: QuadratureGrid, density: np.ndarray, clip_tol: float) -> float:
    return info.negentropy_raw(QuadratureDistribution.from_density(grid, density, clip_tol, check_mass=False))


class SingleModeLandscape:
    """Negentropy and moments of q_phi for one single-mode matrix."""

    def __init__(self, matrix, grid_points: int = DEFAULT_POINTS, clip_tol: float = 1e-14):
        self.engine = SingleModeEngine(matrix, clip_tol=clip_tol)
        if grid_points != self.engine.grid.points:
            g = self.engine.grid
            self.engine = SingleModeEngine(matrix, QuadratureGrid(g.center, g.half_width, grid_points), clip_tol)
        self.clip_tol = clip_tol
        self.evaluations = 0

    def negentropy(self, phi: float) -> float:
        self.evaluations += 1
        return _negentropy_of_density(self.engine.grid, self.engine.density(phi), self.clip_tol)

    def distribution(self, phi: float) -> QuadratureDistribution:
        return self.engine.distribution(phi)


class TwoModeLandscape:
    """Negentropy of two-mode quadratures via the linear-network reduction."""

    def __init__(self, state: FockState, grid_points: int = DEFAULT_POINTS):
        self.net = TwoModeNetwork(state.dm(), state.cutoff)
        cov = gaussian.covariance(state)
        mean_bound = float(np.linalg.norm(cov.means))
        var_max = float(np.linalg.eigvalsh(cov.gamma)[-1])
        hw = mean_bound + 8.0 * max(1.0, math.sqrt(var_max))
        self.grid = QuadratureGrid(0.0, hw, grid_points)
        self.psi = oscillator_table(self.net.max_total + 1, self.grid.x)
        self.evaluations = 0

    def density(self, theta: float, phi1: float, phi2: float) -> np.ndarray:
        red = self.net.reduced(theta, phi1, phi2)
        return np.sum(self.psi * np.real(red @ self.psi), axis=0)

    def negentropy(self, theta: float, phi1: float, phi2: float) -> float:
        self.evaluations += 1
        return _negentropy_of_density(self.grid, self.density(theta, phi1, phi2), 1e-14)

    def moments(self, theta: float, phi1: float, phi2: float):
        """(mean, variance, third, fourth central moments) of Q from ladder algebra."""
        red = self.net.reduced(theta, phi1, phi2)
        return _central_from_matrix(red)


def _central_from_matrix(red: np.ndarray):
    k = red.shape[0]
    big = k + 4
    rho = np.zeros((big, big), dtype=complex)
    rho[:k, :k] = red
    q = quadrature_matrix(big)
    raw, qk = [], np.eye(big, dtype=complex)
    for _ in range(4):
        qk = qk @ q
        raw.append(float(np.real(np.sum(rho * qk.T))))
    m1, m2, m3, m4 = raw
    var = m2 - m1 * m1
    return m1, var, m3 - 3 * m2 * m1 + 2 * m1**3, m4 - 4 * m3 * m1 + 6 * m2 * m1 * m1 - 3 * m1**4


def _local_maxima_periodic(values: np.ndarray) -> np.ndarray:
    left = np.roll(values, 1)
    right = np.roll(values, -1)
    idx = np.flatnonzero((values >= left) & (values >= right))
    if idx.size == 0:
        idx = np.array([int(np.argmax(values))])
    return idx[np.argsort(-values[idx], kind="stable")]


def _angle_dist(a: float, b: float, period: float = math.pi) -> float:
    d = abs(a - b) % period
    return min(d, period - d)


def n_kl_single(matrix, opts: OptimizerOptions = OptimizerOptions(), clip_tol: float = 1e-14,
                landscape: SingleModeLandscape | None = None) -> NKLResult:
    """Maximum negentropy over phases for a single-mode matrix.

    Coarse scan of ``opts.phases`` phases on [0, pi) (the distribution at
    phi + pi mirrors the one at phi), then golden-section refinement inside the
    brackets of the best local maxima.
    """
    land = landscape or SingleModeLandscape(matrix, opts.grid_points, clip_tol)
    step = math.pi / opts.phases
    phis = np.arange(opts.phases) * step
    vals = np.array([land.negentropy(p) for p in phis])
    coarse_best = float(vals.max())
    refined = []
    iters = 0
    for i in _local_maxima_periodic(vals)[: opts.top_brackets]:
        x, fx, it = golden_section_max(land.negentropy, phis[i] - step, phis[i] + step, opts.golden_tol)
        iters += it
        refined.append((fx, x % math.pi))
    refined.sort(key=lambda t: (-t[0], t[1]))
    best_val, best_phi = refined[0]
    if coarse_best > best_val:
        best_val, best_phi = coarse_best, float(phis[int(np.argmax(vals))])
    multimodal = len(refined) > 1 and _angle_dist(refined[0][1], refined[1][1]) > 10 * opts.golden_tol \
        and abs(refined[0][0] - refined[1][0]) < 1e-6
    return NKLResult(
        value=max(best_val, 0.0),
        direction=QuadratureDirection.single(best_phi),
        coarse_value=coarse_best,
        refined_values=[v for v, _ in refined],
        iterations=iters,
        multimodal=bool(multimodal),
        raw_value=best_val,
    )


def n_kl_two_mode(state: FockState, opts: OptimizerOptions = OptimizerOptions(),
                  landscape: TwoModeLandscape | None = None) -> NKLResult:
    """Maximum negentropy over (theta1, phi1, phi2).

    Coarse grid theta1 in [0, pi/2] x phi1, phi2 in [0, 2 pi), then Nelder-Mead
    from the best cells.
    """
    land = landscape or TwoModeLandscape(state, opts.grid_points)
    thetas = np.linspace(0.0, math.pi / 2, opts.theta_points)
    phis = np.arange(opts.phi_points) * (2 * math.pi / opts.phi_points)
    vals = np.empty((len(thetas), len(phis), len(phis)))
    for i, t in enumerate(thetas):
        for j, p1 in enumerate(phis):
            for k, p2 in enumerate(phis):
                vals[i, j, k] = land.negentropy(t, p1, p2)
    coarse_best = float(vals.max())
    order = np.argsort(-vals.ravel(), kind="stable")
    starts, seen = [], set()
    for flat in order:
        i, j, k = np.unravel_index(flat, vals.shape)
        key = (i, j, k)
        if key in seen:
            continue
        seen.add(key)
        starts.append((thetas[i], phis[j], phis[k]))
        if len(starts) >= opts.top_cells:
            break
    refined, iters, converged = [], 0, True
    for x0 in starts:
        res = minimize(lambda v: -land.negentropy(*v), np.array(x0), method="Nelder-Mead",
                       options={"xatol": opts.simplex_tol, "fatol": 1e-12, "maxiter": 2000})
        iters += int(res.nit)
        converged &= bool(res.success)
        refined.append((float(-res.fun), tuple(float(v) for v in res.x)))
    refined.sort(key=lambda t: (-t[0],) + t[1])
    best_val, best_x = refined[0]
    if coarse_best > best_val:
        flat = int(np.argmax(vals))
        i, j, k = np.unravel_index(flat, vals.shape)
        best_val, best_x = coarse_best, (thetas[i], phis[j], phis[k])
    if not converged:
        log.warning("simplex refinement hit its iteration cap; reporting best so far")
    multimodal = len(refined) > 1 and abs(refined[0][0] - refined[1][0]) < 1e-6
    return NKLResult(
        value=max(best_val, 0.0),
        direction=QuadratureDirection.two_mode(*best_x),
        coarse_value=coarse_best,
        refined_values=[v for v, _ in refined],
        iterations=iters,
        multimodal=bool(multimodal),
        converged=converged,
        raw_value=best_val,
    )


def n_kl(state: FockState, opts: OptimizerOptions = OptimizerOptions()) -> NKLResult:
    state.require_safe()
    if state.modes == 1:
        return n_kl_single(state.dm(), opts)
    return n_kl_two_mode(state, opts)


# --------------------------------------------------------- kurtosis strategy


@dataclass
class KurtosisEstimate:
    phi_kmax: float
    phi_kmin: float
    j_at_kmax: float
    j_at_kmin: float
    k_max: float
    k_min: float
    rotationally_symmetric: bool = False
    phi_vmax: float | None = None
    phi_vmin: float | None = None
    j_at_vmax: float | None = None
    j_at_vmin: float | None = None
    direction_kmax: QuadratureDirection | None = None
    direction_kmin: QuadratureDirection | None = None

    @property
    def estimate(self) -> float:
        return max(self.j_at_kmax, self.j_at_kmin)

    @property
    def augmented_estimate(self) -> float:
        cands = [self.j_at_kmax, self.j_at_kmin]
        cands += [v for v in (self.j_at_vmax, self.j_at_vmin) if v is not None]
        return max(cands)


@dataclass(frozen=True)
class MomentFields:
    first: object
    second: object
    third: object
    fourth: object

    def central(self, phi):
        m1, m2, m3, m4 = self.first(phi), self.second(phi), self.third(phi), self.fourth(phi)
        var = m2 - m1 * m1
        c4 = m4 - 4 * m3 * m1 + 6 * m2 * m1 * m1 - 3 * m1**4
        return var, c4

    def kurtosis(self, phi):
        var, c4 = self.central(phi)
        return c4 / var**2

    def variance(self, phi):
        return self.central(phi)[0]


def moment_fields(engine: SingleModeEngine, phi0: float = 0.0) -> MomentFields:
    """Trig-polynomial moment fields from order + 1 sampled phases per order."""
    fields = []
    for order in (1, 2, 3, 4):
        samples = [engine.raw_moment(p, order) for p in sample_phases(order, phi0)]
        fields.append(reconstruct_moment_field(samples, order, phi0))
    return MomentFields(*fields)


def _extrema_on_circle(fn, points: int = 720, tol: float = 1e-9):
    """(phi_max, phi_min) of a pi-periodic function, grid search + golden polish."""
    step = math.pi / points
    phis = np.arange(points) * step
    vals = np.asarray(fn(phis), dtype=float)
    i_max, i_min = int(np.argmax(vals)), int(np.argmin(vals))
    f = lambda p: float(fn(np.array([p]))[0])
    pmax, _, _ = golden_section_max(f, phis[i_max] - step, phis[i_max] + step, tol)
    pmin, _, _ = golden_section_max(lambda p: -f(p), phis[i_min] - step, phis[i_min] + step, tol)
    return pmax % math.pi, pmin % math.pi, float(vals.max()), float(vals.min())


def kurtosis_strategy(state_or_matrix, with_variance: bool = False, grid_points: int = DEFAULT_POINTS,
                      landscape: SingleModeLandscape | None = None, symmetry_tol: float = 1e-9
                      ) -> KurtosisEstimate:
    """Negentropies at the phases of extremal kurtosis (and optionally variance)."""
    if isinstance(state_or_matrix, FockState):
        if state_or_matrix.modes == 2:
            return kurtosis_strategy_two_mode(state_or_matrix, grid_points=grid_points)
        matrix = state_or_matrix.dm()
    else:
        matrix = state_or_matrix
    land = landscape or SingleModeLandscape(matrix, grid_points)
    fields = moment_fields(land.engine)
    pk_max, pk_min, kmax, kmin = _extrema_on_circle(fields.kurtosis)
    symmetric = (kmax - kmin) < symmetry_tol
    if symmetric:
        pk_max = pk_min = 0.0
    j_max = land.negentropy(pk_max)
    j_min = j_max if symmetric else land.negentropy(pk_min)
    est = KurtosisEstimate(pk_max, pk_min, max(j_max, 0.0), max(j_min, 0.0), kmax, kmin, symmetric)
    if with_variance:
        pv_max, pv_min, vmax, vmin = _extrema_on_circle(fields.variance)
        if vmax - vmin < symmetry_tol:
            pv_max = pv_min = 0.0
        est.phi_vmax, est.phi_vmin = pv_max, pv_min
        est.j_at_vmax = max(land.negentropy(pv_max), 0.0)
        est.j_at_vmin = max(land.negentropy(pv_min), 0.0)
    est.direction_kmax = QuadratureDirection.single(est.phi_kmax)
    est.direction_kmin = QuadratureDirection.single(est.phi_kmin)
    return est


def kurtosis_strategy_two_mode(state: FockState, grid_points: int = DEFAULT_POINTS,
                               theta_points: int = 12, phi_points: int = 24,
                               landscape: TwoModeLandscape | None = None) -> KurtosisEstimate:
    """Kurtosis extremes over (theta1, phi1, phi2) by grid search and simplex."""
    land = landscape or TwoModeLandscape(state, grid_points)

    def kurt(v):
        _, var, _, c4 = land.moments(*v)
        return c4 / var**2

    thetas = np.linspace(0.0, math.pi / 2, theta_points)
    phis = np.arange(phi_points) * (2 * math.pi / phi_points)
    pts = [(t, a, b) for t in thetas for a in phis for b in phis]
    ks = np.array([kurt(p) for p in pts])

    def polish(sign):
        best = None
        for idx in np.argsort(sign * -ks, kind="stable")[:3]:
            res = minimize(lambda v: -sign * kurt(v), np.array(pts[idx]), method="Nelder-Mead",
                           options={"xatol": 1e-7, "fatol": 1e-13, "maxiter": 2000})
            if best is None or res.fun < best.fun:
                best = res
        return tuple(float(v) for v in best.x), float(-sign * best.fun)

    x_max, kmax = polish(1.0)
    x_min, kmin = polish(-1.0)
    j_max = max(land.negentropy(*x_max), 0.0)
    j_min = max(land.negentropy(*x_min), 0.0)
    est = KurtosisEstimate(float("nan"), float("nan"), j_max, j_min, kmax, kmin, abs(kmax - kmin) < 1e-9)
    est.direction_kmax = QuadratureDirection.two_mode(*x_max)
    est.direction_kmin = QuadratureDirection.two_mode(*x_min)
    return est


# ------------------------------------------------------------- other measures


def _reference_entropy(state: FockState) -> float:
    cov = gaussian.covariance(state)
    return gaussian.gaussian_von_neumann(gaussian.symplectic_eigenvalues(cov))


def n_qr(state: FockState) -> float:
    """S1(rho_G) - S1(rho) using the symplectic spectrum for rho_G."""
    state.require_safe()
    val = _reference_entropy(state) - gaussian.von_neumann_entropy(state)
    if val < -1e-7:
        log.warning("n_qr %.3e below tolerance", val)
    return max(val, 0.0)


def genoni_lower(state: FockState) -> float:
    """S1(rho_G) minus the Shannon entropy of the photon-number distribution."""
    state.require_safe()
    return _reference_entropy(state) - gaussian.shannon_entropy(state.photon_distribution())


MAX_REFERENCE_CUTOFF = 1024


def reference_state(state: FockState, cutoff: int | None = None) -> FockState:
    """rho_G in the Fock basis, enlarging the cutoff until its tail is negligible."""
    if state.modes != 1:
        raise ShapeError("Fock-basis reference states are built for one mode only")
    cov = gaussian.covariance(state)
    d = cutoff or state.cutoff
    while True:
        try:
            return gaussian.reference_gaussian_fock(cov, d)
        except TruncationError:
            if cutoff is not None or 2 * d > MAX_REFERENCE_CUTOFF:
                raise
            d *= 2


def _overlap(state: FockState, ref: FockState) -> float:
    """tr(rho sigma); the smaller matrix is zero-padded."""
    a, b = state.dm(), ref.dm()
    k = min(a.shape[0], b.shape[0])
    return float(np.real(np.sum(a[:k, :k] * b[:k, :k].T)))


@dataclass(frozen=True)
class HSResult:
    exact: float | None
    lower: float


def hs_lower_bound(nkl: float, modes: int) -> float:
    f = min(1.0, math.exp(-nkl / 2.0 + 0.5 * modes * math.log(math.e / 2.0)))
    return 0.5 * (1.0 - f) ** 2


def n_hs(state: FockState, nkl: float | None = None, ref: FockState | None = None) -> HSResult:
    """Hilbert-Schmidt non-Gaussianity (one mode) and its negentropy lower bound."""
    if nkl is None:
        nkl = n_kl(state).value
    lower = hs_lower_bound(nkl, state.modes)
    exact = None
    if state.modes == 1:
        ref = ref or reference_state(state)
        mu, mu_g = state.purity(), ref.purity()
        exact = (mu + mu_g - 2.0 * _overlap(state, ref)) / (2.0 * mu)
    return HSResult(exact, lower)


def overlap_bound(state: FockState, nqr: float | None = None, ref: FockState | None = None):
    """(tr(rho rho_G) / tr rho^2, (e/2)^{N/2} exp(-N_QR / 2))."""
    ref = ref or reference_state(state)
    nqr = n_qr(state) if nqr is None else nqr
    ratio = _overlap(state, ref) / state.purity()
    bound = (math.e / 2.0) ** (state.modes / 2.0) * math.exp(-nqr / 2.0)
    return ratio, bound


def uncertainty_check(state: FockState, nkl: float | None = None):
    """(sqrt det Gamma, h^{-1}(N_KL + S1)); the first never falls below the second."""
    if state.modes != 1:
        raise ShapeError("uncertainty_check covers one mode")
    nkl = n_kl(state).value if nkl is None else nkl
    lhs = math.sqrt(max(gaussian.covariance(state).det(), 0.0))
    rhs = gaussian.h_inverse(nkl + gaussian.von_neumann_entropy(state))
    return lhs, rhs


# ------------------------------------------------------------------ reports


@dataclass
class MeasureReport:
    state: str
    nkl: float
    nkl_diagnostics: dict
    nqr: float
    nhs_exact: float | None
    nhs_lower: float
    genoni_lower: float | None
    overlap_ratio: float | None
    overlap_bound: float | None
    ur_lhs: float | None
    ur_rhs: float | None
    mean_photon: float
    provenance: dict = field(default_factory=dict)

    def check_invariants(self) -> list[str]:
        bad = []
        if self.nqr < self.nkl - 1e-6:
            bad.append("nqr < nkl")
        if self.nhs_exact is not None and self.nhs_exact < self.nhs_lower - 1e-9:
            bad.append("nhs_exact < nhs_lower")
        for name in ("nkl", "nqr", "nhs_lower"):
            if getattr(self, name) < -1e-7:
                bad.append(f"{name} negative")
        return bad

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2, default=_jsonable)

    CSV_FIELDS = ("state", "mean_photon", "nkl", "nqr", "nhs_exact", "nhs_lower", "genoni_lower",
                  "overlap_ratio", "overlap_bound", "ur_lhs", "ur_rhs")

    def csv_row(self) -> list[str]:
        return [_fmt(getattr(self, k)) for k in self.CSV_FIELDS]


def _jsonable(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialize {type(obj)}")


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return f"{v:.12g}"
    return str(v)


def measure(state: FockState, label: str = "", opts: OptimizerOptions = OptimizerOptions(),
            provenance: dict | None = None) -> MeasureReport:
    """All measures and bounds for one state."""
    res = n_kl(state, opts)
    nqr = n_qr(state)
    single = state.modes == 1
    ref = reference_state(state) if single else None
    hs = n_hs(state, res.value, ref)
    ratio = bound = lhs = rhs = None
    if single:
        ratio, bound = overlap_bound(state, nqr, ref)
        lhs, rhs = uncertainty_check(state, res.value)
    prov = {"cutoff": state.cutoff, "grid_points": opts.grid_points, "optimizer": asdict(opts)}
    prov.update(provenance or {})
    return MeasureReport(
        state=label,
        nkl=res.value,
        nkl_diagnostics=res.diagnostics(),
        nqr=nqr,
        nhs_exact=hs.exact,
        nhs_lower=hs.lower,
        genoni_lower=genoni_lower(state),
        overlap_ratio=ratio,
        overlap_bound=bound,
        ur_lhs=lhs,
        ur_rhs=rhs,
        mean_photon=sum(state.mean_photon(m) for m in range(state.modes)),
        provenance=prov,
    )


def n_kl_of_matrix(matrix, opts: OptimizerOptions = OptimizerOptions(), clip_tol: float = 1e-10) -> NKLResult:
    """n_kl for a single-mode Hermitian matrix that need not be positive.

    Raises NotDistribution when some quadrature density dips below
    ``-clip_tol``.
    """
    try:
        return n_kl_single(matrix, opts, clip_tol)
    except NotDistribution:
        raise
