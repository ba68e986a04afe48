"""Classical information functionals of quadrature distributions (all in nats)."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from .errors import NormalizationError, SampleSizeError, ShapeError, SupportError
from .quadrature import QuadratureDistribution, QuadratureGrid

log = logging.getLogger(__name__)

FLOOR = 1e-300
NORM_TOL = 1e-9


def _plogp(p: np.ndarray) -> np.ndarray:
    out = np.zeros_like(p)
    live = p > FLOOR
    out[live] = p[live] * np.log(p[live])
    return out


def _check_normalized(dist: QuadratureDistribution):
    if abs(dist.mass - 1.0) > NORM_TOL:
        raise NormalizationError(f"distribution integrates to {dist.mass:.12f}")


def differential_entropy(dist: QuadratureDistribution) -> float:
    """-int p ln p by composite Simpson, with 0 ln 0 = 0."""
    _check_normalized(dist)
    return float(-(dist.grid.weights @ _plogp(dist.density)))


def entropy_with_error(dist: QuadratureDistribution) -> tuple[float, float]:
    """Entropy and the change against the half-resolution grid."""
    h = differential_entropy(dist)
    coarse = dist.grid.coarsened()
    p = dist.density[::2]
    h2 = float(-(coarse.weights @ _plogp(p)))
    return h, abs(h - h2)


def gaussian_entropy(variance: float) -> float:
    return 0.5 * float(np.log(2.0 * np.pi * np.e * variance))


def gaussian_density(x, mean: float, variance: float) -> np.ndarray:
    return np.exp(-((x - mean) ** 2) / (2.0 * variance)) / np.sqrt(2.0 * np.pi * variance)


def negentropy_raw(dist: QuadratureDistribution) -> float:
    return gaussian_entropy(dist.variance) - differential_entropy(dist)


def negentropy(dist: QuadratureDistribution) -> float:
    """H(Gaussian with matched variance) - H(X), clipped at 0."""
    if not dist.variance > 0:
        raise ShapeError("negentropy needs positive variance")
    raw = negentropy_raw(dist)
    if raw < 0:
        if raw < -1e-7:
            log.warning("negentropy %.3e below tolerance", raw)
        else:
            log.debug("clipped negentropy %.3e", raw)
        return 0.0
    return raw


def kl_divergence(p: QuadratureDistribution, q: QuadratureDistribution, support_tol: float = 1e-12) -> float:
    """int p ln(p / q) on a shared grid."""
    if p.grid != q.grid:
        raise ShapeError("kl_divergence needs a shared grid")
    pd, qd = p.density, q.density
    live = pd > FLOOR
    bad = live & (qd <= FLOOR)
    if np.any(bad) and float(p.grid.weights[bad] @ pd[bad]) > support_tol:
        raise SupportError("q vanishes where p carries mass")
    live &= qd > FLOOR
    integrand = np.zeros_like(pd)
    integrand[live] = pd[live] * (np.log(pd[live]) - np.log(qd[live]))
    return float(p.grid.weights @ integrand)


def matched_gaussian(dist: QuadratureDistribution) -> QuadratureDistribution:
    """The moment-matched Gaussian evaluated analytically on the same grid."""
    return QuadratureDistribution(dist.grid, gaussian_density(dist.x, dist.mean, dist.variance))


# ------------------------------------------------------------------ binning


@dataclass(frozen=True, eq=False)
class BinnedDistribution:
    """Bin masses for bins [origin + n w, origin + (n + 1) w), n = first, first + 1, ...

    A centred lattice (bins around n w) is ``origin = -w / 2``. Refining by any
    integer factor with the same origin nests the bins exactly.
    """

    width: float
    origin: float
    first: int
    masses: np.ndarray

    def __post_init__(self):
        if self.width <= 0:
            raise ShapeError("bin width must be positive")
        m = np.asarray(self.masses, dtype=float)
        if np.any(m < 0):
            raise ShapeError("negative bin mass")
        if abs(m.sum() - 1.0) > 1e-10:
            raise ShapeError(f"bin masses sum to {m.sum():.12f}")
        object.__setattr__(self, "masses", m)

    @property
    def edges(self) -> np.ndarray:
        n = np.arange(self.first, self.first + len(self.masses) + 1)
        return self.origin + n * self.width

    def same_binning(self, other: "BinnedDistribution") -> bool:
        return (
            np.isclose(self.width, other.width, rtol=1e-12, atol=0)
            and np.isclose(self.origin, other.origin, rtol=0, atol=1e-12)
            and self.first == other.first
            and self.masses.shape == other.masses.shape
        )

    def merge(self, factor: int) -> "BinnedDistribution":
        """Coarsen by an integer factor."""
        if factor < 1 or int(factor) != factor:
            raise ShapeError("merge factor must be a positive integer")
        idx = np.arange(self.first, self.first + len(self.masses))
        coarse = np.floor_divide(idx, factor)
        lo = int(coarse.min())
        out = np.zeros(int(coarse.max()) - lo + 1)
        np.add.at(out, coarse - lo, self.masses)
        return BinnedDistribution(self.width * factor, self.origin, lo, out)


def _cdf_on_grid(dist: QuadratureDistribution) -> tuple[np.ndarray, np.ndarray]:
    """Cumulative mass at every node; four-point (cubic-exact) interval rule."""
    x, p, dx = dist.x, dist.density, dist.grid.dx
    inc = 0.5 * dx * (p[:-1] + p[1:])
    corr = np.zeros_like(inc)
    corr[1:-1] = (p[:-3] - p[1:-2] - p[2:-1] + p[3:]) * dx / 24.0
    inc = inc - corr
    return x, np.concatenate([[0.0], np.cumsum(inc)])


def _lattice(lo: float, hi: float, width: float, origin: float):
    first = int(np.floor((lo - origin) / width))
    last = int(np.ceil((hi - origin) / width))
    return first, origin + np.arange(first, last + 1) * width


def bin(dist: QuadratureDistribution, width: float, origin: float | None = None) -> BinnedDistribution:
    """Integrate the density over bins of the given width.

    ``origin`` defaults to ``-width / 2`` (bins centred on multiples of the
    width). Edges between grid nodes use cubic interpolation of the cumulative
    mass. The captured mass is renormalized and the deficit logged.
    """
    if width <= 0:
        raise ShapeError("bin width must be positive")
    from scipy.interpolate import CubicSpline

    origin = -0.5 * width if origin is None else origin
    x, cdf = _cdf_on_grid(dist)
    first, edges = _lattice(x[0], x[-1], width, origin)
    inside = np.clip(edges, x[0], x[-1])
    c = CubicSpline(x, cdf)(inside)
    masses = np.clip(np.diff(c), 0.0, None)
    total = masses.sum()
    if abs(total - 1.0) > 1e-12:
        log.debug("binning captured mass %.15f; renormalized", total)
    return BinnedDistribution(width, origin, first, masses / total)


def bin_exact(cdf, lo: float, hi: float, width: float, origin: float | None = None) -> BinnedDistribution:
    """Bins from an analytic CDF over [lo, hi]."""
    origin = -0.5 * width if origin is None else origin
    first, edges = _lattice(lo, hi, width, origin)
    masses = np.clip(np.diff(cdf(edges)), 0.0, None)
    return BinnedDistribution(width, origin, first, masses / masses.sum())


def gaussian_bins(mean: float, variance: float, lo: float, hi: float, width: float,
                  origin: float | None = None) -> BinnedDistribution:
    sd = np.sqrt(variance)
    return bin_exact(lambda e: ndtr((e - mean) / sd), lo, hi, width, origin)


def binned_kl(p: BinnedDistribution, q: BinnedDistribution) -> float:
    """sum p_n ln(p_n / q_n); +inf when q vanishes on p's support."""
    if not p.same_binning(q):
        raise ShapeError("binned_kl needs identical binning")
    pm, qm = p.masses, q.masses
    live = pm > 0
    if np.any(qm[live] <= 0):
        return float("inf")
    return float(np.sum(pm[live] * np.log(pm[live] / qm[live])))


# --------------------------------------------------------- sample estimates


@dataclass(frozen=True)
class SampleNegentropy:
    value: float
    half_width: float
    bias_correction: float
    samples: int
    bins: int


def sample_negentropy(samples, bins: int = 200, bootstrap: int = 50, seed: int = 0) -> SampleNegentropy:
    """Histogram plug-in negentropy of homodyne samples.

    Adds the Miller-Madow correction (occupied bins - 1) / 2n to the entropy and
    reports a 95% bootstrap half-width.
    """
    x = np.asarray(samples, dtype=float)
    n = x.size
    if n < 1000:
        raise SampleSizeError(f"need at least 1000 samples, got {n}")

    def estimate(v):
        counts, edges = np.histogram(v, bins=bins)
        w = edges[1] - edges[0]
        p = counts[counts > 0] / v.size
        h = -np.sum(p * np.log(p / w))
        mm = (np.count_nonzero(counts) - 1) / (2.0 * v.size)
        return gaussian_entropy(np.var(v)) - (h + mm), mm

    value, mm = estimate(x)
    rng = np.random.default_rng(seed)
    boots = [estimate(rng.choice(x, size=n, replace=True))[0] for _ in range(bootstrap)]
    half = 1.96 * float(np.std(boots, ddof=1))
    return SampleNegentropy(float(value), half, float(mm), n, bins)


def inverse_cdf_samples(dist: QuadratureDistribution, n: int, seed: int = 0) -> np.ndarray:
    """Draw samples from a gridded density by inverting its cumulative mass."""
    x, cdf = _cdf_on_grid(dist)
    cdf = cdf / cdf[-1]
    u = np.random.default_rng(seed).uniform(size=n)
    keep = np.concatenate([[True], np.diff(cdf) > 0])
    return np.interp(u, cdf[keep], x[keep])


def convolve_scaled(xd: QuadratureDistribution, yd: QuadratureDistribution, eta: float) -> QuadratureDistribution:
    """Density of sqrt(eta) X + sqrt(1 - eta) Y for independent X, Y on a common grid.

    Both inputs must share the grid spacing; the result lives on X's grid.
    """
    from scipy.signal import fftconvolve

    gx = xd.grid
    a, b = np.sqrt(eta), np.sqrt(1.0 - eta)
    x = gx.x
    # densities of the scaled variables on the same node spacing
    sx = np.interp(x / a, xd.x, xd.density, left=0.0, right=0.0) / a
    sy = np.interp(x / b, yd.x, yd.density, left=0.0, right=0.0) / b
    conv = fftconvolve(sx, sy)
    # node i + j sits at x[0] + x[0] + (i + j) dx; recentre onto x
    start = int(round((x[0] - 2 * x[0]) / gx.dx))
    out = np.clip(conv[start: start + len(x)] * gx.dx, 0, None)
    # linear interpolation leaves a mass error of order dx^2
    out /= gx.weights @ out
    return QuadratureDistribution(QuadratureGrid(gx.center, gx.half_width, gx.points), out)
