"""How well the kurtosis-candidate shortcut recovers N_KL on random states."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import measures, states
from .measures import OptimizerOptions, SingleModeLandscape

DELTA_BIN = math.pi / 50
HIT_TOL = 1e-4


@dataclass(frozen=True)
class BenchSample:
    index: int
    nkl: float
    ratio: float
    augmented_ratio: float
    delta: float
    hit_kmax: bool
    hit_kmin: bool


@dataclass
class BenchResult:
    n_max: int
    mixed: bool
    seed: int
    samples: list = field(default_factory=list)

    @property
    def ratios(self) -> np.ndarray:
        return np.array([s.ratio for s in self.samples])

    @property
    def deltas(self) -> np.ndarray:
        return np.array([s.delta for s in self.samples])

    def summary(self) -> dict:
        r = self.ratios
        d = self.deltas
        return {
            "n_max": self.n_max,
            "mixed": self.mixed,
            "seed": self.seed,
            "samples": len(self.samples),
            "mean_ratio": float(r.mean()),
            "mean_augmented_ratio": float(np.mean([s.augmented_ratio for s in self.samples])),
            "share_ratio_above_0.95": float(np.mean(r > 0.95)),
            "share_delta_below_pi_100": float(np.mean(d < math.pi / 100)),
            "share_hit_kmax": float(np.mean([s.hit_kmax for s in self.samples])),
            "share_hit_kmin": float(np.mean([s.hit_kmin for s in self.samples])),
        }

    def delta_histogram(self) -> tuple[list[int], list[float]]:
        edges = np.arange(0.0, math.pi / 2 + DELTA_BIN / 2, DELTA_BIN)
        counts, edges = np.histogram(self.deltas, bins=edges)
        return counts.tolist(), edges.tolist()

    def ratio_histogram(self, bins: int = 20) -> tuple[list[int], list[float]]:
        counts, edges = np.histogram(np.clip(self.ratios, 0.0, 1.0), bins=bins, range=(0.0, 1.0))
        return counts.tolist(), edges.tolist()


def evaluate_matrix(matrix, index: int = 0, opts: OptimizerOptions = OptimizerOptions()) -> BenchSample:
    land = SingleModeLandscape(matrix, opts.grid_points)
    best = measures.n_kl_single(matrix, opts, landscape=land)
    est = measures.kurtosis_strategy(matrix, with_variance=True, landscape=land)
    nkl = best.value
    if nkl <= 0:
        ratio = aug = 1.0
    else:
        ratio = min(est.estimate / nkl, 1.0)
        aug = min(est.augmented_estimate / nkl, 1.0)
    phi = best.direction.phis[0]
    delta = min(measures._angle_dist(phi, est.phi_kmax), measures._angle_dist(phi, est.phi_kmin))
    return BenchSample(
        index=index,
        nkl=nkl,
        ratio=ratio,
        augmented_ratio=aug,
        delta=delta,
        hit_kmax=abs(est.j_at_kmax - nkl) <= HIT_TOL * max(nkl, 1e-12),
        hit_kmin=abs(est.j_at_kmin - nkl) <= HIT_TOL * max(nkl, 1e-12),
    )


def random_bench(n_max: int = 5, n_samples: int = 1000, seed: int = 0, mixed: bool = False,
                 opts: OptimizerOptions = OptimizerOptions()) -> BenchResult:
    """Sample random states, compare the candidate estimate against N_KL.

    State i is drawn from its own stream derived from (seed, i), so results do
    not depend on evaluation order.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be positive")
    out = BenchResult(n_max, mixed, seed)
    for i in range(n_samples):
        rng = np.random.default_rng(states.derive_seed(seed, i))
        st = states.random_mixed(n_max, rng) if mixed else states.random_pure(n_max, rng)
        out.samples.append(evaluate_matrix(st.dm(), i, opts))
    return out
