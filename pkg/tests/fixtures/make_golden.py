"""Regenerate golden.json.

Oracle values are computed without the package (scipy quadrature, direct
sums). N_KL ordinates come from the package at the default resolution and are
accepted only if doubling the grid changes them by less than 1e-6.

    python3 tests/fixtures/make_golden.py
"""

import json
import math
from pathlib import Path

import numpy as np
from scipy.integrate import quad
from scipy.special import i0
from scipy.stats import poisson

STABLE_TOL = 1e-6

NKL_STATES = [
    "fock:1", "fock:2", "fock:3", "fock:4", "fock:5",
    "evencat:0.5", "evencat:1", "evencat:1.5", "evencat:2",
    "oddcat:0.5", "oddcat:1", "oddcat:1.5", "oddcat:2",
    "pac:1", "noisy1:0.25", "noisy1:0.5", "noisy1:0.75",
    "pnes:0.3", "pnes:0.8",
]


def fock1_entropy() -> float:
    p = lambda x: 2 * x * x * math.exp(-x * x) / math.sqrt(math.pi)
    f = lambda x: -p(x) * math.log(p(x)) if p(x) > 0 else 0.0
    vals = []
    for tol in (1e-10, 1e-13):
        vals.append(2 * (quad(f, 0, 1, epsabs=tol, epsrel=tol, limit=500)[0]
                         + quad(f, 1, 12, epsabs=tol, epsrel=tol, limit=500)[0]))
    assert abs(vals[0] - vals[1]) < 1e-8, vals
    return vals[1]


def oracles() -> dict:
    h1 = fock1_entropy()
    n = np.arange(400)
    pois = poisson.pmf(n, 1.0)
    thermal1 = 0.5 ** (n + 1)
    purity = float(np.sum(pois * pois))
    overlap = float(np.sum(pois * thermal1))
    shannon = float(-np.sum(pois[pois > 0] * np.log(pois[pois > 0])))
    nqr_pac = 2 * math.log(2) - shannon
    # Fock |1> against thermal nbar = 1: tr rho^2 = 1, tr rho_G^2 = 1/3, tr rho rho_G = 1/4
    tr_gg = float(np.sum(thermal1**2))
    return {
        "fock1_entropy": h1,
        "fock1_negentropy": 0.5 * math.log(3 * math.pi * math.e) - h1,
        "fock1_hs_exact": (1 + tr_gg - 2 * 0.25) / 2,
        "fock1_overlap_ratio": 0.25,
        "fock1_overlap_bound": math.sqrt(math.e / 2) * math.exp(-math.log(2)),
        "fock1_nqr": 2 * math.log(2),
        "pac1_purity": purity,
        "pac1_purity_bessel": math.exp(-2) * float(i0(2.0)),
        "pac1_overlap": overlap,
        "pac1_overlap_ratio": overlap / purity,
        "pac1_nqr": nqr_pac,
        "pac1_overlap_bound": math.sqrt(math.e / 2) * math.exp(-nqr_pac / 2),
    }


def nkl_ordinates() -> dict:
    from qng import measures, states

    out = {}
    for text in NKL_STATES:
        state = states.build(states.parse_spec(text))
        base = measures.n_kl(state, measures.OptimizerOptions()).value
        fine = measures.n_kl(state, measures.OptimizerOptions(grid_points=2 * measures.DEFAULT_POINTS)).value
        if abs(base - fine) > STABLE_TOL:
            raise RuntimeError(f"{text}: not stable under refinement ({base} vs {fine})")
        out[text] = base
        print(f"{text:14s} {base:.12f}  (2x grid: {fine:.12f})")
    return out


def main():
    data = {"oracles": oracles(), "n_kl": nkl_ordinates(), "stable_tol": STABLE_TOL}
    path = Path(__file__).with_name("golden.json")
    path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")
    print("wrote", path)


if __name__ == "__main__":
    main()
