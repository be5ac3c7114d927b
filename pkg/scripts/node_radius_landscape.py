"""Scan of the one-node objective rho -> d(0, rho) + d(rho, R).

Radii where the inner ball is too small to carry a Nehari point are
reported as infeasible.

    python3 scripts/node_radius_landscape.py [--out runs/landscape.csv]
"""

import argparse
import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from quasinodal import DualTransform, EnergyModel, Nonlinearity, Potential, build_grid, solve_annulus_ground
from quasinodal.errors import NotProjectable


@dataclass
class Config:
    R: float = 30.0
    n: int = 6000
    rho_min: float = 3.0
    rho_max: float = 6.0
    points: int = 31


def annulus_energy(em, a, b, sign):
    try:
        return solve_annulus_ground(em, (a, b), sign)[1].energy
    except NotProjectable:
        return float("inf")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="runs/landscape.csv")
    args = ap.parse_args()
    cfg = Config()
    em = EnergyModel(DualTransform(), Nonlinearity.builtin(1.0), Potential.constant(1.0), build_grid(3, cfg.R, cfg.n))
    rows = []
    for rho in np.linspace(cfg.rho_min, cfg.rho_max, cfg.points):
        rho = em.grid.snap(rho)
        inner, outer = annulus_energy(em, 0.0, rho, 1), annulus_energy(em, rho, cfg.R, -1)
        rows.append((rho, inner, outer, inner + outer))
        print(f"rho={rho:8.4f} inner={inner:14.6f} outer={outer:14.6f} total={inner + outer:14.6f}")
    best = min(rows, key=lambda r: r[3])
    print(f"minimum near rho={best[0]:.4f} with total {best[3]:.10g}")
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["rho", "inner", "outer", "total"])
        w.writerows(rows)


if __name__ == "__main__":
    main()
