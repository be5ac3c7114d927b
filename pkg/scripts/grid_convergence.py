"""Ground-state energy under grid refinement and truncation-radius changes.

    python3 scripts/grid_convergence.py [--out runs/convergence.csv]
"""

import argparse
import csv
from dataclasses import dataclass
from pathlib import Path

from quasinodal import DualTransform, EnergyModel, Nonlinearity, Potential, build_grid, solve_annulus_ground


@dataclass
class Config:
    N: int = 3
    l: float = 1.0
    R_values: tuple = (20.0, 30.0, 40.0)
    n_values: tuple = (3000, 6000, 12000, 24000)
    R_ref: float = 30.0
    n_ref: int = 6000


def ground_energy(cfg: Config, R: float, n: int):
    em = EnergyModel(DualTransform(), Nonlinearity.builtin(cfg.l), Potential.constant(1.0), build_grid(cfg.N, R, n))
    _, rep = solve_annulus_ground(em)
    return rep.energy, rep.el_residual


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="runs/convergence.csv")
    args = ap.parse_args()
    cfg = Config()
    rows = []
    for n in cfg.n_values:
        rows.append(("n", cfg.R_ref, n, *ground_energy(cfg, cfg.R_ref, n)))
    for R in cfg.R_values:
        n = round(cfg.n_ref * R / cfg.R_ref)
        rows.append(("R", R, n, *ground_energy(cfg, R, n)))
    n_rows = [r for r in rows if r[0] == "n"]
    diffs = [b[3] - a[3] for a, b in zip(n_rows[:-1], n_rows[1:])]
    print(f"{'axis':4} {'R':>6} {'n':>6} {'energy':>22} {'EL':>9}")
    for axis, R, n, e, el in rows:
        print(f"{axis:4} {R:6g} {n:6d} {e:22.15g} {el:9.1e}")
    print("difference ratios under n-doubling:", [round(a / b, 3) for a, b in zip(diffs[:-1], diffs[1:])])
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["axis", "R", "n", "energy", "el_residual"])
        w.writerows([(a, R, n, f"{e:.17g}", f"{el:.3e}") for a, R, n, e, el in rows])


if __name__ == "__main__":
    main()
