"""Ground state and k-node solutions for k = 1..K with energy ratios c_k/d.

    python3 scripts/nodal_family.py [--kmax 3] [--out runs/nodal]
"""

import argparse
from dataclasses import dataclass
from pathlib import Path

from quasinodal import (
    DualTransform,
    EnergyModel,
    Nonlinearity,
    Potential,
    build_grid,
    compare_energies,
    solve_annulus_ground,
    solve_k_node,
)
from quasinodal.cli_reporting import write_profile


@dataclass
class Config:
    N: int = 3
    R: float = 30.0
    n: int = 6000
    l: float = 1.0
    kmax: int = 3


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--kmax", type=int, default=Config.kmax)
    ap.add_argument("--out", default="runs/nodal")
    args = ap.parse_args()
    cfg = Config(kmax=args.kmax)
    out = Path(args.out)
    em = EnergyModel(DualTransform(), Nonlinearity.builtin(cfg.l), Potential.constant(1.0), build_grid(cfg.N, cfg.R, cfg.n))
    u, ground = solve_annulus_ground(em)
    write_profile(out / "k0.csv", em, u)
    reports = [ground]
    d = ground.energy
    print(f"k=0 d={d:.12g}")
    for k in range(1, cfg.kmax + 1):
        u, rep = solve_k_node(em, k)
        write_profile(out / f"k{k}.csv", em, u)
        reports.append(rep)
        radii = ", ".join(f"{r:.4f}" for r in rep.extras["node_radii_polished"])
        print(
            f"k={k} c_k={rep.energy:.12g} c_k/d={rep.energy / d:.4f} glued={rep.extras['glued_energy']:.12g} "
            f"nodes at [{radii}] inner solves={rep.extras['inner_solves']}"
        )
    cmp = compare_energies(reports)
    for p in cmp.properties:
        print(f"{p.status:5} {p.name} margin={p.margin:.3g}")


if __name__ == "__main__":
    main()
