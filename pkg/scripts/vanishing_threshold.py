"""Sign-changing solutions with the vanishing potential across the asymptote l.

Below the larger zero-set eigenvalue (36 pi^2) seed construction must fail.

    python3 scripts/vanishing_threshold.py
"""

import argparse
from dataclasses import dataclass

from quasinodal import (
    DualTransform,
    EnergyModel,
    Nonlinearity,
    Potential,
    SolverOptions,
    build_grid,
    solve_least_energy_sign_changing,
)
from quasinodal.errors import SeedConstructionFailed
from quasinodal.verification import zero_set_eigenvalues


@dataclass
class Config:
    R: float = 6.0
    n: int = 7199
    l_values: tuple = (100.0, 300.0, 350.0, 360.0, 400.0, 800.0)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.parse_args()
    cfg = Config()
    pot = Potential.remark13()
    print("zero-set eigenvalues:", [f"{m:.6f}" for m in zero_set_eigenvalues(pot)])
    for l in cfg.l_values:
        em = EnergyModel(DualTransform(), Nonlinearity.builtin(l), pot, build_grid(3, cfg.R, cfg.n))
        try:
            w, rep = solve_least_energy_sign_changing(em, SolverOptions(mode="vanishing"))
            node = rep.partition.radii[0]
            print(f"l={l:6g} c={rep.energy:.10g} node at {node:.4f} EL={rep.el_residual:.1e} path={rep.extras['selected_path']}")
        except SeedConstructionFailed as exc:
            print(f"l={l:6g} SeedConstructionFailed: {exc}")


if __name__ == "__main__":
    main()
