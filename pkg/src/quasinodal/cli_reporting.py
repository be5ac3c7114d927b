"""Command line front end, configuration, run records and profile files.

Usage::

    python3 -m quasinodal check [--all | --transform | --model KIND]
    python3 -m quasinodal solve {ground,signchange,nodal,vanishing} [--k K] [--l L]
    python3 -m quasinodal sweep --R 20,30,40 --n 6000 [--fixed-density]

Exit status: 0 success, 1 numerical failure (suite failed, solver did not
converge, seed construction failed), 2 usage or configuration error.

Configuration files hold ``key = value`` lines with dotted keys, e.g.
``grid.R = 30`` or ``nonlinearity.l = 400``. Precedence, lowest first:
subcommand defaults, config file, environment, command-line flags.
Environment: QUASINODAL_THREADS (sweep workers) and QUASINODAL_OUTPUT_DIR.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import logging
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .dual_transform import DualTransform
from .energy import EnergyModel
from .errors import ConfigError, MaxItersExceeded, QuasiNodalError
from .model import Nonlinearity, Potential, validate_hypotheses
from .radial_mesh import RadialField, RadialGrid, build_grid
from .solvers import (
    SolverOptions,
    solve_annulus_ground,
    solve_k_node,
    solve_least_energy_sign_changing,
)
from .verification import (
    PropertyReport,
    count_nodes,
    run_model_suite,
    run_transform_suite,
    zero_set_eigenvalues,
)

log = logging.getLogger("quasinodal")

ENV_THREADS = "QUASINODAL_THREADS"
ENV_OUTPUT = "QUASINODAL_OUTPUT_DIR"

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def artifact_version() -> str:
    try:
        from importlib.metadata import version

        return version("artifact")
    except Exception:
        from . import __version__

        return __version__


@dataclass
class SolverConfig:
    N: int = 3
    R: float = 30.0
    n: int = 6000
    nonlinearity: str = "builtin_asymptotic"
    l: float = 1.0
    potential: str = "constant"
    v0: float = 1.0
    mode: str = "nonvanishing"
    k: int = 0
    sign: int = 1
    tol_nehari: float = 1e-10
    tol_el: float = 1e-6
    radius_tol: float | None = None  # default 1e-3 R
    max_iters: int = 5000
    random_seed: int = 0
    threads: int = 1
    output_dir: str = "runs"

    # dotted config key -> field name
    KEYS = {
        "grid.N": "N",
        "grid.R": "R",
        "grid.n": "n",
        "nonlinearity.kind": "nonlinearity",
        "nonlinearity.l": "l",
        "potential.kind": "potential",
        "potential.v0": "v0",
        "solver.mode": "mode",
        "solver.k": "k",
        "solver.sign": "sign",
        "solver.max_iters": "max_iters",
        "solver.random_seed": "random_seed",
        "tol.nehari": "tol_nehari",
        "tol.el_residual": "tol_el",
        "tol.radius": "radius_tol",
        "run.threads": "threads",
        "run.output_dir": "output_dir",
    }

    def validate(self) -> "SolverConfig":
        if self.N < 3:
            raise ConfigError("grid.N must be at least 3")
        if self.R <= 0 or self.n < 16:
            raise ConfigError("grid.R must be positive and grid.n at least 16")
        for name in ("tol_nehari", "tol_el"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")
        if self.radius_tol is not None and not self.radius_tol > 0:
            raise ConfigError("tol.radius must be positive")
        if self.nonlinearity not in ("builtin_asymptotic", "semilinear_diagnostic"):
            raise ConfigError(f"unsupported nonlinearity.kind {self.nonlinearity!r}")
        if self.potential not in ("constant", "remark13_piecewise"):
            raise ConfigError(f"unsupported potential.kind {self.potential!r}")
        if self.mode not in ("nonvanishing", "vanishing"):
            raise ConfigError(f"unknown solver.mode {self.mode!r}")
        if self.mode == "vanishing" and self.potential != "remark13_piecewise":
            raise ConfigError("vanishing mode needs a potential with declared zero-set subdomains")
        if self.sign not in (1, -1):
            raise ConfigError("solver.sign must be 1 or -1")
        if self.k < 0 or self.max_iters < 1 or self.threads < 1:
            raise ConfigError("solver.k, solver.max_iters and run.threads out of range")
        return self

    def set(self, key: str, raw: str) -> None:
        name = self.KEYS.get(key, key if key in self._fields() else None)
        if name is None:
            raise ConfigError(f"unknown config key {key!r}")
        ftype = self._fields()[name]
        try:
            if raw.strip().lower() in ("none", "") and "None" in ftype:
                val = None
            elif ftype.startswith("int"):
                val = int(raw)
            elif ftype.startswith("float"):
                val = float(raw)
            else:
                val = raw.strip()
        except ValueError as exc:
            raise ConfigError(f"bad value for {key}: {raw!r}") from exc
        setattr(self, name, val)

    @classmethod
    def _fields(cls) -> dict[str, str]:
        return {f.name: str(f.type) for f in dataclasses.fields(cls)}

    def to_dict(self) -> dict:
        out: dict[str, Any] = {}
        for key, name in self.KEYS.items():
            if name in ("threads", "output_dir"):
                continue  # execution environment, not part of the problem
            section, leaf = key.split(".")
            out.setdefault(section, {})[leaf] = getattr(self, name)
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "SolverConfig":
        cfg = cls()
        for section, items in d.items():
            for leaf, val in items.items():
                cfg.set(f"{section}.{leaf}", "None" if val is None else repr(val) if isinstance(val, float) else str(val))
        return cfg.validate()


PROFILES = {
    "ground": {},
    "signchange": {},
    "nodal": {},
    # zero-set radii 1/4, 1/3, 1/2 land on nodes when h = 1/1200
    "vanishing": {
        "mode": "vanishing",
        "potential": "remark13_piecewise",
        "l": 400.0,
        "R": 6.0,
        "n": 7199,
    },
}


def parse_config_text(text: str, cfg: SolverConfig | None = None) -> SolverConfig:
    cfg = cfg or SolverConfig()
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, _, raw = line.partition("=")
        cfg.set(key.strip(), raw.strip())
    return cfg


def load_config(path: str | None, profile: str = "ground", env=None) -> SolverConfig:
    cfg = SolverConfig()
    for name, val in PROFILES.get(profile, {}).items():
        setattr(cfg, name, val)
    if path:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        parse_config_text(text, cfg)
    env = os.environ if env is None else env
    if env.get(ENV_THREADS):
        cfg.set("run.threads", env[ENV_THREADS])
    if env.get(ENV_OUTPUT):
        cfg.output_dir = env[ENV_OUTPUT]
    return cfg


def build_problem(cfg: SolverConfig) -> tuple[EnergyModel, SolverOptions]:
    nl = (
        Nonlinearity.semilinear()
        if cfg.nonlinearity == "semilinear_diagnostic"
        else Nonlinearity.builtin(cfg.l)
    )
    pot = Potential.remark13() if cfg.potential == "remark13_piecewise" else Potential.constant(cfg.v0)
    em = EnergyModel(DualTransform(), nl, pot, build_grid(cfg.N, cfg.R, cfg.n))
    opts = SolverOptions(
        el_tol=cfg.tol_el,
        nehari_tol=cfg.tol_nehari,
        max_iters=cfg.max_iters,
        radius_tol=cfg.radius_tol,
        random_seed=cfg.random_seed,
        mode=cfg.mode,
    )
    return em, opts


@dataclass
class RunRecord:
    command: str
    config: dict
    reports: list[dict] = field(default_factory=list)
    property_reports: list[dict] = field(default_factory=list)
    convergence_table: list[dict] | None = None
    error: dict | None = None
    extras: dict = field(default_factory=dict)
    artifact_version: str = field(default_factory=artifact_version)
    wall_clock_s: float = 0.0

    def payload(self) -> dict:
        """Everything except the wall clock; identical across reruns."""
        d = dataclasses.asdict(self)
        d.pop("wall_clock_s")
        return d

    def to_json(self) -> str:
        d = self.payload()
        d["wall_clock_s"] = self.wall_clock_s
        return json.dumps(d, indent=2, sort_keys=True, default=_json_default) + "\n"

    def write(self, path: Path) -> Path:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.to_json())
        return path

    @classmethod
    def read(cls, path) -> "RunRecord":
        return cls(**json.loads(Path(path).read_text()))


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, tuple):
        return list(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def write_profile(path: Path, em: EnergyModel, field_: RadialField) -> Path:
    """CSV with header r,u,f_u and 17 significant digits, one row per node."""
    path.parent.mkdir(parents=True, exist_ok=True)
    u = field_.values
    fu = np.asarray(em.transform.forward(u))
    with open(path, "w", newline="") as fh:
        fh.write("r,u,f_u\n")
        for row in zip(em.grid.nodes, u, fu):
            fh.write(",".join(f"{x:.17g}" for x in row) + "\n")
    return path


def read_profile(path, grid: RadialGrid | None = None) -> tuple[np.ndarray, RadialField | np.ndarray, np.ndarray]:
    """Parse a profile file; returns (r, u, f_u) with u as a RadialField when a grid is given."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != ["r", "u", "f_u"]:
            raise ValueError(f"unexpected profile header {header}")
        data = np.array([[float(x) for x in row] for row in reader])
    r, u, fu = data[:, 0], data[:, 1], data[:, 2]
    return r, (RadialField(grid, u) if grid is not None else u), fu


def _error_dict(exc: Exception) -> dict:
    return {"type": type(exc).__name__, "message": str(exc)}


def _out_dir(cfg: SolverConfig, args) -> Path:
    return Path(args.out) if getattr(args, "out", None) else Path(cfg.output_dir)


def _apply_flags(cfg: SolverConfig, args) -> None:
    for flag, name in (("N", "N"), ("R", "R"), ("n", "n"), ("l", "l"), ("k", "k"), ("sign", "sign"), ("seed", "random_seed")):
        val = getattr(args, flag, None)
        if val is not None and not isinstance(val, str):
            setattr(cfg, name, val)
    for item in getattr(args, "set", None) or []:
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        key, _, raw = item.partition("=")
        cfg.set(key.strip(), raw.strip())


def cmd_check(args) -> int:
    try:
        cfg = load_config(args.config)
        _apply_flags(cfg, args)
        cfg.validate()
    except ConfigError as exc:
        log.error("config error: %s", exc)
        return EXIT_USAGE
    reports: list[PropertyReport] = []
    run_all = args.all or not (args.transform or args.model)
    if run_all or args.transform:
        reports.append(run_transform_suite(DualTransform()))
    if run_all or args.model:
        kind = args.model or cfg.nonlinearity
        nl = Nonlinearity.semilinear() if kind.startswith("semilinear") else Nonlinearity.builtin(cfg.l)
        pot = Potential.remark13() if cfg.potential == "remark13_piecewise" else Potential.constant(cfg.v0)
        reports.append(run_model_suite(nl, pot, cfg.mode))
    rec = RunRecord("check", cfg.to_dict(), property_reports=[r.to_dict() for r in reports])
    ok = all(r.passed for r in reports)
    for r in reports:
        for p in r.properties:
            log.info("%-8s %-36s margin=%.3e", p.status, f"{r.suite}:{p.name}", p.margin)
    path = rec.write(_out_dir(cfg, args) / "check.json")
    print(f"{'PASS' if ok else 'FAIL'} check -> {path}")
    return EXIT_OK if ok else EXIT_FAIL


def run_solve(cfg: SolverConfig, kind: str):
    """Run one solve; returns (RunRecord, field or None, EnergyModel, converged)."""
    em, opts = build_problem(cfg)
    rec = RunRecord(f"solve {kind}", cfg.to_dict())
    mu = None
    if cfg.mode == "vanishing":
        mu = max(zero_set_eigenvalues(em.pot, cfg.N))
        rec.extras["mu"] = mu
    rec.extras["hypotheses"] = validate_hypotheses(em.nl, em.pot, cfg.mode, mu=mu).to_dict()
    try:
        if kind == "ground":
            fld, rep = solve_annulus_ground(em, None, cfg.sign, opts)
        elif kind == "nodal":
            fld, rep = solve_k_node(em, cfg.k, cfg.sign, opts)
        else:
            fld, rep = solve_least_energy_sign_changing(em, opts)
    except MaxItersExceeded as exc:
        rec.error = _error_dict(exc)
        if exc.report is None:
            return rec, None, em, False
        fld, rep = exc.field, exc.report
    except QuasiNodalError as exc:
        rec.error = _error_dict(exc)
        return rec, None, em, False
    rec.reports.append(rep.to_dict())
    rec.extras["node_count"] = count_nodes(fld)
    return rec, fld, em, rep.converged


def cmd_solve(args) -> int:
    try:
        cfg = load_config(args.config, args.kind)
        _apply_flags(cfg, args)
        cfg.validate()
    except ConfigError as exc:
        log.error("config error: %s", exc)
        return EXIT_USAGE
    t0 = time.perf_counter()
    rec, fld, em, ok = run_solve(cfg, args.kind)
    rec.wall_clock_s = time.perf_counter() - t0
    out = _out_dir(cfg, args)
    stem = f"solve_{args.kind}" + (f"_k{cfg.k}" if args.kind == "nodal" else "")
    path = rec.write(out / f"{stem}.json")
    if fld is not None:
        write_profile(out / f"{stem}_profile.csv", em, fld)
        energy = rec.reports[0]["energy"]
        print(f"{'CONVERGED' if ok else 'NOT CONVERGED'} energy={energy:.15g} -> {path}")
    if rec.error is not None:
        print(f"FAILED {rec.error['type']}: {rec.error['message']} -> {path}")
    if fld is None:
        # never leave a profile from an earlier run next to a failed record
        (out / f"{stem}_profile.csv").unlink(missing_ok=True)
    return EXIT_OK if ok else EXIT_FAIL


def _parse_list(text: str | None, conv) -> list:
    if text is None:
        return []
    try:
        vals = [conv(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad sweep list {text!r}") from exc
    if not vals:
        raise ConfigError(f"empty sweep list {text!r}")
    return vals


def _sweep_point(args_tuple):
    cfg_dict, kind, R, n = args_tuple
    cfg = SolverConfig.from_dict(cfg_dict)
    cfg.R, cfg.n = R, n
    rec, fld, _, ok = run_solve(cfg.validate(), kind)
    row = {"R": R, "n": n, "converged": bool(ok)}
    if rec.reports:
        rep = rec.reports[0]
        row.update(energy=rep["energy"], el_residual=rep["el_residual"], node_count=rep["node_count"])
    else:
        row.update(energy=None, el_residual=None, node_count=None, error=rec.error)
    return row


def cmd_sweep(args) -> int:
    try:
        cfg = load_config(args.config, args.kind)
        _apply_flags(cfg, args)
        cfg.validate()
        Rs = _parse_list(args.R_list, float) or [cfg.R]
        ns = _parse_list(args.n_list, int) or [cfg.n]
        if len(Rs) < 2 and len(ns) < 2:
            raise ConfigError("a sweep needs at least two values on one axis")
        if not args.threshold > 0:
            raise ConfigError("--threshold must be positive")
    except ConfigError as exc:
        log.error("sweep spec error: %s", exc)
        return EXIT_USAGE
    t0 = time.perf_counter()
    points = []
    for R in Rs:
        for n in ns:
            n_eff = int(round(n * R / cfg.R)) if args.fixed_density else n
            points.append((cfg.to_dict(), args.kind, R, n_eff))
    if cfg.threads > 1:
        with ProcessPoolExecutor(max_workers=cfg.threads) as pool:
            table = list(pool.map(_sweep_point, points))
    else:
        table = [_sweep_point(p) for p in points]
    energies = [row["energy"] for row in table]
    ok = all(row["converged"] for row in table)
    if ok:
        spread = (max(energies) - min(energies)) / min(abs(e) for e in energies)
    else:
        spread = float("nan")
    rec = RunRecord("sweep", cfg.to_dict(), convergence_table=table)
    rec.extras["max_relative_spread"] = spread
    rec.extras["threshold"] = args.threshold
    if ok and len(ns) >= 3 and len(Rs) == 1:
        diffs = [b - a for a, b in zip(energies[:-1], energies[1:])]
        rec.extras["difference_ratios"] = [
            d0 / d1 if d1 != 0 else None for d0, d1 in zip(diffs[:-1], diffs[1:])
        ]
    rec.wall_clock_s = time.perf_counter() - t0
    path = rec.write(_out_dir(cfg, args) / f"sweep_{args.kind}.json")
    passed = ok and spread <= args.threshold
    for row in table:
        print(f"R={row['R']:<8g} n={row['n']:<7d} energy={row['energy']!s:<22} converged={row['converged']}")
    print(f"{'PASS' if passed else 'FAIL'} spread={spread:.3e} threshold={args.threshold:g} -> {path}")
    return EXIT_OK if passed else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value config file (dotted keys)")
    common.add_argument("--out", help="output directory (overrides config and environment)")
    common.add_argument("--set", action="append", metavar="KEY=VALUE", help="override one config key")
    common.add_argument("-v", "--verbose", action="store_true")

    def problem_flags(p):
        p.add_argument("--N", type=int)
        p.add_argument("--R", type=float)
        p.add_argument("--n", type=int)
        p.add_argument("--l", type=float)
        p.add_argument("--sign", type=int, choices=(1, -1))
        p.add_argument("--seed", type=int)

    parser = argparse.ArgumentParser(prog="quasinodal", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    pc = sub.add_parser("check", parents=[common], help="run property suites")
    pc.add_argument("--all", action="store_true")
    pc.add_argument("--transform", action="store_true")
    pc.add_argument("--model", choices=("builtin", "semilinear"))
    pc.add_argument("--l", type=float)
    pc.set_defaults(func=cmd_check)

    ps = sub.add_parser("solve", parents=[common], help="compute a solution")
    ps.add_argument("kind", choices=("ground", "signchange", "nodal", "vanishing"))
    ps.add_argument("--k", type=int)
    problem_flags(ps)
    ps.set_defaults(func=cmd_solve)

    pw = sub.add_parser("sweep", parents=[common], help="grid convergence study")
    pw.add_argument("--kind", choices=("ground", "signchange", "nodal"), default="ground")
    pw.add_argument("--k", type=int)
    pw.add_argument("--R", dest="R_list", help="comma-separated truncation radii")
    pw.add_argument("--n", dest="n_list", help="comma-separated grid sizes")
    pw.add_argument("--fixed-density", action="store_true", help="scale n with R relative to the config R")
    pw.add_argument("--threshold", type=float, default=1e-2)
    for flag in ("--N", "--l"):
        pw.add_argument(flag, type=int if flag == "--N" else float)
    pw.set_defaults(func=cmd_sweep)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
