"""Property suites over the transform, the model, node counts and energy orderings.

Every suite returns a PropertyReport: one entry per property with a status,
the worst observed margin (negative means violated) and the number of
samples it was evaluated on. Margins of pointwise inequalities are relative
to the size of the compared quantities so that a single tolerance works
across the whole sample range.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from .dual_transform import DualTransform, f_inverse_closed_form
from .errors import MissingBaseline, ZeroField
from .model import Nonlinearity, Potential, validate_hypotheses
from .radial_mesh import RadialField, build_grid, dirichlet_eig_first
from .reports import SolveReport

STRICT_MARGIN = 1e-12
NODE_THRESHOLD = 1e-8


@dataclass
class PropertyResult:
    name: str
    status: str  # "pass" | "fail" | "skipped"
    margin: float = math.nan
    samples: int = 0
    detail: str = ""


@dataclass
class PropertyReport:
    suite: str
    properties: list[PropertyResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(p.status != "fail" for p in self.properties)

    def by_name(self) -> dict[str, PropertyResult]:
        return {p.name: p for p in self.properties}

    def add(self, name, ok, margin, samples, detail=""):
        self.properties.append(
            PropertyResult(name, "pass" if ok else "fail", float(margin), int(samples), detail)
        )

    def skip(self, name, detail=""):
        self.properties.append(PropertyResult(name, "skipped", math.nan, 0, detail))

    def to_dict(self) -> dict:
        return {
            "suite": self.suite,
            "passed": self.passed,
            "properties": [
                {
                    "name": p.name,
                    "status": p.status,
                    "margin": p.margin,
                    "samples": p.samples,
                    "detail": p.detail,
                }
                for p in self.properties
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PropertyReport":
        return cls(d["suite"], [PropertyResult(**p) for p in d["properties"]])


def transform_samples(per_sign: int = 10_000, lo: float = 1e-8, hi: float = 1e8) -> np.ndarray:
    pos = np.logspace(math.log10(lo), math.log10(hi), per_sign)
    return np.concatenate([-pos[::-1], [0.0], pos])


def _rel(diff, scale):
    scale = np.asarray(scale, dtype=float)
    return np.asarray(diff, dtype=float) / np.where(scale > 0, scale, 1.0)


def run_transform_suite(
    trans=None,
    samples=None,
    *,
    roundtrip_tol: float = 1e-10,
    strict_margin: float = STRICT_MARGIN,
) -> PropertyReport:
    """Pointwise and limiting properties of the dual transform.

    ``trans`` needs ``forward`` and ``prime`` (derivative as a function of t).
    With an empty ``samples`` override every property is skipped.
    """
    trans = trans or DualTransform()
    rep = PropertyReport("transform")
    t = transform_samples() if samples is None else np.asarray(samples, dtype=float)
    names = [
        "derivative_bound",
        "growth_bounds",
        "small_t_limit",
        "large_t_limit",
        "sandwich",
        "monotone_ratios",
        "lower_bounds_witness",
        "product_bound",
        "derivative_limit",
        "oddness",
        "roundtrip",
    ]
    if t.size == 0:
        for nm in names:
            rep.skip(nm, "empty sample set")
        return rep

    f = np.asarray(trans.forward(t), dtype=float)
    fp = np.asarray(trans.prime(t), dtype=float)
    a, af = np.abs(t), np.abs(f)
    n = t.size

    # 0 < f' <= 1
    m2 = min(float(np.min(1.0 - fp)), float(np.min(fp)))
    rep.add(names[0], m2 >= -strict_margin and np.all(fp > 0), m2, n)

    # |f| <= |t| and |f| <= 2^(1/4) sqrt|t|
    m3a = _rel(a - af, a)
    m3b = _rel(2.0**0.25 * np.sqrt(a) - af, 2.0**0.25 * np.sqrt(a))
    m3 = float(min(m3a.min(), m3b.min()))
    rep.add(names[1], m3 >= -strict_margin, m3, n)

    # f(t)/t -> 1, probed at t = 1e-8
    small = 1e-8
    e4 = abs(float(trans.forward(small)) / small - 1.0)
    rep.add(names[2], e4 <= 1e-6, 1e-6 - e4, 1, f"|f(t)/t - 1| = {e4:.3e} at t=1e-8")

    # |f(t)|/sqrt|t| -> 2^(1/4), probed at |t| = 1e8
    big = 1e8
    e5 = max(abs(abs(float(trans.forward(s * big))) / math.sqrt(big) - 2.0**0.25) for s in (1, -1))
    rep.add(names[3], e5 <= 1e-3, 1e-3 - e5, 2, f"error {e5:.3e} at |t|=1e8")

    # f^2/2 <= t f' f <= f^2
    tff = t * fp * f
    f2 = f * f
    m6 = float(min(_rel(tff - 0.5 * f2, f2).min(), _rel(f2 - tff, f2).min()))
    rep.add(names[4], m6 >= -strict_margin, m6, n)

    # on sorted t > 0: f f'/t decreasing, f^3 f'/t increasing
    pos = t > 0
    tp = np.sort(t[pos])
    if tp.size >= 2:
        fpos = np.asarray(trans.forward(tp), dtype=float)
        fppos = np.asarray(trans.prime(tp), dtype=float)
        dec = fpos * fppos / tp
        inc = fpos**3 * fppos / tp
        m7 = float(
            min(
                _rel(dec[:-1] - dec[1:], dec[:-1]).min(),
                _rel(inc[1:] - inc[:-1], inc[1:]).min(),
            )
        )
        rep.add(names[5], m7 >= -strict_margin, m7, tp.size - 1)
    else:
        rep.skip(names[5], "fewer than two positive samples")

    # |f| >= C|t| for |t| <= 1 and |f| >= C sqrt|t| beyond, witness C = f(1)
    C = float(trans.forward(1.0))
    bound = np.where(a <= 1.0, C * a, C * np.sqrt(a))
    m8 = float(_rel(af - bound, bound).min())
    rep.add(names[6], m8 >= -strict_margin, m8, n, f"C = f(1) = {C:.15g}")

    # |f f'| <= 1/sqrt(2)
    m9 = float(np.min(1.0 / math.sqrt(2.0) - np.abs(f * fp)))
    rep.add(names[7], m9 >= -strict_margin, m9, n)

    # f'(t) sqrt|t| -> 2^(-3/4), probed at |t| = 1e8
    e10 = max(abs(float(trans.prime(s * big)) * math.sqrt(big) - 2.0**-0.75) for s in (1, -1))
    rep.add(names[8], e10 <= 1e-3, 1e-3 - e10, 2, f"error {e10:.3e} at |t|=1e8")

    fneg = np.asarray(trans.forward(-t), dtype=float)
    odd_err = float(np.max(np.abs(fneg + f)))
    rep.add(names[9], odd_err == 0.0, -odd_err, n)

    back = np.asarray(f_inverse_closed_form(f), dtype=float)
    rt = _rel(roundtrip_tol * np.maximum(1.0, a) - np.abs(back - t), np.maximum(1.0, a))
    m_rt = float(rt.min())
    rep.add(names[10], m_rt >= 0.0, m_rt, n, f"tolerance {roundtrip_tol:g} max(1,|t|)")
    return rep


def zero_set_eigenvalues(pot: Potential, dim: int = 3, cells_per_twelfth: int = 1024) -> list[float]:
    """First Dirichlet eigenvalues of the declared zero-set subdomains.

    The grid spacing 1/(12 m) places the radii 1/4, 1/3 and 1/2 of the
    default zero set exactly on nodes.
    """
    if pot.zero_set is None:
        raise ValueError("potential declares no zero set")
    outer = max(b for _, b in pot.zero_set)
    h = 1.0 / (12 * cells_per_twelfth)
    n = int(round(outer / h)) - 1
    grid = build_grid(dim, (n + 1) * h, n)
    return [dirichlet_eig_first(grid, tuple(dom))[0] for dom in sorted(pot.zero_set)]


def _primitive_check(nl: Nonlinearity, rep: PropertyReport, tmax: float = 1e3, count: int = 41):
    """Closed-form G against adaptive quadrature of g from 0."""
    pos = np.logspace(-2, math.log10(tmax), count)
    ts = np.concatenate([-pos[::-1], pos])
    worst = 0.0
    for t in ts:
        ref, _ = quad(lambda s: float(nl.g(s)), 0.0, float(t), epsabs=0.0, epsrel=1e-13, limit=200)
        got = float(nl.G(float(t)))
        err = abs(got - ref) / max(abs(ref), 1e-300)
        worst = max(worst, err)
    rep.add("G_matches_quadrature", worst <= 1e-10, 1e-10 - worst, ts.size, f"max rel error {worst:.3e}")


def run_model_suite(
    nl: Nonlinearity,
    pot: Potential,
    mode: str = "nonvanishing",
    samples=None,
    *,
    mu: float | None = None,
    strict_margin: float = STRICT_MARGIN,
) -> PropertyReport:
    """Hypothesis audit plus strict-inequality margins and the primitive check.

    In vanishing mode ``mu`` defaults to the larger zero-set eigenvalue.
    """
    if mode == "vanishing" and mu is None and pot.zero_set is not None:
        mu = max(zero_set_eigenvalues(pot))
    hrep = validate_hypotheses(nl, pot, mode, samples, mu=mu, strict_margin=strict_margin)
    rep = PropertyReport(f"model[{nl.kind}, l={nl.l:g}, {pot.kind}, {mode}]")
    n = len(samples) if samples is not None else 0
    for c in hrep.checks:
        status = "skipped" if c.status in ("skipped", "not checked") else c.status
        rep.properties.append(PropertyResult(c.name, status, c.margin, n, c.detail))

    if nl.kind == "builtin_asymptotic":
        # l - g(t)/t^3 = l/(1+t^2) in closed form
        t = np.logspace(-4, 3, 2000)
        got = nl.l - np.asarray(nl.g(t)) / t**3
        want = nl.l / (1.0 + t * t)
        err = float(np.max(np.abs(got - want) / nl.l))
        rep.add(
            "ratio_margin_closed_form",
            err <= 1e-12,
            1e-12 - err,
            t.size,
            f"min margin {float(want.min()):.3e}",
        )
    else:
        rep.skip("ratio_margin_closed_form", "closed form only for the builtin family")
    _primitive_check(nl, rep)
    return rep


def count_nodes(field_) -> int:
    """Sign changes of the profile after zeroing entries below 1e-8 max|u|."""
    v = field_.values if isinstance(field_, RadialField) else np.asarray(field_, dtype=float)
    peak = float(np.max(np.abs(v))) if v.size else 0.0
    if peak == 0.0:
        raise ZeroField("cannot count nodes of the zero field")
    s = np.sign(v[np.abs(v) >= NODE_THRESHOLD * peak])
    return int(np.count_nonzero(s[1:] != s[:-1]))


def _k_of(rep: SolveReport) -> int | None:
    if rep.kind in ("ground", "annulus_ground"):
        ann = rep.extras.get("annulus")
        if ann is None or (ann[0] == 0.0 and math.isclose(ann[1], rep.grid_meta.get("R", ann[1]))):
            return 0
        return None
    if rep.kind == "k_node":
        return int(rep.extras.get("k", rep.node_count))
    return None


def compare_energies(reports: list[SolveReport], tol: float = 1e-2) -> PropertyReport:
    """Energy orderings c_k >= (k+1) d, c >= 2 d and c_k strictly increasing in k."""
    base = [r for r in reports if _k_of(r) == 0]
    if not base:
        raise MissingBaseline("need a ground-state (k = 0) report to define d")
    d = min(r.energy for r in base)
    rep = PropertyReport("energy_ordering")
    by_sign: dict[int, list[tuple[int, float]]] = {}
    for r in reports:
        k = _k_of(r)
        if r.kind == "sign_changing":
            m = r.energy - 2.0 * d * (1.0 - tol)
            rep.add("c_at_least_2d", m >= 0, m / d, 1, f"c={r.energy:.12g}, d={d:.12g}")
        elif k is not None and k >= 1:
            m = r.energy - (k + 1) * d * (1.0 - tol)
            rep.add(f"c{k}_sign{r.sign:+d}_at_least_{k + 1}d", m >= 0, m / d, 1, f"c_k={r.energy:.12g}")
            by_sign.setdefault(r.sign, []).append((k, r.energy))
    for sign, pairs in sorted(by_sign.items()):
        pairs = sorted([(0, d)] + pairs)
        gaps = [b[1] - a[1] for a, b in zip(pairs[:-1], pairs[1:])]
        ok = all(g > 0 for g in gaps)
        rep.add(f"c_k_increasing_sign{sign:+d}", ok, min(gaps) / d, len(gaps))
    return rep
