"""Nonlinearities g, radial potentials V, and sampled hypothesis audits."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import InvalidSampleSpec

NONLINEARITY_KINDS = ("builtin_asymptotic", "semilinear_diagnostic", "custom")
POTENTIAL_KINDS = ("constant", "remark13_piecewise", "custom_radial")

# below this t^2 the closed-form G loses digits to cancellation
_SERIES_CUTOFF = 0.25
_SERIES_TERMS = 40


def _log1p_tail(x: np.ndarray) -> np.ndarray:
    """ln(1+x) - x + x^2/2, accurate for small x >= 0."""
    out = np.empty_like(x)
    small = x < _SERIES_CUTOFF
    xs = x[small]
    acc = np.zeros_like(xs)
    power = xs**3
    for k in range(3, 3 + _SERIES_TERMS):
        acc += (1.0 if k % 2 else -1.0) * power / k
        power = power * xs
    out[small] = acc
    xl = x[~small]
    out[~small] = np.log1p(xl) - xl + 0.5 * xl * xl
    return out


def _as_out(x: np.ndarray, like):
    return float(x) if np.ndim(like) == 0 else x


@dataclass(frozen=True)
class Nonlinearity:
    """g with primitive G and derivative g'; l is the limit of g(t)/t^3."""

    kind: str = "builtin_asymptotic"
    l: float = 1.0
    custom_g: Callable | None = field(default=None, compare=False)
    custom_G: Callable | None = field(default=None, compare=False)
    custom_g_prime: Callable | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.kind not in NONLINEARITY_KINDS:
            raise ValueError(f"unknown nonlinearity kind {self.kind!r}")
        if not self.l > 0:
            raise ValueError("asymptote l must be positive")
        if self.kind == "custom" and None in (
            self.custom_g,
            self.custom_G,
            self.custom_g_prime,
        ):
            raise ValueError("custom nonlinearity needs g, G and g' evaluators")

    @classmethod
    def builtin(cls, l: float = 1.0) -> "Nonlinearity":
        return cls("builtin_asymptotic", l)

    @classmethod
    def semilinear(cls) -> "Nonlinearity":
        return cls("semilinear_diagnostic", 1.0)

    def g(self, t):
        x = np.asarray(t, dtype=float)
        if self.kind == "builtin_asymptotic":
            t2 = x * x
            out = self.l * x * t2 * (t2 / (1.0 + t2))
        elif self.kind == "semilinear_diagnostic":
            out = x * x * x
        else:
            out = np.asarray(self.custom_g(x), dtype=float)
        return _as_out(out, t)

    def G(self, t):
        x = np.asarray(t, dtype=float)
        if self.kind == "builtin_asymptotic":
            t2 = np.atleast_1d(x * x)
            # G = l/2 * (ln(1+t^2) - t^2 + t^4/2)
            out = (0.5 * self.l * _log1p_tail(t2)).reshape(x.shape)
        elif self.kind == "semilinear_diagnostic":
            out = 0.25 * (x * x) ** 2
        else:
            out = np.asarray(self.custom_G(x), dtype=float)
        return _as_out(out, t)

    def g_prime(self, t):
        x = np.asarray(t, dtype=float)
        if self.kind == "builtin_asymptotic":
            t2 = x * x
            out = self.l * t2 * t2 * (5.0 + 3.0 * t2) / (1.0 + t2) ** 2
        elif self.kind == "semilinear_diagnostic":
            out = 3.0 * x * x
        else:
            out = np.asarray(self.custom_g_prime(x), dtype=float)
        return _as_out(out, t)

    def describe(self) -> dict:
        return {"kind": self.kind, "l": self.l}


def _remark13(r: np.ndarray) -> np.ndarray:
    return np.where(r <= 1.0, 0.0, np.where(r <= 2.0, (r - 1.0) ** 2, 1.0))


@dataclass(frozen=True)
class Potential:
    """Radial potential r -> V(r) >= 0.

    ``zero_set`` lists the two disjoint rotationally symmetric subdomains of
    {V = 0} used to seed sign-changing functions when inf V = 0.
    """

    kind: str = "constant"
    v0: float = 1.0
    custom: Callable | None = field(default=None, compare=False)
    zero_set: tuple[tuple[float, float], tuple[float, float]] | None = None

    def __post_init__(self):
        if self.kind not in POTENTIAL_KINDS:
            raise ValueError(f"unknown potential kind {self.kind!r}")
        if self.kind == "constant" and self.v0 < 0:
            raise ValueError("constant potential must be nonnegative")
        if self.kind == "custom_radial" and self.custom is None:
            raise ValueError("custom_radial potential needs an evaluator")
        if self.kind == "remark13_piecewise" and self.zero_set is None:
            object.__setattr__(self, "zero_set", ((0.0, 0.25), (1.0 / 3.0, 0.5)))

    @classmethod
    def constant(cls, v0: float = 1.0) -> "Potential":
        return cls("constant", v0)

    @classmethod
    def remark13(cls) -> "Potential":
        return cls("remark13_piecewise")

    def __call__(self, r):
        x = np.asarray(r, dtype=float)
        if self.kind == "constant":
            out = np.full_like(x, self.v0)
        elif self.kind == "remark13_piecewise":
            out = _remark13(x)
        else:
            out = np.asarray(self.custom(x), dtype=float) * np.ones_like(x)
        return _as_out(out, r)

    def describe(self) -> dict:
        d = {"kind": self.kind}
        if self.kind == "constant":
            d["v0"] = self.v0
        if self.zero_set is not None:
            d["zero_set"] = [list(z) for z in self.zero_set]
        return d


@dataclass
class HypothesisCheck:
    name: str
    status: str  # "pass" | "fail" | "skipped" | "not checked"
    margin: float = math.nan
    detail: str = ""


@dataclass
class HypothesisReport:
    mode: str
    checks: list[HypothesisCheck]
    exponents: dict = field(default_factory=lambda: {"p": 3.0, "q": 6.0})

    @property
    def passed(self) -> bool:
        return all(c.status != "fail" for c in self.checks)

    def by_name(self) -> dict[str, HypothesisCheck]:
        return {c.name: c for c in self.checks}

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "passed": self.passed,
            "exponents": dict(self.exponents),
            "checks": [
                {"name": c.name, "status": c.status, "margin": c.margin, "detail": c.detail}
                for c in self.checks
            ],
        }


def default_samples(n: int = 2000, tmax: float = 1e3) -> np.ndarray:
    pos = np.logspace(-4, math.log10(tmax), n)
    return np.concatenate([-pos[::-1], [0.0], pos])


def _check(name, ok, margin, detail=""):
    return HypothesisCheck(name, "pass" if ok else "fail", float(margin), detail)


def validate_hypotheses(
    nl: Nonlinearity,
    pot: Potential,
    mode: str = "nonvanishing",
    samples=None,
    *,
    mu: float | None = None,
    radii=None,
    strict_margin: float = 1e-12,
) -> HypothesisReport:
    """Audit the structural hypotheses on g and V over explicit sample grids.

    This is sampled evidence, not proof. ``mu`` is max(mu_1, mu_2) from the
    eigensolver and is required for the vanishing-mode threshold check.
    """
    if mode not in ("nonvanishing", "vanishing"):
        raise ValueError(f"unknown mode {mode!r}")
    t = default_samples() if samples is None else np.asarray(samples, dtype=float)
    if t.size == 0:
        raise InvalidSampleSpec("empty sample grid")
    ts = np.sort(t)
    if not np.allclose(ts, -ts[::-1], rtol=0, atol=1e-12 * max(1.0, np.abs(ts).max())):
        raise InvalidSampleSpec("sample grid must be symmetric about 0")

    checks: list[HypothesisCheck] = []
    g = nl.g(ts)
    G = nl.G(ts)
    nz = ts != 0
    tn = ts[nz]
    ratio = g[nz] / tn**3

    # g(t) = o(t^3) at 0, probed at the smallest positive sample
    small = np.abs(tn).min()
    probe = np.array([small, small * 1e-2, small * 1e-4])
    r_small = np.abs(nl.g(probe) / probe**3)
    g1_ok = bool(nl.g(0.0) == 0.0 and r_small[-1] <= r_small[0] and r_small[-1] < 1e-3 * nl.l)
    checks.append(_check("small_t_order", g1_ok, nl.l * 1e-3 - r_small[-1]))

    # g(t)/t^3 -> l, proxy at t = 1e6
    big = 1e6
    r_big = nl.g(big) / big**3
    checks.append(
        _check("cubic_asymptote", abs(r_big - nl.l) <= 1e-6 * nl.l, 1e-6 * nl.l - abs(r_big - nl.l))
    )

    # g(t)/t^3 increasing on t > 0, decreasing on t < 0
    pos = tn > 0
    dpos = np.diff(ratio[pos])
    dneg = np.diff(ratio[~pos])
    g3_margin = min(dpos.min(initial=np.inf), -dneg.max(initial=-np.inf))
    checks.append(_check("monotone_ratio", g3_margin >= -strict_margin, g3_margin))

    # divergence proxy: g(t)t/4 - G(t) growing and large at t = 1e2, 1e3, 1e4
    tp = np.array([1e2, 1e3, 1e4])
    h4 = nl.g(tp) * tp / 4.0 - nl.G(tp)
    g4_ok = bool(np.all(np.diff(h4) > 0) and h4[-1] > 1e3)
    checks.append(_check("divergence_proxy", g4_ok, h4[-1] - 1e3, f"values={h4.tolist()}"))

    # g(t)/t^3 < l strictly
    m22 = float(np.min(nl.l - ratio))
    checks.append(_check("ratio_below_l", m22 > strict_margin, m22))

    # 0 <= 4G <= g t
    m_lo = float(np.min(4.0 * G))
    m_hi = float(np.min(g * ts - 4.0 * G))
    checks.append(
        _check("primitive_bounds", m_lo >= -strict_margin and m_hi >= -strict_margin, min(m_lo, m_hi))
    )

    # potential: nonnegative and bounded on sampled radii
    rr = np.linspace(0.0, 50.0, 5001) if radii is None else np.asarray(radii, dtype=float)
    vv = pot(rr)
    checks.append(_check("V_nonnegative", bool(np.min(vv) >= 0), float(np.min(vv))))
    checks.append(_check("V_bounded", bool(np.all(np.isfinite(vv))), float(np.max(vv))))

    if mode == "nonvanishing":
        checks.append(_check("V_inf_positive", bool(np.min(vv) > 0), float(np.min(vv))))
    else:
        if pot.kind == "remark13_piecewise":
            # {V < a} is the ball of radius 1 + sqrt(a) for a <= 1
            a = 0.5
            vol = 4.0 / 3.0 * math.pi * (1.0 + math.sqrt(a)) ** 3
            checks.append(HypothesisCheck("V_finite_measure", "pass", vol, f"a={a}"))
        else:
            checks.append(HypothesisCheck("V_finite_measure", "not checked"))
        zs = pot.zero_set
        if zs is None:
            checks.append(HypothesisCheck("V_zero_subdomains", "fail", detail="no zero set"))
        else:
            (a1, b1), (a2, b2) = sorted(zs)
            inside = np.concatenate(
                [np.linspace(a1, b1, 200), np.linspace(a2, b2, 200)]
            )
            vmax = float(np.max(np.abs(pot(inside))))
            checks.append(_check("V_zero_subdomains", vmax == 0.0 and b1 < a2, b1 - a2))
        if mu is None:
            checks.append(HypothesisCheck("l_above_mu", "skipped", detail="mu not supplied"))
        else:
            checks.append(_check("l_above_mu", nl.l > mu, nl.l - mu, f"mu={mu:.6f}"))
    return HypothesisReport(mode, checks)
