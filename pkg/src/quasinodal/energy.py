"""The transformed energy, its discrete gradient, and Nehari projections.

For a radial field v the energy is

    I(v) = 1/2 grad_sq(v) + int [ V f(v)^2 / 2 - G(f(v)) ],

and its gradient with respect to the weighted L2 inner product
<a, b> = sum_i a_i b_i w_i is

    (K v)_i / w_i + V_i f(v_i) f'(v_i) - g(f(v_i)) f'(v_i),

the three-point discretization of -Delta v + V f f' - g(f) f'. The same
array therefore serves as the Euler-Lagrange residual and as the descent
direction.

Everything can be restricted to an annulus whose radii sit on grid nodes;
the restricted stiffness matrix is the principal submatrix of K.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .dual_transform import DualTransform, IdentityTransform
from .errors import GridMismatch, MissingSign, NotProjectable, ZeroField
from .model import Nonlinearity, Potential
from .radial_mesh import RadialField, RadialGrid, solve_tridiagonal

S_MAX = 1e8
NEHARI_TOL = 1e-10


@dataclass(eq=False)
class Subdomain:
    """Energy pieces restricted to the grid nodes strictly inside (rho, sigma)."""

    model: "EnergyModel"
    sl: slice
    rho: float
    sigma: float
    w: np.ndarray = field(init=False, repr=False)
    V: np.ndarray = field(init=False, repr=False)
    edges: np.ndarray = field(init=False, repr=False)
    diag: np.ndarray = field(init=False, repr=False)
    off: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        grid = self.model.grid
        lo, hi = self.sl.start, self.sl.stop
        self.w = grid.quad_weights[lo:hi]
        self.V = self.model.V_nodes[lo:hi]
        # the left edge only exists when rho > 0 (mirror condition at r = 0)
        self._inner = lo > 0
        self.edges = grid.edge_coef[lo - 1 if self._inner else lo : hi]
        self.diag, self.off = grid.stiffness_bands(self.sl)

    @property
    def size(self) -> int:
        return self.sl.stop - self.sl.start

    def grad_sq(self, v: np.ndarray) -> float:
        padded = np.concatenate(([0.0], v, [0.0]) if self._inner else (v, [0.0]))
        d = np.diff(padded)
        return float(np.dot(self.edges, d * d))

    def K(self, v: np.ndarray) -> np.ndarray:
        out = self.diag * v
        out[:-1] += self.off * v[1:]
        out[1:] += self.off * v[:-1]
        return out

    def l2_sq(self, v: np.ndarray) -> float:
        return float(np.dot(self.w, v * v))

    def energy(self, v: np.ndarray) -> float:
        nl = self.model.nl
        fv = self.model.transform.forward(v)
        pot = np.dot(self.w, 0.5 * self.V * fv * fv - nl.G(fv))
        return 0.5 * self.grad_sq(v) + float(pot)

    def energy_terms(self, v: np.ndarray) -> dict:
        nl = self.model.nl
        fv = self.model.transform.forward(v)
        return {
            "kinetic": 0.5 * self.grad_sq(v),
            "potential": 0.5 * float(np.dot(self.w, self.V * fv * fv)),
            "nonlinear": float(np.dot(self.w, nl.G(fv))),
        }

    def local_force(self, v: np.ndarray) -> np.ndarray:
        """Pointwise part V f f' - g(f) f' of the gradient."""
        fv = self.model.transform.forward(v)
        fp = self.model.transform.prime_from_value(fv)
        return (self.V * fv - self.model.nl.g(fv)) * fp

    def gradient(self, v: np.ndarray) -> np.ndarray:
        return self.K(v) / self.w + self.local_force(v)

    def weighted_norm(self, r: np.ndarray) -> float:
        return math.sqrt(float(np.dot(self.w, r * r)))

    def local_stiffness(self, v: np.ndarray) -> np.ndarray:
        """Derivative of the pointwise force with respect to v."""
        tr, nl = self.model.transform, self.model.nl
        fv = tr.forward(v)
        fp = tr.prime_from_value(fv)
        fpp = tr.second_from_value(fv)
        return self.V * (fp * fp + fv * fpp) - nl.g_prime(fv) * fp * fp - nl.g(fv) * fpp

    def newton_step(self, v: np.ndarray) -> np.ndarray:
        rhs = -(self.K(v) + self.w * self.local_force(v))
        return solve_tridiagonal(self.diag + self.w * self.local_stiffness(v), self.off, rhs)

    def precondition(self, r: np.ndarray, kappa: float) -> np.ndarray:
        """H1-type Riesz map: solve (K + kappa W) p = W r."""
        return solve_tridiagonal(self.diag + kappa * self.w, self.off, self.w * r)

    # -- Nehari structure -------------------------------------------------

    def psi(self, u: np.ndarray, s: float) -> float:
        """<I'(s u), s u>."""
        return s * s * self.psi_over_s2(u, s)

    def psi_over_s2(self, u: np.ndarray, s: float) -> float:
        su = s * u
        # (V f f' - g(f) f')(su) * su / s^2 = (...) * u / s
        return self.grad_sq(u) + float(np.dot(self.w, self.local_force(su) * u)) / s

    def nehari_scale(self, u: np.ndarray, s_max: float = S_MAX, coupling: float = 0.0) -> float:
        """Unique s > 0 with psi(s) + s*coupling = 0.

        Bracket expansion (doubling up to s_max) followed by Brent's method.
        ``coupling`` carries the stiffness cross term with the opposite signed
        part; it is zero when a zero node separates the two parts.
        """
        if not np.any(u):
            raise ZeroField("cannot project the zero field")
        phi = lambda s: self.psi_over_s2(u, s) + coupling / s
        s = 1.0
        val = phi(s)
        if val > 0:
            while val > 0:
                if s >= s_max:
                    raise NotProjectable(
                        f"psi stays positive up to s_max={s_max:g}; the field lies "
                        "outside the projectable set"
                    )
                s = min(2.0 * s, s_max)
                val = phi(s)
            lo, hi = s / 2.0, s
            if s == s_max:
                lo = s_max / 2.0
        else:
            while val <= 0:
                s *= 0.5
                if s < 1e-300:
                    raise NotProjectable("psi nonpositive for all sampled s")
                val = phi(s)
            lo, hi = s, 2.0 * s
        return brentq(phi, lo, hi, xtol=1e-15 * hi, rtol=8.9e-16, maxiter=500)


class EnergyModel:
    """Bundles transform, nonlinearity, potential and grid."""

    def __init__(
        self,
        transform: DualTransform | IdentityTransform,
        nl: Nonlinearity,
        pot: Potential,
        grid: RadialGrid,
    ):
        self.transform = transform
        self.nl = nl
        self.pot = pot
        self.grid = grid
        self.V_nodes = np.asarray(pot(grid.nodes), dtype=float)
        self.V_nodes.flags.writeable = False
        self.full = Subdomain(self, slice(0, grid.n), 0.0, grid.R)

    def restrict(self, annulus: tuple[float, float]) -> Subdomain:
        rho, sigma = annulus
        sl = self.grid.annulus_slice(rho, sigma)
        return Subdomain(self, sl, self.grid.snap(rho), self.grid.snap(sigma))

    def values(self, v) -> np.ndarray:
        if isinstance(v, RadialField):
            if v.grid is not self.grid and v.grid.key() != self.grid.key():
                raise GridMismatch("field lives on a different grid")
            return v.values
        arr = np.asarray(v, dtype=float)
        if arr.shape != (self.grid.n,):
            raise GridMismatch(f"expected {self.grid.n} values, got shape {arr.shape}")
        return arr

    def kappa(self) -> float:
        """Shift of the H1 preconditioner, on the scale of the local stiffness."""
        return max(1.0, self.nl.l, float(self.V_nodes.max()))


def functional_I(em: EnergyModel, v) -> float:
    return em.full.energy(em.values(v))


def euler_lagrange_residual(em: EnergyModel, v) -> tuple[RadialField, float]:
    vals = em.values(v)
    r = em.full.gradient(vals)
    return RadialField(em.grid, r), em.full.weighted_norm(r)


def nehari_psi(em: EnergyModel, u, s: float) -> float:
    vals = em.values(u)
    if not np.any(vals):
        raise ZeroField("psi of the zero field")
    if not s > 0:
        raise ValueError("scale must be positive")
    return em.full.psi(vals, s)


def _signed_parts(vals: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    return np.maximum(vals, 0.0), np.minimum(vals, 0.0)


def theta_test(em: EnergyModel, u) -> bool:
    """grad_sq(u^+-) < l |u^+-|_2^2 for every nonzero signed part.

    With l = 1 this is the restricted set of the l = 1 theory; for other l it
    is the analogous large-scale projectability condition.
    """
    vals = em.values(u)
    if not np.any(vals):
        raise ZeroField("theta test of the zero field")
    ok = True
    for part in _signed_parts(vals):
        if np.any(part):
            ok &= em.full.grad_sq(part) < em.nl.l * em.full.l2_sq(part)
    return bool(ok)


def project_nehari(em: EnergyModel, u, s_max: float = S_MAX) -> tuple[float, RadialField]:
    vals = em.values(u)
    t = em.full.nehari_scale(vals, s_max)
    return t, RadialField(em.grid, t * vals)


def project_sign_changing(
    em: EnergyModel, u, s_max: float = S_MAX, max_sweeps: int = 200
) -> tuple[float, float, RadialField]:
    """Scale u^+ and u^- so that both Nehari constraints hold.

    The signed parts have disjoint node supports, so the pointwise terms
    decouple. The only interaction left is the stiffness edge joining the last
    positive and first negative node when no zero node separates them; the
    resulting 2x2 system is solved by alternating one-dimensional projections,
    which terminate after a single sweep when that cross term vanishes.
    """
    vals = em.values(u)
    up, um = _signed_parts(vals)
    if not np.any(up) or not np.any(um):
        raise MissingSign("field does not change sign")
    sub = em.full
    cross = float(np.dot(up, sub.K(um)))  # >= 0
    s = sub.nehari_scale(up, s_max)
    t = sub.nehari_scale(um, s_max)
    if cross != 0.0:
        for _ in range(max_sweeps):
            s_new = sub.nehari_scale(up, s_max, coupling=t * cross)
            t_new = sub.nehari_scale(um, s_max, coupling=s_new * cross)
            done = abs(s_new - s) <= 1e-15 * s_new and abs(t_new - t) <= 1e-15 * t_new
            s, t = s_new, t_new
            if done:
                break
    return s, t, RadialField(em.grid, s * up + t * um)


def nehari_residuals(em: EnergyModel, v) -> tuple[float, ...]:
    """<I'(v), v^+> and <I'(v), v^-> for the nonzero signed parts of v."""
    vals = em.values(v)
    r = em.full.gradient(vals)
    return tuple(
        float(np.dot(em.full.w, r * part)) for part in _signed_parts(vals) if np.any(part)
    )
