"""Uniform radial grids on B_R with r^(N-1)-weighted quadrature.

Interior nodes are r_i = i h for i = 1..n with h = R/(n+1). Fields carry one
value per interior node; the value at R is an implicit homogeneous Dirichlet
condition and the value at r = 0 mirrors r_1 (radial regularity, u'(0) = 0).

The Dirichlet form is assembled edge by edge with the weight evaluated at
edge midpoints,

    grad_sq(u) = sigma_{N-1} sum_e r_{e+1/2}^(N-1) (u_{e+1} - u_e)^2 / h,

which gives a symmetric tridiagonal stiffness matrix K with u^T K u =
grad_sq(u). Restricting to an annulus (rho, sigma) with rho, sigma on the
grid is a principal submatrix of K.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_banded

from .errors import BadDimension, BadResolution, GridMismatch, NonConvergence, TooFewNodes


def sphere_area(N: int) -> float:
    """Surface area of the unit sphere S^(N-1)."""
    return 2.0 * math.pi ** (N / 2.0) / math.gamma(N / 2.0)


def critical_exponent(N: int) -> float:
    return 2.0 * N / (N - 2.0)


@dataclass(frozen=True, eq=False)
class RadialGrid:
    dim: int
    R: float
    n: int
    h: float = field(init=False)
    nodes: np.ndarray = field(init=False, repr=False)
    quad_weights: np.ndarray = field(init=False, repr=False)
    boundary_weight: float = field(init=False, repr=False)
    sphere_area: float = field(init=False)
    # stiffness: edge_coef[e] couples node e and e+1; the last entry couples
    # node n-1 to the Dirichlet boundary at R
    edge_coef: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 3:
            raise BadDimension(f"dimension must be an integer >= 3, got {self.dim}")
        if not (self.R > 0 and math.isfinite(self.R)):
            raise BadResolution(f"truncation radius must be positive, got {self.R}")
        if int(self.n) != self.n or self.n < 16:
            raise BadResolution(f"need at least 16 interior nodes, got {self.n}")
        h = self.R / (self.n + 1)
        nodes = h * np.arange(1, self.n + 1, dtype=float)
        area = sphere_area(self.dim)
        p = self.dim - 1
        weights = area * nodes**p * h
        mids = h * (np.arange(1, self.n + 1, dtype=float) + 0.5)
        edge = area * mids**p / h
        for name, val in (
            ("h", h),
            ("nodes", nodes),
            ("quad_weights", weights),
            ("boundary_weight", 0.5 * area * self.R**p * h),
            ("sphere_area", area),
            ("edge_coef", edge),
        ):
            object.__setattr__(self, name, val)
        nodes.flags.writeable = False
        weights.flags.writeable = False
        edge.flags.writeable = False

    def key(self) -> tuple:
        return (self.dim, float(self.R), self.n)

    def volume(self) -> float:
        """Trapezoid volume of B_R, including the half cell at r = R."""
        return float(self.quad_weights.sum() + self.boundary_weight)

    def index_of(self, radius: float) -> int:
        """Grid position (0..n+1) of the node nearest to ``radius``."""
        return int(np.clip(round(radius / self.h), 0, self.n + 1))

    def snap(self, radius: float) -> float:
        return self.index_of(radius) * self.h

    def annulus_slice(self, rho: float, sigma: float) -> slice:
        """Array slice of interior nodes strictly inside (rho, sigma), after snapping."""
        a = self.index_of(rho)
        b = self.index_of(sigma)
        # node i sits at array index i-1; keep nodes a+1 .. b-1
        return slice(a, max(a, b - 1))

    def stiffness_bands(self, sl: slice | None = None) -> tuple[np.ndarray, np.ndarray]:
        """(diag, off) of the stiffness matrix, optionally restricted to ``sl``."""
        c = self.edge_coef
        diag = c.copy()
        diag[1:] += c[:-1]
        off = -c[:-1]
        if sl is None:
            return diag, off
        lo, hi = sl.start, sl.stop
        return diag[lo:hi], off[lo : max(lo, hi - 1)]

    def field(self, values) -> "RadialField":
        return RadialField(self, values)


def build_grid(N: int, R: float, n: int) -> RadialGrid:
    return RadialGrid(N, R, n)


@dataclass(eq=False)
class RadialField:
    grid: RadialGrid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.grid.n,):
            raise GridMismatch(f"expected {self.grid.n} values, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("field values must be finite")
        self.values = v

    @property
    def r(self) -> np.ndarray:
        return self.grid.nodes

    def __neg__(self):
        return RadialField(self.grid, -self.values)

    def scaled(self, s: float) -> "RadialField":
        return RadialField(self.grid, s * self.values)

    def positive_part(self) -> "RadialField":
        return RadialField(self.grid, np.maximum(self.values, 0.0))

    def negative_part(self) -> "RadialField":
        return RadialField(self.grid, np.minimum(self.values, 0.0))


def _values(grid: RadialGrid, field) -> np.ndarray:
    if isinstance(field, RadialField):
        if field.grid is not grid and field.grid.key() != grid.key():
            raise GridMismatch("field lives on a different grid")
        return field.values
    v = np.asarray(field, dtype=float)
    if v.shape != (grid.n,):
        raise GridMismatch(f"expected {grid.n} values, got shape {v.shape}")
    return v


def integrate(grid: RadialGrid, values) -> float:
    return float(np.dot(_values(grid, values), grid.quad_weights))


def lp_norm(field: RadialField, p: float = 2.0) -> float:
    v = np.abs(field.values)
    if math.isinf(p):
        return float(v.max())
    return float(np.dot(v**p, field.grid.quad_weights) ** (1.0 / p))


def grad_sq_values(grid: RadialGrid, v: np.ndarray) -> float:
    c = grid.edge_coef
    d = np.diff(v)
    return float(np.dot(c[:-1], d * d) + c[-1] * v[-1] ** 2)


def grad_sq(field: RadialField) -> float:
    return grad_sq_values(field.grid, field.values)


def stiffness_apply(grid: RadialGrid, v: np.ndarray, sl: slice | None = None) -> np.ndarray:
    """K v (the gradient of grad_sq/2), on the whole grid or an annulus slice."""
    diag, off = grid.stiffness_bands(sl)
    out = diag * v
    out[:-1] += off * v[1:]
    out[1:] += off * v[:-1]
    return out


def solve_tridiagonal(diag: np.ndarray, off: np.ndarray, rhs: np.ndarray, lower=None) -> np.ndarray:
    """Solve a tridiagonal system; symmetric unless ``lower`` is given."""
    n = diag.size
    ab = np.zeros((3, n))
    ab[0, 1:] = off
    ab[1] = diag
    ab[2, :-1] = off if lower is None else lower
    return solve_banded((1, 1), ab, rhs, check_finite=False)


def dirichlet_eig_first(
    grid: RadialGrid,
    annulus: tuple[float, float],
    N: int | None = None,
    *,
    tol: float = 1e-13,
    max_iter: int = 500,
) -> tuple[float, RadialField]:
    """Smallest radial Dirichlet eigenpair on the annulus (rho, sigma).

    Shifted inverse iteration on the symmetrized pencil W^(-1/2) K W^(-1/2),
    started from the all-ones vector. The returned eigenfield is positive,
    supported in the annulus, and has unit weighted L2 norm.
    """
    if N is not None and N != grid.dim:
        raise GridMismatch(f"grid has dimension {grid.dim}, not {N}")
    rho, sigma = annulus
    if not (0.0 <= rho < sigma <= grid.R * (1 + 1e-12)):
        raise ValueError(f"need 0 <= rho < sigma <= R, got {annulus}")
    sl = grid.annulus_slice(rho, sigma)
    m = sl.stop - sl.start
    if m < 32:
        raise TooFewNodes(f"only {m} grid nodes inside ({rho}, {sigma})")
    diag, off = grid.stiffness_bands(sl)
    w = grid.quad_weights[sl]
    s = 1.0 / np.sqrt(w)
    a_diag = diag * s * s
    a_off = off * s[:-1] * s[1:]
    c = grid.edge_coef[sl.start : sl.stop]
    if sl.start > 0:
        # edge from the inner Dirichlet node rho into the annulus
        c = np.concatenate([[grid.edge_coef[sl.start - 1]], c])

    def rayleigh(y):
        # difference form: a sum of squares, free of the cancellation in y^T A y
        u = y * s
        d = np.diff(np.concatenate([[0.0], u, [0.0]]) if sl.start > 0 else np.concatenate([u, [0.0]]))
        return float(np.dot(c, d * d) / np.dot(w, u * u))

    shift = 0.0
    x = np.ones(m) / math.sqrt(m)
    lam_old = math.inf
    for it in range(max_iter):
        y = solve_tridiagonal(a_diag - shift, a_off, x)
        y /= np.linalg.norm(y)
        lam = rayleigh(y)
        x = y
        if abs(lam - lam_old) <= tol * lam:
            break
        if abs(lam - lam_old) < 1e-3 * lam:
            shift = 0.99 * lam
        lam_old = lam
    else:
        raise NonConvergence("inverse iteration did not converge")
    u = x * s
    u *= np.sign(u.sum())
    full = np.zeros(grid.n)
    full[sl] = u
    full /= math.sqrt(float(np.dot(full * full, grid.quad_weights)))
    return lam, RadialField(grid, full)
