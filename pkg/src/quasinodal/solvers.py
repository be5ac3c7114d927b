"""Ground states, k-node radial solutions and least-energy sign-changing solutions.

Inner problems (one-signed least energy on an annulus) are solved by
H1-preconditioned gradient descent with the iterate re-projected onto the
Nehari set after every step and an Armijo backtracking line search on the
energy; a few Newton steps on the Euler-Lagrange system finish the solve once
the descent has entered the basin of the minimizer. Outer problems (node
radii) are solved by cyclic golden-section coordinate descent over the sum of
the inner least energies.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .energy import EnergyModel, Subdomain, functional_I, project_sign_changing
from .errors import (
    InfeasiblePartition,
    InnerSolveFailed,
    MaxItersExceeded,
    MissingSign,
    NotProjectable,
    SeedConstructionFailed,
    SeedNotProjectable,
    TooFewNodes,
    ZeroField,
)
from .radial_mesh import RadialField, dirichlet_eig_first
from .reports import NodalPartition, SolveReport
from .verification import count_nodes

log = logging.getLogger(__name__)

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass
class SolverOptions:
    el_tol: float = 1e-6
    nehari_tol: float = 1e-10
    max_iters: int = 5000
    # EL residual below which Newton steps are attempted
    newton_switch: float = 1e-3
    max_newton: int = 25
    # try a projected Newton step before each gradient step
    newton_descent: bool = True
    armijo: float = 1e-4
    step0: float = 1.0
    shrink: float = 0.5
    seed: str = "eigen"  # "eigen" | "gaussian"
    min_sep: float | None = None  # default 0.05 R / (k + 1)
    radius_tol: float | None = None  # default 1e-3 R
    max_sweeps: int = 30
    initial_radii: tuple[float, ...] | None = None
    polish_glued: bool = True
    random_seed: int = 0
    perturbation: float = 0.03
    mode: str = "nonvanishing"


def _grid_meta(em: EnergyModel) -> dict:
    g = em.grid
    return {"N": g.dim, "R": g.R, "n": g.n, "h": g.h}


def _rel_nehari(sub: Subdomain, v: np.ndarray) -> list[float]:
    """|<I'(v), v^+->| / max(1, grad_sq(v^+-)) for each nonzero signed part."""
    r = sub.gradient(v)
    out = []
    for part in (np.maximum(v, 0.0), np.minimum(v, 0.0)):
        if np.any(part):
            out.append(abs(float(np.dot(sub.w, r * part))) / max(1.0, sub.grad_sq(part)))
    return out


def _gaussian_seed(sub: Subdomain) -> np.ndarray:
    r = sub.model.grid.nodes[sub.sl]
    width = sub.sigma - sub.rho
    center = 0.0 if sub.rho == 0.0 else 0.5 * (sub.rho + sub.sigma)
    scale = max(2.0, 0.2 * width)
    return np.exp(-(((r - center) / scale) ** 2))


def _newton_polish(sub, v, opts, accept) -> tuple[np.ndarray, float, int]:
    """Newton iterations on the EL system while they keep reducing the residual."""
    el = sub.weighted_norm(sub.gradient(v))
    steps = 0
    for _ in range(opts.max_newton):
        trial = v + sub.newton_step(v)
        if not np.all(np.isfinite(trial)) or not accept(trial):
            break
        el_t = sub.weighted_norm(sub.gradient(trial))
        if not el_t < el:
            break
        v, steps = trial, steps + 1
        stalled = el_t > 0.5 * el
        el = el_t
        if stalled and el <= opts.el_tol:
            break
    return v, el, steps


def _descend(sub, v, opts, project, accept, trace, kappa):
    """Projected preconditioned descent followed by Newton polishing.

    ``project`` maps a trial vector back onto the constraint set and
    ``accept`` vets Newton iterates. Returns (v, el, iterations, converged).
    """
    E = sub.energy(v)
    eta = opts.step0
    switch = opts.newton_switch
    el = math.inf
    for it in range(opts.max_iters):
        r = sub.gradient(v)
        el = sub.weighted_norm(r)
        trace.append((it, E, el))
        if el <= switch:
            v_n, el_n, steps = _newton_polish(sub, v, opts, accept)
            if el_n <= opts.el_tol:
                return v_n, el_n, it + steps, True
            switch *= 0.1
        if opts.newton_descent:
            # projected Newton step, kept only if it lowers the energy
            try:
                trial = project(v + sub.newton_step(v))
                E_t = sub.energy(trial) if accept(trial) else math.inf
            except (NotProjectable, MissingSign, ZeroField, ValueError):
                E_t = math.inf
            if E_t < E:
                v, E = trial, E_t
                continue
        p = sub.precondition(r, kappa)
        slope = float(np.dot(sub.w, r * p))
        if slope <= 0:
            break
        while True:
            try:
                trial = project(v - eta * p)
                E_t = sub.energy(trial)
            except (NotProjectable, MissingSign):
                E_t = math.inf
            if E_t <= E - opts.armijo * eta * slope:
                break
            eta *= opts.shrink
            if eta < 1e-14:
                # line search stalled: only Newton can still help
                v_n, el_n, steps = _newton_polish(sub, v, opts, accept)
                return v_n, el_n, it + steps, el_n <= opts.el_tol
        v, E = trial, E_t
        eta = min(opts.step0, 2.0 * eta)
    return v, el, opts.max_iters, el <= opts.el_tol


def _one_signed_project(sub: Subdomain, sign: int):
    def project(x):
        x = sign * np.abs(x)
        return sub.nehari_scale(x) * x

    return project


def _one_signed_accept(sign: int):
    def accept(x):
        tol = 1e-12 * float(np.max(np.abs(x)))
        return bool(np.min(sign * x) >= -tol)

    return accept


def solve_annulus_ground(
    em: EnergyModel,
    annulus: tuple[float, float] | None = None,
    sign: int = 1,
    opts: SolverOptions | None = None,
    initial: np.ndarray | None = None,
) -> tuple[RadialField, SolveReport]:
    """One-signed least-energy solution of the Dirichlet problem on an annulus.

    ``annulus`` defaults to the whole truncated ball (0, R). ``initial`` may
    hold a warm start on the annulus nodes.
    """
    opts = opts or SolverOptions()
    sign = 1 if sign >= 0 else -1
    if annulus is None:
        annulus = (0.0, em.grid.R)
    sub = em.restrict(annulus)
    if sub.size < 32:
        raise TooFewNodes(f"annulus {annulus} holds only {sub.size} nodes")
    notes = []
    if em.nl.l != 1.0:
        notes.append("projectability test uses the generalized condition grad_sq < l*|u|_2^2")

    if initial is not None:
        seed = sign * np.abs(np.asarray(initial, dtype=float))
    elif opts.seed == "gaussian":
        seed = sign * _gaussian_seed(sub)
    else:
        lam, eig = dirichlet_eig_first(em.grid, (sub.rho, sub.sigma))
        if lam >= em.nl.l:
            raise SeedNotProjectable(
                f"first Dirichlet eigenvalue {lam:.6g} on ({sub.rho:.6g}, {sub.sigma:.6g}) "
                f"is not below the asymptote l={em.nl.l:g}"
            )
        seed = sign * eig.values[sub.sl]
    try:
        v = sub.nehari_scale(seed) * seed
    except NotProjectable as exc:
        raise SeedNotProjectable(str(exc)) from exc

    trace: list = []
    v, el, iters, ok = _descend(
        sub, v, opts, _one_signed_project(sub, sign), _one_signed_accept(sign), trace, em.kappa()
    )
    v = np.where(sign * v < 0, 0.0, v)  # sub-rounding negatives only
    full = np.zeros(em.grid.n)
    full[sub.sl] = v
    energy = sub.energy(v)
    el = sub.weighted_norm(sub.gradient(v))
    neh = _rel_nehari(sub, v)
    converged = ok and el <= opts.el_tol and max(neh) <= opts.nehari_tol
    report = SolveReport(
        energy=energy,
        nehari_residuals=neh,
        el_residual=el,
        node_count=0,
        partition=NodalPartition((), em.grid.R, 0.0),
        iterations=iters,
        converged=converged,
        grid_meta=_grid_meta(em),
        mode=opts.mode,
        kind="annulus_ground",
        sign=sign,
        component_energies=[energy],
        trace=trace,
        extras={"annulus": [sub.rho, sub.sigma]},
        notes=notes,
    )
    if not converged:
        raise MaxItersExceeded(
            f"annulus ({sub.rho:.6g}, {sub.sigma:.6g}) stopped at EL residual {el:.3e} "
            f"after {iters} iterations",
            report,
            RadialField(em.grid, full),
        )
    return RadialField(em.grid, full), report


class _InnerCache:
    """Memoized inner least energies keyed by snapped grid indices and sign."""

    def __init__(self, em: EnergyModel, opts: SolverOptions):
        self.em = em
        self.opts = opts
        self.store: dict[tuple[int, int, int], tuple[float, np.ndarray | None, SolveReport | None]] = {}
        self.solves = 0

    def get(self, j: int, a: float, b: float, sign: int):
        g = self.em.grid
        key = (g.index_of(a), g.index_of(b), sign)
        if key not in self.store:
            try:
                warm = self._warm_start(key)
                field_, rep = solve_annulus_ground(self.em, (a, b), sign, self.opts, warm)
                self.solves += 1
                self.store[key] = (rep.energy, field_.values, rep)
            except (SeedNotProjectable, TooFewNodes):
                self.store[key] = (math.inf, None, None)
            except Exception as exc:
                raise InnerSolveFailed(j, (a, b), exc) from exc
        return self.store[key]

    def _warm_start(self, key):
        """Nearby cached solution of the same kind, linearly remapped onto the new annulus."""
        ia, ib, sign = key
        best, dist = None, math.inf
        for (ja, jb, s), (_, vals, _) in self.store.items():
            if vals is None or s != sign or (ja == 0) != (ia == 0) or (jb == self.em.grid.n + 1) != (ib == self.em.grid.n + 1):
                continue
            d = abs(ja - ia) + abs(jb - ib)
            if d < dist:
                best, dist = (ja, jb, vals), d
        if best is None or dist > 0.25 * (ib - ia):
            return None
        ja, jb, vals = best
        nodes = np.arange(ia + 1, ib, dtype=float)
        src = ja + (nodes - ia) * (jb - ja) / (ib - ia)
        # vals[i-1] holds node i; the annulus endpoints carry zeros
        prof = np.concatenate(([0.0], vals[ja:jb - 1], [0.0]))
        if ja == 0:
            prof[0] = prof[1]  # mirror at the origin
        return np.interp(src, np.arange(ja, jb + 1, dtype=float), prof)


def _golden(fun, a: float, b: float, tol: float):
    """Golden-section search; returns the best evaluated (x, f(x))."""
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = fun(c), fun(d)
    best = min((fc, c), (fd, d), key=lambda t: t[0])
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = fun(c)
            best = min(best, (fc, c), key=lambda t: t[0])
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = fun(d)
            best = min(best, (fd, d), key=lambda t: t[0])
    return best[1], best[0]


def _glue(em: EnergyModel, cache: _InnerCache, radii, sign: int):
    edges = (0.0, *radii, em.grid.R)
    full = np.zeros(em.grid.n)
    energies = []
    for j, (a, b) in enumerate(zip(edges[:-1], edges[1:])):
        e, vals, _ = cache.get(j, a, b, sign * (-1) ** j)
        if vals is None:
            raise InfeasiblePartition(f"annulus ({a:.6g}, {b:.6g}) admits no Nehari projection")
        full += vals
        energies.append(e)
    return full, energies


def solve_k_node(
    em: EnergyModel, k: int, sign: int = 1, opts: SolverOptions | None = None
) -> tuple[RadialField, SolveReport]:
    """Radial solution with exactly k nodes, built from k+1 annulus ground states.

    The node radii minimize the summed annulus least energies (cyclic
    golden-section coordinate descent); signs alternate outward starting with
    ``sign`` on the central ball.
    """
    opts = opts or SolverOptions()
    sign = 1 if sign >= 0 else -1
    if k < 0:
        raise ValueError("k must be nonnegative")
    R = em.grid.R
    if k == 0:
        field_, rep = solve_annulus_ground(em, (0.0, R), sign, opts)
        rep.kind = "k_node"
        rep.extras["k"] = 0
        return field_, rep

    min_sep = opts.min_sep if opts.min_sep is not None else 0.05 * R / (k + 1)
    radius_tol = opts.radius_tol if opts.radius_tol is not None else 1e-3 * R
    min_sep = max(min_sep, 33 * em.grid.h)
    if opts.initial_radii is not None:
        radii = [em.grid.snap(r) for r in opts.initial_radii]
    else:
        radii = [em.grid.snap(j * R / (k + 2)) for j in range(1, k + 1)]
    if len(radii) != k:
        raise InfeasiblePartition(f"expected {k} initial radii, got {len(radii)}")
    NodalPartition(tuple(radii), R, min_sep)  # validates spacing

    cache = _InnerCache(em, opts)

    def total(rs) -> float:
        edges = (0.0, *rs, R)
        return sum(
            cache.get(j, a, b, sign * (-1) ** j)[0]
            for j, (a, b) in enumerate(zip(edges[:-1], edges[1:]))
        )

    E = total(radii)
    if not math.isfinite(E):
        raise InfeasiblePartition(f"initial radii {radii} leave an annulus without a Nehari projection")
    history = [(0, E, 0.0)]
    moves = [math.inf] * k
    sweeps = 0
    for sweeps in range(1, opts.max_sweeps + 1):
        moved = []
        for j in range(k):
            lo = (radii[j - 1] if j > 0 else 0.0) + min_sep
            hi = (radii[j + 1] if j < k - 1 else R) - min_sep
            if sweeps > 1:
                width = max(4.0 * moves[j], 8.0 * radius_tol)
                lo_l, hi_l = max(lo, radii[j] - width), min(hi, radii[j] + width)
            else:
                lo_l, hi_l = lo, hi

            def coord(x, j=j):
                trial = list(radii)
                trial[j] = em.grid.snap(x)
                return total(trial)

            x, fx = _golden(coord, lo_l, hi_l, radius_tol)
            if (lo_l > lo and x - lo_l < radius_tol) or (hi_l < hi and hi_l - x < radius_tol):
                x, fx = _golden(coord, lo, hi, radius_tol)
            x = em.grid.snap(x)
            if fx < E:
                moves[j] = abs(x - radii[j])
                radii[j], E = x, fx
            else:
                moves[j] = 0.0
            moved.append(moves[j])
        history.append((sweeps, E, max(moved)))
        if max(moved) < radius_tol:
            break

    glued, energies = _glue(em, cache, radii, sign)
    partition = NodalPartition(tuple(radii), R, min_sep)
    sub = em.full
    field_vals = glued
    el_glued = sub.weighted_norm(sub.gradient(glued))
    polished = False
    if opts.polish_glued:
        v, el, _ = _newton_polish(sub, glued, opts, lambda x: count_nodes(x) == k)
        if el <= opts.el_tol and count_nodes(v) == k:
            field_vals, polished = v, True
    el_final = sub.weighted_norm(sub.gradient(field_vals))
    neh = _rel_nehari(sub, field_vals)
    inner_ok = all(rep.converged for (_, _, rep) in (cache.store[_key(em, a, b, sign * (-1) ** j)]
                   for j, (a, b) in enumerate(partition.annuli())))
    nodes = count_nodes(field_vals)
    energy = sub.energy(field_vals)
    converged = inner_ok and nodes == k and (el_final <= opts.el_tol if opts.polish_glued else True)
    report = SolveReport(
        energy=energy,
        nehari_residuals=neh,
        el_residual=el_final,
        node_count=nodes,
        partition=partition,
        iterations=sweeps,
        converged=converged,
        grid_meta=_grid_meta(em),
        mode=opts.mode,
        kind="k_node",
        sign=sign,
        component_energies=energies,
        # outer trace: (sweep, total energy, largest radius move)
        trace=history,
        extras={
            "k": k,
            "glued_energy": float(sum(energies)),
            "glued_el_residual": el_glued,
            "newton_polished": polished,
            "inner_solves": cache.solves,
            "node_radii_polished": _zero_crossings(em, field_vals),
        },
    )
    return RadialField(em.grid, field_vals), report


def _key(em, a, b, sign):
    return (em.grid.index_of(a), em.grid.index_of(b), sign)


def _zero_crossings(em: EnergyModel, v: np.ndarray) -> list[float]:
    """Linear-interpolated zero crossings of the nodal profile."""
    r = em.grid.nodes
    thresh = 1e-8 * float(np.max(np.abs(v)))
    idx = np.flatnonzero(np.abs(v) > thresh)
    out = []
    for i0, i1 in zip(idx[:-1], idx[1:]):
        if v[i0] * v[i1] < 0:
            out.append(float(r[i0] + (r[i1] - r[i0]) * v[i0] / (v[i0] - v[i1])))
    return out


def _sign_changing_descent(em: EnergyModel, seed: np.ndarray, opts: SolverOptions):
    sub = em.full
    _, _, w = project_sign_changing(em, seed)
    v = w.values
    trace: list = []

    def project(x):
        return project_sign_changing(em, x)[2].values

    def accept(x):
        return count_nodes(x) == 1

    v, el, iters, ok = _descend(sub, v, opts, project, accept, trace, em.kappa())
    return v, el, iters, ok, trace


def _perturbed(em: EnergyModel, v: np.ndarray, opts: SolverOptions) -> np.ndarray:
    """Radially dilated copy of v with its signed parts rescaled unevenly."""
    rng = np.random.default_rng(opts.random_seed)
    r = em.grid.nodes
    eps = opts.perturbation
    stretch = 1.0 + eps * (1.0 + rng.random())
    moved = np.interp(r / stretch, r, v, left=v[0], right=0.0)
    a, b = 1.0 + eps * rng.random(), 1.0 - eps * rng.random()
    return np.where(moved > 0, a * moved, b * moved)


def vanishing_seed(em: EnergyModel) -> dict:
    """Sign-changing member built from Dirichlet eigenfunctions of the zero set.

    Returns the scalars s0, t0 with their bracket certificates
    psi(lo) > 0 > psi(hi), and the seeded field.
    """
    zs = em.pot.zero_set
    if zs is None:
        raise SeedConstructionFailed("potential declares no zero-set subdomains")
    out = {"mu": [], "scalars": [], "brackets": []}
    seed = np.zeros(em.grid.n)
    for i, dom in enumerate(sorted(zs)):
        lam, eig = dirichlet_eig_first(em.grid, tuple(dom))
        vt = (-1) ** i * eig.values
        out["mu"].append(lam)
        try:
            s = em.full.nehari_scale(vt)
        except NotProjectable as exc:
            raise SeedConstructionFailed(
                f"no root of psi_{i + 1} on ({dom[0]:.6g}, {dom[1]:.6g}): first Dirichlet "
                f"eigenvalue {lam:.6f} vs l={em.nl.l:g}; need l > max(mu_1, mu_2)"
            ) from exc
        lo, hi = 0.5 * s, 2.0 * s
        p_lo, p_hi = em.full.psi(vt, lo), em.full.psi(vt, hi)
        if not (p_lo > 0 > p_hi):
            raise SeedConstructionFailed(f"bracket certificate failed for psi_{i + 1}")
        out["scalars"].append(s)
        out["brackets"].append([lo, hi, p_lo, p_hi])
        seed += s * vt
    out["field"] = seed
    return out


def solve_least_energy_sign_changing(
    em: EnergyModel, opts: SolverOptions | None = None
) -> tuple[RadialField, SolveReport]:
    """Least-energy sign-changing solution via two independent routes.

    The nodal route optimizes the single node radius of a glued pair of
    annulus ground states; the direct route runs projected descent on the
    whole field over the sign-changing Nehari set. The lower energy wins and
    both are reported.
    """
    opts = opts or SolverOptions()
    extras: dict = {}
    if opts.mode == "vanishing":
        seed_info = vanishing_seed(em)
        extras["seed"] = {k: v for k, v in seed_info.items() if k != "field"}
        direct_seed = seed_info["field"]
        nodal = None
        try:
            nodal = solve_k_node(em, 1, 1, opts)
        except (InfeasiblePartition, InnerSolveFailed) as exc:
            extras["nodal_path_error"] = str(exc)
    else:
        nodal = solve_k_node(em, 1, 1, opts)
        direct_seed = _perturbed(em, nodal[0].values, opts)

    v, el, iters, ok, trace = _sign_changing_descent(em, direct_seed, opts)
    sub = em.full
    direct_energy = sub.energy(v)
    extras["direct_energy"] = direct_energy
    extras["direct_el_residual"] = el
    extras["direct_node_count"] = count_nodes(v)
    candidates = [("direct", v, direct_energy)]
    if nodal is not None:
        extras["nodal_energy"] = nodal[1].energy
        extras["nodal_el_residual"] = nodal[1].el_residual
        extras["nodal_partition"] = nodal[1].partition.to_dict()
        candidates.append(("nodal", nodal[0].values, nodal[1].energy))
        extras["path_gap_rel"] = abs(direct_energy - nodal[1].energy) / max(
            abs(direct_energy), abs(nodal[1].energy)
        )
    name, best, energy = min(candidates, key=lambda c: c[2])
    extras["selected_path"] = name
    # H1 norms of the signed parts; both stay bounded away from zero on the sign-changing set
    extras["signed_part_norms"] = [
        math.sqrt(sub.grad_sq(part) + sub.l2_sq(part)) for part in (np.maximum(best, 0.0), np.minimum(best, 0.0))
    ]
    el_best = sub.weighted_norm(sub.gradient(best))
    neh = _rel_nehari(sub, best)
    nodes = count_nodes(best)
    crossings = _zero_crossings(em, best)
    converged = el_best <= opts.el_tol and nodes == 1 and max(neh) <= opts.nehari_tol
    if nodal is not None:
        converged = converged and nodal[1].converged
    converged = converged and ok
    report = SolveReport(
        energy=energy,
        nehari_residuals=neh,
        el_residual=el_best,
        node_count=nodes,
        partition=NodalPartition(tuple(crossings), em.grid.R, 0.0),
        iterations=iters,
        converged=converged,
        grid_meta=_grid_meta(em),
        mode=opts.mode,
        kind="sign_changing",
        sign=1 if best[0] > 0 else -1,
        component_energies=[
            sub.energy(np.maximum(best, 0.0)),
            sub.energy(np.minimum(best, 0.0)),
        ],
        trace=trace,
        extras=extras,
    )
    if not converged:
        raise MaxItersExceeded(
            f"sign-changing solve stopped at EL residual {el_best:.3e}", report, RadialField(em.grid, best)
        )
    return RadialField(em.grid, best), report
