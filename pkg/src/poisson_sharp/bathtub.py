"""Extremal sources and the modulus curve via alternating maximization.

For a mass budget beta the admissible sources are 0 <= f <= 1 with
integral beta.  The value sigma_D(beta) is the largest possible peak of the
solution, attained by the indicator of a superlevel set of the Green's
function centered at the peak location.  Discretely both half-steps are
exact: filling the bathtub against a fixed Green column is a sorted greedy
fill (with one fractional tie cell keeping the mass exact), and relocating
the peak is an argmax over the solve.  The objective never decreases, so
the recorded history is monotone and the final value is a certified lower
bound on the discrete supremum.
"""

from __future__ import annotations

import math
import os
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .families import Lcg64
from .grid import GridDomain, ScalarField
from .solver import (
    DEFAULT_RTOL,
    GreenColumn,
    PoissonSolution,
    green_column,
    solve_poisson,
    torsion_function,
)

STAGNATION_TOL = 1e-12
TIE_TOL = 1e-10


def thread_limit() -> int:
    """Worker cap from POISSON_SHARP_THREADS (default 1 = sequential)."""
    raw = os.environ.get("POISSON_SHARP_THREADS", "").strip()
    try:
        return max(1, int(raw)) if raw else 1
    except ValueError:
        return 1


@dataclass
class BathtubSet:
    """Discrete bathtub fill: weights in [0,1], at most one fractional cell."""

    domain: GridDomain
    level_alpha: float
    weights: np.ndarray
    mass: float

    @property
    def field(self) -> ScalarField:
        return ScalarField(self.domain, self.weights)


@dataclass
class SigmaPoint:
    beta: float
    sigma: float
    argmax_cell: int
    level_alpha: float
    iterations: int
    objective_history: list
    tie_cells: list
    start_summaries: list
    extremal: BathtubSet
    solution: PoissonSolution


@dataclass
class SigmaCurve:
    domain: GridDomain
    points: list


@dataclass
class OptimizerOptions:
    rtol: float = DEFAULT_RTOL
    max_outer_iterations: int = 50
    multistart: int = 5  # torsion argmax + (multistart - 1) seeded cells
    seed: int = 1
    stagnation_tol: float = STAGNATION_TOL


class GreenCache:
    """Thread-safe memo of Green columns per source cell."""

    def __init__(self, domain: GridDomain, rtol: float):
        self.domain = domain
        self.rtol = rtol
        self._columns = {}
        self._lock = threading.Lock()

    def column(self, source: int) -> GreenColumn:
        with self._lock:
            hit = self._columns.get(source)
        if hit is not None:
            return hit
        col = green_column(self.domain, source, self.rtol)
        with self._lock:
            self._columns.setdefault(source, col)
        return col


def calibrate_bathtub(g, beta: float) -> BathtubSet:
    """Exact maximizer of sum(g*w)*h^dim over {0 <= w <= 1, mass(w) = beta}.

    ``g`` is a GreenColumn or any ScalarField.  Cells are filled in
    descending g order (exact ties broken by ascending interior index); the
    single next cell gets the fractional weight that makes the mass exact.
    """
    profile = g.g if isinstance(g, GreenColumn) else g
    domain = profile.domain
    if not -1e-12 <= beta <= domain.measure * (1.0 + 1e-12):
        raise ValueError(f"beta {beta} outside [0, {domain.measure}]")
    beta = min(max(beta, 0.0), domain.measure)

    values = profile.values
    n = domain.n_cells
    order = np.argsort(-values, kind="stable")
    cells_target = beta / domain.cell_volume
    full = int(math.floor(cells_target + 1e-12))
    frac = cells_target - full
    if full >= n:
        full, frac = n, 0.0
    weights = np.zeros(n)
    weights[order[:full]] = 1.0
    if frac > 1e-12 and full < n:
        weights[order[full]] = frac
        alpha = float(values[order[full]])
    elif full > 0:
        alpha = float(values[order[full - 1]])
    else:
        alpha = float(values.max())
    mass = float(weights.sum() * domain.cell_volume)
    return BathtubSet(domain, alpha, weights, mass)


def _run_start(domain, beta, start, opts, cache):
    """Alternating maximization from one starting cell.

    Returns (history, state) where state carries the iterate matching the
    last history entry.  History entries strictly increase by more than the
    stagnation tolerance, so it is non-decreasing by construction.
    """
    x_hat = start
    history = []
    state = None
    for _ in range(opts.max_outer_iterations):
        col = cache.column(x_hat)
        tub = calibrate_bathtub(col, beta)
        sol = solve_poisson(domain, tub.field, opts.rtol)
        x_next = int(np.argmax(sol.u.values))  # argmax takes the lowest tied index
        objective = float(sol.u.values[x_next])
        if history and objective - history[-1] < opts.stagnation_tol:
            break
        history.append(objective)
        state = (tub, sol, x_next)
        if x_next == x_hat:
            break
        x_hat = x_next
    return history, state


def optimize_extremal(
    domain: GridDomain,
    beta: float,
    opts: OptimizerOptions | None = None,
    cache: GreenCache | None = None,
    torsion: PoissonSolution | None = None,
    extra_starts=(),
) -> SigmaPoint:
    """Compute sigma_D(beta) and the extremal source by alternating ascent.

    Starts are the torsion argmax, ``multistart - 1`` seeded pseudorandom
    interior cells, and any ``extra_starts``; the best final objective wins,
    earliest start on ties.  Multistarts run in parallel when
    POISSON_SHARP_THREADS > 1 (results are scheduling-independent).
    """
    opts = opts or OptimizerOptions()
    if opts.max_outer_iterations < 1:
        raise ValueError("max_outer_iterations must be >= 1")
    if not -1e-9 * domain.measure <= beta <= domain.measure * (1.0 + 1e-9):
        raise ValueError(f"beta {beta} outside [0, {domain.measure}]")
    beta = min(max(beta, 0.0), domain.measure)
    cache = cache or GreenCache(domain, opts.rtol)
    if torsion is None:
        torsion = torsion_function(domain, opts.rtol)

    starts = [int(np.argmax(torsion.u.values))]
    rng = Lcg64(opts.seed)
    starts += [rng.below(domain.n_cells) for _ in range(max(0, opts.multistart - 1))]
    starts += [int(s) for s in extra_starts]
    starts = list(dict.fromkeys(starts))

    workers = min(thread_limit(), len(starts))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            runs = list(pool.map(lambda s: _run_start(domain, beta, s, opts, cache), starts))
    else:
        runs = [_run_start(domain, beta, s, opts, cache) for s in starts]

    best = None
    summaries = []
    for start, (history, state) in zip(starts, runs):
        final = history[-1] if history else -math.inf
        summaries.append(
            {"start_cell": start, "iterations": len(history), "objective": final}
        )
        if best is None or final > best[0]:
            best = (final, history, state, start)

    sigma, history, state, _ = best
    tub, sol, x_best = state
    u = sol.u.values
    ties = np.flatnonzero(u >= sigma - TIE_TOL)
    return SigmaPoint(
        beta=beta,
        sigma=sigma,
        argmax_cell=x_best,
        level_alpha=tub.level_alpha,
        iterations=len(history),
        objective_history=history,
        tie_cells=[int(t) for t in ties],
        start_summaries=summaries,
        extremal=tub,
        solution=sol,
    )


def sigma_curve(
    domain: GridDomain,
    betas,
    opts: OptimizerOptions | None = None,
    cache: GreenCache | None = None,
) -> SigmaCurve:
    """sigma_D at each beta (ascending), sharing Green columns across points.

    Each point also warm-starts from the previous argmax, which makes the
    curve non-decreasing by the ascent property; a violation beyond the
    stagnation tolerance raises.
    """
    betas = [float(b) for b in betas]
    if any(b2 < b1 for b1, b2 in zip(betas, betas[1:])):
        raise ValueError("betas must be sorted ascending")
    opts = opts or OptimizerOptions()
    cache = cache or GreenCache(domain, opts.rtol)
    torsion = torsion_function(domain, opts.rtol)

    points = []
    prev_argmax = None
    for beta in betas:
        extra = () if prev_argmax is None else (prev_argmax,)
        sp = optimize_extremal(
            domain, beta, opts, cache=cache, torsion=torsion, extra_starts=extra
        )
        if points and sp.sigma < points[-1].sigma - STAGNATION_TOL:
            raise RuntimeError(
                f"sigma decreased along the curve: {points[-1].sigma} -> {sp.sigma}"
            )
        points.append(sp)
        prev_argmax = sp.argmax_cell
    return SigmaCurve(domain, points)


def stationarity_check(sp: SigmaPoint, sol) -> float:
    """Max-norm of the centered-difference gradient of u at the extremal cell.

    Raises if the argmax cell touches the boundary (the continuum maximum
    sits a positive distance inside, so this signals an unusable run).
    """
    u = sol.u if isinstance(sol, PoissonSolution) else sol
    domain = u.domain
    multi = np.array(domain.multi_index_of(sp.argmax_cell))
    grad_max = 0.0
    for ax in range(domain.dim):
        lo, hi = multi.copy(), multi.copy()
        lo[ax] -= 1
        hi[ax] += 1
        ilo = domain.index_map[tuple(lo)]
        ihi = domain.index_map[tuple(hi)]
        if ilo < 0 or ihi < 0:
            raise ValueError("gradient check unavailable: argmax adjacent to boundary")
        grad = (u.values[ihi] - u.values[ilo]) / (2.0 * domain.spacing)
        grad_max = max(grad_max, abs(grad))
    return grad_max
