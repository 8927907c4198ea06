"""First-eigenpair minimization of the discrete fractional Rayleigh quotient.

`minimize_first` runs projected gradient descent with a backtracking line
search: steps move along the negative quotient gradient, acceptance demands an
Armijo decrease, and iterates are renormalized to sum |u|^p h^n = 1 after every
accepted step (the quotient is scale-free, so renormalizing never changes it).

`p2_oracle` solves the p = 2 case by an entirely different route — assembling
the quadratic form's symmetric matrix and running inverse power iteration —
and exists to cross-check the descent path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import List, Optional, Sequence

import numpy as np
import scipy.linalg

from .energy import FracParams, QuotientTables
from .geometry import (
    GridDomain,
    GridFunction,
    distance_to_complement,
    inscribed_radius,
)

__all__ = [
    "SolverOptions",
    "EigenResult",
    "PSweepRow",
    "PSweepResult",
    "minimize_first",
    "p2_oracle",
    "p_sweep",
    "monotonicity_check",
]

_ARMIJO = 1e-4
_STEP_GROWTH = 2.0


@dataclass(frozen=True)
class SolverOptions:
    """Knobs for minimize_first.

    init_mode: "distance" starts from the distance-to-complement profile
    (positive, the right shape near the large-p limit), "random" from a seeded
    standard normal vector, "custom" from init_values on the inside nodes.
    """

    max_iters: int = 50_000
    tol_rel_q: float = 1e-12
    tol_grad: float = 1e-9
    step0: float = 1.0
    backtrack_factor: float = 0.5
    init_mode: str = "distance"
    seed: int = 0
    init_values: Optional[np.ndarray] = None
    keep_history: bool = False

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if not (self.tol_rel_q > 0.0 and self.tol_grad > 0.0):
            raise ValueError("tolerances must be positive")
        if not (self.step0 > 0.0):
            raise ValueError("step0 must be positive")
        if not (0.0 < self.backtrack_factor < 1.0):
            raise ValueError("backtrack_factor must lie in (0, 1)")
        if self.init_mode not in ("distance", "random", "custom"):
            raise ValueError(f"unknown init_mode {self.init_mode!r}")
        if self.init_mode == "custom" and self.init_values is None:
            raise ValueError("custom init requires init_values")


@dataclass(eq=False)
class EigenResult:
    """Converged (or best-effort) eigenpair with solver diagnostics."""

    lam: float
    u: GridFunction
    iters: int
    final_grad_norm: float
    converged: bool
    history: Optional[List[float]] = None


def _initial_vector(dom: GridDomain, opts: SolverOptions) -> np.ndarray:
    if opts.init_mode == "distance":
        return distance_to_complement(dom).inside_values().copy()
    if opts.init_mode == "random":
        rng = np.random.default_rng(opts.seed)
        v = rng.standard_normal(dom.inside_count)
        while not np.any(v):  # pragma: no cover - essentially impossible
            v = rng.standard_normal(dom.inside_count)
        return v
    v = np.asarray(opts.init_values, dtype=float).copy()
    if v.shape != (dom.inside_count,):
        raise ValueError(
            f"init_values must hold {dom.inside_count} inside values, got {v.shape}"
        )
    if not np.isfinite(v).all() or not np.any(v):
        raise ValueError("init_values must be finite and not identically zero")
    return v


def minimize_first(dom: GridDomain, prm: FracParams,
                   opts: Optional[SolverOptions] = None) -> EigenResult:
    """Minimize the discrete quotient by projected gradient descent.

    The quotient is non-increasing across iterations; the run stops when the
    gradient norm falls below tol_grad, when an accepted step changes the
    quotient by less than tol_rel_q relatively, or at max_iters (reported as
    converged=False; never an exception).
    """
    opts = opts or SolverOptions()
    tables = QuotientTables(dom, prm)
    v = tables.normalize(_initial_vector(dom, opts))
    q = tables.quotient(v)
    history = [q] if opts.keep_history else None

    step = opts.step0
    converged = False
    grad_norm = math.inf
    iters = 0
    for iters in range(1, opts.max_iters + 1):
        g = tables.gradient(v)
        grad_norm = float(np.linalg.norm(g))
        if grad_norm <= opts.tol_grad:
            converged = True
            iters -= 1
            break

        step = step * _STEP_GROWTH
        accepted = False
        while step > 1e-20 / max(grad_norm, 1.0):
            w = v - step * g
            if np.any(w) and np.isfinite(w).all():
                qw = tables.quotient(w)
                if math.isfinite(qw) and qw <= q - _ARMIJO * step * grad_norm * grad_norm:
                    accepted = True
                    break
            step *= opts.backtrack_factor
        if not accepted:
            # descent direction exhausted at this precision
            converged = grad_norm <= opts.tol_grad
            break

        v = tables.normalize(w)
        drop = q - qw
        q = qw
        if history is not None:
            history.append(q)
        if drop <= opts.tol_rel_q * max(1.0, abs(q)):
            converged = True
            break

    v = tables.normalize(v)
    u = GridFunction.from_inside(dom, v)
    return EigenResult(lam=float(q), u=u, iters=iters,
                       final_grad_norm=grad_norm, converged=converged,
                       history=history)


# ---------------------------------------------------------------------------
# p = 2 oracle: explicit quadratic form + inverse power iteration
# ---------------------------------------------------------------------------


def p2_matrix(dom: GridDomain, alpha: float) -> np.ndarray:
    """Symmetric matrix A with E(v) = v^T A v for the p = 2 discrete energy.

    Off-diagonal entries are -2 w_xy (w = kernel weight times h^(2n)); the
    diagonal carries the pair row sums plus each node's cross/tail coefficient.
    """
    prm = FracParams(alpha, 2.0)
    n = dom.dim
    if not (n < 2.0 * alpha < n + 2.0):
        raise ValueError(
            f"invalid exponents for p=2: alpha*p = {2.0 * alpha} not in ({n}, {n + 2})"
        )
    tables = QuotientTables(dom, prm)
    w = tables.holder ** 2 * tables.h2n  # |x_i - x_j|^(-2 alpha) h^(2n)
    a = -2.0 * w
    np.fill_diagonal(a, 2.0 * w.sum(axis=1) + tables.ct_coef)
    return a


def p2_oracle(dom: GridDomain, alpha: float, max_iters: int = 5_000,
              tol: float = 1e-15) -> EigenResult:
    """Smallest eigenpair of the p = 2 problem by inverse power iteration.

    Deterministic all-ones start; the generalized problem A v = lam h^n v is
    attacked through a Cholesky factorization of A (positive definite thanks to
    the strictly positive cross/tail diagonal).  Independent of the descent
    code path on purpose.
    """
    a = p2_matrix(dom, alpha)
    hn = dom.h ** dom.dim
    factor = scipy.linalg.cho_factor(a)
    v = np.ones(a.shape[0]) / math.sqrt(a.shape[0])
    lam_prev = math.inf
    converged = False
    iters = 0
    for iters in range(1, max_iters + 1):
        v = scipy.linalg.cho_solve(factor, v)
        v /= np.linalg.norm(v)
        lam = float(v @ (a @ v) / (hn * (v @ v)))
        if abs(lam - lam_prev) <= tol * max(1.0, abs(lam)):
            converged = True
            break
        lam_prev = lam
    # fix sign (make the dominant node positive) and normalize sum u^2 h^n = 1
    v = v * np.sign(v[int(np.argmax(np.abs(v)))])
    v = v / (math.sqrt(hn) * np.linalg.norm(v))
    resid = float(np.linalg.norm(a @ v - lam * hn * v))
    return EigenResult(lam=lam, u=GridFunction.from_inside(dom, v), iters=iters,
                       final_grad_norm=resid, converged=converged)


# ---------------------------------------------------------------------------
# sweeps and comparisons
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PSweepRow:
    p: float
    lam: float
    root: float  # lam ** (1/p)
    converged: bool
    iters: int


@dataclass(eq=False)
class PSweepResult:
    rows: List[PSweepRow]
    target: float  # 1 / R^alpha, the large-p limit of root
    final_u: Optional[GridFunction] = None  # minimizer at the largest p

    def gaps(self) -> List[float]:
        return [abs(r.root - self.target) for r in self.rows]


def p_sweep(dom: GridDomain, alpha: float, ps: Sequence[float],
            opts: Optional[SolverOptions] = None) -> PSweepResult:
    """Solve the first eigenpair along an ascending list of p, warm-starting
    each solve from the previous minimizer, and report lam, lam^(1/p) and the
    limit target 1/R^alpha."""
    ps = [float(p) for p in ps]
    if not ps:
        raise ValueError("empty p list")
    if any(b <= a for a, b in zip(ps, ps[1:])):
        raise ValueError(f"p list must be strictly ascending, got {ps}")
    opts = opts or SolverOptions()

    radius = inscribed_radius(distance_to_complement(dom))
    target = radius ** (-alpha)

    rows: List[PSweepRow] = []
    warm: Optional[np.ndarray] = None
    for p in ps:
        run_opts = opts if warm is None else replace(
            opts, init_mode="custom", init_values=warm)
        res = minimize_first(dom, FracParams(alpha, p), run_opts)
        rows.append(PSweepRow(p=p, lam=res.lam,
                              root=math.exp(math.log(res.lam) / p),
                              converged=res.converged, iters=res.iters))
        warm = res.u.inside_values()
        last_u = res.u
    return PSweepResult(rows=rows, target=float(target), final_u=last_u)


def monotonicity_check(dom_omega: GridDomain, dom_upsilon: GridDomain,
                       prm: FracParams,
                       opts: Optional[SolverOptions] = None) -> bool:
    """Verify lam1(Omega) <= lam1(Upsilon) for Upsilon a sub-mask of Omega.

    Both domains must share the identical lattice and box so the two discrete
    problems are nested.  Returns the inequality verdict with an additive
    solver tolerance; raises for mismatched lattices or non-nested masks.
    """
    if not dom_omega.same_lattice(dom_upsilon):
        raise ValueError("domains live on different lattices")
    extra = dom_upsilon.inside_flat & ~dom_omega.inside_flat
    if np.any(extra):
        raise ValueError("second domain is not contained in the first")
    lam_omega = minimize_first(dom_omega, prm, opts).lam
    lam_upsilon = minimize_first(dom_upsilon, prm, opts).lam
    tol = 1e-8 * max(1.0, abs(lam_upsilon))
    return lam_omega <= lam_upsilon + tol
