"""Extremal Hoelder-quotient operators and the limiting eigenvalue equation.

For exponent alpha in (0, 1] and a grid function u, the two half-operators at
a node x are the supremum and infimum over y of

    (u(y) - u(x)) / |y - x|^alpha .

On the lattice the sup/inf run over all box nodes, plus one analytic exterior
candidate for zero-extended functions: just beyond the box u vanishes, so the
quotient -u(x) / d^alpha at the nearest box-boundary distance is a genuine
candidate and is offered to both extremes (witness index -1).  Comparison
functions that are not zero-extended (cones) skip the exterior candidate;
they are constant far out, so in-box candidates already dominate.

The first-eigenvalue equation residual at an inside node is

    max( l_plus + l_minus ,  l_minus + lam * u )

and the sign-changing (higher eigenvalue) residual switches branches with the
sign of u, using a dead band proportional to one lattice cell of Hoelder
variation to classify "u = 0" nodes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .geometry import (
    GridDomain,
    GridFunction,
    Interval,
    NodeSet,
    distance_to_complement,
    distance_to_set,
    high_ridge,
    inscribed_radius,
)

__all__ = [
    "InfinityReport",
    "linf_plus",
    "linf_minus",
    "linf_minus_analytic",
    "first_residual",
    "higher_residual",
    "representation",
    "cone",
    "lambda_infinity",
    "r2_radius",
    "holder_seminorm",
]

_CHUNK = 64
EXTERIOR_WITNESS = -1  # witness index marking the analytic beyond-the-box candidate

# branch labels stored per node
BRANCH_OPERATOR = "op"     # the full-operator branch l_plus + l_minus attains the max
BRANCH_EIGEN = "eig"       # the eigen-balance branch attains it
BRANCH_ZERO = "zero"       # node classified as u = 0 (dead band)


def _box_boundary_distance(dom: GridDomain, coords: np.ndarray) -> np.ndarray:
    lo, hi = dom.box_lo, dom.box_hi
    return np.minimum(coords - lo[None, :], hi[None, :] - coords).min(axis=1)


def _extreme_quotients(u: GridFunction, alpha: float, base: np.ndarray,
                       include_exterior: bool) -> Tuple[np.ndarray, ...]:
    """Max/min Hoelder quotients (and witnesses) over the lattice for each base node."""
    dom = u.domain
    coords = dom.node_coords
    vals = u.flat()
    base = np.asarray(base, dtype=np.int64)
    bc = coords[base]
    bv = vals[base]

    n = base.size
    l_plus = np.empty(n)
    w_plus = np.empty(n, dtype=np.int64)
    l_minus = np.empty(n)
    w_minus = np.empty(n, dtype=np.int64)

    for k0 in range(0, n, _CHUNK):
        sl = slice(k0, min(k0 + _CHUNK, n))
        blk = bc[sl]
        d = np.sqrt(((blk[:, None, :] - coords[None, :, :]) ** 2).sum(-1))
        rows = np.arange(sl.stop - sl.start)
        d[rows, base[sl]] = np.inf  # exclude y = x
        quot = (vals[None, :] - bv[sl, None]) / d ** alpha
        quot[rows, base[sl]] = -np.inf
        l_plus[sl] = quot.max(axis=1)
        w_plus[sl] = quot.argmax(axis=1)
        quot[rows, base[sl]] = np.inf
        l_minus[sl] = quot.min(axis=1)
        w_minus[sl] = quot.argmin(axis=1)

    if include_exterior and u.zero_extended:
        dbox = _box_boundary_distance(dom, bc)
        cand = -bv / dbox ** alpha
        up = cand > l_plus
        l_plus = np.where(up, cand, l_plus)
        w_plus = np.where(up, EXTERIOR_WITNESS, w_plus)
        dn = cand < l_minus
        l_minus = np.where(dn, cand, l_minus)
        w_minus = np.where(dn, EXTERIOR_WITNESS, w_minus)

    return l_plus, w_plus, l_minus, w_minus


def linf_plus(u: GridFunction, alpha: float, x: int) -> Tuple[float, int]:
    """Sup of the alpha-quotient at node x; returns (value, witness index).

    Witness -1 means the analytic exterior candidate beyond the box won.
    """
    _check_alpha(alpha)
    lp, wp, _, _ = _extreme_quotients(u, alpha, np.array([int(x)]),
                                      include_exterior=True)
    return float(lp[0]), int(wp[0])


def linf_minus(u: GridFunction, alpha: float, x: int) -> Tuple[float, int]:
    """Inf of the alpha-quotient at node x; returns (value, witness index)."""
    _check_alpha(alpha)
    _, _, lm, wm = _extreme_quotients(u, alpha, np.array([int(x)]),
                                      include_exterior=True)
    return float(lm[0]), int(wm[0])


def linf_minus_analytic(u: GridFunction, delta: GridFunction, alpha: float,
                        x: int) -> float:
    """-u(x) / delta(x)^alpha: the infimum a nonnegative zero-extended function
    attains in the complement of the region."""
    _check_alpha(alpha)
    x = int(x)
    dx = delta.flat()[x]
    if not (dx > 0.0):
        raise RuntimeError(f"distance vanishes at node {x}; not an inside node?")
    return float(-u.flat()[x] / dx ** alpha)


def _check_alpha(alpha: float) -> None:
    if not (0.0 < alpha <= 1.0):
        raise ValueError(f"alpha must lie in (0, 1], got {alpha}")


def holder_seminorm(u: GridFunction, alpha: float) -> float:
    """Discrete alpha-Hoelder seminorm: max quotient over node pairs.

    Pairs with both values zero contribute nothing, so scanning (nonzero node,
    any node) pairs is exact.
    """
    _check_alpha(alpha)
    nz = np.flatnonzero(u.flat())
    if nz.size == 0:
        return 0.0
    lp, _, lm, _ = _extreme_quotients(u, alpha, nz, include_exterior=False)
    return float(max(lp.max(), -lm.min(), 0.0))


# ---------------------------------------------------------------------------
# residual reports
# ---------------------------------------------------------------------------


@dataclass(eq=False)
class InfinityReport:
    """Per-inside-node evaluation of the limiting eigenvalue equation."""

    domain: GridDomain
    alpha: float
    lam: float
    nodes: np.ndarray            # flat indices of inside nodes
    u: np.ndarray
    delta: np.ndarray
    l_plus: np.ndarray
    witness_plus: np.ndarray
    l_minus: np.ndarray
    witness_minus: np.ndarray
    l_minus_analytic: np.ndarray
    branch: np.ndarray           # per-node label, see BRANCH_* constants
    residual: np.ndarray

    @property
    def interior_mask(self) -> np.ndarray:
        """Nodes deeper than the 2h boundary collar."""
        return self.delta > 2.0 * self.domain.h

    def sup_norm(self, exclude_collar: bool = False) -> float:
        r = np.abs(self.residual)
        if exclude_collar:
            r = r[self.interior_mask]
        return float(r.max()) if r.size else 0.0

    def worst_node(self, exclude_collar: bool = False) -> int:
        r = np.abs(self.residual)
        idx = self.nodes
        if exclude_collar:
            keep = self.interior_mask
            r, idx = r[keep], idx[keep]
        return int(idx[np.argmax(r)]) if r.size else -1

    def summary(self) -> dict:
        return {
            "alpha": self.alpha,
            "lambda": self.lam,
            "nodes": int(self.nodes.size),
            "sup_residual": self.sup_norm(),
            "sup_residual_interior": self.sup_norm(exclude_collar=True),
            "worst_node": self.worst_node(),
            "worst_node_interior": self.worst_node(exclude_collar=True),
        }

    def rows(self):
        """Per-node tuples for CSV export (coords, values, witnesses, branch)."""
        coords = self.domain.node_coords[self.nodes]
        for k in range(self.nodes.size):
            yield (
                int(self.nodes[k]),
                *(float(c) for c in coords[k]),
                float(self.u[k]),
                float(self.delta[k]),
                float(self.l_plus[k]),
                int(self.witness_plus[k]),
                float(self.l_minus[k]),
                int(self.witness_minus[k]),
                float(self.l_minus_analytic[k]),
                str(self.branch[k]),
                float(self.residual[k]),
            )


def _report_core(u: GridFunction, alpha: float, delta: GridFunction):
    dom = u.domain
    if delta.domain is not dom and not dom.same_lattice(delta.domain):
        raise ValueError("distance function lives on a different lattice")
    nodes = dom.inside_indices
    uin = u.flat()[nodes]
    din = delta.flat()[nodes]
    if np.any(din <= 0.0):
        raise RuntimeError("distance must be positive at inside nodes")
    lp, wp, lm, wm = _extreme_quotients(u, alpha, nodes, include_exterior=True)
    lma = -uin / din ** alpha
    return nodes, uin, din, lp, wp, lm, wm, lma


def first_residual(u: GridFunction, alpha: float, lam: float,
                   delta: GridFunction) -> InfinityReport:
    """Residual of max{ l_plus + l_minus, l_minus + lam*u } = 0 for u >= 0."""
    _check_alpha(alpha)
    if not u.zero_extended:
        raise ValueError("first_residual expects a zero-extended function")
    nodes, uin, din, lp, wp, lm, wm, lma = _report_core(u, alpha, delta)
    if np.any(uin < 0.0):
        raise ValueError("first_residual expects a nonnegative function")
    op = lp + lm
    eig = lm + lam * uin
    residual = np.maximum(op, eig)
    branch = np.where(op >= eig, BRANCH_OPERATOR, BRANCH_EIGEN)
    return InfinityReport(domain=u.domain, alpha=alpha, lam=lam, nodes=nodes,
                          u=uin, delta=din, l_plus=lp, witness_plus=wp,
                          l_minus=lm, witness_minus=wm, l_minus_analytic=lma,
                          branch=branch.astype("U8"), residual=residual)


def higher_residual(u: GridFunction, alpha: float, lam: float,
                    delta: GridFunction, band_scale: float = 1.0) -> InfinityReport:
    """Residual of the sign-switching eigenvalue equation.

    Branches: where u > 0 the first-eigenvalue max-branch applies; where u < 0
    the mirrored min{ l_plus + l_minus, l_plus + lam*u }; nodes with |u| below
    the dead band count as u = 0 and must satisfy l_plus + l_minus = 0.  The
    dead band is band_scale * h^alpha * [u]_alpha, one lattice cell's worth of
    Hoelder variation, so it vanishes under refinement.
    """
    _check_alpha(alpha)
    if not u.zero_extended:
        raise ValueError("higher_residual expects a zero-extended function")
    if band_scale < 0.0:
        raise ValueError("band_scale must be >= 0")
    nodes, uin, din, lp, wp, lm, wm, lma = _report_core(u, alpha, delta)
    band = band_scale * u.domain.h ** alpha * holder_seminorm(u, alpha)

    op = lp + lm
    pos_eig = lm + lam * uin
    neg_eig = lp + lam * uin

    residual = np.empty_like(uin)
    branch = np.empty(uin.shape, dtype="U8")

    zero = np.abs(uin) <= band
    pos = (uin > 0.0) & ~zero
    neg = (uin < 0.0) & ~zero

    residual[zero] = op[zero]
    branch[zero] = BRANCH_ZERO
    residual[pos] = np.maximum(op[pos], pos_eig[pos])
    branch[pos] = np.where(op[pos] >= pos_eig[pos], BRANCH_OPERATOR, BRANCH_EIGEN)
    residual[neg] = np.minimum(op[neg], neg_eig[neg])
    branch[neg] = np.where(op[neg] <= neg_eig[neg], BRANCH_OPERATOR, BRANCH_EIGEN)

    return InfinityReport(domain=u.domain, alpha=alpha, lam=lam, nodes=nodes,
                          u=uin, delta=din, l_plus=lp, witness_plus=wp,
                          l_minus=lm, witness_minus=wm, l_minus_analytic=lma,
                          branch=branch, residual=residual)


# ---------------------------------------------------------------------------
# closed-form objects
# ---------------------------------------------------------------------------


def representation(dom: GridDomain, gamma1: NodeSet, alpha: float) -> GridFunction:
    """First eigenfunction of the limiting equation built from distances.

    u = delta^alpha / (delta^alpha + rho^alpha), where delta is the distance to
    the complement and rho the distance to the chosen closed subset of the
    ridge.  Equals 1 exactly on the subset, lies in (0, 1] inside, 0 outside.
    """
    _check_alpha(alpha)
    delta = distance_to_complement(dom)
    r = inscribed_radius(delta)
    ridge_tol = dom.h / 2.0
    dsub = delta.flat()[gamma1.indices]
    if np.any(dsub < r - ridge_tol - 1e-12 * max(1.0, r)):
        raise ValueError("gamma1 contains nodes outside the ridge tolerance")
    rho = distance_to_set(dom, gamma1)
    da = delta.flat() ** alpha
    ra = rho.flat() ** alpha
    vals = np.where(dom.inside_flat, da / (da + ra), 0.0)
    return GridFunction(dom, vals.reshape(dom.lattice_shape))


def cone(dom: GridDomain, x0: int, radius: float, alpha: float,
         eps: Optional[float] = None) -> GridFunction:
    """Truncated comparison cone centered at lattice node x0 (not zero-extended).

    alpha < 1: C = min(|x-x0|^alpha, radius^alpha).
    alpha = 1: C = min(|x-x0| - eps|x-x0|^2, radius - eps*radius^2) with
    eps*radius < 1 (default eps = 1/(4*radius)).
    """
    _check_alpha(alpha)
    if not (radius > 0.0):
        raise ValueError(f"radius must be positive, got {radius}")
    x0 = int(x0)
    coords = dom.node_coords
    r = np.sqrt(((coords - coords[x0][None, :]) ** 2).sum(axis=1))
    if alpha < 1.0:
        vals = np.minimum(r ** alpha, radius ** alpha)
    else:
        if eps is None:
            eps = 1.0 / (4.0 * radius)
        if not (0.0 < eps * radius < 1.0):
            raise ValueError(f"need 0 < eps*radius < 1, got eps*radius = {eps * radius}")
        vals = np.minimum(r - eps * r ** 2, radius - eps * radius ** 2)
    return GridFunction(dom, vals.reshape(dom.lattice_shape), zero_extended=False)


def lambda_infinity(dom: GridDomain, alpha: float) -> float:
    """Limiting first eigenvalue: (inscribed radius)^(-alpha)."""
    _check_alpha(alpha)
    r = inscribed_radius(distance_to_complement(dom))
    return float(r ** (-alpha))


def r2_radius(dom: GridDomain) -> float:
    """Largest radius such that two disjoint balls of that radius fit inside.

    Canonical intervals get the exact value (b - a) / 4; other domains get a
    grid search over inside-node pairs maximizing
    min(delta(x), delta(y), |x - y| / 2).
    """
    tag = dom.shape_tag
    if isinstance(tag, Interval):
        return (tag.b - tag.a) / 4.0
    delta = distance_to_complement(dom).flat()[dom.inside_indices]
    pts = dom.inside_coords
    best = 0.0
    for k0 in range(0, pts.shape[0], _CHUNK):
        blk = slice(k0, min(k0 + _CHUNK, pts.shape[0]))
        d = 0.5 * np.sqrt(((pts[blk, None, :] - pts[None, :, :]) ** 2).sum(-1))
        cap = np.minimum(np.minimum(delta[blk, None], delta[None, :]), d)
        best = max(best, float(cap.max()))
    return best
