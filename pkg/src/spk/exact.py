"""Ground truth: L^p distances and exact mixing times from dense heat kernels.

Reversible chains get a fast path through the cached symmetric
eigendecomposition: the worst-start uniform distance equals the diagonal
excess sup_x h_t(x,x) - 1 = sum_i exp(-t*lambda_i) psi_i(x)^2, which is
monotone in t, so bisection is sound.  Non-reversible chains are measured
by uniformization snapshots on a grid with refinement, plus a certification
rescan because monotonicity is not assumed there.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from .chain import heat_kernel, symmetric_decomposition
from .errors import (
    DimensionMismatch,
    NoConvergenceInWindow,
    Periodic,
    ValidationFailed,
)
from .profiles import spectral_gap


def lp_distance(mu, nu, pi, p):
    """L^p(pi) distance between the densities of two measures.

    For p = 1 this is twice the total-variation distance.
    """
    mu = np.asarray(mu, dtype=float)
    nu = np.asarray(nu, dtype=float)
    pi = np.asarray(pi, dtype=float)
    if not mu.shape == nu.shape == pi.shape:
        raise DimensionMismatch(
            f"shapes {mu.shape}, {nu.shape}, {pi.shape} differ")
    diff = mu / pi - nu / pi
    if p == np.inf or p == "inf":
        return float(np.max(np.abs(diff)))
    p = float(p)
    if p < 1:
        raise ValidationFailed(f"p={p!r} must be >= 1")
    return float(np.dot(pi, np.abs(diff) ** p) ** (1.0 / p))


@dataclass(frozen=True)
class DistanceCurve:
    """Worst-start L^p distance to stationarity on a time grid."""

    times: np.ndarray
    values: np.ndarray
    p: object

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if np.any(np.diff(t) <= 0):
            raise ValidationFailed("time grid must be increasing")
        t.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", v)

    def csv(self):
        lines = ["t,value"]
        for t, v in zip(self.times, self.values):
            lines.append(f"{t!r},{v!r}")
        return "\n".join(lines) + "\n"


class _ReversibleDistance:
    """Closed-form worst-start distances via the spectral representation."""

    def __init__(self, chain):
        dec = symmetric_decomposition(chain)
        stationary = int(np.argmin(dec.rates))
        mask = np.ones(chain.n, dtype=bool)
        mask[stationary] = False
        psi = dec.eigenfunctions()
        self.psi2 = psi[:, mask] ** 2
        self.rates = dec.rates[mask]
        self.chain = chain

    def diag_excess(self, t):
        """sup_x h_t(x,x) - 1."""
        return float(np.max(self.psi2 @ np.exp(-t * self.rates)))

    def dist(self, t, p):
        if p == np.inf:
            return self.diag_excess(t)
        if p == 2:
            return float(np.sqrt(self.diag_excess(2.0 * t)))
        # p = 1: build the kernel row densities at time t
        snap = heat_kernel(self.chain, t)
        dev = np.abs(snap.density - 1.0)
        return float(np.max(dev @ self.chain.pi))


def _distance_from_snapshot(snap, pi, p):
    dev = snap.density - 1.0
    if p == np.inf:
        return float(np.max(np.abs(dev)))
    return float(np.max((np.abs(dev) ** p @ pi) ** (1.0 / p)))


def _normalize_p(p):
    if p in ("inf", "oo", np.inf):
        return np.inf
    p = float(p)
    if p not in (1.0, 2.0):
        raise ValidationFailed(f"p={p!r}: supported values are 1, 2, inf")
    return int(p)


def worst_start_distance(chain, t, p):
    """sup over starting states of the L^p distance at time t."""
    p = _normalize_p(p)
    if chain.reversible:
        return _ReversibleDistance(chain).dist(t, p)
    return _distance_from_snapshot(heat_kernel(chain, t), chain.pi, p)


def exact_tau(chain, p, eps, mode="continuous", rel_tol=1e-8,
              max_steps=None):
    """Exact L^p mixing time.

    Continuous mode: geometric bracketing plus bisection to relative
    ``rel_tol``; the reversible uniform/L2 paths use the monotone spectral
    form, non-reversible chains get a grid scan with refinement and a
    certification rescan on a doubled window.  Discrete mode: the smallest
    step count, with Periodic raised when the support graph is periodic.
    """
    p = _normalize_p(p)
    if eps <= 0:
        raise ValidationFailed(f"eps={eps!r} must be positive")
    if mode == "continuous":
        return _exact_tau_continuous(chain, p, eps, rel_tol)
    if mode == "discrete":
        return _exact_tau_discrete(chain, p, eps, max_steps)
    raise ValidationFailed(f"unknown mode {mode!r}")


def _exact_tau_continuous(chain, p, eps, rel_tol):
    if chain.reversible:
        rd = _ReversibleDistance(chain)
        dist = lambda t: rd.dist(t, p)
    else:
        dist = lambda t: _distance_from_snapshot(heat_kernel(chain, t),
                                                 chain.pi, p)
    if dist(0.0) <= eps:
        return 0.0
    gap = spectral_gap(chain)
    hi = 1.0 / gap
    while dist(hi) > eps:
        hi *= 2.0
        if hi > 1e8 / gap:
            raise NoConvergenceInWindow(f"distance still above {eps!r}")
    lo = 0.0
    while hi - lo > rel_tol * hi:
        mid = 0.5 * (lo + hi)
        if dist(mid) > eps:
            lo = mid
        else:
            hi = mid
    if not chain.reversible:
        # uniform distance is not assumed monotone here: certify on a
        # doubled window around the candidate
        ts = np.linspace(hi, 2.0 * hi, 64)
        vals = np.array([dist(t) for t in ts])
        if np.any(vals > eps):
            warnings.warn("non-monotone distance past the candidate; "
                          "rescanning", stacklevel=2)
            bad = np.nonzero(vals > eps)[0][-1]
            lo = ts[bad]
            hi = 2.0 * hi
            while dist(hi) > eps:
                hi *= 2.0
            while hi - lo > rel_tol * hi:
                mid = 0.5 * (lo + hi)
                if dist(mid) > eps:
                    lo = mid
                else:
                    hi = mid
    return float(hi)


def chain_period(chain):
    """Period of the (irreducible) support graph via BFS level differences."""
    from collections import deque

    support = chain.support
    n = chain.n
    level = np.full(n, -1)
    level[0] = 0
    queue = deque([0])
    g = 0
    while queue:
        u = queue.popleft()
        for v in np.nonzero(support[u])[0]:
            if level[v] < 0:
                level[v] = level[u] + 1
                queue.append(int(v))
            else:
                g = np.gcd(g, level[u] + 1 - level[v])
    return int(abs(g)) if g != 0 else 0


def _exact_tau_discrete(chain, p, eps, max_steps):
    period = chain_period(chain)
    if period != 1:
        raise Periodic(f"support graph has period {period}")
    gap = spectral_gap(chain)
    cap = max_steps if max_steps is not None else int(200 / gap) + 1000
    Km = np.eye(chain.n)
    for m in range(cap + 1):
        dev = Km / chain.pi[None, :] - 1.0
        if p == np.inf:
            d = np.max(np.abs(dev))
        else:
            d = np.max((np.abs(dev) ** p @ chain.pi) ** (1.0 / p))
        if d <= eps:
            return m
        Km = Km @ chain.K
    raise NoConvergenceInWindow(f"no step count within {cap} reached {eps!r}")


def default_time_grid(chain, points_per_decade=64):
    """Log grid from 1e-3/gap to 20/gap."""
    gap = spectral_gap(chain)
    lo, hi = 1e-3 / gap, 20.0 / gap
    decades = np.log10(hi / lo)
    return np.geomspace(lo, hi, int(points_per_decade * decades) + 1)


def distance_curve(chain, p, times=None):
    """Worst-start L^p distance swept over a time grid."""
    p = _normalize_p(p)
    ts = np.asarray(times, dtype=float) if times is not None \
        else default_time_grid(chain)
    if chain.reversible:
        rd = _ReversibleDistance(chain)
        vals = np.array([rd.dist(t, p) for t in ts])
    else:
        vals = np.array([
            _distance_from_snapshot(heat_kernel(chain, t), chain.pi, p)
            for t in ts
        ])
    return DistanceCurve(times=ts, values=vals, p=p)


def diag_excess_curve(chain, times):
    """sup_x h_t(x,x) - 1 on a grid (reversible fast path)."""
    rd = _ReversibleDistance(chain)
    return np.array([rd.diag_excess(t) for t in times])
