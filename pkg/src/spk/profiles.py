"""Whole-chain profiles: spectral and conductance profiles plus the lower
envelopes generated by volume growth, local Poincare, log-Sobolev and Nash
inequalities.

Profiles are right-continuous step functions of the mass budget r: between
breakpoints the value at the breakpoint to the left applies, matching the
"infimum over sets of mass <= r" semantics.  The exact spectral profile is
reported as a band [bottom-eigenvalue profile, refined upper profile]
because the subset Rayleigh infimum itself is only bracketed; bound
consumers take the band's lower edge max-ed with the spectral gap, which
stays a certified lower bound of the true profile.
"""

import os
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .chain import additive_symmetrization, dirichlet_form, variance
from .errors import EigensolveFailure, TooLarge, ValidationFailed
from .subsets import (
    VariationalOptions,
    dirichlet_eigenvalue,
    rayleigh_minimize,
    subset,
)

ENUMERATION_CAP = 20
ARGMIN_CAP = 32
MASS_TIE_TOL = 1e-15

KINDS = ("exact", "lower_envelope", "upper_envelope")
SOURCES = ("enumeration", "cheeger", "volume", "poincare", "logsob", "nash",
           "test_function")


def worker_count():
    """Worker pool size; the SPK_THREADS env var overrides (default serial)."""
    try:
        return max(1, int(os.environ.get("SPK_THREADS", "1")))
    except ValueError:
        return 1


@dataclass(frozen=True)
class StepProfile:
    """Right-continuous step function r -> value with provenance.

    ``values[i]`` applies on [breakpoints[i], breakpoints[i+1]); the last
    value extends to infinity.  Queries below the first breakpoint evaluate
    from the first breakpoint.
    """

    breakpoints: np.ndarray
    values: np.ndarray
    kind: str
    source: str

    def __post_init__(self):
        bp = np.asarray(self.breakpoints, dtype=float)
        vals = np.asarray(self.values, dtype=float)
        if bp.ndim != 1 or bp.shape != vals.shape or bp.size == 0:
            raise ValidationFailed("profile needs matching 1-d breakpoints/values")
        if np.any(np.diff(bp) <= 0):
            raise ValidationFailed("profile breakpoints must be increasing")
        if self.kind not in KINDS:
            raise ValidationFailed(f"unknown profile kind {self.kind!r}")
        if self.source not in SOURCES:
            raise ValidationFailed(f"unknown profile source {self.source!r}")
        bp.setflags(write=False)
        vals.setflags(write=False)
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "values", vals)

    def __call__(self, r):
        # queries get a relative epsilon so breakpoints landing a few ulps
        # past their exact mass still count as reached (right-continuity
        # under float fuzz); for non-increasing profiles this rounds toward
        # the smaller, conservative value
        r = np.asarray(r, dtype=float)
        r_eff = r + 1e-12 * np.maximum(np.abs(r), 1.0)
        i = np.clip(
            np.searchsorted(self.breakpoints, r_eff, side="right") - 1, 0,
            None,
        )
        out = self.values[i]
        return float(out) if out.ndim == 0 else out

    def is_nonincreasing(self, tol=1e-12):
        return bool(np.all(np.diff(self.values) <= tol))

    def transform(self, fn, kind=None, source=None):
        vals = np.array([fn(r, v) for r, v in
                         zip(self.breakpoints, self.values)])
        return StepProfile(self.breakpoints, vals, kind or self.kind,
                           source or self.source)

    def floored_at(self, floor):
        """Pointwise max with a constant (spectral-gap flooring)."""
        return StepProfile(self.breakpoints,
                           np.maximum(self.values, floor),
                           self.kind, self.source)

    def truncated_at_half(self):
        """Freeze the profile at its value at 1/2 for r >= 1/2."""
        v_half = self(0.5)
        keep = self.breakpoints < 0.5
        if not keep.any():
            return StepProfile(np.array([self.breakpoints[0]]),
                               np.array([self.values[0]]),
                               self.kind, self.source)
        bp = np.append(self.breakpoints[keep], 0.5)
        vals = np.append(self.values[keep], v_half)
        return StepProfile(bp, vals, self.kind, self.source)

    def csv_rows(self):
        return [(float(r), float(v), self.kind, self.source)
                for r, v in zip(self.breakpoints, self.values)]

    def to_json(self):
        return {
            "breakpoints": [float(r) for r in self.breakpoints],
            "values": [float(v) for v in self.values],
            "kind": self.kind,
            "source": self.source,
        }


def _running_min_profile(pairs, kind, source):
    """Step profile from (mass, value) pairs: cumulative min over mass order."""
    pairs = sorted(pairs, key=lambda p: p[0])
    if not pairs:
        raise ValidationFailed("no profile points")
    bps, vals = [], []
    best = np.inf
    for m, v in pairs:
        best = min(best, v)
        if bps and m <= bps[-1] + MASS_TIE_TOL:
            vals[-1] = best
        else:
            bps.append(m)
            vals.append(best)
    return StepProfile(np.array(bps), np.array(vals), kind, source)


def merge_max(profiles, source=None):
    """Pointwise maximum of lower envelopes (still a valid lower envelope)."""
    profiles = [p for p in profiles if p is not None]
    if not profiles:
        raise ValidationFailed("nothing to merge")
    bps = np.unique(np.concatenate([p.breakpoints for p in profiles]))
    vals = np.max(np.stack([p(bps) for p in profiles]), axis=0)
    return StepProfile(bps, vals, "lower_envelope",
                       source or profiles[0].source)


def profile_csv(profiles):
    lines = ["r,value,kind,source"]
    for p in profiles if isinstance(profiles, (list, tuple)) else [profiles]:
        for r, v, kind, source in p.csv_rows():
            lines.append(f"{r!r},{v!r},{kind},{source}")
    return "\n".join(lines) + "\n"


# -- spectral gap --------------------------------------------------------------

def spectral_gap(chain):
    """Second-smallest eigenvalue of the symmetrized Laplacian in L2(pi)."""
    s = np.sqrt(chain.pi)
    A = additive_symmetrization(chain)
    M = (s[:, None] * A) / s[None, :]
    M = (M + M.T) / 2.0
    try:
        w = scipy.linalg.eigvalsh(M)
    except scipy.linalg.LinAlgError as e:
        raise EigensolveFailure(str(e)) from e
    gap = float(1.0 - w[-2])
    if gap <= 0:
        raise EigensolveFailure(f"nonpositive spectral gap {gap!r}")
    return gap


# -- subset enumeration --------------------------------------------------------

def connected_subsets(chain, max_mass, cap=ENUMERATION_CAP):
    """All connected subsets with mass <= max_mass, each exactly once.

    Include/exclude recursion on the undirected support graph, rooted at
    each vertex as the set's minimum: a frontier vertex is either added or
    banned from the remaining subtree.  The include branch is mass-pruned.
    """
    if chain.n > cap:
        raise TooLarge(f"n={chain.n} exceeds enumeration cap {cap}")
    adj = chain.undirected_adjacency()
    neighbors = [frozenset(np.nonzero(adj[v])[0].tolist())
                 for v in range(chain.n)]
    pi = chain.pi
    budget = max_mass + 1e-12  # absorb float fuzz in solved masses
    out = []

    def grow(members, mass, frontier, banned):
        out.append(tuple(sorted(members)))
        for u in sorted(frontier):
            if u in banned:
                continue
            if mass + pi[u] <= budget:
                grow(members | {u}, mass + pi[u],
                     (frontier | neighbors[u]) - members - {u},
                     banned)
            banned = banned | {u}

    for v in range(chain.n):
        if pi[v] > budget:
            continue
        grow({v}, float(pi[v]), neighbors[v], frozenset(range(v + 1)))
    return out


def all_subsets(chain, max_mass, cap=ENUMERATION_CAP):
    """Every non-empty subset with mass <= max_mass (oracle mode)."""
    if chain.n > cap:
        raise TooLarge(f"n={chain.n} exceeds enumeration cap {cap}")
    out = []
    pi = chain.pi
    budget = max_mass + 1e-12
    for bits in range(1, 1 << chain.n):
        idx = tuple(i for i in range(chain.n) if bits >> i & 1)
        if pi[list(idx)].sum() <= budget:
            out.append(idx)
    return out


# -- exact spectral profile ------------------------------------------------------

@dataclass(frozen=True)
class SpectralProfileBand:
    """Exact-enumeration output: bottom-eigenvalue profile and refined upper.

    ``lower`` is the exact profile of subset bottom eigenvalues (a certified
    lower bracket of the spectral profile), ``upper`` the bracket upper edge
    refined by variational estimates on the minimizing sets.  ``argmins``
    lists the minimizing sets per breakpoint, capped at 32.
    """

    lower: StepProfile
    upper: StepProfile
    argmins: tuple
    r_max: float
    spectral_gap: float

    def bound_input(self):
        """Certified lower bound of the spectral profile for bound consumers:
        the band's lower edge floored at the spectral gap."""
        return self.lower.floored_at(self.spectral_gap)


def spectral_profile_exhaustive(chain, r_max=np.inf, cap=ENUMERATION_CAP,
                                mode="connected", refine=True, opts=None):
    """Enumerate subsets and assemble the spectral-profile band.

    Only connected sets are eigensolved in the default mode (the infimum
    decomposes over connected components); ``mode="exhaustive"`` enumerates
    every subset, as a cross-check oracle.  Breakpoints sit at the achieved
    masses up to min(r_max, largest proper mass).
    """
    proper_cap = 1.0 - 0.5 * chain.pi_star
    budget = float(min(r_max, proper_cap))
    if mode == "connected":
        sets = connected_subsets(chain, budget, cap=cap)
    elif mode == "exhaustive":
        sets = all_subsets(chain, budget, cap=cap)
    else:
        raise ValidationFailed(f"unknown enumeration mode {mode!r}")
    if not sets:
        raise ValidationFailed("no subsets within the mass budget")

    pi = chain.pi
    masses = np.array([pi[list(s)].sum() for s in sets])
    nworkers = worker_count()
    if nworkers > 1:
        with ThreadPoolExecutor(max_workers=nworkers) as pool:
            lam0s = np.fromiter(
                pool.map(lambda s: dirichlet_eigenvalue(chain, s), sets),
                dtype=float, count=len(sets))
    else:
        lam0s = np.array([dirichlet_eigenvalue(chain, s) for s in sets])
    uppers = lam0s / (1.0 - masses)

    order = np.argsort(masses, kind="stable")
    bps, lo_vals, up_vals, argmins = [], [], [], []
    best_lo = best_up = np.inf
    current_arg = []
    for i in order:
        m = masses[i]
        best_lo = min(best_lo, lam0s[i])
        if uppers[i] < best_up - 1e-15:
            best_up = uppers[i]
            current_arg = [sets[i]]
        elif uppers[i] <= best_up + 1e-15 and len(current_arg) < ARGMIN_CAP:
            current_arg.append(sets[i])
        if bps and m <= bps[-1] + MASS_TIE_TOL:
            lo_vals[-1], up_vals[-1] = best_lo, best_up
            argmins[-1] = tuple(current_arg)
        else:
            bps.append(m)
            lo_vals.append(best_lo)
            up_vals.append(best_up)
            argmins.append(tuple(current_arg))

    if refine:
        vop = opts or VariationalOptions(restarts=6, max_iters=200)
        unique_args = {}
        for j in range(len(bps)):
            for s in argmins[j]:
                unique_args.setdefault(s, float(pi[list(s)].sum()))
        refined = [(mass, rayleigh_minimize(chain, s, opts=vop).value)
                   for s, mass in unique_args.items()]
        refined.sort()
        k, running = 0, np.inf
        for j in range(len(bps)):
            while k < len(refined) and refined[k][0] <= bps[j] + MASS_TIE_TOL:
                running = min(running, refined[k][1])
                k += 1
            up_vals[j] = min(up_vals[j], running)

    gap = spectral_gap(chain)
    # past mass 1/2 the profile is capped at twice the gap; this also
    # extends a truncated upper band without enumerating large sets
    up_bps = list(bps)
    tail_r = max(0.5, bps[-1] * (1.0 + 1e-12))
    up_bps.append(tail_r)
    up_vals = list(up_vals) + [min(up_vals[-1], 2.0 * gap)]

    lower = StepProfile(np.array(bps), lo_vals, "exact", "enumeration")
    upper = StepProfile(np.array(up_bps), up_vals, "upper_envelope",
                        "enumeration")
    return SpectralProfileBand(lower=lower, upper=upper,
                               argmins=tuple(argmins), r_max=budget,
                               spectral_gap=gap)


# -- conductance ----------------------------------------------------------------

def conductance_profile(chain, cap=ENUMERATION_CAP):
    """Exact conductance profile (Phi, truncated Phi*).

    The infimum of boundary/mass restricts to connected sets: a disconnected
    set's ratio is at least the minimum over its components.
    """
    proper_cap = 1.0 - 0.5 * chain.pi_star
    sets = connected_subsets(chain, proper_cap, cap=cap)
    pi = chain.pi
    Q = pi[:, None] * chain.K
    pairs = []
    for s in sets:
        mask = np.zeros(chain.n, dtype=bool)
        mask[list(s)] = True
        m = pi[mask].sum()
        pairs.append((m, Q[np.ix_(mask, ~mask)].sum() / m))
    phi = _running_min_profile(pairs, "exact", "enumeration")
    return phi, phi.truncated_at_half()


def conductance_sweep_upper(chain, num_vectors=3):
    """Heuristic (upper-envelope) conductance profile for large chains.

    Sweep cuts along orderings by the bottom symmetric eigenvectors.  The
    result over-estimates the true infimum and must never feed mixing
    bounds; it exists as a diagnostic past the enumeration cap.
    """
    s = np.sqrt(chain.pi)
    A = additive_symmetrization(chain)
    M = (s[:, None] * A) / s[None, :]
    M = (M + M.T) / 2.0
    _, V = scipy.linalg.eigh(M)
    pi = chain.pi
    Q = pi[:, None] * chain.K
    pairs = []
    for j in range(min(chain.n - 1, num_vectors)):
        order = np.argsort(V[:, -2 - j] / s)
        mask = np.zeros(chain.n, dtype=bool)
        mass = 0.0
        for v in order[:-1]:
            mask[v] = True
            mass += pi[v]
            pairs.append((mass, Q[np.ix_(mask, ~mask)].sum() / mass))
    return _running_min_profile(pairs, "upper_envelope", "enumeration")


def min_edge_flow(chain):
    """Q_* = min over adjacent pairs of pi(x)K(x,y) + pi(y)K(y,x)."""
    Q = chain.pi[:, None] * chain.K
    sym = Q + Q.T
    np.fill_diagonal(sym, np.inf)
    positive = sym[sym > 1e-300]
    return float(positive[np.isfinite(positive)].min())


def conductance_lower_envelope(chain, grid_points=129):
    """Certified lower envelope Phi(r) >= Q_*/(2 r), valid at every size.

    A proper set has at least one boundary pair; the symmetrized flow over a
    single pair is at least Q_*, of which the directed boundary carries
    half.  Returns (phi_envelope, truncated phi*).
    """
    qstar = min_edge_flow(chain)
    bps = np.geomspace(chain.pi_star, 1.0, grid_points)
    rights = np.append(bps[1:], 1.0)
    vals = qstar / (2.0 * rights)
    phi = StepProfile(bps, vals, "lower_envelope", "volume")
    return phi, phi.truncated_at_half()


def cheeger_envelopes(phi):
    """Spectral-profile envelopes from a conductance profile.

    Lower: Phi^2/2 (valid from exact or lower-envelope Phi).  Upper:
    Phi/(1-r), emitted only when Phi is exact; an upper envelope of Phi
    cannot certify either direction, so it is rejected.
    """
    if phi.kind == "upper_envelope":
        raise ValidationFailed("cheeger transforms need exact or lower Phi")
    lower = phi.transform(lambda r, v: v * v / 2.0,
                          kind="lower_envelope", source="cheeger")
    upper = None
    if phi.kind == "exact":
        upper = phi.transform(
            lambda r, v: v / (1.0 - r) if r < 1.0 else np.inf,
            kind="upper_envelope", source="cheeger")
    return lower, upper


# -- volume growth ---------------------------------------------------------------

@dataclass(frozen=True)
class GrowthData:
    """Ball-volume tables of the chain's graph.

    ``V[x, r]`` is the stationary mass of the closed ball B(x, r) for
    integer radii 0..diameter; ``V_star`` its minimum over centers.
    """

    V: np.ndarray
    V_star: np.ndarray
    diameter: int
    distances: np.ndarray

    def w(self, r):
        """inf{k : V_*(k) > r}; +inf when no radius qualifies."""
        idx = np.searchsorted(self.V_star, r, side="right")
        return int(idx) if idx <= self.diameter else np.inf

    def W(self, v):
        """inf{k : V_*(k) >= v}; +inf when v exceeds total mass."""
        idx = np.searchsorted(self.V_star, v, side="left")
        return int(idx) if idx <= self.diameter else np.inf


def growth_data(chain):
    """BFS from every vertex of the chain's undirected graph."""
    adj = chain.undirected_adjacency()
    neighbors = [np.nonzero(adj[v])[0] for v in range(chain.n)]
    n = chain.n
    dist = np.full((n, n), -1, dtype=int)
    for x in range(n):
        d = dist[x]
        d[x] = 0
        q = deque([x])
        while q:
            u = q.popleft()
            for v in neighbors[u]:
                if d[v] < 0:
                    d[v] = d[u] + 1
                    q.append(v)
    if dist.min() < 0:
        raise ValidationFailed("chain graph is disconnected")
    diameter = int(dist.max())
    V = np.zeros((n, diameter + 1))
    for r in range(diameter + 1):
        V[:, r] = np.where(dist <= r, chain.pi[None, :], 0.0).sum(axis=1)
    return GrowthData(V=V, V_star=V.min(axis=0), diameter=diameter,
                      distances=dist)


def volume_profile_bound(chain, growth=None, grid_per_decade=64):
    """Spectral-profile lower envelope r -> Q_*/(4 r w(r)) from volumes.

    The curve is decreasing, so each step takes the right-endpoint value;
    past r = 1 the final value stays valid because the gap dominates
    Q_*/(4 w(1/2)) and hence Q_*/(4 diameter).
    """
    g = growth if growth is not None else growth_data(chain)
    qstar = min_edge_flow(chain)
    jump_bps = np.array([v for v in np.unique(g.V_star) if v < 1.0])
    lo = chain.pi_star
    decades = max(1, int(np.ceil(np.log10(1.0 / lo))))
    grid = np.geomspace(lo, 1.0, grid_per_decade * decades + 1)
    bps = np.unique(np.concatenate([grid, jump_bps]))
    rights = np.append(bps[1:], 1.0)
    vals = []
    for right in rights:
        w = g.w(min(right, 1.0 - 1e-12))
        vals.append(qstar / (4.0 * right * w) if np.isfinite(w) and w > 0
                    else 0.0)
    vals = np.minimum.accumulate(vals)
    return StepProfile(bps, vals, "lower_envelope", "volume")


def moderate_growth_check(chain, A, d, growth=None, rel_tol=1e-12):
    """Check V(x,r) >= (1/A)((r+1)/diameter)^d for all x, 0 <= r <= diameter.

    Returns (ok, witness): the first violating (x, r) when it fails.
    """
    g = growth if growth is not None else growth_data(chain)
    gamma = g.diameter
    for r in range(gamma + 1):
        need = (1.0 / A) * ((r + 1.0) / gamma) ** d
        bad = np.nonzero(g.V[:, r] < need * (1.0 - rel_tol))[0]
        if bad.size:
            return False, (int(bad[0]), r)
    return True, None


def local_poincare_group_constant(num_generators):
    """Local Poincare constant for a group walk: twice the generator count."""
    return 2.0 * num_generators


def poincare_profile_bound(chain, a, growth=None):
    """Spectral-profile lower envelope v -> 1/(4 a W(2v)^2) on (0, 1/2].

    Extended past 1/2 by the value at 1/2 divided by two (the profile at
    large mass is within a factor two of the spectral gap).
    """
    if a <= 0:
        raise ValidationFailed(f"poincare constant a={a!r} must be positive")
    g = growth if growth is not None else growth_data(chain)
    W_half = g.W(1.0)
    if not np.isfinite(W_half) or W_half <= 0:
        raise ValidationFailed("degenerate volume table")
    val_half = 1.0 / (4.0 * a * W_half * W_half)
    lo = chain.pi_star
    if lo >= 0.5:
        return StepProfile(np.array([lo]), np.array([val_half / 2.0]),
                           "lower_envelope", "poincare")
    cuts = sorted({v / 2.0 for v in np.unique(g.V_star)
                   if lo < v / 2.0 < 0.5})
    bps = np.array([lo] + cuts + [0.5])
    vals = []
    for i in range(len(bps) - 1):
        W = g.W(min(2.0 * bps[i + 1], 1.0))
        vals.append(1.0 / (4.0 * a * W * W))
    vals.append(val_half / 2.0)
    return StepProfile(bps, np.array(vals), "lower_envelope", "poincare")


# -- functional-inequality envelopes ----------------------------------------------

def _log_ratio(r):
    """log(1/r)/(1-r) with a series guard near r = 1 (limit 1)."""
    u = 1.0 - float(r)
    if abs(u) < 1e-6:
        return 1.0 + u / 2.0 + u * u / 3.0
    return np.log(1.0 / r) / u


def logsob_profile_bound(rho, pi_star, grid_points=257):
    """Envelope r -> rho * log(1/r)/(1-r); constant rho past r = 1."""
    if rho <= 0:
        raise ValidationFailed(f"rho={rho!r} must be positive")
    bps = np.geomspace(pi_star, 1.0, grid_points)
    rights = np.append(bps[1:], 1.0)
    vals = np.array([rho * _log_ratio(t) for t in rights])
    return StepProfile(bps, vals, "lower_envelope", "logsob")


def nash_profile_bound(C, D, T, pi_star, grid_points=257):
    """Envelope r -> 1/(C r^(1/2D)) - 1/T, clipped at zero."""
    if min(C, D, T) <= 0:
        raise ValidationFailed("Nash constants must be positive")
    bps = np.geomspace(pi_star, 1.0, grid_points)
    rights = np.append(bps[1:], 1.0)
    vals = np.clip(1.0 / (C * rights ** (1.0 / (2.0 * D))) - 1.0 / T,
                   0.0, None)
    return StepProfile(bps, vals, "lower_envelope", "nash")


def moderate_growth_nash_constants(a, A, d, gamma):
    """Nash constants (C, D, T) implied by (A, d)-moderate growth with a
    local Poincare constant a on a graph of the given diameter."""
    C = (1.0 + 1.0 / d) ** 2 * (1.0 + d) ** (2.0 / d) * A ** (2.0 / d) \
        * a * gamma ** 2
    return C, d / 4.0, a * gamma ** 2


def entropy(chain, f2):
    """Ent_pi(f^2) = E[f^2 log(f^2 / ||f||_2^2)]."""
    norm = float(np.dot(chain.pi, f2))
    if norm <= 0:
        return 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(f2 > 0, f2 * np.log(f2 / norm), 0.0)
    return float(np.dot(chain.pi, terms))


@dataclass(frozen=True)
class LogSobEstimate:
    rho_hat: float
    f: np.ndarray
    converged: bool
    upper_estimate: bool = True  # a minimizer search can only overestimate


def estimate_logsob(chain, opts=None):
    """Upper estimate of the log-Sobolev constant by quotient minimization.

    Projected gradient descent on energy/entropy over nonnegative f, with
    restarts at 1 + eps*(gap eigenfunction), indicator bumps and random
    profiles.  The true constant is at most the returned value.
    """
    opts = opts or VariationalOptions(restarts=12, max_iters=600)
    pi = chain.pi
    n = chain.n
    A = additive_symmetrization(chain)
    DA = pi[:, None] * (np.eye(n) - A)
    DA = (DA + DA.T) / 2.0

    s = np.sqrt(pi)
    M = (s[:, None] * A) / s[None, :]
    M = (M + M.T) / 2.0
    _, V = scipy.linalg.eigh(M)
    psi1 = V[:, -2] / s

    def quotient(f):
        ent = entropy(chain, f * f)
        if ent <= 1e-300:
            return np.inf
        return float(f @ (DA @ f)) / ent

    def minimize(f0):
        f = np.abs(np.asarray(f0, dtype=float))
        nrm = np.sqrt(np.dot(pi, f * f))
        if nrm <= 0:
            return np.inf, f
        f = f / nrm
        q = quotient(f)
        step = 0.5
        for _ in range(opts.max_iters):
            f2 = f * f
            ent = entropy(chain, f2)
            if ent <= 1e-300:
                break
            energy = float(f @ (DA @ f))
            norm2 = float(np.dot(pi, f2))
            with np.errstate(divide="ignore", invalid="ignore"):
                dent = np.where(f2 > 0, 2.0 * pi * f * np.log(f2 / norm2),
                                0.0)
            grad = 2.0 * (DA @ f) / ent - (energy / ent ** 2) * dent
            gn = np.linalg.norm(grad)
            if gn == 0:
                break
            improved = False
            for _ in range(40):
                cand = np.clip(f - step * grad / gn, 0.0, None)
                nc = np.sqrt(np.dot(pi, cand * cand))
                if nc <= 0:
                    step *= 0.5
                    continue
                cand = cand / nc
                qc = quotient(cand)
                if qc < q - 1e-14 * max(abs(q), 1.0):
                    f, q = cand, qc
                    step *= 1.3
                    improved = True
                    break
                step *= 0.5
            if not improved:
                return q, f
        return q, f

    rng = np.random.default_rng(opts.seed)
    starts = [1.0 + 0.05 * psi1, 1.0 + 0.5 * psi1, np.abs(psi1) + 1e-3]
    for x in range(min(n, 3)):
        bump = np.full(n, 0.2)
        bump[x] = 1.0
        starts.append(bump)
    while len(starts) < opts.restarts:
        starts.append(rng.random(n) + 0.05)

    best_q, best_f = np.inf, None
    for f0 in starts:
        q, f = minimize(f0)
        if q < best_q:
            best_q, best_f = q, f
    return LogSobEstimate(rho_hat=float(best_q), f=best_f, converged=True)


# -- anti-Faber-Krahn input from explicit set families -----------------------------

def anti_fk_profile(chain, sets):
    """Upper profile of inf lambda0 from an explicit family of sets.

    Each member's bottom Dirichlet eigenvalue upper-bounds the infimum over
    sets of at most its mass, so the cumulative-min step profile satisfies
    the anti-Faber-Krahn property at every r at or past the smallest family
    mass.  Start the family at a minimum-mass singleton to cover
    [pi_*, infinity).
    """
    pairs = []
    for s in sets:
        sub = subset(chain, s)
        pairs.append((sub.mass, dirichlet_eigenvalue(chain, sub)))
    return _running_min_profile(pairs, "upper_envelope", "test_function")


def ball_family(chain, growth=None, center=None):
    """Balls around the minimum-mass vertex, radii 0..diameter (proper)."""
    g = growth if growth is not None else growth_data(chain)
    x0 = int(np.argmin(chain.pi)) if center is None else int(center)
    fam, seen = [], set()
    for r in range(g.diameter + 1):
        ball = tuple(np.nonzero(g.distances[x0] <= r)[0].tolist())
        if ball not in seen and len(ball) < chain.n:
            fam.append(ball)
            seen.add(ball)
    return fam


def test_function_upper_envelope(points):
    """Upper envelope of the spectral profile from Rayleigh-quotient points.

    ``points`` holds (support mass, energy/variance) pairs of feasible test
    functions; the cumulative minimum extends right by monotonicity.
    """
    return _running_min_profile([(float(m), float(q)) for m, q in points],
                                "upper_envelope", "test_function")


def rayleigh_point(chain, f):
    """(support mass, energy/variance) of a feasible test function."""
    f = np.asarray(f, dtype=float)
    mass = float(chain.pi[f > 0].sum())
    return mass, dirichlet_form(chain, f) / variance(chain, f)
