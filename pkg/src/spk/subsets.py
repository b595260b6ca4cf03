"""Dirichlet eigenvalues and Rayleigh quotients on subsets of the state space.

For a non-empty subset S the two central quantities are

* the bottom eigenvalue of the restricted Laplacian I - K_S (computed on the
  pi-symmetrized block, using the additive symmetrization for non-reversible
  kernels), and
* the infimum of energy/variance over nonnegative, non-constant functions
  supported in S.

The first brackets the second: lambda0 <= inf <= lambda0/(1 - pi(S)).
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .chain import additive_symmetrization, dirichlet_form, variance
from .errors import (
    DidNotConverge,
    EigensolveFailure,
    EmptySubset,
    FullSpace,
)

DENSE_EIG_CUTOFF = 512


@dataclass(frozen=True)
class Subset:
    """An index set with its stationary mass and boundary flow.

    ``components`` partitions members into connected pieces of the chain's
    undirected graph.
    """

    members: tuple
    mass: float
    boundary: float
    components: tuple


def boundary_weight(chain, idx):
    """|dS| = Q(S, S^c) = sum over x in S, y outside of pi(x)K(x,y)."""
    mask = np.zeros(chain.n, dtype=bool)
    mask[list(idx)] = True
    Q = chain.pi[:, None] * chain.K
    return float(Q[np.ix_(mask, ~mask)].sum())


def _components(adj, idx):
    idx = list(idx)
    remaining = set(idx)
    comps = []
    while remaining:
        seed = min(remaining)
        comp = {seed}
        stack = [seed]
        while stack:
            u = stack.pop()
            for v in np.nonzero(adj[u])[0]:
                if v in remaining and v not in comp:
                    comp.add(int(v))
                    stack.append(int(v))
        remaining -= comp
        comps.append(tuple(sorted(comp)))
    return tuple(comps)


def subset(chain, indices):
    """Build a Subset with cached mass, boundary and components."""
    idx = tuple(sorted(set(int(i) for i in indices)))
    if not idx:
        raise EmptySubset("subset must be non-empty")
    if idx[0] < 0 or idx[-1] >= chain.n:
        raise EmptySubset(f"subset indices out of range for n={chain.n}")
    mass = float(chain.pi[list(idx)].sum())
    return Subset(
        members=idx,
        mass=mass,
        boundary=boundary_weight(chain, idx),
        components=_components(chain.undirected_adjacency(), idx),
    )


def _as_indices(S):
    if isinstance(S, Subset):
        return list(S.members)
    return sorted(set(int(i) for i in S))


def restricted_laplacian(chain, S, symmetrized=False):
    """The block I - K_S on the S-indexed coordinates.

    ``symmetrized=True`` returns the additive symmetrization
    (I - (K_S + K*_S)/2), which is what the eigensolve uses for
    non-reversible kernels.
    """
    idx = _as_indices(S)
    if not idx:
        raise EmptySubset("subset must be non-empty")
    A = additive_symmetrization(chain) if symmetrized else chain.K
    block = A[np.ix_(idx, idx)]
    return np.eye(len(idx)) - block


def _sym_restricted(chain, idx):
    """pi-symmetrized restricted Laplacian; symmetric PSD-ish matrix."""
    A = additive_symmetrization(chain)
    block = A[np.ix_(idx, idx)]
    s = np.sqrt(chain.pi[idx])
    M = np.eye(len(idx)) - (s[:, None] * block) / s[None, :]
    return (M + M.T) / 2.0


def dirichlet_eigenvalue(chain, S, return_vector=False):
    """Bottom eigenvalue of the symmetrized restricted Laplacian on S.

    Full symmetric eigendecomposition up to the dense cutoff, LAPACK's
    subset solver (bisection + inverse iteration) above it.
    """
    idx = _as_indices(S)
    if not idx:
        raise EmptySubset("subset must be non-empty")
    M = _sym_restricted(chain, idx)
    try:
        if len(idx) <= DENSE_EIG_CUTOFF:
            w, V = scipy.linalg.eigh(M)
            val, vec = w[0], V[:, 0]
        else:
            w, V = scipy.linalg.eigh(M, subset_by_index=(0, 0))
            val, vec = w[0], V[:, 0]
    except scipy.linalg.LinAlgError as e:
        raise EigensolveFailure(str(e)) from e
    val = float(max(val, 0.0))
    if return_vector:
        return val, vec
    return val


@dataclass(frozen=True)
class LambdaBracket:
    """Two-sided bracket for the subset Rayleigh infimum.

    lower = lambda0, upper = lambda0/(1 - pi(S)); the optional variational
    estimate sits inside the bracket.  ``factor_two_uncertain`` is set for
    non-reversible kernels, where the symmetrized lambda0 locates the
    infimum only up to a factor two on the upper side.
    """

    lambda0: float
    lower: float
    upper: float
    variational_estimate: float | None = None
    factor_two_uncertain: bool = False


def lambda_bracket(chain, S, variational=False, opts=None):
    """Bracket [lambda0, lambda0/(1-pi(S))] for a proper subset S."""
    sub = S if isinstance(S, Subset) else subset(chain, S)
    if sub.mass >= 1.0 - 1e-15:
        raise FullSpace("bracket undefined when pi(S) = 1")
    lam0 = dirichlet_eigenvalue(chain, sub)
    upper = lam0 / (1.0 - sub.mass)
    est = None
    if variational:
        res = rayleigh_minimize(chain, sub, opts=opts)
        est = min(max(res.value, lam0 * (1 - 1e-8)), upper * (1 + 1e-8))
    return LambdaBracket(
        lambda0=lam0,
        lower=lam0,
        upper=upper,
        variational_estimate=est,
        factor_two_uncertain=not chain.reversible,
    )


@dataclass(frozen=True)
class VariationalResult:
    value: float
    f: np.ndarray
    converged: bool
    restarts: int


@dataclass(frozen=True)
class VariationalOptions:
    max_iters: int = 400
    restarts: int = 16
    tol: float = 1e-12
    seed: int = 0
    raise_on_failure: bool = False


def _quotient(chain, f):
    v = variance(chain, f)
    if v <= 0:
        return np.inf
    return dirichlet_form(chain, f) / v


def _project(f, idx_mask):
    g = np.clip(f, 0.0, None)
    g[~idx_mask] = 0.0
    return g


def _minimize_quotient(chain, idx_mask, f0, max_iters, tol):
    """Projected gradient descent on energy/variance over the cone f>=0."""
    pi = chain.pi
    A = additive_symmetrization(chain)
    DA = pi[:, None] * (np.eye(chain.n) - A)
    DA = (DA + DA.T) / 2.0

    f = _project(f0.copy(), idx_mask)
    seln = f[idx_mask]
    if seln.max() <= 0:
        return np.inf, f, True
    f /= np.dot(pi, f) if np.dot(pi, f) > 0 else 1.0

    q = _quotient(chain, f)
    step = 1.0
    for _ in range(max_iters):
        mean = float(np.dot(pi, f))
        var = float(np.dot(pi, (f - mean) ** 2))
        if var <= 1e-300:
            break
        energy = float(f @ (DA @ f))
        grad = 2.0 * (DA @ f) / var - (energy / var**2) * 2.0 * pi * (f - mean)
        gnorm = np.linalg.norm(grad)
        if gnorm == 0.0:
            break
        improved = False
        for _ in range(40):
            cand = _project(f - step * grad / gnorm, idx_mask)
            m = np.dot(pi, cand)
            if m <= 0:
                step *= 0.5
                continue
            cand /= m
            qc = _quotient(chain, cand)
            if qc < q - tol * max(abs(q), 1.0):
                f, q = cand, qc
                step *= 1.3
                improved = True
                break
            step *= 0.5
        if not improved:
            return q, f, True
    return q, f, False


def rayleigh_minimize(chain, S, opts=None):
    """Numerical estimate of inf E(f,f)/Var(f) over nonnegative f in c0(S).

    Multi-restart projected gradient descent; restart points are the
    positive part of the bottom Dirichlet eigenvector, the uniform
    indicator of S, and random nonnegative profiles.  The quotient of any
    feasible iterate upper-bounds the infimum, so the returned value is a
    one-sided (upper) estimate.

    On a singleton the quotient is constant in the scale and equals
    (1 - K(x,x))/(1 - pi(x)); no special casing is needed.
    """
    opts = opts or VariationalOptions()
    sub = S if isinstance(S, Subset) else subset(chain, S)
    idx = list(sub.members)
    idx_mask = np.zeros(chain.n, dtype=bool)
    idx_mask[idx] = True

    lam0, vec = dirichlet_eigenvalue(chain, sub, return_vector=True)
    starts = []
    e0 = np.zeros(chain.n)
    e0[idx] = np.abs(vec) / np.sqrt(chain.pi[idx])
    starts.append(e0)
    u = np.zeros(chain.n)
    u[idx] = 1.0
    starts.append(u)
    rng = np.random.default_rng(opts.seed)
    while len(starts) < opts.restarts:
        r = np.zeros(chain.n)
        r[idx] = rng.random(len(idx))
        starts.append(r)

    best_q, best_f, best_conv = np.inf, None, False
    for f0 in starts:
        q, f, conv = _minimize_quotient(chain, idx_mask, f0, opts.max_iters, opts.tol)
        if q < best_q:
            best_q, best_f, best_conv = q, f, conv
    result = VariationalResult(
        value=float(best_q), f=best_f, converged=best_conv,
        restarts=len(starts),
    )
    if not best_conv and opts.raise_on_failure:
        raise DidNotConverge("quotient minimization hit max_iters", best=result)
    return result


def rayleigh_by_components(chain, S, opts=None):
    """min over connected components of S of the component's quotient.

    Equals the whole-set infimum: any competitor splits over components and
    the quotient of a sum is at least the minimum of the parts.
    """
    sub = S if isinstance(S, Subset) else subset(chain, S)
    return min(
        rayleigh_minimize(chain, comp, opts=opts).value
        for comp in sub.components
    )


def subset_to_json(sub):
    """Subsets serialize as their sorted index array."""
    return list(sub.members)


def bracket_to_json(br):
    doc = {"lambda0": br.lambda0, "upper": br.upper}
    if br.variational_estimate is not None:
        doc["variational"] = br.variational_estimate
    return doc
