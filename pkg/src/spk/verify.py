"""Randomized invariant suites behind `spk verify`.

Each suite returns a list of violation strings (empty = pass); runs are
deterministic under a fixed seed.
"""

import numpy as np

from . import profiles as P
from .chain import (
    adjoint,
    adjoint_kernel,
    dirichlet_form,
    discrete_power,
    heat_kernel,
    multiplicative_symmetrizations,
    variance,
)
from .subsets import dirichlet_eigenvalue, lambda_bracket, subset
from .zoo import random_chain, random_function, random_reversible


def _sample_chains(seed, count, nmin=3, nmax=8, reversible=True):
    rng = np.random.default_rng(seed)
    chains = []
    for _ in range(count):
        n = int(rng.integers(nmin, nmax + 1))
        sub_seed = int(rng.integers(0, 2**32))
        chains.append(random_reversible(n, sub_seed) if reversible
                      else random_chain(n, sub_seed))
    return chains, rng


def suite_core(seed=0, count=20):
    """Adjoint/Dirichlet identities, flow symmetry, heat-kernel semigroup."""
    bad = []
    chains, rng = _sample_chains(seed, count, reversible=False)
    for ci, chain in enumerate(chains):
        Ks = adjoint_kernel(chain)
        lhs = chain.pi[:, None] * Ks
        rhs = (chain.pi[:, None] * chain.K).T
        if np.max(np.abs(lhs - rhs)) > 1e-12:
            bad.append(f"core:adjoint-identity chain {ci}")
        if np.max(np.abs(adjoint(adjoint(chain)).K - chain.K)) > 1e-12:
            bad.append(f"core:adjoint-involution chain {ci}")
        f = random_function(chain.n, rng)
        e_k = dirichlet_form(chain, f)
        e_ks = dirichlet_form(adjoint(chain), f)
        q = chain.pi[:, None] * chain.K
        half_sum = 0.5 * float(
            ((f[:, None] - f[None, :]) ** 2 * q).sum())
        if abs(e_k - e_ks) > 1e-10 or abs(e_k - half_sum) > 1e-10:
            bad.append(f"core:dirichlet-identity chain {ci}")
        # flow symmetry Q(S,Sc) = Q(Sc,S) on a random subset
        k = int(rng.integers(1, chain.n))
        idx = rng.choice(chain.n, size=k, replace=False)
        mask = np.zeros(chain.n, dtype=bool)
        mask[idx] = True
        qf = q[np.ix_(mask, ~mask)].sum()
        qb = q[np.ix_(~mask, mask)].sum()
        if abs(qf - qb) > 1e-12:
            bad.append(f"core:flow-symmetry chain {ci}")
        # semigroup
        s, t = rng.uniform(0.1, 2.0, size=2)
        hs = heat_kernel(chain, s).Ht
        ht = heat_kernel(chain, t).Ht
        hst = heat_kernel(chain, s + t).Ht
        if np.max(np.abs(hs @ ht - hst)) > 1e-8:
            bad.append(f"core:semigroup chain {ci}")
        # variance decay rate by centered difference
        x = int(rng.integers(chain.n))
        h = 1e-5
        t0 = float(rng.uniform(0.2, 1.0))
        u = lambda tt: heat_kernel(chain, tt).density[x]
        dvar = (variance(chain, u(t0 + h)) - variance(chain, u(t0 - h))) / (2 * h)
        target = -2.0 * dirichlet_form(chain, u(t0))
        if abs(dvar - target) > 1e-4 * max(abs(target), 1e-12):
            bad.append(f"core:variance-derivative chain {ci}")
        # discrete powers: square-and-multiply vs repeated multiplication
        m = int(rng.integers(2, 6))
        km = discrete_power(chain, m)
        ref = np.eye(chain.n)
        for _ in range(m):
            ref = ref @ chain.K
        if np.max(np.abs(km - ref)) > 1e-12:
            bad.append(f"core:discrete-power chain {ci}")
        sym = multiplicative_symmetrizations(chain)
        for M in (sym.kk_star, sym.k_star_k):
            if np.max(np.abs(M.sum(axis=1) - 1.0)) > 1e-12:
                bad.append(f"core:symmetrization-rows chain {ci}")
            if np.max(np.abs(chain.pi @ M - chain.pi)) > 1e-12:
                bad.append(f"core:symmetrization-stationarity chain {ci}")
    return bad


def suite_cheeger(seed=0, count=50):
    """Per-set sandwich Phi^2/2 <= lambda0(A) <= |dA|/pi(A), every subset."""
    bad = []
    chains, _ = _sample_chains(seed, count)
    for ci, chain in enumerate(chains):
        phi, _ = P.conductance_profile(chain)
        for bits in range(1, (1 << chain.n) - 1):
            idx = [i for i in range(chain.n) if bits >> i & 1]
            sub = subset(chain, idx)
            lam0 = dirichlet_eigenvalue(chain, sub)
            upper = sub.boundary / sub.mass
            lower = phi(sub.mass) ** 2 / 2.0
            if lam0 > upper + 1e-10 or lam0 < lower - 1e-10:
                bad.append(
                    f"cheeger:sandwich chain {ci} set {idx}: "
                    f"{lower:.3e} <= {lam0:.3e} <= {upper:.3e}")
    return bad


def suite_abs(seed=0, count=1000):
    """Energy splits no lower than over positive/negative parts."""
    bad = []
    rng = np.random.default_rng(seed)
    for i in range(count):
        n = int(rng.integers(3, 9))
        chain = random_reversible(n, int(rng.integers(0, 2**32)))
        f = rng.normal(size=n)
        e = dirichlet_form(chain, f)
        split = dirichlet_form(chain, np.clip(f, 0, None)) + \
            dirichlet_form(chain, np.clip(-f, 0, None))
        e_abs = dirichlet_form(chain, np.abs(f))
        if e < split - 1e-12 or split < e_abs - 1e-12:
            bad.append(f"abs:ordering sample {i}")
    return bad


def suite_ebound(seed=0, count=500):
    """Energy/variance of nonnegative u floored by half the profile at
    4(E u)^2 / Var u (band lower edge, gap-floored)."""
    bad = []
    rng = np.random.default_rng(seed)
    chain_pool = [random_reversible(int(rng.integers(3, 9)),
                                    int(rng.integers(0, 2**32)))
                  for _ in range(20)]
    bands = [P.spectral_profile_exhaustive(c, refine=False)
             for c in chain_pool]
    for i in range(count):
        j = int(rng.integers(len(chain_pool)))
        chain, band = chain_pool[j], bands[j]
        u = np.abs(rng.normal(size=chain.n)) + 1e-3
        var = variance(chain, u)
        if var <= 1e-14:
            continue
        mean = float(np.dot(chain.pi, u))
        r = 4.0 * mean**2 / var
        floor = 0.5 * band.bound_input()(r)
        quotient = dirichlet_form(chain, u) / var
        if quotient < floor - 1e-12:
            bad.append(f"ebound:floor sample {i}: {quotient:.3e} < {floor:.3e}")
    return bad


def suite_gap(seed=0, count=50):
    """Spectral gap vs profile at 1/2; Dirichlet-value monotonicity."""
    bad = []
    chains, rng = _sample_chains(seed, count)
    for ci, chain in enumerate(chains):
        band = P.spectral_profile_exhaustive(chain)
        lam1 = P.spectral_gap(chain)
        if lam1 > band.upper(0.5) + 1e-9:
            bad.append(f"gap:lambda1<=upper(1/2) chain {ci}")
        if band.lower(0.5) > 2 * lam1 + 1e-9:
            bad.append(f"gap:lower(1/2)<=2*lambda1 chain {ci}")
        # nested subsets: smaller set, larger bottom eigenvalue
        k = int(rng.integers(2, chain.n))
        idx = list(rng.choice(chain.n, size=k, replace=False))
        small = idx[: max(1, k // 2)]
        if dirichlet_eigenvalue(chain, small) < \
                dirichlet_eigenvalue(chain, idx) - 1e-10:
            bad.append(f"gap:monotonicity chain {ci}")
        # bracket contains the variational estimate
        br = lambda_bracket(chain, idx[: max(1, k - 1)], variational=True)
        if not (br.lower * (1 - 1e-8) <= br.variational_estimate
                <= br.upper * (1 + 1e-8)):
            bad.append(f"gap:bracket chain {ci}")
    return bad


SUITES = {
    "core": suite_core,
    "cheeger": suite_cheeger,
    "abs": suite_abs,
    "ebound": suite_ebound,
    "gap": suite_gap,
}


def run_suites(names, seed=0):
    """Run the named suites (or all); returns the combined violation list."""
    if not names or names == ["all"]:
        names = list(SUITES)
    failures = []
    for name in names:
        if name not in SUITES:
            raise KeyError(f"unknown suite {name!r}; have {sorted(SUITES)}")
        failures.extend(SUITES[name](seed=seed))
    return failures
