"""Finite Markov chains: kernels, adjoints, Dirichlet forms, heat kernels.

A chain is a row-stochastic kernel K together with its stationary
distribution pi.  Everything here is dense: at desk scale (n up to a couple
thousand states) eigensolves dominate the cost anyway, so sparse input is
densified on ingestion.  All values are immutable after construction and all
operations are pure functions.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.linalg
import scipy.sparse
from scipy.sparse.csgraph import connected_components

from .errors import (
    AlphaExceedsHolding,
    DimensionMismatch,
    NotStochastic,
    Reducible,
    ToleranceTooLoose,
    ValidationFailed,
    ZeroStationaryMass,
)

ROW_SUM_TOL = 1e-9
STATIONARY_TOL = 1e-10
REVERSIBILITY_TOL = 1e-12
SUPPORT_TOL = 1e-15


def _frozen(a):
    a = np.ascontiguousarray(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class MarkovChain:
    """An irreducible finite chain (K, pi).

    Fields mirror what the analysis needs everywhere: the kernel, the
    stationary distribution, its minimum mass, whether detailed balance
    holds, and the minimum holding probability min_x K(x,x).
    """

    n: int
    K: np.ndarray
    pi: np.ndarray
    pi_star: float
    reversible: bool
    holding_alpha: float
    labels: tuple | None = None

    def __post_init__(self):
        object.__setattr__(self, "K", _frozen(self.K))
        object.__setattr__(self, "pi", _frozen(self.pi))

    @property
    def support(self):
        """Boolean matrix of the kernel's support digraph."""
        return self.K > SUPPORT_TOL

    def undirected_adjacency(self):
        """Edge indicator of the chain's graph: pi(x)K(x,y)+pi(y)K(y,x) > 0."""
        Q = self.pi[:, None] * self.K
        A = (Q + Q.T) > SUPPORT_TOL
        np.fill_diagonal(A, False)
        return A


@dataclass(frozen=True)
class HeatKernelSnapshot:
    """The continuous-time kernel at a single time t.

    ``Ht[x, y]`` is the transition probability, ``density[x, y]`` the ratio
    Ht(x,y)/pi(y).
    """

    t: float
    Ht: np.ndarray
    pi: np.ndarray
    method: str

    def __post_init__(self):
        object.__setattr__(self, "Ht", _frozen(self.Ht))
        rows = self.Ht.sum(axis=1)
        if np.max(np.abs(rows - 1.0)) > 1e-10:
            raise NotStochastic(
                f"heat kernel rows sum off by {np.max(np.abs(rows - 1.0)):.3e}"
            )
        if self.Ht.min() < -1e-12:
            raise NotStochastic(f"heat kernel entry {self.Ht.min():.3e} < 0")

    @property
    def density(self):
        return self.Ht / self.pi[None, :]


def _strongly_connected(support):
    ncomp, _ = connected_components(
        scipy.sparse.csr_matrix(support), directed=True, connection="strong"
    )
    return ncomp == 1


def _solve_stationary(K):
    n = K.shape[0]
    A = K.T - np.eye(n)
    A[-1, :] = 1.0
    b = np.zeros(n)
    b[-1] = 1.0
    try:
        pi = np.linalg.solve(A, b)
    except np.linalg.LinAlgError:
        A = np.vstack([K.T - np.eye(n), np.ones(n)])
        b = np.zeros(n + 1)
        b[-1] = 1.0
        pi = np.linalg.lstsq(A, b, rcond=None)[0]
    return pi


def build_chain(kernel, labels=None, reversibility_tol=REVERSIBILITY_TOL):
    """Validate a kernel and solve for its stationary distribution.

    Raises NotStochastic / Reducible / ZeroStationaryMass on bad input.
    """
    K = np.asarray(kernel, dtype=float)
    if K.ndim != 2 or K.shape[0] != K.shape[1]:
        raise DimensionMismatch(f"kernel must be square, got {K.shape}")
    n = K.shape[0]
    if K.min() < 0:
        raise NotStochastic(f"negative kernel entry {K.min():.3e}")
    rows = K.sum(axis=1)
    bad = np.argmax(np.abs(rows - 1.0))
    if abs(rows[bad] - 1.0) > ROW_SUM_TOL:
        raise NotStochastic(f"row {bad} sums to {rows[bad]!r}")
    if not _strongly_connected(K > SUPPORT_TOL):
        raise Reducible("kernel support digraph is not strongly connected")

    pi = _solve_stationary(K)
    if pi.min() <= 0:
        raise ZeroStationaryMass(f"pi[{np.argmin(pi)}] = {pi.min():.3e}")
    pi = pi / pi.sum()
    resid = np.max(np.abs(pi @ K - pi))
    if resid > STATIONARY_TOL:
        raise ZeroStationaryMass(f"stationarity residual {resid:.3e}")

    flux = pi[:, None] * K
    reversible = bool(np.max(np.abs(flux - flux.T)) <= reversibility_tol)
    return MarkovChain(
        n=n,
        K=K,
        pi=pi,
        pi_star=float(pi.min()),
        reversible=reversible,
        holding_alpha=float(np.diag(K).min()),
        labels=tuple(labels) if labels is not None else None,
    )


def chain_from_kernel_pi(K, pi, labels=None):
    """Assemble a chain from a kernel with known stationary distribution.

    Used internally for derived kernels (KK*, laziness transforms) whose
    stationarity is guaranteed algebraically; skips the irreducibility
    requirement of build_chain.
    """
    K = np.asarray(K, dtype=float)
    pi = np.asarray(pi, dtype=float)
    flux = pi[:, None] * K
    reversible = bool(np.max(np.abs(flux - flux.T)) <= REVERSIBILITY_TOL)
    return MarkovChain(
        n=K.shape[0],
        K=K,
        pi=pi,
        pi_star=float(pi.min()),
        reversible=reversible,
        holding_alpha=float(np.diag(K).min()),
        labels=tuple(labels) if labels is not None else None,
    )


def adjoint_kernel(chain):
    """Time reversal K*(x,y) = pi(y)K(y,x)/pi(x); row-stochastic, same pi."""
    return (chain.K.T * chain.pi[None, :]) / chain.pi[:, None]


def adjoint(chain):
    """The reversed chain built on adjoint_kernel."""
    return chain_from_kernel_pi(adjoint_kernel(chain), chain.pi, chain.labels)


def additive_symmetrization(chain):
    """Kernel (K + K*)/2; reversible with the same stationary pi."""
    return (chain.K + adjoint_kernel(chain)) / 2.0


def dirichlet_form(chain, f, g=None):
    """Energy <(I-K)f, g> in L2(pi).  With g omitted, the quadratic form.

    For f = g this equals the half-sum (1/2) sum_{x,y} [f(x)-f(y)]^2 Q(x,y).
    """
    f = np.asarray(f, dtype=float)
    if f.shape != (chain.n,):
        raise DimensionMismatch(f"f has shape {f.shape}, expected ({chain.n},)")
    if g is None:
        g = f
    else:
        g = np.asarray(g, dtype=float)
        if g.shape != (chain.n,):
            raise DimensionMismatch(f"g has shape {g.shape}, expected ({chain.n},)")
    delta_f = f - chain.K @ f
    return float(np.dot(chain.pi * g, delta_f))


def variance(chain, f):
    """Var_pi(f)."""
    f = np.asarray(f, dtype=float)
    mean = float(np.dot(chain.pi, f))
    return float(np.dot(chain.pi, (f - mean) ** 2))


@dataclass(frozen=True)
class SymmetricDecomposition:
    """Eigendecomposition of sqrt(pi)-conjugated (K+K*)/2.

    ``rates`` are the eigenvalues of I - (K+K*)/2 in ascending order;
    ``vectors`` the orthonormal eigenvectors of the conjugated matrix.
    For reversible chains this is an exact spectral representation of K.
    """

    rates: np.ndarray
    vectors: np.ndarray
    sqrt_pi: np.ndarray

    def eigenfunctions(self):
        """Eigenfunctions orthonormal in L2(pi) (columns)."""
        return self.vectors / self.sqrt_pi[:, None]


@lru_cache(maxsize=16)
def symmetric_decomposition(chain):
    """Cached eigendecomposition of the pi-symmetrized additive kernel."""
    s = np.sqrt(chain.pi)
    A = additive_symmetrization(chain)
    M = (s[:, None] * A) / s[None, :]
    M = (M + M.T) / 2.0
    w, Q = scipy.linalg.eigh(M)
    return SymmetricDecomposition(rates=_frozen(1.0 - w[::-1]),
                                  vectors=_frozen(Q[:, ::-1]),
                                  sqrt_pi=_frozen(s))


def _heat_series(chain, t, tol):
    """Uniformization: H_t = sum_k P(Poisson(t)=k) K^k, tail mass < tol.

    Poisson weights come from the log-space recurrence (never the factorial
    formula), so large t cannot overflow.
    """
    n = chain.n
    H = np.zeros((n, n))
    Pk = np.eye(n)
    logw = -t
    cum = 0.0
    k = 0
    while cum < 1.0 - tol:
        w = np.exp(logw)
        if w > 0.0:
            H += w * Pk
        cum += w
        k += 1
        logw += np.log(t) - np.log(k)
        Pk = Pk @ chain.K
        if k > 100 * (t + 1) + 1000:
            break
    return H


def _heat_spectral(chain, t):
    dec = symmetric_decomposition(chain)
    s = dec.sqrt_pi
    scaled = dec.vectors * np.exp(-t * dec.rates)[None, :]
    M = scaled @ dec.vectors.T
    return (M / s[:, None]) * s[None, :]


def heat_kernel(chain, t, tol=1e-12, method="auto"):
    """Continuous-time kernel exp(-t(I-K)) as a snapshot.

    Reversible chains use spectral synthesis of the pi-symmetrized kernel;
    otherwise the uniformization series truncated once the Poisson tail is
    below tol.  ``method`` forces one path ("spectral"/"series").
    """
    if t < 0:
        raise ValidationFailed(f"time t={t!r} must be >= 0")
    if tol >= 1.0 or tol <= 0.0:
        raise ToleranceTooLoose(f"tol={tol!r} must be in (0, 1)")
    if t == 0.0:
        return HeatKernelSnapshot(t=0.0, Ht=np.eye(chain.n), pi=chain.pi,
                                  method="identity")
    if method == "auto":
        method = "spectral" if chain.reversible else "series"
    if method == "spectral":
        Ht = _heat_spectral(chain, t)
        Ht = np.clip(Ht, 0.0, None)
        Ht /= Ht.sum(axis=1, keepdims=True)
    elif method == "series":
        Ht = _heat_series(chain, t, tol)
    else:
        raise ValueError(f"unknown method {method!r}")
    return HeatKernelSnapshot(t=float(t), Ht=Ht, pi=chain.pi, method=method)


@dataclass(frozen=True)
class MultiplicativeSymmetrization:
    """The products KK* and K*K with their irreducibility flags."""

    kk_star: np.ndarray
    k_star_k: np.ndarray
    kk_star_irreducible: bool
    k_star_k_irreducible: bool
    pi: np.ndarray

    def kk_star_chain(self):
        return chain_from_kernel_pi(self.kk_star, self.pi)

    def k_star_k_chain(self):
        return chain_from_kernel_pi(self.k_star_k, self.pi)


def multiplicative_symmetrizations(chain):
    """KK* and K*K; both row-stochastic and pi-stationary.

    Reducibility is reported as flags, not an error: some kernels (e.g.
    deterministic rotations) give KK* = I.
    """
    Ks = adjoint_kernel(chain)
    kk = chain.K @ Ks
    kk2 = Ks @ chain.K
    return MultiplicativeSymmetrization(
        kk_star=kk,
        k_star_k=kk2,
        kk_star_irreducible=_strongly_connected(kk > SUPPORT_TOL),
        k_star_k_irreducible=_strongly_connected(kk2 > SUPPORT_TOL),
        pi=chain.pi,
    )


def add_laziness(chain, alpha):
    """K -> alpha*I + (1-alpha)*K; preserves pi."""
    if not 0.0 <= alpha < 1.0:
        raise AlphaExceedsHolding(f"alpha={alpha!r} must be in [0, 1)")
    K = alpha * np.eye(chain.n) + (1.0 - alpha) * chain.K
    return chain_from_kernel_pi(K, chain.pi, chain.labels)


def remove_laziness(chain, alpha):
    """Inverse rescaling K -> (K - alpha*I)/(1 - alpha).

    Requires alpha <= min_x K(x,x) so the result stays a kernel.
    """
    if not 0.0 <= alpha < 1.0:
        raise AlphaExceedsHolding(f"alpha={alpha!r} must be in [0, 1)")
    if alpha > chain.holding_alpha + 1e-15:
        raise AlphaExceedsHolding(
            f"alpha={alpha!r} exceeds min holding {chain.holding_alpha!r}"
        )
    K = (chain.K - alpha * np.eye(chain.n)) / (1.0 - alpha)
    K = np.clip(K, 0.0, None)
    return chain_from_kernel_pi(K, chain.pi, chain.labels)


def discrete_power(chain, m):
    """K^m by square-and-multiply."""
    if m < 0 or int(m) != m:
        raise DimensionMismatch(f"power m={m!r} must be a nonnegative integer")
    return np.linalg.matrix_power(chain.K, int(m))


def flow_matrix(chain):
    """Q(x,y) = pi(x)K(x,y), a probability measure on pairs."""
    return chain.pi[:, None] * chain.K
