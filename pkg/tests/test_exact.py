import math

import numpy as np
import pytest

import spk
from spk.errors import Periodic, ValidationFailed
from spk.exact import chain_period, diag_excess_curve, worst_start_distance


def test_lp_distance_basics():
    pi = np.full(4, 0.25)
    mu = np.array([1.0, 0.0, 0.0, 0.0])
    assert spk.lp_distance(mu, pi, pi, 1) == pytest.approx(2 * (1 - 0.25))
    assert spk.lp_distance(pi, pi, pi, 2) == 0.0
    with pytest.raises(ValidationFailed):
        spk.lp_distance(mu, pi, pi, 0.5)


def test_lp_distance_explicit_summation_oracle():
    rng = np.random.default_rng(7)
    pi = rng.random(5)
    pi /= pi.sum()
    mu = rng.random(5)
    mu /= mu.sum()
    nu = rng.random(5)
    nu /= nu.sum()
    oracle = sum(pi[x] * abs(mu[x] / pi[x] - nu[x] / pi[x]) ** 2
                 for x in range(5)) ** 0.5
    assert spk.lp_distance(mu, nu, pi, 2) == pytest.approx(oracle, rel=1e-12)


def test_exact_tau_complete_graph_closed_form():
    n = 10
    chain = spk.complete_graph(n)
    eps = math.exp(-1)
    tau = spk.exact_tau(chain, np.inf, eps)
    assert tau == pytest.approx(math.log((n - 1) / eps), abs=1e-5)


def test_exact_tau_zero_when_already_mixed():
    chain = spk.cycle(6)
    eps = 1.0 / chain.pi_star  # larger than the distance at t = 0
    assert spk.exact_tau(chain, np.inf, eps) == 0.0


def test_exact_tau_cycle_spectral_synthesis_oracle():
    n = 8
    chain = spk.cycle(n)
    eps = math.exp(-1)
    tau = spk.exact_tau(chain, np.inf, eps)

    # independent oracle: explicit Fourier eigenstructure of the cycle
    freqs = np.arange(n)
    lams = 1.0 - np.cos(2.0 * np.pi * freqs / n)

    def diag_excess(t):
        # h_t(x,x) - 1 = sum_{j != 0} e^{-t lam_j}
        return np.exp(-t * lams[1:]).sum()

    assert diag_excess(tau) == pytest.approx(eps, rel=1e-6)
    # bisect the oracle independently
    lo, hi = 0.0, 1.0
    while diag_excess(hi) > eps:
        hi *= 2
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if diag_excess(mid) > eps:
            lo = mid
        else:
            hi = mid
    assert tau == pytest.approx(hi, rel=1e-6)


def test_worst_start_distance_p_monotonicity():
    chain = spk.random_reversible(6, 5)
    for t in (0.2, 1.0, 3.0):
        d1 = worst_start_distance(chain, t, 1)
        d2 = worst_start_distance(chain, t, 2)
        dinf = worst_start_distance(chain, t, np.inf)
        assert d1 <= d2 + 1e-12
        assert d2 <= dinf + 1e-12


def test_reversible_diagonal_identity():
    # sup over pairs of |h - 1| is attained on the diagonal
    chain = spk.random_reversible(7, 13)
    for t in (0.3, 1.5):
        snap = spk.heat_kernel(chain, t)
        dev = np.abs(snap.density - 1.0)
        assert np.max(dev) == pytest.approx(np.max(np.diag(snap.density) - 1),
                                            rel=1e-10)


def test_l_infty_submultiplicative_split():
    # Cauchy-Schwarz splitting across half times, non-reversible included
    chain = spk.random_chain(5, 17)
    adj = spk.adjoint(chain)
    for t in (0.4, 1.2, 3.0):
        dinf = worst_start_distance(chain, t, np.inf)
        d2_half = worst_start_distance(chain, t / 2, 2)
        d2_half_adj = worst_start_distance(adj, t / 2, 2)
        assert dinf <= d2_half * d2_half_adj + 1e-10


def test_exact_tau_nonreversible_grid_path():
    chain = spk.random_chain(5, 23)
    eps = 0.5
    tau = spk.exact_tau(chain, np.inf, eps)
    assert worst_start_distance(chain, tau * 1.0000001, np.inf) <= eps * (1 + 1e-6)
    assert worst_start_distance(chain, tau * 0.98, np.inf) > eps


def test_exact_tau_discrete_lazy_cycle():
    chain = spk.cycle(8, lazy_alpha=0.5)
    eps = math.exp(-1)
    m = spk.exact_tau(chain, np.inf, eps, mode="discrete")
    assert isinstance(m, int)
    # oracle: direct scan of kernel powers
    Km = np.eye(8)
    dists = []
    for _ in range(m + 1):
        dists.append(np.max(np.abs(Km / chain.pi[None, :] - 1.0)))
        Km = Km @ chain.K
    assert dists[m] <= eps
    assert all(d > eps for d in dists[:m])


def test_exact_tau_discrete_periodic_raises():
    chain = spk.cycle(6)  # bipartite, period 2
    assert chain_period(chain) == 2
    with pytest.raises(Periodic):
        spk.exact_tau(chain, np.inf, 0.5, mode="discrete")
    assert chain_period(spk.cycle(5)) == 1
    assert chain_period(spk.cycle(6, lazy_alpha=0.25)) == 1


def test_distance_curve_complete_graph():
    n = 6
    chain = spk.complete_graph(n)
    ts = np.linspace(0.1, 5.0, 40)
    curve = spk.distance_curve(chain, np.inf, ts)
    assert np.allclose(curve.values, (n - 1) * np.exp(-ts), rtol=1e-10)
    # at t=0 the uniform distance from the worst start is 1/pi_* - 1
    curve0 = spk.distance_curve(chain, np.inf, np.array([1e-12, 1.0]))
    assert curve0.values[0] == pytest.approx(1.0 / chain.pi_star - 1.0,
                                             rel=1e-9)


def test_distance_curve_monotone_for_reversible():
    chain = spk.random_reversible(6, 29)
    curve = spk.distance_curve(chain, np.inf)
    assert np.all(np.diff(curve.values) <= 1e-12)


def test_distance_curve_csv():
    chain = spk.complete_graph(3)
    curve = spk.distance_curve(chain, 1, np.array([0.5, 1.0]))
    lines = curve.csv().strip().splitlines()
    assert lines[0] == "t,value"
    assert len(lines) == 3


def test_diag_excess_curve_matches_kernel():
    chain = spk.random_reversible(5, 31)
    ts = np.array([0.2, 0.7, 2.0])
    vals = diag_excess_curve(chain, ts)
    for t, v in zip(ts, vals):
        snap = spk.heat_kernel(chain, t)
        assert v == pytest.approx(np.max(np.diag(snap.density)) - 1.0,
                                  rel=1e-9)
