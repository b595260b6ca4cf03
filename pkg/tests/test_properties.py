"""Property tests for the structural identities the analysis leans on."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

import spk
from spk.chain import flow_matrix


chain_strategy = st.builds(
    lambda raw: spk.build_chain(raw / raw.sum(axis=1, keepdims=True)),
    st.integers(2, 6).flatmap(
        lambda n: arrays(np.float64, (n, n), elements=st.floats(0.05, 1.0))
    ),
)


@settings(max_examples=60, deadline=None)
@given(chain_strategy, st.integers(0, 2**31 - 1))
def test_energy_identities(chain, fseed):
    f = np.random.default_rng(fseed).normal(size=chain.n)
    e = spk.dirichlet_form(chain, f)
    assert spk.dirichlet_form(spk.adjoint(chain), f) == pytest.approx(
        e, abs=1e-10, rel=1e-10)
    q = flow_matrix(chain)
    half_sum = 0.5 * float(((f[:, None] - f[None, :]) ** 2 * q).sum())
    assert e == pytest.approx(half_sum, abs=1e-10, rel=1e-10)
    assert e >= -1e-12


@settings(max_examples=60, deadline=None)
@given(chain_strategy, st.integers(0, 2**31 - 1))
def test_positive_negative_part_split(chain, fseed):
    f = np.random.default_rng(fseed).normal(size=chain.n)
    e = spk.dirichlet_form(chain, f)
    split = spk.dirichlet_form(chain, np.clip(f, 0, None)) + \
        spk.dirichlet_form(chain, np.clip(-f, 0, None))
    e_abs = spk.dirichlet_form(chain, np.abs(f))
    assert e >= split - 1e-12
    assert split >= e_abs - 1e-12


@settings(max_examples=40, deadline=None)
@given(chain_strategy, st.integers(0, 2**31 - 1))
def test_flow_symmetry(chain, sseed):
    rng = np.random.default_rng(sseed)
    k = int(rng.integers(1, chain.n))
    idx = rng.choice(chain.n, size=k, replace=False)
    mask = np.zeros(chain.n, dtype=bool)
    mask[idx] = True
    q = flow_matrix(chain)
    assert q[np.ix_(mask, ~mask)].sum() == pytest.approx(
        q[np.ix_(~mask, mask)].sum(), abs=1e-13)


@settings(max_examples=30, deadline=None)
@given(chain_strategy, st.floats(0.0, 0.9))
def test_laziness_roundtrip_property(chain, alpha):
    lazy = spk.add_laziness(chain, alpha)
    back = spk.remove_laziness(lazy, alpha)
    assert np.max(np.abs(back.K - chain.K)) < 1e-13
    assert np.max(np.abs(lazy.pi - chain.pi)) < 1e-13


@settings(max_examples=30, deadline=None)
@given(st.integers(3, 7), st.integers(0, 2**31 - 1),
       st.floats(0.1, 3.0), st.sampled_from([1, 2]))
def test_lp_monotone_in_p(n, seed, t, rep):
    chain = spk.random_reversible(n, seed)
    d1 = spk.worst_start_distance(chain, t, 1)
    d2 = spk.worst_start_distance(chain, t, 2)
    dinf = spk.worst_start_distance(chain, t, np.inf)
    assert d1 <= d2 + 1e-12 <= dinf + 2e-12


# -- bulk seeded invariants (spec-sized samples) ----------------------------------

def test_abs_split_bulk_1000():
    rng = np.random.default_rng(2024)
    for _ in range(1000):
        n = int(rng.integers(3, 9))
        chain = spk.random_reversible(n, int(rng.integers(0, 2**32)))
        f = rng.normal(size=n)
        e = spk.dirichlet_form(chain, f)
        split = spk.dirichlet_form(chain, np.clip(f, 0, None)) + \
            spk.dirichlet_form(chain, np.clip(-f, 0, None))
        e_abs = spk.dirichlet_form(chain, np.abs(f))
        assert e - split >= -1e-12
        assert split - e_abs >= -1e-12


def test_energy_variance_floor_bulk_500():
    rng = np.random.default_rng(77)
    pool = [(c, spk.spectral_profile_exhaustive(c, refine=False))
            for c in (spk.random_reversible(int(rng.integers(3, 9)),
                                            int(rng.integers(0, 2**32)))
                      for _ in range(20))]
    for _ in range(500):
        chain, band = pool[int(rng.integers(len(pool)))]
        u = np.abs(rng.normal(size=chain.n)) + 1e-3
        var = spk.variance(chain, u)
        if var < 1e-12:
            continue
        mean = float(np.dot(chain.pi, u))
        floor = 0.5 * band.bound_input()(4.0 * mean * mean / var)
        assert spk.dirichlet_form(chain, u) / var - floor >= -1e-12


def test_heat_kernel_rows_and_density_bulk():
    rng = np.random.default_rng(5)
    for _ in range(25):
        n = int(rng.integers(3, 8))
        chain = spk.random_chain(n, int(rng.integers(0, 2**32)))
        t = float(rng.uniform(0.01, 5.0))
        snap = spk.heat_kernel(chain, t)
        assert np.max(np.abs(snap.Ht.sum(axis=1) - 1.0)) < 1e-10
        assert snap.Ht.min() >= -1e-12
        assert np.max(np.abs(snap.density @ chain.pi - 1.0)) < 1e-10
