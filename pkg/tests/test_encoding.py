import io
import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nomacim import Assignment, RadioConfig
from nomacim.encoding import (DEFAULT_SCALING, EnergyTerms, NetworkWeights, build_energy_terms,
                              decode, derive_weights, dump_problem, encode, ising_energy,
                              load_problem, nn_energy, to_ising)
from nomacim.radio import build_rate_table, compute_cnr, generate_scenario, total_rate

CFG = RadioConfig()


def table_for(nu, nc, seed, q=1.0):
    cfg = CFG.replace(num_channels=nc)
    return build_rate_table(compute_cnr(generate_scenario(cfg, nu, seed)), np.full(nc, q), cfg)


def all_binary(n):
    return ((np.arange(2 ** n)[:, None] >> np.arange(n)) & 1).astype(float)


def direct_terms(x, S):
    n, nc = x.shape
    e1 = 0.0
    for j in range(nc):
        for i in range(n):
            for k in range(n):
                if i != k:
                    e1 -= S[i, j, k] * x[i, j] * x[k, j]
    e2 = sum((x[i].sum() - 1) ** 2 for i in range(n))
    e3 = sum((x[:, j].sum() - 2) ** 2 for j in range(nc))
    return e1, e2, e3


def test_terms_match_direct_evaluation():
    terms = build_energy_terms(table_for(5, 3, 1))
    rng = np.random.default_rng(0)
    for _ in range(20):
        x = rng.integers(0, 2, (6, 3))
        e1, e2, e3 = direct_terms(x, terms.pair_rate)
        assert terms.e1(x) == pytest.approx(e1, rel=1e-13, abs=1e-13)
        assert terms.e2(x) == e2 and terms.e3(x) == e3


def test_terms_special_configurations():
    terms = build_energy_terms(table_for(4, 2, 3))
    feasible = Assignment.from_pairs([(0, 1), (2, 3)]).x
    assert terms.e2(feasible) == 0 and terms.e3(feasible) == 0
    zero = np.zeros((4, 2))
    assert terms.e1(zero) == 0 and terms.e2(zero) == 4 and terms.e3(zero) == 8
    twice = feasible.copy()
    twice[0, 1] = 1
    assert terms.e2(twice) == 1


def test_terms_normalised_and_diagonal_free():
    tab = table_for(10, 6, 4)
    terms = build_energy_terms(tab)
    assert terms.pair_rate.max() == pytest.approx(1.0, rel=1e-15)
    idx = np.arange(12)
    assert np.all(terms.pair_rate[idx, :, idx] == 0)
    assert terms.rate_scale == pytest.approx(tab.pair_sum().max(), rel=1e-15)


def test_weight_structure():
    terms = build_energy_terms(table_for(6, 3, 5))
    eps, zeta, eta = 1.3, 2.0, 2.5
    w = derive_weights(terms, (eps, zeta, eta))
    W = w.w.reshape(6, 3, 6, 3)
    S = terms.pair_rate
    assert np.array_equal(w.w, w.w.T)
    assert np.all(np.diag(w.w) == 0)
    for i, j, k, l in itertools.product(range(6), range(3), range(6), range(3)):
        if i == k and j == l:
            ref = 0.0
        elif i == k:
            ref = -2 * zeta
        elif j == l:
            ref = 2 * (eps * S[i, j, k] - eta)
        else:
            ref = 0.0
        assert W[i, j, k, l] == pytest.approx(ref, rel=1e-14, abs=1e-15)
    assert np.all(w.theta == -(zeta + 3 * eta))


def test_derive_weights_rejects_non_positive_scaling():
    terms = build_energy_terms(table_for(4, 2, 0))
    with pytest.raises(ValueError):
        derive_weights(terms, (1.0, 0.0, 1.0))


def test_to_ising_zero():
    z = NetworkWeights(np.zeros((4, 4)), np.zeros(4), (1, 1, 1), (2, 2))
    p = to_ising(z)
    assert np.all(p.J == 0) and np.all(p.h == 0)


def test_to_ising_formulas():
    _, w, p = encode(table_for(8, 4, 6))
    assert p.num_spins == 32
    np.testing.assert_array_equal(p.J, w.w / 2)
    np.testing.assert_allclose(p.h, w.theta - w.w.sum(axis=1) / 2, rtol=1e-15)
    assert p.lam is p.h


def test_spin_count_full_load():
    _, _, p = encode(table_for(12, 6, 0))
    assert p.num_spins == 72


def offset_constant(w):
    return 0.25 * w.w.sum() - w.theta.sum()


def test_constant_offset_random_small_network():
    rng = np.random.default_rng(1)
    a = rng.normal(size=(4, 4))
    wmat = a + a.T
    np.fill_diagonal(wmat, 0)
    w = NetworkWeights(wmat, rng.normal(size=4), (1, 1, 1), (2, 2))
    p = to_ising(w)
    for x in rng.integers(0, 2, (10, 4)):
        diff = ising_energy(2 * x - 1, p) - 2 * nn_energy(x, w)
        assert diff == pytest.approx(offset_constant(w), rel=1e-12, abs=1e-12)


def test_network_energy_relation_to_objective():
    tab = table_for(11, 6, 8)
    terms, w, _ = encode(tab)
    eps = DEFAULT_SCALING[0]
    a = Assignment.from_pairs([(0, 1), (2, 3), (4, 5), (6, 7), (8, 9), (10, 11)])
    # penalties vanish; the network energy lacks the constant part of E2/E3
    e_obj = terms.total(a.x)
    assert e_obj == pytest.approx(-eps * 2 * total_rate(a, tab) / terms.rate_scale, rel=1e-12)
    assert nn_energy(a.x, w) == pytest.approx(e_obj - terms.constant(), rel=1e-12)
    rng = np.random.default_rng(2)
    for x in rng.integers(0, 2, (20, 12, 6)):
        assert nn_energy(x, w) == pytest.approx(terms.total(x) - terms.constant(), rel=1e-11)


def test_zero_state_network_energy():
    _, w, _ = encode(table_for(6, 3, 0))
    assert nn_energy(np.zeros(18), w) == 0.0


def test_single_flip_energy_change():
    _, _, p = encode(table_for(8, 4, 9))
    rng = np.random.default_rng(3)
    for _ in range(30):
        s = rng.choice([-1.0, 1.0], p.num_spins)
        a = rng.integers(p.num_spins)
        t = s.copy()
        t[a] = -t[a]
        field = p.J[a] @ s - p.h[a]
        assert ising_energy(t, p) - ising_energy(s, p) == pytest.approx(2 * s[a] * field,
                                                                         rel=1e-10, abs=1e-10)


@pytest.mark.parametrize("nu,nc", [(2, 2), (3, 2), (4, 2), (3, 3), (5, 3), (6, 3)])
def test_penalty_dominance(nu, nc):
    n = 2 * nc * nc
    X = all_binary(n)
    G = X.reshape(-1, 2 * nc, nc)
    feas = (G.sum(2) == 1).all(1) & (G.sum(1) == 2).all(1)
    for seed in range(3):
        terms, w, _ = encode(table_for(nu, nc, seed))
        E = -0.5 * np.einsum("si,ij,sj->s", X, w.w, X, optimize=True) + X @ w.theta
        assert E[feas].max() < E[~feas].min()
        # the same with the constant restored
        T = E + terms.constant()
        assert np.all(T[feas] <= 0)


def test_decode_round_trip_and_empty():
    tab = table_for(6, 3, 2)
    a = Assignment.from_pairs([(0, 4), (1, 2), (3, 5)])
    d = decode(a.spins(), tab)
    assert d.assignment == a and d.feasible and not d.repaired
    d = decode(-np.ones(18), tab)
    assert d.assignment.is_feasible() and d.repaired and not d.feasible


def test_decode_repair_prefers_throughput():
    tab = table_for(4, 2, 7)
    S = tab.pair_sum()
    # entity 0 on both channels, everyone else alone on channel 0
    x = np.zeros((4, 2), int)
    x[0] = 1
    x[1, 0] = 1
    x[2, 1] = 1
    d = decode(2 * x - 1, tab)
    kept = 0 if S[0, 0, 1] >= S[0, 1, 2] else 1
    assert d.assignment.channel_of()[0] == kept


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 10 ** 6), nu=st.integers(2, 8))
def test_decode_always_feasible(seed, nu):
    tab = table_for(nu, 4, seed)
    sigma = np.random.default_rng(seed).choice([-1, 1], 32)
    d = decode(sigma, tab)
    assert d.assignment.is_feasible()
    assert d.feasible != d.repaired


def test_ground_state_small_instance_is_best_assignment():
    import oracles
    cfg = CFG.replace(num_channels=2)
    sc = generate_scenario(cfg, 4, 12)
    tab = build_rate_table(compute_cnr(sc), [1.0, 1.0], cfg)
    _, _, p = encode(tab)
    S = all_binary(8) * 2 - 1
    E = -0.5 * np.einsum("si,ij,sj->s", S, p.J, S) + S @ p.h
    d = decode(S[np.argmin(E)], tab)
    assert d.feasible
    best, args = oracles.best_assignment(compute_cnr(sc).values.tolist(), 2, 1.0,
                                         cfg.qos_factor, cfg.channel_bandwidth_hz)
    got = tuple(frozenset(m) for m in d.assignment.pairs())
    assert got in args


def test_problem_text_round_trip(tmp_path):
    _, _, p = encode(table_for(5, 3, 1))
    text = dump_problem(p)
    lines = text.splitlines()
    assert lines[0] == "18" and len(lines) == 20
    q = load_problem(io.StringIO(text), p.shape)
    assert np.array_equal(q.J, p.J) and np.array_equal(q.h, p.h)
    dump_problem(p, tmp_path / "p.txt")
    assert np.array_equal(load_problem(tmp_path / "p.txt").h, p.h)
