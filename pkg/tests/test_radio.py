import io
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from nomacim import Assignment, RadioConfig
from nomacim.errors import InvalidAssignment
from nomacim.radio import (CnrMatrix, Scenario, allocate_power, build_rate_table, compute_cnr,
                           dump_scenario, generate_scenario, load_scenario, per_user_rates,
                           total_rate)

CFG = RadioConfig()


def test_config_derived_quantities():
    assert CFG.channel_bandwidth_hz == pytest.approx(5e6 / 6, rel=1e-15)
    assert CFG.qos_factor == 4.0
    assert CFG.noise_power_w == pytest.approx(1e-20 * 5e6 / 6, rel=1e-12)
    assert CFG.min_rate_bps == pytest.approx(2 * 5e6 / 6, rel=1e-15)


@pytest.mark.parametrize("bad", [dict(min_rate_bps_per_hz=1.0), dict(num_channels=0),
                                 dict(total_power_w=0.0), dict(total_bandwidth_hz=-1.0),
                                 dict(min_distance_m=600.0)])
def test_config_rejects_invalid(bad):
    with pytest.raises(ValueError):
        RadioConfig(**bad)


def test_generate_scenario_shape_and_bounds():
    sc = generate_scenario(CFG, 12, 7)
    assert sc.num_users == 12
    assert sc.fading.shape == (12, 6)
    assert np.all((sc.distances >= 50) & (sc.distances <= 500))
    assert np.all(sc.fading >= 0)


def test_generate_scenario_deterministic():
    a, b = generate_scenario(CFG, 12, 7), generate_scenario(CFG, 12, 7)
    assert a == b
    assert a.distances.tobytes() == b.distances.tobytes()
    assert a.fading.tobytes() == b.fading.tobytes()
    assert generate_scenario(CFG, 12, 8) != a


@pytest.mark.parametrize("n", [1, 13])
def test_generate_scenario_rejects_user_count(n):
    with pytest.raises(ValueError):
        generate_scenario(CFG, n, 0)


def test_scenarios_nest_across_sizes():
    small = generate_scenario(CFG, 6, 3)
    big = generate_scenario(CFG.replace(num_channels=8), 10, 3)
    assert np.array_equal(small.distances, big.distances[:6])
    assert np.array_equal(small.fading, big.fading[:6, :6])


def test_placement_is_uniform_in_area():
    d = np.concatenate([generate_scenario(CFG, 12, s).distances for s in range(400)])
    # P(d <= r) = (r^2 - 50^2) / (500^2 - 50^2)
    for r in (150.0, 300.0, 450.0):
        p = (r * r - 2500) / (250000 - 2500)
        emp = np.mean(d <= r)
        assert abs(emp - p) < 3 * math.sqrt(p * (1 - p) / d.size) + 1e-3


def test_fading_has_unit_mean_square():
    g = np.concatenate([generate_scenario(CFG, 12, s).fading.ravel() for s in range(300)])
    # E[g^2] = 1, Var[g^2] = 1 for exponential power
    assert abs(np.mean(g ** 2) - 1) < 4 / math.sqrt(g.size)


def test_cnr_reference_value():
    sc = Scenario(CFG, [100.0, 200.0], np.ones((2, 6)))
    G = compute_cnr(sc).values
    assert G[0, 0] == pytest.approx(1.2e8, rel=1e-12)
    # doubling the distance at alpha=3 divides by 8
    assert G[0, 0] / G[1, 0] == pytest.approx(8.0, rel=1e-14)


def test_cnr_zero_fading():
    sc = Scenario(CFG, [100.0, 200.0], np.zeros((2, 6)))
    assert np.all(compute_cnr(sc).values == 0)


def test_cnr_matches_oracle():
    sc = generate_scenario(CFG, 9, 11)
    G = compute_cnr(sc).values
    for i in range(9):
        for j in range(6):
            ref = oracles.cnr(sc.fading[i, j], sc.distances[i])
            assert G[i, j] == pytest.approx(ref, rel=1e-12)


def test_rate_table_split_example():
    # CNRs 100 (strong) and 10 (weak), q = 1: split 0.175 / 0.825
    cfg = CFG.replace(num_channels=1)
    tab = build_rate_table(CnrMatrix(np.array([[100.0], [10.0]])), [1.0], cfg)
    bc = cfg.channel_bandwidth_hz
    assert tab.entries[0, 0, 1] == pytest.approx(bc * math.log2(1 + 17.5), rel=1e-13)
    assert tab.entries[1, 0, 0] == pytest.approx(2 * bc, rel=1e-12)


def test_rate_table_matches_oracle_and_dummies():
    sc = generate_scenario(CFG, 9, 5)
    G = compute_cnr(sc).values
    tab = build_rate_table(compute_cnr(sc), np.full(6, 2.0), CFG)
    assert tab.entries.shape == (12, 6, 12)
    assert tab.num_real_users == 9 and tab.num_dummy_users == 3
    A, bc = CFG.qos_factor, CFG.channel_bandwidth_hz
    for j in range(6):
        for i in range(9):
            for k in range(9):
                if i == k:
                    continue
                ri, _ = oracles.pair_rates(G[i, j], G[k, j], 2.0, A, bc)
                if tab.infeasible[i, j, k]:
                    assert tab.entries[i, j, k] == 0
                else:
                    assert tab.entries[i, j, k] == pytest.approx(ri, rel=1e-11)
            for k in range(9, 12):
                assert tab.entries[i, j, k] == pytest.approx(oracles.oma_rate(G[i, j], 2.0, bc),
                                                             rel=1e-12)
    assert np.all(tab.entries[9:] == 0)
    assert np.all(np.isfinite(tab.entries)) and np.all(tab.entries >= 0)


def test_weak_user_rate_equals_floor():
    sc = generate_scenario(CFG, 12, 2)
    G = compute_cnr(sc).values
    tab = build_rate_table(compute_cnr(sc), np.ones(6), CFG)
    floor = CFG.min_rate_bps
    count = 0
    for j in range(6):
        for i in range(12):
            for k in range(12):
                if i != k and G[i, j] < G[k, j] and not tab.infeasible[i, j, k]:
                    assert tab.entries[i, j, k] == pytest.approx(floor, rel=1e-9)
                    count += 1
    assert count > 0


def test_infeasible_pairs_flagged():
    cfg = CFG.replace(num_channels=1)
    tab = build_rate_table(CnrMatrix(np.array([[100.0], [2.0]])), [1.0], cfg)
    # floor = 4*3/100 + 3/2 = 1.62 > 1
    assert tab.infeasible[0, 0, 1] and tab.infeasible[1, 0, 0]
    assert tab.entries[0, 0, 1] == 0 and tab.entries[1, 0, 0] == 0


def test_tie_break_lower_index_strong():
    cfg = CFG.replace(num_channels=1)
    tab = build_rate_table(CnrMatrix(np.array([[50.0], [50.0]])), [1.0], cfg)
    bc = cfg.channel_bandwidth_hz
    assert tab.entries[1, 0, 0] == pytest.approx(2 * bc, rel=1e-12)
    assert tab.entries[0, 0, 1] > tab.entries[1, 0, 0]


def test_rate_table_rejects_bad_power():
    cnr = compute_cnr(generate_scenario(CFG, 4, 0))
    with pytest.raises(ValueError):
        build_rate_table(cnr, np.zeros(6), CFG)


def test_total_rate_hand_evaluation():
    cfg = CFG.replace(num_channels=2)
    sc = generate_scenario(cfg, 4, 21)
    G = compute_cnr(sc).values
    tab = build_rate_table(compute_cnr(sc), [1.0, 1.0], cfg)
    a = Assignment.from_pairs([(0, 3), (1, 2)])
    A, bc = cfg.qos_factor, cfg.channel_bandwidth_hz
    ref = sum(oracles.pair_rates(G[0, 0], G[3, 0], 1.0, A, bc)) \
        + sum(oracles.pair_rates(G[1, 1], G[2, 1], 1.0, A, bc))
    assert total_rate(a, tab) == pytest.approx(ref, rel=1e-12)
    assert per_user_rates(a, tab).sum() == pytest.approx(ref, rel=1e-12)


def test_total_rate_all_dummy_channel_contributes_zero():
    cfg = CFG.replace(num_channels=3)
    sc = generate_scenario(cfg, 2, 4)
    tab = build_rate_table(compute_cnr(sc), np.ones(3), cfg)
    a = Assignment.from_pairs([(0, 1), (2, 3), (4, 5)])
    only = Assignment.from_pairs([(0, 1), (2, 4), (3, 5)])
    assert total_rate(a, tab) == pytest.approx(tab.pair_sum()[0, 0, 1], rel=1e-14)
    assert total_rate(only, tab) == total_rate(a, tab)


def test_total_rate_rejects_invalid():
    tab = build_rate_table(compute_cnr(generate_scenario(CFG.replace(num_channels=2), 4, 0)),
                           [1.0, 1.0], CFG.replace(num_channels=2))
    x = np.zeros((4, 2), dtype=int)
    x[:3, 0] = 1
    x[3, 1] = 1
    with pytest.raises(InvalidAssignment):
        total_rate(Assignment(x), tab)


def test_allocate_power_meets_floors_and_budget():
    sc = generate_scenario(CFG, 10, 9)
    a = Assignment.from_pairs([(0, 1), (2, 3), (4, 5), (6, 7), (8, 10), (9, 11)])
    alloc = allocate_power(a, compute_cnr(sc), CFG)
    assert alloc.q.sum() == pytest.approx(12.0, rel=1e-12)
    assert np.all(alloc.per_user_rates >= CFG.min_rate_bps * (1 - 1e-9))
    assert alloc.total_rate == pytest.approx(alloc.per_user_rates.sum(), rel=1e-12)


def test_scenario_text_round_trip(tmp_path):
    sc = generate_scenario(CFG.replace(pathloss_exponent=3.7), 7, 99)
    text = dump_scenario(sc)
    assert load_scenario(io.StringIO(text)) == sc
    path = tmp_path / "s.txt"
    dump_scenario(sc, path)
    assert load_scenario(path) == sc


@settings(max_examples=40, deadline=None)
@given(nu=st.integers(2, 12), seed=st.integers(0, 2 ** 32 - 1))
def test_rate_table_swap_roles(nu, seed):
    sc = generate_scenario(CFG, nu, seed)
    G = compute_cnr(sc).values
    tab = build_rate_table(compute_cnr(sc), np.ones(6), CFG)
    R, bad = tab.entries, tab.infeasible
    for j in range(6):
        for i in range(nu):
            for k in range(i + 1, nu):
                if bad[i, j, k]:
                    continue
                weak, strong = (i, k) if G[i, j] < G[k, j] else (k, i)
                assert R[strong, j, weak] >= R[weak, j, strong]
