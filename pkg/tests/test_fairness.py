import numpy as np
import pytest

from swfair.setfn import (
    GroundSet,
    GroundSetTooLargeError,
    BitPoolSource,
    TableSource,
    WeightVector,
)
from swfair.fairness import (
    build_report,
    egalitarian_oracle_fw,
    exchange_capacity,
    minmax_check,
    shapley_exact,
    shapley_permutation_average,
    shapley_sampled,
    verify_membership,
)
from swfair.split import split
from conftest import random_bit_pool


def test_shapley_exact_known_value(three_users):
    r = shapley_exact(three_users)
    assert np.allclose(r.rates, [1.5, 0.3, 0.3], atol=1e-12)
    assert r.total() == pytest.approx(2.1, abs=1e-12)


def test_shapley_equals_permutation_average(three_users):
    exact = shapley_exact(three_users)
    avg = shapley_permutation_average(three_users)
    assert np.allclose(exact.rates, avg.rates, atol=1e-12)


def test_shapley_equals_permutation_average_random():
    rng = np.random.default_rng(61)
    for n in (4, 5, 6):
        src = random_bit_pool(rng, n)
        exact = shapley_exact(src)
        avg = shapley_permutation_average(src)
        assert np.allclose(exact.rates, avg.rates, atol=1e-9)


def test_shapley_modular():
    g = GroundSet(["1", "2", "3"])
    singles = {"1": 0.9, "2": 0.2, "3": 0.5}
    table = {}
    for mask in range(1, 8):
        users = g.users_of(mask)
        table[",".join(users)] = sum(singles[u] for u in users)
    src = TableSource(g, table)
    r = shapley_exact(src)
    assert np.allclose(r.rates, [0.9, 0.2, 0.5], atol=1e-12)
    sampled, se = shapley_sampled(src, samples=5, seed=1)
    assert np.allclose(sampled.rates, [0.9, 0.2, 0.5], atol=1e-12)
    assert np.allclose(se[np.isfinite(se)], 0.0, atol=1e-12)


def test_shapley_symmetric_users():
    g = GroundSet(["1", "2"])
    src = BitPoolSource(g, {"a": 0.8, "b": 0.3},
                        {"1": ["a", "b"], "2": ["a", "b"]})
    r = shapley_exact(src)
    assert r.rates[0] == pytest.approx(r.rates[1], abs=1e-12)


def test_shapley_size_refusal():
    g = GroundSet([str(i) for i in range(22)])
    src = BitPoolSource(g, {"a": 1.0}, {u: ["a"] for u in g})
    with pytest.raises(GroundSetTooLargeError, match="shapley_sampled"):
        shapley_exact(src)


def test_shapley_sampled_reproducible(three_users):
    a, se_a = shapley_sampled(three_users, samples=50, seed=123)
    b, se_b = shapley_sampled(three_users, samples=50, seed=123)
    assert np.array_equal(a.rates, b.rates)
    assert np.array_equal(se_a, se_b)
    with pytest.raises(ValueError):
        shapley_sampled(three_users, samples=0)


def test_shapley_sampled_error_shrinks(three_users):
    # the standard-error estimate scales as samples^(-1/2): monotone
    # decreasing over sample doublings, roughly halving per quadrupling
    sizes = [50, 100, 200, 400, 800]
    ses = []
    for m in sizes:
        _, se = shapley_sampled(three_users, samples=m, seed=7)
        ses.append(float(se.max()))
    assert all(a > b for a, b in zip(ses, ses[1:]))
    assert ses[-1] < 0.55 * ses[0]

    # the estimate itself also closes in on the exact value
    exact = shapley_exact(three_users).rates
    errs = [np.abs(shapley_sampled(three_users, samples=m, seed=7)[0].rates
                   - exact).max() for m in (40, 2560)]
    assert errs[1] < errs[0]


def test_verify_membership_shapley(three_users):
    rep = verify_membership(three_users, shapley_exact(three_users))
    assert rep.in_region
    assert rep.slack >= -1e-8


def test_verify_membership_violation(three_users):
    rep = verify_membership(three_users, np.array([2.1, 0.0, 0.0]))
    assert not rep.in_region
    assert rep.worst_constraint == {"2", "3"}
    assert rep.slack == pytest.approx(-0.1, abs=1e-9)


def test_verify_membership_sum_gap(three_users):
    rep = verify_membership(three_users, np.array([0.0, 0.0, 0.0]))
    assert not rep.in_region
    assert rep.sum_gap == pytest.approx(-2.1, abs=1e-12)


def test_verify_membership_egalitarian(three_users, unit_weights):
    rates, _ = split(three_users, unit_weights)
    rep = verify_membership(three_users, rates)
    assert rep.in_region
    doc = rep.to_dict()
    assert doc["in_region"] is True


def test_fw_oracle_unit_weights(three_users, unit_weights):
    r = egalitarian_oracle_fw(three_users, unit_weights)
    assert np.allclose(r.rates, [1.0, 0.55, 0.55], atol=1e-4)


def test_fw_oracle_skew_weights(three_users, skew_weights):
    r = egalitarian_oracle_fw(three_users, skew_weights)
    assert np.allclose(r.rates, [1.125, 0.375, 0.6], atol=1e-4)


def test_fw_oracle_singleton():
    g = GroundSet(["1"])
    src = TableSource(g, {"1": 1.7})
    r = egalitarian_oracle_fw(src, WeightVector.ones(g))
    assert r.rates[0] == pytest.approx(1.7, abs=1e-12)


def test_fw_matches_split_on_random_instances():
    rng = np.random.default_rng(53)
    for _ in range(25):
        n = int(rng.integers(3, 8))
        src = random_bit_pool(rng, n)
        w = WeightVector(src.ground, rng.uniform(0.5, 4.0, n))
        rates, _ = split(src, w)
        fw = egalitarian_oracle_fw(src, w)
        assert np.allclose(rates.rates, fw.rates, atol=1e-4)


def test_minmax_check(three_users, unit_weights):
    egal, _ = split(three_users, unit_weights)
    assert minmax_check(three_users, unit_weights, egal, trials=60, seed=3)
    shap = shapley_exact(three_users)
    assert shap.rates.max() > egal.rates.max()
    assert not minmax_check(three_users, unit_weights, shap, trials=200, seed=3)


def test_minmax_check_singleton():
    g = GroundSet(["1"])
    src = TableSource(g, {"1": 0.4})
    w = WeightVector.ones(g)
    assert minmax_check(src, w, np.array([0.4]), trials=5, seed=0)


def test_exchange_capacity_local_optimality():
    rng = np.random.default_rng(59)
    for _ in range(15):
        n = int(rng.integers(3, 7))
        src = random_bit_pool(rng, n)
        w = WeightVector(src.ground, rng.uniform(0.5, 4.0, n))
        rates, _ = split(src, w)
        ratios = rates.ratios(w)
        for i, ui in enumerate(src.ground.users):
            for j, uj in enumerate(src.ground.users):
                if ratios[i] > ratios[j] + 1e-7:
                    cap = exchange_capacity(src, rates, donor=ui, receiver=uj)
                    assert cap == pytest.approx(0.0, abs=1e-7)


def test_efficiency_sums(three_users, skew_weights):
    shap = shapley_exact(three_users)
    assert shap.total() == pytest.approx(2.1, abs=1e-9)
    rates, _ = split(three_users, skew_weights)
    assert rates.total() == pytest.approx(2.1, abs=1e-8)


def test_build_report(three_users, unit_weights):
    egal, _ = split(three_users, unit_weights)
    shap = shapley_exact(three_users)
    report = build_report(three_users, unit_weights,
                          {"egalitarian": egal, "shapley": shap})
    assert report.in_region == {"egalitarian": True, "shapley": True}
    assert report.max_ratio["shapley"] == pytest.approx(1.5)
    assert report.max_ratio["egalitarian"] == pytest.approx(1.0)
    # moving to the egalitarian point halves the peak rate: lifetime 1/1 vs 1/1.5
    assert report.lifetime_proxy["egalitarian"] == pytest.approx(1.0)
    assert report.lifetime_proxy["shapley"] == pytest.approx(2.0 / 3.0)
    text = report.to_text()
    assert "egalitarian" in text and "shapley" in text
    doc = report.to_dict()
    assert doc["shapley"]["sum_rate"] == pytest.approx(2.1)
