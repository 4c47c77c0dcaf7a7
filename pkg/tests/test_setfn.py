import json

import numpy as np
import pytest

from swfair.setfn import (
    BitPoolSource,
    GroundSet,
    IncompleteTableError,
    InvalidReductionError,
    InvalidSubsetError,
    GroundSetTooLargeError,
    ModelLoadError,
    TableSource,
    WeightVector,
    bit_indices,
    check_monotone,
    check_submodular,
    conditional_entropy,
    entropy,
    greedy_vertex,
    load_source,
    reduce,
    restrict,
    source_from_dict,
    source_to_dict,
)
from conftest import random_bit_pool


def test_ground_set_basics():
    g = GroundSet(["a", "b", "c"])
    assert g.n == 3 and g.full_mask == 0b111
    assert g.mask_of(["a", "c"]) == 0b101
    assert g.users_of(0b110) == ("b", "c")
    with pytest.raises(ValueError):
        GroundSet(["a", "a"])
    with pytest.raises(ValueError):
        GroundSet([])
    with pytest.raises(InvalidSubsetError):
        g.mask_of(["z"])
    with pytest.raises(InvalidSubsetError):
        g.as_mask(0b1000)


def test_entropy_known_values(three_users):
    assert entropy(three_users, ["1"]) == pytest.approx(2.0, abs=1e-12)
    assert entropy(three_users, []) == 0.0
    assert entropy(three_users, ["2", "3"]) == pytest.approx(1.1, abs=1e-12)
    assert entropy(three_users, ["1", "2", "3"]) == pytest.approx(2.1, abs=1e-12)
    with pytest.raises(InvalidSubsetError):
        entropy(three_users, ["1", "9"])


def test_conditional_entropy(three_users):
    assert conditional_entropy(three_users, ["1"]) == pytest.approx(1.0, abs=1e-12)
    assert conditional_entropy(three_users, ["1", "2", "3"]) == pytest.approx(2.1)
    assert conditional_entropy(three_users, []) == 0.0


def test_bit_pool_validation():
    g = GroundSet(["1", "2"])
    with pytest.raises(ValueError):
        BitPoolSource(g, {"a": 0.0}, {"1": ["a"]})
    with pytest.raises(ValueError):
        BitPoolSource(g, {"a": 1.0}, {"1": ["zz"]})
    with pytest.raises(InvalidSubsetError):
        BitPoolSource(g, {"a": 1.0}, {"9": ["a"]})


def test_bit_pool_monotone_and_submodular_small():
    rng = np.random.default_rng(7)
    for _ in range(5):
        src = random_bit_pool(rng, 6)
        n = src.ground.n
        for mask in range(1 << n):
            for i in range(n):
                if mask >> i & 1:
                    continue
                assert src.value(mask | 1 << i) >= src.value(mask) - 1e-12
        assert check_submodular(src)[0]
    assert check_monotone(src)[0]


def test_table_source_roundtrip(three_users):
    doc = source_to_dict(three_users)
    assert doc["type"] == "bit_pool"
    again = source_from_dict(doc)
    for mask in range(8):
        assert again.value(mask) == three_users.value(mask)

    g = three_users.ground
    values = {",".join(g.users_of(m)): three_users.value(m) for m in range(1, 8)}
    table = TableSource(g, values)
    for mask in range(8):
        assert table.value(mask) == pytest.approx(three_users.value(mask), abs=0)
    table_doc = source_to_dict(table)
    assert source_from_dict(table_doc).value(0b011) == pytest.approx(2.1)


def test_table_source_incomplete():
    g = GroundSet(["1", "2"])
    with pytest.raises(IncompleteTableError):
        TableSource(g, {"1": 1.0, "2": 1.0})
    with pytest.raises(ValueError):
        TableSource(g, {"1": 1.0, "2": 1.0, "1,2": 1.5, "": 0.5})


def test_load_source_errors(tmp_path):
    p = tmp_path / "model.json"
    p.write_text(json.dumps({"type": "mystery"}))
    with pytest.raises(ModelLoadError, match="mystery"):
        load_source(p)
    p.write_text("{not json")
    with pytest.raises(ModelLoadError):
        load_source(p)
    p.write_text(json.dumps({"type": "bit_pool", "users": ["1"]}))
    with pytest.raises(ModelLoadError):
        load_source(p)


def test_reduce_known_values(three_users, skew_weights):
    g = reduce(three_users, ["3"], skew_weights)
    gs = three_users.ground
    assert g.ground_mask == gs.mask_of(["1", "2"])
    assert g.value(0) == 0.0
    assert g.value(gs.mask_of(["2"])) == pytest.approx(0.3, abs=1e-12)
    assert g.value(gs.mask_of(["1", "2"])) == pytest.approx(0.7, abs=1e-12)
    with pytest.raises(InvalidReductionError):
        reduce(three_users, [], skew_weights)
    with pytest.raises(InvalidReductionError):
        reduce(three_users, ["1", "2", "3"], skew_weights)


def test_reduce_empty_is_exact_zero():
    rng = np.random.default_rng(3)
    for _ in range(20):
        src = random_bit_pool(rng, 5)
        w = WeightVector(src.ground, rng.uniform(0.5, 4.0, 5))
        pivot = int(rng.integers(1, src.ground.full_mask))
        g = reduce(src, pivot, w)
        assert g.value(0) == 0.0
        # nested reduction stays exactly normalized too
        rest = g.ground_mask
        sub = rest & (rest - 1)
        if sub and sub != rest:
            g2 = reduce(g, sub, w)
            assert g2.value(0) == 0.0


def reduce_identity_holds(src, w, pivot):
    # g(X) - lam' w(X) must equal f(X | pivot) - f(pivot) - lam w(X)
    # with lam = lam' + f(pivot)/w(pivot), for every X in the complement.
    g = reduce(src, pivot, w)
    rest = g.ground_mask
    lam_p = g.value(rest) / w.of_mask(rest)
    lam = lam_p + src.value(pivot) / w.of_mask(pivot)
    sub = rest
    while True:
        lhs = g.value(sub) - lam_p * w.of_mask(sub)
        rhs = src.value(sub | pivot) - src.value(pivot) - lam * w.of_mask(sub)
        assert lhs == pytest.approx(rhs, abs=1e-9)
        if sub == 0:
            break
        sub = (sub - 1) & rest


def test_reduce_identity_on_example(three_users, skew_weights, unit_weights):
    for w in (skew_weights, unit_weights):
        for pivot in range(1, 7):
            reduce_identity_holds(three_users, w, pivot)


def test_reduce_identity_on_random_instances():
    rng = np.random.default_rng(11)
    for _ in range(30):
        src = random_bit_pool(rng, 6)
        n = src.ground.n
        w = WeightVector(src.ground, rng.uniform(0.5, 4.0, n))
        pivot = int(rng.integers(1, src.ground.full_mask))
        reduce_identity_holds(src, w, pivot)


def test_restrict_shares_values(three_users):
    sub = restrict(three_users, ["2", "3"])
    gs = three_users.ground
    assert sub.value(gs.mask_of(["2"])) == three_users.value(gs.mask_of(["2"]))
    assert sub.ground_mask == gs.mask_of(["2", "3"])
    with pytest.raises(InvalidSubsetError):
        restrict(sub, ["1"])


def test_greedy_vertex_paper_extreme_points(three_users):
    x = greedy_vertex(three_users, ["1", "2", "3"])
    assert np.allclose(x, [2.0, 0.1, 0.0], atol=1e-12)
    x = greedy_vertex(three_users, ["3", "2", "1"])
    assert np.allclose(x, [1.0, 0.5, 0.6], atol=1e-12)


def test_greedy_vertex_zero_function():
    g = GroundSet(["1", "2"])
    zero = TableSource(g, {"1": 0.0, "2": 0.0, "1,2": 0.0})
    assert np.allclose(greedy_vertex(zero, ["2", "1"]), 0.0)


def test_greedy_vertex_rejects_non_permutation(three_users):
    with pytest.raises(ValueError):
        greedy_vertex(three_users, ["1", "2"])
    with pytest.raises(ValueError):
        greedy_vertex(three_users, ["1", "2", "2"])
    with pytest.raises(InvalidSubsetError):
        greedy_vertex(three_users, ["1", "2", "z"])


def test_greedy_vertex_telescopes_and_stays_in_polyhedron():
    rng = np.random.default_rng(5)
    for _ in range(10):
        src = random_bit_pool(rng, 5)
        n = src.ground.n
        for _ in range(6):
            order = list(rng.permutation(n))
            x = greedy_vertex(src, [int(i) for i in order])
            assert x.sum() == pytest.approx(src.value(src.ground_mask), abs=1e-9)
            for mask in range(1 << n):
                assert x[bit_indices(mask)].sum() <= src.value(mask) + 1e-9


def test_prefix_and_all_values_match_value(three_users, skew_weights):
    g = reduce(three_users, ["3"], skew_weights)
    elems = bit_indices(g.ground_mask)
    vals = g.all_values(elems)
    for lm in range(1 << len(elems)):
        mask = 0
        for k in bit_indices(lm):
            mask |= 1 << elems[k]
        assert vals[lm] == pytest.approx(g.value(mask), abs=1e-12)
    order = np.array(elems[::-1])
    pv = g.prefix_values(order)
    mask = 0
    assert pv[0] == 0.0
    for k, idx in enumerate(order):
        mask |= 1 << int(idx)
        assert pv[k + 1] == pytest.approx(g.value(mask), abs=1e-12)


def test_check_submodular(three_users):
    ok, witness = check_submodular(three_users)
    assert ok and witness is None

    g = GroundSet(["1", "2"])
    supermodular = TableSource(g, {"1": 0.0, "2": 0.0, "1,2": 1.0})
    ok, witness = check_submodular(supermodular)
    assert not ok
    X, Y, i = witness
    assert set(X) <= set(Y)

    modular = TableSource(g, {"1": 0.5, "2": 0.25, "1,2": 0.75})
    assert check_submodular(modular)[0]

    big = GroundSet([str(i) for i in range(25)])
    big_src = BitPoolSource(big, {"a": 1.0}, {u: ["a"] for u in big})
    with pytest.raises(GroundSetTooLargeError):
        check_submodular(big_src)


def test_weight_vector(three_users):
    g = three_users.ground
    w = WeightVector(g, [3, 1, 3])
    assert w.of_mask(g.mask_of(["1", "2"])) == 4.0
    assert w["2"] == 1.0
    with pytest.raises(ValueError):
        WeightVector(g, [1.0, 0.0, 1.0])
    with pytest.raises(ValueError):
        WeightVector(g, [1.0, 1.0])
