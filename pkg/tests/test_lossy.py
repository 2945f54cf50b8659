import itertools
import math
import random

import pytest

from fsencrypt.errors import GuardExceededError
from fsencrypt.fsm import idle_spec, identity_spec, xor_pad_spec
from fsencrypt.lossy import (DistortionMeasure, RdPoint, hamming, hamming_ball_size,
                             nil_uncertainty_rate, rd_curve, rd_heuristic, rd_oracle,
                             relaxed_key_entropy_bound, uncertainty_set_sizes)
from fsencrypt.lz78 import lz_complexity, phrase_count
from oracles import hamming_rd

H = hamming()


def test_zero_distortion_gives_lz_complexity():
    rng = random.Random(0)
    for _ in range(50):
        x = tuple(rng.randint(0, 1) for _ in range(rng.randint(1, 10)))
        p = rd_oracle(x, 0, H)
        assert p.witness == x
        assert p.value == pytest.approx(lz_complexity(x))


def test_full_distortion_picks_all_zeros():
    p = rd_oracle((1, 0, 1, 1, 0, 1), 1, H)
    assert p.witness == (0,) * 6
    assert p.value == pytest.approx(3 * math.log2(3) / 6)
    assert round(p.value, 4) == 0.7925


def test_oracle_matches_brute_force():
    for n in (4, 6, 8):
        for x in itertools.product((0, 1), repeat=n):
            if random.Random(hash(x)).random() > 0.4:
                continue
            for D in (0, 1 / 8, 1 / 4, 1 / 2):
                value, witness = hamming_rd(x, D)
                p = rd_oracle(x, D, H)
                assert p.witness == witness, (x, D)
                assert p.value == pytest.approx(value)


def test_curve_is_monotone_in_distortion():
    rng = random.Random(1)
    levels = [0, 0.1, 0.2, 0.3, 0.5, 1]
    for _ in range(10):
        x = [rng.randint(0, 1) for _ in range(12)]
        vals = [p.value for p in rd_curve(x, levels, H)]
        assert all(a >= b - 1e-12 for a, b in zip(vals, vals[1:]))


def test_heuristic_is_feasible_upper_bound():
    rng = random.Random(2)
    for trial in range(1000):
        n = rng.randint(1, 10)
        x = [rng.randint(0, 1) for _ in range(n)]
        D = rng.choice((0, 0.1, 0.25, 0.5, 1))
        p = rd_heuristic(x, D, H, budget=60, seed=trial)
        assert sum(a != b for a, b in zip(x, p.witness)) <= n * D
        assert p.value >= rd_oracle(x, D, H).value - 1e-12
        assert not p.exact


def test_heuristic_deterministic_per_seed():
    x = [random.Random(3).randint(0, 1) for _ in range(64)]
    assert rd_heuristic(x, 0.2, H, budget=500, seed=7) == rd_heuristic(x, 0.2, H, budget=500, seed=7)


def test_non_hamming_measures():
    # asymmetric costs: flipping 1 -> 0 is free
    d = DistortionMeasure(((0, 1), (0, 0)), name="z")
    p = rd_oracle((1, 1, 0, 1), 0, d)
    assert p.witness == (0, 0, 0, 0)
    # a non-additive measure: at most one run boundary may move
    seq = DistortionMeasure(((0, 1), (1, 0)), sequence_cost=lambda a, b: float(a != tuple(b)) * 2)
    assert not seq.additive
    assert rd_oracle((0, 1, 1), 0.5, seq).witness == (0, 1, 1)
    assert rd_oracle((0, 1, 1), 1.0, seq).witness == (0, 0, 0)


def test_bad_measures_rejected():
    with pytest.raises(ValueError):
        DistortionMeasure(((0, -1), (1, 0)))
    with pytest.raises(ValueError):
        DistortionMeasure(((0, 1), (1,)))
    with pytest.raises(ValueError):
        rd_oracle((0, 1), -0.1, H)
    with pytest.raises(ValueError):
        rd_oracle((0, 2), 0, H)


def test_oracle_guard():
    assert hamming_ball_size(4, 1, 2) == 5
    with pytest.raises(GuardExceededError):
        rd_oracle([0] * 40, 0.5, H)
    # a small ball is fine even at larger n
    assert rd_oracle([0, 1] * 20, 0, H).exact


def test_point_serialization():
    d = RdPoint(0.25, 1.0, (0, 1, 1), True).to_dict()
    assert d["witness"] == "000101"


def test_nil_rate_examples():
    assert nil_uncertainty_rate([1, 1, 1], 8) == 0
    assert nil_uncertainty_rate([2**3, 1], 12) == pytest.approx(3 / 12)
    assert nil_uncertainty_rate([2**8], 8) == 1
    with pytest.raises(ValueError):
        nil_uncertainty_rate([], 3)
    with pytest.raises(ValueError):
        nil_uncertainty_rate([0], 3)


def test_uncertainty_sets_of_catalog_machines():
    for n in (1, 3, 5):
        assert set(uncertainty_set_sizes(xor_pad_spec(), n)) == {1}
        assert set(uncertainty_set_sizes(identity_spec(), n)) == {1}
        sizes = uncertainty_set_sizes(idle_spec(), n)
        assert sizes == [2**n]
        assert nil_uncertainty_rate(sizes, n) == 1
    assert sum(uncertainty_set_sizes(xor_pad_spec(), 3)) == 8 * 8


def test_relaxed_bound():
    assert relaxed_key_entropy_bound(4.0, 1, 4, 0) == 4.0
    assert relaxed_key_entropy_bound(4.0, 2, 4, 0.25) == pytest.approx(1.0)
