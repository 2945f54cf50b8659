import itertools
import json
import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from fsencrypt.bounds import (BoundsReport, TERM_NAMES, best_block_length, block_code_chain,
                              block_entropy_rate, build_block_shannon_fsm, check_compressor_lossless,
                              check_compressor_length_bound, delta_bound, empirical_entropy_bound, m_grid,
                              reports_to_csv, sigma_lower_bound, smoothed_block_distribution,
                              compressor_length_lower_bound)
from fsencrypt.fsm import key_rate, xor_pad_spec
from fsencrypt.lz78 import lz78_encode, phrase_count
from fsencrypt.schemes import otp_lz_encrypt
from fsencrypt.fsm import KeyTape
from oracles import delta_formula, naive_block_entropy


def test_block_entropy_examples():
    assert block_entropy_rate((0, 1) * 4, 2) == 0
    assert block_entropy_rate((0, 1, 0, 0, 0, 1, 1, 1), 2) == 0.75
    assert block_entropy_rate((0, 1, 1, 0, 1), 5) == 0
    assert block_entropy_rate((0, 1, 1), 2) == 0          # trailing symbol dropped
    with pytest.raises(ValueError):
        block_entropy_rate((0, 1), 3)


@given(st.lists(st.integers(0, 2), min_size=1, max_size=200), st.integers(1, 6))
def test_block_entropy_matches_oracle(x, m):
    if m > len(x):
        return
    assert block_entropy_rate(x, m) == pytest.approx(naive_block_entropy(x, m), abs=1e-12)


def test_delta_reference_value():
    # largest phrase count at n = 65536, alpha = 2: all 4094 phrases of lengths 1..11,
    # then 2047 phrases of length 12 with 10 symbols left over for one more
    value, terms = delta_bound(2, 65536, 4, 2)
    assert value == pytest.approx(delta_formula(2, 65536, 4, 2, 4094 + 2047 + 1), rel=1e-12)
    assert value == pytest.approx(4.053457789915521, rel=1e-12)
    assert terms["phrase_count"] == 1.49951171875
    assert value == pytest.approx(sum(terms.values()))
    assert tuple(terms) == TERM_NAMES


def test_delta_terms_nonnegative_and_first_term_vanishes():
    for s, n, m in itertools.product((1, 2, 5), (16, 1000, 2**20), (1, 3, 4)):
        value, terms = delta_bound(s, n, m, 2)
        assert value > 0 and min(terms.values()) >= 0
        if s == 1:
            assert terms["state_info"] == 0


def test_grid_minimum():
    for s in (1, 2, 4):
        for n in (2**10, 2**14, 2**20):
            m, value, _ = best_block_length(s, n, 2)
            assert value == min(delta_bound(s, n, k, 2)[0] for k in m_grid(n))
            assert delta_bound(s, n, m, 2)[0] == value
    assert list(m_grid(2**16)) == list(range(1, 17))


def test_delta_has_interior_minimum():
    vals = [delta_bound(2, 2**16, m, 2)[0] for m in m_grid(2**16)]
    k = vals.index(min(vals))
    assert 0 < k < len(vals) - 1


def test_delta_overflow_guard():
    with pytest.raises(OverflowError):
        delta_bound(1, 10**6, 600, 2)
    with pytest.raises(ValueError):
        delta_bound(1, 3, 4, 2)


def test_sigma_lower_small_n_is_zero():
    rep = sigma_lower_bound((0,) * 1000, 1)
    assert rep.sigma_lower == 0 and rep.delta >= rep.lz_complexity
    assert rep.chosen_m == rep.m
    assert rep.delta == pytest.approx(sum(rep.term_breakdown.values()))


def test_sigma_lower_never_exceeds_achievable_rates():
    rng = random.Random(0)
    for n in (64, 512, 4096):
        x = [rng.randint(0, 1) for _ in range(n)]
        rep = sigma_lower_bound(x, 1)
        assert rep.sigma_lower <= key_rate(xor_pad_spec(), x)
        assert rep.sigma_lower <= otp_lz_encrypt(x, 2, KeyTape(seed=0)).key_rate


def test_sigma_lower_monotone_on_periodic_ladder():
    base = [0, 1, 1, 0, 1, 0, 0, 0, 1, 1, 1]
    prev = -1.0
    for k in range(10, 21, 2):
        x = (base * ((1 << k) // len(base) + 1))[:1 << k]
        rep = sigma_lower_bound(x, 1)
        assert rep.sigma_lower >= prev
        prev = rep.sigma_lower


def test_report_serialization():
    rep = sigma_lower_bound([0, 1] * 50, 2)
    d = json.loads(rep.to_json())
    assert d["n"] == 100 and set(d["term_breakdown"]) == set(TERM_NAMES)
    text = reports_to_csv([("a", rep), ("b", rep)])
    lines = text.splitlines()
    assert lines[0].startswith("# schema:")
    assert lines[1].split(",") == BoundsReport.csv_header()
    assert len(lines) == 4


def test_empirical_entropy_bound_for_xor_pad():
    rng = random.Random(1)
    for _ in range(20):
        x = [rng.randint(0, 1) for _ in range(rng.choice((64, 256, 1000)))]
        for m in range(1, 9):
            assert key_rate(xor_pad_spec(), x) >= empirical_entropy_bound(x, m, 1, 2)


# -- block Shannon compressor ------------------------------------------------

def test_shannon_uniform_blocks():
    Q = {b: Fraction(1, 4) for b in itertools.product((0, 1), repeat=2)}
    code = build_block_shannon_fsm(Q, 2)
    x = [random.Random(2).randint(0, 1) for _ in range(40)]
    assert code.length(x) == 40
    assert all(len(w) == 2 for w in code.codewords.values())


def test_shannon_empirical_example():
    Q = {(0, 1): Fraction(1, 2), (0, 0): Fraction(1, 4), (1, 1): Fraction(1, 4)}
    code = build_block_shannon_fsm(Q, 2)
    assert code.length((0, 1, 0, 0, 0, 1, 1, 1)) == 6
    with pytest.raises(ValueError):
        code.length((1, 0))


def test_shannon_state_count():
    code = build_block_shannon_fsm({b: 1 for b in itertools.product((0, 1), repeat=3)}, 3)
    assert code.q == 7
    assert build_block_shannon_fsm({(0,) * 4: 1}, 4, alpha=3).q == (3**4 - 1) // 2


def test_shannon_prefix_free_and_length_bound():
    rng = random.Random(3)
    for _ in range(30):
        m = rng.randint(1, 4)
        x = [rng.randint(0, 1) for _ in range(rng.randint(m, 300))]
        Q = {b: Fraction(rng.randint(1, 9)) for b in itertools.product((0, 1), repeat=m)}
        code = build_block_shannon_fsm(Q, m)
        words = [str(w) for w in code.codewords.values()]
        assert not any(a != b and b.startswith(a) for a in words for b in words)
        total = sum(Q.values())
        n = len(x) - len(x) % m
        blocks = [tuple(x[i:i + m]) for i in range(0, n, m)]
        cross = -sum(math.log2(Q[b] / total) for b in blocks)
        assert code.length(x) <= cross + n / m + 1e-9


def test_shannon_machine_lossless_from_every_state():
    rng = random.Random(4)
    for m in (1, 2, 3):
        x = [rng.randint(0, 1) for _ in range(60)]
        code = build_block_shannon_fsm(smoothed_block_distribution(x, m, 2), m)
        ok, witness = check_compressor_lossless(code.machine, 2 * m + 1)
        assert ok, witness


def test_lossless_check_catches_collisions():
    # two blocks share a codeword
    from fsencrypt.fsm import block_spec
    from fsencrypt.bits import BitString
    bad = block_spec(2, 1, lambda b: 0, lambda b, k: BitString.from_str("1"), "bad")
    ok, witness = check_compressor_lossless(bad, 1)
    assert not ok


def test_length_bound_bound_sign_cases():
    assert compressor_length_lower_bound(4, 1) == 0
    assert compressor_length_lower_bound(3, 1) < 0
    assert compressor_length_lower_bound(100, 1) > 0


def test_length_bound_bound_on_periodic_input():
    x = [0, 1] * (1 << 15)
    code = build_block_shannon_fsm(smoothed_block_distribution(x, 2, 2), 2)
    v = check_compressor_length_bound(code, x)
    assert v.holds and not v.trivial and v.slack > 0


def test_length_bound_bound_for_lz78_lengths():
    rng = random.Random(5)
    for _ in range(40):
        n = rng.randint(1, 1 << 12)
        x = [rng.randint(0, 1) for _ in range(n)]
        c = phrase_count(x)
        v = check_compressor_length_bound(c + 1, x, length=len(lz78_encode(x, 2)))
        assert v.holds


def test_block_code_chain_holds():
    rng = random.Random(6)
    for _ in range(100):
        m = rng.randint(1, 6)
        x = [rng.randint(0, 1) for _ in range(rng.randint(m, 3000))]
        lhs, rhs = block_code_chain(x, m, 2)
        assert lhs >= rhs
