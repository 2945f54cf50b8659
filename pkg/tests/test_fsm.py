import itertools
import random
from collections import Counter
from fractions import Fraction

import pytest

from fsencrypt.bits import BitString
from fsencrypt.errors import GuardExceededError, KeyExhaustedError, MalformedStreamError
from fsencrypt.fsm import (EncrypterSpec, KeyTape, check_information_lossless, check_perfect_secrecy,
                           dump_spec, idle_spec, identity_spec, key_demand_total, key_rate,
                           load_spec, run, secrecy_sweep, tabulate, xor_pad_spec)
from fsencrypt.lz78 import lz78_encode
from fsencrypt.schemes import fixed_rate_block_spec, otp_lz_block_spec


def test_xor_pad_trace():
    t = run(xor_pad_spec(), (0, 1, 1), KeyTape.from_bits([1, 0, 1]))
    assert [str(y) for y in t.outputs] == ["1", "1", "0"]
    assert t.consumed == 3
    assert len(t.states) == 4 and len(t.key_words) == 3


def test_idle_trace():
    t = run(idle_spec(), (0, 1, 1, 0), KeyTape.zeros(0))
    assert all(y == BitString() for y in t.outputs)
    assert t.consumed == 0


def test_states_depend_on_plaintext_only():
    spec = otp_lz_block_spec(2, 3)
    rng = random.Random(0)
    for _ in range(50):
        x = [rng.randint(0, 1) for _ in range(rng.randint(1, 20))]
        a = run(spec, x, KeyTape(seed=1))
        b = run(spec, x, KeyTape(seed=2))
        assert a.states == b.states == tuple(spec.states(x))
        assert a.consumed == key_demand_total(spec, x) == round(key_rate(spec, x) * len(x))


def test_key_rate_examples():
    assert key_rate(xor_pad_spec(), (0, 1, 0, 1)) == 1.0
    assert key_rate(idle_spec(), (0, 1)) == 0.0
    assert key_rate(otp_lz_block_spec(2, 6), (0,) * 6) == len(lz78_encode((0,) * 6, 2)) / 6
    with pytest.raises(ValueError):
        key_rate(xor_pad_spec(), ())


def test_key_tape():
    tape = KeyTape.from_bits([1, 0, 1])
    assert str(tape.read(2)) == "10"
    assert tape.consumed == 2 and tape.remaining == 1
    with pytest.raises(KeyExhaustedError):
        tape.read(2)
    a, b = KeyTape(seed=5), KeyTape(seed=5)
    assert a.read(3) + a.read(100) == b.read(103)
    assert KeyTape(seed=5, start=10).read(5) == KeyTape(seed=5).read(15)[10:]
    assert KeyTape.from_bytes(b"\xf0", start=2).read(4) == BitString.from_str("1100")


def test_il_verdicts():
    assert check_information_lossless(xor_pad_spec(), 4)
    v = check_information_lossless(idle_spec(), 3)
    assert not v and v.witness[0] == 1
    assert check_information_lossless(identity_spec(), 4)
    assert check_information_lossless(otp_lz_block_spec(2, 2), 6, n_min=2, step=2).checked == (2, 4, 6)


def test_secrecy_verdicts():
    v = check_perfect_secrecy(xor_pad_spec(), 2, (1, 2))
    assert v
    v = check_perfect_secrecy(identity_spec(), 3)
    assert not v
    x, x2, words, p, p2 = v.witness
    assert p != p2
    assert words == tuple(BitString.from_int(a, 1) for a in x)


def test_variable_length_leaks_lengths():
    v = check_perfect_secrecy(otp_lz_block_spec(2, 6), 6)
    assert not v
    x, x2, words, p, p2 = v.witness
    assert len(lz78_encode(x, 2)) != len(lz78_encode(x2, 2))
    assert p > 0 and p2 == 0


def test_fixed_rate_block_secure_small():
    for v in secrecy_sweep(fixed_rate_block_spec(2, 3, 3.0), 5):
        assert v


def _random_spec(rng, alpha=2, states=2, dmax=2, leak=False):
    nxt = [[rng.randrange(states) for _ in range(alpha)] for _ in range(states)]
    dem = [[rng.randint(0, dmax) for _ in range(alpha)] for _ in range(states)]
    table = {}
    for z in range(states):
        for x in range(alpha):
            d = dem[z][x]
            for v in range(1 << d):
                k = BitString.from_int(v, d)
                if leak and rng.random() < 0.5:
                    y = BitString.from_int(x, 1) + k
                else:
                    y = BitString.from_int(rng.randrange(1 << d), d) if rng.random() < 0.3 else k
                table[(z, x, k)] = y
    return EncrypterSpec(alpha, nxt, dem, table)


def _oracle_secure(spec, n, a, b):
    """Window laws from whole key strings of the longest demand, no factorization."""
    longest = max(key_demand_total(spec, x) for x in itertools.product(range(spec.alpha), repeat=n))
    laws = []
    for x in itertools.product(range(spec.alpha), repeat=n):
        law = Counter()
        for key in itertools.product((0, 1), repeat=longest):
            t = run(spec, x, KeyTape.from_bits(key))
            law[t.outputs[a - 1:b]] += 1
        laws.append({w: Fraction(c, 2 ** longest) for w, c in law.items()})
    return all(l == laws[0] for l in laws)


def test_secrecy_matches_whole_tape_oracle():
    rng = random.Random(3)
    seen = Counter()
    for trial in range(60):
        spec = _random_spec(rng, leak=trial % 3 == 0)
        n = 3
        for a in range(1, n + 1):
            for b in range(a, n + 1):
                got = bool(check_perfect_secrecy(spec, n, (a, b)))
                assert got == _oracle_secure(spec, n, a, b), (trial, a, b)
                seen[got] += 1
    assert seen[True] and seen[False]


def test_secrecy_witness_probabilities_are_exact():
    rng = random.Random(9)
    for _ in range(30):
        spec = _random_spec(rng, leak=True)
        v = check_perfect_secrecy(spec, 3)
        if v:
            continue
        x, x2, words, p, p2 = v.witness
        for xx, pp in ((x, p), (x2, p2)):
            total = key_demand_total(spec, xx)
            hits = sum(run(spec, xx, KeyTape.from_bits(k)).outputs == words
                       for k in itertools.product((0, 1), repeat=total))
            assert Fraction(hits, 2 ** total) == pp


def test_guards():
    spec = EncrypterSpec(2, [[0, 0]], [[20, 20]], lambda z, x, k: k)
    with pytest.raises(GuardExceededError):
        check_perfect_secrecy(spec, 10)
    with pytest.raises(GuardExceededError):
        check_information_lossless(spec, 3, n_min=2)


def test_spec_validation():
    with pytest.raises(ValueError):
        EncrypterSpec(2, [[0, 1]], [[0, 0]], lambda z, x, k: k)   # next state out of range
    with pytest.raises(ValueError):
        EncrypterSpec(2, [[0]], [[0]], lambda z, x, k: k)          # not total
    with pytest.raises(ValueError):
        EncrypterSpec(2, [[0, 0]], [[1, 1]], {(0, 0, BitString.from_str("0")): BitString()})


def test_text_format_round_trip():
    for spec in (xor_pad_spec(), identity_spec(), idle_spec(), fixed_rate_block_spec(2, 2, 3.0)):
        back = load_spec(dump_spec(spec))
        assert back.next_state == spec.next_state
        assert back.key_demand == spec.key_demand
        assert back.output == tabulate(spec).output
        assert bool(check_perfect_secrecy(back, 2)) == bool(check_perfect_secrecy(spec, 2))


def test_text_format_errors():
    good = dump_spec(xor_pad_spec())
    with pytest.raises(MalformedStreamError, match="line 6"):
        load_spec(good.replace("0 0 -> 0 1", "0 0 -> zero 1"))
    with pytest.raises(MalformedStreamError, match="not total"):
        load_spec(good.replace("0 1 -> 0 1\n", ""))
    with pytest.raises(MalformedStreamError):
        load_spec(good.replace("0 1 1 -> 0\n", ""))
    assert list(map(list, load_spec(good.replace("->", "→")).key_demand)) == [[1, 1]]


def test_tabulate_guard():
    with pytest.raises(GuardExceededError):
        tabulate(EncrypterSpec(2, [[0, 0]], [[20, 20]], lambda z, x, k: k))
