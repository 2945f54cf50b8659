"""Converse-side quantities: block entropy, the redundancy term, the key-rate
lower bound, and the block Shannon compressor used to relate the two.

All logarithms are base 2.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
import sys
from collections import Counter
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from .bits import BitString
from .errors import GuardExceededError
from .fsm import EncrypterSpec, block_spec
from .lz78 import clogc, lz_complexity, max_phrase_count, phrase_count

CSV_SCHEMA = "fsencrypt-bounds/1"
TERM_NAMES = ("state_info", "length_types", "phrase_count", "block_alphabet", "rounding")


# -- block entropy -----------------------------------------------------------

def aligned_length(n: int, m: int) -> int:
    return n - n % m


def block_counts(x: Sequence[int], m: int) -> Counter:
    """Counts of the non-overlapping ``m``-blocks; a trailing partial block is dropped."""
    if m < 1:
        raise ValueError("block length must be positive")
    if m > len(x):
        raise ValueError(f"block length {m} exceeds sequence length {len(x)}")
    x = tuple(x)
    return Counter(x[i:i + m] for i in range(0, aligned_length(len(x), m), m))


def block_entropy_rate(x: Sequence[int], m: int) -> float:
    """Entropy of the empirical ``m``-block distribution, divided by ``m``."""
    counts = block_counts(x, m)
    total = sum(counts.values())
    h = -sum(c / total * math.log2(c / total) for c in counts.values())
    return h / m if h > 0 else 0.0


def empirical_entropy_bound(x: Sequence[int], m: int, states: int, alpha: int) -> float:
    """Key-rate lower bound for an ``s``-state secure IL encrypter before the LZ step.

    ``H/m - 2 log s / m - (alpha s - 1) log(m+1) / m``.
    """
    return (block_entropy_rate(x, m)
            - 2 * math.log2(states) / m
            - (alpha * states - 1) * math.log2(m + 1) / m)


# -- redundancy --------------------------------------------------------------

def _alphabet_power(alpha: int, m: int) -> float:
    big = alpha ** (2 * m)
    if big > sys.float_info.max / (2 * m * (1 + math.log2(alpha))):
        raise OverflowError(f"alpha**(2m) = {alpha}**{2 * m} is too large to evaluate")
    return float(big)


def delta_bound(s: int, n: int, m: int, alpha: int) -> tuple[float, dict[str, float]]:
    """The redundancy ``delta_s(n, m)`` and its five summands.

    The phrase-count term uses the exact largest phrase count over all
    length-``n`` sequences in place of an asymptotic estimate.
    """
    if s < 1 or m < 1 or alpha < 2:
        raise ValueError("need s >= 1, m >= 1 and alpha >= 2")
    if n < m:
        raise ValueError(f"n={n} is smaller than m={m}")
    la = 1 + math.log2(alpha)
    terms = {
        "state_info": 2 * math.log2(s) / m,
        "length_types": (alpha * s - 1) * math.log2(m + 1) / m,
        "phrase_count": 2 * m * la * max_phrase_count(n, alpha) / n,
        "block_alphabet": 2 * m * _alphabet_power(alpha, m) * la / n,
        "rounding": 1 / m,
    }
    return math.fsum(terms.values()), terms


def m_grid(n: int) -> range:
    """Block lengths searched for the best bound: ``1 .. ceil(4 sqrt(log2 n))``, capped at ``n``."""
    top = math.ceil(4 * math.sqrt(math.log2(n))) if n > 1 else 1
    return range(1, min(top, n) + 1)


def best_block_length(s: int, n: int, alpha: int) -> tuple[int, float, dict[str, float]]:
    best = None
    for m in m_grid(n):
        try:
            value, terms = delta_bound(s, n, m, alpha)
        except OverflowError:
            break
        if best is None or value < best[1]:
            best = (m, value, terms)
    return best


def compression_gap(n: int, alpha: int, s: int) -> float:
    """``log(2 alpha) log(8 alpha s^2) / log n``: the compression-side gap scale."""
    return math.log2(2 * alpha) * math.log2(8 * alpha * s * s) / math.log2(n)


@dataclass(frozen=True)
class BoundsReport:
    n: int
    m: int
    s: int
    alpha: int
    block_entropy_rate: float
    lz_complexity: float
    delta: float
    sigma_lower: float
    chosen_m: int
    term_breakdown: dict[str, float] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @staticmethod
    def csv_header() -> list[str]:
        return (["x_id", "n", "m", "s", "alpha", "block_entropy_rate", "lz_complexity",
                 "delta", "sigma_lower", "chosen_m"] + [f"term_{t}" for t in TERM_NAMES])

    def csv_row(self, x_id: str = "") -> list:
        return ([x_id, self.n, self.m, self.s, self.alpha, self.block_entropy_rate,
                 self.lz_complexity, self.delta, self.sigma_lower, self.chosen_m]
                + [self.term_breakdown[t] for t in TERM_NAMES])


def reports_to_csv(rows: Sequence[tuple[str, BoundsReport]]) -> str:
    out = io.StringIO()
    out.write(f"# schema: {CSV_SCHEMA}\n")
    w = csv.writer(out, lineterminator="\n")
    w.writerow(BoundsReport.csv_header())
    for x_id, rep in rows:
        w.writerow(rep.csv_row(x_id))
    return out.getvalue()


def sigma_lower_bound(x: Sequence[int], s: int, alpha: int = 2, m: int | None = None) -> BoundsReport:
    """Lower bound on the key rate of any secure IL ``s``-state encrypter for ``x``.

    ``m`` defaults to the grid minimizer of the redundancy.
    """
    n = len(x)
    if n < 2:
        raise ValueError("need at least two symbols")
    if m is None:
        m, delta, terms = best_block_length(s, n, alpha)
    else:
        delta, terms = delta_bound(s, n, m, alpha)
    rho = lz_complexity(x)
    return BoundsReport(
        n=n, m=m, s=s, alpha=alpha,
        block_entropy_rate=block_entropy_rate(x, m),
        lz_complexity=rho,
        delta=delta,
        sigma_lower=max(0.0, rho - delta),
        chosen_m=m,
        term_breakdown=terms,
    )


def block_code_chain(x: Sequence[int], m: int, alpha: int) -> tuple[float, float]:
    """Both sides of the block-entropy versus phrase-count inequality on the aligned prefix.

    Returns ``(lhs, rhs)`` with ``lhs = (n/m) H + n/m`` and
    ``rhs = c log c - 2 m c (1 + log a) - 2 m a^(2m) (1 + log a)``.
    """
    n = aligned_length(len(x), m)
    prefix = x[:n]
    lhs = n * block_entropy_rate(prefix, m) + n / m
    c = phrase_count(prefix)
    la = 1 + math.log2(alpha)
    rhs = clogc(c) - 2 * m * c * la - 2 * m * _alphabet_power(alpha, m) * la
    return lhs, rhs


# -- block Shannon compressor ------------------------------------------------

def _codeword_length(q: Fraction) -> int:
    """``ceil(-log2 q)`` computed exactly."""
    length = 0
    while Fraction(1, 1 << length) > q:
        length += 1
    return length


def _binary_digits(f: Fraction, length: int) -> int:
    return math.floor(f * (1 << length))


@dataclass(frozen=True)
class ShannonBlockCode:
    """Shannon code on ``m``-blocks, run as a finite-state compressor.

    The machine buffers the current block prefix in its state and emits the
    block's codeword at the block end; ``machine`` is an
    :class:`EncrypterSpec` with zero key demand.
    """

    alpha: int
    m: int
    codewords: Mapping[tuple[int, ...], BitString]
    machine: EncrypterSpec

    @property
    def q(self) -> int:
        return self.machine.n_states

    def codeword(self, block: tuple[int, ...]) -> BitString:
        try:
            return self.codewords[block]
        except KeyError:
            raise ValueError(f"block {block} has zero probability") from None

    def length(self, x: Sequence[int]) -> int:
        """Total output length; a trailing partial block is still buffered and emits nothing."""
        x = tuple(x)
        return sum(len(self.codeword(x[i:i + self.m]))
                   for i in range(0, aligned_length(len(x), self.m), self.m))


def build_block_shannon_fsm(Q: Mapping[tuple[int, ...], float | Fraction], m: int,
                            alpha: int = 2) -> ShannonBlockCode:
    """A block Shannon code for the block distribution ``Q``.

    Blocks with zero mass get no codeword; encoding one raises ``ValueError``.
    Codewords are the leading bits of the cumulative mass in order of
    decreasing probability, which makes them prefix-free.
    """
    if m < 1:
        raise ValueError("block length must be positive")
    mass = {}
    for block, p in Q.items():
        block = tuple(block)
        if len(block) != m or any(not 0 <= a < alpha for a in block):
            raise ValueError(f"{block} is not an {m}-block over an alphabet of size {alpha}")
        p = Fraction(p)
        if p < 0:
            raise ValueError("negative probability")
        if p:
            mass[block] = p
    total = sum(mass.values())
    if not total:
        raise ValueError("distribution has no mass")
    ordered = sorted(mass, key=lambda b: (-mass[b], b))
    codewords = {}
    cum = Fraction(0)
    for block in ordered:
        p = mass[block] / total
        length = _codeword_length(p)
        codewords[block] = BitString.from_int(_binary_digits(cum, length), length)
        cum += p

    def emit(block, k):
        if block not in codewords:
            raise ValueError(f"block {block} has zero probability")
        return codewords[block]
    machine = block_spec(alpha, m, lambda block: 0, emit, f"shannon-block:{m}")
    return ShannonBlockCode(alpha, m, codewords, machine)


def smoothed_block_distribution(x: Sequence[int], m: int, alpha: int,
                                pseudo: Fraction = Fraction(1, 2)) -> dict[tuple[int, ...], Fraction]:
    """Empirical ``m``-block frequencies plus ``pseudo`` on every block, normalized.

    Every block gets positive mass, so the resulting code can encode any input.
    """
    if alpha ** m > 1 << 20:
        raise GuardExceededError(f"{alpha}**{m} blocks is too many to tabulate")
    counts = block_counts(x, m)
    total = sum(counts.values()) + pseudo * alpha ** m
    return {b: (counts.get(b, 0) + pseudo) / total
            for b in itertools.product(range(alpha), repeat=m)}


def check_compressor_lossless(machine: EncrypterSpec, n_max: int) -> tuple[bool, tuple | None]:
    """Information losslessness from every start state.

    For each start state and length ``j <= n_max``, the start state, the word
    sequence and the end state must determine the input segment.  Returns
    ``(ok, witness)``.
    """
    empty = BitString()
    for z0 in range(machine.n_states):
        for j in range(1, n_max + 1):
            seen = {}
            for x in itertools.product(range(machine.alpha), repeat=j):
                z = z0
                words = []
                for sym in x:
                    try:
                        words.append(machine.emit(z, sym, empty))
                    except ValueError:
                        raise ValueError(f"machine cannot encode {x} from state {z0}") from None
                    z = machine.next_state[z][sym]
                key = (tuple(words), z)
                other = seen.setdefault(key, x)
                if other != x:
                    return False, (z0, other, x)
    return True, None


@dataclass(frozen=True)
class LengthBoundVerdict:
    length: int
    c: int
    q: int
    bound: float
    holds: bool
    trivial: bool

    @property
    def slack(self) -> float:
        return self.length - self.bound

    def __bool__(self):
        return self.holds


def compressor_length_lower_bound(c: int, q: int) -> float:
    """``(c + q^2) log(c / (4 q^2))``; non-positive whenever ``c <= 4 q^2``."""
    if c < 1 or q < 1:
        raise ValueError("need c >= 1 and q >= 1")
    return (c + q * q) * math.log2(c / (4 * q * q))


def check_compressor_length_bound(machine: ShannonBlockCode | int, x: Sequence[int],
                            length: int | None = None) -> LengthBoundVerdict:
    """Compare a compressor's output length on ``x`` with the finite-state lower bound.

    ``machine`` is a :class:`ShannonBlockCode`, or a bare state count with
    ``length`` given explicitly.  The phrase count is taken on the prefix
    the machine has actually encoded.
    """
    if isinstance(machine, ShannonBlockCode):
        q = machine.q
        x = x[:aligned_length(len(x), machine.m)]
        length = machine.length(x)
    else:
        q = machine
        if length is None:
            raise ValueError("length is required with a bare state count")
    c = phrase_count(x)
    bound = compressor_length_lower_bound(c, q)
    return LengthBoundVerdict(length, c, q, bound, length >= bound, bound <= 0)
