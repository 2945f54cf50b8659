"""Lossy reconstruction: distortion measures, the exact LZ rate-distortion
oracle, a local-search upper bound, and the uncertainty rate of
nearly-lossless machines.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

from .errors import GuardExceededError
from .fsm import ENUM_GUARD, EncrypterSpec, _guard, all_words, key_demand_total
from .lz78 import check_alphabet, clogc, phrase_count

ORACLE_GUARD = 1 << 24


@dataclass(frozen=True)
class DistortionMeasure:
    """Per-symbol cost table ``table[x][xhat]``, or a whole-sequence callback.

    With ``sequence_cost`` set, the measure is not additive and the table is
    only used for the alphabet sizes and ``d_max``.
    """

    table: tuple[tuple[float, ...], ...]
    name: str = ""
    sequence_cost: Callable[[Sequence[int], Sequence[int]], float] | None = None

    def __post_init__(self):
        if not self.table or not self.table[0]:
            raise ValueError("empty distortion table")
        width = len(self.table[0])
        for row in self.table:
            if len(row) != width:
                raise ValueError("ragged distortion table")
            for v in row:
                if not v >= 0 or math.isinf(v):
                    raise ValueError(f"distortion entries must be finite and non-negative, got {v}")

    @property
    def source_alphabet(self) -> int:
        return len(self.table)

    @property
    def reconstruction_alphabet(self) -> int:
        return len(self.table[0])

    @property
    def additive(self) -> bool:
        return self.sequence_cost is None

    @property
    def d_max(self) -> float:
        return max(max(row) for row in self.table)

    @property
    def is_hamming(self) -> bool:
        return self.additive and all(
            v == (0 if a == b else 1) for a, row in enumerate(self.table) for b, v in enumerate(row))

    def cost(self, x: Sequence[int], xhat: Sequence[int]):
        if len(x) != len(xhat):
            raise ValueError("sequences differ in length")
        if self.sequence_cost is not None:
            return self.sequence_cost(x, xhat)
        return sum(self.table[a][b] for a, b in zip(x, xhat))


def hamming(alpha: int = 2, alpha_hat: int | None = None) -> DistortionMeasure:
    alpha_hat = alpha if alpha_hat is None else alpha_hat
    return DistortionMeasure(
        tuple(tuple(0 if a == b else 1 for b in range(alpha_hat)) for a in range(alpha)),
        name="hamming",
    )


@dataclass(frozen=True)
class RdPoint:
    D: float
    value: float
    witness: tuple[int, ...]
    exact: bool

    def to_dict(self) -> dict:
        return {"D": self.D, "value": self.value, "exact": self.exact,
                "witness": bytes(self.witness).hex() if max(self.witness, default=0) < 256 else list(self.witness)}


def _budget(n: int, D: float):
    if not D >= 0:
        raise ValueError(f"distortion level must be non-negative, got {D}")
    return Fraction(D) * n


def hamming_ball_size(n: int, radius: int, alpha_hat: int) -> int:
    radius = min(radius, n)
    return sum(math.comb(n, k) * (alpha_hat - 1) ** k for k in range(radius + 1))


def rd_oracle(x: Sequence[int], D: float, d: DistortionMeasure) -> RdPoint:
    """Smallest LZ complexity among reconstructions within total distortion ``n D``.

    Candidates are visited in lexicographic order with pruning on the
    accumulated distortion and on the phrase count, which never decreases
    along a prefix; the first minimizer found is the lexicographically
    smallest one.
    """
    n = len(x)
    if n < 1:
        raise ValueError("empty sequence")
    check_alphabet(x, d.source_alphabet)
    budget = _budget(n, D)
    ahat = d.reconstruction_alphabet
    if d.is_hamming:
        size = hamming_ball_size(n, math.floor(budget), ahat)
        if size > ORACLE_GUARD:
            raise GuardExceededError(f"Hamming ball of {size} candidates exceeds the guard")
    elif ahat ** n > ORACLE_GUARD:
        raise GuardExceededError(f"{ahat}**{n} candidates exceed the guard")

    if d.additive:
        table = [[Fraction(v) for v in row] for row in d.table]
        if all(v.denominator == 1 for row in table for v in row):
            table = [[int(v) for v in row] for row in table]
            budget = math.floor(budget)
        # cheapest completion of each suffix, for pruning
        rest = [0] * (n + 1)
        for i in range(n - 1, -1, -1):
            rest[i] = rest[i + 1] + min(table[x[i]])
    best_c = n + 1
    best: tuple[int, ...] | None = None
    trie: dict[tuple[int, int], int] = {}
    out = [0] * n

    def visit(i, node, c, cost):
        # c counts phrases so far, including an open (incomplete) one
        nonlocal best_c, best
        if c >= best_c:
            return
        if i == n:
            if not d.additive and d.cost(x, out) > budget:
                return
            best_c, best = c, tuple(out)
            return
        for b in range(ahat):
            if d.additive:
                step = cost + table[x[i]][b]
                if step + rest[i + 1] > budget:
                    continue
            else:
                step = cost
            out[i] = b
            key = (node, b)
            child = trie.get(key)
            opened = 1 if node == 0 else 0
            if child is None:
                trie[key] = len(trie) + 1
                visit(i + 1, 0, c + opened, step)
                del trie[key]
            else:
                visit(i + 1, child, c + opened, step)

    visit(0, 0, 0, 0)
    if best is None:
        raise ValueError("no reconstruction satisfies the distortion constraint")
    return RdPoint(D, clogc(best_c) / n, best, True)


def rd_heuristic(x: Sequence[int], D: float, d: DistortionMeasure, budget: int = 10_000,
                 seed: int = 0, restart_every: int = 200) -> RdPoint:
    """Feasible upper bound on the LZ rate-distortion value by local search.

    Each step proposes a single-symbol edit and keeps it when the distortion
    stays within ``n D`` and the phrase count does not grow.  Every
    ``restart_every`` steps the walk restarts from a random feasible
    perturbation of ``x``.
    """
    n = len(x)
    if n < 1:
        raise ValueError("empty sequence")
    check_alphabet(x, d.source_alphabet)
    limit = _budget(n, D)
    ahat = d.reconstruction_alphabet
    rng = random.Random(seed)
    x = tuple(x)

    def feasible(y):
        return Fraction(d.cost(x, y)) <= limit

    start = x
    if ahat < d.source_alphabet or not feasible(start):
        start = tuple(min(range(ahat), key=lambda b: d.table[a][b]) for a in x)
    if not feasible(start):
        raise ValueError("no reconstruction satisfies the distortion constraint")
    best = (phrase_count(start), start)
    cur, cur_c = list(start), best[0]
    for it in range(budget):
        if it and it % restart_every == 0:
            cur = list(start)
            for _ in range(rng.randrange(n + 1)):
                i, b = rng.randrange(n), rng.randrange(ahat)
                old = cur[i]
                cur[i] = b
                if not feasible(cur):
                    cur[i] = old
            cur_c = phrase_count(cur)
        i, b = rng.randrange(n), rng.randrange(ahat)
        if cur[i] == b:
            continue
        old = cur[i]
        cur[i] = b
        c = phrase_count(cur)
        if c <= cur_c and feasible(cur):
            cur_c = c
            cand = (c, tuple(cur))
            if cand < best:
                best = cand
        else:
            cur[i] = old
    return RdPoint(D, clogc(best[0]) / n, best[1], False)


def rd_curve(x: Sequence[int], levels: Sequence[float], d: DistortionMeasure,
             exact: bool = True, **kw) -> list[RdPoint]:
    fn = rd_oracle if exact else rd_heuristic
    return [fn(x, D, d, **kw) for D in levels]


# -- nearly lossless machines -----------------------------------------------

def nil_uncertainty_rate(set_sizes: Sequence[int], n: int) -> float:
    """``(1/n) log2 max |A_n(w)|`` over the given uncertainty-set sizes."""
    sizes = list(set_sizes)
    if not sizes:
        raise ValueError("no uncertainty sets given")
    if min(sizes) < 1:
        raise ValueError("uncertainty sets are never empty")
    if n < 1:
        raise ValueError("n must be positive")
    return math.log2(max(sizes)) / n


def uncertainty_set_sizes(spec: EncrypterSpec, n: int) -> list[int]:
    """Sizes of the sets of plain-texts sharing one ``(key, words, final state)`` view."""
    _guard(spec.alpha ** n, f"uncertainty sets at n={n}", ENUM_GUARD)
    demands = {x: key_demand_total(spec, x) for x in itertools.product(range(spec.alpha), repeat=n)}
    _guard(sum(1 << L for L in demands.values()), f"uncertainty sets at n={n}", ENUM_GUARD)
    groups: dict[tuple, int] = {}
    for x, total in demands.items():
        path = spec.states(x)
        widths = [spec.key_demand[path[i]][x[i]] for i in range(n)]
        for key in all_words(total):
            outs, pos = [], 0
            for i, wd in enumerate(widths):
                outs.append(spec.emit(path[i], x[i], key[pos:pos + wd]))
                pos += wd
            obs = (key, tuple(outs), path[-1])
            groups[obs] = groups.get(obs, 0) + 1
    return list(groups.values())


def relaxed_key_entropy_bound(block_entropy: float, s: int, m: int, eta: float) -> float:
    """``H(K^m) >= H(Xhat^m) - 2 log s - m eta`` for a nearly-lossless machine."""
    return block_entropy - 2 * math.log2(s) - m * eta
