"""Joint incremental parsing of ``(x, s)`` pairs and a conditional LZ codec.

The codec assumes the decoder already holds the side information ``s``.
Two tries are maintained on both ends:

* the joint trie over pairs ``(x_i, s_i)``, one node per joint phrase;
* the s-trie over the s-projections of the joint phrases, where every
  node keeps the list of joint phrases sharing that projection (its group).

At position ``i`` the candidate parents of the next joint phrase are the
members of the groups met while walking the s-trie along ``s[i:]``.  Both
sides can enumerate them, so each phrase costs
``ceil(log2(#candidates))`` index bits plus one x-literal.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .bits import BitReader, BitString, BitWriter
from .errors import MalformedStreamError
from .lz78 import check_alphabet, clogc, symbol_width


@dataclass(frozen=True)
class JointParseResult:
    joint_count: int
    si_count: int
    per_phrase_counts: dict[int, int]
    conditional_complexity: float
    x_phrases: tuple[tuple[int, ...], ...]
    s_phrases: tuple[tuple[int, ...], ...]
    last_complete: bool

    @property
    def distinct_s_phrases(self) -> tuple[tuple[int, ...], ...]:
        seen: dict[tuple[int, ...], None] = {}
        for p in self.s_phrases:
            seen.setdefault(p, None)
        return tuple(seen)


def _check_pair(x: Sequence[int], s: Sequence[int]) -> None:
    if len(x) != len(s):
        raise ValueError(f"length mismatch: x has {len(x)} symbols, s has {len(s)}")


def joint_parse(x: Sequence[int], s: Sequence[int]) -> JointParseResult:
    _check_pair(x, s)
    n = len(x)
    if n < 1:
        raise ValueError("joint parsing needs n >= 1")
    trie: dict[tuple[int, int, int], int] = {}
    bounds: list[tuple[int, int]] = []
    node = 0
    start = 0
    for i in range(n):
        key = (node, x[i], s[i])
        child = trie.get(key)
        if child is None:
            trie[key] = len(trie) + 1
            bounds.append((start, i + 1))
            node = 0
            start = i + 1
        else:
            node = child
    last_complete = start == n
    if not last_complete:
        bounds.append((start, n))

    x_phrases = tuple(tuple(x[a:b]) for a, b in bounds)
    s_phrases = tuple(tuple(s[a:b]) for a, b in bounds)
    groups: dict[tuple[int, ...], int] = {}
    for sp in s_phrases:
        groups[sp] = groups.get(sp, 0) + 1
    counts = {l: c for l, c in enumerate(groups.values(), start=1)}
    rho = sum(clogc(c) for c in counts.values()) / n
    return JointParseResult(
        joint_count=len(bounds),
        si_count=len(groups),
        per_phrase_counts=counts,
        conditional_complexity=rho,
        x_phrases=x_phrases,
        s_phrases=s_phrases,
        last_complete=last_complete,
    )


def conditional_lz_complexity(x: Sequence[int], s: Sequence[int]) -> float:
    return joint_parse(x, s).conditional_complexity


class _Dictionary:
    """Joint trie plus s-trie groups, shared by the encoder and decoder."""

    def __init__(self):
        self.joint: dict[tuple[int, int, int], int] = {}
        self.jstart = [0]      # x-projection of joint node j is out[jstart[j]: jstart[j] + jlen[j]]
        self.jlen = [0]
        self.jsnode = [0]      # s-trie node of the s-projection
        self.jrank = [0]       # position inside its group
        self.strie: dict[tuple[int, int], int] = {}
        self.members: list[list[int]] = [[0]]

    def candidates(self, s: Sequence[int], i: int, limit: int):
        """Cumulative group sizes along ``s[i:i+limit]`` in the s-trie."""
        snodes = [0]
        cum = [0, 1]
        node = 0
        for k in range(limit):
            node = self.strie.get((node, s[i + k]))
            if node is None:
                break
            snodes.append(node)
            cum.append(cum[-1] + len(self.members[node]))
        return snodes, cum

    def add(self, parent: int, xsym: int, ssym: int, start: int) -> None:
        j = len(self.jstart)
        self.joint[(parent, xsym, ssym)] = j
        self.jstart.append(start)
        self.jlen.append(self.jlen[parent] + 1)
        pnode = self.jsnode[parent]
        snode = self.strie.get((pnode, ssym))
        if snode is None:
            snode = len(self.members)
            self.strie[(pnode, ssym)] = snode
            self.members.append([])
        self.jsnode.append(snode)
        self.jrank.append(len(self.members[snode]))
        self.members[snode].append(j)


def cond_encode(x: Sequence[int], s: Sequence[int], alpha: int) -> BitString:
    _check_pair(x, s)
    n = len(x)
    if n < 1:
        raise ValueError("cannot encode an empty sequence")
    check_alphabet(x, alpha)
    sw = symbol_width(alpha)
    d = _Dictionary()
    w = BitWriter()
    i = 0
    while i < n:
        node = 0
        depth = 0
        while i + depth < n:
            child = d.joint.get((node, x[i + depth], s[i + depth]))
            if child is None:
                break
            node = child
            depth += 1
        _, cum = d.candidates(s, i, n - i)
        rank = cum[depth] + d.jrank[node]
        w.write(rank, (cum[-1] - 1).bit_length())
        if i + depth == n:
            break
        w.write(x[i + depth], sw)
        d.add(node, x[i + depth], s[i + depth], i)
        i += depth + 1
    return w.getvalue()


def cond_decode(b: BitString, s: Sequence[int], alpha: int, n: int) -> list[int]:
    if len(s) != n:
        raise ValueError(f"side information has {len(s)} symbols, expected {n}")
    if n < 1:
        raise ValueError("decoded length must be positive")
    sw = symbol_width(alpha)
    d = _Dictionary()
    r = BitReader(b)
    out: list[int] = []
    i = 0
    while i < n:
        snodes, cum = d.candidates(s, i, n - i)
        rank = r.read((cum[-1] - 1).bit_length())
        if rank >= cum[-1]:
            raise MalformedStreamError(f"candidate index {rank} out of range {cum[-1]}")
        depth = 0
        while cum[depth + 1] <= rank:
            depth += 1
        node = d.members[snodes[depth]][rank - cum[depth]]
        start = d.jstart[node]
        out.extend(out[start:start + depth])
        if i + depth == n:
            break
        xsym = r.read(sw)
        if xsym >= alpha:
            raise MalformedStreamError(f"literal {xsym} outside alphabet")
        out.append(xsym)
        d.add(node, xsym, s[i + depth], i)
        i += depth + 1
    if r.remaining:
        raise MalformedStreamError(f"{r.remaining} trailing bits after final token")
    return out
