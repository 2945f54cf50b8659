"""LZ78 incremental parsing, LZ complexity and a token-based LZ78 codec.

Sequences are plain sequences of ints ``0..alpha-1``.  The codec emits, for
the ``t``-th token (0-based), the index of the longest matching dictionary
entry in ``t.bit_length()`` bits followed by the new literal in
``(alpha-1).bit_length()`` bits.  A final incomplete phrase is sent as an
index alone; the decoder knows ``n`` and can tell the two cases apart.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .bits import BitReader, BitString, BitWriter
from .errors import AlphabetError, MalformedStreamError


def check_alphabet(x: Sequence[int], alpha: int) -> None:
    if alpha < 2:
        raise AlphabetError(f"alphabet size must be at least 2, got {alpha}")
    for i, sym in enumerate(x):
        if not 0 <= sym < alpha:
            raise AlphabetError(f"symbol {sym} at position {i} outside alphabet of size {alpha}")


def symbol_width(alpha: int) -> int:
    return (alpha - 1).bit_length()


def clogc(c: int) -> float:
    """``c * log2(c)`` with the convention ``0 log 0 = 1 log 1 = 0``."""
    return c * math.log2(c) if c > 1 else 0.0


@dataclass(frozen=True)
class ParseResult:
    phrases: tuple[tuple[int, ...], ...]
    count: int
    last_complete: bool
    complexity: float

    @property
    def n(self) -> int:
        return sum(len(p) for p in self.phrases)


def _tokens(x: Sequence[int]):
    """Walk the LZ78 trie over ``x``.

    Returns ``(tokens, tail)`` where ``tokens`` lists ``(parent, symbol)`` for
    every complete phrase and ``tail`` is the dictionary index matched by an
    incomplete final phrase (0 when the last phrase is complete).
    """
    trie: dict[tuple[int, int], int] = {}
    tokens: list[tuple[int, int]] = []
    node = 0
    get = trie.get
    for sym in x:
        key = (node, sym)
        child = get(key)
        if child is None:
            tokens.append(key)
            trie[key] = len(tokens)
            node = 0
        else:
            node = child
    return tokens, node


def phrase_count(x: Sequence[int]) -> int:
    """Number of phrases ``c(x)`` in the incremental parsing, counting an incomplete tail."""
    tokens, tail = _tokens(x)
    return len(tokens) + (1 if tail else 0)


def parse(x: Sequence[int]) -> ParseResult:
    tokens, tail = _tokens(x)
    phrases: list[tuple[int, ...]] = [()]
    for parent, sym in tokens:
        phrases.append(phrases[parent] + (sym,))
    out = phrases[1:]
    if tail:
        out.append(phrases[tail])
    c = len(out)
    n = len(x)
    return ParseResult(tuple(out), c, not tail, clogc(c) / n if n else 0.0)


def lz_complexity(x: Sequence[int]) -> float:
    """``c log2 c / n`` for a non-empty sequence."""
    if not len(x):
        raise ValueError("LZ complexity of an empty sequence is undefined")
    return clogc(phrase_count(x)) / len(x)


def lz78_encode(x: Sequence[int], alpha: int) -> BitString:
    if not len(x):
        raise ValueError("cannot encode an empty sequence")
    check_alphabet(x, alpha)
    tokens, tail = _tokens(x)
    sw = symbol_width(alpha)
    w = BitWriter()
    write = w.write
    for t, (parent, sym) in enumerate(tokens):
        write((parent << sw) | sym, t.bit_length() + sw)
    if tail:
        write(tail, len(tokens).bit_length())
    return w.getvalue()


def encoded_length(c_complete: int, incomplete: bool, alpha: int) -> int:
    """Exact bit length of :func:`lz78_encode` given the token counts."""
    sw = symbol_width(alpha)
    total = sum(t.bit_length() for t in range(c_complete)) + c_complete * sw
    if incomplete:
        total += c_complete.bit_length()
    return total


def rate_bound_bits(c: int, alpha: int) -> float:
    """Upper bound ``(c+1) log2(2 alpha (c+1))`` on the LZ78 code length."""
    return (c + 1) * math.log2(2 * alpha * (c + 1))


def lz78_decode(b: BitString, alpha: int, n: int) -> list[int]:
    if n < 1:
        raise ValueError("decoded length must be positive")
    sw = symbol_width(alpha)
    r = BitReader(b)
    out: list[int] = []
    starts = [0]
    lengths = [0]
    t = 0
    while len(out) < n:
        idx = r.read(t.bit_length())
        if idx > t:
            raise MalformedStreamError(f"token {t} references unknown phrase {idx}")
        start, length = starts[idx], lengths[idx]
        pos = len(out)
        if pos + length > n:
            raise MalformedStreamError("phrase overruns declared length")
        out.extend(out[start:start + length])
        if pos + length == n:
            break
        sym = r.read(sw)
        if sym >= alpha:
            raise MalformedStreamError(f"literal {sym} outside alphabet")
        out.append(sym)
        starts.append(pos)
        lengths.append(length + 1)
        t += 1
    if r.remaining:
        raise MalformedStreamError(f"{r.remaining} trailing bits after final token")
    return out


def max_phrase_count(n: int, alpha: int) -> int:
    """Largest ``c(x)`` over all ``x`` of length ``n``.

    The ``k`` shortest distinct phrases fill every length level completely
    before moving to the next; any leftover symbols form one more
    (incomplete) phrase that repeats an existing shorter phrase.
    """
    if n < 1:
        raise ValueError("n must be positive")
    count = 0
    remaining = n
    level = 1
    while True:
        size = alpha ** level
        if remaining < level * size:
            full, leftover = divmod(remaining, level)
            return count + full + (1 if leftover else 0)
        count += size
        remaining -= level * size
        if remaining == 0:
            return count
        level += 1


def sequence_to_bytes(x: Sequence[int], alpha: int) -> bytes:
    if alpha > 256:
        raise AlphabetError("byte serialization needs alpha <= 256")
    check_alphabet(x, alpha)
    return bytes(x)


def sequence_from_bytes(data: bytes, alpha: int) -> list[int]:
    x = list(data)
    check_alphabet(x, alpha)
    return x
