"""Executable finite-state encrypters and exhaustive verifiers.

An encrypter reads one plain-text symbol per step.  In state ``z`` on input
``x`` it draws ``key_demand[z][x]`` fresh key bits ``k``, emits the word
``output(z, x, k)`` and moves to ``next_state[z][x]``.  The state never
depends on key bits.

The verifiers enumerate every plain-text of a given length together with
every key string, so they are only meant for desk-scale machines.
Probabilities are kept as exact fractions with power-of-two denominators.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Iterator, Mapping, Sequence

from .bits import BitString
from .errors import GuardExceededError, KeyExhaustedError, MalformedStreamError
from .lz78 import check_alphabet

GUARD = 1 << 28
# whole-tape enumeration is far slower per item than the factorized secrecy laws
ENUM_GUARD = 1 << 22

OutputFn = Callable[[int, int, BitString], BitString]


class KeyTape:
    """A stream of key bits with a consumption cursor.

    Either finite (backed by a :class:`BitString`) or an endless seeded
    pseudo-random stream for simulations.  Seeded streams are generated in
    64-bit chunks so the contents never depend on how reads are split.
    """

    def __init__(self, bits: BitString | None = None, *, seed: int | None = None, start: int = 0):
        if (bits is None) == (seed is None):
            raise ValueError("give exactly one of bits or seed")
        self._bits = bits
        self._seed = seed
        self._rng = random.Random(seed) if seed is not None else None
        self._buf = 0
        self._nbuf = 0
        self._start = start
        self.cursor = start
        if bits is not None and start > bits.length:
            raise KeyExhaustedError("start offset beyond end of key")
        if self._rng is not None and start:
            self.read(start)
            self.cursor = start

    @classmethod
    def from_bits(cls, bits: Iterable[int]) -> "KeyTape":
        return cls(BitString.from_bits(bits))

    @classmethod
    def from_bytes(cls, data: bytes, start: int = 0) -> "KeyTape":
        return cls(BitString(bytes(data), 8 * len(data)), start=start)

    @classmethod
    def zeros(cls, length: int) -> "KeyTape":
        return cls(BitString.zeros(length))

    @property
    def remaining(self) -> int | None:
        if self._bits is None:
            return None
        return self._bits.length - self.cursor

    @property
    def consumed(self) -> int:
        return self.cursor - self._start

    def read(self, length: int) -> BitString:
        if length < 0:
            raise ValueError("negative read")
        if self._bits is not None:
            end = self.cursor + length
            if end > self._bits.length:
                raise KeyExhaustedError(
                    f"key tape exhausted: need {length} bits at offset {self.cursor}, "
                    f"{self._bits.length - self.cursor} left"
                )
            word = self._bits[self.cursor:end]
        else:
            while self._nbuf < length:
                self._buf = (self._buf << 64) | self._rng.getrandbits(64)
                self._nbuf += 64
            self._nbuf -= length
            value = self._buf >> self._nbuf
            self._buf &= (1 << self._nbuf) - 1
            word = BitString.from_int(value, length)
        self.cursor += length
        return word

    def rewind(self) -> "KeyTape":
        """A fresh tape with the same contents and start offset."""
        if self._bits is not None:
            return KeyTape(self._bits, start=self._start)
        return KeyTape(seed=self._seed, start=self._start)


@dataclass(frozen=True)
class EncrypterSpec:
    """A complete ``s``-state encrypter over an alphabet of size ``alpha``.

    ``output`` is either a callable ``f(z, x, k)`` or a table mapping
    ``(z, x, k)`` to the emitted word.
    """

    alpha: int
    next_state: tuple[tuple[int, ...], ...]
    key_demand: tuple[tuple[int, ...], ...]
    output: OutputFn | Mapping[tuple[int, int, BitString], BitString]
    initial: int = 0
    name: str = ""
    labels: tuple = field(default=(), compare=False)

    def __post_init__(self):
        object.__setattr__(self, "next_state", tuple(tuple(r) for r in self.next_state))
        object.__setattr__(self, "key_demand", tuple(tuple(r) for r in self.key_demand))
        s = len(self.next_state)
        if s < 1 or len(self.key_demand) != s:
            raise ValueError("next_state and key_demand must cover the same states")
        if not 0 <= self.initial < s:
            raise ValueError(f"initial state {self.initial} out of range")
        for z in range(s):
            if len(self.next_state[z]) != self.alpha or len(self.key_demand[z]) != self.alpha:
                raise ValueError(f"state {z}: tables must have one entry per symbol")
            for x in range(self.alpha):
                if not 0 <= self.next_state[z][x] < s:
                    raise ValueError(f"g({z},{x}) = {self.next_state[z][x]} is not a state")
                if self.key_demand[z][x] < 0:
                    raise ValueError(f"negative key demand at ({z},{x})")
        if not callable(self.output):
            for z, x in itertools.product(range(s), range(self.alpha)):
                for k in all_words(self.key_demand[z][x]):
                    if (z, x, k) not in self.output:
                        raise ValueError(f"output table missing entry for ({z}, {x}, {k})")

    @property
    def n_states(self) -> int:
        return len(self.next_state)

    @property
    def is_table(self) -> bool:
        return not callable(self.output)

    def emit(self, z: int, x: int, k: BitString) -> BitString:
        if callable(self.output):
            return self.output(z, x, k)
        return self.output[(z, x, k)]

    def states(self, x: Sequence[int]) -> list[int]:
        """The state path ``z_1 .. z_{n+1}``; it depends on ``x`` alone."""
        path = [self.initial]
        z = self.initial
        g = self.next_state
        for sym in x:
            z = g[z][sym]
            path.append(z)
        return path


def all_words(length: int) -> Iterator[BitString]:
    for v in range(1 << length):
        yield BitString.from_int(v, length)


@dataclass(frozen=True)
class EncryptionTrace:
    outputs: tuple[BitString, ...]
    states: tuple[int, ...]
    key_words: tuple[BitString, ...]
    consumed: int


def run(spec: EncrypterSpec, x: Sequence[int], tape: KeyTape) -> EncryptionTrace:
    check_alphabet(x, spec.alpha)
    z = spec.initial
    states = [z]
    outputs = []
    keys = []
    consumed = 0
    for sym in x:
        k = tape.read(spec.key_demand[z][sym])
        outputs.append(spec.emit(z, sym, k))
        keys.append(k)
        consumed += len(k)
        z = spec.next_state[z][sym]
        states.append(z)
    return EncryptionTrace(tuple(outputs), tuple(states), tuple(keys), consumed)


def key_demand_total(spec: EncrypterSpec, x: Sequence[int]) -> int:
    z = spec.initial
    total = 0
    g, delta = spec.next_state, spec.key_demand
    for sym in x:
        total += delta[z][sym]
        z = g[z][sym]
    return total


def key_rate(spec: EncrypterSpec, x: Sequence[int]) -> float:
    """Key bits consumed per plain-text symbol; needs no key tape."""
    if not len(x):
        raise ValueError("key rate of an empty sequence is undefined")
    check_alphabet(x, spec.alpha)
    return key_demand_total(spec, x) / len(x)


# -- verifiers ---------------------------------------------------------------

@dataclass(frozen=True)
class ILVerdict:
    lossless: bool
    checked: tuple[int, ...]
    witness: tuple | None = None   # (n, x, x_other, key bits, outputs, final state)

    def __bool__(self):
        return self.lossless


@dataclass(frozen=True)
class SecrecyVerdict:
    secure: bool
    n: int
    window: tuple[int, int]
    witness: tuple | None = None   # (x, x_other, words, p_x, p_other)

    def __bool__(self):
        return self.secure


def _guard(count: int, what: str, limit: int = GUARD) -> None:
    if count > limit:
        raise GuardExceededError(f"{what}: {count} combinations exceed the guard of {limit}")


def check_information_lossless(spec: EncrypterSpec, n_max: int, n_min: int = 1,
                               step: int = 1) -> ILVerdict:
    """Check that ``(z_1, key bits, outputs, z_{n+1})`` determines ``x``.

    Every ``n`` in ``range(n_min, n_max + 1, step)`` is checked from the fixed
    initial state.  The key is the consumed bit string, so plain-texts that
    draw keys of different lengths never collide.
    """
    if n_min < 1 or n_max < n_min:
        raise ValueError("need 1 <= n_min <= n_max")
    _guard(spec.alpha ** n_max, f"IL check at n={n_max}", ENUM_GUARD)
    checked = []
    for n in range(n_min, n_max + 1, step):
        demands = {x: key_demand_total(spec, x) for x in itertools.product(range(spec.alpha), repeat=n)}
        _guard(sum(1 << L for L in demands.values()), f"IL check at n={n}", ENUM_GUARD)
        seen: dict[tuple, tuple[int, ...]] = {}
        for x, total in demands.items():
            path = spec.states(x)
            widths = [spec.key_demand[path[i]][x[i]] for i in range(n)]
            for key in all_words(total):
                outs = []
                pos = 0
                for i, wd in enumerate(widths):
                    outs.append(spec.emit(path[i], x[i], key[pos:pos + wd]))
                    pos += wd
                obs = (key, tuple(outs), path[-1])
                other = seen.setdefault(obs, x)
                if other != x:
                    return ILVerdict(False, tuple(checked), (n, other, x, key, tuple(outs), path[-1]))
        checked.append(n)
    return ILVerdict(True, tuple(checked))


def _step_law(spec: EncrypterSpec, z: int, x: int, cache: dict) -> tuple[int, frozenset]:
    """Exact law of the word emitted from ``(z, x)`` over all fresh key strings.

    The law is ``(e, {(y, count)})`` with probabilities ``count / 2**e``,
    reduced so that equal laws compare equal.
    """
    law = cache.get((z, x))
    if law is None:
        width = spec.key_demand[z][x]
        nbytes = (width + 7) // 8
        pad = 8 * nbytes - width
        raw = BitString._raw
        emit = spec.output if callable(spec.output) else (lambda z, x, k: spec.output[(z, x, k)])
        counts: dict[BitString, int] = {}
        get = counts.get
        for v in range(1 << width):
            y = emit(z, x, raw((v << pad).to_bytes(nbytes, "big"), width))
            counts[y] = get(y, 0) + 1
        exp = width
        while exp and all(c % 2 == 0 for c in counts.values()):
            counts = {y: c // 2 for y, c in counts.items()}
            exp -= 1
        law = (exp, frozenset(counts.items()))
        # share one object per distinct law so later comparisons are identity checks
        law = cache.setdefault(law, law)
        cache[(z, x)] = law
    return law


def _probabilities(law) -> dict[BitString, Fraction]:
    exp, weights = law
    return {y: Fraction(c, 1 << exp) for y, c in weights}


def _window_witness(laws_a, laws_b):
    """A word tuple whose probability differs between two product laws."""
    words = []
    pa = pb = Fraction(1)
    first = next(i for i, (la, lb) in enumerate(zip(laws_a, laws_b)) if la != lb)
    for i, (la, lb) in enumerate(zip(laws_a, laws_b)):
        da, db = _probabilities(la), _probabilities(lb)
        if i < first:
            y = min(da, key=lambda w: (w.length, w.to_int()))
        elif i == first:
            y = next(w for w in sorted(set(da) | set(db), key=lambda w: (w.length, w.to_int()))
                     if da.get(w, 0) > db.get(w, 0))
        else:
            y = next(w for w in sorted(da, key=lambda w: (w.length, w.to_int()))
                     if da[w] >= db.get(w, 0))
        words.append(y)
        pa *= da.get(y, 0)
        pb *= db.get(y, 0)
    return tuple(words), pa, pb


def secrecy_laws(spec: EncrypterSpec, n: int) -> dict[tuple[int, ...], tuple]:
    """Per-step exact output laws for every plain-text of length ``n``.

    Given ``x`` the key segments of different steps are disjoint blocks of
    the uniform tape, so the words ``y_1 .. y_n`` are independent and the law
    of any window is the product of its per-step laws.
    """
    max_demand = max(max(row) for row in spec.key_demand)
    _guard(spec.alpha ** n * (1 << max_demand), f"secrecy check at n={n}")
    cache: dict = {}
    laws = {}
    for x in itertools.product(range(spec.alpha), repeat=n):
        path = spec.states(x)
        laws[x] = tuple(_step_law(spec, path[i], x[i], cache) for i in range(n))
    return laws


def _check_window(laws, n, a, b) -> SecrecyVerdict:
    items = iter(laws.items())
    x0, ref = next(items)
    ref = ref[a - 1:b]
    for x, per_step in items:
        if per_step[a - 1:b] != ref:
            words, p0, p1 = _window_witness(ref, per_step[a - 1:b])
            return SecrecyVerdict(False, n, (a, b), (x0, x, words, p0, p1))
    return SecrecyVerdict(True, n, (a, b))


def check_perfect_secrecy(spec: EncrypterSpec, n: int, window: tuple[int, int] | None = None) -> SecrecyVerdict:
    """Is the law of ``(y_a, ..., y_b)`` the same for every ``x`` of length ``n``?

    Words compare by length and bits, so the null word differs from ``0``.
    """
    a, b = window if window is not None else (1, n)
    if not 1 <= a <= b <= n:
        raise ValueError(f"window {window} not inside 1..{n}")
    return _check_window(secrecy_laws(spec, n), n, a, b)


def secrecy_sweep(spec: EncrypterSpec, n: int) -> list[SecrecyVerdict]:
    """Verdicts for every window ``1 <= a <= b <= n``."""
    laws = secrecy_laws(spec, n)
    return [_check_window(laws, n, a, b) for a in range(1, n + 1) for b in range(a, n + 1)]


# -- primitive machines ------------------------------------------------------

def _single_state(alpha, demand, output, name):
    return EncrypterSpec(alpha, [[0] * alpha], [[demand] * alpha], output, name=name)


def xor_pad_spec(alpha: int = 2) -> EncrypterSpec:
    """One-time pad on the fixed-width binary form of each symbol."""
    width = (alpha - 1).bit_length()

    def f(z, x, k):
        return BitString.from_int(x, width) ^ k
    return _single_state(alpha, width, f, "xor-pad")


def idle_spec(alpha: int = 2) -> EncrypterSpec:
    return _single_state(alpha, 0, lambda z, x, k: BitString(), "idle")


def identity_spec(alpha: int = 2) -> EncrypterSpec:
    width = (alpha - 1).bit_length()
    return _single_state(alpha, 0, lambda z, x, k: BitString.from_int(x, width), "identity")


def block_spec(alpha: int, m: int, demand: Callable[[tuple[int, ...]], int],
               emit: Callable[[tuple[int, ...], BitString], BitString], name: str) -> EncrypterSpec:
    """A machine that buffers ``m``-blocks in its state and encrypts each at the block end.

    States are the block prefixes of length ``0 .. m-1``; there are
    ``(alpha**m - 1) / (alpha - 1)`` of them.
    """
    prefixes = [p for length in range(m) for p in itertools.product(range(alpha), repeat=length)]
    index = {p: i for i, p in enumerate(prefixes)}
    next_state, key_demand = [], []
    for p in prefixes:
        if len(p) + 1 < m:
            next_state.append([index[p + (a,)] for a in range(alpha)])
            key_demand.append([0] * alpha)
        else:
            next_state.append([0] * alpha)
            key_demand.append([demand(p + (a,)) for a in range(alpha)])

    def f(z, x, k):
        p = prefixes[z] + (x,)
        if len(p) < m:
            return BitString()
        return emit(p, k)
    return EncrypterSpec(alpha, next_state, key_demand, f, name=name, labels=tuple(prefixes))


def tabulate(spec: EncrypterSpec, limit: int = 1 << 16) -> EncrypterSpec:
    """Materialize a callback-backed output function as a table."""
    if spec.is_table:
        return spec
    size = sum(1 << d for row in spec.key_demand for d in row)
    if size > limit:
        raise GuardExceededError(f"output table would have {size} rows (limit {limit})")
    table = {}
    for z in range(spec.n_states):
        for x in range(spec.alpha):
            for k in all_words(spec.key_demand[z][x]):
                table[(z, x, k)] = spec.output(z, x, k)
    return EncrypterSpec(spec.alpha, spec.next_state, spec.key_demand, table,
                         spec.initial, spec.name, spec.labels)


# -- text format --------------------------------------------------------------

def dump_spec(spec: EncrypterSpec) -> str:
    """Serialize a table-backed encrypter.

    ::

        alpha 2
        states 1
        initial 0
        transitions
        0 0 -> 0 1
        outputs
        0 0 1 -> 1
    """
    spec = tabulate(spec)
    lines = []
    if spec.name:
        lines.append(f"# {spec.name}")
    lines += [f"alpha {spec.alpha}", f"states {spec.n_states}", f"initial {spec.initial}", "transitions"]
    for z in range(spec.n_states):
        for x in range(spec.alpha):
            lines.append(f"{z} {x} -> {spec.next_state[z][x]} {spec.key_demand[z][x]}")
    lines.append("outputs")
    for (z, x, k), y in sorted(spec.output.items(), key=lambda kv: (kv[0][0], kv[0][1], kv[0][2].to_int())):
        lines.append(f"{z} {x} {k} -> {y}")
    return "\n".join(lines) + "\n"


def load_spec(text: str, name: str = "") -> EncrypterSpec:
    """Parse the format written by :func:`dump_spec`; errors carry line numbers."""
    header: dict[str, int] = {}
    trans: dict[tuple[int, int], tuple[int, int]] = {}
    table: dict[tuple[int, int, BitString], BitString] = {}
    section = None

    def fail(lineno, msg):
        raise MalformedStreamError(f"line {lineno}: {msg}")

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line in ("transitions", "outputs"):
            section = line
            continue
        line = line.replace("→", "->")
        try:
            if section is None:
                key, value = line.split()
                if key not in ("alpha", "states", "initial"):
                    fail(lineno, f"unknown header field {key!r}")
                header[key] = int(value)
            elif section == "transitions":
                lhs, rhs = line.split("->")
                z, x = map(int, lhs.split())
                nz, d = map(int, rhs.split())
                if (z, x) in trans:
                    fail(lineno, f"duplicate transition for ({z}, {x})")
                trans[(z, x)] = (nz, d)
            else:
                lhs, rhs = line.split("->")
                z, x, k = lhs.split()
                table[(int(z), int(x), BitString.from_str(k))] = BitString.from_str(rhs)
        except MalformedStreamError:
            raise
        except ValueError as exc:
            fail(lineno, f"cannot parse {raw.strip()!r} ({exc})")
    for key in ("alpha", "states"):
        if key not in header:
            raise MalformedStreamError(f"missing header field {key!r}")
    alpha, s = header["alpha"], header["states"]
    missing = [(z, x) for z in range(s) for x in range(alpha) if (z, x) not in trans]
    if missing:
        raise MalformedStreamError(f"transition table is not total: missing {missing[:4]}")
    next_state = [[trans[(z, x)][0] for x in range(alpha)] for z in range(s)]
    key_demand = [[trans[(z, x)][1] for x in range(alpha)] for z in range(s)]
    for (z, x, k) in table:
        if (z, x) in trans and len(k) != trans[(z, x)][1]:
            raise MalformedStreamError(f"output entry ({z}, {x}, {k}) has a key of the wrong length")
    try:
        return EncrypterSpec(alpha, next_state, key_demand, table, header.get("initial", 0), name)
    except ValueError as exc:
        raise MalformedStreamError(str(exc)) from None
