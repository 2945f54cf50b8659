"""Compress-then-pad encryption schemes and the cryptogram container.

* ``VARIABLE``: LZ78 code XOR key, one key bit per code bit.
* ``FIXED_RATE``: a frame of exactly ``ceil(R n)`` bits holding a length
  field, the LZ78 code and fill, all XOR key.  Its length never depends on
  the plain-text.
* ``CONDITIONAL``: conditional LZ code given side information, XOR key.
* ``BINNED``: XOR-padded hash bin of ``x``; the decrypter searches the bin
  for the unique low-complexity sequence given its side information.
"""

from __future__ import annotations

import enum
import functools
import hashlib
import itertools
import math
import struct
from dataclasses import dataclass
from typing import Sequence

from .bits import BitReader, BitString, BitWriter, concat
from .condlz import cond_decode, cond_encode, conditional_lz_complexity
from .errors import GuardExceededError, MalformedStreamError, RateOverflowError
from .fsm import EncrypterSpec, KeyTape, block_spec, identity_spec, idle_spec, xor_pad_spec
from .lz78 import check_alphabet, lz78_decode, lz78_encode

MAGIC = b"FSE1"
BINNING_GUARD = 1 << 20


class Mode(enum.IntEnum):
    VARIABLE = 0
    FIXED_RATE = 1
    CONDITIONAL = 2
    BINNED = 3


@dataclass(frozen=True)
class Cryptogram:
    mode: Mode
    words: tuple[BitString, ...]
    n: int
    alpha: int
    consumed: int
    rate: float | None = None
    seed: int | None = None

    @property
    def payload(self) -> BitString:
        return concat(self.words)

    @property
    def key_rate(self) -> float:
        return self.consumed / self.n

    def to_bytes(self) -> bytes:
        if not 2 <= self.alpha <= 256:
            raise ValueError("container stores alpha in one byte (2..256)")
        head = MAGIC + struct.pack("<BBQ", int(self.mode), self.alpha % 256, self.n)
        if self.mode in (Mode.FIXED_RATE, Mode.BINNED):
            head += struct.pack("<d", self.rate)
        if self.mode is Mode.BINNED:
            head += struct.pack("<Q", self.seed)
        head += struct.pack("<Q", self.consumed)
        return head + self.payload.to_bytes()

    @classmethod
    def from_bytes(cls, blob: bytes) -> "Cryptogram":
        if blob[:4] != MAGIC:
            raise MalformedStreamError("not an FSE1 container")
        try:
            mode_byte, alpha, n = struct.unpack_from("<BBQ", blob, 4)
            mode = Mode(mode_byte)
            pos = 14
            rate = seed = None
            if mode in (Mode.FIXED_RATE, Mode.BINNED):
                (rate,) = struct.unpack_from("<d", blob, pos)
                pos += 8
            if mode is Mode.BINNED:
                (seed,) = struct.unpack_from("<Q", blob, pos)
                pos += 8
            (consumed,) = struct.unpack_from("<Q", blob, pos)
            pos += 8
        except (struct.error, ValueError) as exc:
            raise MalformedStreamError(f"bad container header: {exc}") from None
        payload, end = BitString.from_bytes(blob, pos)
        if end != len(blob):
            raise MalformedStreamError(f"{len(blob) - end} trailing bytes after payload")
        return cls(mode, (payload,), n, alpha or 256, consumed, rate, seed)


def _pad(bits: BitString, tape: KeyTape) -> BitString:
    return bits ^ tape.read(len(bits))


# -- variable length ---------------------------------------------------------

def otp_lz_encrypt(x: Sequence[int], alpha: int, tape: KeyTape) -> Cryptogram:
    code = lz78_encode(x, alpha)
    return Cryptogram(Mode.VARIABLE, (_pad(code, tape),), len(x), alpha, len(code))


def otp_lz_decrypt(cg: Cryptogram, tape: KeyTape) -> list[int]:
    return lz78_decode(_pad(cg.payload, tape), cg.alpha, cg.n)


# -- fixed rate --------------------------------------------------------------

def frame_bits(n: int, rate: float) -> int:
    """``ceil(R n)``, ignoring floating-point noise below 1e-9."""
    if rate < 0:
        raise ValueError("rate must be non-negative")
    return math.ceil(round(rate * n, 9))


def fixed_rate_frame(x: Sequence[int], alpha: int, rate: float) -> BitString:
    """Length field, LZ78 code and zero fill, ``ceil(R n)`` bits in total."""
    total = frame_bits(len(x), rate)
    width = total.bit_length()
    code = lz78_encode(x, alpha)
    if width + len(code) > total:
        raise RateOverflowError(
            f"payload of {len(code)} bits plus {width}-bit length field does not fit "
            f"in {total} bits (R={rate}, n={len(x)})"
        )
    w = BitWriter()
    w.write(len(code), width)
    w.write_bits(code)
    w.write_bits(BitString.zeros(total - width - len(code)))
    return w.getvalue()


def fixed_rate_encrypt(x: Sequence[int], alpha: int, rate: float, tape: KeyTape) -> Cryptogram:
    frame = fixed_rate_frame(x, alpha, rate)
    return Cryptogram(Mode.FIXED_RATE, (_pad(frame, tape),), len(x), alpha, len(frame), rate=rate)


def fixed_rate_decrypt(cg: Cryptogram, tape: KeyTape) -> list[int]:
    total = frame_bits(cg.n, cg.rate)
    if len(cg.payload) != total:
        raise MalformedStreamError(f"frame has {len(cg.payload)} bits, expected {total}")
    frame = _pad(cg.payload, tape)
    width = total.bit_length()
    length = BitReader(frame).read(width)
    if width + length > total:
        raise MalformedStreamError("length field exceeds frame")
    return lz78_decode(frame[width:width + length], cg.alpha, cg.n)


# -- side information at both ends ------------------------------------------

def cond_otp_encrypt(x: Sequence[int], s: Sequence[int], alpha: int, tape: KeyTape) -> Cryptogram:
    code = cond_encode(x, s, alpha)
    return Cryptogram(Mode.CONDITIONAL, (_pad(code, tape),), len(x), alpha, len(code))


def cond_otp_decrypt(cg: Cryptogram, s: Sequence[int], tape: KeyTape) -> list[int]:
    return cond_decode(_pad(cg.payload, tape), s, cg.alpha, cg.n)


# -- side information at the decrypter only ---------------------------------

@dataclass(frozen=True)
class BinAssignment:
    """Seeded pseudo-random hash of sequences into ``2**bits(n)`` bins.

    The hash is keyed BLAKE2b over the length and the symbols, standing in
    for an independent uniform bin per sequence.
    """

    seed: int
    rate: float

    def bits(self, n: int) -> int:
        return frame_bits(n, self.rate)

    def index(self, x: Sequence[int]) -> int:
        width = self.bits(len(x))
        if width == 0:
            return 0
        size = max(8, (width + 7) // 8)
        if size > 64:
            raise ValueError("bin index wider than 512 bits")
        h = hashlib.blake2b(digest_size=size, key=self.seed.to_bytes(8, "little"))
        h.update(len(x).to_bytes(8, "little"))
        h.update(b"".join(sym.to_bytes(4, "little") for sym in x))
        return int.from_bytes(h.digest(), "big") >> (8 * size - width)


def binned_encrypt(x: Sequence[int], alpha: int, bins: BinAssignment, tape: KeyTape) -> Cryptogram:
    check_alphabet(x, alpha)
    width = bins.bits(len(x))
    word = BitString.from_int(bins.index(x), width)
    return Cryptogram(Mode.BINNED, (_pad(word, tape),), len(x), alpha, width,
                      rate=bins.rate, seed=bins.seed)


@dataclass(frozen=True)
class BinnedDecode:
    x: tuple[int, ...] | None
    candidates: int

    @property
    def ok(self) -> bool:
        return self.x is not None

    @property
    def status(self) -> str:
        if self.ok:
            return "OK"
        return "DECODE_ERROR (empty bin)" if self.candidates == 0 else "DECODE_ERROR (ambiguous)"


@functools.lru_cache(maxsize=16)
def _conditional_table(s: tuple[int, ...], alpha: int) -> tuple[tuple[tuple[int, ...], float], ...]:
    return tuple((xh, conditional_lz_complexity(xh, s))
                 for xh in itertools.product(range(alpha), repeat=len(s)))


def binning_candidates(s: Sequence[int], alpha: int, threshold: float) -> list[tuple[int, ...]]:
    """All ``x`` with conditional complexity given ``s`` strictly below ``threshold``."""
    if alpha ** len(s) > BINNING_GUARD:
        raise GuardExceededError(f"{alpha}**{len(s)} sequences exceed the binning guard")
    return [xh for xh, rho in _conditional_table(tuple(s), alpha) if rho < threshold]


def binned_decrypt(cg: Cryptogram, s: Sequence[int], bins: BinAssignment, eps: float,
                   tape: KeyTape) -> BinnedDecode:
    if len(s) != cg.n:
        raise ValueError(f"side information has {len(s)} symbols, expected {cg.n}")
    target = _pad(cg.payload, tape).to_int()
    hits = [xh for xh in binning_candidates(s, cg.alpha, bins.rate - eps) if bins.index(xh) == target]
    return BinnedDecode(hits[0] if len(hits) == 1 else None, len(hits))


# -- block encrypters --------------------------------------------------------

def otp_lz_block_spec(alpha: int, m: int) -> EncrypterSpec:
    """Variable-length LZ78 + pad applied to every ``m``-block."""
    code = functools.lru_cache(maxsize=None)(lambda block: lz78_encode(block, alpha))

    def demand(block):
        return len(code(block))

    def emit(block, k):
        return code(block) ^ k
    return block_spec(alpha, m, demand, emit, f"otp-lz-block:{m}")


def fixed_rate_block_spec(alpha: int, m: int, rate: float) -> EncrypterSpec:
    """Fixed-rate frames of ``ceil(R m)`` bits per ``m``-block.

    Raises :class:`RateOverflowError` if some block does not fit.
    """
    total = frame_bits(m, rate)
    frames = {block: fixed_rate_frame(block, alpha, rate)
              for block in itertools.product(range(alpha), repeat=m)}

    def emit(block, k):
        return frames[block] ^ k
    return block_spec(alpha, m, lambda block: total, emit, f"fixed-rate-block:{m}:{rate:g}")


def builtin_spec(name: str, alpha: int = 2) -> EncrypterSpec:
    """Look up ``xor-pad``, ``idle``, ``identity``, ``otp-lz-block:M`` or ``fixed-rate-block:M:R``."""
    head, *args = name.split(":")
    if head == "xor-pad" and not args:
        return xor_pad_spec(alpha)
    if head == "idle" and not args:
        return idle_spec(alpha)
    if head == "identity" and not args:
        return identity_spec(alpha)
    if head == "otp-lz-block" and len(args) == 1:
        return otp_lz_block_spec(alpha, int(args[0]))
    if head == "fixed-rate-block" and len(args) == 2:
        return fixed_rate_block_spec(alpha, int(args[0]), float(args[1]))
    raise KeyError(f"unknown built-in encrypter {name!r}")


CATALOG = (
    "xor-pad",
    "idle",
    "identity",
    "otp-lz-block:2",
    "otp-lz-block:3",
    "fixed-rate-block:2:3",
    "fixed-rate-block:3:3",
)


def catalog(alpha: int = 2) -> dict[str, EncrypterSpec]:
    return {name: builtin_spec(name, alpha) for name in CATALOG}
