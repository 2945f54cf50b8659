"""Immutable bit strings and streaming bit readers/writers.

Bits are stored MSB-first in a ``bytes`` buffer whose final byte is
zero-padded, so two equal bit strings always compare and hash equal.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from typing import Iterable

from .errors import MalformedStreamError

_HEADER = struct.Struct("<Q")


@dataclass(frozen=True)
class BitString:
    """A finite binary word; the empty word is the null word."""

    data: bytes = b""
    length: int = 0

    def __post_init__(self):
        if self.length < 0:
            raise ValueError("length must be non-negative")
        if len(self.data) != (self.length + 7) // 8:
            raise ValueError("buffer size does not match bit length")
        pad = 8 * len(self.data) - self.length
        if pad and self.data[-1] & ((1 << pad) - 1):
            raise ValueError("padding bits must be zero")

    @classmethod
    def _raw(cls, data: bytes, length: int) -> "BitString":
        # trusted constructor: caller guarantees canonical padding
        obj = object.__new__(cls)
        object.__setattr__(obj, "data", data)
        object.__setattr__(obj, "length", length)
        return obj

    @classmethod
    def from_int(cls, value: int, width: int) -> "BitString":
        if width < 0 or value < 0 or value >> width:
            raise ValueError(f"{value} does not fit in {width} bits")
        nbytes = (width + 7) // 8
        return cls._raw((value << (8 * nbytes - width)).to_bytes(nbytes, "big"), width)

    @classmethod
    def from_bits(cls, bits: Iterable[int]) -> "BitString":
        bits = list(bits)
        value = 0
        for b in bits:
            if b not in (0, 1):
                raise ValueError(f"not a bit: {b!r}")
            value = (value << 1) | b
        return cls.from_int(value, len(bits))

    @classmethod
    def from_str(cls, text: str) -> "BitString":
        """Parse ``"0110"``; ``""`` or ``"-"`` is the null word."""
        text = text.strip()
        if text in ("", "-"):
            return cls()
        return cls.from_bits(int(ch) for ch in text)

    @classmethod
    def zeros(cls, width: int) -> "BitString":
        return cls(bytes((width + 7) // 8), width)

    def to_int(self) -> int:
        pad = 8 * len(self.data) - self.length
        return int.from_bytes(self.data, "big") >> pad

    def to_bits(self) -> tuple[int, ...]:
        if not self.length:
            return ()
        return tuple(int(ch) for ch in format(self.to_int(), f"0{self.length}b"))

    def __len__(self) -> int:
        return self.length

    def __iter__(self):
        return iter(self.to_bits())

    def __getitem__(self, item):
        if isinstance(item, slice):
            start, stop, step = item.indices(self.length)
            if step != 1:
                return BitString.from_bits(self.to_bits()[item])
            if stop <= start:
                return BitString()
            width = stop - start
            value = (self.to_int() >> (self.length - stop)) & ((1 << width) - 1)
            return BitString.from_int(value, width)
        if item < 0:
            item += self.length
        if not 0 <= item < self.length:
            raise IndexError(item)
        return (self.data[item >> 3] >> (7 - (item & 7))) & 1

    def __add__(self, other: "BitString") -> "BitString":
        if not isinstance(other, BitString):
            return NotImplemented
        if not other.length:
            return self
        if not self.length:
            return other
        value = (self.to_int() << other.length) | other.to_int()
        return BitString.from_int(value, self.length + other.length)

    def __xor__(self, other: "BitString") -> "BitString":
        if not isinstance(other, BitString):
            return NotImplemented
        if other.length != self.length:
            raise ValueError("XOR of bit strings of different lengths")
        a = int.from_bytes(self.data, "big")
        b = int.from_bytes(other.data, "big")
        return BitString._raw((a ^ b).to_bytes(len(self.data), "big"), self.length)

    def __str__(self) -> str:
        if not self.length:
            return "-"
        return format(self.to_int(), f"0{self.length}b")

    def __repr__(self) -> str:
        if self.length <= 64:
            return f"BitString('{self}')"
        return f"BitString(<{self.length} bits>)"

    def to_bytes(self) -> bytes:
        """Serialize as an 8-byte little-endian bit count followed by the packed bits."""
        return _HEADER.pack(self.length) + self.data

    @classmethod
    def from_bytes(cls, blob: bytes, offset: int = 0) -> tuple["BitString", int]:
        """Inverse of :meth:`to_bytes`; returns the bit string and the end offset."""
        if len(blob) < offset + _HEADER.size:
            raise MalformedStreamError("truncated bit-string header")
        (length,) = _HEADER.unpack_from(blob, offset)
        start = offset + _HEADER.size
        end = start + (length + 7) // 8
        if len(blob) < end:
            raise MalformedStreamError("truncated bit-string body")
        try:
            return cls(bytes(blob[start:end]), length), end
        except ValueError as exc:
            raise MalformedStreamError(str(exc)) from None


def concat(words: Iterable[BitString]) -> BitString:
    w = BitWriter()
    for word in words:
        w.write_bits(word)
    return w.getvalue()


class BitWriter:
    """Append-only MSB-first bit sink."""

    def __init__(self):
        self._buf = bytearray()
        self._acc = 0
        self._nacc = 0

    def write(self, value: int, width: int) -> None:
        if width <= 0:
            return
        self._acc = (self._acc << width) | value
        self._nacc += width
        nfull = self._nacc >> 3
        if nfull:
            rem = self._nacc & 7
            self._buf += (self._acc >> rem).to_bytes(nfull, "big")
            self._acc &= (1 << rem) - 1
            self._nacc = rem

    def write_bits(self, word: BitString) -> None:
        if self._nacc == 0:
            full = word.length >> 3
            self._buf += word.data[:full]
            rem = word.length & 7
            if rem:
                self._acc = word.data[full] >> (8 - rem)
                self._nacc = rem
        else:
            self.write(word.to_int(), word.length)

    def __len__(self) -> int:
        return 8 * len(self._buf) + self._nacc

    def getvalue(self) -> BitString:
        data = bytes(self._buf)
        if self._nacc:
            data += bytes([self._acc << (8 - self._nacc)])
        return BitString._raw(data, len(self))


class BitReader:
    """Sequential MSB-first reader over a :class:`BitString`."""

    def __init__(self, bits: BitString):
        self._data = bits.data
        self._length = bits.length
        self.pos = 0

    @property
    def remaining(self) -> int:
        return self._length - self.pos

    def read(self, width: int) -> int:
        if width <= 0:
            return 0
        end = self.pos + width
        if end > self._length:
            raise MalformedStreamError("truncated bit stream")
        first = self.pos >> 3
        last = (end + 7) >> 3
        chunk = int.from_bytes(self._data[first:last], "big")
        chunk >>= 8 * last - end
        self.pos = end
        return chunk & ((1 << width) - 1)
