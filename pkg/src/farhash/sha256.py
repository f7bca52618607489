"""SHA-256 with a replaceable initial hash state.

The compression function, round constants and padding are the standard
ones; only the eight starting words H0..H7 may be swapped out. With
``STANDARD_IV`` the output is bit-identical to ordinary SHA-256.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

MAX_MESSAGE_BYTES = 2**61

# fmt: off
_STANDARD_WORDS = (
    0x6A09E667, 0xBB67AE85, 0x3C6EF372, 0xA54FF53A,
    0x510E527F, 0x9B05688C, 0x1F83D9AB, 0x5BE0CD19,
)

_K = (
    0x428A2F98, 0x71374491, 0xB5C0FBCF, 0xE9B5DBA5, 0x3956C25B, 0x59F111F1, 0x923F82A4, 0xAB1C5ED5,
    0xD807AA98, 0x12835B01, 0x243185BE, 0x550C7DC3, 0x72BE5D74, 0x80DEB1FE, 0x9BDC06A7, 0xC19BF174,
    0xE49B69C1, 0xEFBE4786, 0x0FC19DC6, 0x240CA1CC, 0x2DE92C6F, 0x4A7484AA, 0x5CB0A9DC, 0x76F988DA,
    0x983E5152, 0xA831C66D, 0xB00327C8, 0xBF597FC7, 0xC6E00BF3, 0xD5A79147, 0x06CA6351, 0x14292967,
    0x27B70A85, 0x2E1B2138, 0x4D2C6DFC, 0x53380D13, 0x650A7354, 0x766A0ABB, 0x81C2C92E, 0x92722C85,
    0xA2BFE8A1, 0xA81A664B, 0xC24B8B70, 0xC76C51A3, 0xD192E819, 0xD6990624, 0xF40E3585, 0x106AA070,
    0x19A4C116, 0x1E376C08, 0x2748774C, 0x34B0BCB5, 0x391C0CB3, 0x4ED8AA4A, 0x5B9CCA4F, 0x682E6FF3,
    0x748F82EE, 0x78A5636F, 0x84C87814, 0x8CC70208, 0x90BEFFFA, 0xA4506CEB, 0xBEF9A3F7, 0xC67178F2,
)
# fmt: on

_MASK = 0xFFFFFFFF
_BLOCK = struct.Struct(">16I")


@dataclass(frozen=True)
class InitVector:
    """Eight 32-bit words used as the starting hash state."""

    words: tuple[int, ...]

    def __post_init__(self) -> None:
        words = tuple(self.words)
        if len(words) != 8:
            raise ValueError(f"init vector needs 8 words, got {len(words)}")
        for w in words:
            if not isinstance(w, int) or not 0 <= w <= _MASK:
                raise ValueError(f"init vector word out of range: {w!r}")
        object.__setattr__(self, "words", words)

    def hex(self) -> str:
        return "".join(f"{w:08x}" for w in self.words)


STANDARD_IV = InitVector(_STANDARD_WORDS)


def _compress(state: tuple[int, ...], block: bytes) -> tuple[int, ...]:
    w = list(_BLOCK.unpack(block))
    append = w.append
    for i in range(16, 64):
        x = w[i - 15]
        y = w[i - 2]
        append(
            (
                w[i - 16]
                + (((x >> 7 | x << 25) ^ (x >> 18 | x << 14) ^ (x >> 3)) & _MASK)
                + w[i - 7]
                + (((y >> 17 | y << 15) ^ (y >> 19 | y << 13) ^ (y >> 10)) & _MASK)
            )
            & _MASK
        )

    a, b, c, d, e, f, g, h = state
    for k, wi in zip(_K, w):
        t1 = (
            h
            + (((e >> 6 | e << 26) ^ (e >> 11 | e << 21) ^ (e >> 25 | e << 7)) & _MASK)
            + (g ^ (e & (f ^ g)))
            + k
            + wi
        )
        t2 = (((a >> 2 | a << 30) ^ (a >> 13 | a << 19) ^ (a >> 22 | a << 10)) & _MASK) + ((a & b) | (c & (a | b)))
        h, g, f, e = g, f, e, (d + t1) & _MASK
        d, c, b, a = c, b, a, (t1 + t2) & _MASK

    s0, s1, s2, s3, s4, s5, s6, s7 = state
    return (
        (s0 + a) & _MASK, (s1 + b) & _MASK, (s2 + c) & _MASK, (s3 + d) & _MASK,
        (s4 + e) & _MASK, (s5 + f) & _MASK, (s6 + g) & _MASK, (s7 + h) & _MASK,
    )


def _pad(length: int) -> bytes:
    zeros = (55 - length) % 64
    return b"\x80" + b"\x00" * zeros + struct.pack(">Q", (length * 8) & 0xFFFFFFFFFFFFFFFF)


def _hash(message: bytes, state: tuple[int, ...], prior_bytes: int = 0) -> bytes:
    # prior_bytes: length already absorbed into `state` (counts toward the length field)
    message = bytes(message)
    if len(message) + prior_bytes >= MAX_MESSAGE_BYTES:
        raise ValueError("message too long for SHA-256")
    data = message + _pad(len(message) + prior_bytes)
    for off in range(0, len(data), 64):
        state = _compress(state, data[off : off + 64])
    return struct.pack(">8I", *state)


def digest(message: bytes) -> bytes:
    """Standard SHA-256 of ``message`` (32 bytes)."""
    return _hash(message, _STANDARD_WORDS)


def digest_with_iv(message: bytes, iv: InitVector) -> bytes:
    """SHA-256 of ``message`` starting from ``iv`` instead of H0..H7."""
    return _hash(message, iv.words)


def hexdigest(message: bytes) -> str:
    return digest(message).hex()


def derive_iv(material: bytes) -> InitVector:
    """Split a 32-byte digest into eight big-endian words."""
    if len(material) != 32:
        raise ValueError(f"IV material must be 32 bytes, got {len(material)}")
    return InitVector(struct.unpack(">8I", material))


def bit_distance(a: bytes, b: bytes) -> int:
    """Number of differing bits between two equal-length byte strings."""
    if len(a) != len(b):
        raise ValueError("length mismatch")
    return bin(int.from_bytes(a, "big") ^ int.from_bytes(b, "big")).count("1")
