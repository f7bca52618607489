"""FaR hash computation.

    S1   hash every attribute value; keep full digests and 8-hex prefixes
    S1+  derive the lifetime seed from all full digests (first generation only)
    S2   seed the SHA-256 state from the static prefixes plus the seed
    S3   hash each prefix under that state -> 10-char base-62 segment
    S4   slide a 4-char folding window over the joined segments

A dynamic attribute only moves its own segment, and S4 smears that by at
most 3 characters to the left. A static attribute moves the state, so every
segment changes.
"""

from __future__ import annotations

import re
import string
from dataclasses import dataclass
from fractions import Fraction

from farhash import sha256
from farhash.attributes import (
    AttributeClass,
    AttributeManifest,
    FarHashError,
    VolatileAggregate,
    aggregate_volatile,
    canonicalize,
)
from farhash.sha256 import InitVector

ALPHABET = string.digits + string.ascii_uppercase + string.ascii_lowercase
SEGMENT_LENGTH = 10
WINDOW = 4
SEED_LENGTH = 8
VOLATILE_NAME = "=volatile"  # '=' cannot appear in a manifest name, so no clash

_B62_WIDTH = 43  # ceil(256 / log2(62))
_SEED_RE = re.compile(r"[0-9A-Za-z]{8}\Z")
_ALNUM = frozenset(ALPHABET)


def identifier_length(k: int) -> int:
    return SEGMENT_LENGTH * k - (WINDOW - 1)


def b62encode(data: bytes, width: int = 0) -> str:
    """Big-endian base-62 rendering, left-padded with '0' to ``width``."""
    n = int.from_bytes(data, "big")
    out = []
    while n:
        n, r = divmod(n, 62)
        out.append(ALPHABET[r])
    return "".join(reversed(out)).rjust(width, "0")


# ---- S1 / S1+ / S2 / S3 -------------------------------------------------


def step1_prefix(value: bytes) -> str:
    return sha256.digest(value)[:4].hex()


def step1plus_seed(full_digests: list[bytes]) -> str:
    if not full_digests:
        raise ValueError("seed needs at least one digest")
    master = "".join(d.hex() for d in full_digests)
    folded = step4_fuzzify(sha256.hexdigest(master.encode("ascii")))
    return folded[:SEED_LENGTH]


def step2_iv(static_prefixes: list[str], seed: str) -> InitVector:
    if not static_prefixes:
        raise ValueError("IV needs at least one static prefix")
    material = sha256.digest(("".join(static_prefixes) + seed).encode("utf-8"))
    return sha256.derive_iv(material)


def step3_segment(prefix: str, iv: InitVector) -> str:
    d = sha256.digest_with_iv(prefix.encode("utf-8"), iv)
    return b62encode(d, _B62_WIDTH)[:SEGMENT_LENGTH]


# ---- S4 -----------------------------------------------------------------


def fuzzify_window(window: str) -> str:
    if len(window) != WINDOW:
        raise ValueError(f"window must be {WINDOW} characters, got {len(window)}")
    if not _ALNUM.issuperset(window):
        raise ValueError(f"non-alphanumeric character in window {window!r}")
    s = sum(map(ord, window)) % 123
    if s < 48:
        s += 48
    if 58 <= s <= 64:
        s += 7
    if 91 <= s <= 96:
        s += 8
    return chr(s)


def step4_fuzzify(concatenated: str) -> str:
    n = len(concatenated)
    if n < WINDOW:
        raise ValueError(f"need at least {WINDOW} characters, got {n}")
    if not _ALNUM.issuperset(concatenated):
        raise ValueError("non-alphanumeric character in input")
    return "".join(fuzzify_window(concatenated[i : i + WINDOW]) for i in range(n - WINDOW + 1))


# ---- whole pipeline ------------------------------------------------------


@dataclass(frozen=True)
class IdentitySchema:
    """Ordered (name, class) pairs that fix the identifier layout."""

    fields: tuple[tuple[str, AttributeClass], ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "fields", tuple((n, AttributeClass(c)) for n, c in self.fields))
        if len(self.fields) < 2:
            raise FarHashError(f"identity needs at least 2 attributes, got {len(self.fields)}")
        if not any(c is AttributeClass.STATIC for _, c in self.fields):
            raise FarHashError("identity needs at least one static attribute")
        if any(c is AttributeClass.VOLATILE for _, c in self.fields):
            raise FarHashError("volatile attributes must be aggregated before building a schema")

    @property
    def k(self) -> int:
        return len(self.fields)

    @property
    def identifier_length(self) -> int:
        return identifier_length(self.k)

    def serialize(self) -> str:
        return "".join(f"{c.value}|{n}\n" for n, c in self.fields)

    def digest(self) -> str:
        return sha256.hexdigest(self.serialize().encode("utf-8"))

    @classmethod
    def parse(cls, text: str) -> IdentitySchema:
        fields = []
        for lineno, line in enumerate(text.split("\n"), start=1):
            if not line or line.startswith("#"):
                continue
            token, bar, name = line.partition("|")
            if not bar or not name:
                raise FarHashError(f"line {lineno}: expected '<class>|<name>'")
            try:
                fields.append((name, AttributeClass(token)))
            except ValueError:
                raise FarHashError(f"line {lineno}: unknown class {token!r}") from None
        return cls(tuple(fields))


@dataclass(frozen=True)
class FarHash:
    seed: str
    identifier: str
    schema: IdentitySchema
    prefixes: tuple[str, ...]
    iv: InitVector
    segments: tuple[str, ...]
    volatile: VolatileAggregate | None = None


def pipeline_attributes(
    manifest: AttributeManifest,
    previous_volatile: VolatileAggregate | None = None,
    threshold: Fraction | float | str = Fraction(1, 2),
) -> tuple[list[tuple[str, str, AttributeClass]], VolatileAggregate | None]:
    """(name, value, class) in schema order, volatile set folded in at the end."""
    attrs = [(a.name, a.value, a.cls) for a in manifest.attributes if a.cls is not AttributeClass.VOLATILE]
    volatile_values = [a.value for a in manifest.of_class(AttributeClass.VOLATILE)]
    aggregate = None
    if volatile_values or previous_volatile is not None:
        aggregate = aggregate_volatile(volatile_values, previous_volatile, threshold)
        attrs.append((VOLATILE_NAME, aggregate.value, AttributeClass.DYNAMIC))
    return attrs, aggregate


def schema_of(manifest: AttributeManifest) -> IdentitySchema:
    attrs, _ = pipeline_attributes(manifest)
    return IdentitySchema(tuple((name, cls) for name, _, cls in attrs))


def check_seed(seed: str) -> str:
    if not isinstance(seed, str) or not _SEED_RE.match(seed):
        raise ValueError(f"malformed seed {seed!r}: expected 8 ASCII alphanumerics")
    return seed


def _build(
    manifest: AttributeManifest,
    seed: str | None,
    previous_volatile: VolatileAggregate | None,
    threshold,
    previous: FarHash | None = None,
) -> FarHash:
    attrs, aggregate = pipeline_attributes(manifest, previous_volatile, threshold)
    schema = IdentitySchema(tuple((name, cls) for name, _, cls in attrs))
    digests = [sha256.digest(canonicalize(value)) for _, value, _ in attrs]
    prefixes = tuple(d[:4].hex() for d in digests)

    if seed is None:
        seed = step1plus_seed(digests)
    check_seed(seed)

    statics = [p for p, (_, _, cls) in zip(prefixes, attrs) if cls is AttributeClass.STATIC]
    iv = step2_iv(statics, seed)

    # only re-run S3 for prefixes whose segment is not already known under this IV
    known: dict[str, str] = {}
    if previous is not None and previous.iv == iv:
        known = dict(zip(previous.prefixes, previous.segments))
    segments = tuple(known.get(p) or step3_segment(p, iv) for p in prefixes)

    identifier = step4_fuzzify("".join(segments))
    return FarHash(seed, identifier, schema, prefixes, iv, segments, aggregate)


def generate(
    manifest: AttributeManifest,
    threshold: Fraction | float | str = Fraction(1, 2),
) -> FarHash:
    """First-time identifier computation, including the seed."""
    return _build(manifest, None, None, threshold)


def regenerate(
    manifest: AttributeManifest,
    seed: str,
    previous_volatile: VolatileAggregate | None = None,
    threshold: Fraction | float | str = Fraction(1, 2),
    previous: FarHash | None = None,
) -> FarHash:
    """Recompute with an already issued seed.

    ``previous_volatile`` carries the volatile hysteresis state of the last
    version; ``previous`` lets unchanged segments be reused.
    """
    return _build(manifest, seed, previous_volatile, threshold, previous)
