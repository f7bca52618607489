"""Attribute manifests: classified quasi-identifiers and their text format.

A manifest file looks like::

    object: 3D vision sensor
    dynamic|Operating Temperature=28.60
    static|Mac address=e5:84:e6:2f:33:61
    volatile|scratches=3

Blank lines and lines starting with ``#`` are ignored. Everything after the
first ``=`` is the value, byte for byte.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction

from farhash.sha256 import hexdigest


class FarHashError(Exception):
    """Base class for all errors raised by this package."""


class ManifestError(FarHashError, ValueError):
    def __init__(self, message: str, line: int | None = None) -> None:
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class AttributeClass(enum.Enum):
    STATIC = "static"
    DYNAMIC = "dynamic"
    VOLATILE = "volatile"


@dataclass(frozen=True)
class Attribute:
    name: str
    value: str
    cls: AttributeClass

    def __post_init__(self) -> None:
        if not self.name:
            raise ManifestError("attribute name is empty")
        if "\n" in self.name or "=" in self.name:
            raise ManifestError(f"attribute name {self.name!r} contains newline or '='")
        if "\n" in self.value:
            raise ManifestError(f"value of {self.name!r} contains a newline")


@dataclass(frozen=True)
class AttributeManifest:
    object_label: str
    attributes: tuple[Attribute, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "attributes", tuple(self.attributes))
        if "\n" in self.object_label:
            raise ManifestError("object label contains a newline")
        if not self.attributes:
            raise ManifestError("no attributes")
        seen = set()
        for attr in self.attributes:
            if attr.name in seen:
                raise ManifestError(f"duplicate attribute name {attr.name!r}")
            seen.add(attr.name)
        if not any(a.cls is AttributeClass.STATIC for a in self.attributes):
            raise ManifestError("manifest has no static attribute")

    def of_class(self, cls: AttributeClass) -> list[Attribute]:
        return [a for a in self.attributes if a.cls is cls]

    def replace_value(self, name: str, value: str) -> AttributeManifest:
        """Copy of the manifest with one attribute's value swapped."""
        if name not in {a.name for a in self.attributes}:
            raise KeyError(name)
        attrs = tuple(
            Attribute(a.name, value, a.cls) if a.name == name else a
            for a in self.attributes
        )
        return AttributeManifest(self.object_label, attrs)

    def serialize(self) -> str:
        lines = [f"object: {self.object_label}"]
        lines += [f"{a.cls.value}|{a.name}={a.value}" for a in self.attributes]
        return "\n".join(lines) + "\n"


def canonicalize(value: str) -> bytes:
    """Bytes that get hashed for ``value``: plain UTF-8, no normalization."""
    return value.encode("utf-8")


def parse_manifest(text: str) -> AttributeManifest:
    label = None
    attrs: list[Attribute] = []
    first_line: dict[str, int] = {}
    for lineno, raw in enumerate(text.split("\n"), start=1):
        if raw == "" or raw.startswith("#"):
            continue
        if "\r" in raw:
            raise ManifestError("carriage return in line (LF endings required)", lineno)
        if label is None:
            if not raw.startswith("object:"):
                raise ManifestError("first line must be 'object: <label>'", lineno)
            label = raw[len("object:"):].strip()
            continue
        head, sep, value = raw.partition("=")
        if not sep:
            raise ManifestError("expected '<class>|<name>=<value>'", lineno)
        token, bar, name = head.partition("|")
        if not bar:
            raise ManifestError("missing '|' between class and name", lineno)
        try:
            cls = AttributeClass(token)
        except ValueError:
            raise ManifestError(f"unknown class {token!r}", lineno) from None
        if not name:
            raise ManifestError("empty attribute name", lineno)
        if name in first_line:
            raise ManifestError(
                f"duplicate attribute name {name!r} (first on line {first_line[name]})",
                lineno,
            )
        first_line[name] = lineno
        attrs.append(Attribute(name, value, cls))

    if not attrs:
        raise ManifestError("no attributes")
    if not any(a.cls is AttributeClass.STATIC for a in attrs):
        raise ManifestError("manifest has no static attribute")
    return AttributeManifest(label, tuple(attrs))


def load_manifest(path) -> AttributeManifest:
    with open(path, encoding="utf-8", newline="") as fh:
        return parse_manifest(fh.read())


@dataclass(frozen=True)
class VolatileAggregate:
    """Set-level summary of all volatile attributes.

    ``snapshot`` holds the per-value digests the aggregate was last
    computed from; later calls measure change against it.
    """

    value: str
    threshold: Fraction = Fraction(1, 2)
    snapshot: tuple[str, ...] = field(default=(), repr=False)


def _aggregate_digest(digests: list[str] | tuple[str, ...]) -> str:
    return hexdigest("".join(digests).encode("ascii"))[:8]


def changed_fraction(old: tuple[str, ...], new: tuple[str, ...]) -> Fraction:
    n = max(len(old), len(new))
    if n == 0:
        return Fraction(0)
    changed = sum(
        1
        for i in range(n)
        if i >= len(old) or i >= len(new) or old[i] != new[i]
    )
    return Fraction(changed, n)


def aggregate_volatile(
    values: list[str],
    previous: VolatileAggregate | None = None,
    threshold: Fraction | float | str = Fraction(1, 2),
) -> VolatileAggregate:
    """Fold volatile values into one 8-hex pseudo-value with hysteresis.

    The aggregate only moves when more than ``threshold`` of the values
    differ from the snapshot stored with ``previous``.
    """
    threshold = Fraction(threshold)
    if not 0 < threshold <= 1:
        raise ValueError(f"threshold must lie in (0, 1], got {threshold}")
    if not values and previous is None:
        raise ManifestError("no volatile attributes")
    digests = tuple(hexdigest(canonicalize(v)) for v in values)
    candidate = VolatileAggregate(_aggregate_digest(digests), threshold, digests)
    if previous is None:
        return candidate
    if changed_fraction(previous.snapshot, digests) > threshold:
        return candidate
    return previous
