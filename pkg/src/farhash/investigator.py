"""Diffing identifier versions and attributing the change to attributes."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction

from farhash.attributes import AttributeClass
from farhash.pipeline import SEGMENT_LENGTH, WINDOW, IdentitySchema

_SMEAR = WINDOW - 1


class Verdict(enum.Enum):
    IDENTICAL = "IDENTICAL"
    DYNAMIC_CHANGE = "DYNAMIC_CHANGE"
    STATIC_CHANGE = "STATIC_CHANGE"
    INCONCLUSIVE = "INCONCLUSIVE"


@dataclass(frozen=True)
class ChangeReport:
    verdict: Verdict
    changed_attribute_indices: list[int] = field(default_factory=list)
    changed_positions: list[int] = field(default_factory=list)
    normalized_distance: Fraction = Fraction(0)

    def lines(self) -> list[str]:
        d = self.normalized_distance
        return [
            f"verdict={self.verdict.value}",
            "attrs=" + ",".join(map(str, self.changed_attribute_indices)),
            f"distance={d.numerator}/{d.denominator}",
        ]


def hamming(a: str, b: str) -> Fraction:
    """Fraction of positions at which two equal-length identifiers differ."""
    if len(a) != len(b):
        raise ValueError(f"identifier lengths differ ({len(a)} vs {len(b)})")
    if not a:
        return Fraction(0)
    return Fraction(sum(x != y for x, y in zip(a, b)), len(a))


def span(i: int, k: int) -> range:
    """Identifier positions that a change of attribute ``i`` can reach."""
    n = SEGMENT_LENGTH * k - _SMEAR
    return range(max(0, SEGMENT_LENGTH * i - _SMEAR), min(n, SEGMENT_LENGTH * i + SEGMENT_LENGTH))


def core(i: int) -> range:
    """Positions whose window lies entirely inside segment ``i``."""
    start = SEGMENT_LENGTH * i
    return range(start, start + SEGMENT_LENGTH - _SMEAR)


def localize(old: str, new: str, schema: IdentitySchema) -> ChangeReport:
    """Classify the difference between two identifiers of one schema.

    Attribution uses each attribute's exclusive core: a changed core
    position can only come from that attribute's segment. Neighbouring
    spans overlap by 3 characters, so counting touched spans instead
    would make one dynamic change touch three attributes.
    """
    if len(old) != len(new):
        raise ValueError(f"identifier lengths differ ({len(old)} vs {len(new)})")
    k = schema.k
    if len(old) != schema.identifier_length:
        raise ValueError(
            f"identifier length {len(old)} does not fit schema with {k} attributes "
            f"(expected {schema.identifier_length})"
        )

    changed = [i for i, (x, y) in enumerate(zip(old, new)) if x != y]
    distance = Fraction(len(changed), len(old))
    if not changed:
        return ChangeReport(Verdict.IDENTICAL, [], [], distance)

    changed_set = set(changed)
    touched = [i for i in range(k) if changed_set.intersection(core(i))]

    if 2 * len(touched) > k:
        return ChangeReport(Verdict.STATIC_CHANGE, touched, changed, distance)

    covered = set()
    for i in touched:
        covered.update(span(i, k))
    static_touched = any(schema.fields[i][1] is AttributeClass.STATIC for i in touched)
    if touched and changed_set <= covered and not static_touched:
        return ChangeReport(Verdict.DYNAMIC_CHANGE, touched, changed, distance)
    return ChangeReport(Verdict.INCONCLUSIVE, touched, changed, distance)


def incomparable(old: str, new: str) -> ChangeReport:
    """Report for identifiers of different layouts; every position counts as changed."""
    n = max(len(old), len(new))
    return ChangeReport(Verdict.INCONCLUSIVE, [], list(range(n)), Fraction(1) if n else Fraction(0))
