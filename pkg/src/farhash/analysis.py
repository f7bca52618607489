"""Randomized experiments on identifier distance behaviour.

Every trial draws its own ``random.Random`` seeded from
``(rng_seed, experiment, trial)``, so reports do not depend on the order
in which trials run and are byte-identical for a given seed.
"""

from __future__ import annotations

import csv
import random
import string
from dataclasses import dataclass, field
from fractions import Fraction

from farhash import sha256
from farhash.attributes import Attribute, AttributeClass, AttributeManifest
from farhash.investigator import hamming, span
from farhash.pipeline import b62encode, generate, identifier_length, regenerate

MIN_TRIALS = 100
AVALANCHE_FLOOR = Fraction(9, 10)
VALUE_ALPHABET = string.digits + string.ascii_letters
DISTRIBUTION = (
    "values: 1-32 chars uniform over [0-9A-Za-z]; "
    "classes: 1..K-1 static chosen uniformly, remaining dynamic, positions shuffled"
)


@dataclass
class ExperimentReport:
    name: str
    trials: int
    k: int
    rng_seed: int
    distances: list[Fraction] = field(repr=False)
    checks: dict[str, bool]
    bounds: dict[str, str]
    counters: dict[str, int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.trials < MIN_TRIALS or len(self.distances) != self.trials:
            raise ValueError("report needs one distance per trial and at least 100 trials")

    @property
    def mean_distance(self) -> Fraction:
        return sum(self.distances, Fraction(0)) / len(self.distances)

    @property
    def min_distance(self) -> Fraction:
        return min(self.distances)

    @property
    def max_distance(self) -> Fraction:
        return max(self.distances)

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def lines(self) -> list[str]:
        def frac(x: Fraction) -> str:
            return f"{x.numerator}/{x.denominator} ({float(x):.6f})"

        out = [
            f"experiment={self.name}",
            f"trials={self.trials}",
            f"k={self.k}",
            f"rng_seed={self.rng_seed}",
            f"distribution={DISTRIBUTION}",
            f"mean_distance={frac(self.mean_distance)}",
            f"min_distance={frac(self.min_distance)}",
            f"max_distance={frac(self.max_distance)}",
        ]
        out += [f"bound.{k}={v}" for k, v in self.bounds.items()]
        out += [f"count.{k}={v}" for k, v in self.counters.items()]
        out += [f"check.{k}={'pass' if v else 'fail'}" for k, v in self.checks.items()]
        out.append(f"pass={'true' if self.passed else 'false'}")
        return out

    def render(self) -> str:
        return "\n".join(self.lines()) + "\n"

    def write_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["trial", "distance_num", "distance_den", "distance"])
            for i, d in enumerate(self.distances):
                w.writerow([i, d.numerator, d.denominator, f"{float(d):.6f}"])


def _check_args(trials: int, k: int) -> None:
    if trials < MIN_TRIALS:
        raise ValueError(f"trials must be >= {MIN_TRIALS}, got {trials}")
    if k < 2:
        raise ValueError(f"k must be >= 2, got {k}")


def trial_rng(rng_seed: int, experiment: str, trial: int) -> random.Random:
    return random.Random(f"{rng_seed}:{experiment}:{trial}")


def random_value(rng: random.Random) -> str:
    return "".join(rng.choices(VALUE_ALPHABET, k=rng.randint(1, 32)))


def random_manifest(rng: random.Random, k: int, label: str = "object") -> AttributeManifest:
    n_static = rng.randint(1, k - 1)
    classes = [AttributeClass.STATIC] * n_static + [AttributeClass.DYNAMIC] * (k - n_static)
    rng.shuffle(classes)
    attrs = tuple(Attribute(f"qi{i}", random_value(rng), c) for i, c in enumerate(classes))
    return AttributeManifest(label, attrs)


def mutate(rng: random.Random, manifest: AttributeManifest, cls: AttributeClass) -> tuple[int, AttributeManifest]:
    """Change one random attribute of class ``cls`` to a different value."""
    candidates = [i for i, a in enumerate(manifest.attributes) if a.cls is cls]
    i = rng.choice(candidates)
    old = manifest.attributes[i].value
    new = old
    while new == old:
        new = random_value(rng)
    return i, manifest.replace_value(manifest.attributes[i].name, new)


def locality_bound(k: int) -> Fraction:
    return Fraction(13, identifier_length(k))


def run_dynamic_locality(trials: int, k: int, rng_seed: int, control: bool = False) -> ExperimentReport:
    _check_args(trials, k)
    name = "dynamic-locality" + ("-control" if control else "")
    bound = locality_bound(k)
    distances = []
    outside = over = 0
    for t in range(trials):
        rng = trial_rng(rng_seed, name, t)
        m = random_manifest(rng, k)
        before = generate(m)
        if control:
            i, m2 = None, m
        else:
            i, m2 = mutate(rng, m, AttributeClass.DYNAMIC)
        after = regenerate(m2, before.seed, previous=before)
        d = hamming(before.identifier, after.identifier)
        distances.append(d)
        over += d > bound
        if i is not None:
            allowed = span(i, k)
            outside += any(
                x != y and p not in allowed
                for p, (x, y) in enumerate(zip(before.identifier, after.identifier))
            )
    checks = {"per_trial_bound": over == 0, "changes_inside_span": outside == 0}
    if control:
        checks["control_zero"] = max(distances) == 0
    else:
        checks["mean_positive"] = sum(distances) > 0
    return ExperimentReport(
        name, trials, k, rng_seed, distances, checks,
        bounds={"per_trial_max": f"{bound.numerator}/{bound.denominator}", "span": "[10i-3, 10i+10)"},
        counters={"bound_violations": over, "span_violations": outside},
    )


def run_static_avalanche(trials: int, k: int, rng_seed: int, control: bool = False) -> ExperimentReport:
    _check_args(trials, k)
    name = "static-avalanche" + ("-control" if control else "")
    distances = []
    for t in range(trials):
        rng = trial_rng(rng_seed, name, t)
        m = random_manifest(rng, k)
        before = generate(m)
        m2 = m if control else mutate(rng, m, AttributeClass.STATIC)[1]
        after = regenerate(m2, before.seed)
        distances.append(hamming(before.identifier, after.identifier))
    report = ExperimentReport(
        name, trials, k, rng_seed, distances, {},
        bounds={"control_max" if control else "mean_min": "0" if control else "9/10"},
    )
    if control:
        report.checks["control_zero"] = report.max_distance == 0
    else:
        report.checks["mean_floor"] = report.mean_distance >= AVALANCHE_FLOOR
    return report


def baseline_identifier(manifest: AttributeManifest) -> str:
    """Plain whole-manifest hash: base-62 SHA-256 of the canonical text."""
    return b62encode(sha256.digest(manifest.serialize().encode("utf-8")), 43)


def run_baseline_comparison(
    trials: int, k: int, rng_seed: int, control: bool = False
) -> tuple[ExperimentReport, ExperimentReport]:
    _check_args(trials, k)
    name = "baseline-comparison" + ("-control" if control else "")
    bound = locality_bound(k)
    base_d, far_d = [], []
    misordered = 0
    for t in range(trials):
        rng = trial_rng(rng_seed, name, t)
        m = random_manifest(rng, k)
        m2 = m if control else mutate(rng, m, AttributeClass.DYNAMIC)[1]
        before = generate(m)
        after = regenerate(m2, before.seed, previous=before)
        b = hamming(baseline_identifier(m), baseline_identifier(m2))
        f = hamming(before.identifier, after.identifier)
        base_d.append(b)
        far_d.append(f)
        if not control:
            misordered += not b > f

    baseline = ExperimentReport(
        name + ".baseline", trials, k, rng_seed, base_d, {},
        bounds={"mean_min": "0" if control else "9/10"},
    )
    far = ExperimentReport(
        name + ".far", trials, k, rng_seed, far_d, {},
        bounds={"per_trial_max": f"{bound.numerator}/{bound.denominator}", "ordering": "baseline > far in every trial"},
        counters={"ordering_violations": misordered},
    )
    if control:
        baseline.checks["control_zero"] = baseline.max_distance == 0
        far.checks["control_zero"] = far.max_distance == 0
    else:
        baseline.checks["mean_floor"] = baseline.mean_distance >= AVALANCHE_FLOOR
        far.checks["per_trial_bound"] = far.max_distance <= bound
        far.checks["ordering"] = misordered == 0
    return baseline, far


def run_unlinkability(trials: int, rng_seed: int, k: int = 5) -> ExperimentReport:
    """Two objects share one attribute value; their segments for it must differ.

    Distance is the normalized character distance between the two segments.
    """
    _check_args(trials, k)
    name = "unlinkability"
    distances = []
    collisions = reseeded = 0
    for t in range(trials):
        rng = trial_rng(rng_seed, name, t)
        a = random_manifest(rng, k, "object-a")
        j = rng.randrange(k)
        shared = a.attributes[j]
        while True:
            b = random_manifest(rng, k, "object-b")
            b = AttributeManifest(
                b.object_label,
                tuple(Attribute(x.name, shared.value, x.cls) if x.name == shared.name else x for x in b.attributes),
            )
            fa, fb = generate(a), generate(b)
            if fa.seed != fb.seed:
                break
            reseeded += 1
        sa, sb = fa.segments[j], fb.segments[j]
        collisions += sa == sb
        distances.append(hamming(sa, sb))
    return ExperimentReport(
        name, trials, k, rng_seed, distances,
        {"no_collisions": collisions == 0},
        bounds={"segment_collisions_max": "0"},
        counters={"segment_collisions": collisions, "seed_redraws": reseeded},
    )


def _baseline_pair(trials, k, rng_seed):
    return list(run_baseline_comparison(trials, k, rng_seed))


EXPERIMENTS = {
    "dynamic-locality": lambda trials, k, seed: [run_dynamic_locality(trials, k, seed)],
    "static-avalanche": lambda trials, k, seed: [run_static_avalanche(trials, k, seed)],
    "baseline-comparison": _baseline_pair,
    "unlinkability": lambda trials, k, seed: [run_unlinkability(trials, seed, k)],
}


def run(name: str, trials: int, rng_seed: int, k: int = 5) -> list[ExperimentReport]:
    try:
        experiment = EXPERIMENTS[name]
    except KeyError:
        raise ValueError(f"unknown experiment {name!r}; choose from {', '.join(EXPERIMENTS)}") from None
    return experiment(trials, k, rng_seed)
