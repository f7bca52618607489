"""Local tamper-evident ledger of seeds and identifier versions.

One record per line, ``key=value`` fields joined by ``;`` in a fixed order.
Each record's hash covers its own line up to ``;record_hash=`` and the
line carries its predecessor's hash, so editing any byte breaks the chain.

Canonical manifests are archived next to the store (``<store>.archive/``)
so every historical identifier can be recomputed from manifest + seed.
"""

from __future__ import annotations

import fcntl
import hashlib
import os
import re
import time
from contextlib import contextmanager
from dataclasses import dataclass, fields
from functools import lru_cache
from fractions import Fraction
from pathlib import Path
from urllib.parse import quote, unquote

from farhash.attributes import AttributeManifest, FarHashError, parse_manifest
from farhash.investigator import ChangeReport, incomparable, localize
from farhash.pipeline import (
    FarHash,
    IdentitySchema,
    check_seed,
    generate,
    pipeline_attributes,
    regenerate,
)

GENESIS_HASH = "0" * 64
_HASH_MARK = b";record_hash="
_HEX64 = re.compile(r"[0-9a-f]{64}\Z")
_UINT = re.compile(r"(0|[1-9][0-9]*)\Z")
_IDENT = re.compile(r"[0-9A-Za-z]+\Z")
# printable ASCII minus the field separators and the escape char itself
_LABEL_SAFE = "".join(chr(c) for c in range(0x20, 0x7F) if chr(c) not in "%;=")


class RegistryError(FarHashError):
    pass


class DuplicateObjectError(RegistryError):
    pass


class UnknownObjectError(RegistryError):
    pass


class StoreLockedError(RegistryError):
    pass


class ChainCorruptionError(RegistryError):
    def __init__(self, first_bad: int) -> None:
        self.first_bad = first_bad
        super().__init__(f"ledger chain broken at record {first_bad}")


class ReplayError(RegistryError):
    pass


@dataclass(frozen=True)
class LedgerRecord:
    sequence_no: int
    object_label: str
    version: int
    schema_digest: str
    manifest_digest: str
    seed: str | None
    identifier: str
    timestamp: int
    prev_hash: str
    record_hash: str = ""

    def body(self) -> bytes:
        parts = [
            f"sequence_no={self.sequence_no}",
            f"object_label={quote(self.object_label, safe=_LABEL_SAFE)}",
            f"version={self.version}",
            f"schema_digest={self.schema_digest}",
            f"manifest_digest={self.manifest_digest}",
            f"seed={self.seed or ''}",
            f"identifier={self.identifier}",
            f"timestamp={self.timestamp}",
            f"prev_hash={self.prev_hash}",
        ]
        return ";".join(parts).encode("utf-8")

    def sealed(self) -> LedgerRecord:
        h = hashlib.sha256(self.body()).hexdigest()
        return LedgerRecord(**{**self.__dict__, "record_hash": h})

    def serialize(self) -> bytes:
        return self.body() + _HASH_MARK + self.record_hash.encode("ascii") + b"\n"

    def lines(self) -> list[str]:
        return [f"{f.name}={getattr(self, f.name) if getattr(self, f.name) is not None else ''}" for f in fields(self)]


_FIELD_NAMES = [f.name for f in fields(LedgerRecord)]


def parse_record(line: bytes) -> LedgerRecord:
    """Parse one store line (without its LF). Raises ValueError on any defect."""
    text = line.decode("utf-8")
    parts = text.split(";")
    if len(parts) != len(_FIELD_NAMES):
        raise ValueError(f"expected {len(_FIELD_NAMES)} fields, got {len(parts)}")
    raw = {}
    for name, part in zip(_FIELD_NAMES, parts):
        key, sep, value = part.partition("=")
        if key != name or not sep:
            raise ValueError(f"expected field {name!r}, got {part[:20]!r}")
        raw[name] = value
    for name in ("sequence_no", "version", "timestamp"):
        if not _UINT.match(raw[name]):
            raise ValueError(f"{name} is not a non-negative integer")
    for name in ("schema_digest", "manifest_digest", "prev_hash", "record_hash"):
        if not _HEX64.match(raw[name]):
            raise ValueError(f"{name} is not 64 lowercase hex chars")
    if not _IDENT.match(raw["identifier"]):
        raise ValueError("identifier is not alphanumeric")
    seed = raw["seed"] or None
    if seed is not None:
        check_seed(seed)
    rec = LedgerRecord(
        sequence_no=int(raw["sequence_no"]),
        object_label=unquote(raw["object_label"], errors="strict"),
        version=int(raw["version"]),
        schema_digest=raw["schema_digest"],
        manifest_digest=raw["manifest_digest"],
        seed=seed,
        identifier=raw["identifier"],
        timestamp=int(raw["timestamp"]),
        prev_hash=raw["prev_hash"],
        record_hash=raw["record_hash"],
    )
    if rec.serialize() != line + b"\n":
        raise ValueError("record is not in canonical form")
    return rec


@lru_cache(maxsize=8192)
def _sealed_record(line: bytes) -> LedgerRecord | None:
    """Parsed record if ``line`` is well formed and its hash matches, else None."""
    try:
        rec = parse_record(line)
    except ValueError:
        return None
    body, _, _ = line.rpartition(_HASH_MARK)
    if hashlib.sha256(body).hexdigest() != rec.record_hash:
        return None
    return rec


def _scan(data: bytes) -> tuple[list[LedgerRecord], int | None]:
    """Validate raw store bytes; return the good prefix and the first bad index."""
    lines = data.split(b"\n")
    tail = lines.pop()  # b"" when the file ends in LF
    records: list[LedgerRecord] = []
    prev = GENESIS_HASH
    versions: dict[str, int] = {}
    for idx, line in enumerate(lines):
        rec = _sealed_record(line)
        if rec is None:
            return records, idx
        if rec.sequence_no != idx or rec.prev_hash != prev:
            return records, idx
        if rec.version != versions.get(rec.object_label, 0) + 1:
            return records, idx
        if (rec.version == 1) != (rec.seed is not None):
            return records, idx
        versions[rec.object_label] = rec.version
        records.append(rec)
        prev = rec.record_hash
    if tail:
        return records, len(lines)
    return records, None


def check_chain(data: bytes) -> int | None:
    """Validate raw store bytes: ``None`` if intact, else the first bad sequence number."""
    return _scan(data)[1]


def manifest_digest(manifest: AttributeManifest) -> str:
    return hashlib.sha256(manifest.serialize().encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class Verification:
    match: bool
    expected: str
    actual: str
    report: ChangeReport | None = None


class Registry:
    """Append-only object ledger backed by a single file.

    Writers take an exclusive, non-blocking lock on ``<store>.lock``; a
    second concurrent writer gets ``StoreLockedError``. New content is
    written to a temp file and renamed over the store, so readers always
    see a complete prefix of the log.
    """

    def __init__(self, path, clock=time.time, threshold=Fraction(1, 2)) -> None:
        self.path = Path(path)
        self.archive_dir = self.path.with_name(self.path.name + ".archive")
        self.lock_path = self.path.with_name(self.path.name + ".lock")
        self.clock = clock
        self.threshold = Fraction(threshold)

    # ---- reading ---------------------------------------------------------

    def _read(self) -> bytes:
        try:
            return self.path.read_bytes()
        except FileNotFoundError:
            return b""
        except OSError as exc:
            raise RegistryError(f"unreadable store {self.path}: {exc}") from exc

    def check_chain(self) -> int | None:
        """``None`` if the chain is intact, else the first bad sequence number."""
        return check_chain(self._read())

    def records(self) -> list[LedgerRecord]:
        records, bad = _scan(self._read())
        if bad is not None:
            raise ChainCorruptionError(bad)
        return records

    def history(self, label: str) -> list[LedgerRecord]:
        out = [r for r in self.records() if r.object_label == label]
        if not out:
            raise UnknownObjectError(f"unknown object {label!r}")
        return out

    def archived_manifest(self, record: LedgerRecord) -> AttributeManifest:
        path = self.archive_dir / f"{record.sequence_no:08d}.manifest"
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise ReplayError(f"no archived manifest for record {record.sequence_no}") from exc
        manifest = parse_manifest(text)
        if manifest_digest(manifest) != record.manifest_digest:
            raise ReplayError(f"archived manifest for record {record.sequence_no} does not match its digest")
        return manifest

    def replay(self, label: str) -> list[FarHash]:
        """Recompute every version of ``label`` from archived manifests and the seed."""
        history = self.history(label)
        seed = history[0].seed
        results: list[FarHash] = []
        vol = None
        for rec in history:
            fh = regenerate(self.archived_manifest(rec), seed, vol, self.threshold)
            if fh.identifier != rec.identifier or fh.schema.digest() != rec.schema_digest:
                raise ReplayError(f"record {rec.sequence_no} does not replay")
            results.append(fh)
            vol = fh.volatile
        return results

    # ---- writing ---------------------------------------------------------

    @contextmanager
    def _writer(self):
        self.path.parent.mkdir(parents=True, exist_ok=True)
        fd = os.open(self.lock_path, os.O_CREAT | os.O_RDWR, 0o644)
        try:
            try:
                fcntl.flock(fd, fcntl.LOCK_EX | fcntl.LOCK_NB)
            except BlockingIOError:
                raise StoreLockedError(f"store {self.path} is locked by another writer") from None
            yield
        finally:
            os.close(fd)

    def _append(self, data: bytes, records, manifest: AttributeManifest, **values) -> LedgerRecord:
        seq = len(records)
        prev = records[-1].record_hash if records else GENESIS_HASH
        rec = LedgerRecord(
            sequence_no=seq,
            timestamp=int(self.clock()),
            prev_hash=prev,
            manifest_digest=manifest_digest(manifest),
            **values,
        ).sealed()
        try:
            self.archive_dir.mkdir(parents=True, exist_ok=True)
            (self.archive_dir / f"{seq:08d}.manifest").write_text(manifest.serialize(), encoding="utf-8")
            tmp = self.path.with_name(self.path.name + ".tmp")
            with open(tmp, "wb") as fh:
                fh.write(data + rec.serialize())
                fh.flush()
                os.fsync(fh.fileno())
            os.replace(tmp, self.path)
        except OSError as exc:
            raise RegistryError(f"cannot write store {self.path}: {exc}") from exc
        return rec

    def _load_for_write(self):
        data = self._read()
        records, bad = _scan(data)
        if bad is not None:
            raise ChainCorruptionError(bad)
        return data, records

    def register(self, manifest: AttributeManifest, label: str | None = None) -> LedgerRecord:
        label = manifest.object_label if label is None else label
        if not label:
            raise RegistryError("object label is empty")
        with self._writer():
            data, records = self._load_for_write()
            if any(r.object_label == label for r in records):
                raise DuplicateObjectError(f"object {label!r} already registered")
            fh = generate(manifest, self.threshold)
            return self._append(
                data, records, manifest,
                object_label=label,
                version=1,
                schema_digest=fh.schema.digest(),
                seed=fh.seed,
                identifier=fh.identifier,
            )

    def _latest_volatile(self, history: list[LedgerRecord]):
        """Volatile hysteresis state after the last recorded version."""
        vol = None
        for rec in history:
            _, vol = pipeline_attributes(self.archived_manifest(rec), vol, self.threshold)
        return vol

    def append_version(self, label: str, manifest: AttributeManifest) -> LedgerRecord:
        with self._writer():
            data, records = self._load_for_write()
            history = [r for r in records if r.object_label == label]
            if not history:
                raise UnknownObjectError(f"unknown object {label!r}")
            fh = regenerate(manifest, history[0].seed, self._latest_volatile(history), self.threshold)
            return self._append(
                data, records, manifest,
                object_label=label,
                version=history[-1].version + 1,
                schema_digest=fh.schema.digest(),
                seed=None,
                identifier=fh.identifier,
            )

    # ---- third-party check ----------------------------------------------

    def verify(self, label: str, manifest: AttributeManifest) -> Verification:
        history = self.history(label)
        fh = regenerate(manifest, history[0].seed, self._latest_volatile(history), self.threshold)
        last = history[-1]
        if fh.identifier == last.identifier:
            return Verification(True, last.identifier, fh.identifier)
        return Verification(False, last.identifier, fh.identifier, compare(last, fh.identifier, fh.schema))


def compare(old: LedgerRecord, identifier: str, schema: IdentitySchema) -> ChangeReport:
    """Change report from a recorded version to a new identifier with ``schema``."""
    if old.schema_digest == schema.digest():
        return localize(old.identifier, identifier, schema)
    return incomparable(old.identifier, identifier)
