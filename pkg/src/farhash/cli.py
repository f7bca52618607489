"""farhash command line.

Scriptable output goes to stdout as ``key=value`` lines; prose and errors
go to stderr, errors as a single ``error=<kind> reason=<text>`` line.

Exit codes:
    0  success / MATCH / experiment passed
    1  experiment ran but failed its bounds
    2  usage error, unreadable or malformed manifest/schema, bad arguments
    3  object already registered
    4  unknown object
    5  verification MISMATCH
    6  store locked by another writer
    7  ledger chain corrupted
    8  store read/write failure or failed replay
"""

from __future__ import annotations

import argparse
import os
import sys

from farhash import analysis
from farhash.attributes import FarHashError, ManifestError, load_manifest
from farhash.investigator import incomparable, localize
from farhash.pipeline import IdentitySchema, schema_of
from farhash.registry import (
    ChainCorruptionError,
    DuplicateObjectError,
    Registry,
    RegistryError,
    StoreLockedError,
    UnknownObjectError,
    compare,
)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2
EXIT_DUPLICATE = 3
EXIT_UNKNOWN = 4
EXIT_MISMATCH = 5
EXIT_LOCKED = 6
EXIT_CORRUPT = 7
EXIT_STORE = 8

STORE_ENV = "FARHASH_STORE"


class CliError(Exception):
    def __init__(self, code: int, kind: str, reason: str) -> None:
        super().__init__(reason)
        self.code = code
        self.kind = kind


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError(EXIT_USAGE, "usage", message)


def _emit(*lines: str) -> None:
    for line in lines:
        print(line)


def _say(text: str) -> None:
    print(text, file=sys.stderr)


def _store(args) -> Registry:
    path = args.store or os.environ.get(STORE_ENV)
    if not path:
        raise CliError(EXIT_USAGE, "usage", f"no store given (use --store or ${STORE_ENV})")
    return Registry(path)


def _manifest(path):
    try:
        return load_manifest(path)
    except OSError as exc:
        raise CliError(EXIT_USAGE, "manifest", f"cannot read {path}: {exc.strerror}") from None
    except ManifestError as exc:
        raise CliError(EXIT_USAGE, "manifest", str(exc)) from None


def cmd_generate(args) -> int:
    manifest = _manifest(args.manifest)
    store = _store(args)
    rec = store.register(manifest, args.object)
    _say(f"registered {rec.object_label!r} as version 1")
    _emit(f"object={rec.object_label}", f"seed={rec.seed}", f"id={rec.identifier}")
    return EXIT_OK


def cmd_update(args) -> int:
    manifest = _manifest(args.manifest)
    store = _store(args)
    label = args.object or manifest.object_label
    rec = store.append_version(label, manifest)
    previous = store.history(label)[-2]
    report = compare(previous, rec.identifier, schema_of(manifest))
    _say(f"appended version {rec.version} of {label!r}")
    _emit(f"version={rec.version}", f"id={rec.identifier}", *report.lines())
    return EXIT_OK


def cmd_verify(args) -> int:
    manifest = _manifest(args.manifest)
    store = _store(args)
    label = args.object or manifest.object_label
    result = store.verify(label, manifest)
    if result.match:
        _emit("result=MATCH", f"id={result.actual}")
        return EXIT_OK
    _say(f"identifier of {label!r} does not match the ledger")
    _emit("result=MISMATCH", f"expected={result.expected}", f"actual={result.actual}", *result.report.lines())
    return EXIT_MISMATCH


def cmd_diff(args) -> int:
    if not args.schema:
        raise CliError(EXIT_USAGE, "usage", "diff needs --schema")
    try:
        with open(args.schema, encoding="utf-8") as fh:
            schema = IdentitySchema.parse(fh.read())
    except OSError as exc:
        raise CliError(EXIT_USAGE, "schema", f"cannot read {args.schema}: {exc.strerror}") from None
    except FarHashError as exc:
        raise CliError(EXIT_USAGE, "schema", str(exc)) from None
    if len(args.old) != len(args.new):
        report = incomparable(args.old, args.new)
    else:
        try:
            report = localize(args.old, args.new, schema)
        except ValueError as exc:
            raise CliError(EXIT_USAGE, "schema", str(exc)) from None
    _emit(*report.lines(), "positions=" + ",".join(map(str, report.changed_positions)))
    return EXIT_OK


def cmd_history(args) -> int:
    if not args.object:
        raise CliError(EXIT_USAGE, "usage", "history needs --object")
    store = _store(args)
    for rec in store.history(args.object):
        _emit(*rec.lines(), "")
    return EXIT_OK


def cmd_check_chain(args) -> int:
    store = _store(args)
    bad = store.check_chain()
    if bad is None:
        _emit("chain=ok", f"records={len(store.records())}")
        return EXIT_OK
    _say(f"ledger chain broken at record {bad}")
    _emit("chain=corrupt", f"first_bad={bad}")
    return EXIT_CORRUPT


def cmd_analyze(args) -> int:
    if args.trials < analysis.MIN_TRIALS:
        raise CliError(EXIT_USAGE, "usage", f"--trials must be >= {analysis.MIN_TRIALS}")
    if args.experiment not in analysis.EXPERIMENTS:
        raise CliError(
            EXIT_USAGE, "usage",
            f"unknown experiment {args.experiment!r}; choose from {', '.join(analysis.EXPERIMENTS)}",
        )
    reports = analysis.run(args.experiment, args.trials, args.seed)
    sys.stdout.write("\n".join(r.render() for r in reports))
    return EXIT_OK if all(r.passed for r in reports) else EXIT_FAILED


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="farhash", description="Attribute-based object identifiers (FaR hash).")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def store_flag(p):
        p.add_argument("--store", help=f"ledger file (default: ${STORE_ENV})")

    for name, func, helptext in (
        ("generate", cmd_generate, "register a new object and print its seed and id"),
        ("update", cmd_update, "append a new version for a changed manifest"),
        ("verify", cmd_verify, "recompute the id and compare with the ledger"),
    ):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--manifest", required=True)
        p.add_argument("--object", help="object label (default: the manifest's object: line)")
        store_flag(p)
        p.set_defaults(func=func)

    p = sub.add_parser("diff", help="localize the change between two identifiers")
    p.add_argument("old")
    p.add_argument("new")
    p.add_argument("--schema", help="schema file, one '<class>|<name>' per line")
    p.set_defaults(func=cmd_diff)

    p = sub.add_parser("history", help="list all versions of an object")
    p.add_argument("--object")
    store_flag(p)
    p.set_defaults(func=cmd_history)

    p = sub.add_parser("check-chain", help="validate the ledger hash chain")
    store_flag(p)
    p.set_defaults(func=cmd_check_chain)

    p = sub.add_parser("analyze", help="run a statistical experiment")
    p.add_argument("experiment", help=", ".join(analysis.EXPERIMENTS))
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0, help="RNG seed")
    p.set_defaults(func=cmd_analyze)
    return parser


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except CliError as exc:
        code, kind, reason = exc.code, exc.kind, str(exc)
    except DuplicateObjectError as exc:
        code, kind, reason = EXIT_DUPLICATE, "duplicate", str(exc)
    except UnknownObjectError as exc:
        code, kind, reason = EXIT_UNKNOWN, "unknown-object", str(exc)
    except StoreLockedError as exc:
        code, kind, reason = EXIT_LOCKED, "locked", str(exc)
    except ChainCorruptionError as exc:
        code, kind, reason = EXIT_CORRUPT, "chain", str(exc)
    except RegistryError as exc:
        code, kind, reason = EXIT_STORE, "store", str(exc)
    except FarHashError as exc:
        code, kind, reason = EXIT_USAGE, "input", str(exc)
    reason = " ".join(reason.split())
    print(f"error={kind} reason={reason}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
