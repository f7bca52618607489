"""Attribute-based object identifiers that change locally for dynamic
attributes and completely for static ones."""

from farhash.attributes import (
    Attribute,
    AttributeClass,
    AttributeManifest,
    FarHashError,
    ManifestError,
    VolatileAggregate,
    aggregate_volatile,
    canonicalize,
    load_manifest,
    parse_manifest,
)
from farhash.investigator import ChangeReport, Verdict, hamming, localize
from farhash.pipeline import FarHash, IdentitySchema, generate, regenerate, schema_of
from farhash.registry import LedgerRecord, Registry

__all__ = [
    "Attribute",
    "AttributeClass",
    "AttributeManifest",
    "ChangeReport",
    "FarHash",
    "FarHashError",
    "IdentitySchema",
    "LedgerRecord",
    "ManifestError",
    "Registry",
    "Verdict",
    "VolatileAggregate",
    "aggregate_volatile",
    "canonicalize",
    "generate",
    "hamming",
    "load_manifest",
    "localize",
    "parse_manifest",
    "regenerate",
    "schema_of",
]
