"""The persisted ground-truth record of a generated batch (``manifest.json``).

Key order is fixed by the dataclass field order below, so identical batches
serialize to identical bytes.

Top level::

    formatVersion, generatorVersion, batch, masterSeed, rngAlgorithm,
    argvPolicy, ranges, records

Each record::

    index, childSeed, specText, argvArity, trigger, nonTrigger, bugKind,
    bugLine, sourcePath, sourceSha256, metrics {cyclomatic, pathStatements,
    transformationCount}, status ("ok" | "error"), error
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Optional

from . import __version__

FORMAT_VERSION = 1


class ManifestError(ValueError):
    pass


@dataclass
class Record:
    index: int
    child_seed: int
    spec_text: str
    argv_arity: int = 0
    trigger: Optional[list] = None
    non_trigger: Optional[list] = None
    bug_kind: Optional[str] = None
    bug_line: Optional[int] = None
    source_path: Optional[str] = None
    source_sha256: Optional[str] = None
    metrics: Optional[dict] = None
    status: str = "ok"
    error: Optional[str] = None

    @property
    def ok(self):
        return self.status == "ok"

    def to_json(self):
        return {
            "index": self.index,
            "childSeed": self.child_seed,
            "specText": self.spec_text,
            "argvArity": self.argv_arity,
            "trigger": self.trigger,
            "nonTrigger": self.non_trigger,
            "bugKind": self.bug_kind,
            "bugLine": self.bug_line,
            "sourcePath": self.source_path,
            "sourceSha256": self.source_sha256,
            "metrics": None if self.metrics is None else {
                "cyclomatic": self.metrics["cyclomatic"],
                "pathStatements": self.metrics["pathStatements"],
                "transformationCount": self.metrics["transformationCount"],
            },
            "status": self.status,
            "error": self.error,
        }

    @classmethod
    def from_json(cls, d):
        return cls(
            index=d["index"],
            child_seed=d["childSeed"],
            spec_text=d["specText"],
            argv_arity=d["argvArity"],
            trigger=d["trigger"],
            non_trigger=d["nonTrigger"],
            bug_kind=d["bugKind"],
            bug_line=d["bugLine"],
            source_path=d["sourcePath"],
            source_sha256=d["sourceSha256"],
            metrics=d["metrics"],
            status=d["status"],
            error=d["error"],
        )


@dataclass
class Manifest:
    batch: str
    master_seed: int
    rng_algorithm: str
    argv_policy: str
    ranges: dict
    records: list = field(default_factory=list)
    format_version: int = FORMAT_VERSION
    generator_version: str = __version__

    def to_json(self):
        return {
            "formatVersion": self.format_version,
            "generatorVersion": self.generator_version,
            "batch": self.batch,
            "masterSeed": self.master_seed,
            "rngAlgorithm": self.rng_algorithm,
            "argvPolicy": self.argv_policy,
            "ranges": self.ranges,
            "records": [r.to_json() for r in self.records],
        }

    @classmethod
    def from_json(cls, d):
        version = d.get("formatVersion")
        if not isinstance(version, int):
            raise ManifestError(f"missing or malformed formatVersion: {version!r}")
        if version > FORMAT_VERSION:
            raise ManifestError(
                f"manifest formatVersion {version} is newer than supported version {FORMAT_VERSION}"
            )
        try:
            return cls(
                batch=d["batch"],
                master_seed=d["masterSeed"],
                rng_algorithm=d["rngAlgorithm"],
                argv_policy=d["argvPolicy"],
                ranges=d["ranges"],
                records=[Record.from_json(r) for r in d["records"]],
                format_version=version,
                generator_version=d["generatorVersion"],
            )
        except KeyError as exc:
            raise ManifestError(f"manifest is missing key {exc}") from None


def dumps(manifest):
    return json.dumps(manifest.to_json(), indent=2, ensure_ascii=False) + "\n"


def write(manifest, path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps(manifest))


def read(path):
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ManifestError(f"{path}: not valid JSON: {exc}") from None
    return Manifest.from_json(data)


def sha256(text):
    return hashlib.sha256(text.encode("utf-8")).hexdigest()
