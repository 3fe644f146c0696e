"""Compile emitted PUTs with system compilers and check their runtime behavior.

Every PUT is built with each configured compiler/flag pair and run on its
triggering and non-triggering inputs.  An optional sanitizer build looks for
undefined behavior.
"""

from __future__ import annotations

import json
import os
import re
import shutil
import signal
import subprocess
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional

from . import manifest as mf
from .emit import brace_depth

ENV_CC_LIST = "PUTFORGE_CC_LIST"
DEFAULT_COMPILERS = ("gcc", "clang")
DEFAULT_FLAG_SETS = (("-O0", "-Wall"), ("-O1", "-Wall"))
SANITIZER_FLAGS = ("-O0", "-g", "-fsanitize=address,undefined", "-fno-sanitize-recover=undefined")
DEFAULT_TIMEOUT = 10.0
CLANG_BRACKET_DEPTH = 256

CRASH_SIGNALS = {signal.SIGABRT, signal.SIGSEGV, signal.SIGBUS, signal.SIGILL, signal.SIGFPE}

_SANITIZER_LINE = re.compile(r"^(?P<file>[^:\s]+):(?P<line>\d+):(?:\d+:)? runtime error: (?P<msg>.*)$")
_ASAN = re.compile(r"ERROR: AddressSanitizer: (?P<msg>.*)$")


@dataclass(frozen=True)
class CompilerConfig:
    name: str
    command: str
    flags: tuple
    sanitize: bool = False

    @property
    def llvm_like(self):
        return "clang" in os.path.basename(self.command)

    def available(self):
        return shutil.which(self.command) is not None

    def compile_flags(self, source):
        flags = list(self.flags)
        depth = brace_depth(source)
        if self.llvm_like and depth >= CLANG_BRACKET_DEPTH:
            flags.append(f"-fbracket-depth={depth + 16}")
        return flags


def default_configs(compilers=None, sanitizer=True):
    """gcc/clang x {-O0 -Wall, -O1 -Wall}, plus one sanitizer build.

    ``compilers`` defaults to ``$PUTFORGE_CC_LIST`` or gcc,clang.
    """
    if compilers is None:
        env = os.environ.get(ENV_CC_LIST)
        compilers = [c.strip() for c in env.split(",") if c.strip()] if env else list(DEFAULT_COMPILERS)
    configs = []
    for cc in compilers:
        for flags in DEFAULT_FLAG_SETS:
            configs.append(CompilerConfig(f"{cc} {' '.join(flags)}", cc, tuple(flags)))
    if sanitizer:
        # Prefer an llvm-like compiler for the sanitizer build.
        present = [cc for cc in compilers if shutil.which(cc)]
        ordered = sorted(present, key=lambda c: "clang" not in c)
        if ordered:
            cc = ordered[0]
            configs.append(CompilerConfig(f"{cc} sanitize", cc, SANITIZER_FLAGS, sanitize=True))
    return configs


def load_configs(path):
    """Read a JSON list of ``{name, command, flags, sanitize}`` objects."""
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    return [
        CompilerConfig(d.get("name", d["command"]), d["command"], tuple(d.get("flags", ())),
                       bool(d.get("sanitize", False)))
        for d in data
    ]


@dataclass
class RunResult:
    outcome: str  # abort | cleanExit | other(N) | timeout | inconclusive
    returncode: Optional[int]
    findings: list = field(default_factory=list)
    expected_findings: list = field(default_factory=list)


@dataclass
class ConfigReport:
    config: str
    command: list
    skipped: bool = False
    compile_ok: bool = False
    warning_count: int = 0
    compiler_output: str = ""
    trigger: Optional[RunResult] = None
    non_trigger: Optional[RunResult] = None
    sanitize: bool = False


@dataclass
class VerificationReport:
    index: Optional[int]
    status: str  # pass | fail | inconclusive | skipped
    configs: list
    problems: list = field(default_factory=list)

    @property
    def passed(self):
        return self.status == "pass"

    def to_json(self):
        return asdict(self)


def classify(returncode):
    """Outcome class of a run; a plain nonzero exit is never an abort."""
    if returncode == 0:
        return "cleanExit"
    if returncode < 0 and -returncode in {int(s) for s in CRASH_SIGNALS}:
        return "abort"
    return f"other({returncode})"


def sanitizer_findings(stderr):
    """``(line or None, message)`` for each sanitizer report in ``stderr``."""
    out = []
    for raw in stderr.splitlines():
        m = _SANITIZER_LINE.match(raw.strip())
        if m:
            out.append((int(m.group("line")), m.group("msg")))
            continue
        m = _ASAN.search(raw)
        if m:
            out.append((None, "AddressSanitizer: " + m.group("msg")))
    return out


def _run(binary, argv, timeout, sanitize):
    env = dict(os.environ)
    if sanitize:
        env["ASAN_OPTIONS"] = "abort_on_error=1:detect_leaks=0:symbolize=0"
        env["UBSAN_OPTIONS"] = "halt_on_error=1:abort_on_error=1:print_stacktrace=0"
    try:
        proc = subprocess.run([binary, *argv], capture_output=True, timeout=timeout, env=env)
    except subprocess.TimeoutExpired:
        return RunResult("timeout", None)
    stderr = proc.stderr.decode("utf-8", "replace")
    result = RunResult(classify(proc.returncode), proc.returncode)
    if sanitize:
        result.findings = sanitizer_findings(stderr)
    return result


def _split_findings(result, bug_kind, bug_line, is_trigger):
    """Separate the oob bug's own detection from genuine findings."""
    expected, unexpected = [], []
    for line, msg in result.findings:
        if is_trigger and bug_kind == "oob" and line in (bug_line, None):
            expected.append((line, msg))
        else:
            unexpected.append((line, msg))
    result.expected_findings = expected
    result.findings = unexpected


def _check_config(cfg, source, trigger, non_trigger, bug_kind, bug_line, timeout, workdir):
    flags = cfg.compile_flags(source)
    src = os.path.join(workdir, "put.c")
    exe = os.path.join(workdir, cfg.name.replace(" ", "_").replace("/", "_").replace("=", "_"))
    command = [cfg.command, *flags, src, "-o", exe]
    rep = ConfigReport(cfg.name, command, sanitize=cfg.sanitize)
    if not cfg.available():
        rep.skipped = True
        return rep
    with open(src, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(source)
    try:
        proc = subprocess.run(command, capture_output=True, timeout=120)
    except (OSError, subprocess.TimeoutExpired) as exc:
        rep.compiler_output = f"compiler invocation failed: {exc}"
        return rep
    out = proc.stderr.decode("utf-8", "replace")
    rep.compiler_output = out
    rep.compile_ok = proc.returncode == 0
    rep.warning_count = len(re.findall(r"\bwarning:", out))
    if not rep.compile_ok:
        return rep
    rep.trigger = _run(exe, trigger, timeout, cfg.sanitize)
    if cfg.sanitize:
        _split_findings(rep.trigger, bug_kind, bug_line, True)
    if bug_kind == "oob" and not cfg.sanitize and rep.trigger.outcome != "abort":
        # A silent out-of-bounds write proves nothing either way.
        rep.trigger.outcome = "inconclusive"
    if non_trigger is not None:
        rep.non_trigger = _run(exe, non_trigger, timeout, cfg.sanitize)
        if cfg.sanitize:
            _split_findings(rep.non_trigger, bug_kind, bug_line, False)
    return rep


def verify_put(put=None, configs=None, *, source=None, trigger=None, non_trigger=None,
               bug_kind="assert", bug_line=None, index=None, timeout=DEFAULT_TIMEOUT):
    """Verify one PUT, given either a Put or its source and inputs."""
    if put is not None:
        source, trigger, non_trigger = put.source, put.trigger, put.non_trigger
        bug_kind, bug_line = put.bug_kind, put.bug_line
    configs = default_configs() if configs is None else configs
    reports = []
    with tempfile.TemporaryDirectory(prefix="putforge-") as workdir:
        for cfg in configs:
            reports.append(_check_config(cfg, source, trigger, non_trigger, bug_kind, bug_line,
                                         timeout, workdir))
    return _judge(index, reports, bug_kind, non_trigger is not None)


def _judge(index, reports, bug_kind, has_non_trigger):
    active = [r for r in reports if not r.skipped]
    if not active:
        return VerificationReport(index, "skipped", reports)
    problems = []
    for r in active:
        if not r.compile_ok:
            problems.append(f"{r.config}: compilation failed")
            continue
        if r.warning_count:
            problems.append(f"{r.config}: {r.warning_count} warning(s)")
        if r.trigger.outcome not in ("abort", "inconclusive"):
            problems.append(f"{r.config}: trigger outcome {r.trigger.outcome}, expected abort")
        if has_non_trigger and r.non_trigger.outcome != "cleanExit":
            problems.append(f"{r.config}: non-trigger outcome {r.non_trigger.outcome}, expected cleanExit")
        for run in (r.trigger, r.non_trigger):
            if run is not None and run.findings:
                problems.append(f"{r.config}: sanitizer findings {run.findings}")
        if r.sanitize and bug_kind == "oob" and r.trigger.outcome == "abort" and not r.trigger.expected_findings:
            problems.append(f"{r.config}: oob trigger aborted without a sanitizer report")

    compiled = [r for r in active if r.compile_ok and r.trigger is not None]
    for attr in ("trigger", "non_trigger"):
        classes = {getattr(r, attr).outcome for r in compiled if getattr(r, attr) is not None}
        classes.discard("inconclusive")
        if len(classes) > 1:
            problems.append(f"{attr} outcome differs across configs: {sorted(classes)}")

    if problems:
        return VerificationReport(index, "fail", reports, problems)
    aborted = any(r.trigger.outcome == "abort" for r in compiled)
    if not aborted:
        return VerificationReport(index, "inconclusive", reports,
                                  ["no configuration observed the bug crash"])
    return VerificationReport(index, "pass", reports)


@dataclass
class BatchSummary:
    manifest: str
    total: int
    passed: int
    failed: int
    inconclusive: int
    skipped: int
    reports: list

    @property
    def ok(self):
        return self.failed == 0

    def to_json(self):
        return {
            "manifest": self.manifest,
            "total": self.total,
            "passed": self.passed,
            "failed": self.failed,
            "inconclusive": self.inconclusive,
            "skipped": self.skipped,
            "ok": self.ok,
            "reports": [r.to_json() for r in self.reports],
        }


def _verify_record(record, batch_dir, configs, timeout):
    if not record.ok:
        return VerificationReport(record.index, "fail", [], [f"generation error: {record.error}"])
    path = os.path.join(batch_dir, record.source_path)
    try:
        with open(path, encoding="utf-8") as fh:
            source = fh.read()
    except OSError as exc:
        return VerificationReport(record.index, "fail", [], [f"cannot read source: {exc}"])
    report = verify_put(source=source, trigger=record.trigger, non_trigger=record.non_trigger,
                        bug_kind=record.bug_kind, bug_line=record.bug_line, index=record.index,
                        configs=configs, timeout=timeout)
    if mf.sha256(source) != record.source_sha256:
        report.problems.insert(0, "source hash does not match manifest")
        report.status = "fail"
    return report


def verify_batch(manifest_path, configs=None, jobs=1, timeout=DEFAULT_TIMEOUT):
    """Verify every record of a manifest; reports come back in index order."""
    manifest = mf.read(manifest_path)
    batch_dir = os.path.dirname(os.path.abspath(manifest_path))
    configs = default_configs() if configs is None else configs
    with ThreadPoolExecutor(max_workers=max(1, jobs)) as pool:
        reports = list(pool.map(lambda r: _verify_record(r, batch_dir, configs, timeout),
                                manifest.records))
    reports.sort(key=lambda r: r.index)
    count = lambda s: sum(r.status == s for r in reports)  # noqa: E731
    return BatchSummary(manifest_path, len(reports), count("pass"), count("fail"),
                        count("inconclusive"), count("skipped"), reports)


def write_summary(summary, path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(summary.to_json(), fh, indent=2)
        fh.write("\n")
