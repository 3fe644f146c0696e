"""Render an instantiated sequence as a complete C program."""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Optional

from .model import (
    INT64_MIN,
    ArgvInt,
    ArgvString,
    Fail,
    Kind,
    Literal,
    Next,
    Skip,
    Snippet,
)

INCLUDES = ("stdio.h", "stdlib.h", "string.h", "assert.h")
INDENT = "  "
# Deep sequences (B1000) would otherwise produce multi-megabyte files.
MAX_INDENT_LEVEL = 16


class EmitError(ValueError):
    pass


@dataclass(frozen=True)
class EmitOptions:
    bug_kind: Optional[str] = None  # overrides the FAIL hole's own bug kind


class Emitted(NamedTuple):
    source: str
    bug_line: int


def do_something_definition():
    """Loop body helper for FL; the volatile counter keeps loops alive at -O1."""
    return (
        "static volatile long long do_something_calls = 0;\n"
        "\n"
        "static void do_something(void) {\n"
        "  do_something_calls++;\n"
        "}\n"
    )


def fail_statement(bug_kind, suffix):
    if bug_kind == "assert":
        return "assert(0 == 1);"
    if bug_kind == "oob":
        a, i = f"a_{suffix}", f"i_{suffix}"
        return f"{{ volatile int {a}[3]; volatile int {i} = 4; {a}[{i}] = 0; (void){a}[0]; }}"
    raise EmitError(f"unknown bug kind {bug_kind!r}")


def c_string(s):
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def c_char(c):
    if c in ("'", "\\"):
        return "'\\" + c + "'"
    return f"'{c}'"


def c_value(p):
    if isinstance(p, ArgvInt):
        return f"atoll(argv[{p.index}])"
    if isinstance(p, ArgvString):
        return f"argv[{p.index}]"
    if not isinstance(p, Literal):
        raise EmitError(f"parameter not instantiated: {p!r}")
    if p.type == "string":
        return c_string(p.value)
    if p.type == "char":
        return c_char(p.value)
    if p.value == INT64_MIN:
        return "(-9223372036854775807LL - 1)"
    return str(p.value)


# A template is a list of (relative indent, text) lines and ("hole", i, indent)
# markers.


def _template(item, sfx):
    kind = item.kind
    v = [c_value(p) for p in item.params]
    if kind is Kind.IC:
        return [
            (0, f"if ({v[0]} == {v[1]}) {{"),
            ("hole", 0, 1),
            (0, "} else {"),
            ("hole", 1, 1),
            (0, "}"),
        ]
    if kind is Kind.SC:
        return [
            (0, f"if (strcmp({v[0]}, {v[1]}) == 0) {{"),
            ("hole", 0, 1),
            (0, "} else {"),
            ("hole", 1, 1),
            (0, "}"),
        ]
    if kind is Kind.FL:
        j = f"j_{sfx}"
        return [
            (0, f"for (long long {j} = 0; {j} < {v[0]}; {j}++) {{"),
            (1, "do_something();"),
            (0, "}"),
            (0, "{"),
            ("hole", 0, 1),
            (0, "}"),
        ]
    if kind is Kind.PC:
        s, n = v
        p_n = item.params[1]
        if isinstance(p_n, Literal) and p_n.value < 1:
            raise EmitError(f"PC requires n >= 1, got {p_n.value}")
        l, h = f"l_{sfx}", f"h_{sfx}"
        return [
            (0, f"if (strlen({s}) < {n}) exit(0);"),
            (0, f"long long {l} = 0, {h} = (long long)strlen({s}) - 1;"),
            (0, f"while ({h} >= {l}) {{ if ({s}[{h}] != {s}[{l}]) exit(0); {h}--; {l}++; }}"),
            (0, "{"),
            ("hole", 0, 1),
            (0, "}"),
        ]
    if kind is Kind.CC:
        s, c, n = v
        count, k = f"count_{sfx}", f"k_{sfx}"
        return [
            (0, f"int {count} = 0;"),
            (0, f"for (size_t {k} = 0; {k} < strlen({s}); {k}++) {{ if ({s}[{k}] == {c}) {count}++; }}"),
            (0, f"if ({count} == {n}) {{"),
            ("hole", 0, 1),
            (0, "} else {"),
            ("hole", 1, 1),
            (0, "}"),
        ]
    raise EmitError(f"unknown kind {kind!r}")


class _Writer:
    def __init__(self):
        self.lines = []
        self.bug_line = None

    def put(self, level, text):
        self.lines.append(INDENT * min(level, MAX_INDENT_LEVEL) + text)


def _leaf(w, hole, level, bug_kind, sfx):
    if isinstance(hole, Fail):
        w.put(level, fail_statement(bug_kind or hole.bug_kind, sfx))
        w.bug_line = len(w.lines)
    elif isinstance(hole, Skip):
        w.put(level, ";")
    elif isinstance(hole, Snippet):
        for text in hole.text.splitlines() or [""]:
            if text.strip():
                w.put(level, text.strip())
    else:
        raise EmitError(f"unexpected hole filler {hole!r}")


def emit(seq, opts=None):
    """Return the C source for ``seq`` and the 1-based line of its bug."""
    opts = opts or EmitOptions()
    w = _Writer()
    for inc in INCLUDES:
        w.put(0, f"#include <{inc}>")
    w.put(0, "")
    if any(item.kind is Kind.FL for item in seq.items):
        for line in do_something_definition().splitlines():
            w.put(0, line)
        w.put(0, "")
    w.put(0, "int main(int argc, char** argv) {")
    w.put(1, f"if (argc < {seq.argv_arity + 1}) return 0;")

    # Each item's tail (everything after its NEXT hole) waits on a stack.
    pending = []
    level = 1
    for item, sfx in zip(seq.items, seq.suffixes):
        parts = _template(item, sfx)
        for pos, part in enumerate(parts):
            if part[0] == "hole":
                hole = item.holes[part[1]]
                if isinstance(hole, Next):
                    pending.append((parts[pos + 1:], item, sfx, level))
                    level += part[2]
                    break
                _leaf(w, hole, level + part[2], opts.bug_kind, sfx)
            else:
                w.put(level + part[0], part[1])
    while pending:
        parts, item, sfx, level = pending.pop()
        for part in parts:
            if part[0] == "hole":
                _leaf(w, item.holes[part[1]], level + part[2], opts.bug_kind, sfx)
            else:
                w.put(level + part[0], part[1])

    w.put(1, "return 0;")
    w.put(0, "}")
    if w.bug_line is None:
        raise EmitError("sequence has no FAIL hole")
    return Emitted("\n".join(w.lines) + "\n", w.bug_line)


def brace_depth(source):
    """Maximum ``{``/``(`` nesting depth, ignoring string and char literals."""
    depth = best = 0
    quote = None
    i = 0
    while i < len(source):
        ch = source[i]
        if quote:
            if ch == "\\":
                i += 2
                continue
            if ch == quote:
                quote = None
        elif ch in "\"'":
            quote = ch
        elif ch in "{([":
            depth += 1
            best = max(best, depth)
        elif ch in "})]":
            depth -= 1
        i += 1
    return best
