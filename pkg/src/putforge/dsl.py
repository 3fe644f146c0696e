"""Text notation for transformation sequences.

    sequence    := application+
    application := KIND '(' arg (',' arg)* ')'
    arg         := INT | CHAR | STRING | 'argv[' INT ']' | 'atoll(argv[' INT '])'
                 | '?' | 'NEXT' | 'FAIL' | 'FAIL_OOB' | 'SKIP' | '{' raw-C '}'
                 | application            (explicit nesting, same as NEXT)

Arguments are positional: parameters first, then holes in signature order
(T, E for two-hole kinds, B for the rest).
"""

from __future__ import annotations

import re

from .model import (
    SIGNATURES,
    ArgvInt,
    ArgvString,
    Fail,
    Fresh,
    Kind,
    Literal,
    Nested,
    Next,
    SequenceSpec,
    Skip,
    Snippet,
    TransformationSpec,
    flatten,
    validate,
)

__all__ = ["DslError", "format_item", "parse", "parse_file", "parse_lines", "print_sequence", "strip_comment"]


class DslError(ValueError):
    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = f"{line}:{column}: " if line is not None else ""
        super().__init__(where + message)


_KINDS = {k.value for k in Kind}


class _Parser:
    def __init__(self, text):
        self.text = text
        self.pos = 0

    def where(self, pos=None):
        pos = self.pos if pos is None else pos
        line = self.text.count("\n", 0, pos) + 1
        col = pos - (self.text.rfind("\n", 0, pos) + 1) + 1
        return line, col

    def error(self, msg, pos=None):
        return DslError(msg, *self.where(pos))

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self):
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def expect(self, ch):
        if self.peek() != ch:
            got = repr(self.text[self.pos]) if self.pos < len(self.text) else "end of input"
            raise self.error(f"expected {ch!r}, got {got}")
        self.pos += 1

    def match(self, pattern):
        self.skip_ws()
        m = re.compile(pattern).match(self.text, self.pos)
        if m:
            self.pos = m.end()
        return m

    def sequence(self):
        items = []
        while self.peek():
            items.append(self.application())
        if not items:
            raise self.error("empty input: expected at least one transformation")
        return items

    def application(self):
        start = self.pos
        m = self.match(r"[A-Za-z_][A-Za-z_0-9]*")
        if not m:
            raise self.error("expected a transformation kind")
        name = m.group(0)
        if name not in _KINDS:
            raise self.error(f"unknown transformation kind {name!r}", start)
        self.expect("(")
        args = [self.arg()]
        while self.peek() == ",":
            self.pos += 1
            args.append(self.arg())
        self.expect(")")
        return self.build(Kind(name), args, start)

    def build(self, kind, args, start):
        sig = SIGNATURES[kind]
        want = len(sig.params) + len(sig.holes)
        if len(args) != want:
            raise self.error(f"{kind} takes {want} arguments, got {len(args)}", start)
        params, holes = args[: len(sig.params)], args[len(sig.params):]
        for slot, (p, pos) in zip(sig.params, params):
            if not isinstance(p, (Literal, ArgvString, ArgvInt, Fresh)):
                raise self.error(f"{kind}.{slot.name}: expected a parameter", pos)
        for name, (h, pos) in zip(sig.holes, holes):
            if isinstance(h, TransformationSpec):
                h = Nested(h)
            if not isinstance(h, (Snippet, Next, Fail, Skip, Nested)):
                raise self.error(f"{kind}.{name}: expected a hole filler", pos)
        return TransformationSpec(
            kind,
            [p for p, _ in params],
            [Nested(h) if isinstance(h, TransformationSpec) else h for h, _ in holes],
        )

    def arg(self):
        self.skip_ws()
        pos = self.pos
        ch = self.peek()
        if ch == "{":
            return Snippet(self.raw_block()), pos
        if ch == '"':
            return Literal(self.string(), "string"), pos
        if ch == "'":
            m = self.match(r"'([^\n])'")
            if not m:
                raise self.error("malformed char literal")
            return Literal(m.group(1), "char"), pos
        if ch == "?":
            self.pos += 1
            return Fresh(), pos
        m = self.match(r"-?[0-9]+")
        if m:
            return Literal(int(m.group(0)), "int"), pos
        m = self.match(r"atoll\s*\(\s*argv\s*\[\s*([0-9]+)\s*\]\s*\)")
        if m:
            return ArgvInt(int(m.group(1))), pos
        m = self.match(r"argv\s*\[\s*([0-9]+)\s*\]")
        if m:
            return ArgvString(int(m.group(1))), pos
        m = self.match(r"[A-Za-z_][A-Za-z_0-9]*")
        if m:
            word = m.group(0)
            if word in _KINDS:
                self.pos = pos
                return self.application(), pos
            if word == "NEXT":
                return Next(), pos
            if word == "FAIL":
                return Fail("assert"), pos
            if word == "FAIL_OOB":
                return Fail("oob"), pos
            if word == "SKIP":
                return Skip(), pos
            raise self.error(f"unknown word {word!r}", pos)
        if not ch:
            raise self.error("unexpected end of input")
        raise self.error(f"unexpected character {ch!r}")

    def string(self):
        start = self.pos
        self.pos += 1
        out = []
        while True:
            if self.pos >= len(self.text) or self.text[self.pos] == "\n":
                raise self.error("unterminated string literal", start)
            ch = self.text[self.pos]
            if ch == "\\":
                nxt = self.text[self.pos + 1: self.pos + 2]
                if nxt not in ('"', "\\"):
                    raise self.error(f"unsupported escape \\{nxt}", self.pos)
                out.append(nxt)
                self.pos += 2
                continue
            self.pos += 1
            if ch == '"':
                return "".join(out)
            out.append(ch)

    def raw_block(self):
        start = self.pos
        depth = 0
        i = self.pos
        while i < len(self.text):
            ch = self.text[i]
            if ch == "{":
                depth += 1
            elif ch == "}":
                depth -= 1
                if depth == 0:
                    self.pos = i + 1
                    return self.text[start + 1: i].strip()
            i += 1
        raise self.error("unbalanced '{' in code snippet", start)


def parse(text):
    """Parse one sequence; raise DslError on syntax or validation failure."""
    p = _Parser(text)
    items = p.sequence()
    # Explicitly nested applications are written as one item.
    flat = []
    for item in items:
        flat.extend(flatten(item).items)
    seq = SequenceSpec(flat)
    problems = validate(seq)
    if problems:
        raise DslError("invalid sequence: " + "; ".join(str(v) for v in problems))
    return seq


def parse_lines(text):
    """Parse a spec file body: one sequence per line, ``#`` comments.

    Returns a list of ``(line_number, SequenceSpec)``.
    """
    out = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = strip_comment(raw).strip()
        if not line:
            continue
        try:
            out.append((lineno, parse(line)))
        except DslError as exc:
            if exc.line is not None:
                raise DslError(str(exc).split(": ", 1)[1], lineno, exc.column) from None
            raise DslError(str(exc), lineno) from None
    return out


def parse_file(path):
    with open(path, encoding="utf-8") as fh:
        return parse_lines(fh.read())


def strip_comment(line):
    # '#' inside a string, char literal or raw-C block does not start a comment.
    depth = 0
    quote = None
    i = 0
    while i < len(line):
        ch = line[i]
        if quote:
            if ch == "\\" and quote == '"':
                i += 2
                continue
            if ch == quote:
                quote = None
        elif ch == '"':
            quote = ch
        elif ch == "'" and i + 2 < len(line) and line[i + 2] == "'":
            i += 3
            continue
        elif ch == "{":
            depth += 1
        elif ch == "}":
            depth -= 1
        elif ch == "#" and depth == 0:
            return line[:i]
        i += 1
    return line


# ---------------------------------------------------------------- printing


def _format_param(p):
    if isinstance(p, Fresh):
        return "?"
    if isinstance(p, ArgvString):
        return f"argv[{p.index}]"
    if isinstance(p, ArgvInt):
        return f"atoll(argv[{p.index}])"
    if p.type == "string":
        return '"' + p.value.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if p.type == "char":
        return f"'{p.value}'"
    return str(p.value)


def _format_hole(h):
    if isinstance(h, Next):
        return "NEXT"
    if isinstance(h, Skip):
        return "SKIP"
    if isinstance(h, Fail):
        return "FAIL" if h.bug_kind == "assert" else "FAIL_OOB"
    if isinstance(h, Nested):
        return format_item(h.item)
    return "{ " + h.text + " }" if h.text else "{ }"


def format_item(item):
    args = [_format_param(p) for p in item.params] + [_format_hole(h) for h in item.holes]
    return f"{item.kind}({', '.join(args)})"


def print_sequence(seq):
    """Canonical single-line text; ``parse(print_sequence(s)) == s``."""
    seq = flatten(seq)
    problems = validate(seq)
    if problems:
        raise DslError("cannot print invalid sequence: " + "; ".join(map(str, problems)))
    return " ".join(format_item(item) for item in seq.items)
