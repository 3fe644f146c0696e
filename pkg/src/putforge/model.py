"""Transformation catalogue and the value types every other module works on.

A PUT is described as a flat list of transformation applications.  Item
``k + 1`` fills the single ``NEXT`` hole of item ``k``; the last item carries
the ``FAIL`` hole.  Everything here is an immutable value.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import NamedTuple, Union

INT64_MIN = -(2**63)
INT64_MAX = 2**63 - 1
INT32_MIN = -(2**31)
INT32_MAX = 2**31 - 1

# Characters allowed for char literals: printable ASCII minus quote, backslash
# and space, so emission and shell quoting stay trivial.
CHAR_ALPHABET = "".join(
    chr(c) for c in range(0x21, 0x7F) if chr(c) not in ('"', "\\")
)


class Kind(str, enum.Enum):
    IC = "IC"
    SC = "SC"
    FL = "FL"
    PC = "PC"
    CC = "CC"

    def __str__(self):
        return self.value


class Slot(NamedTuple):
    name: str
    type: str  # "int-like" | "int" | "string" | "char"


class Signature(NamedTuple):
    params: tuple
    holes: tuple
    input_slot: Union[str, None]


SIGNATURES = {
    Kind.IC: Signature((Slot("v1", "int-like"), Slot("v2", "int-like")), ("T", "E"), "v1"),
    Kind.SC: Signature((Slot("s1", "string"), Slot("s2", "string")), ("T", "E"), "s1"),
    Kind.FL: Signature((Slot("e", "int-like"),), ("B",), None),
    Kind.PC: Signature((Slot("s", "string"), Slot("n", "int")), ("B",), "s"),
    Kind.CC: Signature((Slot("s", "string"), Slot("c", "char"), Slot("n", "int")), ("T", "E"), "s"),
}

BUG_KINDS = ("assert", "oob")


def arity(kind):
    """Return ``(param types, hole names)`` for a transformation kind."""
    sig = SIGNATURES[Kind(kind)]
    return tuple(s.type for s in sig.params), sig.holes


def input_slot_index(kind):
    """Position of the kind's command-line input parameter, or None (FL)."""
    sig = SIGNATURES[Kind(kind)]
    if sig.input_slot is None:
        return None
    return [s.name for s in sig.params].index(sig.input_slot)


# ---------------------------------------------------------------- parameters


@dataclass(frozen=True)
class Literal:
    value: Union[int, str]
    type: str  # "int" | "string" | "char"


@dataclass(frozen=True)
class ArgvString:
    index: int


@dataclass(frozen=True)
class ArgvInt:
    """``atoll(argv[index])``."""

    index: int


@dataclass(frozen=True)
class Fresh:
    """A parameter to be drawn at instantiation time from its slot's range."""


Param = Union[Literal, ArgvString, ArgvInt, Fresh]


# -------------------------------------------------------------- hole fillers


@dataclass(frozen=True)
class Snippet:
    text: str


@dataclass(frozen=True)
class Next:
    pass


@dataclass(frozen=True)
class Fail:
    bug_kind: str = "assert"


@dataclass(frozen=True)
class Skip:
    pass


@dataclass(frozen=True)
class Nested:
    """Explicitly nested transformation; only appears in the tree form."""

    item: "TransformationSpec"


HoleFiller = Union[Snippet, Next, Fail, Skip, Nested]


@dataclass(frozen=True)
class TransformationSpec:
    kind: Kind
    params: tuple
    holes: tuple

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        object.__setattr__(self, "params", tuple(self.params))
        object.__setattr__(self, "holes", tuple(self.holes))

    def hole_index(self, cls):
        for i, h in enumerate(self.holes):
            if isinstance(h, cls):
                return i
        return None


@dataclass(frozen=True)
class SequenceSpec:
    items: tuple

    def __post_init__(self):
        object.__setattr__(self, "items", tuple(self.items))

    def __len__(self):
        return len(self.items)

    def __iter__(self):
        return iter(self.items)


@dataclass(frozen=True)
class InstantiatedSequence:
    """A fully concrete sequence: no Fresh params, fresh-name suffix per item."""

    items: tuple
    suffixes: tuple
    argv_arity: int

    def __post_init__(self):
        object.__setattr__(self, "items", tuple(self.items))
        object.__setattr__(self, "suffixes", tuple(self.suffixes))

    def __len__(self):
        return len(self.items)

    @property
    def spec(self):
        return SequenceSpec(self.items)

    @property
    def bug_kind(self):
        fail = self.items[-1].holes[self.items[-1].hole_index(Fail)]
        return fail.bug_kind


@dataclass(frozen=True)
class Metrics:
    cyclomatic: int
    path_statements: int
    transformation_count: int


@dataclass
class Put:
    source: str
    bug_line: int
    trigger: list
    non_trigger: Union[list, None]
    metrics: Metrics
    seed: int
    spec: SequenceSpec
    sequence: InstantiatedSequence = field(repr=False, default=None)

    @property
    def bug_kind(self):
        return self.sequence.bug_kind


# ---------------------------------------------------------------- nesting


def nest(seq):
    """Turn a flat sequence into one explicitly nested transformation."""
    items = list(seq.items)
    inner = items[-1]
    for outer in reversed(items[:-1]):
        holes = tuple(Nested(inner) if isinstance(h, Next) else h for h in outer.holes)
        inner = TransformationSpec(outer.kind, outer.params, holes)
    return inner


def flatten(root):
    """Inverse of :func:`nest`; a SequenceSpec is returned unchanged."""
    if isinstance(root, SequenceSpec):
        return root
    items = []
    node = root
    while node is not None:
        nested = [h for h in node.holes if isinstance(h, Nested)]
        holes = tuple(Next() if isinstance(h, Nested) else h for h in node.holes)
        items.append(TransformationSpec(node.kind, node.params, holes))
        # More than one Nested hole is left for validate() to report.
        node = nested[0].item if nested else None
    return SequenceSpec(items)


# ------------------------------------------------------------- validation


@dataclass(frozen=True)
class Violation:
    item: Union[int, None]  # 1-based, None for sequence-level problems
    message: str

    def __str__(self):
        if self.item is None:
            return self.message
        return f"item {self.item}: {self.message}"


def _param_type_name(p):
    if isinstance(p, Literal):
        return p.type
    if isinstance(p, ArgvString):
        return "string"
    if isinstance(p, ArgvInt):
        return "int-like"
    if isinstance(p, Fresh):
        return "fresh"
    return type(p).__name__


def _check_param(slot, p):
    """Return an error message for ``p`` in ``slot`` or None."""
    got = _param_type_name(p)
    if isinstance(p, Fresh):
        return None
    if isinstance(p, (ArgvString, ArgvInt)):
        if not isinstance(p.index, int) or p.index < 1:
            return f"{slot.name}: argv index must be >= 1, got {p.index!r}"
        if slot.type == "string" and isinstance(p, ArgvString):
            return None
        if slot.type == "int-like" and isinstance(p, ArgvInt):
            return None
        return f"{slot.name} requires {slot.type}, got {got}"
    if isinstance(p, Literal):
        if slot.type in ("int-like", "int"):
            if p.type != "int" or not isinstance(p.value, int) or isinstance(p.value, bool):
                return f"{slot.name} requires {slot.type}, got {got}"
            lo, hi = (INT64_MIN, INT64_MAX) if slot.type == "int-like" else (INT32_MIN, INT32_MAX)
            if not lo <= p.value <= hi:
                return f"{slot.name}: literal {p.value} out of range [{lo}, {hi}]"
            return None
        if slot.type == "string":
            if p.type != "string" or not isinstance(p.value, str):
                return f"{slot.name} requires string, got {got}"
            if any(not (0x20 <= ord(ch) < 0x7F) for ch in p.value):
                return f"{slot.name}: string literal must be printable ASCII"
            return None
        if slot.type == "char":
            if p.type != "char" or not isinstance(p.value, str) or len(p.value) != 1:
                return f"{slot.name} requires char, got {got}"
            if p.value not in CHAR_ALPHABET:
                return f"{slot.name}: char {p.value!r} outside the printable set"
            return None
    return f"{slot.name}: not a parameter ({got})"


def _check_item(item):
    problems = []
    if not isinstance(item, TransformationSpec):
        return [f"not a transformation: {item!r}"]
    sig = SIGNATURES[item.kind]
    if len(item.params) != len(sig.params):
        problems.append(
            f"{item.kind} takes {len(sig.params)} parameters, got {len(item.params)}"
        )
    else:
        for slot, p in zip(sig.params, item.params):
            msg = _check_param(slot, p)
            if msg:
                problems.append(msg)
        if item.kind is Kind.PC:
            n = item.params[1]
            if isinstance(n, Literal) and isinstance(n.value, int) and n.value < 1:
                problems.append(f"n must be >= 1 for PC, got {n.value}")
        if item.kind is Kind.CC:
            n = item.params[2]
            if isinstance(n, Literal) and isinstance(n.value, int) and n.value < 0:
                problems.append(f"n must be >= 0 for CC, got {n.value}")
    if len(item.holes) != len(sig.holes):
        problems.append(f"{item.kind} takes {len(sig.holes)} holes, got {len(item.holes)}")
    for name, h in zip(sig.holes, item.holes):
        if not isinstance(h, (Snippet, Next, Fail, Skip, Nested)):
            problems.append(f"hole {name}: not a hole filler ({type(h).__name__})")
        elif isinstance(h, Fail) and h.bug_kind not in BUG_KINDS:
            problems.append(f"hole {name}: unknown bug kind {h.bug_kind!r}")
    return problems


def validate(seq):
    """Return every violation in ``seq``; an empty list means valid.

    Accepts a SequenceSpec or an explicitly nested TransformationSpec and
    never raises.
    """
    try:
        if isinstance(seq, TransformationSpec):
            nested_counts = []
            node = seq
            while node is not None:
                nested = [h for h in node.holes if isinstance(h, Nested)]
                nested_counts.append(len(nested))
                node = nested[0].item if nested else None
            seq = flatten(seq)
            out = [
                Violation(k + 1, "more than one NEXT hole")
                for k, c in enumerate(nested_counts)
                if c > 1
            ]
            return out + validate(seq)
        items = list(seq.items)
    except Exception as exc:  # validate is total
        return [Violation(None, f"malformed sequence: {exc}")]

    if not items:
        return [Violation(None, "empty sequence")]

    out = []
    fails = 0
    for k, item in enumerate(items, start=1):
        out.extend(Violation(k, m) for m in _check_item(item))
        if not isinstance(item, TransformationSpec):
            continue
        holes = list(item.holes)
        nexts = sum(isinstance(h, (Next, Nested)) for h in holes)
        item_fails = sum(isinstance(h, Fail) for h in holes)
        fails += item_fails
        last = k == len(items)
        if not last and nexts != 1:
            out.append(Violation(k, f"non-last item needs exactly one NEXT hole, has {nexts}"))
        if last and nexts:
            out.append(Violation(k, "last item cannot have a NEXT hole"))
        if item_fails and not last:
            out.append(Violation(k, "FAIL must be in the last item"))
        if last and item_fails != 1:
            out.append(Violation(k, f"last item needs exactly one FAIL hole, has {item_fails}"))
    if fails > 1:
        out.append(Violation(None, f"sequence has {fails} FAIL holes, expected exactly one"))
    return out


def is_valid(seq):
    return not validate(seq)
