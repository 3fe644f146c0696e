"""Resolve fresh parameters, bind command-line inputs and draw random sequences."""

from __future__ import annotations

import hashlib
import json
import random
from dataclasses import dataclass, field

from .model import (
    CHAR_ALPHABET,
    SIGNATURES,
    ArgvInt,
    ArgvString,
    Fail,
    Fresh,
    InstantiatedSequence,
    Kind,
    Literal,
    Next,
    SequenceSpec,
    Skip,
    TransformationSpec,
    input_slot_index,
    validate,
)

RNG_ALGORITHM = "python-random-mt19937/randrange"

DEFAULT_RANGES = {
    "IC.v2": (0, 255),
    "SC.s2": (0, 255),
    "FL.e": (0, 255),
    "PC.n": (1, 20),
    "CC.n": (1, 20),
    "CC.c": (0x21, 0x7E),
}

POLICIES = ("distinct", "as-written")


class InstantiationError(ValueError):
    pass


@dataclass(frozen=True)
class Ranges:
    """Inclusive ``(min, max)`` per ``KIND.slot``; ``CC.c`` bounds are code points."""

    bounds: dict = field(default_factory=lambda: dict(DEFAULT_RANGES))

    def __post_init__(self):
        for tag, (lo, hi) in self.bounds.items():
            if lo > hi:
                raise ValueError(f"range {tag}: min {lo} > max {hi}")
        if "CC.c" in self.bounds and not self.chars():
            raise ValueError("range CC.c contains no allowed character")

    def get(self, tag):
        return self.bounds.get(tag)

    def chars(self):
        lo, hi = self.bounds["CC.c"]
        return [ch for ch in CHAR_ALPHABET if lo <= ord(ch) <= hi]

    def to_dict(self):
        return {tag: [lo, hi] for tag, (lo, hi) in sorted(self.bounds.items())}

    @classmethod
    def from_dict(cls, data):
        bounds = dict(DEFAULT_RANGES)
        for tag, pair in data.items():
            if tag not in DEFAULT_RANGES:
                raise ValueError(f"unknown range slot {tag!r}")
            lo, hi = pair
            bounds[tag] = (int(lo), int(hi))
        return cls(bounds)

    @classmethod
    def load(cls, path):
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def make_rng(seed):
    return random.Random(seed)


def child_seed(seed, index):
    """Derive an independent 64-bit seed for the ``index``-th PUT of a batch."""
    digest = hashlib.blake2b(f"{seed}:{index}".encode(), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def _draw(kind, slot, ranges, rng):
    tag = f"{kind}.{slot.name}"
    bounds = ranges.get(tag)
    if bounds is None:
        raise InstantiationError(f"fresh parameter in {tag} has no range")
    lo, hi = bounds
    if slot.type == "char":
        chars = ranges.chars()
        return Literal(chars[rng.randrange(len(chars))], "char")
    value = lo + rng.randrange(hi - lo + 1)
    if slot.type == "string":
        return Literal(str(value), "string")
    return Literal(value, "int")


def instantiate(seq, ranges=None, rng=None, policy="distinct"):
    """Produce a concrete sequence from ``seq``.

    Under ``distinct`` every input slot (IC.v1, SC.s1, PC.s, CC.s) is rebound
    to ``argv[1]``, ``argv[2]``, ... in item order; under ``as-written`` input
    slots keep their argv index or literal.
    """
    ranges = ranges or Ranges()
    rng = rng if rng is not None else make_rng(0)
    if isinstance(rng, int):
        rng = make_rng(rng)
    if policy not in POLICIES:
        raise InstantiationError(f"unknown argv policy {policy!r}")
    problems = validate(seq)
    if problems:
        raise InstantiationError("invalid sequence: " + "; ".join(map(str, problems)))

    items = []
    next_argv = 1
    for item in seq.items:
        sig = SIGNATURES[item.kind]
        in_idx = input_slot_index(item.kind)
        params = []
        for i, (slot, p) in enumerate(zip(sig.params, item.params)):
            if i == in_idx:
                if policy == "distinct":
                    p = ArgvInt(next_argv) if slot.type == "int-like" else ArgvString(next_argv)
                    next_argv += 1
                elif isinstance(p, Fresh):
                    raise InstantiationError(
                        f"{item.kind}.{slot.name}: as-written policy needs an argv binding or a literal"
                    )
            elif isinstance(p, Fresh):
                p = _draw(item.kind, slot, ranges, rng)
            params.append(p)
        items.append(TransformationSpec(item.kind, params, item.holes))

    arity = max(
        (p.index for it in items for p in it.params if isinstance(p, (ArgvInt, ArgvString))),
        default=0,
    )
    return InstantiatedSequence(items, range(1, len(items) + 1), arity)


def random_sequence(length, kinds=tuple(Kind), rng=None, bug_kind="assert"):
    """Draw ``length`` kinds uniformly; nest through T, SKIP in E, FAIL innermost."""
    if length < 1:
        raise ValueError("length must be >= 1")
    kinds = sorted({Kind(k) for k in kinds}, key=list(Kind).index)
    if not kinds:
        raise ValueError("kinds must be non-empty")
    rng = rng if rng is not None else make_rng(0)
    if isinstance(rng, int):
        rng = make_rng(rng)
    items = []
    for k in range(length):
        kind = kinds[rng.randrange(len(kinds))]
        items.append(skeleton(kind, last=k == length - 1, bug_kind=bug_kind))
    return SequenceSpec(items)


def skeleton(kind, last, bug_kind="assert"):
    """All-fresh application of ``kind`` nesting into its first hole."""
    sig = SIGNATURES[Kind(kind)]
    first = Fail(bug_kind) if last else Next()
    holes = [first] + [Skip()] * (len(sig.holes) - 1)
    return TransformationSpec(kind, [Fresh()] * len(sig.params), holes)
