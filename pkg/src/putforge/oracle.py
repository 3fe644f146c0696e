"""Reaching-input derivation and a reference interpreter for PUT semantics."""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from typing import NamedTuple, Optional

from .model import (
    INT64_MAX,
    INT64_MIN,
    ArgvInt,
    ArgvString,
    Fail,
    Kind,
    Literal,
    Next,
)


class Verdict(str, enum.Enum):
    FAIL_REACHED = "FailReached"
    CLEAN_EXIT = "CleanExit"
    INSUFFICIENT_ARGS = "InsufficientArgs"


class Conflict(ValueError):
    """No input reaches the requested hole under the atom algebra."""

    def __init__(self, message, items=()):
        self.items = tuple(items)
        super().__init__(message)


class BudgetExceeded(RuntimeError):
    pass


# ------------------------------------------------------------------- atoms


@dataclass(frozen=True)
class IntEquals:
    value: int


@dataclass(frozen=True)
class IntNotEquals:
    value: int


@dataclass(frozen=True)
class StrEquals:
    value: str


@dataclass(frozen=True)
class StrNotEquals:
    value: str


@dataclass(frozen=True)
class PalindromeMinLen:
    n: int


@dataclass(frozen=True)
class CharCountEquals:
    c: str
    n: int


@dataclass(frozen=True)
class CharCountNotEquals:
    c: str
    n: int


@dataclass(frozen=True)
class Unconstrained:
    pass


@dataclass(frozen=True)
class Always:
    """A predicate between literals that is constant; ``holds`` is its value."""

    holds: bool


class Constraint(NamedTuple):
    """One atom on one argv index (``index`` is None for literal-only atoms)."""

    index: Optional[int]
    atom: object
    item: int  # 1-based position of the transformation that imposed it


def atoll(s):
    """C ``atoll`` as implemented by glibc (``strtoll`` with clamping)."""
    i, n = 0, len(s)
    while i < n and s[i] in " \t\n\v\f\r":
        i += 1
    neg = False
    if i < n and s[i] in "+-":
        neg = s[i] == "-"
        i += 1
    start = i
    while i < n and "0" <= s[i] <= "9":
        i += 1
    if i == start:
        return 0
    value = int(s[start:i])
    value = -value if neg else value
    return max(INT64_MIN, min(INT64_MAX, value))


def _bytes(s):
    return s.encode("utf-8") if isinstance(s, str) else bytes(s)


def _is_palindrome(b):
    return b == b[::-1]


def holds(atom, s):
    """Evaluate ``atom`` on the argument string ``s``."""
    if isinstance(atom, IntEquals):
        return atoll(s) == atom.value
    if isinstance(atom, IntNotEquals):
        return atoll(s) != atom.value
    if isinstance(atom, StrEquals):
        return s == atom.value
    if isinstance(atom, StrNotEquals):
        return s != atom.value
    if isinstance(atom, PalindromeMinLen):
        b = _bytes(s)
        return len(b) >= atom.n and _is_palindrome(b)
    if isinstance(atom, CharCountEquals):
        return _bytes(s).count(atom.c.encode()) == atom.n
    if isinstance(atom, CharCountNotEquals):
        return _bytes(s).count(atom.c.encode()) != atom.n
    if isinstance(atom, Unconstrained):
        return True
    raise TypeError(f"not an atom: {atom!r}")


def positive_witness(atom):
    """Smallest constructive witness for a single atom."""
    if isinstance(atom, IntEquals):
        return str(atom.value)
    if isinstance(atom, StrEquals):
        return atom.value
    if isinstance(atom, PalindromeMinLen):
        return "a" * atom.n
    if isinstance(atom, CharCountEquals):
        return atom.c * atom.n
    if isinstance(atom, IntNotEquals):
        return "" if atom.value != 0 else "1"
    if isinstance(atom, StrNotEquals):
        return "" if atom.value != "" else "x"
    if isinstance(atom, CharCountNotEquals):
        return "" if atom.n != 0 else atom.c
    return ""


def negation_witness(atom):
    """A string violating ``atom``."""
    if isinstance(atom, IntEquals):
        return str(atom.value + 1)
    if isinstance(atom, IntNotEquals):
        return str(atom.value)
    if isinstance(atom, StrEquals):
        return atom.value + "x"
    if isinstance(atom, StrNotEquals):
        return atom.value
    if isinstance(atom, PalindromeMinLen):
        return "ab" + "b" * (atom.n - 1)
    if isinstance(atom, CharCountEquals):
        return "" if atom.n >= 1 else atom.c
    if isinstance(atom, CharCountNotEquals):
        return atom.c * atom.n
    raise Conflict(f"{atom!r} cannot be violated")


# ------------------------------------------------------ per-hole constraints


def _int_operand(p):
    if isinstance(p, ArgvInt):
        return p.index, None
    return None, p.value


def _str_operand(p):
    if isinstance(p, ArgvString):
        return p.index, None
    return None, p.value


def constraints_for(item, hole, position=1):
    """Constraints that send execution of ``item`` into hole ``hole``.

    ``hole`` is a hole index or name (T, E, B).
    """
    if isinstance(hole, str):
        from .model import SIGNATURES

        hole = SIGNATURES[item.kind].holes.index(hole)
    kind = item.kind
    then = hole == 0
    if kind is Kind.FL:
        return [Constraint(None, Unconstrained(), position)]
    if kind in (Kind.IC, Kind.SC):
        operand = _int_operand if kind is Kind.IC else _str_operand
        eq, ne = (IntEquals, IntNotEquals) if kind is Kind.IC else (StrEquals, StrNotEquals)
        (ia, va), (ib, vb) = operand(item.params[0]), operand(item.params[1])
        if ia is not None and ib is not None:
            if ia == ib:
                return [Constraint(None, Always(then), position)]
            raise Conflict(
                f"item {position}: comparison between argv[{ia}] and argv[{ib}] is not supported",
                (position,),
            )
        if ia is None and ib is None:
            return [Constraint(None, Always((va == vb) == then), position)]
        idx, value = (ia, vb) if ia is not None else (ib, va)
        return [Constraint(idx, (eq if then else ne)(value), position)]
    s = item.params[0]
    idx, lit = _str_operand(s)
    if kind is Kind.PC:
        atom = PalindromeMinLen(item.params[1].value)
    else:
        c, n = item.params[1].value, item.params[2].value
        atom = CharCountEquals(c, n) if then else CharCountNotEquals(c, n)
    if idx is None:
        return [Constraint(None, Always(holds(atom, lit)), position)]
    return [Constraint(idx, atom, position)]


def trigger_path(seq):
    """Hole index entered by each item on the way to the FAIL hole."""
    path = []
    for item in seq.items:
        k = item.hole_index(Next)
        path.append(k if k is not None else item.hole_index(Fail))
    return path


def path_constraints(seq, holes=None):
    holes = trigger_path(seq) if holes is None else holes
    out = []
    for pos, (item, hole) in enumerate(zip(seq.items, holes), start=1):
        out.extend(constraints_for(item, hole, pos))
    return out


def _solve_index(atoms):
    """Witness for a conjunction of atoms on one index, or raise Conflict."""
    atoms = [c for c in atoms if not isinstance(c.atom, Unconstrained)]
    if not atoms:
        return ""
    candidates = []
    for c in atoms:
        candidates.append((positive_witness(c.atom), c))
    cc = [c.atom for c in atoms if isinstance(c.atom, CharCountEquals)]
    pc = [c.atom for c in atoms if isinstance(c.atom, PalindromeMinLen)]
    if cc and pc:
        n = max([a.n for a in cc] + [a.n for a in pc])
        candidates.append((cc[0].c * n, atoms[0]))
    candidates.append(("", atoms[0]))
    for c in atoms:
        try:
            candidates.append((negation_witness(c.atom), c))
        except Conflict:
            pass
    for value, _ in candidates:
        if all(holds(c.atom, value) for c in atoms):
            return value
    # Report the first pair that cannot be met together.
    for a, b in itertools.combinations(atoms, 2):
        pair_ok = any(
            holds(a.atom, w) and holds(b.atom, w) for w, _ in candidates
        )
        if not pair_ok:
            raise Conflict(
                f"argv[{a.index}]: {a.atom} (item {a.item}) conflicts with {b.atom} (item {b.item})",
                (a.item, b.item),
            )
    first = atoms[0]
    raise Conflict(
        f"argv[{first.index}]: constraints {[c.atom for c in atoms]} are not jointly satisfiable",
        tuple(c.item for c in atoms),
    )


def solve(constraints, arity):
    """Build an argv vector of length ``arity`` meeting every constraint."""
    for c in constraints:
        if isinstance(c.atom, Always) and not c.atom.holds:
            raise Conflict(f"item {c.item}: condition between literals is never met", (c.item,))
    argv = []
    for idx in range(1, arity + 1):
        argv.append(_solve_index([c for c in constraints if c.index == idx]))
    return argv


class Inputs(NamedTuple):
    trigger: list
    non_trigger: Optional[list]


def derive_inputs(seq):
    """Triggering input plus, when one exists, a non-triggering input.

    The non-trigger flips the outermost constrained atom on the trigger path
    and leaves every other argument empty.  A sequence whose bug is reached
    by every input (only FL or tautologies on the path) has no non-trigger.
    """
    constraints = path_constraints(seq)
    trigger = solve(constraints, seq.argv_arity)
    if interpret(seq, trigger) is not Verdict.FAIL_REACHED:
        raise Conflict("derived trigger does not reach the bug")

    non_trigger = None
    for c in constraints:
        if c.index is None:
            continue
        try:
            flipped = negation_witness(c.atom)
        except Conflict:
            continue
        candidate = [""] * seq.argv_arity
        candidate[c.index - 1] = flipped
        if interpret(seq, candidate) is Verdict.CLEAN_EXIT:
            non_trigger = candidate
            break
    return Inputs(trigger, non_trigger)


def leaf_holes(seq):
    """Every (item position, hole index) that holds a leaf, in source order."""
    out = []
    for pos, item in enumerate(seq.items, start=1):
        for h, hole in enumerate(item.holes):
            if not isinstance(hole, Next):
                out.append((pos, h))
    return out


def leaf_inputs(seq):
    """Reaching input for every leaf hole, keyed by (item position, hole index).

    Leaves that cannot be reached map to the Conflict raised for them.
    """
    path = trigger_path(seq)
    out = {}
    for pos, h in leaf_holes(seq):
        holes = path[: pos - 1] + [h]
        try:
            out[(pos, h)] = solve(path_constraints(seq, holes), seq.argv_arity)
        except Conflict as exc:
            out[(pos, h)] = exc
    return out


# ------------------------------------------------------------- interpreter


def _param_value(p, argv, as_int):
    if isinstance(p, ArgvInt):
        return atoll(argv[p.index - 1])
    if isinstance(p, ArgvString):
        s = argv[p.index - 1]
        return atoll(s) if as_int else _bytes(s)
    if isinstance(p, Literal):
        if p.type in ("string", "char"):
            return _bytes(p.value)
        return p.value
    raise ValueError(f"parameter not instantiated: {p!r}")


def _enter(item, argv):
    """Hole index the item sends control into, or None when it exits."""
    kind = item.kind
    if kind is Kind.IC:
        a = _param_value(item.params[0], argv, True)
        b = _param_value(item.params[1], argv, True)
        return 0 if a == b else 1
    if kind is Kind.SC:
        a = _param_value(item.params[0], argv, False)
        b = _param_value(item.params[1], argv, False)
        return 0 if a == b else 1
    if kind is Kind.FL:
        return 0
    if kind is Kind.PC:
        s = _param_value(item.params[0], argv, False)
        n = _param_value(item.params[1], argv, True)
        if len(s) < n:
            return None
        h, l = len(s) - 1, 0
        while h >= l:
            if s[h] != s[l]:
                return None
            h -= 1
            l += 1
        return 0
    if kind is Kind.CC:
        s = _param_value(item.params[0], argv, False)
        c = _param_value(item.params[1], argv, False)
        n = _param_value(item.params[2], argv, True)
        count = 0
        for k in range(len(s)):
            if s[k:k + 1] == c:
                count += 1
        return 0 if count == n else 1
    raise ValueError(f"unknown kind {kind!r}")


def interpret(seq, argv):
    """Execute the PUT's semantics on ``argv`` (program name excluded).

    FL loop bodies have no effect on control flow and are skipped.
    """
    argv = list(argv)
    if len(argv) < seq.argv_arity:
        return Verdict.INSUFFICIENT_ARGS
    for item in seq.items:
        hole = _enter(item, argv)
        if hole is None:
            return Verdict.CLEAN_EXIT
        filler = item.holes[hole]
        if isinstance(filler, Fail):
            return Verdict.FAIL_REACHED
        if not isinstance(filler, Next):
            # SKIP or a snippet: nothing after it can reach the bug.
            return Verdict.CLEAN_EXIT
    return Verdict.CLEAN_EXIT


# ------------------------------------------------------------- brute force


@dataclass
class BruteForceResult:
    confirmed: bool
    vectors: int
    failing: set
    characterized: set
    counterexample: Optional[tuple] = None


def slot_domain(seq, index, alphabet, max_len):
    """Candidate strings for one argv slot.

    All strings over ``alphabet`` up to ``max_len``, plus the witnesses and
    counter-witnesses of constants on that slot, plus a window of integers
    around integer constants.
    """
    values = set()
    for n in range(max_len + 1):
        for tup in itertools.product(alphabet, repeat=n):
            values.add("".join(tup))
    for item in seq.items:
        for p in item.params:
            if getattr(p, "index", None) != index:
                continue
            for other in item.params:
                if not isinstance(other, Literal):
                    continue
                if other.type == "int":
                    for d in range(-2, 3):
                        values.add(str(other.value + d))
                elif other.type == "string":
                    values.update({other.value, other.value + "x", other.value[:-1]})
                elif other.type == "char":
                    n = item.params[2].value if item.kind is Kind.CC else 1
                    values.update(other.value * k for k in range(n + 2))
    return sorted(values)


def brute_force_check(seq, alphabet=("a", "b"), max_len=2, budget=2_000_000, inputs=None):
    """Enumerate argv vectors and compare interpretation with the constraints.

    Confirms that the derived trigger reaches the bug and that the set of
    failing vectors equals the set satisfying every trigger-path constraint.
    """
    if len(alphabet) > 4 or max_len > 4 or seq.argv_arity > 3:
        raise BudgetExceeded("instance too large for brute force")
    domains = [slot_domain(seq, i, alphabet, max_len) for i in range(1, seq.argv_arity + 1)]
    total = 1
    for d in domains:
        total *= len(d)
    if total > budget:
        raise BudgetExceeded(f"{total} vectors exceed budget {budget}")

    constraints = path_constraints(seq)
    literal_ok = all(c.atom.holds for c in constraints if isinstance(c.atom, Always))
    indexed = [c for c in constraints if c.index is not None]

    failing, characterized = set(), set()
    for vec in itertools.product(*domains):
        if interpret(seq, vec) is Verdict.FAIL_REACHED:
            failing.add(vec)
        if literal_ok and all(holds(c.atom, vec[c.index - 1]) for c in indexed):
            characterized.add(vec)

    inputs = inputs or derive_inputs(seq)
    counter = None
    if interpret(seq, inputs.trigger) is not Verdict.FAIL_REACHED:
        counter = tuple(inputs.trigger)
    elif failing != characterized:
        counter = next(iter(sorted(failing ^ characterized)))
    return BruteForceResult(counter is None, total, failing, characterized, counter)
