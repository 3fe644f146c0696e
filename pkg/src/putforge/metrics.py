"""Static complexity measures for a PUT, computed from the sequence alone."""

from __future__ import annotations

from .model import ArgvInt, ArgvString, Kind, Metrics
from .oracle import Verdict, atoll, interpret

# Decision points per template: IC/SC one if, FL one for, PC guard + while +
# inner if, CC for + inner if + count if.
DECISIONS = {Kind.IC: 1, Kind.SC: 1, Kind.FL: 1, Kind.PC: 3, Kind.CC: 3}


def cyclomatic(seq):
    """Cyclomatic complexity of ``main``: base path + argc guard + decisions."""
    return 2 + sum(DECISIONS[item.kind] for item in seq.items)


def _string_arg(p, argv):
    if isinstance(p, ArgvString):
        return argv[p.index - 1].encode()
    return p.value.encode()


def _int_arg(p, argv):
    if isinstance(p, ArgvInt):
        return atoll(argv[p.index - 1])
    return p.value


def item_statements(item, argv):
    """Statements one item executes on its way into the hole the path takes."""
    kind = item.kind
    if kind in (Kind.IC, Kind.SC):
        return 1
    if kind is Kind.FL:
        e = max(0, _int_arg(item.params[0], argv))
        # init + final test, then test + call + increment per iteration
        return 2 + 3 * e
    if kind is Kind.PC:
        length = len(_string_arg(item.params[0], argv))
        # guard + declaration, four statements per iteration, final test
        return 2 + 4 * ((length + 1) // 2) + 1
    if kind is Kind.CC:
        s = _string_arg(item.params[0], argv)
        c = item.params[1].value.encode()
        # declaration, loop init, three per character, increments, final
        # loop test, count test
        return 2 + 3 * len(s) + s.count(c) + 1 + 1
    raise ValueError(f"unknown kind {kind!r}")


def path_statements(seq, argv):
    """Statements executed from entry to the bug when run on ``argv``.

    Counts the argc guard, every item's contribution along the trigger path
    (loop bodies multiplied by their iteration counts) and the bug statement.
    """
    if interpret(seq, argv) is not Verdict.FAIL_REACHED:
        raise ValueError("argv does not trigger the bug")
    return 1 + sum(item_statements(item, argv) for item in seq.items) + 1


def compute(seq, trigger):
    return Metrics(cyclomatic(seq), path_statements(seq, trigger), len(seq.items))

