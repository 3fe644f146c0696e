"""Hypothesis strategies for sequences."""

from hypothesis import strategies as st

from putforge.model import (
    CHAR_ALPHABET,
    SIGNATURES,
    ArgvInt,
    ArgvString,
    Fail,
    Fresh,
    Kind,
    Literal,
    Next,
    SequenceSpec,
    Skip,
    Snippet,
    TransformationSpec,
)

printable = st.text(st.characters(min_codepoint=0x20, max_codepoint=0x7E), max_size=6)
argv_index = st.integers(1, 5)


def param(slot_type):
    if slot_type == "int-like":
        return st.one_of(
            st.integers(-(2**63), 2**63 - 1).map(lambda v: Literal(v, "int")),
            argv_index.map(ArgvInt),
            st.just(Fresh()),
        )
    if slot_type == "int":
        return st.one_of(st.integers(1, 40).map(lambda v: Literal(v, "int")), st.just(Fresh()))
    if slot_type == "string":
        return st.one_of(
            printable.map(lambda v: Literal(v, "string")),
            argv_index.map(ArgvString),
            st.just(Fresh()),
        )
    return st.one_of(st.sampled_from(CHAR_ALPHABET).map(lambda c: Literal(c, "char")), st.just(Fresh()))


leaf = st.one_of(
    st.just(Skip()),
    st.sampled_from(["return 0;", "exit(0);", ";", "puts(\"x\");"]).map(Snippet),
)


@st.composite
def item(draw, kind, last):
    sig = SIGNATURES[kind]
    params = [draw(param(s.type)) for s in sig.params]
    holes = [draw(leaf) for _ in sig.holes]
    special = Fail(draw(st.sampled_from(["assert", "oob"]))) if last else Next()
    holes[draw(st.integers(0, len(holes) - 1))] = special
    return TransformationSpec(kind, params, holes)


@st.composite
def sequences(draw, max_len=5):
    kinds = draw(st.lists(st.sampled_from(list(Kind)), min_size=1, max_size=max_len))
    return SequenceSpec([draw(item(k, i == len(kinds) - 1)) for i, k in enumerate(kinds)])
