import pytest
from hypothesis import given
from hypothesis import strategies as st

from putforge.dsl import parse, print_sequence
from putforge.instantiate import (
    DEFAULT_RANGES,
    InstantiationError,
    Ranges,
    child_seed,
    instantiate,
    make_rng,
    random_sequence,
)
from putforge.model import CHAR_ALPHABET, ArgvInt, ArgvString, Fail, Fresh, Kind, Literal, Next, Skip, validate

from conftest import EQ1
from strategies import sequences


def test_default_ranges():
    assert DEFAULT_RANGES["IC.v2"] == (0, 255)
    assert DEFAULT_RANGES["SC.s2"] == (0, 255)
    assert DEFAULT_RANGES["FL.e"] == (0, 255)
    assert DEFAULT_RANGES["PC.n"] == (1, 20)
    assert DEFAULT_RANGES["CC.n"] == (1, 20)


def test_distinct_binds_inputs_in_order():
    spec = parse("IC(?, ?, NEXT, SKIP) SC(?, ?, FAIL, SKIP)")
    seq = instantiate(spec, rng=make_rng(11), policy="distinct")
    assert seq.items[0].params[0] == ArgvInt(1)
    assert seq.items[1].params[0] == ArgvString(2)
    assert seq.argv_arity == 2


def test_distinct_renumbers_written_indices():
    seq = instantiate(parse(EQ1), policy="distinct")
    assert seq.items[0].params[0] == ArgvString(1)
    assert seq.items[1].params[0] == ArgvInt(2)


def test_as_written_keeps_indices():
    seq = instantiate(parse(EQ1), policy="as-written")
    assert seq.items[0].params[0] == ArgvString(2)
    assert seq.items[1].params[0] == ArgvInt(1)
    assert seq.argv_arity == 2
    assert seq.suffixes == (1, 2)


def test_fresh_ic_v2_in_range():
    spec = parse("IC(atoll(argv[1]), ?, FAIL, SKIP)")
    values = {instantiate(spec, rng=s).items[0].params[1].value for s in range(3000)}
    assert min(values) == 0 and max(values) == 255


def test_sc_s2_is_canonical_decimal():
    spec = parse("SC(argv[1], ?, FAIL, SKIP)")
    for s in range(300):
        v = instantiate(spec, rng=s).items[0].params[1]
        assert v.type == "string" and str(int(v.value)) == v.value and 0 <= int(v.value) <= 255


def test_cc_char_in_printable_set():
    spec = parse("CC(argv[1], ?, ?, FAIL, SKIP)")
    chars = {instantiate(spec, rng=s).items[0].params[1].value for s in range(2000)}
    assert chars <= set(CHAR_ALPHABET)
    assert " " not in chars and '"' not in chars and "\\" not in chars
    assert len(chars) > 80


def test_determinism():
    spec = parse("FL(?, NEXT) PC(?, ?, NEXT) CC(?, ?, ?, FAIL, SKIP)")
    assert instantiate(spec, rng=make_rng(99)) == instantiate(spec, rng=make_rng(99))


def test_fresh_without_range():
    ranges = Ranges({k: v for k, v in DEFAULT_RANGES.items() if k != "IC.v2"})
    with pytest.raises(InstantiationError, match="IC.v2"):
        instantiate(parse("IC(atoll(argv[1]), ?, FAIL, SKIP)"), ranges)
    with pytest.raises(InstantiationError, match="no range"):
        instantiate(parse("FL(?, FAIL)"), Ranges({"CC.c": (33, 126)}))


def test_as_written_input_slots():
    with pytest.raises(InstantiationError, match="argv binding"):
        instantiate(parse("IC(?, 5, FAIL, SKIP)"), policy="as-written")
    seq = instantiate(parse('SC("lit", "x", FAIL, SKIP)'), policy="as-written")
    assert seq.items[0].params[0] == Literal("lit", "string")
    assert seq.argv_arity == 0


def test_invalid_policy_and_sequence():
    with pytest.raises(InstantiationError):
        instantiate(parse("FL(1, FAIL)"), policy="shuffle")


def test_ranges_validation_and_io(tmp_path):
    with pytest.raises(ValueError):
        Ranges({"IC.v2": (5, 1)})
    with pytest.raises(ValueError):
        Ranges.from_dict({"XX.y": [0, 1]})
    p = tmp_path / "r.json"
    p.write_text('{"IC.v2": [3, 4]}')
    r = Ranges.load(p)
    assert r.get("IC.v2") == (3, 4) and r.get("FL.e") == (0, 255)
    assert Ranges.from_dict(r.to_dict()) == r


def test_random_sequence_examples():
    assert print_sequence(random_sequence(1, {Kind.FL}, make_rng(0))) == "FL(?, FAIL)"
    seq = random_sequence(3, {Kind.IC}, make_rng(0))
    assert print_sequence(seq) == "IC(?, ?, NEXT, SKIP) IC(?, ?, NEXT, SKIP) IC(?, ?, FAIL, SKIP)"
    with pytest.raises(ValueError):
        random_sequence(0, {Kind.IC}, make_rng(0))
    with pytest.raises(ValueError):
        random_sequence(2, set(), make_rng(0))


def test_random_sequence_uses_all_kinds():
    seq = random_sequence(500, set(Kind), make_rng(5))
    counts = {k: sum(i.kind is k for i in seq.items) for k in Kind}
    assert all(60 <= c <= 140 for c in counts.values()), counts


@given(st.integers(1, 30), st.integers(0, 2**64 - 1))
def test_random_sequence_shape(length, seed):
    seq = random_sequence(length, set(Kind), make_rng(seed))
    assert len(seq) == length and validate(seq) == []
    for k, item in enumerate(seq.items):
        last = k == length - 1
        assert item.holes[0] == (Fail() if last else Next())
        assert all(h == Skip() for h in item.holes[1:])
        assert all(p == Fresh() for p in item.params)


@given(st.integers(1, 12), st.integers(0, 2**64 - 1))
def test_distinct_argv_arity_and_ranges(length, seed):
    rng = make_rng(seed)
    seq = instantiate(random_sequence(length, set(Kind), rng), Ranges(), rng)
    assert seq.argv_arity == sum(i.kind is not Kind.FL for i in seq.items)
    for item in seq.items:
        assert not any(isinstance(p, Fresh) for p in item.params)
        lits = [p for p in item.params if isinstance(p, Literal)]
        for p in lits:
            if p.type == "int":
                tag = {Kind.IC: "IC.v2", Kind.FL: "FL.e", Kind.PC: "PC.n", Kind.CC: "CC.n"}[item.kind]
                lo, hi = DEFAULT_RANGES[tag]
                assert lo <= p.value <= hi
            elif p.type == "string":
                assert 0 <= int(p.value) <= 255
    assert validate(seq.spec) == []


@given(sequences(max_len=4), st.integers(0, 1000))
def test_instantiated_has_no_fresh(seq, seed):
    try:
        out = instantiate(seq, rng=make_rng(seed))
    except InstantiationError:
        return
    assert not any(isinstance(p, Fresh) for i in out.items for p in i.params)
    assert len(set(out.suffixes)) == len(out.items)


def test_child_seeds():
    seeds = {child_seed(7, i) for i in range(1000)}
    assert len(seeds) == 1000
    assert child_seed(7, 3) == child_seed(7, 3) != child_seed(8, 3)
    assert all(0 <= s < 2**64 for s in seeds)
