import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from strategies import SIG, formulas, relations

from qnpsynth.errors import FormulaError, ParseError
from qnpsynth.fol import (
    Batch,
    Structure,
    enumerate_batches,
    evaluate,
    evaluate_batch,
    parse_formula,
    semantically_equivalent,
    simplify,
    structure_count,
    to_infix,
    to_sexpr,
)
from qnpsynth.fol.batch import enumerate_packed, structure_at
from qnpsynth.fol.structure import closure, extension
from qnpsynth.fol.syntax import PLUS, STAR, free_vars, rename_apart, substitute
from qnpsynth.sexpr import dumps, loads, loads_all


def blocks_sig():
    from qnpsynth import corpus

    return corpus.domain("blocks").signature


def _structure(n, rel):
    ps, rs = rel
    objs = ("A",) + tuple("abcdefg"[: n - 1])
    interp = {"p": {(objs[i],) for i in ps}, "r": {(objs[i], objs[j]) for i, j in rs}}
    return Structure(objs, interp, {"A": "A"}, {"p": 1, "r": 2})


# -- s-expressions and parsing --------------------------------------------------------


def test_sexpr_round_trip():
    text = "(a (b c) ; comment\n d)"
    x = loads(text)
    assert dumps(x) == "(a (b c) d)"
    assert len(loads_all("(a) (b) c")) == 3


@pytest.mark.parametrize(
    "text, where",
    [("(a (b c)", (1, 1)), ("(a))", (1, 4)), ("\n  )", (2, 3))],
)
def test_sexpr_errors_carry_positions(text, where):
    with pytest.raises(ParseError) as e:
        loads_all(text)
    assert (e.value.line, e.value.col) == where


@pytest.mark.parametrize(
    "text, infix",
    [
        ("(on+ x A)", "on+(x,A)"),
        ("(exists (y) (and (on x y) (on* y A)))", "Ey[on(x,y) & on*(y,A)]"),
        ("(!= x y)", "x!=y"),
        ("(implies (clear x) (not (on x A)))", "clear(x) => ~on(x,A)"),
    ],
)
def test_parse_and_print(text, infix):
    f = parse_formula(text, blocks_sig())
    assert to_infix(f) == infix
    assert parse_formula(to_sexpr(f), blocks_sig()) == f


@pytest.mark.parametrize(
    "text",
    ["(on x)", "(foo x)", "(clear* x y)", "(exists x (on x x))", "(and"],
)
def test_parse_rejects(text):
    with pytest.raises((ParseError, FormulaError)):
        parse_formula(text, blocks_sig())


def test_constants_resolve_through_signature():
    f = parse_formula("(on x A)", blocks_sig())
    assert free_vars(f) == {"x"}


@given(formulas())
def test_print_parse_preserves_meaning(f):
    g = parse_formula(to_sexpr(f), SIG)
    assert semantically_equivalent(f, g, SIG, 2)


# -- evaluation ---------------------------------------------------------------------


@settings(max_examples=80)
@given(formulas(), st.integers(1, 3).flatmap(lambda n: st.tuples(st.just(n), relations(n))))
def test_batch_matches_recursive_evaluator(f, data):
    n, rel = data
    s = _structure(n, rel)
    free = tuple(sorted(free_vars(f)))
    batch = Batch.from_structures([s], s.arities)
    got = evaluate_batch(f, batch, free)[0]
    for pos in itertools.product(range(n), repeat=len(free)):
        b = {v: s.universe[i] for v, i in zip(free, pos)}
        assert bool(got[pos]) == evaluate(f, s, b)


@settings(max_examples=40)
@given(formulas(), st.integers(1, 2))
def test_packed_matches_boolean_enumeration(f, n):
    free = tuple(sorted(free_vars(f)))
    bools = np.concatenate([evaluate_batch(f, b, free) for _, b in enumerate_batches(SIG, n)])
    words = []
    for _, b, valid in enumerate_packed(SIG, n):
        w = evaluate_batch(f, b, free)
        words.append(w & valid)
    words = np.concatenate(words)
    for i in range(len(bools)):
        bit = (words[i // 64] >> np.uint64(i % 64)) & np.uint64(1)
        assert np.array_equal(bit.astype(bool), bools[i])


@given(st.integers(1, 4).flatmap(lambda n: st.tuples(st.just(n), relations(n))))
def test_star_is_plus_plus_identity(data):
    n, rel = data
    s = _structure(n, rel)
    star, plus = closure(s, "r", STAR), closure(s, "r", PLUS)
    assert star == plus | {(o, o) for o in s.universe}
    # plus is closed under composition and contains r
    assert s.relation("r") <= plus
    assert all((a, d) in plus for a, b in plus for c, d in plus if b == c)


@pytest.mark.parametrize("n, expected", [(1, 2**2), (2, 2**6), (3, 2**12)])
def test_structure_counts(n, expected):
    assert structure_count(SIG, n) == expected
    assert sum(b.size for _, b in enumerate_batches(SIG, n)) == expected


def test_enumeration_is_injective_and_indexed():
    seen = set()
    for lo, b in enumerate_batches(SIG, 2):
        for i in range(b.size):
            atoms = tuple(b.structure(i).atoms())
            assert atoms not in seen
            seen.add(atoms)
            assert tuple(structure_at(SIG, 2, ["p", "r"], lo + i).atoms()) == atoms
    assert len(seen) == 64


def test_extension_of_clear_concept():
    sig = blocks_sig()
    s = Structure.from_atoms(("A", "B"), [("on", "B", "A"), ("clear", "B")], sig)
    f = parse_formula("(exists (y) (and (on x y) (on* y A)))", sig)
    assert extension(f, ("x",), s) == {("B",)}


# -- simplification -----------------------------------------------------------------


@settings(max_examples=80)
@given(formulas())
def test_simplify_preserves_equivalence(f):
    g = simplify(f)
    assert free_vars(g) <= free_vars(f)
    assert semantically_equivalent(f, g, SIG, 3)


@pytest.mark.parametrize(
    "text, expected",
    [
        ("(and (p x) (not (p x)))", "F"),
        ("(or (p x) true)", "T"),
        ("(exists (y) (and (= y x) (p y)))", "p(x)"),
        ("(forall (y) (implies (= y A) (r x y)))", "r(x,A)"),
        ("(not (not (p x)))", "p(x)"),
    ],
)
def test_simplify_examples(text, expected):
    assert to_infix(simplify(parse_formula(text, SIG))) == expected


@given(formulas())
def test_rename_apart_preserves_meaning(f):
    g = rename_apart(f, {"x", "y", "z"})
    assert free_vars(g) == free_vars(f)
    assert semantically_equivalent(f, g, SIG, 2)


def test_substitute_avoids_capture():
    f = parse_formula("(exists (y) (r x y))", SIG)
    g = substitute(f, {"x": parse_formula("(p y)", SIG).args[0]})
    assert free_vars(g) == {"y"}
    assert "r(y,y)" not in to_infix(g)


# -- bounded equivalence --------------------------------------------------------------


@pytest.mark.parametrize(
    "a, b, same",
    [
        ("(on+ x A)", "(exists (y) (and (on x y) (on* y A)))", True),
        ("(on* x y)", "(or (= x y) (on+ x y))", True),
        ("(on x y)", "(on y x)", False),
        ("(clear x)", "(not (not (clear x)))", True),
    ],
)
def test_equivalence_examples(a, b, same):
    sig = blocks_sig()
    v = semantically_equivalent(parse_formula(a, sig), parse_formula(b, sig), sig, 3)
    assert bool(v) == same
    if not same:
        assert v.counterexample is not None and v.values[0] != v.values[1]


def test_counterexample_is_first_in_order():
    sig = blocks_sig()
    v = semantically_equivalent(parse_formula("(on x y)", sig), parse_formula("(on y x)", sig), sig, 3)
    assert len(v.counterexample.universe) == 2
    assert v.counterexample.atoms() == [("on", "A", "a")]
    assert v.binding == {"x": "A", "y": "a"}


def test_bound_below_constant_count_rejected():
    sig = SIG
    with pytest.raises(ValueError):
        semantically_equivalent(parse_formula("(p A)", sig), parse_formula("(p A)", sig), sig, 0)
