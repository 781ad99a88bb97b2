import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from strategies import formulas

from qnpsynth import corpus
from qnpsynth.abstraction import AbstractAction, Abstraction, Feature
from qnpsynth.base import (
    IN_POST,
    NEG_IN_POST,
    NEG_NOT_IN_POST,
    N,
    S,
    BracketExpr,
    GeneralBase,
    TrivialBase,
    base_star,
    bracket,
    eliminate_plus,
    make_base,
)
from qnpsynth.errors import InputError
from qnpsynth.fol import parse_formula, semantically_equivalent, simplify, to_infix
from qnpsynth.fol.syntax import (
    FALSE,
    TRUE,
    Atom,
    Closure,
    Eq,
    Signature,
    Var,
    free_vars,
    predicates_used,
    subformulas,
)
from qnpsynth.strips import ActionSchema, DomainSchema
from qnpsynth.synthesis import (
    change_condition,
    lift,
    prepare,
    report_data,
    report_text,
    synthesize_necessary,
    synthesize_sufficient,
)

BLOCKS_BOUND = 4


def _blocks():
    return corpus.domain("blocks"), corpus.abstraction("blocks")


def _equiv(f, g, sig, bound=3):
    v = semantically_equivalent(f, g, sig, bound)
    assert v, v.describe()


# -- brackets and the base ----------------------------------------------------------------


def test_brackets_reduce_to_equalities():
    d, _ = _blocks()
    nt = d.schema("Newtower")
    x, y = Var("x"), Var("y")
    assert to_infix(bracket(BracketExpr(IN_POST, "on", (x, y)), nt)) == "F"
    assert to_infix(bracket(BracketExpr(NEG_IN_POST, "on", (x, y)), nt)) == "x=z1 & y=z2"
    assert to_infix(bracket(BracketExpr(NEG_NOT_IN_POST, "on", (x, y)), nt)) == "~(x=z1 & y=z2)"
    with pytest.raises(InputError):
        BracketExpr("sideways", "on", (x,))


def test_base_atom_is_polarity_free():
    d, _ = _blocks()
    b = GeneralBase()
    atom = Atom("clear", (Var("x"),))
    for a in d.schemas:
        assert b.condition(N, a, atom) == b.condition(S, a, atom)


def test_star_conditions_differ_and_sandwich():
    d, _ = _blocks()
    mv = d.schema("Move")
    x, y = Var("x"), Var("y")
    n = base_star(N, mv, "on", x, y)
    s = base_star(S, mv, "on", x, y)
    assert n != s
    # S => N on every structure (both are read before the action)
    _equiv(simplify(s), simplify(s & n), d.signature)
    fresh = free_vars(n) | free_vars(s)
    assert fresh <= {"x", "y", "z3", "z4", "z5"}


def test_base_errors():
    d, _ = _blocks()
    f = parse_formula("(on+ x A)", d.signature)
    with pytest.raises(InputError):
        GeneralBase().condition(N, d.schema("Move"), f)
    with pytest.raises(InputError):
        GeneralBase().condition("M", d.schema("Move"), Atom("clear", (Var("x"),)))
    with pytest.raises(InputError):
        make_base("magic")
    assert isinstance(make_base("trivial"), TrivialBase)


def test_trivial_base():
    d, _ = _blocks()
    t = TrivialBase()
    atom = Atom("clear", (Var("x"),))
    assert t.condition(S, d.schema("Move"), atom) == FALSE
    assert t.condition(N, d.schema("Move"), atom) == TRUE


def test_eliminate_plus():
    d, _ = _blocks()
    f = parse_formula("(on+ x A)", d.signature)
    g = eliminate_plus(f, avoid={"x"})
    assert "+" not in to_infix(g)
    _equiv(f, g, d.signature, BLOCKS_BOUND)


# -- lift ---------------------------------------------------------------------------------------


def test_lift_newtower_necessary_matches_reference():
    d, q = _blocks()
    nt = d.schema("Newtower")
    xs, psi = prepare(q.feature("n"), nt)
    got = simplify(lift(GeneralBase(), nt, psi, N))
    _equiv(got, corpus.golden("blocks", "N_newtower"), d.signature, BLOCKS_BOUND)


def test_lift_rigid_parts_map_to_themselves():
    d, _ = _blocks()
    e = Eq(Var("x"), Var("y"))
    for a in d.schemas:
        for x in (N, S):
            assert lift(GeneralBase(), a, e, x) == e
            assert lift(GeneralBase(), a, TRUE, x) == TRUE


@settings(max_examples=40)
@given(formulas())
def test_lift_of_closure_free_formula_is_polarity_free(f):
    if any(isinstance(g, Closure) for g in subformulas(f)):
        return
    a = ActionSchema("Put", ("z1", "z2"), (Atom("p", (Var("z1"),)),), (Atom("r", (Var("z1"), Var("z2"))),),
                     (Atom("p", (Var("z1"),)),))
    assert lift(GeneralBase(), a, f, N) == lift(GeneralBase(), a, f, S)
    assert free_vars(lift(GeneralBase(), a, f, N)) <= free_vars(f) | {"z1", "z2"}


def test_lift_rejects_plus():
    d, _ = _blocks()
    with pytest.raises(InputError):
        lift(GeneralBase(), d.schema("Move"), parse_formula("(on+ x A)", d.signature), N)
    with pytest.raises(InputError):
        lift(GeneralBase(), d.schema("Move"), TRUE, "X")


# -- change conditions -----------------------------------------------------------------------


@pytest.mark.parametrize("schema, key", [("Newtower", "S_dec_newtower"), ("Move", "S_dec_move")])
def test_sufficient_decrement_matches_reference(schema, key):
    d, q = _blocks()
    got = simplify(change_condition(S, "dec", q.feature("n"), d.schema(schema)))
    _equiv(got, corpus.golden("blocks", key), d.signature, BLOCKS_BOUND)


def test_sufficient_decrement_for_move_mentions_z5_off_tower():
    d, q = _blocks()
    got = to_infix(simplify(change_condition(S, "dec", q.feature("n"), d.schema("Move"))))
    assert "on*(z5,A)" in got


@pytest.mark.parametrize(
    "kind, feature",
    [("inc", "conn"), ("dec", "conn"), ("true", "n"), ("false", "n"), ("sideways", "n")],
)
def test_change_condition_kind_errors(kind, feature):
    d, q = corpus.domain("graph"), corpus.abstraction("graph")
    with pytest.raises(InputError):
        change_condition(S, kind, q.feature(feature), d.schema("Link"))


SIG3 = Signature(("A",), {"p": 1, "r": 2, "q": 1})
TOUCH_Q = ActionSchema("Flip", ("z",), (Atom("q", (Var("z"),)),), (), (Atom("q", (Var("z"),)),))


def _concept(f):
    xs = tuple(sorted(free_vars(f)))
    return Feature("c", "numerical", xs, f)


@settings(max_examples=30)
@given(formulas(vars_=("x", "y"), max_leaves=6))
def test_untouched_concept_keeps_its_extension(f):
    c = _concept(f)
    _equiv(simplify(change_condition(S, "eq", c, TOUCH_Q)), TRUE, SIG3)


@settings(max_examples=20)
@given(formulas(vars_=("x", "y"), max_leaves=6))
def test_necessary_condition_of_rigid_action_is_schema_precondition(f):
    c = _concept(f)
    q = Abstraction((c,), (AbstractAction("keep"),), name="q")
    d = DomainSchema(SIG3, (TOUCH_Q,), "d")
    gamma = synthesize_necessary(q, d)["keep"].disjunct("Flip").formula
    _equiv(gamma, TOUCH_Q.precondition(), SIG3)


# -- assembly ----------------------------------------------------------------------------------


def test_guarantee_shape(blocks):
    d, q = blocks
    g = synthesize_sufficient(q, d)
    e = g["dec-n"]
    assert [dj.schema for dj in e.disjuncts] == ["Newtower", "Move"]
    assert e.params == ("z1", "z2", "z3", "z4", "z5")
    assert free_vars(e.formula) == frozenset()
    assert g.polarity == "sufficient"
    assert synthesize_necessary(q, d).polarity == "necessary"


def test_graph_necessary_conditions(graph):
    d, q = graph
    nec = synthesize_necessary(q, d)
    _equiv(nec.formula("link"), corpus.golden("graph", "necessary_unamended"), d.signature)
    suff = synthesize_sufficient(q, d)
    assert not semantically_equivalent(nec.formula("link"), suff.formula("link"), d.signature, 3)


def test_amended_star_closes_the_gap(graph):
    d, q = graph
    base = GeneralBase(("E",))
    plain = synthesize_sufficient(q, d).formula("link")
    amended = synthesize_sufficient(q, d, base).formula("link")
    _equiv(plain, amended, d.signature)
    _equiv(synthesize_necessary(q, d, base).formula("link"), amended, d.signature)


def test_sufficient_implies_necessary_on_closure_free_gripper(gripper):
    d, q = gripper
    suff, nec = synthesize_sufficient(q, d), synthesize_necessary(q, d)
    for e in suff:
        s, n = e.formula, nec.formula(e.action.name)
        _equiv(s & n, s, d.signature, 2)


def test_closure_free_guarantees_are_not_always_equivalent(gripper):
    # the strengthened inc/dec forms and Pre(abs) conjuncts separate the two
    d, q = gripper
    suff, nec = synthesize_sufficient(q, d), synthesize_necessary(q, d)
    v = semantically_equivalent(suff.formula("pick"), nec.formula("pick"), d.signature, 2)
    assert not v


def test_report_names_partition_and_both_change_namings(blocks):
    d, q = blocks
    suff, nec = synthesize_sufficient(q, d), synthesize_necessary(q, d)
    text = report_text(suff, nec, {"dec-n": "differ"})
    assert "dec={n}" in text
    assert "true (T)" in text and "false (F)" in text
    assert "(phi (exists (z1 z2 z3 z4 z5)" in text
    data = report_data(suff, nec)
    assert data["actions"][0]["partition"]["dec"] == ["n"]
    assert set(data["actions"][0]["sufficient"]["disjuncts"]) == {"Newtower", "Move"}


def test_synthesis_is_deterministic(gripper):
    d, q = gripper
    a = report_text(synthesize_sufficient(q, d), synthesize_necessary(q, d))
    b = report_text(synthesize_sufficient(q, d), synthesize_necessary(q, d))
    assert a == b


@given(st.sampled_from(["blocks", "gripper", "graph"]))
def test_guarantees_only_use_domain_predicates(key):
    d, q = corpus.domain(key), corpus.abstraction(key)
    for e in synthesize_sufficient(q, d):
        assert predicates_used(e.formula) <= set(d.signature.predicates)
