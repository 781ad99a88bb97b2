import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qnpsynth import corpus
from qnpsynth.errors import BudgetExceeded, InputError, ParseError, PreconditionViolation
from qnpsynth.io import (
    load_config,
    parse_abstraction,
    parse_domain,
    parse_instance,
    parse_policy,
    parse_signature,
)
from qnpsynth.strips import (
    ActionSchema,
    Instance,
    all_states,
    applicable,
    applicable_mask,
    apply_to_batch,
    ground,
    instantiate,
    reachable,
    res,
    to_batch,
)

DOMAIN = """
(domain tiny
  (constants A)
  (predicates (on 2) (clear 1))
  (action Put :params (x y) :pre ((clear x) (clear y)) :add ((on x y)) :del ((clear y))))
"""


def test_parse_domain_sections():
    d = parse_domain(DOMAIN)
    assert d.name == "tiny"
    assert d.signature.constants == ("A",)
    assert d.signature.predicates == {"on": 2, "clear": 1}
    put = d.schema("Put")
    assert put.params == ("x", "y")
    assert [str(a) for a in put.adds("on")] == ["on(x,y)"]


@pytest.mark.parametrize(
    "text, line",
    [
        ("(domain d (predicates (on 2))\n (action M :params (x) :pre ((on x)) :add () :del ()))", 2),
        ("(domain d (predicates (on 2))\n (action M :params (x) :pre () :add ((on x z)) :del ()))", 2),
        ("(domain d (predicates (on two)))", 1),
        ("(domain d (predicates (on 2))\n\n (action M :params (x x) :pre () :add () :del ()))", 3),
    ],
)
def test_domain_errors_have_positions(text, line):
    with pytest.raises((ParseError, InputError)) as e:
        parse_domain(text, "d.dom")
    if isinstance(e.value, ParseError):
        assert e.value.line == line


def test_add_delete_overlap_rejected():
    with pytest.raises((ParseError, InputError)):
        parse_domain("(domain d (predicates (p 1)) (action M :params (x) :pre () :add ((p x)) :del ((p x))))")


def test_parse_instance_and_signature():
    d = parse_domain(DOMAIN)
    inst = parse_instance("(instance i (objects b) (init (clear A) (clear b)) (goal (on b A)))", d)
    assert inst.universe == ("A", "b")
    assert inst.init == {("clear", "A"), ("clear", "b")}
    assert parse_signature(DOMAIN) == d.signature
    with pytest.raises((ParseError, InputError)):
        parse_instance("(instance i (objects b) (init (clear c)) (goal))", d)


def test_parse_abstraction_and_policy(blocks):
    d, q = blocks
    assert [f.name for f in q.features] == ["n"]
    assert q.features[0].numerical
    act = q.actions[0]
    assert str(act.pre[0]) == "n>0"
    pol = corpus.policy("clear", "blocks")
    assert len(pol.rules) == 1
    with pytest.raises((ParseError, InputError)):
        parse_abstraction("(abstraction q (features (num n (x) (foo x))) (actions) (init ()) (goal ()))",
                          d.signature)
    with pytest.raises((ParseError, InputError)):
        parse_policy("(policy (rule ((gt n)) nope))", q)


def test_config(tmp_path):
    p = tmp_path / "c.toml"
    p.write_text('[base]\nkind = "general"\namended_star = ["E"]\n')
    assert load_config(p) == {"base": {"kind": "general", "amended_star": ["E"]}}
    p.write_text('[base]\nkind = "magic"\n')
    with pytest.raises(InputError):
        load_config(p)


# -- grounding and search -------------------------------------------------------------------


def test_ground_order_and_all_different():
    inst = corpus.instance("tower1")
    names = [str(a) for a in ground(inst)]
    assert names[0] == "Newtower(A,A)"
    assert len(names) == 2**2 + 2**3
    distinct = ground(inst, all_different=True)
    assert len(distinct) == 2 + 0


def test_res_and_precondition():
    inst = corpus.instance("tower1")
    nt = instantiate(inst.domain.schema("Newtower"), ("B1", "A"))
    assert applicable(inst.init, nt)
    after = res(inst.init, nt)
    assert ("clear", "A") in after and ("on", "B1", "A") not in after
    with pytest.raises(PreconditionViolation):
        res(after, nt)


@pytest.mark.parametrize(
    "name, count",
    [("gripper1", 8), ("gripper2", 28), ("gripper3", 88), ("tower1", 3), ("circular", 1), ("g2", 16)],
)
def test_reachable_counts(name, count):
    assert len(reachable(corpus.instance(name)).states) == count


def test_all_different_drops_self_stacking():
    inst = corpus.instance("tower1")
    states = reachable(inst, all_different=True).states
    assert len(states) == 2
    assert not any(a[0] == "on" and a[1] == a[2] for s in states for a in s)


def test_reachable_budget():
    with pytest.raises(BudgetExceeded) as e:
        reachable(corpus.instance("gripper3"), max_states=10)
    assert e.value.budget_name == "max_states"


@pytest.mark.parametrize("name", ["tower2", "gripper2", "g2"])
def test_reachable_is_closed_and_bfs_ordered(name):
    inst = corpus.instance(name)
    space = reachable(inst)
    index = {s: i for i, s in enumerate(space.states)}
    assert space.states[0] == inst.init
    for s in space.states:
        for a in ground(inst):
            if applicable(s, a):
                assert res(s, a) in index
    assert reachable(inst).states == space.states
    # BFS: a successor is never discovered before the first state that reaches it
    first_parent = {}
    for i, _, j in space.transitions:
        first_parent.setdefault(j, i)
    assert all(first_parent[j] < j for j in first_parent if j)


@given(st.data())
def test_batch_successors_match_scalar(data):
    inst = corpus.instance("gripper1")
    states = reachable(inst).states
    chosen = data.draw(st.lists(st.sampled_from(states), min_size=1, max_size=5))
    actions = ground(inst)
    a = data.draw(st.sampled_from(actions))
    batch = to_batch(inst, chosen)
    mask = applicable_mask(batch, a, inst.universe)
    nxt = apply_to_batch(batch, a, inst.universe)
    for i, s in enumerate(chosen):
        assert bool(mask[i]) == applicable(s, a)
        if mask[i]:
            want = to_batch(inst, [res(s, a)])
            for p in want.relations:
                assert np.array_equal(nxt.relations[p][i], want.relations[p][0])


def test_all_states_guard():
    assert len(list(all_states(corpus.instance("g2")))) == 16
    with pytest.raises(BudgetExceeded):
        list(all_states(corpus.instance("gripper3")))


def test_instance_validation():
    d = corpus.domain("blocks")
    with pytest.raises(InputError):
        Instance(d, ("A",), frozenset(), frozenset())
    with pytest.raises(InputError):
        Instance(d, ("B",), frozenset({("on", "B")}), frozenset())


def test_schema_validation():
    from qnpsynth.fol.syntax import Atom, Var

    with pytest.raises(InputError):
        ActionSchema("M", ("x",), (Atom("p", (Var("y"),)),), (), ())
