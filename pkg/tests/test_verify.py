import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from helpers import corrupted_blocks_guarantee

from qnpsynth import corpus
from qnpsynth.abstraction import AbstractAction, Abstraction, Literal, Policy, abstract_pre_formula
from qnpsynth.base import GeneralBase, TrivialBase
from qnpsynth.errors import BudgetExceeded, InputError
from qnpsynth.fol import parse_formula
from qnpsynth.fol.syntax import conj, implies
from qnpsynth.strips import DomainSchema, Instance, reachable
from qnpsynth.synthesis import synthesize_necessary, synthesize_sufficient
from qnpsynth.verify import (
    Budgets,
    check_base_sandwich,
    check_change_conditions,
    check_guarantee_valid,
    check_invariant,
    check_lift_sandwich,
    check_membership,
    check_soundness_direct,
    run_policy,
)

THREE_BLOCKS = corpus.blocks_instances(max_extra=2)


def _blocks_guarantee():
    return synthesize_sufficient(corpus.abstraction("blocks"), corpus.domain("blocks"))


def _membership_invariant(q, g):
    return conj(*(implies(abstract_pre_formula(e.action, q.features), e.formula) for e in g))


# -- guarantee validity ------------------------------------------------------------------------


@pytest.mark.parametrize("inst", THREE_BLOCKS, ids=lambda i: i.name)
def test_blocks_guarantee_valid_on_three_blocks(inst):
    assert check_guarantee_valid(_blocks_guarantee(), inst)


def test_blocks_guarantee_valid_on_all_states():
    v = check_guarantee_valid(_blocks_guarantee(), corpus.instance("tower2"), scope="all-states")
    assert v, v.describe()
    assert v.stats["states"] == 2**15


@pytest.mark.parametrize("name", ["g2", "g3"])
def test_amended_graph_guarantee_valid(name):
    d, q = corpus.domain("graph"), corpus.abstraction("graph")
    g = synthesize_sufficient(q, d, GeneralBase(("E",)))
    assert check_guarantee_valid(g, corpus.instance(name))


def test_corrupted_guarantee_has_counterexample():
    v = check_guarantee_valid(corrupted_blocks_guarantee(), corpus.instance("tower2"), scope="all-states")
    assert not v and v.verdict == "counterexample"
    s = v.witness["state"]
    # z1 sits on two blocks that both lead to A
    z1 = v.witness["ground_action"].split("(")[1].split(",")[0]
    below = [a[2] for a in s if a[0] == "on" and a[1] == z1]
    assert len(below) >= 2
    assert v.witness["clause"] == "c"


def test_corrupted_guarantee_passes_on_reachable_states():
    # real towers never put a block on two others
    assert check_guarantee_valid(corrupted_blocks_guarantee(), corpus.instance("tower3"))


# -- direct soundness ---------------------------------------------------------------------------


@pytest.mark.parametrize("name", ["gripper1", "gripper2", "gripper3"])
def test_gripper_sound(name):
    assert check_soundness_direct(corpus.abstraction("gripper"), corpus.instance(name))


def test_graph_unsound_witness():
    v = check_soundness_direct(corpus.abstraction("graph"), corpus.instance("g2"))
    assert not v
    assert v.witness["state"] == {("E", "s", "s"), ("E", "t", "t"), ("E", "t", "s")}
    assert v.witness["abstract_action"] == "link"


def test_circular_tower_unsound():
    v = check_soundness_direct(corpus.abstraction("blocks"), corpus.instance("circular"))
    assert not v and v.witness["valuation"] == "{n>0}"


def test_budget_exceeded():
    with pytest.raises(BudgetExceeded):
        check_soundness_direct(corpus.abstraction("gripper"), corpus.instance("gripper3"), Budgets(max_checks=100))


# -- membership and invariants -------------------------------------------------------------------


def test_tower_member():
    q = corpus.abstraction("blocks")
    assert check_membership(q, _blocks_guarantee(), corpus.instance("tower3"))


def test_graph_fails_implication():
    d, q = corpus.domain("graph"), corpus.abstraction("graph")
    v = check_membership(q, synthesize_sufficient(q, d), corpus.instance("g2"))
    assert v.verdict == "fails-implication"


def test_goal_mismatch_fails_compliance():
    q = corpus.abstraction("blocks")
    inst = corpus.stacked_tower(2, goal=(("clear", "A"), ("ontable", "B2")))
    assert check_membership(q, _blocks_guarantee(), inst).verdict == "fails-compliance"


def test_invariants_on_towers():
    q, g = corpus.abstraction("blocks"), _blocks_guarantee()
    inv = _membership_invariant(q, g)
    sig = corpus.domain("blocks").signature
    some_clear = parse_formula("(exists (x) (clear x))", sig)
    for inst in corpus.blocks_instances(3):
        if inst.name.startswith("blocks[A"):
            assert check_invariant(inv, inst)
        assert check_invariant(some_clear, inst, all_different=True)


def test_graph_invariant_witness():
    d, q = corpus.domain("graph"), corpus.abstraction("graph")
    v = check_invariant(_membership_invariant(q, synthesize_sufficient(q, d)), corpus.instance("g2"))
    assert not v
    assert ("E", "s", "t") not in v.witness["state"]


def test_invariant_must_be_closed():
    sig = corpus.domain("blocks").signature
    with pytest.raises(InputError):
        check_invariant(parse_formula("(clear x)", sig), corpus.instance("tower1"))


def test_invariant_survives_dropping_schemas():
    d = corpus.domain("blocks")
    f = parse_formula("(forall (x) (not (on x x)))", d.signature)
    inst = corpus.instance("tower2")
    full = check_invariant(f, inst, all_different=True)
    only = DomainSchema(d.signature, (d.schema("Newtower"),), "newtower-only")
    fewer = Instance(only, inst.objects, inst.init, inst.goal, inst.name)
    assert full
    assert check_invariant(f, fewer)


@pytest.mark.parametrize("inst", corpus.blocks_instances(2), ids=lambda i: i.name)
def test_consistency_triangle(inst):
    q, g = corpus.abstraction("blocks"), _blocks_guarantee()
    valid = check_guarantee_valid(g, inst, all_different=True)
    member = check_membership(q, g, inst, all_different=True)
    if valid and member:
        assert check_soundness_direct(q, inst, all_different=True)


# -- policies -------------------------------------------------------------------------------------


def test_clear_policy_all_branches():
    q, pol = corpus.abstraction("blocks"), corpus.policy("clear", "blocks")
    v = run_policy(pol, q, corpus.instance("tower3"), chooser="all")
    assert v and v.stats["max_steps"] == 3
    assert v.stats["branches"] >= 1


def test_clear_policy_first_trace():
    q, pol = corpus.abstraction("blocks"), corpus.policy("clear", "blocks")
    v = run_policy(pol, q, corpus.instance("tower3"))
    assert v.witness["trace"][0] == "dec-n: Newtower(B3,B2)"


def test_policy_incomplete():
    q = corpus.abstraction("blocks")
    empty = Policy(())
    assert run_policy(empty, q, corpus.instance("tower1")).verdict == "policy-incomplete"


def test_policy_stuck_on_circular():
    q, pol = corpus.abstraction("blocks"), corpus.policy("clear", "blocks")
    assert run_policy(pol, q, corpus.instance("circular"), chooser="all").verdict == "stuck"


def test_policy_non_terminating():
    d = corpus.domain("graph")
    q0 = corpus.abstraction("graph")
    spin = AbstractAction("spin")
    q = Abstraction(q0.features, (spin,), q0.init, q0.goal, "spin")
    pol = Policy((((Literal("conn", False),), "spin"),))
    inst = Instance(d, (), frozenset({("E", "s", "s")}), frozenset({("E", "s", "t")}))
    # Link(s,s) keeps the state and changes nothing
    assert run_policy(pol, q, inst).verdict == "non-terminating"
    assert run_policy(pol, q, inst, chooser="all").verdict == "non-terminating"


def test_chooser_validation():
    q, pol = corpus.abstraction("blocks"), corpus.policy("clear", "blocks")
    with pytest.raises(InputError):
        run_policy(pol, q, corpus.instance("tower1"), chooser="random")


@settings(max_examples=10)
@given(st.sampled_from(corpus.blocks_instances(3)))
def test_member_instances_never_stuck(inst):
    q, g = corpus.abstraction("blocks"), _blocks_guarantee()
    if check_membership(q, g, inst, all_different=True):
        v = run_policy(corpus.policy("clear", "blocks"), q, inst, chooser="all", all_different=True)
        assert v.verdict == "goal-reached"


def test_gripper_policy_reaches_goal():
    q, pol = corpus.abstraction("gripper"), corpus.policy("gripper", "gripper")
    assert run_policy(pol, q, corpus.instance("gripper3"), chooser="all")


# -- enumerated sandwich checks -----------------------------------------------------------------


@pytest.mark.parametrize("base", [GeneralBase(), TrivialBase()], ids=["general", "trivial"])
def test_base_sandwich_on_towers(base):
    inst = corpus.instance("tower2")
    assert check_base_sandwich(base, inst, reachable(inst).states)


def test_broken_base_is_caught():
    class Overclaiming(GeneralBase):
        def condition(self, x, a, atom):
            from qnpsynth.fol.syntax import TRUE

            return TRUE if x == "S" else super().condition(x, a, atom)

    inst = corpus.instance("tower1")
    v = check_base_sandwich(Overclaiming(), inst, reachable(inst).states)
    assert not v and v.stats["violations"] > 0


def test_lift_and_change_checks_on_gripper():
    inst = corpus.instance("gripper2")
    states = reachable(inst).states
    q = corpus.abstraction("gripper")
    assert check_lift_sandwich(GeneralBase(), q, inst, states)
    assert check_change_conditions(GeneralBase(), q, inst, states)


def test_necessity_on_gripper():
    from qnpsynth.verify import check_implication

    d, q = corpus.domain("gripper"), corpus.abstraction("gripper")
    assert check_implication(q, synthesize_necessary(q, d), corpus.instance("gripper2"))
