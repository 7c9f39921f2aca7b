import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dtcomplexity import core, structure, systems
from dtcomplexity.core import Leaf, branch, single
from dtcomplexity.errors import DomainMismatchError, ScopeError, UndefinedDecisionError


# -- attributes ---------------------------------------------------------------

def test_eval_examples():
    assert core.eval_attribute(core.l(2), 3) == 1
    assert core.eval_attribute(core.p(2), 3) == 0
    assert core.eval_attribute(core.q(1), Fraction(3, 2)) == 1
    assert core.eval_attribute(core.q(1), Fraction(7, 5)) == 0


def test_bit_attribute_reads_bits_of_predecessor():
    # a - 1 = 5 = 0b101
    assert [core.eval_attribute(core.bit(j), 6) for j in (1, 2, 3)] == [1, 0, 1]


def test_sequence_attribute_past_end_is_zero():
    assert core.eval_attribute(core.seq(2), (1, 1)) == 1
    assert core.eval_attribute(core.seq(5), (1, 1)) == 0


def test_table_tail_applies_only_off_the_naturals():
    g = core.table({-1: 1, -2: 0}, tail=1)
    assert [core.eval_attribute(g, x) for x in (-3, -2, -1, 0, 1, 7)] == [1, 0, 1, 1, 0, 0]


def test_indicator_of_constraints():
    ind = core.indicator(((core.bit(1), 1), (core.bit(2), 0)))
    assert [core.eval_attribute(ind, a) for a in (1, 2, 3, 4, 6)] == [0, 1, 0, 0, 1]


def test_domain_mismatch():
    with pytest.raises(DomainMismatchError):
        core.eval_attribute(core.seq(1), 3)
    with pytest.raises(DomainMismatchError):
        core.eval_attribute(core.l(1), (1, 0))


@pytest.mark.parametrize("text", [
    "p:3", "l:4", "q:2", "bit:5", "seq:1", "table:{-1=1,-2=0}", "table:{-1=1,*=1}",
    "ind:{bit:1=1,bit:2=0}",
])
def test_attribute_text_round_trip(text):
    attr = core.parse_attribute(text)
    assert core.parse_attribute(str(attr)) == attr
    assert core.parse_attribute(attr.short) == attr


def test_equal_attributes_are_interchangeable():
    assert core.parse_attribute("l:2") == core.l(2)
    assert hash(core.table({-1: 1})) == hash(core.table({-1: 1}))


@pytest.mark.parametrize("bad", ["", "x:1", "p:", "p:0", "l:-2", "table:{1=2}"])
def test_bad_attribute_text(bad):
    with pytest.raises(ValueError):
        core.parse_attribute(bad)


@given(st.one_of(st.integers(-50, 50), st.fractions(min_value=0, max_value=20),
                 st.lists(st.integers(0, 1), max_size=6).map(core.normalize_sequence)))
def test_object_text_round_trip(obj):
    if isinstance(obj, Fraction) and obj.denominator == 1:
        obj = int(obj)
    assert core.parse_object(core.format_object(obj)) == obj


# -- universe and problems ----------------------------------------------------

def test_signature_examples():
    attrs = (core.l(1), core.l(2), core.l(3))
    problem = core.Problem.injective(attrs, systems.witness_universe("U1", attrs))
    assert core.signature(problem, 3) == (1, 1, 0)
    pattrs = (core.p(1), core.p(2))
    pproblem = core.Problem.injective(pattrs, systems.witness_universe("U3", pattrs))
    assert core.signature(pproblem, 3) == (0, 0)


def test_universe_mask_outside_scope():
    u = systems.witness_universe("U1", [core.l(2)])
    with pytest.raises(ScopeError):
        u.mask(core.l(3))


def test_undefined_decision():
    problem = core.Problem((core.p(1),), {(1,): 1})
    with pytest.raises(UndefinedDecisionError):
        problem.decide((0,))


@pytest.mark.parametrize("decisions", [{(1, 0): 1}, {(1,): 0}, {(2,): 1}])
def test_problem_validation(decisions):
    with pytest.raises(ValueError):
        core.Problem((core.p(1),), decisions)


# -- paths and predicates -----------------------------------------------------

def _u1_25():
    attrs = (core.l(2), core.l(5))
    return systems.witness_universe("U1", attrs)


def test_path_set_examples():
    u = _u1_25()
    assert u.objects == (1, 3, 6)
    tree = single(branch(core.l(2), Leaf(1), branch(core.l(5), Leaf(2), Leaf(3))))
    paths = list(core.complete_paths(tree))
    assert [core.path_set(tree, p, u) for p in paths] == [(1,), (3,), (6,)]
    trivial = single(Leaf(1))
    (path,) = core.complete_paths(trivial)
    assert core.path_set(trivial, path, u) == u.objects


def test_contradictory_path_is_empty():
    u = systems.witness_universe("U3", [core.p(1), core.p(2)])
    tree = single(branch(core.p(1), None, branch(core.p(2), None, Leaf(1))))
    (path,) = core.complete_paths(tree)
    assert core.path_set(tree, path, u) == ()


def _u1_problem(n):
    return systems.hardest_problem("U1", n), systems.witness_universe("U1", systems.hardest_attributes("U1", n))


def test_solves_examples():
    problem, u = _u1_problem(2)
    chain = single(branch(core.l(1), Leaf(1), branch(core.l(2), Leaf(2), Leaf(3))))
    assert core.solves_det(chain, problem, u)
    flipped = single(branch(core.l(1), Leaf(1), branch(core.l(2), Leaf(2), Leaf(2))))
    assert not core.solves_nondet(flipped, problem, u)
    missing = single(branch(core.l(1), Leaf(1), Leaf(2)))
    assert not core.solves_det(missing, problem, u)
    two_roots = core.DecisionTree((chain.children[0], chain.children[0]))
    assert core.solves_nondet(two_roots, problem, u)
    assert not core.solves_det(two_roots, problem, u)


def test_constant_problem_single_terminal():
    u = systems.witness_universe("U3", [core.p(1)])
    problem = core.Problem((core.p(1),), {(0,): 7, (1,): 7})
    assert core.solves_det(single(Leaf(7)), problem, u)


def test_metrics_examples():
    assert core.metrics(single(Leaf(1))) == core.TreeMetrics(0, 2, 1, 0)
    assert core.metrics(single(branch(core.p(1), Leaf(1), Leaf(2)))) == core.TreeMetrics(1, 4, 2, 1)


def test_gd2_and_full_examples():
    assert core.is_in_gd2(single(Leaf(1)))
    assert not core.is_in_gd2(single(branch(core.p(1), Leaf(1))))
    dead = single(branch(core.p(1), branch(core.p(2), Leaf(1)), branch(core.p(2), None, Leaf(2))))
    assert not core.is_full_subtree(dead, (0,))
    assert core.is_full_subtree(single(Leaf(3)), (0,))
    redundant = single(core.Working(core.p(1), ((0, Leaf(1)), (0, Leaf(2)), (1, Leaf(3)))))
    assert core.is_full_subtree(redundant, (0,))


def test_gaf_examples():
    assert core.in_gaf(single(branch(core.p(1), Leaf(1), Leaf(2))))
    assert not core.in_gaf(core.DecisionTree((Leaf(1), Leaf(2))))
    assert core.in_gaf(core.DecisionTree((branch(core.p(1), None, Leaf(1)),
                                          branch(core.p(1), Leaf(2)))))
    same_label = single(core.Working(core.p(1), ((1, Leaf(1)), (1, Leaf(2)))))
    assert not core.in_gaf(same_label)


def test_unrealizable_nodes():
    u = systems.witness_universe("U3", [core.p(1), core.p(2)])
    tree = single(branch(core.p(1), Leaf(1), branch(core.p(2), Leaf(2), Leaf(3))))
    assert core.unrealizable_nodes(tree, u) == [(0, 1, 1)]


def test_tag_nodes_preorder():
    tree = core.tag_nodes(single(branch(core.p(1), Leaf(1), Leaf(2))))
    assert tree.tag == "n0"
    assert [n.tag for _, n in core.iter_nodes(tree)] == ["n1", "n2", "n3"]


# -- text form ----------------------------------------------------------------

def test_text_form_example():
    tree = single(branch(core.l(2), Leaf(1), Leaf(2)))
    assert core.to_text(tree) == "(root (f:l2 0=(leaf 1) 1=(leaf 2)))"


@pytest.mark.parametrize("bad", ["", "(root)", "(root (leaf 0))", "(root (f:l2 2=(leaf 1)))",
                                 "(root (leaf 1)", "(tree (leaf 1))", "(root (f:zz 0=(leaf 1)))"])
def test_parse_tree_rejects(bad):
    with pytest.raises(ValueError):
        core.parse_tree(bad)


@settings(max_examples=200)
@given(st.integers(0, 2**32))
def test_text_round_trip(seed):
    attrs = [core.l(1), core.p(2), core.q(3), core.table({-1: 1}, tail=1),
             core.indicator(((core.bit(1), 1),))]
    tree = structure.random_tree(random.Random(seed), attrs, [1, 2, 9], 4)
    assert core.parse_tree(core.to_text(tree)) == tree


@settings(max_examples=200)
@given(st.integers(0, 2**32))
def test_preorder_and_paths_agree(seed):
    tree = structure.random_tree(random.Random(seed), [core.l(1), core.l(2)], [1, 2], 4)
    m = core.metrics(tree)
    paths = list(core.complete_paths(tree))
    assert len(paths) == m.terminals
    assert max(p.length for p in paths) == m.depth
    for p in paths:
        assert isinstance(core.subtree_at(tree, p.address), Leaf)
