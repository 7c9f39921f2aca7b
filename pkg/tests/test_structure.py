import dataclasses
import random
from itertools import combinations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dtcomplexity import core, structure, systems
from dtcomplexity.errors import CapacityError, InconsistentFlagsError


def test_independence_examples():
    u1 = systems.witness_universe("U1", [core.l(1), core.l(2)])
    assert not structure.is_independent([core.l(1), core.l(2)], u1)
    u5 = systems.witness_universe("U5", [core.seq(1), core.seq(2)])
    assert structure.is_independent([core.seq(1), core.seq(2)], u5)
    assert structure.is_independent([], u1)


def test_independence_dimension_examples():
    ls = [core.l(i) for i in range(1, 7)]
    assert structure.independence_dimension(ls, systems.witness_universe("U1", ls)).dimension == 1
    bits = [core.bit(j) for j in range(1, 5)]
    rep = structure.independence_dimension(bits, systems.witness_universe("U4", bits))
    assert rep.dimension == 4 and rep.witness_subset == tuple(bits)
    one = [core.p(3)]
    assert structure.independence_dimension(one, systems.witness_universe("U3", one)).dimension == 1


def test_independence_cap():
    ls = [core.l(i) for i in range(1, 30)]
    with pytest.raises(CapacityError):
        structure.independence_dimension(ls, systems.witness_universe("U1", ls), cap=24)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.sampled_from([core.bit(1), core.bit(2), core.bit(3),
                                 core.table({1: 1, 2: 1}), core.table({3: 1})]),
                min_size=1, max_size=4), st.sampled_from([core.bit(4), core.table({5: 1})]))
def test_independence_dimension_monotone(attrs, extra):
    bigger = list(attrs) + [extra]
    u = systems.witness_universe("U4", bigger)
    small = structure.independence_dimension(attrs, u)
    large = structure.independence_dimension(bigger, u)
    assert small.dimension <= large.dimension
    assert structure.is_independent(large.witness_subset, u)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.sampled_from([core.p(i) for i in range(1, 5)] + [core.q(i) for i in range(1, 4)]),
                min_size=1, max_size=5, unique=True))
def test_independence_brute_force_agrees(attrs):
    u = systems.witness_universe("U6", attrs)
    brute = max(k for k in range(len(attrs) + 1)
                if any(structure.is_independent(c, u) for c in combinations(attrs, k)))
    assert structure.independence_dimension(attrs, u).dimension == brute


@pytest.mark.parametrize("size", range(1, 9))
def test_u1_restricted_coverage(size):
    res = structure.coverage_holds_bounded("U1", 3, [core.l(i) for i in range(1, size + 1)], 1)
    assert res.t_found == 1 and res.counterexample is None


def test_small_pool_is_trivially_covered():
    res = structure.coverage_holds_bounded("U1", 3, [core.l(1), core.l(2)], 1)
    assert res.t_found == 1


def test_u7_counterexample_interval():
    pool = [core.l(8), core.p(9), core.l(16)] + [core.p(i) for i in range(10, 17)]
    res = structure.coverage_holds_bounded("U7", 2, pool, 3)
    assert res.t_found == "exceeded"
    ce = res.counterexample
    assert ce.objects == tuple(range(10, 17))
    assert ce.min_parts == 7
    assert all(len(part) == 1 and part[0][0].family == "P" for part in ce.parts)
    assert ce.system == ((core.l(8), 1), (core.p(9), 0), (core.l(16), 0))


def test_u3_complement_region_has_no_cover():
    pool = [core.p(i) for i in range(1, 5)]
    res = structure.coverage_holds_bounded("U3", 1, pool, 3)
    assert res.t_found == "exceeded"
    assert res.counterexample.min_parts is None
    assert res.counterexample.system == ((core.p(1), 0), (core.p(2), 0))


def test_expansion_probe_u1():
    pool = [core.l(i) for i in range(1, 7)]
    assert structure.expansion_probe("U1", 3, 1, 5, pool)


def test_classify_examples():
    assert structure.classify_flags(True, True, True) == structure.ClassRow(1, ("LOG", "CON", "POL", "POL"))
    assert structure.classify_flags(False, False, False).type_tuple == ("LIN", "LIN", "EXP", "EXP")
    assert structure.classify_flags(True, False, False).row == 4
    with pytest.raises(InconsistentFlagsError):
        structure.classify_flags(False, True, False)


def test_classifier_total_on_consistent_flags():
    rows = {structure.classify_flags(c, r, f).row
            for c in (True, False) for r in (True, False) for f in (True, False) if c or not r}
    assert rows == {1, 2, 3, 4, 5}


@pytest.mark.parametrize("sid", ["U1", "U4"])
def test_consistency_examples(sid):
    rep = structure.consistency_check(sid, 6 if sid == "U1" else 4)
    assert rep.consistent, rep.findings


def test_u4_counts_double():
    rep = structure.consistency_check("U4", 4)
    assert rep.observations["N"] == [2, 4, 8, 16]


def test_forged_descriptor_is_caught():
    forged = dataclasses.replace(systems.builtin("U3"), idim=None, class_row=5)
    rep = structure.consistency_check(forged, 6)
    assert not rep.consistent
    assert any("independent subset" in f for f in rep.findings)


def test_lemma_relations_on_random_trees():
    rng = random.Random(11)
    attrs = [core.l(1), core.p(2), core.q(1)]
    for i in range(300):
        tree = structure.random_tree(rng, attrs, [1, 2], 3, nondet=i % 2 == 0)
        assert structure.lemma_violations(tree) == []


def test_lemma_violation_detected_on_forged_metrics(monkeypatch):
    tree = core.single(core.branch(core.p(1), core.Leaf(1), core.Leaf(2)))
    monkeypatch.setattr(core, "metrics", lambda t: core.TreeMetrics(1, 5, 2, 2))
    assert structure.lemma_violations(tree)
