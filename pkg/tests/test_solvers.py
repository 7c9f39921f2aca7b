import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dtcomplexity import core, solvers, systems
from dtcomplexity.errors import (
    BudgetExhaustedError,
    ClosedFormMismatch,
    UndefinedDecisionError,
    UnsolvableError,
    UnsupportedSystemError,
)


def hardest(sid, n):
    problem = systems.hardest_problem(sid, n)
    return problem, systems.witness_universe(sid, problem.attributes)


def constant_problem():
    attrs = (core.p(1), core.p(2))
    universe = systems.witness_universe("U3", attrs)
    return core.Problem(attrs, {t: 5 for t in universe.realizable(attrs)}), universe


def test_realizable_examples():
    p, u = hardest("U1", 3)
    assert len(solvers.realizable_tuples(p, u)) == 4
    p, u = hardest("U5", 2)
    assert solvers.realizable_tuples(p, u) == [(0, 0), (0, 1), (1, 0), (1, 1)]
    p, u = hardest("U3", 2)
    assert set(solvers.realizable_tuples(p, u)) == {(1, 0), (0, 1), (0, 0)}


def test_n_u_worst_examples():
    assert solvers.n_u_worst("U1", 5) == 6
    assert solvers.n_u_worst("U4", 4) == 16
    assert solvers.n_u_worst("U3", 1) == 2


def test_min_depth_det_examples():
    p, u = hardest("U1", 3)
    assert solvers.min_depth_det(p, p.attributes, u).value == 2
    p, u = hardest("U3", 4)
    assert solvers.min_depth_det(p, p.attributes, u).value == 4
    p, u = constant_problem()
    res = solvers.min_depth_det(p, p.attributes, u)
    assert res.value == 0 and res.witness_tree == core.single(core.Leaf(5))


def test_min_nodes_det_examples():
    p, u = hardest("U1", 2)
    assert solvers.min_nodes_det(p, p.attributes, u).value == 6
    p, u = hardest("U5", 2)
    assert solvers.min_nodes_det(p, p.attributes, u).value == 8
    p, u = constant_problem()
    assert solvers.min_nodes_det(p, p.attributes, u).value == 2


def test_min_depth_nondet_examples():
    p, u = hardest("U3", 3)
    assert solvers.min_depth_nondet(p, p.attributes, u).value == 3
    p, u = hardest("U1", 3)
    assert solvers.min_depth_nondet(p, p.attributes, u).value == 2


def test_u2_nondet_needs_cover_pool():
    problem = systems.hardest_problem("U2", 3)  # p5, p6, p7
    cover_pool = [core.p(i) for i in range(1, 9)] + [core.l(8)]
    pool = solvers.Pool.extended(problem, cover_pool)
    universe = systems.witness_universe("U2", pool.attributes)
    res = solvers.min_depth_nondet(problem, pool, universe)
    assert res.value == 1
    assert core.solves_nondet(res.witness_tree, problem, universe)
    # without l_8 the all-zero region must exclude 5, 6 and 7 one equation at a time
    short = solvers.Pool.extended(problem, [core.p(i) for i in range(1, 5)] + [core.l(4)])
    universe = systems.witness_universe("U2", short.attributes)
    assert solvers.min_depth_nondet(problem, short, universe).value == 3


def test_exhaustive_examples():
    p, u = hardest("U3", 1)
    assert solvers.exhaustive_min(p, p.attributes, u, "nodes", "nondet", 8).value == 4
    p, u = hardest("U1", 2)
    assert solvers.exhaustive_min(p, p.attributes, u, "nodes", "det", 8).value == 6
    p, u = constant_problem()
    for mode in ("det", "nondet"):
        assert solvers.exhaustive_min(p, p.attributes, u, "depth", mode, 8).value == 0


def test_exhaustive_budget_exhausted():
    p, u = hardest("U1", 3)
    with pytest.raises(BudgetExhaustedError):
        solvers.exhaustive_min(p, p.attributes, u, "nodes", "det", 6)


def test_unsolvable_pool():
    p, u = hardest("U3", 2)
    with pytest.raises(UnsolvableError):
        solvers.min_depth_det(p, [core.p(1)], u)


def test_undefined_decision_propagates():
    attrs = (core.p(1),)
    p = core.Problem(attrs, {(1,): 1})
    with pytest.raises(UndefinedDecisionError):
        solvers.min_depth_det(p, attrs, systems.witness_universe("U3", attrs))


def test_worst_case_examples():
    assert solvers.worst_case("U1", 7, "hd") == 3
    assert solvers.worst_case("U4", 3, "La") == 16
    assert solvers.worst_case("U2", 5, "hd") == 5
    with pytest.raises(UnsupportedSystemError):
        solvers.worst_case("U6", 3, "hd")


def test_worst_case_mismatch_is_reported(monkeypatch):
    monkeypatch.setitem(solvers.CLOSED_FORMS["U3"], "hd", lambda n: n + 1)
    with pytest.raises(ClosedFormMismatch):
        solvers.worst_case("U3", 2, "hd")


def test_results_reproducible():
    p, u = hardest("U5", 3)
    a = solvers.min_nodes_det(p, p.attributes, u)
    b = solvers.min_nodes_det(p, p.attributes, u)
    assert a == b


# -- properties over random small problems --------------------------------------

FAMILIES = {
    "U1": [core.l(i) for i in range(1, 6)],
    "U3": [core.p(i) for i in range(1, 6)],
    "U6": [core.p(1), core.p(2), core.q(1), core.q(2)],
    "U4": [core.bit(1), core.bit(2), core.bit(3)],
}


@st.composite
def small_instance(draw, max_attrs=3, max_extra=1):
    sid = draw(st.sampled_from(sorted(FAMILIES)))
    fam = FAMILIES[sid]
    attrs = tuple(draw(st.lists(st.sampled_from(fam), min_size=1, max_size=max_attrs)))
    extra = draw(st.lists(st.sampled_from(fam), max_size=max_extra))
    universe = systems.witness_universe(sid, attrs + tuple(extra))
    tuples = universe.realizable(attrs)
    labels = draw(st.lists(st.integers(1, 3), min_size=len(tuples), max_size=len(tuples)))
    problem = core.Problem(attrs, dict(zip(tuples, labels)))
    pool = solvers.Pool.extended(problem, extra)
    return problem, pool, universe


@settings(max_examples=80, deadline=None)
@given(small_instance())
def test_depth_ordering(inst):
    problem, _, universe = inst
    pool = solvers.Pool.local(problem)
    nd = solvers.min_depth_nondet(problem, pool, universe)
    d = solvers.min_depth_det(problem, pool, universe)
    assert nd.value <= d.value <= problem.dim


@settings(max_examples=80, deadline=None)
@given(small_instance())
def test_witness_trees_solve(inst):
    problem, pool, universe = inst
    d = solvers.min_depth_det(problem, pool, universe)
    assert core.solves_det(d.witness_tree, problem, universe)
    assert core.metrics(d.witness_tree).depth == d.value
    n = solvers.min_nodes_det(problem, pool, universe)
    assert core.solves_det(n.witness_tree, problem, universe)
    m = core.metrics(n.witness_tree)
    assert m.nodes == n.value
    assert core.is_in_gd2(n.witness_tree) and m.nodes == 2 * m.terminals
    assert d.value >= (m.terminals - 1).bit_length()
    nd = solvers.min_depth_nondet(problem, pool, universe)
    assert core.solves_nondet(nd.witness_tree, problem, universe)
    assert core.metrics(nd.witness_tree).depth == nd.value


@settings(max_examples=60, deadline=None)
@given(small_instance(max_attrs=3, max_extra=1))
def test_memoized_solvers_match_oracle(inst):
    problem, pool, universe = inst
    budget = 10
    for objective, solver in (("depth", solvers.min_depth_det), ("nodes", solvers.min_nodes_det)):
        fast = solver(problem, pool, universe)
        size = core.metrics(fast.witness_tree).nodes
        try:
            slow = solvers.exhaustive_min(problem, pool, universe, objective, "det", budget).value
        except BudgetExhaustedError:
            assert solvers.min_nodes_det(problem, pool, universe).value > budget
            continue
        if size <= budget:
            assert fast.value == slow
        else:
            # the optimum lies outside the enumerated trees
            assert fast.value <= slow


@settings(max_examples=40, deadline=None)
@given(small_instance(max_attrs=2, max_extra=1))
def test_nondet_depth_matches_oracle(inst):
    problem, pool, universe = inst
    fast = solvers.min_depth_nondet(problem, pool, universe).value
    if solvers.min_nodes_det(problem, pool, universe).value > 8:
        return
    slow = solvers.exhaustive_min(problem, pool, universe, "depth", "nondet", 8).value
    # the oracle only sees trees within the node budget, so it may be deeper
    assert fast <= slow


@settings(max_examples=40, deadline=None)
@given(small_instance(max_attrs=3, max_extra=0))
def test_injective_nodes_equal_twice_count(inst):
    problem, pool, universe = inst
    tuples = universe.realizable(problem.attributes)
    injective = core.Problem(problem.attributes, {t: i + 1 for i, t in enumerate(tuples)})
    assert solvers.min_nodes_det(injective, pool, universe).value == 2 * len(tuples)


@pytest.mark.parametrize("sid", ["U1", "U2", "U3", "U6"])
def test_count_bound_with_finite_dimension(sid):
    for n in range(1, 9):
        assert n + 1 <= solvers.n_u_worst(sid, n) <= 4 * n


def test_oracle_finds_shallower_nondeterministic_tree():
    problem = systems.hardest_problem("U4", 2)
    covers = systems.certificate_covers("U4", problem)
    pool = solvers.Pool.extended(problem, systems.cover_attributes(covers))
    universe = systems.witness_universe("U4", pool.attributes)
    det = solvers.exhaustive_min(problem, pool, universe, "depth", "det", 9)
    nondet = solvers.exhaustive_min(problem, pool, universe, "depth", "nondet", 9)
    assert (det.value, nondet.value) == (2, 1)
    assert solvers.min_depth_det(problem, pool, universe).value == 2
    assert solvers.min_depth_nondet(problem, pool, universe).value == 1
