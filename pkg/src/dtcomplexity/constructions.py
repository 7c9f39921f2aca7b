"""Tree-building procedures with guaranteed metrics."""
from __future__ import annotations

from fractions import Fraction

from . import core, systems
from .core import DecisionTree, Leaf, Problem, WitnessUniverse, Working
from .errors import CoverError, InvalidAttributeError


def pruned_full_tree(problem: Problem, universe: WitnessUniverse) -> DecisionTree:
    """Query the attributes in description order, dropping empty branches.

    A test whose one side holds no object is contracted away, so the result
    has two edges at every working node and one terminal per realizable tuple.
    """
    attrs = problem.attributes

    def build(mask, k):
        if k == len(attrs):
            i = (mask & -mask).bit_length() - 1
            return Leaf(problem.decide(universe.signature_of(i, attrs)))
        ones = universe.mask(attrs[k])
        m0, m1 = mask & ~ones, mask & ones
        if not m0 or not m1:
            return build(m0 or m1, k + 1)
        return Working(attrs[k], ((0, build(m0, k + 1)), (1, build(m1, k + 1))))

    return core.single(build(universe.full, 0))


def _interval_search(thresholds: list, leaf) -> core.Node:
    """Binary search over ordered threshold attributes; ``leaf(r)`` handles interval r.

    Interval r lies above thresholds[:r] and below thresholds[r:]. The lower
    median threshold is tested first.
    """
    def build(lo, hi):
        if lo == hi:
            return leaf(lo)
        mid = lo + (hi - lo - 1) // 2
        return Working(thresholds[mid], ((0, build(lo, mid)), (1, build(mid + 1, hi))))

    return build(0, len(thresholds))


def binary_search_tree(problem: Problem) -> DecisionTree:
    """Deterministic tree of depth ceil(log2(m+1)) over m distinct threshold attributes l_i."""
    if any(a.family != "L" for a in problem.attributes):
        raise InvalidAttributeError("binary search needs threshold attributes l_i only")
    idx = sorted({a.index for a in problem.attributes})
    reps = [1] + [i + 1 for i in idx]
    thresholds = [core.l(i) for i in idx]
    return core.single(_interval_search(
        thresholds, lambda r: Leaf(problem.decide(core.signature(problem, reps[r])))))


def cover_nondet_tree(problem: Problem, covers: dict, universe: WitnessUniverse) -> DecisionTree:
    """One root path per cover system, ending in the decision of its tuple.

    ``covers`` maps each realizable tuple to equation systems whose solution
    sets must union to exactly the objects carrying that tuple.
    """
    attrs = problem.attributes
    regions: dict = {}
    for i in range(len(universe)):
        sig = universe.signature_of(i, attrs)
        regions[sig] = regions.get(sig, 0) | (1 << i)
    missing = sorted(set(regions) - set(covers))
    if missing:
        raise CoverError(f"no cover systems for realizable tuple {missing[0]}")
    paths = []
    for tup, cover in covers.items():
        region = regions.get(tuple(tup), 0)
        union = 0
        for system in cover:
            sol = universe.solutions(system)
            if sol & ~region:
                raise CoverError(f"cover system {_fmt(system)} leaves the region of {tup}")
            union |= sol
        if union != region:
            raise CoverError(f"cover of {tup} misses objects of its region")
        decision = problem.decide(tup) if region else None
        for system in cover:
            if decision is None:
                continue
            node = Leaf(decision)
            for attr, b in reversed(system):
                node = Working(attr, ((b, node),))
            paths.append(node)
    return DecisionTree(tuple(paths))


def _fmt(system) -> str:
    return "{" + ", ".join(f"{a}={b}" for a, b in system) + "}"


def u2_nondet_depth1(problem: Problem) -> DecisionTree:
    """Depth-1 nondeterministic tree over U2 from the singleton cover.

    Paths are {p_1=1}, ..., {p_{2^t}=1} and {l_{2^t}=1} with 2^t above every
    attribute index of the problem.
    """
    covers = systems.certificate_covers("U2", problem)
    scope = tuple(problem.attributes) + systems.cover_attributes(covers)
    return cover_nondet_tree(problem, covers, systems.witness_universe("U2", scope))


def u6_added_attributes(problem: Problem) -> tuple:
    """Threshold attributes q_i added so consecutive p-points are separated."""
    ps = sorted({a.index for a in problem.attributes if a.family == "P"})
    qs = {a.index for a in problem.attributes if a.family == "Q"}
    added = []
    for lo, hi in zip(ps, ps[1:]):
        if not any(lo <= j < hi for j in qs):
            qs.add(lo)
            added.append(core.q(lo))
    return tuple(added)


def u6_mixed_tree(problem: Problem) -> DecisionTree:
    """Binary search over the q-thresholds, then at most one p test.

    Depth is at most ceil(log2(n+1)) + 1.
    """
    for a in problem.attributes:
        if a.family not in ("P", "Q"):
            raise InvalidAttributeError(f"{a} is not a U6 point or threshold attribute")
    ps = sorted({a.index for a in problem.attributes if a.family == "P"})
    added = u6_added_attributes(problem)
    qs = sorted({a.index for a in problem.attributes if a.family == "Q"} | {a.index for a in added})
    thresholds = [core.q(j) for j in qs]
    bounds = [Fraction(0)] + [j + Fraction(1, 2) for j in qs] + [None]

    def decide(obj):
        if isinstance(obj, Fraction) and obj.denominator == 1:
            obj = int(obj)
        return Leaf(problem.decide(core.signature(problem, obj)))

    def leaf(r):
        lower, upper = bounds[r], bounds[r + 1]
        inside = [i for i in ps if i > lower and (upper is None or i < upper)]
        if not inside:
            return decide(lower)
        (i,) = inside
        return Working(core.p(i), ((0, decide(lower)), (1, decide(i))))

    return core.single(_interval_search(thresholds, leaf))


def contract(tree: DecisionTree) -> DecisionTree:
    """Remove every working node with a single outgoing edge, keeping node tags.

    The entering edge is reconnected to the node's only child. Answers are
    unchanged whenever the dropped branch held no object.
    """
    def walk(node):
        if isinstance(node, Leaf):
            return node
        if len(node.edges) == 1:
            return walk(node.edges[0][1])
        return Working(node.attribute, tuple((b, walk(c)) for b, c in node.edges), node.tag)

    return DecisionTree(tuple(walk(c) for c in tree.children), tree.tag)
