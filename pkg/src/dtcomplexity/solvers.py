"""Exact minimum depth / node count of decision trees over a finite attribute pool.

All solvers work on *classes*: witness objects grouped by their values on the
pool. Subsets of classes are bitmasks and serve directly as memo keys.
Ties are broken by the lowest pool position, then edge 0 before edge 1.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Sequence

from . import core, systems
from .core import Attribute, DecisionTree, Leaf, Problem, WitnessUniverse, Working
from .errors import (
    BudgetExhaustedError,
    ClosedFormMismatch,
    UnsolvableError,
    UnsupportedSystemError,
)


@dataclass(frozen=True)
class Pool:
    """Attributes a solver may query: ``local`` (the problem's own) or ``extended``."""

    mode: str
    attributes: tuple

    @classmethod
    def local(cls, problem: Problem) -> "Pool":
        return cls("local", tuple(dict.fromkeys(problem.attributes)))

    @classmethod
    def extended(cls, problem: Problem, extra: Sequence[Attribute]) -> "Pool":
        return cls("extended", tuple(dict.fromkeys(tuple(problem.attributes) + tuple(extra))))


@dataclass(frozen=True)
class SolveResult:
    objective: str
    mode: str
    value: int
    witness_tree: DecisionTree
    explored_states: int


def _pool_attrs(pool) -> tuple:
    attrs = pool.attributes if isinstance(pool, Pool) else tuple(pool)
    return tuple(dict.fromkeys(attrs))


def realizable_tuples(problem: Problem, universe: WitnessUniverse) -> list[tuple]:
    """Distinct value tuples of the problem's attributes over the universe, sorted."""
    return universe.realizable(problem.attributes)


def n_u_worst(system, n: int, cap: int = systems.DEFAULT_CAP) -> int:
    """Realizable-tuple count of the canonical maximizing attribute family."""
    attrs = systems.hardest_attributes(system, n)
    return len(systems.witness_universe(system, attrs, cap).realizable(attrs))


class _Classes:
    """Witness objects collapsed by pool signature, with per-class decisions."""

    def __init__(self, problem: Problem, pool, universe: WitnessUniverse):
        self.attrs = _pool_attrs(pool)
        sig_index: dict = {}
        decisions: list = []
        for i in range(len(universe)):
            d = problem.decide(universe.signature_of(i, problem.attributes))
            sig = universe.signature_of(i, self.attrs)
            k = sig_index.setdefault(sig, len(sig_index))
            if k == len(decisions):
                decisions.append(d)
            elif decisions[k] != d:
                raise UnsolvableError(
                    f"pool cannot separate objects with decisions {decisions[k]} and {d}"
                )
        self.signatures = list(sig_index)
        self.decisions = decisions
        self.full = (1 << len(decisions)) - 1
        self.attr_masks = [
            sum(1 << k for k, sig in enumerate(self.signatures) if sig[j])
            for j in range(len(self.attrs))
        ]
        self.decision_mask: dict = {}
        for k, d in enumerate(decisions):
            self.decision_mask[d] = self.decision_mask.get(d, 0) | (1 << k)

    def constant(self, s: int) -> int | None:
        """The common decision on subset ``s`` or None."""
        d = self.decisions[(s & -s).bit_length() - 1]
        return d if s & ~self.decision_mask[d] == 0 else None

    def splits(self, s: int):
        for j, m in enumerate(self.attr_masks):
            s1 = s & m
            if s1 and s1 != s:
                yield j, s & ~m, s1


def _build_det(classes: _Classes, choice: dict, s: int):
    j = choice[s]
    if j is None:
        return Leaf(classes.constant(s))
    m = classes.attr_masks[j]
    return Working(classes.attrs[j], ((0, _build_det(classes, choice, s & ~m)),
                                      (1, _build_det(classes, choice, s & m))))


def _solve_det(problem, pool, universe, combine, objective) -> SolveResult:
    classes = _Classes(problem, pool, universe)
    memo: dict = {}
    choice: dict = {}

    def best(s):
        if s in memo:
            return memo[s]
        if classes.constant(s) is not None:
            value, pick = (0 if objective == "depth" else 1), None
        else:
            value, pick = None, None
            for j, s0, s1 in classes.splits(s):
                v = combine(best(s0), best(s1))
                if value is None or v < value:
                    value, pick = v, j
        memo[s], choice[s] = value, pick
        return value

    value = best(classes.full)
    tree = core.single(_build_det(classes, choice, classes.full))
    if objective == "nodes":
        value += 1  # the root
    return SolveResult(objective, "det", value, tree, len(memo))


def min_depth_det(problem: Problem, pool, universe: WitnessUniverse) -> SolveResult:
    """Minimum depth of a deterministic tree over ``pool`` solving ``problem``."""
    return _solve_det(problem, pool, universe, lambda a, b: 1 + max(a, b), "depth")


def min_nodes_det(problem: Problem, pool, universe: WitnessUniverse) -> SolveResult:
    """Minimum total node count (root included) of a deterministic tree over ``pool``."""
    return _solve_det(problem, pool, universe, lambda a, b: 1 + a + b, "nodes")


def min_depth_nondet(problem: Problem, pool, universe: WitnessUniverse) -> SolveResult:
    """Minimum depth of a nondeterministic tree: the longest shortest certificate.

    A certificate of a class is a set of pool equations it satisfies whose
    solution set carries a single decision. The witness tree joins one path
    per distinct certificate at the root.
    """
    classes = _Classes(problem, pool, universe)
    count = len(classes.attrs)
    certs: list = []
    explored = 0
    for k, sig in enumerate(classes.signatures):
        found = None
        for length in range(count + 1):
            for combo in combinations(range(count), length):
                explored += 1
                s = classes.full
                for j in combo:
                    m = classes.attr_masks[j]
                    s &= m if sig[j] else ~m
                if classes.constant(s) is not None:
                    found = tuple((j, sig[j]) for j in combo)
                    break
            if found is not None:
                break
        certs.append((found, classes.decisions[k]))
    value = max(len(c) for c, _ in certs)
    paths = []
    for cert, d in dict.fromkeys(certs):
        node = Leaf(d)
        for j, b in reversed(cert):
            node = Working(classes.attrs[j], ((b, node),))
        paths.append(node)
    return SolveResult("depth", "nondet", value, DecisionTree(tuple(paths)), explored)


# ---------------------------------------------------------------------------
# Exhaustive oracle
# ---------------------------------------------------------------------------

def exhaustive_min(
    problem: Problem,
    pool,
    universe: WitnessUniverse,
    objective: str,
    mode: str,
    node_budget: int = 8,
) -> SolveResult:
    """Exact optimum by enumerating every tree with at most ``node_budget`` nodes.

    Works directly on witness objects and is independent of the memoized
    solvers. Each subtree is abstracted to its behaviour: for every object
    arriving at it, whether it can reach a correct terminal and whether it can
    reach a wrong one (two bits per object). Subtrees are enumerated by
    increasing size; among subtrees with equal behaviour only undominated ones
    (smaller size, then smaller depth) are kept. Attributes follow pool order,
    0-edges precede 1-edges, and only decisions occurring on the universe are
    used as terminal labels.
    """
    if objective not in ("depth", "nodes") or mode not in ("det", "nondet"):
        raise ValueError("objective must be depth|nodes and mode det|nondet")
    attrs = _pool_attrs(pool)
    k = len(universe)
    decided = [problem.decide(universe.signature_of(i, problem.attributes)) for i in range(k)]
    both = [3 << (2 * i) for i in range(k)]
    target = sum(1 << (2 * i) for i in range(k))
    edge_masks = [
        (sum(b for i, b in enumerate(both) if not universe.mask(a) >> i & 1),
         sum(b for i, b in enumerate(both) if universe.mask(a) >> i & 1))
        for a in attrs
    ]
    by_depth = objective == "depth"

    trees: dict = {}    # size -> {sem: (depth, node)}
    bundles: dict = {}  # size -> {sem: (depth, nodes tuple)}
    seen_tree: dict = {}
    seen_bundle: dict = {}

    def offer(store, seen, size, sem, depth, item):
        prior = seen.get(sem)
        if prior is not None and (not by_depth or prior <= depth):
            return
        level = store.setdefault(size, {})
        if sem not in level or depth < level[sem][0]:
            level[sem] = (depth, item)

    def close(store, seen, size):
        for sem, (depth, _) in store.get(size, {}).items():
            if sem not in seen or depth < seen[sem]:
                seen[sem] = depth

    # children available below a working node: single trees (det) or bundles (nondet)
    parts = trees if mode == "det" else bundles

    best = None
    explored = 0
    for size in range(1, node_budget):
        if size == 1:
            for d in dict.fromkeys(sorted(decided)):
                sem = sum((1 if decided[i] == d else 2) << (2 * i) for i in range(k))
                offer(trees, seen_tree, 1, sem, 0, Leaf(d))
        else:
            for j, (m0, m1) in enumerate(edge_masks):
                a = attrs[j]
                for s0 in range(0, size - 1):
                    s1 = size - 1 - s0
                    lefts = [(0, 0, None)] if s0 == 0 else [
                        (sem, dp, it) for sem, (dp, it) in parts.get(s0, {}).items()]
                    rights = [(0, 0, None)] if s1 == 0 else [
                        (sem, dp, it) for sem, (dp, it) in parts.get(s1, {}).items()]
                    for sa, da, ia in lefts:
                        for sb, db, ib in rights:
                            explored += 1
                            edges = _edges(mode, 0, ia) + _edges(mode, 1, ib)
                            sem = (sa & m0) | (sb & m1)
                            offer(trees, seen_tree, size, sem, 1 + max(da, db),
                                  Working(a, edges))
        close(trees, seen_tree, size)
        if mode == "nondet":
            for sem, (dp, node) in trees.get(size, {}).items():
                offer(bundles, seen_bundle, size, sem, dp, (node,))
            for s0 in range(1, size):
                for sa, (da, ia) in list(bundles.get(s0, {}).items()):
                    for sb, (db, node) in trees.get(size - s0, {}).items():
                        explored += 1
                        offer(bundles, seen_bundle, size, sa | sb, max(da, db), ia + (node,))
            close(bundles, seen_bundle, size)
        # a root over parts of this size gives a tree of size + 1 nodes
        hit = parts.get(size, {}).get(target)
        if hit is not None and size + 1 <= node_budget:
            depth, item = hit
            value = size + 1 if not by_depth else depth
            if best is None or value < best[0]:
                children = item if mode == "nondet" else (item,)
                best = (value, DecisionTree(tuple(children)))
            if not by_depth:
                break
    if best is None:
        raise BudgetExhaustedError(f"no solving tree within {node_budget} nodes")
    value, tree = best
    check = core.solves_det if mode == "det" else core.solves_nondet
    assert check(tree, problem, universe)
    return SolveResult(objective, mode, value, tree, explored)


def _edges(mode: str, label: int, item) -> tuple:
    if item is None:
        return ()
    if mode == "det":
        return ((label, item),)
    return tuple((label, node) for node in item)


# ---------------------------------------------------------------------------
# Worst-case functions of the built-in systems
# ---------------------------------------------------------------------------

def _ceil_log2(x: int) -> int:
    return (x - 1).bit_length()


CLOSED_FORMS = {
    "U1": {"hd": lambda n: _ceil_log2(n + 1), "ha": lambda n: 1 if n == 1 else 2,
           "Ld": lambda n: 2 * (n + 1), "La": lambda n: 2 * (n + 1)},
    "U2": {"hd": lambda n: n, "ha": lambda n: 1,
           "Ld": lambda n: 2 * (n + 1), "La": lambda n: 2 * (n + 1)},
    "U3": {"hd": lambda n: n, "ha": lambda n: n,
           "Ld": lambda n: 2 * (n + 1), "La": lambda n: 2 * (n + 1)},
    "U4": {"hd": lambda n: n, "ha": lambda n: 1,
           "Ld": lambda n: 2 ** (n + 1), "La": lambda n: 2 ** (n + 1)},
    "U5": {"hd": lambda n: n, "ha": lambda n: n,
           "Ld": lambda n: 2 ** (n + 1), "La": lambda n: 2 ** (n + 1)},
    "U7": {"hd": lambda n: n, "ha": lambda n: 1,
           "Ld": lambda n: 2 ** (n + 1), "La": lambda n: 2 ** (n + 1)},
}

QUANTITIES = ("hd", "ha", "Ld", "La")


def compute_worst_case(system, n: int, quantity: str, cap: int = systems.DEFAULT_CAP) -> int:
    """h^d, h^a, L^d or L^a of a built-in system at ``n``, without the closed-form check.

    Depths and L^d are optimal values on the hardest problem. The local pool is
    used except for h^a of U2, U4 and U7, whose pool adds the certificate-cover
    attributes. ``La`` is ``2 * N_U(n)``.
    """
    if quantity not in QUANTITIES:
        raise ValueError(f"quantity must be one of {QUANTITIES}")
    sid = systems.builtin(system).id
    if quantity == "La":
        return 2 * n_u_worst(sid, n, cap)
    if sid == "U6" and quantity in ("hd", "ha"):
        raise UnsupportedSystemError("U6 has no closed-form depth function to evaluate")
    problem = systems.hardest_problem(sid, n, cap)
    pool = Pool.local(problem)
    if quantity == "ha" and sid in ("U2", "U4", "U7"):
        covers = systems.certificate_covers(sid, problem)
        pool = Pool.extended(problem, systems.cover_attributes(covers))
    universe = systems.witness_universe(sid, pool.attributes, cap)
    solver = {"hd": min_depth_det, "ha": min_depth_nondet, "Ld": min_nodes_det}[quantity]
    return solver(problem, pool, universe).value


def closed_form(system, n: int, quantity: str) -> int | None:
    form = CLOSED_FORMS.get(systems.builtin(system).id, {}).get(quantity)
    return None if form is None else form(n)


def worst_case(system, n: int, quantity: str, cap: int = systems.DEFAULT_CAP) -> int:
    """Computed worst-case value, checked against the known closed form.

    A disagreement raises :class:`ClosedFormMismatch`.
    """
    value = compute_worst_case(system, n, quantity, cap)
    expected = closed_form(system, n, quantity)
    if expected is not None and expected != value:
        raise ClosedFormMismatch(
            f"{systems.builtin(system).id} {quantity}({n}) computed {value}, expected {expected}")
    return value
