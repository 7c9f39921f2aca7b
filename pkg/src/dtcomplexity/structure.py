"""Independence dimension, bounded coverage checks and class assignment."""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations, product
from typing import Sequence

from . import constructions, core, solvers, systems
from .core import WitnessUniverse
from .errors import CapacityError, DTError, InconsistentFlagsError, UnsupportedSystemError

INDEPENDENCE_CAP = 24
COVERAGE_CAP = 200_000


# ---------------------------------------------------------------------------
# Independence
# ---------------------------------------------------------------------------

def is_independent(attrs: Sequence, universe: WitnessUniverse) -> bool:
    """True iff every 0/1 tuple of ``attrs`` has a solution (the empty set qualifies)."""
    return len(universe.realizable(list(attrs))) == 1 << len(attrs)


@dataclass(frozen=True)
class IndependenceReport:
    dimension: int
    witness_subset: tuple
    checked_family_size: int


def independence_dimension(attrs: Sequence, universe: WitnessUniverse,
                           cap: int = INDEPENDENCE_CAP) -> IndependenceReport:
    """Largest independent subset of ``attrs`` by branch and bound in pool order.

    Only independent sets are extended, since every subset of an independent
    set is independent. A set stays independent when the new attribute splits
    each of its cells into two nonempty parts.
    """
    attrs = tuple(dict.fromkeys(attrs))
    if len(attrs) > cap:
        raise CapacityError(f"{len(attrs)} attributes exceed the independence search cap {cap}")
    masks = [universe.mask(a) for a in attrs]
    best: list = [()]

    def extend(chosen, cells, start):
        if len(chosen) > len(best[0]):
            best[0] = chosen
        for j in range(start, len(attrs)):
            if len(chosen) + len(attrs) - j <= len(best[0]):
                return
            m = masks[j]
            if all(c & m and c & ~m for c in cells):
                split = [c & m for c in cells] + [c & ~m for c in cells]
                extend(chosen + (attrs[j],), split, j + 1)

    extend((), [universe.full] if len(universe) else [], 0)
    return IndependenceReport(len(best[0]), best[0], len(attrs))


# ---------------------------------------------------------------------------
# Bounded coverage
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Counterexample:
    system: tuple
    objects: tuple
    parts: tuple
    min_parts: int | None  # None: no union of smaller systems reaches the set


@dataclass(frozen=True)
class CoverageCheckResult:
    """Falsification-only evidence at a finite scope.

    ``t_found`` is the largest cover size needed, or ``"exceeded"`` together
    with a counterexample.
    """

    m: int
    t_found: int | str
    counterexample: Counterexample | None
    scope: str


def _systems(attrs, size):
    for combo in combinations(attrs, size):
        for bits in product((0, 1), repeat=size):
            yield tuple(zip(combo, bits))


def _exact_cover(target: int, cands: list, limit: int) -> list | None:
    """Fewest candidate masks whose union is ``target`` (at most ``limit``), or None."""
    best: list = [None]

    def search(left, chosen):
        if not left:
            if best[0] is None or len(chosen) < len(best[0]):
                best[0] = list(chosen)
            return
        bound = limit if best[0] is None else len(best[0]) - 1
        if len(chosen) >= bound:
            return
        low = left & -left
        for k, c in enumerate(cands):
            if c & low:
                chosen.append(k)
                search(left & ~c, chosen)
                chosen.pop()

    search(target, [])
    return best[0]


def coverage_holds_bounded(system, m: int, pool: Sequence, t_limit: int,
                           universe: WitnessUniverse | None = None) -> CoverageCheckResult:
    """Check that each (m+1)-equation solution set over ``pool`` is a union of
    at most ``t_limit`` solution sets of at most m equations.

    Covers are searched greedily by largest new coverage, with an exact search
    when greedy exceeds ``t_limit``. The reported counterexample is the set
    needing the most parts (first in enumeration order on ties).
    """
    attrs = tuple(dict.fromkeys(systems.make_attribute(system, a) for a in pool))
    if universe is None:
        universe = systems.witness_universe(system, attrs)
    scope = f"{systems.builtin(system).id}, pool of {len(attrs)}, {len(universe)} witness objects"
    small: dict = {}
    count = 0
    for size in range(min(m, len(attrs)) + 1):
        for eqs in _systems(attrs, size):
            count += 1
            sol = universe.solutions(eqs)
            if sol:
                small.setdefault(sol, eqs)
    if len(attrs) <= m:
        return CoverageCheckResult(m, 1, None, scope)
    worst = None  # (need, eqs, target, chosen, cands); need None means uncoverable
    for eqs in _systems(attrs, m + 1):
        count += 1
        if count > COVERAGE_CAP:
            raise CapacityError(f"coverage enumeration exceeds {COVERAGE_CAP} systems")
        target = universe.solutions(eqs)
        if not target or target in small:
            continue
        cands = [c for c in small if c & ~target == 0]
        chosen = _greedy(target, cands)
        if chosen is None or len(chosen) > t_limit:
            chosen = _exact_cover(target, cands, len(cands) + 1)
        need = len(chosen) if chosen is not None else None
        if worst is None or _more(need, worst[0]):
            worst = (need, eqs, target, chosen, cands)
    if worst is None:
        return CoverageCheckResult(m, 1, None, scope)
    need, eqs, target, chosen, cands = worst
    if need is not None and need <= t_limit:
        return CoverageCheckResult(m, need, None, scope)
    parts = tuple(small[cands[k]] for k in chosen) if chosen is not None else ()
    ce = Counterexample(eqs, universe.objects_in(target), parts, need)
    return CoverageCheckResult(m, "exceeded", ce, scope)


def _more(a, b) -> bool:
    """Strictly larger cover need, None standing for unbounded."""
    if a is None:
        return b is not None
    return b is not None and a > b


def _greedy(target: int, cands: list) -> list | None:
    left, chosen = target, []
    while left:
        gains = [bin(c & left).count("1") for c in cands]
        k = max(range(len(cands)), key=lambda i: (gains[i], -i), default=None)
        if k is None or gains[k] == 0:
            return None
        chosen.append(k)
        left &= ~cands[k]
    return chosen


def expansion_probe(system, m: int, t: int, n: int, pool: Sequence,
                    universe: WitnessUniverse | None = None) -> bool:
    """Whether every n-equation solution set over ``pool`` is a union of at most
    t**n solution sets of at most m equations."""
    attrs = tuple(dict.fromkeys(systems.make_attribute(system, a) for a in pool))
    if universe is None:
        universe = systems.witness_universe(system, attrs)
    small = {universe.solutions(e) for k in range(min(m, len(attrs)) + 1)
             for e in _systems(attrs, k)}
    small.discard(0)
    for eqs in _systems(attrs, min(n, len(attrs))):
        target = universe.solutions(eqs)
        if not target or target in small:
            continue
        cands = [c for c in small if c & ~target == 0]
        if _exact_cover(target, cands, t ** n) is None:
            return False
    return True


# ---------------------------------------------------------------------------
# Classification
# ---------------------------------------------------------------------------

# (coverage, restricted coverage, finite I-dimension) -> (hd, ha, Ld, La)
TYPE_TABLE = {
    (True, True, True): ("LOG", "CON", "POL", "POL"),
    (True, False, True): ("LIN", "CON", "POL", "POL"),
    (False, False, True): ("LIN", "LIN", "POL", "POL"),
    (True, True, False): ("LIN", "CON", "EXP", "EXP"),
    (True, False, False): ("LIN", "CON", "EXP", "EXP"),
    (False, False, False): ("LIN", "LIN", "EXP", "EXP"),
}

CLASS_ROWS = {
    1: ("LOG", "CON", "POL", "POL"),
    2: ("LIN", "CON", "POL", "POL"),
    3: ("LIN", "LIN", "POL", "POL"),
    4: ("LIN", "CON", "EXP", "EXP"),
    5: ("LIN", "LIN", "EXP", "EXP"),
}


@dataclass(frozen=True)
class ClassRow:
    row: int
    type_tuple: tuple

    @property
    def name(self) -> str:
        return f"W{self.row}"


def classify_flags(coverage: bool, restricted: bool, finite_idim: bool) -> ClassRow:
    key = (bool(coverage), bool(restricted), bool(finite_idim))
    if key[1] and not key[0]:
        raise InconsistentFlagsError("restricted coverage implies coverage")
    types = TYPE_TABLE[key]
    (row,) = [r for r, t in CLASS_ROWS.items() if t == types]
    return ClassRow(row, types)


def classify_declared(descriptor) -> ClassRow:
    """Behaviour types and class row implied by a system's declared flags."""
    d = systems.builtin(descriptor)
    return classify_flags(d.coverage, d.restricted, not d.idim_infinite)


# ---------------------------------------------------------------------------
# Consistency of declared metadata
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConsistencyReport:
    system: str
    n_max: int
    findings: tuple
    observations: dict = field(default_factory=dict)

    @property
    def consistent(self) -> bool:
        return not self.findings


def _observed_ha(sid: str, n: int) -> int:
    problem = systems.hardest_problem(sid, n)
    pool = solvers.Pool.local(problem)
    try:
        covers = systems.certificate_covers(sid, problem)
        pool = solvers.Pool.extended(problem, systems.cover_attributes(covers))
    except UnsupportedSystemError:
        pass
    universe = systems.witness_universe(sid, pool.attributes)
    return solvers.min_depth_nondet(problem, pool, universe).value


def _observed_hd(sid: str, n: int) -> int:
    if sid == "U6":
        tree = constructions.u6_mixed_tree(systems.hardest_problem(sid, n))
        return core.metrics(tree).depth
    problem = systems.hardest_problem(sid, n)
    universe = systems.witness_universe(sid, problem.attributes)
    return solvers.min_depth_det(problem, problem.attributes, universe).value


def consistency_check(descriptor, n_max: int = 6) -> ConsistencyReport:
    """Compare declared flags against observations for n <= n_max.

    Findings are contradictions between the declared class row and what the
    finite probes observe. An empty list is evidence, not proof.
    """
    d = systems.builtin(descriptor)
    sid = d.id
    row = classify_declared(d)
    hd_t, ha_t, l_t, _ = row.type_tuple
    findings = []
    ns = range(1, n_max + 1)

    family = systems.hardest_attributes(sid, n_max)
    universe = systems.witness_universe(sid, family)
    idim = independence_dimension(family, universe).dimension
    if d.idim is not None and idim > d.idim:
        findings.append(f"independent subset of size {idim} exceeds declared I-dimension {d.idim}")
    if d.idim is None and idim < n_max:
        findings.append(
            f"declared infinite I-dimension, but the largest independent subset "
            f"of {n_max} attributes has size {idim}")

    counts = [solvers.n_u_worst(sid, n) for n in ns]
    hd = [_observed_hd(sid, n) for n in ns]
    ha = [_observed_ha(sid, n) for n in ns]
    if l_t == "EXP" and any(c != 2 ** n for n, c in zip(ns, counts)):
        findings.append("node counts expected exponential, but N_U(n) < 2^n observed")
    if l_t == "POL" and d.idim is not None and any(c > (4 * n) ** d.idim for n, c in zip(ns, counts)):
        findings.append(f"N_U(n) exceeds (4n)^{d.idim}")
    if hd_t == "LIN" and any(h != n for n, h in zip(ns, hd)):
        findings.append("deterministic depth expected linear, but h(n) < n observed")
    if hd_t == "LOG" and any(h > (n).bit_length() + 1 for n, h in zip(ns, hd)):
        findings.append("deterministic depth expected logarithmic, but exceeds ceil(log2(n+1)) + 1")
    if ha_t == "LIN" and any(h != n for n, h in zip(ns, ha)):
        findings.append("nondeterministic depth expected linear, but h(n) < n observed")
    if ha_t == "CON" and n_max >= 4 and ha[-1] >= n_max:
        findings.append("nondeterministic depth expected constant, but grows with n")
    if d.coverage:
        try:
            for n in ns:
                problem = systems.hardest_problem(sid, n)
                covers = systems.certificate_covers(sid, problem)
                scope = tuple(problem.attributes) + systems.cover_attributes(covers)
                constructions.cover_nondet_tree(problem, covers, systems.witness_universe(sid, scope))
        except (UnsupportedSystemError, DTError) as exc:
            findings.append(f"declared coverage, but no certificate cover: {exc}")
    if d.restricted and d.restricted_params and sid == "U1":
        m, t = d.restricted_params
        pool = [core.l(i) for i in range(1, min(n_max, 8) + 1)]
        res = coverage_holds_bounded(sid, m, pool, t)
        if res.counterexample is not None:
            findings.append(f"restricted coverage ({m},{t}) violated on {res.scope}")
    obs = {"idim_probe": idim, "N": counts, "hd": hd, "ha": ha, "row": row.row}
    return ConsistencyReport(sid, n_max, tuple(findings), obs)


# ---------------------------------------------------------------------------
# Structural tree properties
# ---------------------------------------------------------------------------

def random_tree(rng, attrs: Sequence, labels: Sequence[int], max_depth: int = 3,
                nondet: bool = True) -> core.DecisionTree:
    """Random tree over ``attrs`` for property checks; ``rng`` is a ``random.Random``.

    Nondeterministic trees may have several root edges and repeated labels.
    """
    def node(depth):
        if depth == max_depth or rng.random() < 0.3:
            return core.Leaf(rng.choice(labels))
        if nondet:
            edges = tuple((rng.randint(0, 1), node(depth + 1)) for _ in range(rng.randint(1, 3)))
        else:
            bits = rng.choice([(0,), (1,), (0, 1), (0, 1)])
            edges = tuple((b, node(depth + 1)) for b in bits)
        return core.Working(rng.choice(list(attrs)), edges)

    roots = rng.randint(1, 3) if nondet else 1
    return core.DecisionTree(tuple(node(0) for _ in range(roots)))


def lemma_violations(tree: core.DecisionTree) -> list[str]:
    """Violations of the working/terminal count relations.

    Trees with two edges at every working node (deterministic) have exactly
    one working node fewer than terminals; other trees of the class without
    full subtrees below repeated edges have strictly more.
    """
    m = core.metrics(tree)
    if core.is_in_gd2(tree):
        if m.working != m.terminals - 1:
            return [f"binary deterministic tree with L_w={m.working}, L_t={m.terminals}"]
    elif core.in_gaf(tree) and m.working <= m.terminals - 1:
        return [f"tree without full repeated subtrees has L_w={m.working}, L_t={m.terminals}"]
    return []


def optimal_tree_violations(tree: core.DecisionTree, universe: WitnessUniverse) -> list[str]:
    """Checks on a node-optimal deterministic tree: binary branching, no dead nodes, L_w = L_t - 1."""
    out = []
    if not core.is_in_gd2(tree):
        out.append("a working node lacks two outgoing edges")
    dead = core.unrealizable_nodes(tree, universe)
    if dead:
        out.append(f"nodes {dead} lie on no realizable path")
    m = core.metrics(tree)
    if m.working != m.terminals - 1:
        out.append(f"L_w={m.working} differs from L_t-1={m.terminals - 1}")
    return out
