"""Command-line front end: ``dtlab solve|count|idim|classify|construct|verify``.

Every report ends with a fenced JSON block holding the keys ``command``,
``inputs``, ``results`` and ``version``. The block carries no timings, so equal
inputs give byte-identical blocks.

Exit codes: 0 ok, 1 verification failure, 2 parse/input error, 3 unsolvable,
4 cap or budget exceeded, 5 internal validation failure.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import random
import sys
from dataclasses import dataclass
from itertools import product

from . import __version__, constructions, core, solvers, structure, systems
from .errors import (
    BudgetExhaustedError,
    CapacityError,
    ClosedFormMismatch,
    DTError,
    UnsolvableError,
)

EXIT_OK, EXIT_FAIL, EXIT_PARSE, EXIT_UNSOLVABLE, EXIT_CAP, EXIT_INTERNAL = range(6)


class ValidationFailure(Exception):
    """A construction produced a tree that does not solve its problem."""


# ---------------------------------------------------------------------------
# Problem files
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ProblemFile:
    """JSON problem description; ``decisions`` maps bit-strings to naturals or is ``"injective"``."""

    system: str
    attributes: tuple
    decisions: object
    pool: tuple | None = None
    objects: tuple | None = None

    @classmethod
    def from_json(cls, text: str) -> "ProblemFile":
        data = json.loads(text)
        if not isinstance(data, dict):
            raise ValueError("problem file must be a JSON object")
        unknown = set(data) - {"system", "attributes", "decisions", "pool", "objects"}
        if unknown:
            raise ValueError(f"unknown problem file fields {sorted(unknown)}")
        system = data.get("system")
        attrs = data.get("attributes")
        if not isinstance(system, str) or not isinstance(attrs, list):
            raise ValueError("problem file needs 'system' and an 'attributes' list")
        decisions = data.get("decisions", "injective")
        if decisions != "injective":
            if not isinstance(decisions, dict):
                raise ValueError("'decisions' must be an object or \"injective\"")
            for key in decisions:
                if len(key) != len(attrs) or set(key) - {"0", "1"}:
                    raise ValueError(f"decision key {key!r} does not fit {len(attrs)} attributes")
            decisions = dict(sorted(decisions.items()))
        pool = data.get("pool")
        objects = data.get("objects")
        if system == "custom" and not objects:
            raise ValueError("custom systems need an 'objects' list")
        return cls(system, tuple(map(str, attrs)), decisions,
                   tuple(map(str, pool)) if pool is not None else None,
                   tuple(map(str, objects)) if objects is not None else None)

    def to_json(self) -> str:
        data = {"system": self.system, "attributes": list(self.attributes),
                "decisions": self.decisions}
        if self.pool is not None:
            data["pool"] = list(self.pool)
        if self.objects is not None:
            data["objects"] = list(self.objects)
        return json.dumps(data, indent=2, sort_keys=True)

    def attribute_list(self) -> tuple:
        if self.system == "custom":
            return tuple(core.parse_attribute(a) for a in self.attributes)
        return tuple(systems.make_attribute(self.system, a) for a in self.attributes)

    def pool_list(self) -> tuple | None:
        if self.pool is None:
            return None
        if self.system == "custom":
            return tuple(core.parse_attribute(a) for a in self.pool)
        return tuple(systems.make_attribute(self.system, a) for a in self.pool)

    def universe(self, scope) -> core.WitnessUniverse:
        if self.system == "custom":
            objs = tuple(core.parse_object(o) for o in self.objects)
            return systems.custom_universe(objs, scope)
        return systems.witness_universe(self.system, scope)

    def problem(self) -> core.Problem:
        attrs = self.attribute_list()
        if self.decisions == "injective":
            return core.Problem.injective(attrs, self.universe(attrs))
        return core.Problem(attrs, {tuple(int(c) for c in k): v for k, v in self.decisions.items()})


def hardest_file(system: str, n: int) -> ProblemFile:
    attrs = systems.hardest_attributes(system, n)
    return ProblemFile(systems.builtin(system).id, tuple(str(a) for a in attrs), "injective")


# ---------------------------------------------------------------------------
# Output
# ---------------------------------------------------------------------------

def to_dot(tree: core.DecisionTree) -> str:
    """Graphviz digraph: a point-shaped root, boxes for terminals, 0/1 edge labels."""
    lines = ["digraph tree {", '  root [shape=point];']
    counter = [0]

    def emit(node, parent, label):
        counter[0] += 1
        name = f"n{counter[0]}"
        if isinstance(node, core.Leaf):
            lines.append(f'  {name} [shape=box, label="{node.decision}"];')
        else:
            lines.append(f'  {name} [shape=ellipse, label="{node.attribute.short}"];')
        attr = f' [label="{label}"]' if label is not None else ""
        lines.append(f"  {parent} -> {name}{attr};")
        if isinstance(node, core.Working):
            for b, child in node.edges:
                emit(child, name, b)

    for child in tree.children:
        emit(child, "root", None)
    lines.append("}")
    return "\n".join(lines) + "\n"


def _tuple_text(t) -> str:
    return "".join(map(str, t))


class Report:
    def __init__(self, command: str, inputs: dict):
        self.command = command
        self.inputs = inputs
        self.lines: list[str] = []
        self.results: dict = {}

    def line(self, text: str) -> None:
        self.lines.append(text)

    def block(self) -> str:
        payload = {"command": self.command, "inputs": self.inputs,
                   "results": self.results, "version": __version__}
        return json.dumps(payload, indent=2, sort_keys=True)

    def render(self) -> str:
        return "\n".join(self.lines + ["```json", self.block(), "```"]) + "\n"


def parse_report_block(text: str) -> dict:
    """The machine-readable block of a rendered report."""
    start = text.rindex("```json\n") + len("```json\n")
    end = text.index("```", start)
    return json.loads(text[start:end])


def _digest(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def _load(args) -> tuple[ProblemFile, str]:
    if args.problem:
        with open(args.problem, encoding="utf-8") as fh:
            text = fh.read()
        pf = ProblemFile.from_json(text)
        if args.system and systems.builtin(args.system).id != pf.system and pf.system != "custom":
            raise ValueError(f"--system {args.system} disagrees with the problem file ({pf.system})")
        return pf, text
    if args.hardest is None or not args.system:
        raise ValueError("give --problem, or --system with --hardest N")
    pf = hardest_file(args.system, args.hardest)
    return pf, pf.to_json()


def _pool_for(pf: ProblemFile, problem: core.Problem, mode: str) -> solvers.Pool:
    if mode == "local":
        return solvers.Pool.local(problem)
    extra = pf.pool_list()
    if mode == "file":
        if extra is None:
            raise ValueError("--pool file needs a 'pool' list in the problem file")
        return solvers.Pool("custom", extra)
    if extra is None:
        covers = systems.certificate_covers(pf.system, problem)
        extra = systems.cover_attributes(covers)
    return solvers.Pool.extended(problem, extra)


def cmd_solve(args, report: Report) -> int:
    pf, text = _load(args)
    report.inputs = {"problem_sha256": _digest(text), "objective": args.objective,
                     "mode": args.mode, "pool": args.pool,
                     "oracle": args.oracle, "budget": args.budget if args.oracle else None}
    problem = pf.problem()
    pool = _pool_for(pf, problem, args.pool)
    universe = pf.universe(tuple(dict.fromkeys(problem.attributes + pool.attributes)))
    if args.oracle:
        res = solvers.exhaustive_min(problem, pool, universe, args.objective, args.mode, args.budget)
    elif args.mode == "det":
        solver = solvers.min_depth_det if args.objective == "depth" else solvers.min_nodes_det
        res = solver(problem, pool, universe)
    elif args.objective == "depth":
        res = solvers.min_depth_nondet(problem, pool, universe)
    else:
        raise ValueError("nondeterministic node minimization is available only with --oracle")
    tree_text = core.to_text(res.witness_tree)
    report.line(f"value: {res.value}")
    report.line(f"tree: {tree_text}")
    report.line(f"explored_states: {res.explored_states}")
    report.results = {"value": res.value, "tree": tree_text, "explored_states": res.explored_states,
                      "objective": res.objective, "mode": res.mode}
    return EXIT_OK


def _attr_args(args) -> tuple:
    return tuple(systems.make_attribute(args.system, a) for a in args.attributes)


def cmd_count(args, report: Report) -> int:
    attrs = _attr_args(args)
    universe = systems.witness_universe(args.system, attrs)
    tuples = universe.realizable(attrs)
    report.inputs = {"system": systems.builtin(args.system).id, "attributes": [str(a) for a in attrs]}
    report.line(f"N: {len(tuples)}")
    report.line("tuples: " + " ".join(_tuple_text(t) for t in tuples))
    report.results = {"N": len(tuples), "tuples": [_tuple_text(t) for t in tuples]}
    return EXIT_OK


def cmd_idim(args, report: Report) -> int:
    attrs = _attr_args(args)
    rep = structure.independence_dimension(attrs, systems.witness_universe(args.system, attrs))
    report.inputs = {"system": systems.builtin(args.system).id, "attributes": [str(a) for a in attrs]}
    subset = [str(a) for a in rep.witness_subset]
    report.line(f"dimension: {rep.dimension}")
    report.line("witness subset: " + (" ".join(subset) or "(empty)"))
    report.results = {"dimension": rep.dimension, "witness_subset": subset,
                      "checked_family_size": rep.checked_family_size}
    return EXIT_OK


def cmd_classify(args, report: Report) -> int:
    desc = systems.builtin(args.system)
    row = structure.classify_declared(desc)
    check = structure.consistency_check(desc, args.probe)
    report.inputs = {"system": desc.id, "probe": args.probe}
    report.line(f"row: {row.row} ({', '.join(row.type_tuple)})")
    for f in check.findings:
        report.line(f"finding: {f}")
    report.line("consistent" if check.consistent else "INCONSISTENT")
    report.results = {"row": row.row, "types": list(row.type_tuple),
                      "findings": list(check.findings), "observations": check.observations}
    return EXIT_OK if check.consistent else EXIT_FAIL


def cmd_construct(args, report: Report) -> int:
    pf, text = _load(args)
    report.inputs = {"problem_sha256": _digest(text), "method": args.method}
    problem = pf.problem()
    method = args.method
    if method == "pruned-full":
        universe = pf.universe(problem.attributes)
        tree, det = constructions.pruned_full_tree(problem, universe), True
    elif method == "binary-search":
        universe = pf.universe(problem.attributes)
        tree, det = constructions.binary_search_tree(problem), True
    elif method == "u6-mixed":
        added = constructions.u6_added_attributes(problem)
        universe = pf.universe(tuple(problem.attributes) + added)
        tree, det = constructions.u6_mixed_tree(problem), True
    elif method == "u2-depth1":
        covers = systems.certificate_covers("U2", problem)
        universe = pf.universe(tuple(problem.attributes) + systems.cover_attributes(covers))
        tree, det = constructions.u2_nondet_depth1(problem), False
    else:
        covers = systems.certificate_covers(pf.system, problem)
        universe = pf.universe(tuple(problem.attributes) + systems.cover_attributes(covers))
        tree, det = constructions.cover_nondet_tree(problem, covers, universe), False
    ok = (core.solves_det if det else core.solves_nondet)(tree, problem, universe)
    if not ok:
        raise ValidationFailure(f"{method} output does not solve the problem")
    m = core.metrics(tree)
    tree_text = core.to_text(tree)
    report.line(f"depth: {m.depth}  L: {m.nodes}  L_t: {m.terminals}  L_w: {m.working}")
    report.line(f"tree: {tree_text}")
    report.results = {"depth": m.depth, "nodes": m.nodes, "terminals": m.terminals,
                      "working": m.working, "tree": tree_text,
                      "deterministic": core.is_deterministic(tree)}
    if args.dot:
        with open(args.dot, "w", encoding="utf-8") as fh:
            fh.write(to_dot(tree))
        report.line(f"dot written: {args.dot}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# Verification suites
# ---------------------------------------------------------------------------

class Suite:
    def __init__(self):
        self.cases: list[dict] = []

    def check(self, case: str, observed, expected, ok=None) -> None:
        ok = observed == expected if ok is None else ok
        self.cases.append({"case": case, "observed": observed, "expected": expected,
                           "status": "PASS" if ok else "FAIL"})


def suite_lemma6(max_n: int, s: Suite) -> None:
    for sid in ("U1", "U2", "U3", "U4", "U5"):
        for n in range(1, max_n + 1):
            for q in solvers.QUANTITIES:
                s.check(f"{sid} n={n} {q}", solvers.compute_worst_case(sid, n, q),
                        solvers.closed_form(sid, n, q))
            s.check(f"{sid} n={n} N", solvers.n_u_worst(sid, n),
                    n + 1 if sid in ("U1", "U2", "U3") else 2 ** n)
    for n in range(1, max_n + 1):
        problem = systems.hardest_problem("U2", n)
        tree = constructions.u2_nondet_depth1(problem)
        scope = tuple(problem.attributes) + core.tree_attributes(tree)
        ok = core.solves_nondet(tree, problem, systems.witness_universe("U2", scope))
        s.check(f"U2 n={n} depth-1 cover tree", core.metrics(tree).depth, 1, ok and
                core.metrics(tree).depth == 1)
        problem = systems.hardest_problem("U4", n)
        covers = systems.certificate_covers("U4", problem)
        universe = systems.witness_universe(
            "U4", tuple(problem.attributes) + systems.cover_attributes(covers))
        tree = constructions.cover_nondet_tree(problem, covers, universe)
        ok = core.solves_nondet(tree, problem, universe)
        s.check(f"U4 n={n} depth-1 cover tree", core.metrics(tree).depth, 1,
                ok and core.metrics(tree).depth == 1)


def _small_problems(max_len: int):
    """Injective problems with up to ``max_len`` attributes drawn from small U1/U3 families."""
    for sid, family in (("U1", [core.l(i) for i in (1, 2, 3)]),
                        ("U3", [core.p(i) for i in (1, 2, 3)])):
        for k in range(1, max_len + 1):
            for attrs in product(family, repeat=k):
                universe = systems.witness_universe(sid, attrs)
                yield sid, core.Problem.injective(attrs, universe), universe


def suite_prop5(max_n: int, s: Suite) -> None:
    for sid, problem, universe in _small_problems(min(max_n, 3)):
        name = f"{sid} {' '.join(a.short for a in problem.attributes)}"
        two_n = 2 * len(universe.realizable(problem.attributes))
        for mode in ("det", "nondet"):
            value = solvers.exhaustive_min(problem, problem.attributes, universe,
                                           "nodes", mode, 8).value
            s.check(f"{name} oracle {mode} L", value, two_n)
    for sid in ("U1", "U2", "U3", "U4", "U5", "U6", "U7"):
        for n in range(1, max_n + 1):
            problem = systems.hardest_problem(sid, n)
            universe = systems.witness_universe(sid, problem.attributes)
            value = solvers.min_nodes_det(problem, problem.attributes, universe).value
            s.check(f"{sid} n={n} L^d = 2N", value, 2 * solvers.n_u_worst(sid, n))


def suite_prop6(max_n: int, s: Suite) -> None:
    for sid in systems.SYSTEM_IDS:
        desc = systems.builtin(sid)
        for n in range(1, max_n + 1):
            count = solvers.n_u_worst(sid, n)
            if desc.idim is None:
                s.check(f"{sid} n={n} N = 2^n", count, 2 ** n)
            else:
                bound = (4 * n) ** desc.idim
                s.check(f"{sid} n={n} {n + 1} <= N <= {bound}", count,
                        f"[{n + 1}, {bound}]", n + 1 <= count <= bound)


def suite_table1(max_n: int, s: Suite) -> None:
    expected = {(True, True, True): 1, (True, False, True): 2, (False, False, True): 3,
                (True, True, False): 4, (True, False, False): 4, (False, False, False): 5}
    for flags, row in expected.items():
        s.check(f"flags {flags} row", structure.classify_flags(*flags).row, row)
    try:
        structure.classify_flags(False, True, True)
        s.check("flags (False, True, True) rejected", "accepted", "rejected")
    except DTError:
        s.check("flags (False, True, True) rejected", "rejected", "rejected")
    for sid in systems.SYSTEM_IDS:
        desc = systems.builtin(sid)
        s.check(f"{sid} declared row", structure.classify_declared(desc).row, desc.class_row)
        rep = structure.consistency_check(desc, min(max_n, 6))
        s.check(f"{sid} probes consistent", list(rep.findings), [])


def suite_structural(max_n: int, s: Suite) -> None:
    for sid, problem, universe in _small_problems(min(max_n, 3)):
        res = solvers.exhaustive_min(problem, problem.attributes, universe, "nodes", "det", 8)
        name = f"{sid} {' '.join(a.short for a in problem.attributes)}"
        s.check(f"{name} optimal tree structure",
                structure.optimal_tree_violations(res.witness_tree, universe), [])
    rng = random.Random(20240601)
    attrs = [core.l(1), core.l(2), core.p(3)]
    bad = []
    for i in range(1000):
        tree = structure.random_tree(rng, attrs, [1, 2, 3], 3, nondet=i % 2 == 0)
        bad.extend(structure.lemma_violations(tree))
    s.check("1000 random trees: working/terminal relations", bad, [])


SUITES = {"lemma6": suite_lemma6, "prop5": suite_prop5, "prop6": suite_prop6,
          "table1": suite_table1, "structural": suite_structural}


def cmd_verify(args, report: Report) -> int:
    s = Suite()
    SUITES[args.suite](args.max_n, s)
    report.inputs = {"suite": args.suite, "max_n": args.max_n}
    for c in s.cases:
        report.line(f"{c['status']}  {c['case']}: observed {c['observed']}, expected {c['expected']}")
    failed = sum(c["status"] == "FAIL" for c in s.cases)
    report.line(f"{len(s.cases) - failed} passed, {failed} failed")
    report.results = {"cases": s.cases, "passed": len(s.cases) - failed, "failed": failed}
    return EXIT_FAIL if failed else EXIT_OK


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dtlab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def problem_args(p):
        p.add_argument("--system")
        p.add_argument("--problem", help="JSON problem file")
        p.add_argument("--hardest", type=int, metavar="N",
                       help="use the built-in hardest problem of dimension N")

    p = sub.add_parser("solve", help="minimum depth or node count")
    problem_args(p)
    p.add_argument("--objective", choices=("depth", "nodes"), default="depth")
    p.add_argument("--mode", choices=("det", "nondet"), default="det")
    p.add_argument("--pool", choices=("local", "extended", "file"), default="local",
                   help="file: exactly the problem file's pool, which may omit problem attributes")
    p.add_argument("--oracle", action="store_true", help="use exhaustive enumeration")
    p.add_argument("--budget", type=int, default=8, help="node budget for --oracle")

    for name, help_text in (("count", "realizable tuple count"), ("idim", "independence dimension")):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--system", required=True)
        p.add_argument("--attributes", nargs="+", required=True)

    p = sub.add_parser("classify", help="class row and consistency probes")
    p.add_argument("--system", required=True)
    p.add_argument("--probe", type=int, default=6)

    p = sub.add_parser("construct", help="build a tree by a fixed construction")
    problem_args(p)
    p.add_argument("--method", required=True,
                   choices=("pruned-full", "binary-search", "cover", "u2-depth1", "u6-mixed"))
    p.add_argument("--dot", help="write the tree as Graphviz DOT")

    p = sub.add_parser("verify", help="run a verification suite")
    p.add_argument("--suite", required=True, choices=tuple(SUITES))
    p.add_argument("--max-n", type=int, default=4)
    return parser


COMMANDS = {"solve": cmd_solve, "count": cmd_count, "idim": cmd_idim,
            "classify": cmd_classify, "construct": cmd_construct, "verify": cmd_verify}


def run(argv: list[str]) -> tuple[int, str]:
    """Execute a command; returns the exit code and the rendered output."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return (EXIT_PARSE if exc.code else EXIT_OK), ""
    report = Report(" ".join(["dtlab"] + argv), {})
    try:
        code = COMMANDS[args.command](args, report)
    except (CapacityError, BudgetExhaustedError) as exc:
        return EXIT_CAP, f"error: {exc}\n"
    except UnsolvableError as exc:
        return EXIT_UNSOLVABLE, f"error: {exc}\n"
    except (ClosedFormMismatch, ValidationFailure) as exc:
        return EXIT_INTERNAL, f"internal validation failed: {exc}\n"
    except (DTError, ValueError, TypeError, KeyError, OSError) as exc:
        return EXIT_PARSE, f"error: {exc}\n"
    return code, report.render()


def main(argv: list[str] | None = None) -> int:
    code, out = run(sys.argv[1:] if argv is None else list(argv))
    stream = sys.stdout if code in (EXIT_OK, EXIT_FAIL) else sys.stderr
    stream.write(out)
    return code
