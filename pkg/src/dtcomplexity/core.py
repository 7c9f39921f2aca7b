"""Problems, decision trees and their exact semantics over a finite witness universe.

Objects of the (infinite) universe are encoded as plain Python values:

* ``int`` for naturals and integers,
* ``fractions.Fraction`` for non-negative rationals,
* ``tuple`` of bits for finite-support binary sequences (trailing zeros stripped).

All set-valued computations run on bitmasks over the witness objects of a
:class:`WitnessUniverse`, in the universe's canonical object order.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from types import MappingProxyType
from typing import Iterator, Mapping, Sequence, Union

from .errors import (
    DomainMismatchError,
    InvalidAttributeError,
    ScopeError,
    UndefinedDecisionError,
)

Obj = Union[int, Fraction, tuple]

FAMILIES = ("P", "L", "Q", "BIT", "SEQ", "TABLE", "IND")
_INDEXED = ("P", "L", "Q", "BIT", "SEQ")


def object_key(obj: Obj):
    """Canonical total order on witness objects: numbers first, then sequences."""
    if isinstance(obj, tuple):
        return (1, obj)
    return (0, obj)


def normalize_sequence(bits: Sequence[int]) -> tuple:
    bits = list(bits)
    while bits and bits[-1] == 0:
        bits.pop()
    return tuple(bits)


def format_object(obj: Obj) -> str:
    if isinstance(obj, tuple):
        return "s" + "".join(str(b) for b in obj)
    if isinstance(obj, Fraction) and obj.denominator != 1:
        return f"{obj.numerator}/{obj.denominator}"
    return str(int(obj))


def parse_object(text: str) -> Obj:
    text = text.strip()
    if text.startswith("s"):
        return normalize_sequence(int(c) for c in text[1:])
    if "/" in text:
        value = Fraction(text)
        return int(value) if value.denominator == 1 else value
    return int(text)


def _is_number(obj) -> bool:
    return isinstance(obj, (int, Fraction)) and not isinstance(obj, bool)


# ---------------------------------------------------------------------------
# Attributes
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Attribute:
    """A {0,1}-valued attribute from one of the built-in families.

    ``P``/``L``/``Q``/``BIT``/``SEQ`` are indexed families. ``TABLE`` holds a
    finite map; unlisted positive objects evaluate to 0 and unlisted
    non-positive objects to ``tail``. ``IND`` is the indicator of the solution
    set of ``constraints``.
    """

    family: str
    index: int = 0
    table: tuple | None = None
    tail: int = 0
    constraints: tuple | None = None
    _lookup: dict = field(default=None, init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise InvalidAttributeError(f"unknown attribute family {self.family!r}")
        if self.family in _INDEXED:
            if not isinstance(self.index, int) or self.index < 1:
                raise InvalidAttributeError(f"{self.family} index must be a positive integer")
            if self.table is not None or self.constraints is not None:
                raise InvalidAttributeError(f"{self.family} attribute takes only an index")
        elif self.family == "TABLE":
            items = dict(self.table or ())
            if any(bit not in (0, 1) for bit in items.values()) or self.tail not in (0, 1):
                raise InvalidAttributeError("table values must be bits")
            for key in items:
                if not _is_number(key):
                    raise InvalidAttributeError(f"table keys must be numbers, got {key!r}")
            ordered = tuple(sorted(items.items(), key=lambda kv: object_key(kv[0])))
            object.__setattr__(self, "table", ordered)
            object.__setattr__(self, "_lookup", dict(ordered))
        else:
            cons = tuple((a, int(b)) for a, b in (self.constraints or ()))
            if any(b not in (0, 1) or not isinstance(a, Attribute) for a, b in cons):
                raise InvalidAttributeError("indicator constraints must be (Attribute, bit) pairs")
            object.__setattr__(self, "constraints", cons)

    @property
    def short(self) -> str:
        """Compact name used in the tree text form, e.g. ``l2`` or ``bit3``."""
        if self.family in _INDEXED:
            return f"{self.family.lower()}{self.index}"
        return str(self).replace(":", "", 1)

    def __str__(self):
        if self.family in _INDEXED:
            return f"{self.family.lower()}:{self.index}"
        if self.family == "TABLE":
            parts = [f"{format_object(k)}={v}" for k, v in self.table]
            if self.tail:
                parts.append(f"*={self.tail}")
            return "table:{" + ",".join(parts) + "}"
        return "ind:{" + ",".join(f"{a}={b}" for a, b in self.constraints) + "}"


def p(i: int) -> Attribute:
    return Attribute("P", i)


def l(i: int) -> Attribute:  # noqa: E743
    return Attribute("L", i)


def q(i: int) -> Attribute:
    return Attribute("Q", i)


def bit(j: int) -> Attribute:
    return Attribute("BIT", j)


def seq(i: int) -> Attribute:
    return Attribute("SEQ", i)


def table(mapping: Mapping[Obj, int], tail: int = 0) -> Attribute:
    return Attribute("TABLE", table=tuple(mapping.items()), tail=tail)


def indicator(constraints: Sequence[tuple[Attribute, int]]) -> Attribute:
    return Attribute("IND", constraints=tuple(constraints))


def _split_top(text: str, sep: str) -> list[str]:
    parts, depth, start = [], 0, 0
    for i, ch in enumerate(text):
        if ch == "{":
            depth += 1
        elif ch == "}":
            depth -= 1
        elif ch == sep and depth == 0:
            parts.append(text[start:i])
            start = i + 1
    parts.append(text[start:])
    return [s for s in parts if s.strip()]


_INDEXED_RE = re.compile(r"^(p|l|q|bit|seq):?(\d+)$")


def parse_attribute(text: str) -> Attribute:
    """Parse ``p:<i>``, ``l:<i>``, ``q:<i>``, ``bit:<j>``, ``seq:<i>``,
    ``table:{obj=bit,...,*=tail}`` or ``ind:{attr=bit,...}``.

    The colon may be omitted (``l2``), which is the form used inside trees.
    """
    text = text.strip()
    m = _INDEXED_RE.match(text)
    if m:
        return Attribute(m.group(1).upper(), int(m.group(2)))
    for prefix, family in (("table", "TABLE"), ("ind", "IND")):
        if text.startswith(prefix):
            body = text[len(prefix):].lstrip(":")
            if not (body.startswith("{") and body.endswith("}")):
                break
            entries = []
            for item in _split_top(body[1:-1], ","):
                key, sep, value = item.rpartition("=")
                if not sep or value.strip() not in ("0", "1"):
                    raise InvalidAttributeError(f"bad entry {item!r} in {text!r}")
                entries.append((key.strip(), int(value)))
            try:
                if family == "TABLE":
                    tail = 0
                    mapping = {}
                    for key, value in entries:
                        if key == "*":
                            tail = value
                        else:
                            mapping[parse_object(key)] = value
                    return table(mapping, tail)
                return indicator([(parse_attribute(k), v) for k, v in entries])
            except ValueError as exc:
                raise InvalidAttributeError(f"bad attribute {text!r}: {exc}") from None
    raise InvalidAttributeError(f"cannot parse attribute {text!r}")


def eval_attribute(attr: Attribute, obj: Obj) -> int:
    fam = attr.family
    if fam == "SEQ":
        if not isinstance(obj, tuple):
            raise DomainMismatchError(f"{attr} needs a sequence object, got {obj!r}")
        return obj[attr.index - 1] if attr.index <= len(obj) else 0
    if fam == "IND":
        return int(all(eval_attribute(a, obj) == b for a, b in attr.constraints))
    if not _is_number(obj):
        raise DomainMismatchError(f"{attr} needs a numeric object, got {obj!r}")
    if fam == "P":
        return int(obj == attr.index)
    if fam == "L":
        return int(obj > attr.index)
    if fam == "Q":
        return int(2 * obj >= 2 * attr.index + 1)
    if fam == "BIT":
        if not isinstance(obj, int) or obj < 1:
            raise DomainMismatchError(f"{attr} needs a natural number, got {obj!r}")
        return ((obj - 1) >> (attr.index - 1)) & 1
    # TABLE
    value = attr._lookup.get(obj)
    if value is not None:
        return value
    return 0 if obj > 0 else attr.tail


def base_attributes(attr: Attribute) -> Iterator[Attribute]:
    """Yield ``attr`` and, for indicators, every attribute it is built from."""
    yield attr
    if attr.family == "IND":
        for inner, _ in attr.constraints:
            yield from base_attributes(inner)


# ---------------------------------------------------------------------------
# Witness universe
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WitnessUniverse:
    """Finite stand-in for the universe, complete for equation systems over ``scope``.

    Objects are stored in canonical order; ``masks`` maps every scope attribute
    to the bitmask of objects on which it equals 1.
    """

    objects: tuple
    scope: tuple
    masks: Mapping = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        objs = tuple(sorted(dict.fromkeys(self.objects), key=object_key))
        scope = tuple(dict.fromkeys(self.scope))
        object.__setattr__(self, "objects", objs)
        object.__setattr__(self, "scope", scope)
        masks = {}
        for attr in scope:
            m = 0
            for i, obj in enumerate(objs):
                if eval_attribute(attr, obj):
                    m |= 1 << i
            masks[attr] = m
        object.__setattr__(self, "masks", MappingProxyType(masks))

    def __len__(self):
        return len(self.objects)

    @property
    def full(self) -> int:
        return (1 << len(self.objects)) - 1

    def mask(self, attr: Attribute, value: int = 1) -> int:
        try:
            m = self.masks[attr]
        except KeyError:
            raise ScopeError(f"attribute {attr} is outside the witness universe scope") from None
        return m if value else self.full & ~m

    def solutions(self, system: Sequence[tuple[Attribute, int]]) -> int:
        """Bitmask of the objects satisfying every equation of ``system``."""
        m = self.full
        for attr, value in system:
            m &= self.mask(attr, value)
        return m

    def objects_in(self, mask: int) -> tuple:
        return tuple(obj for i, obj in enumerate(self.objects) if mask >> i & 1)

    def signature_of(self, index: int, attrs: Sequence[Attribute]) -> tuple:
        return tuple(self.mask(a) >> index & 1 for a in attrs)

    def realizable(self, attrs: Sequence[Attribute]) -> list[tuple]:
        """Distinct value tuples of ``attrs`` over the witness objects, sorted."""
        return sorted({self.signature_of(i, attrs) for i in range(len(self.objects))})

    @property
    def duplicate_signatures(self) -> bool:
        """True when two objects agree on every scope attribute."""
        sigs = [self.signature_of(i, self.scope) for i in range(len(self.objects))]
        return len(set(sigs)) != len(sigs)


# ---------------------------------------------------------------------------
# Problems
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Problem:
    """``z = (nu, f_1, ..., f_n)``: decisions keyed by attribute-value tuples."""

    attributes: tuple
    decisions: Mapping

    def __post_init__(self):
        attrs = tuple(self.attributes)
        n = len(attrs)
        decisions = {}
        for key, value in dict(self.decisions).items():
            key = tuple(int(b) for b in key)
            if len(key) != n or any(b not in (0, 1) for b in key):
                raise ValueError(f"decision key {key} does not match {n} attributes")
            if not isinstance(value, int) or isinstance(value, bool) or value < 1:
                raise ValueError(f"decisions must be positive naturals, got {value!r}")
            decisions[key] = value
        object.__setattr__(self, "attributes", attrs)
        object.__setattr__(self, "decisions", MappingProxyType(dict(sorted(decisions.items()))))

    @property
    def dim(self) -> int:
        return len(self.attributes)

    def decide(self, values: tuple) -> int:
        try:
            return self.decisions[tuple(values)]
        except KeyError:
            raise UndefinedDecisionError(f"no decision for tuple {tuple(values)}") from None

    @classmethod
    def injective(cls, attributes: Sequence[Attribute], universe: WitnessUniverse) -> "Problem":
        """Distinct decisions 1..N over the realizable tuples, in lexicographic order."""
        tuples = universe.realizable(attributes)
        return cls(tuple(attributes), {t: i + 1 for i, t in enumerate(tuples)})


def signature(problem: Problem, obj: Obj) -> tuple:
    return tuple(eval_attribute(a, obj) for a in problem.attributes)


def decision_masks(problem: Problem, universe: WitnessUniverse) -> dict[int, int]:
    """Map each decision to the mask of witness objects carrying it."""
    out: dict[int, int] = {}
    for i in range(len(universe.objects)):
        d = problem.decide(universe.signature_of(i, problem.attributes))
        out[d] = out.get(d, 0) | (1 << i)
    return out


# ---------------------------------------------------------------------------
# Decision trees
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Leaf:
    decision: int
    tag: str | None = field(default=None, compare=False)

    def __post_init__(self):
        if not isinstance(self.decision, int) or self.decision < 1:
            raise ValueError(f"terminal labels must be positive naturals, got {self.decision!r}")


@dataclass(frozen=True)
class Working:
    attribute: Attribute
    edges: tuple  # ((bit, child), ...)
    tag: str | None = field(default=None, compare=False)

    def __post_init__(self):
        edges = tuple((int(b), c) for b, c in self.edges)
        if not edges:
            raise ValueError("a working node needs at least one outgoing edge")
        if any(b not in (0, 1) for b, _ in edges):
            raise ValueError("edge labels must be 0 or 1")
        object.__setattr__(self, "edges", edges)


Node = Union[Leaf, Working]


@dataclass(frozen=True)
class DecisionTree:
    """A rooted tree; ``children`` are the targets of the unlabeled root edges."""

    children: tuple
    tag: str | None = field(default=None, compare=False)

    def __post_init__(self):
        children = tuple(self.children)
        if not children:
            raise ValueError("the root needs at least one outgoing edge")
        object.__setattr__(self, "children", children)

    def __str__(self):
        return to_text(self)


def branch(attr: Attribute, zero: Node | None = None, one: Node | None = None) -> Working:
    """Working node with a 0-edge and/or a 1-edge."""
    edges = []
    if zero is not None:
        edges.append((0, zero))
    if one is not None:
        edges.append((1, one))
    return Working(attr, tuple(edges))


def single(node: Node) -> DecisionTree:
    return DecisionTree((node,))


@dataclass(frozen=True)
class CompletePath:
    """Root-to-terminal path: the tests along it, its terminal label, its address."""

    steps: tuple
    decision: int
    address: tuple

    @property
    def length(self) -> int:
        return len(self.steps)


@dataclass(frozen=True)
class TreeMetrics:
    depth: int
    nodes: int
    terminals: int
    working: int


def _child_nodes(node) -> tuple:
    if isinstance(node, DecisionTree):
        return node.children
    if isinstance(node, Working):
        return tuple(c for _, c in node.edges)
    return ()


def iter_nodes(tree: DecisionTree) -> Iterator[tuple[tuple, Node]]:
    """Preorder (address, node) pairs for every non-root node."""
    stack = [((i,), c) for i, c in reversed(list(enumerate(tree.children)))]
    while stack:
        addr, node = stack.pop()
        yield addr, node
        if isinstance(node, Working):
            for j in reversed(range(len(node.edges))):
                stack.append((addr + (j,), node.edges[j][1]))


def subtree_at(tree: DecisionTree, address: Sequence[int]) -> Node:
    """Node entered by the edge at ``address`` (root-edge index, then edge indices)."""
    if not address:
        raise ValueError("empty edge address")
    node = tree.children[address[0]]
    for j in address[1:]:
        if not isinstance(node, Working):
            raise ValueError(f"address {tuple(address)} runs past a terminal")
        node = node.edges[j][1]
    return node


def complete_paths(tree: DecisionTree) -> Iterator[CompletePath]:
    def walk(node, steps, addr):
        if isinstance(node, Leaf):
            yield CompletePath(tuple(steps), node.decision, addr)
            return
        for j, (b, child) in enumerate(node.edges):
            yield from walk(child, steps + [(node.attribute, b)], addr + (j,))

    for i, child in enumerate(tree.children):
        yield from walk(child, [], (i,))


def tree_attributes(tree: DecisionTree) -> tuple:
    return tuple(dict.fromkeys(n.attribute for _, n in iter_nodes(tree) if isinstance(n, Working)))


def path_mask(path: CompletePath, universe: WitnessUniverse) -> int:
    return universe.solutions(path.steps)


def path_set(tree: DecisionTree, path: CompletePath, universe: WitnessUniverse) -> tuple:
    """Witness objects of A(path), in canonical order."""
    node = subtree_at(tree, path.address)
    if not isinstance(node, Leaf) or node.decision != path.decision:
        raise ValueError("path is not a complete path of this tree")
    return universe.objects_in(path_mask(path, universe))


def _leaf_masks(tree: DecisionTree, universe: WitnessUniverse) -> Iterator[tuple[int, int]]:
    """(A(path) mask, terminal label) for every complete path, without materializing paths."""
    def walk(node, mask):
        if isinstance(node, Leaf):
            yield mask, node.decision
            return
        ones = universe.mask(node.attribute)
        for b, child in node.edges:
            yield from walk(child, mask & (ones if b else universe.full & ~ones))

    for child in tree.children:
        yield from walk(child, universe.full)


def is_deterministic(tree: DecisionTree) -> bool:
    if len(tree.children) != 1:
        return False
    for _, node in iter_nodes(tree):
        if isinstance(node, Working):
            labels = [b for b, _ in node.edges]
            if len(set(labels)) != len(labels):
                return False
    return True


def solves_nondet(tree: DecisionTree, problem: Problem, universe: WitnessUniverse) -> bool:
    """Every object is on some complete path, and every path through it ends in z(object)."""
    by_decision = decision_masks(problem, universe)
    covered = 0
    for mask, label in _leaf_masks(tree, universe):
        if mask & ~by_decision.get(label, 0):
            return False
        covered |= mask
    return covered == universe.full


def solves_det(tree: DecisionTree, problem: Problem, universe: WitnessUniverse) -> bool:
    return is_deterministic(tree) and solves_nondet(tree, problem, universe)


def metrics(tree: DecisionTree) -> TreeMetrics:
    terminals = working = 0
    for _, node in iter_nodes(tree):
        if isinstance(node, Leaf):
            terminals += 1
        else:
            working += 1

    def depth(node):
        if isinstance(node, Leaf):
            return 0
        return 1 + max(depth(c) for _, c in node.edges)

    h = max(depth(c) for c in tree.children)
    return TreeMetrics(depth=h, nodes=1 + terminals + working, terminals=terminals, working=working)


def is_in_gd2(tree: DecisionTree) -> bool:
    """Deterministic with exactly two outgoing edges at every working node."""
    if not is_deterministic(tree):
        return False
    return all(len(n.edges) == 2 for _, n in iter_nodes(tree) if isinstance(n, Working))


def is_full(node: Node) -> bool:
    """Whether pruning some edges leaves a complete 0/1-branching tree ending in terminals."""
    if isinstance(node, Leaf):
        return True
    return all(
        any(b == want and is_full(c) for b, c in node.edges) for want in (0, 1)
    )


def is_full_subtree(tree: DecisionTree, edge: Sequence[int]) -> bool:
    return is_full(subtree_at(tree, edge))


def in_gaf(tree: DecisionTree) -> bool:
    """No node with two or more equally labeled (or root) edges has a full subtree below them."""
    if len(tree.children) >= 2 and any(is_full(c) for c in tree.children):
        return False
    for _, node in iter_nodes(tree):
        if isinstance(node, Working):
            for label in (0, 1):
                group = [c for b, c in node.edges if b == label]
                if len(group) >= 2 and any(is_full(c) for c in group):
                    return False
    return True


def unrealizable_nodes(tree: DecisionTree, universe: WitnessUniverse) -> list[tuple]:
    """Addresses of nodes through which no complete path has a nonempty A(path)."""
    bad: list[tuple] = []

    def walk(node, mask, addr):
        if isinstance(node, Leaf):
            ok = mask != 0
        else:
            ones = universe.mask(node.attribute)
            ok = False
            for j, (b, child) in enumerate(node.edges):
                sub = mask & (ones if b else universe.full & ~ones)
                ok = walk(child, sub, addr + (j,)) or ok
        if not ok:
            bad.append(addr)
        return ok

    for i, child in enumerate(tree.children):
        walk(child, universe.full, (i,))
    return bad


def tag_nodes(tree: DecisionTree) -> DecisionTree:
    """Copy of ``tree`` with preorder ids ``n0`` (root), ``n1``, ... as node tags."""
    counter = iter(range(1, 1 << 62))

    def retag(node):
        tag = f"n{next(counter)}"
        if isinstance(node, Leaf):
            return Leaf(node.decision, tag)
        edges = tuple((b, retag(c)) for b, c in node.edges)
        return Working(node.attribute, edges, tag)

    return DecisionTree(tuple(retag(c) for c in tree.children), "n0")


# ---------------------------------------------------------------------------
# Text form
# ---------------------------------------------------------------------------

def to_text(tree: DecisionTree) -> str:
    """Nested form, e.g. ``(root (f:l2 0=(leaf 1) 1=(leaf 2)))``."""
    def node_text(node):
        if isinstance(node, Leaf):
            return f"(leaf {node.decision})"
        edges = " ".join(f"{b}={node_text(c)}" for b, c in node.edges)
        return f"(f:{node.attribute.short} {edges})"

    return "(root " + " ".join(node_text(c) for c in tree.children) + ")"


class _TreeParser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def error(self, msg):
        raise ValueError(f"tree text, position {self.pos}: {msg}")

    def skip(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def expect(self, s):
        self.skip()
        if not self.text.startswith(s, self.pos):
            self.error(f"expected {s!r}")
        self.pos += len(s)

    def peek(self, s):
        self.skip()
        return self.text.startswith(s, self.pos)

    def token(self):
        self.skip()
        start, depth = self.pos, 0
        while self.pos < len(self.text):
            ch = self.text[self.pos]
            if ch == "{":
                depth += 1
            elif ch == "}":
                depth -= 1
            elif depth == 0 and (ch.isspace() or ch in "()"):
                break
            self.pos += 1
        if start == self.pos:
            self.error("expected a token")
        return self.text[start:self.pos]

    def tree(self):
        self.expect("(")
        self.expect("root")
        children = []
        while not self.peek(")"):
            children.append(self.node())
        self.expect(")")
        self.skip()
        if self.pos != len(self.text):
            self.error("trailing characters")
        if not children:
            self.error("root without edges")
        return DecisionTree(tuple(children))

    def node(self):
        self.expect("(")
        if self.peek("leaf"):
            self.expect("leaf")
            value = self.token()
            self.expect(")")
            if not value.isdigit():
                self.error(f"bad terminal label {value!r}")
            return Leaf(int(value))
        self.expect("f:")
        attr = parse_attribute(self.token())
        edges = []
        while not self.peek(")"):
            self.skip()
            label = self.text[self.pos:self.pos + 1]
            if label not in ("0", "1"):
                self.error("expected edge label 0 or 1")
            self.pos += 1
            self.expect("=")
            edges.append((int(label), self.node()))
        self.expect(")")
        if not edges:
            self.error("working node without edges")
        return Working(attr, tuple(edges))


def parse_tree(text: str) -> DecisionTree:
    return _TreeParser(text).tree()
