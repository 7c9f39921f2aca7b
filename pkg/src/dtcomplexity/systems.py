"""Built-in infinite binary information systems U1..U7.

Each system is described by a :class:`SystemDescriptor` carrying its declared
coverage / restricted-coverage / I-dimension flags. The infinite universe is
replaced, per attribute list, by a finite :class:`~dtcomplexity.core.WitnessUniverse`
holding one representative for every realizable value tuple.

Desk-scale realizations:

* U4 (all functions N -> {0,1}) uses bit attributes ``bit:j`` (j-th bit of a-1),
  finite tables over N, and indicators of equation systems over those.
* U5 objects are finite-support bit sequences.
* U6 objects are exact ``Fraction`` values, never floats.
* U7 tables are zero on N and equal to ``tail`` outside their listed keys on Z \\ N.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from . import core
from .core import Attribute, Problem, WitnessUniverse
from .errors import CapacityError, InvalidAttributeError, UnsupportedSystemError

DEFAULT_CAP = 1 << 20

SYSTEM_IDS = ("U1", "U2", "U3", "U4", "U5", "U6", "U7")


@dataclass(frozen=True)
class SystemDescriptor:
    """Declared metadata of an information system.

    ``idim`` is the I-dimension, ``None`` meaning infinite. Coverage parameters
    without a known value are ``None``.
    """

    id: str
    universe_kind: str
    coverage: bool
    restricted: bool
    idim: int | None
    class_row: int
    coverage_m: int | None = None
    restricted_params: tuple | None = None

    @property
    def idim_infinite(self) -> bool:
        return self.idim is None


_BUILTINS = {
    "U1": SystemDescriptor("U1", "naturals", True, True, 1, 1, 3, (3, 1)),
    "U2": SystemDescriptor("U2", "naturals", True, False, 1, 2, 2),
    "U3": SystemDescriptor("U3", "naturals", False, False, 1, 3),
    "U4": SystemDescriptor("U4", "naturals", True, True, None, 4, 2, (2, 1)),
    "U5": SystemDescriptor("U5", "bit-sequences", False, False, None, 5),
    "U6": SystemDescriptor("U6", "nonneg-rationals", True, True, 1, 1),
    "U7": SystemDescriptor("U7", "integers", True, False, None, 4),
}


def builtin(system) -> SystemDescriptor:
    """Descriptor for ``U1``..``U7`` (also accepts 1..7 or a descriptor)."""
    if isinstance(system, SystemDescriptor):
        return system
    key = f"U{system}" if isinstance(system, int) else str(system).upper()
    try:
        return _BUILTINS[key]
    except KeyError:
        raise UnsupportedSystemError(f"unknown system {system!r}") from None


def _power_of_two(i: int) -> bool:
    return i >= 2 and i & (i - 1) == 0


def _check_member(sid: str, attr: Attribute) -> None:
    fam = attr.family
    ok = {
        "U1": fam == "L",
        "U2": fam == "P" or (fam == "L" and _power_of_two(attr.index)),
        "U3": fam == "P",
        "U4": fam in ("BIT", "TABLE", "IND"),
        "U5": fam == "SEQ",
        "U6": fam in ("P", "Q"),
        "U7": fam == "P" or (fam == "L" and _power_of_two(attr.index)) or fam == "TABLE",
    }[sid]
    if not ok:
        raise InvalidAttributeError(f"{attr} is not an attribute of {sid}")
    if fam == "TABLE":
        keys = [k for k, _ in attr.table]
        if sid == "U4" and any(not isinstance(k, int) or k < 1 for k in keys):
            raise InvalidAttributeError(f"{attr}: U4 tables are keyed by naturals")
        if sid == "U7":
            if any(not isinstance(k, int) for k in keys):
                raise InvalidAttributeError(f"{attr}: U7 tables are keyed by integers")
            if any(k >= 1 and v for k, v in attr.table):
                raise InvalidAttributeError(f"{attr}: U7 tables must be zero on the naturals")
    if fam == "IND":
        for inner, _ in attr.constraints:
            _check_member(sid, inner)


def make_attribute(system, spec) -> Attribute:
    """Validated attribute of ``system`` from a spec string or an Attribute."""
    desc = builtin(system)
    attr = spec if isinstance(spec, Attribute) else core.parse_attribute(spec)
    _check_member(desc.id, attr)
    return attr


def _as_object(value):
    if isinstance(value, Fraction) and value.denominator == 1:
        return int(value)
    return value


def _numeric_candidates(attrs: Sequence[Attribute], lower, step) -> set:
    crit = set()
    for a in attrs:
        if a.family == "P":
            crit.add(Fraction(a.index))
        elif a.family == "L":
            crit.update((Fraction(a.index), Fraction(a.index + 1)))
        elif a.family == "Q":
            crit.add(a.index + Fraction(1, 2))
        elif a.family == "TABLE":
            crit.update(Fraction(k) for k, _ in a.table)
    cands = {Fraction(lower if lower is not None else 0)}
    if lower is None:
        cands.add(min(crit | {Fraction(0)}) - 1)
    cands.add(max(crit | {Fraction(lower or 0)}) + 1)
    offsets = [-1, 0, 1] if step == 1 else [Fraction(k, 4) for k in (-2, -1, 0, 1, 2)]
    for c in crit:
        cands.update(c + d for d in offsets)
    if lower is not None:
        cands = {c for c in cands if c >= lower}
    return {_as_object(c) for c in cands}


def _bit_candidates(attrs: Sequence[Attribute], cap: int) -> set:
    coords = sorted({a.index for a in attrs if a.family == "BIT"})
    keys = {k for a in attrs if a.family == "TABLE" for k, _ in a.table}
    if (2 << len(coords)) + len(keys) > 2 * cap:
        raise CapacityError(f"{len(coords)} bit coordinates exceed the witness cap {cap}")
    block = 1 << (coords[-1] if coords else 0)
    offset = block * (max(keys, default=0) // block + 1)
    cands = set(keys)
    for pattern in range(1 << len(coords)):
        v = sum(((pattern >> r) & 1) << (c - 1) for r, c in enumerate(coords))
        cands.update((1 + v, 1 + v + offset))
    return cands


def _sequence_candidates(attrs: Sequence[Attribute], cap: int) -> set:
    coords = sorted({a.index for a in attrs if a.family == "SEQ"})
    if (1 << len(coords)) > cap:
        raise CapacityError(f"{len(coords)} sequence coordinates exceed the witness cap {cap}")
    top = coords[-1] if coords else 0
    cands = set()
    for pattern in range(1 << len(coords)):
        bits = [0] * top
        for r, c in enumerate(coords):
            bits[c - 1] = (pattern >> r) & 1
        cands.add(core.normalize_sequence(bits))
    return cands


def witness_universe(system, attrs: Sequence, cap: int = DEFAULT_CAP) -> WitnessUniverse:
    """Finite universe with one canonical-least object per realizable tuple of ``attrs``.

    Raises :class:`CapacityError` instead of truncating when the object set
    would exceed ``cap``.
    """
    desc = builtin(system)
    attrs = tuple(dict.fromkeys(make_attribute(desc, a) for a in attrs))
    base = list(dict.fromkeys(b for a in attrs for b in core.base_attributes(a)))
    sid = desc.id
    if sid in ("U1", "U2", "U3"):
        cands = _numeric_candidates(base, 1, 1)
    elif sid == "U7":
        cands = _numeric_candidates(base, None, 1)
    elif sid == "U6":
        cands = _numeric_candidates(base, 0, Fraction(1, 4))
    elif sid == "U4":
        cands = _bit_candidates(base, cap)
    else:
        cands = _sequence_candidates(base, cap)
    return _reduce(cands, attrs, cap)


def custom_universe(objects: Sequence, attrs: Sequence[Attribute], cap: int = DEFAULT_CAP) -> WitnessUniverse:
    """Universe for a user-supplied finite object table (no declared-class claims)."""
    if len(objects) > cap:
        raise CapacityError(f"{len(objects)} objects exceed the witness cap {cap}")
    return WitnessUniverse(tuple(objects), tuple(attrs))


def _reduce(cands, attrs, cap) -> WitnessUniverse:
    if len(cands) > cap:
        raise CapacityError(f"{len(cands)} candidate objects exceed the witness cap {cap}")
    seen = {}
    for obj in sorted(cands, key=core.object_key):
        sig = tuple(core.eval_attribute(a, obj) for a in attrs)
        seen.setdefault(sig, obj)
    return WitnessUniverse(tuple(seen.values()), attrs)


def hardest_attributes(system, n: int) -> tuple:
    """Attribute list of the canonical injective problem of dimension ``n``."""
    if n < 1:
        raise ValueError("dimension must be at least 1")
    sid = builtin(system).id
    if sid == "U1":
        return tuple(core.l(i) for i in range(1, n + 1))
    if sid == "U2":
        t = n.bit_length()  # least t with 2**t > n
        return tuple(core.p((1 << t) + i) for i in range(1, n + 1))
    if sid in ("U3", "U6"):
        return tuple(core.p(i) for i in range(1, n + 1))
    if sid == "U4":
        return tuple(core.bit(j) for j in range(1, n + 1))
    if sid == "U5":
        return tuple(core.seq(i) for i in range(1, n + 1))
    # U7: tables on the negative integers realizing every bit pattern
    return tuple(
        core.table({-k: ((k - 1) >> (j - 1)) & 1 for k in range(1, (1 << n) + 1)})
        for j in range(1, n + 1)
    )


def hardest_problem(system, n: int, cap: int = DEFAULT_CAP) -> Problem:
    attrs = hardest_attributes(system, n)
    return Problem.injective(attrs, witness_universe(system, attrs, cap))


# ---------------------------------------------------------------------------
# Certificate covers
# ---------------------------------------------------------------------------

def _add(covers: dict, problem: Problem, rep, system) -> None:
    covers.setdefault(core.signature(problem, rep), []).append(tuple(system))


def _positive_singleton_cover(problem, covers):
    """{p_1=1}, ..., {p_{2^t}=1}, {l_{2^t}=1} with 2^t above every index."""
    top = max((a.index for a in problem.attributes if a.family in ("P", "L")), default=0)
    t = max(1, top.bit_length())
    while (1 << t) <= top:
        t += 1
    for i in range(1, (1 << t) + 1):
        _add(covers, problem, i, [(core.p(i), 1)])
    _add(covers, problem, (1 << t) + 1, [(core.l(1 << t), 1)])


def _u1_cover(problem, covers):
    idx = sorted({a.index for a in problem.attributes})
    if not idx:
        _add(covers, problem, 1, [])
        return
    _add(covers, problem, 1, [(core.l(idx[0]), 0)])
    for lo, hi in zip(idx, idx[1:]):
        _add(covers, problem, lo + 1, [(core.l(lo), 1), (core.l(hi), 0)])
    _add(covers, problem, idx[-1] + 1, [(core.l(idx[-1]), 1)])


def _u6_cover(problem, covers):
    ps = sorted({a.index for a in problem.attributes if a.family == "P"})
    ks = sorted(
        set(ps)
        | {i - 1 for i in ps if i >= 2}
        | {a.index for a in problem.attributes if a.family == "Q"}
    )
    half = Fraction(1, 2)
    pieces = []  # (lower bound, system, upper bound)
    if not ks:
        pieces.append((Fraction(0), [], None))
    else:
        pieces.append((Fraction(0), [(core.q(ks[0]), 0)], ks[0] + half))
        for a, b in zip(ks, ks[1:]):
            pieces.append((a + half, [(core.q(a), 1), (core.q(b), 0)], b + half))
        pieces.append((ks[-1] + half, [(core.q(ks[-1]), 1)], None))
    for lower, system, upper in pieces:
        inside = [i for i in ps if i > lower and (upper is None or i < upper)]
        if inside:
            (i,) = inside
            _add(covers, problem, i, [(core.p(i), 1)])
            system = system + [(core.p(i), 0)]
        _add(covers, problem, _as_object(lower), system)


def _u4_cover(problem, covers):
    universe = witness_universe("U4", problem.attributes)
    for tup in universe.realizable(problem.attributes):
        ind = core.indicator(tuple(zip(problem.attributes, tup)))
        covers.setdefault(tup, []).append(((ind, 1),))


def _u7_cover(problem, covers):
    _positive_singleton_cover(problem, covers)
    tables = [a for a in problem.attributes if a.family == "TABLE"]
    keys = sorted({k for a in tables for k, _ in a.table if k <= 0})
    rest = min(keys + [0]) - 1 if 0 in keys or not keys else min(keys) - 1
    # every non-key object of Z \ N shares the signature of ``rest``
    groups: dict = {}
    for x in keys + [rest]:
        groups.setdefault(core.signature(problem, x), []).append(x)
    for sig, members in groups.items():
        listed = {k: int(k in members) for k in keys}
        g = core.table(listed, tail=int(rest in members))
        covers.setdefault(sig, []).append(((g, 1),))


_COVERS = {"U1": _u1_cover, "U2": _positive_singleton_cover, "U4": _u4_cover,
           "U6": _u6_cover, "U7": _u7_cover}


def certificate_covers(system, problem: Problem) -> dict:
    """For every realizable tuple, equation systems whose solution sets union to its region.

    Supported for the systems satisfying the coverage condition with a known
    construction (U1, U2, U4, U6, U7).
    """
    desc = builtin(system)
    for a in problem.attributes:
        _check_member(desc.id, a)
    try:
        build = _COVERS[desc.id]
    except KeyError:
        raise UnsupportedSystemError(f"{desc.id} admits no bounded certificate covers") from None
    covers: dict = {}
    build(problem, covers)
    return {k: covers[k] for k in sorted(covers)}


def cover_attributes(covers: dict) -> tuple:
    return tuple(dict.fromkeys(a for systems in covers.values() for s in systems for a, _ in s))
