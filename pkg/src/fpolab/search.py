"""Frame- and order-preserving (FOP) maps between FPOs.

A FOP map sends the k-th input to the k-th input, the k-th output to the
k-th output, and preserves the order.  ``a ≻ b`` holds when a FOP map from
``a`` to ``b`` exists.  The search is a backtracking solver over the
internal elements of the source with precomputed candidate sets,
most-constrained-variable ordering and forward checking.  It is fully
deterministic: candidates are tried in target index order and ties in the
variable choice are broken by source index.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator, Mapping

from .canonical import canonical_labelling
from .errors import BudgetExceeded, ClassMismatchError, FopValidationError, NotEquivalentError, NotMinimalError
from .poset import Fpo, iter_bits


@dataclass(frozen=True)
class FopMap:
    source: Fpo
    target: Fpo
    assignment: Mapping[str, str] = field(hash=False)

    def __call__(self, e: str) -> str:
        return self.assignment[e]

    def image(self) -> set[str]:
        return set(self.assignment.values())

    def then(self, other: "FopMap") -> "FopMap":
        """Composite ``other ∘ self``."""
        return FopMap(self.source, other.target, {e: other(self(e)) for e in self.source.elements})

    def to_dict(self) -> dict:
        return {"source": self.source.to_dict(), "target": self.target.to_dict(),
                "assignment": {e: self.assignment[e] for e in self.source.elements if e in self.assignment}}

    @classmethod
    def from_dict(cls, data: dict) -> "FopMap":
        return cls(Fpo.from_dict(data["source"]), Fpo.from_dict(data["target"]), dict(data["assignment"]))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


class MapClass(Enum):
    FOP = "FOP"
    FOE = "FOE"
    RELABELLING = "RELABELLING"


@dataclass(frozen=True)
class Classification:
    map_class: MapClass | None
    reason: str | None = None
    witness: tuple | None = None

    @property
    def is_fop(self) -> bool:
        return self.map_class is not None


class _Counter:
    def __init__(self, budget: int | None):
        self.budget = budget
        self.nodes = 0

    def tick(self):
        self.nodes += 1
        if self.budget is not None and self.nodes > self.budget:
            raise BudgetExceeded(self.budget)


def _check_class(s: Fpo, t: Fpo):
    if s.fpo_class != t.fpo_class:
        raise ClassMismatchError(f"source class {s.fpo_class} differs from target class {t.fpo_class}")


def _frame_pins(s: Fpo, t: Fpo) -> dict[int, int] | None:
    pins = {}
    for a, b in zip(s.inputs + s.outputs, t.inputs + t.outputs):
        pins[s.index(a)] = t.index(b)
    for a, ta in pins.items():
        for b in iter_bits(s._up[a]):
            if b in pins and not t._up[ta] >> pins[b] & 1 and ta != pins[b]:
                return None
    return pins


def _domains(s: Fpo, t: Fpo, pins: dict[int, int], avoid: int = 0) -> dict[int, int] | None:
    full = (1 << len(t)) - 1
    doms = {}
    for x in range(len(s)):
        if x in pins:
            continue
        d = full & ~avoid
        for f, tf in pins.items():
            if s._down[x] >> f & 1:
                d &= (1 << tf) | t._up[tf]
            elif s._up[x] >> f & 1:
                d &= (1 << tf) | t._down[tf]
        if not d:
            return None
        doms[x] = d
    return doms


def _solve(s: Fpo, t: Fpo, pins: dict[int, int], doms: dict[int, int], counter: _Counter,
           idempotent: bool = False) -> Iterator[dict[int, int]]:
    assign = dict(pins)
    sup, sdown, tup, tdown = s._up, s._down, t._up, t._down

    def rec(doms):
        if not doms:
            yield dict(assign)
            return
        var = min(doms, key=lambda v: (doms[v].bit_count(), v))
        for c in iter_bits(doms[var]):
            counter.tick()
            upc = (1 << c) | tup[c]
            downc = (1 << c) | tdown[c]
            new = {}
            ok = True
            moved = idempotent and c != var
            for y, dy in doms.items():
                if y == var:
                    continue
                if sup[var] >> y & 1:
                    dy &= upc
                elif sdown[var] >> y & 1:
                    dy &= downc
                if moved:
                    dy &= ~(1 << var)  # var is not a fixed point, so nothing may land on it
                    if y == c:
                        dy &= 1 << c  # image points must be fixed points
                if not dy:
                    ok = False
                    break
                new[y] = dy
            if ok and moved and c in assign and assign[c] != c:
                ok = False
            if not ok:
                continue
            assign[var] = c
            yield from rec(new)
            del assign[var]

    yield from rec(doms)


def _as_map(s: Fpo, t: Fpo, sol: dict[int, int]) -> FopMap:
    return FopMap(s, t, {s.elements[i]: t.elements[sol[i]] for i in range(len(s))})


def iter_fop_maps(s: Fpo, t: Fpo, budget: int | None = None) -> Iterator[FopMap]:
    """All FOP maps from ``s`` to ``t`` in deterministic search order."""
    _check_class(s, t)
    counter = _Counter(budget)
    pins = _frame_pins(s, t)
    if pins is None:
        return
    doms = _domains(s, t, pins)
    if doms is None:
        return
    for sol in _solve(s, t, pins, doms, counter):
        yield _as_map(s, t, sol)


def find_fop_map(s: Fpo, t: Fpo, budget: int | None = None) -> FopMap | None:
    """A FOP map from ``s`` to ``t``, or None if none exists.

    Raises :class:`BudgetExceeded` rather than answering None when the node
    budget runs out first.
    """
    return next(iter_fop_maps(s, t, budget), None)


def embeds(s: Fpo, t: Fpo, budget: int | None = None) -> bool:
    """True iff ``s ≻ t``."""
    return find_fop_map(s, t, budget) is not None


def is_equivalent(a: Fpo, b: Fpo, budget: int | None = None) -> bool:
    return embeds(a, b, budget) and embeds(b, a, budget)


def fop_violation(m: FopMap) -> tuple[str, tuple] | None:
    """First reason ``m`` is not a FOP map, with a witness, or None."""
    s, t, a = m.source, m.target, m.assignment
    if s.fpo_class != t.fpo_class:
        return "class mismatch", (str(s.fpo_class), str(t.fpo_class))
    for e in s.elements:
        if e not in a:
            return "not total", (e,)
        if a[e] not in t:
            return "unknown target element", (e, a[e])
    for e in a:
        if e not in s:
            return "unknown source element", (e,)
    for k, (x, y) in enumerate(zip(s.inputs, t.inputs)):
        if a[x] != y:
            return "input not preserved", (x, a[x], y)
    for k, (x, y) in enumerate(zip(s.outputs, t.outputs)):
        if a[x] != y:
            return "output not preserved", (x, a[x], y)
    for x, y in s.relations:
        if not t.leq(a[x], a[y]):
            return "not order-preserving", (x, y)
    return None


def validate_fop(m: FopMap) -> None:
    bad = fop_violation(m)
    if bad is not None:
        raise FopValidationError(*bad)


def classify_map(m: FopMap) -> Classification:
    bad = fop_violation(m)
    if bad is not None:
        return Classification(None, bad[0], bad[1])
    s, t, a = m.source, m.target, m.assignment
    els = s.elements
    for x in els:
        for y in els:
            if x != y and t.leq(a[x], a[y]) and not s.less(x, y):
                return Classification(MapClass.FOP, "not order-reflecting", (x, y))
    if len(set(a.values())) != len(t):
        missing = next(e for e in t.elements if e not in set(a.values()))
        return Classification(MapClass.FOE, "not surjective", (missing,))
    return Classification(MapClass.RELABELLING)


# minimality

def _collapse_witness(s: Fpo) -> dict[str, str] | None:
    internal = s.internal
    if len(internal) < 2:
        return None
    for x in internal:
        if all(s.less(i, x) for i in s.inputs) and all(s.less(x, o) for o in s.outputs):
            return {e: (x if s.is_internal(e) else e) for e in s.elements}
    return None


def two_parents_violation(s: Fpo) -> tuple[str, str, str] | None:
    """Internal ``x`` and a comparable ``y`` such that every element on the
    same side of ``x`` as ``y`` is comparable to ``y``.

    Returns ``(direction, x, y)`` with direction ``"up"`` or ``"down"``.
    """
    for x in s.internal:
        i = s.index(x)
        for side, mask, other in (("up", s._up[i], s._up), ("down", s._down[i], s._down)):
            for j in iter_bits(mask):
                comparable_to_j = (1 << j) | s._up[j] | s._down[j]
                if not mask & ~comparable_to_j:
                    return side, x, s.elements[j]
    return None


def _two_parents_witness(s: Fpo) -> dict[str, str] | None:
    bad = two_parents_violation(s)
    if bad is None:
        return None
    side, x, y = bad
    if side == "up":
        interval = {e for e in s.elements if s.leq(x, e) and s.leq(e, y)}
    else:
        interval = {e for e in s.elements if s.leq(y, e) and s.leq(e, x)}
    return {e: (y if e in interval else e) for e in s.elements}


def find_nonsurjective_self_map(s: Fpo, strategy: str = "general", budget: int | None = None,
                                shortcuts: bool = True) -> FopMap | None:
    """A FOP self-map of ``s`` that is not surjective, or None.

    ``strategy="idempotent"`` only searches idempotent self-maps; a
    non-surjective self-map exists iff a non-surjective idempotent one does.
    ``shortcuts`` enables the cheap structural witnesses before the search.
    """
    if strategy not in ("general", "idempotent"):
        raise ValueError(f"unknown strategy {strategy}")
    if shortcuts:
        for make in (_collapse_witness, _two_parents_witness):
            w = make(s)
            if w is not None:
                m = FopMap(s, s, w)
                if strategy == "general" or all(w[w[e]] == w[e] for e in w):
                    return m
    counter = _Counter(budget)
    pins = _frame_pins(s, s)
    for z in s.internal:
        doms = _domains(s, s, pins, avoid=1 << s.index(z))
        if doms is None:
            continue
        for sol in _solve(s, s, pins, doms, counter, idempotent=(strategy == "idempotent")):
            return _as_map(s, s, sol)
    return None


def is_minimal_representative(s: Fpo, strategy: str = "general", budget: int | None = None,
                              shortcuts: bool = True) -> bool:
    """True iff every FOP self-map of ``s`` is surjective."""
    return find_nonsurjective_self_map(s, strategy, budget, shortcuts) is None


def minimal_representative(s: Fpo, strategy: str = "general", budget: int | None = None) -> Fpo:
    """Minimal representative of the equivalence class of ``s``.

    The result is a sub-FPO of ``s`` (original ids) with its elements listed
    in canonical order.
    """
    cur = s
    while True:
        m = find_nonsurjective_self_map(cur, strategy, budget)
        if m is None:
            break
        cur = cur.restrict(m.image())
    return cur.reorder(canonical_labelling(cur))


def projection_to_minrep(e: FopMap, budget: int | None = None) -> FopMap:
    """Surjective FOP map ``P`` back onto a minimal source with ``P∘E∘P = P``.

    ``e`` must go out of a minimal representative into an equivalent FPO.
    """
    s, t = e.source, e.target
    if not is_minimal_representative(s, budget=budget):
        raise NotMinimalError("source of the map is not a minimal representative")
    back = find_fop_map(t, s, budget)
    if back is None:
        raise NotEquivalentError("target does not map back to the source")
    q = back.then(e)  # E∘E' on the target
    els = t.elements
    powers = [{x: x for x in els}]
    images = [set(els)]
    while True:
        nxt = {x: q(powers[-1][x]) for x in els}
        img = set(nxt.values())
        powers.append(nxt)
        images.append(img)
        if img == images[-2]:
            break
    stable_at = len(powers) - 2
    stable = images[-1]
    period = 1
    cur = {x: q(x) for x in stable}
    while any(cur[x] != x for x in stable):
        cur = {x: q(cur[x]) for x in stable}
        period += 1
    n = period * max(1, -(-max(stable_at, 1) // period))
    qpow = {x: x for x in els}
    for _ in range(n - 1):
        qpow = {x: q(qpow[x]) for x in els}
    p = FopMap(t, s, {x: back(qpow[x]) for x in els})
    validate_fop(p)
    return p
