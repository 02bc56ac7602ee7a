"""Enumeration of FPO types, minimal representatives and named families.

Types of a class are generated level by level: every FPO with k+1 internal
elements arises from one with k internal elements by adding a new internal
element with a compatible down-set and up-set, and duplicates are removed
by canonical form.
"""
from __future__ import annotations

import itertools
import json
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

from .canonical import CanonicalForm, canonical_form
from .errors import NotCausalRelevantError, UnknownName
from .poset import Fpo, FpoClass, connected_components, iter_bits, parallel_compose, random_fpo
from .search import is_minimal_representative, minimal_representative, two_parents_violation

FILTERS = ("all", "causal_relevant", "markov_relevant", "deterministic_relevant")
FILTER_ALIASES = {"causal": "causal_relevant", "markov": "markov_relevant", "det": "deterministic_relevant",
                  "deterministic": "deterministic_relevant"}


# generation

def _antichain_closures(fpo: Fpo, allowed: int, down: bool) -> Iterator[int]:
    """Down-closed (or up-closed) subsets of ``allowed``, which must itself be closed."""
    items = list(iter_bits(allowed))
    rel = fpo._down if down else fpo._up

    def rec(k, chosen_mask, closure):
        if k == len(items):
            yield closure
            return
        yield from rec(k + 1, chosen_mask, closure)
        v = items[k]
        comparable = fpo._up[v] | fpo._down[v]
        if not chosen_mask & comparable:
            yield from rec(k + 1, chosen_mask | (1 << v), closure | (1 << v) | rel[v])

    yield from rec(0, 0, 0)


def _extensions(fpo: Fpo) -> Iterator[Fpo]:
    n = len(fpo)
    full = (1 << n) - 1
    outs = sum(1 << fpo.index(e) for e in fpo.outputs)
    ins = sum(1 << fpo.index(e) for e in fpo.inputs)
    name = f"x{n}"
    while name in fpo:
        name += "'"
    for dset in _antichain_closures(fpo, full & ~outs, down=True):
        common = full & ~ins
        for d in iter_bits(dset):
            common &= fpo._up[d]
        for uset in _antichain_closures(fpo, common, down=False):
            up = [m | ((1 << n) if dset >> i & 1 else 0) for i, m in enumerate(fpo._up)]
            up.append(uset)
            yield Fpo.from_closed(list(fpo.elements) + [name], up, fpo.inputs, fpo.outputs)


def frame_only_types(cls: FpoClass) -> list[Fpo]:
    m, n = cls
    ins = [f"I{k + 1}" for k in range(m)]
    outs = [f"O{k + 1}" for k in range(n)]
    pairs = [(a, b) for a in ins for b in outs]
    out = []
    for mask in range(1 << len(pairs)):
        rels = [p for k, p in enumerate(pairs) if mask >> k & 1]
        out.append(Fpo(ins + outs, rels, ins, outs))
    return out


def enumerate_fpo_types(cls: FpoClass | tuple[int, int], max_order: int) -> Iterator[CanonicalForm]:
    """Every FPO type of the class with at most ``max_order`` elements, once each.

    Forms are yielded level by level (by number of internal elements) and in
    key order within a level.
    """
    cls = FpoClass(*cls)
    base = cls.inputs + cls.outputs
    if max_order < base:
        return
    level = sorted({canonical_form(f) for f in frame_only_types(cls)})
    yield from level
    for _ in range(max_order - base):
        nxt = set()
        for form in level:
            for ext in _extensions(form.to_fpo()):
                nxt.add(canonical_form(ext))
        level = sorted(nxt)
        yield from level


# relevance predicates

def internal_maximal(fpo: Fpo) -> list[str]:
    return [e for e in fpo.internal if not fpo._up[fpo.index(e)]]


def internal_non_minimal(fpo: Fpo) -> list[str]:
    return [e for e in fpo.internal if fpo._down[fpo.index(e)]]


def is_causal_relevant(fpo: Fpo) -> bool:
    return not internal_maximal(fpo)


def is_markov_relevant(fpo: Fpo) -> bool:
    return is_causal_relevant(fpo) and not internal_non_minimal(fpo)


def is_deterministic_relevant(fpo: Fpo) -> bool:
    return not fpo.internal


def relevance_flags(fpo: Fpo, minimal: bool) -> dict[str, bool]:
    return {"minimal": minimal, "causal_relevant": is_causal_relevant(fpo),
            "markov_relevant": is_markov_relevant(fpo), "deterministic_relevant": is_deterministic_relevant(fpo)}


# frame permutations

def frame_permutations(fpo: Fpo) -> Iterator[Fpo]:
    for pin in itertools.permutations(fpo.inputs):
        for pout in itertools.permutations(fpo.outputs):
            yield Fpo.from_closed(fpo.elements, fpo._up, pin, pout)


def frame_orbit(fpo: Fpo) -> set[CanonicalForm]:
    return {canonical_form(f) for f in frame_permutations(fpo)}


def orbit_key(fpo: Fpo) -> CanonicalForm:
    return min(frame_orbit(fpo))


# catalogs

@dataclass(frozen=True)
class CatalogEntry:
    form: CanonicalForm
    flags: dict = field(hash=False)
    orbit_size: int = 1

    def fpo(self) -> Fpo:
        return self.form.to_fpo()

    def to_dict(self) -> dict:
        return {"form": self.form.key, "flags": dict(self.flags), "orbit_size": self.orbit_size}


@dataclass
class Catalog:
    fpo_class: FpoClass
    max_order: int
    filter: str
    entries: list[CatalogEntry]

    def forms(self) -> list[CanonicalForm]:
        return [e.form for e in self.entries]

    def fpos(self) -> list[Fpo]:
        return [e.fpo() for e in self.entries]

    def all_forms(self) -> set[CanonicalForm]:
        """Every type in the catalog, expanding frame-permutation orbits."""
        out = set()
        for e in self.entries:
            out |= frame_orbit(e.fpo())
        return out

    def __len__(self) -> int:
        return len(self.entries)

    def to_json(self) -> str:
        return json.dumps([e.to_dict() for e in self.entries], indent=1, sort_keys=True)

    @classmethod
    def from_json(cls, text: str, fpo_class, max_order: int, filt: str) -> "Catalog":
        data = json.loads(text)
        entries = [CatalogEntry(CanonicalForm(d["form"]), d["flags"], d["orbit_size"]) for d in data]
        return cls(FpoClass(*fpo_class), max_order, filt, entries)


def _check(args):
    key, strategy = args
    fpo = CanonicalForm(key).to_fpo()
    return is_minimal_representative(fpo, strategy)


def enumerate_minimal_representatives(cls, max_order: int, filter: str = "all", strategy: str = "general",
                                      workers: int = 1, orbits: bool = True) -> Catalog:
    """Minimal representatives of the class passing ``filter``.

    With ``orbits`` (the default) one entry is kept per frame-permutation
    orbit, using the least form in the orbit, and ``orbit_size`` records how
    many distinct types the orbit holds.
    """
    cls = FpoClass(*cls)
    filt = FILTER_ALIASES.get(filter, filter)
    if filt not in FILTERS:
        raise ValueError(f"unknown filter {filter}")
    forms = list(enumerate_fpo_types(cls, max_order))
    jobs = [(f.key, strategy) for f in forms]
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            minimal = list(pool.map(_check, jobs, chunksize=32))
    else:
        minimal = [_check(j) for j in jobs]
    kept = {}
    for form, ok in zip(forms, minimal):
        if not ok:
            continue
        fpo = form.to_fpo()
        flags = relevance_flags(fpo, True)
        if filt != "all" and not flags[filt]:
            continue
        if orbits:
            orbit = frame_orbit(fpo)
            key = min(orbit)
            if key not in kept:
                kept[key] = CatalogEntry(key, relevance_flags(key.to_fpo(), True), len(orbit))
        else:
            kept[form] = CatalogEntry(form, flags, 1)
    entries = [kept[k] for k in sorted(kept)]
    return Catalog(cls, max_order, filt, entries)


# named families

def _frame_names(m: int, n: int):
    return [f"I{k + 1}" for k in range(m)], [f"O{k + 1}" for k in range(n)]


def full_frame(m: int, n: int) -> Fpo:
    ins, outs = _frame_names(m, n)
    return Fpo(ins + outs, [(a, b) for a in ins for b in outs], ins, outs)


def bottleneck(m: int, n: int) -> Fpo:
    ins, outs = _frame_names(m, n)
    return Fpo(ins + ["x"] + outs, [(a, "x") for a in ins] + [("x", b) for b in outs], ins, outs)


def bell() -> Fpo:
    return Fpo(["X", "Y", "s", "A", "B"], [("X", "A"), ("Y", "B"), ("s", "A"), ("s", "B")], ["X", "Y"], ["A", "B"])


def oneway_l() -> Fpo:
    return Fpo(["X", "Y", "A", "B"], [("X", "A"), ("X", "B"), ("Y", "B")], ["X", "Y"], ["A", "B"])


def oneway_r() -> Fpo:
    return Fpo(["X", "Y", "A", "B"], [("Y", "B"), ("Y", "A"), ("X", "A")], ["X", "Y"], ["A", "B"])


def zz22(n: int) -> Fpo:
    if n < 1:
        raise ValueError("zigzag length must be at least 1")
    tops = [f"u{k}" for k in range(n + 1)]
    bottoms = [f"v{k}" for k in range(1, n + 1)]
    rels = [("I1", "u0"), ("I2", tops[-1])]
    for k in range(1, n + 1):
        rels += [(f"v{k}", f"u{k - 1}"), (f"v{k}", f"u{k}")]
    rels += [(u, o) for u in tops for o in ("O1", "O2")]
    return Fpo(["I1", "I2"] + bottoms + tops + ["O1", "O2"], rels, ["I1", "I2"], ["O1", "O2"])


def zz13(n: int) -> Fpo:
    if n < 1:
        raise ValueError("zigzag length must be at least 1")
    chain = ["I"] + [f"x{k}" for k in range(1, 2 * n + 1)] + ["O3"]
    rels = []
    for k in range(0, 2 * n + 1, 2):
        if k - 1 >= 0:
            rels.append((chain[k], chain[k - 1]))
        rels.append((chain[k], chain[k + 1]))
    for k in range(1, 2 * n + 1, 2):
        rels += [(chain[k], "O1"), (chain[k], "O2")]
    return Fpo(chain[:-1] + ["O1", "O2", "O3"], rels, ["I"], ["O1", "O2", "O3"])


def common_cause(m: int, n: int, links: Sequence[Sequence[int]] = ()) -> Fpo:
    """One internal element below every output; input k is below the outputs in ``links[k]``."""
    ins, outs = _frame_names(m, n)
    links = list(links) + [()] * (m - len(links))
    rels = [("s", o) for o in outs]
    rels += [(ins[k], outs[j]) for k in range(m) for j in links[k]]
    return Fpo(ins + ["s"] + outs, rels, ins, outs)


def pairwise(n: int, pairs: Sequence[Sequence[int]], links: Sequence[Sequence[int]] = ()) -> Fpo:
    """Internal ``x_ij`` below outputs i and j for each pair; inputs linked to outputs as given."""
    m = len(links)
    ins, outs = _frame_names(m, n)
    mids = [f"x{i + 1}{j + 1}" for i, j in pairs]
    rels = []
    for (i, j), x in zip(pairs, mids):
        rels += [(x, outs[i]), (x, outs[j])]
    rels += [(ins[k], outs[j]) for k in range(m) for j in links[k]]
    return Fpo(ins + mids + outs, rels, ins, outs)


NAMES = ("FULL_FRAME", "TWOWAY", "BOTTLENECK", "BELL", "ONEWAY_L", "ONEWAY_R", "ZZ22", "ZZ13",
         "COMMON_CAUSE", "PAIRWISE")


def catalog_named(name: str, n: int | None = None, inputs: int | None = None, outputs: int | None = None,
                  links: Sequence[Sequence[int]] = (), pairs: Sequence[Sequence[int]] = ()) -> Fpo:
    """Named FPO families.

    ``n`` is the zigzag length for ZZ22/ZZ13; ``inputs``/``outputs`` give
    the class for FULL_FRAME, BOTTLENECK, COMMON_CAUSE and PAIRWISE.
    """
    key = name.upper()
    if key in ("FULL_FRAME", "TWOWAY"):
        return full_frame(2 if inputs is None else inputs, 2 if outputs is None else outputs)
    if key == "BOTTLENECK":
        return bottleneck(2 if inputs is None else inputs, 2 if outputs is None else outputs)
    if key == "BELL":
        return bell()
    if key == "ONEWAY_L":
        return oneway_l()
    if key == "ONEWAY_R":
        return oneway_r()
    if key == "ZZ22":
        return zz22(1 if n is None else n)
    if key == "ZZ13":
        return zz13(1 if n is None else n)
    if key == "COMMON_CAUSE":
        return common_cause(len(links) if inputs is None else inputs, 2 if outputs is None else outputs, links)
    if key == "PAIRWISE":
        return pairwise(3 if outputs is None else outputs, pairs, links)
    raise UnknownName(f"unknown family {name}; known: {', '.join(NAMES)}")


def named_connected_pieces(cls: FpoClass | tuple[int, int], max_order: int) -> dict[str, Fpo]:
    """Named single-component causal-relevant minimal representatives of a small class.

    Built from the family constructors only, without any search, so it can
    serve as an independent expectation for enumeration.
    """
    m, n = cls
    out: dict[str, Fpo] = {}

    def add(label, fpo):
        if len(fpo) <= max_order and len(connected_components(fpo)) == 1:
            out[label] = fpo

    add(f"FULL_FRAME({m},{n})", full_frame(m, n))
    if n >= 2 and m != 1:
        add(f"BOTTLENECK({m},{n})", bottleneck(m, n))
    if (m, n) == (2, 2):
        add("ONEWAY_L", oneway_l())
        add("ONEWAY_R", oneway_r())
        for k in range(1, max_order):
            if len(zz22(k)) <= max_order:
                add(f"ZZ22({k})", zz22(k))
    if (m, n) == (1, 3):
        for k in range(1, max_order):
            if len(zz13(k)) <= max_order:
                add(f"ZZ13({k})", zz13(k))
    if n >= 2:
        # a common cause below all outputs, no input below all outputs
        options = [s for r in range(n) for s in itertools.combinations(range(n), r)]
        for links in itertools.product(options, repeat=m):
            add(f"COMMON_CAUSE({m},{n},{list(map(list, links))})", common_cause(m, n, links))
    if n == 3 and m <= 1:
        all_pairs = list(itertools.combinations(range(3), 2))
        link_opts = [s for r in range(4) for s in itertools.combinations(range(3), r)]
        for r in range(1, 4):
            for pairs in itertools.combinations(all_pairs, r):
                for links in itertools.product(link_opts, repeat=m):
                    future_ok = all(not set(p) <= set(lk) for p in pairs for lk in links)
                    if future_ok:
                        add(f"PAIRWISE({list(map(list, pairs))},{list(map(list, links))})",
                            pairwise(3, pairs, links))
    return out


def compose_closure(pieces: dict[FpoClass, list[Fpo]], cls: FpoClass, max_order: int) -> set[CanonicalForm]:
    """All types of class ``cls`` obtained by parallel composition of pieces and frame permutation."""
    flat = [(FpoClass(*c), f) for c, fs in sorted(pieces.items()) for f in fs]
    out: set[CanonicalForm] = set()

    def rec(start, m, n, size, acc):
        if (m, n) == tuple(cls):
            if acc is not None:
                out.update(frame_orbit(acc))
            return
        for k in range(start, len(flat)):
            c, f = flat[k]
            if c == (0, 0):
                continue
            if m + c.inputs <= cls.inputs and n + c.outputs <= cls.outputs and size + len(f) <= max_order:
                nxt = f if acc is None else parallel_compose(acc, f)
                rec(k, m + c.inputs, n + c.outputs, size + len(f), nxt)

    rec(0, 0, 0, 0, None)
    if tuple(cls) == (0, 0):
        out.add(canonical_form(Fpo([])))
    return out


# structural predicates

def collapse_ok(fpo: Fpo) -> bool:
    """No internal element sits between all inputs and all outputs unless it is the only internal element."""
    if len(fpo.internal) < 2:
        return True
    for x in fpo.internal:
        if all(fpo.less(i, x) for i in fpo.inputs) and all(fpo.less(x, o) for o in fpo.outputs):
            return False
    return True


def two_parents_ok(fpo: Fpo) -> bool:
    return two_parents_violation(fpo) is None


def shortest_internal_paths(fpo: Fpo, start: str) -> dict[str, list[str]]:
    """Breadth-first shortest paths from ``start`` whose intermediate elements are internal."""
    paths = {start: [start]}
    frontier = [start]
    while frontier:
        nxt = []
        for a in frontier:
            if a != start and not fpo.is_internal(a):
                continue
            i = fpo.index(a)
            for j in iter_bits(fpo._up[i] | fpo._down[i]):
                b = fpo.elements[j]
                if b not in paths:
                    paths[b] = paths[a] + [b]
                    nxt.append(b)
        frontier = nxt
    return paths


def fence_parity_ok(fpo: Fpo) -> bool:
    """Along shortest internal paths out of each input, even positions are path-minimal and odd ones path-maximal."""
    for i in fpo.inputs:
        for path in shortest_internal_paths(fpo, i).values():
            for k in range(len(path) - 1):
                lower, upper = (path[k], path[k + 1]) if k % 2 == 0 else (path[k + 1], path[k])
                if not fpo.less(lower, upper):
                    return False
    return True


def _future_outputs(fpo: Fpo, x: str) -> frozenset[str]:
    return frozenset(o for o in fpo.outputs if fpo.less(x, o))


def structure_family(fpo: Fpo) -> str | None:
    """Family label implied by the small-class structure results, or None.

    Covers classes [0,2], [0,3], [1,2], [1,3] and [2,2] and applies to
    causal-relevant minimal representatives; returns None when the FPO
    violates the characterisation of its class.
    """
    cls = tuple(fpo.fpo_class)
    internal = fpo.internal
    outs = set(fpo.outputs)
    if not internal:
        return "FRAME"
    if cls == (0, 2):
        return "COMMON_CAUSE" if len(internal) == 1 and _future_outputs(fpo, internal[0]) == outs else None
    if cls == (1, 2):
        if len(internal) != 1:
            return None
        x, i = internal[0], fpo.inputs[0]
        ok = (_future_outputs(fpo, x) == outs and not fpo.comparable(i, x)
              and _future_outputs(fpo, i) != outs)
        return "COMMON_CAUSE" if ok else None
    if cls == (0, 3):
        return _pairwise_family(fpo)
    if cls == (1, 3):
        i = fpo.inputs[0]
        if not any(fpo.less(i, x) for x in internal):
            if _pairwise_family(fpo.without(i)) is None:
                return None
            fi = _future_outputs(fpo, i)
            if any(_future_outputs(fpo, x) <= fi for x in internal):
                return None
            return "COMMON_CAUSE" if len(internal) == 1 and _future_outputs(fpo, internal[0]) == outs else "PAIRWISE"
        return "ZZ13" if _is_fence(fpo, fpo.inputs[0], None) else None
    if cls == (2, 2):
        if any(_future_outputs(fpo, x) != outs for x in internal):
            return None
        if len(internal) == 1:
            x = internal[0]
            below = [i for i in fpo.inputs if fpo.less(i, x)]
            if len(below) == 2:
                return "BOTTLENECK"
            if below:
                return None
            if any(_future_outputs(fpo, i) == outs for i in fpo.inputs):
                return None
            return "COMMON_CAUSE"
        return "ZZ22" if _is_fence(fpo, fpo.inputs[0], fpo.inputs[1]) else None
    return None


def _pairwise_family(fpo: Fpo) -> str | None:
    internal = fpo.internal
    outs = set(fpo.outputs)
    if len(internal) == 1 and _future_outputs(fpo, internal[0]) == outs:
        return "COMMON_CAUSE"
    seen = set()
    for x in internal:
        fut = _future_outputs(fpo, x)
        if len(fut) != 2 or fut in seen or fpo._down[fpo.index(x)] or fpo._up[fpo.index(x)] & ~sum(
                1 << fpo.index(o) for o in fpo.outputs):
            return None
        seen.add(fut)
    return "PAIRWISE"


def _is_fence(fpo: Fpo, start: str, end: str | None) -> bool:
    """Internal elements form one alternating path from ``start``.

    For [2,2] the path runs from one input to the other through tops below
    both outputs; for [1,3] (``end`` None) it runs from the input to the one
    output that is not above the first internal element.
    """
    internal = list(fpo.internal)
    if end is None:
        tail = [o for o in fpo.outputs if not fpo.less(start, o)]
        if len(tail) != 1:
            return False
        end = tail[0]
        tops = [x for x in internal if fpo.less(start, x)]
        if len(tops) != 1:
            return False
        both = [o for o in fpo.outputs if o != end]
    else:
        both = list(fpo.outputs)
    path = shortest_internal_paths(fpo, start).get(end)
    if path is None or set(path[1:-1]) != set(internal) or len(path) - 2 != len(internal):
        return False
    for k in range(len(path) - 1):
        lower, upper = (path[k], path[k + 1]) if k % 2 == 0 else (path[k + 1], path[k])
        if not fpo.less(lower, upper):
            return False
        if k > 0 and k % 2 == 1 and not all(fpo.less(path[k], o) for o in both):
            return False
    # no shortcuts: only consecutive path elements are related, apart from tops below outputs
    for a, b in itertools.combinations(range(len(path)), 2):
        if b - a > 1 and fpo.comparable(path[a], path[b]):
            return False
    return True


# exogenisation

def exogenise(s: Fpo) -> Fpo:
    """Drop non-minimal internal elements one at a time, then take the minimal representative."""
    if not is_causal_relevant(s):
        raise NotCausalRelevantError(f"internal maximal elements: {internal_maximal(s)}")
    cur = s
    while True:
        bad = internal_non_minimal(cur)
        if not bad:
            break
        cur = cur.without(bad[0])
    return minimal_representative(cur)


def random_causal_fpo(rng: random.Random, max_order: int = 8) -> Fpo:
    """Random FPO with no internal maximal elements (at least one output)."""
    fpo = random_fpo(rng, max_order, n=rng.randint(1, 2) if max_order >= 1 else 0)
    fixes = [(x, rng.choice(fpo.outputs)) for x in internal_maximal(fpo)]
    if not fixes:
        return fpo
    return Fpo(fpo.elements, fpo.relations + fixes, fpo.inputs, fpo.outputs)


# zigzag families as specs and diagrams

@dataclass(frozen=True)
class ZigzagSpec:
    family: str
    n: int

    def __post_init__(self):
        if self.family not in ("ZZ22", "ZZ13"):
            raise UnknownName(f"unknown zigzag family {self.family}")
        if self.n < 1:
            raise ValueError("zigzag length must be at least 1")

    def fpo(self) -> Fpo:
        return zz22(self.n) if self.family == "ZZ22" else zz13(self.n)


def zigzag_pattern_diagram():
    """Two-input two-output diagram whose FPO is ZZ22(1).

    A two-output state ``rho`` feeds boxes ``A`` (with the first input) and
    ``F`` (with the second input); both feed the two output boxes ``B`` and
    ``C``.  ``A`` and ``F`` are the two one-way slots of the cascade.
    """
    from .diagram import diagram
    boxes = [("rho", 0, 2), ("A", 2, 2), ("F", 2, 2), ("B", 2, 1), ("C", 2, 1)]
    wires = [(("in", 0), ("box", "A", 0)), (("box", "rho", 0), ("box", "A", 1)),
             (("box", "rho", 1), ("box", "F", 0)), (("in", 1), ("box", "F", 1)),
             (("box", "A", 0), ("box", "B", 0)), (("box", "A", 1), ("box", "C", 0)),
             (("box", "F", 0), ("box", "B", 1)), (("box", "F", 1), ("box", "C", 1)),
             (("box", "B", 0), ("out", 0)), (("box", "C", 0), ("out", 1))]
    return diagram(boxes, wires, ["I1", "I2"], ["O1", "O2"])


def zigzag_cascade(n: int, slot: str = "F"):
    """Diagram for ZZ22(n) built by nesting the pattern into one slot ``n - 1`` times."""
    from .diagram import substitute_box
    if n < 1:
        raise ValueError("zigzag length must be at least 1")
    if slot not in ("A", "F"):
        raise ValueError("slot must be 'A' or 'F'")
    d = zigzag_pattern_diagram()
    for _ in range(n - 1):
        d = substitute_box(zigzag_pattern_diagram(), slot, d)
    return d
