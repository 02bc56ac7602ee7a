"""Framed partial orders (FPOs).

An FPO is a finite strict partial order together with an ordered list of
input elements (all minimal) and an ordered list of output elements (all
maximal).  Elements that are in neither list are called internal.

The strict order is stored transitively closed as one bitset per element
(bit ``j`` of ``_up[i]`` is set iff element ``i`` is strictly below element
``j``), which is a row-packed dense boolean incidence matrix.
"""
from __future__ import annotations

import json
import random
from typing import Iterable, Iterator, NamedTuple, Sequence

import numpy as np

from .errors import CycleError, InvalidFpoError


class FpoClass(NamedTuple):
    inputs: int
    outputs: int

    def __str__(self) -> str:
        return f"[{self.inputs},{self.outputs}]"


class ChainReport(NamedTuple):
    height: int
    width: int
    relation_count: int
    hasse_edge_count: int


def iter_bits(mask: int) -> Iterator[int]:
    """Yield the indices of the set bits of ``mask`` in increasing order."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def _close(n: int, succ: Sequence[int]) -> list[int]:
    """Transitive closure of a successor bitset list; raises on cycles.

    Returns the list of strict up-sets.  The cycle witness is a list of
    indices ``[a, b, ..., a]``.
    """
    state = [0] * n  # 0 new, 1 on stack, 2 done
    order: list[int] = []
    for root in range(n):
        if state[root]:
            continue
        stack = [(root, iter(iter_bits(succ[root])))]
        state[root] = 1
        path = [root]
        while stack:
            node, it = stack[-1]
            nxt = next(it, None)
            if nxt is None:
                stack.pop()
                path.pop()
                state[node] = 2
                order.append(node)
                continue
            if state[nxt] == 1:
                start = path.index(nxt)
                raise _Cycle(path[start:] + [nxt])
            if state[nxt] == 0:
                state[nxt] = 1
                path.append(nxt)
                stack.append((nxt, iter(iter_bits(succ[nxt]))))
    up = [0] * n
    for node in order:  # successors are finished before their predecessors
        acc = 0
        for s in iter_bits(succ[node]):
            acc |= (1 << s) | up[s]
        up[node] = acc
    return up


class _Cycle(Exception):
    def __init__(self, cycle):
        self.cycle = cycle


def transitive_closure(relation: Iterable[tuple[str, str]], elements: Sequence[str]) -> set[tuple[str, str]]:
    """Smallest transitive superset of a strict relation, as a set of pairs."""
    index = {e: i for i, e in enumerate(elements)}
    succ = [0] * len(elements)
    for a, b in relation:
        if a not in index or b not in index:
            raise KeyError(f"relation ({a}, {b}) references an unknown element")
        succ[index[a]] |= 1 << index[b]
    try:
        up = _close(len(elements), succ)
    except _Cycle as exc:
        raise CycleError([elements[i] for i in exc.cycle]) from None
    return {(elements[i], elements[j]) for i in range(len(elements)) for j in iter_bits(up[i])}


class Fpo:
    """Immutable framed partial order.

    ``relations`` may be any generating set of strict pairs ``(a, b)``
    meaning ``a < b``; it is closed on construction.  With ``check=True``
    (the default) an invalid frame raises :class:`InvalidFpoError`; pass
    ``check=False`` to build an object that :func:`validate_fpo` can report on.
    """

    __slots__ = ("elements", "inputs", "outputs", "_index", "_up", "_down", "_key")

    def __init__(self, elements: Iterable[str], relations: Iterable[tuple[str, str]] = (),
                 inputs: Iterable[str] = (), outputs: Iterable[str] = (), *, check: bool = True):
        elements = tuple(str(e) for e in elements)
        index: dict[str, int] = {}
        problems = []
        for i, e in enumerate(elements):
            if e in index:
                problems.append(f"duplicate element id {e}")
            index[e] = i
        inputs = tuple(str(e) for e in inputs)
        outputs = tuple(str(e) for e in outputs)
        for e in inputs + outputs:
            if e not in index:
                problems.append(f"unknown frame element {e}")
        n = len(elements)
        succ = [0] * n
        for a, b in relations:
            a, b = str(a), str(b)
            if a not in index or b not in index:
                problems.append(f"relation ({a}, {b}) references an unknown element")
                continue
            succ[index[a]] |= 1 << index[b]
        if problems:
            raise InvalidFpoError(problems)
        try:
            up = _close(n, succ)
        except _Cycle as exc:
            raise CycleError([elements[i] for i in exc.cycle]) from None
        self._set(elements, inputs, outputs, index, up)
        if check:
            violations = validate_fpo(self)
            if violations:
                raise InvalidFpoError(violations)

    def _set(self, elements, inputs, outputs, index, up):
        object.__setattr__(self, "elements", elements)
        object.__setattr__(self, "inputs", inputs)
        object.__setattr__(self, "outputs", outputs)
        object.__setattr__(self, "_index", index)
        object.__setattr__(self, "_up", tuple(up))
        down = [0] * len(elements)
        for i, mask in enumerate(up):
            for j in iter_bits(mask):
                down[j] |= 1 << i
        object.__setattr__(self, "_down", tuple(down))
        object.__setattr__(self, "_key", None)

    def __setattr__(self, name, value):
        raise AttributeError("Fpo is immutable")

    @classmethod
    def from_closed(cls, elements: Sequence[str], up: Sequence[int], inputs: Sequence[str],
                    outputs: Sequence[str]) -> "Fpo":
        """Build from already closed up-set bitsets (trusted, no checks)."""
        obj = cls.__new__(cls)
        elements = tuple(elements)
        obj._set(elements, tuple(inputs), tuple(outputs), {e: i for i, e in enumerate(elements)}, up)
        return obj

    # basic queries
    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __contains__(self, e) -> bool:
        return e in self._index

    def index(self, e: str) -> int:
        return self._index[e]

    def less(self, a: str, b: str) -> bool:
        return bool(self._up[self._index[a]] >> self._index[b] & 1)

    def leq(self, a: str, b: str) -> bool:
        return a == b or self.less(a, b)

    def comparable(self, a: str, b: str) -> bool:
        return self.leq(a, b) or self.less(b, a)

    def above(self, e: str) -> list[str]:
        return [self.elements[j] for j in iter_bits(self._up[self._index[e]])]

    def below(self, e: str) -> list[str]:
        return [self.elements[j] for j in iter_bits(self._down[self._index[e]])]

    @property
    def fpo_class(self) -> FpoClass:
        return FpoClass(len(self.inputs), len(self.outputs))

    @property
    def frame(self) -> tuple[str, ...]:
        return self.inputs + self.outputs

    @property
    def internal(self) -> tuple[str, ...]:
        frame = set(self.frame)
        return tuple(e for e in self.elements if e not in frame)

    def is_internal(self, e: str) -> bool:
        return e not in self.inputs and e not in self.outputs

    @property
    def relations(self) -> list[tuple[str, str]]:
        """All strict pairs of the closed order, in index order."""
        els = self.elements
        return [(els[i], els[j]) for i in range(len(els)) for j in iter_bits(self._up[i])]

    def matrix(self) -> np.ndarray:
        n = len(self.elements)
        out = np.zeros((n, n), dtype=bool)
        for i in range(n):
            for j in iter_bits(self._up[i]):
                out[i, j] = True
        out.setflags(write=False)
        return out

    # derived FPOs
    def restrict(self, keep: Iterable[str]) -> "Fpo":
        """Sub-FPO on ``keep`` with the induced order; frames are filtered."""
        keep = set(keep)
        idx = [i for i, e in enumerate(self.elements) if e in keep]
        pos = {i: k for k, i in enumerate(idx)}
        up = []
        for i in idx:
            mask = 0
            for j in iter_bits(self._up[i]):
                if j in pos:
                    mask |= 1 << pos[j]
            up.append(mask)
        return Fpo.from_closed([self.elements[i] for i in idx], up,
                               [e for e in self.inputs if e in keep],
                               [e for e in self.outputs if e in keep])

    def without(self, *removed: str) -> "Fpo":
        gone = set(removed)
        return self.restrict(e for e in self.elements if e not in gone)

    def relabel(self, mapping: dict[str, str]) -> "Fpo":
        """Rename elements; ids missing from ``mapping`` are kept."""
        ren = [mapping.get(e, e) for e in self.elements]
        if len(set(ren)) != len(ren):
            raise InvalidFpoError(["relabelling is not injective"])
        return Fpo.from_closed(ren, self._up, [mapping.get(e, e) for e in self.inputs],
                               [mapping.get(e, e) for e in self.outputs])

    def reorder(self, order: Sequence[str]) -> "Fpo":
        """Same FPO with the element list permuted to ``order``."""
        if sorted(order) != sorted(self.elements):
            raise ValueError("order must be a permutation of the elements")
        perm = [self._index[e] for e in order]
        pos = {old: new for new, old in enumerate(perm)}
        up = []
        for old in perm:
            mask = 0
            for j in iter_bits(self._up[old]):
                mask |= 1 << pos[j]
            up.append(mask)
        return Fpo.from_closed(order, up, self.inputs, self.outputs)

    # equality, hashing, serialization
    def _eq_key(self):
        if self._key is None:
            object.__setattr__(self, "_key", (frozenset(self.elements), self.inputs, self.outputs,
                                              frozenset(self.relations)))
        return self._key

    def __eq__(self, other) -> bool:
        return isinstance(other, Fpo) and self._eq_key() == other._eq_key()

    def __hash__(self) -> int:
        return hash(self._eq_key())

    def __repr__(self) -> str:
        rels = ", ".join(f"{a}<{b}" for a, b in hasse_reduction(self))
        return (f"Fpo(inputs={list(self.inputs)}, outputs={list(self.outputs)}, "
                f"internal={list(self.internal)}, hasse=[{rels}])")

    def to_dict(self) -> dict:
        return {"elements": list(self.elements), "inputs": list(self.inputs),
                "outputs": list(self.outputs), "relations": [list(p) for p in self.relations]}

    @classmethod
    def from_dict(cls, data: dict, check: bool = True) -> "Fpo":
        try:
            return cls(data["elements"], [tuple(p) for p in data.get("relations", [])],
                       data.get("inputs", []), data.get("outputs", []), check=check)
        except KeyError as exc:
            raise InvalidFpoError([f"missing field {exc.args[0]}"]) from None

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "Fpo":
        return cls.from_dict(json.loads(text))


def frame_only(m: int, n: int, relations: Iterable[tuple[int, int]] = (),
               input_names: Sequence[str] | None = None, output_names: Sequence[str] | None = None) -> Fpo:
    """Frame-only FPO; ``relations`` holds (input index, output index) pairs."""
    ins = list(input_names) if input_names else [f"I{k + 1}" for k in range(m)]
    outs = list(output_names) if output_names else [f"O{k + 1}" for k in range(n)]
    return Fpo(ins + outs, [(ins[i], outs[j]) for i, j in relations], ins, outs)


def validate_fpo(fpo: Fpo) -> list[str]:
    """List every violated frame invariant, each with a witness element."""
    out = []
    both = set(fpo.inputs) & set(fpo.outputs)
    for e in sorted(both):
        out.append(f"frames not disjoint: {e}")
    for label, frame in (("input", fpo.inputs), ("output", fpo.outputs)):
        seen = set()
        for e in frame:
            if e in seen:
                out.append(f"duplicate {label} {e}")
            seen.add(e)
    for e in fpo.inputs:
        if fpo._down[fpo.index(e)]:
            out.append(f"input not minimal: {e} (above {fpo.below(e)[0]})")
    for e in fpo.outputs:
        if fpo._up[fpo.index(e)]:
            out.append(f"output not maximal: {e} (below {fpo.above(e)[0]})")
    return out


def hasse_reduction(fpo: Fpo) -> list[tuple[str, str]]:
    """Covering pairs ``a`` ⋖ ``b`` in index order."""
    out = []
    up, down, els = fpo._up, fpo._down, fpo.elements
    for i in range(len(els)):
        for j in iter_bits(up[i]):
            if not up[i] & down[j]:
                out.append((els[i], els[j]))
    return out


def _height(fpo: Fpo) -> int:
    memo: dict[int, int] = {}

    def h(i):
        if i not in memo:
            memo[i] = 1 + max((h(j) for j in iter_bits(fpo._up[i])), default=0)
        return memo[i]

    return max((h(i) for i in range(len(fpo))), default=0)


def _width(fpo: Fpo) -> int:
    # Dilworth: minimum chain cover = n - maximum matching in the comparability bipartite graph
    n = len(fpo)
    match_right = [-1] * n

    def augment(i, seen):
        for j in iter_bits(fpo._up[i]):
            if seen[j]:
                continue
            seen[j] = True
            if match_right[j] < 0 or augment(match_right[j], seen):
                match_right[j] = i
                return True
        return False

    matching = sum(augment(i, [False] * n) for i in range(n))
    return n - matching


def chain_report(fpo: Fpo) -> ChainReport:
    strict = sum(m.bit_count() for m in fpo._up)
    return ChainReport(_height(fpo), _width(fpo), len(fpo) + strict, len(hasse_reduction(fpo)))


def parallel_compose(a: Fpo, b: Fpo) -> Fpo:
    """Disjoint union; colliding ids of ``b`` get primes appended."""
    taken = set(a.elements)
    rename = {}
    for e in b.elements:
        new = e
        while new in taken or (new != e and new in b._index):
            new += "'"
        rename[e] = new
        taken.add(new)
    shift = len(a)
    up = list(a._up) + [m << shift for m in b._up]
    return Fpo.from_closed(list(a.elements) + [rename[e] for e in b.elements], up,
                           list(a.inputs) + [rename[e] for e in b.inputs],
                           list(a.outputs) + [rename[e] for e in b.outputs])


def internal_connection(fpo: Fpo, x: str) -> frozenset[str]:
    """Elements reachable from ``x`` along paths whose intermediate elements are internal."""
    frame = set(fpo.frame)
    start = fpo.index(x)
    seen = 1 << start
    todo = [start]
    while todo:
        i = todo.pop()
        for j in iter_bits((fpo._up[i] | fpo._down[i]) & ~seen):
            seen |= 1 << j
            if fpo.elements[j] not in frame:
                todo.append(j)
    return frozenset(fpo.elements[j] for j in iter_bits(seen))


def internal_connection_components(fpo: Fpo) -> list[frozenset[str]]:
    """Distinct internal-connection sets over all elements, in first-seen order."""
    out: list[frozenset[str]] = []
    for e in fpo.elements:
        comp = internal_connection(fpo, e)
        if comp not in out:
            out.append(comp)
    return out


def connected_components(fpo: Fpo) -> list[list[str]]:
    """Components of the comparability graph, each in element order."""
    seen = 0
    comps = []
    for i in range(len(fpo)):
        if seen >> i & 1:
            continue
        comp = 1 << i
        todo = [i]
        while todo:
            k = todo.pop()
            for j in iter_bits((fpo._up[k] | fpo._down[k]) & ~comp):
                comp |= 1 << j
                todo.append(j)
        seen |= comp
        comps.append([fpo.elements[j] for j in iter_bits(comp)])
    return comps


def random_fpo(rng: random.Random, max_order: int = 8, m: int | None = None, n: int | None = None,
               density: float | None = None) -> Fpo:
    """Random valid FPO; inputs are drawn as sources and outputs as sinks of a random DAG."""
    if m is None:
        m = rng.randint(0, min(2, max_order))
    if n is None:
        n = rng.randint(0, min(2, max_order - m))
    k = rng.randint(0, max_order - m - n)
    p = rng.uniform(0.15, 0.6) if density is None else density
    ins = [f"I{i + 1}" for i in range(m)]
    outs = [f"O{i + 1}" for i in range(n)]
    mid = [f"x{i + 1}" for i in range(k)]
    rels = []
    for i, a in enumerate(mid):
        for b in mid[i + 1:]:
            if rng.random() < p:
                rels.append((a, b))
    for a in ins:
        for b in mid + outs:
            if rng.random() < p:
                rels.append((a, b))
    for a in mid:
        for b in outs:
            if rng.random() < p:
                rels.append((a, b))
    els = ins + mid + outs
    rng.shuffle(els)
    return Fpo(els, rels, ins, outs)


def to_dot(fpo: Fpo, name: str = "fpo") -> str:
    """Graphviz source of the Hasse diagram, drawn bottom to top."""
    def q(e):
        return '"' + e.replace('"', '\\"') + '"'

    lines = [f"digraph {q(name)} {{", "  rankdir=BT;"]
    if fpo.inputs:
        lines.append("  { rank=min; " + " ".join(q(e) + ";" for e in fpo.inputs) + " }")
    if fpo.outputs:
        lines.append("  { rank=max; " + " ".join(q(e) + ";" for e in fpo.outputs) + " }")
    for e in fpo.elements:
        if fpo.is_internal(e):
            lines.append(f"  {q(e)} [shape=circle, style=filled, fillcolor=black, fontcolor=white];")
        else:
            lines.append(f"  {q(e)} [shape=circle, color=red, fontcolor=red];")
    for a, b in hasse_reduction(fpo):
        lines.append(f"  {q(a)} -> {q(b)};")
    lines.append("}")
    return "\n".join(lines) + "\n"
