"""Canonical forms of FPO types.

Two FPOs of the same class get the same form exactly when a relabelling
(frame-preserving order isomorphism) exists between them.  The frame is
pinned, so only internal elements are permuted: colour refinement orders
them into cells, then a branch-and-bound search over orderings that respect
the cells picks the lexicographically least relation matrix.
"""
from __future__ import annotations

from dataclasses import dataclass

from .poset import Fpo, iter_bits


@dataclass(frozen=True, order=True)
class CanonicalForm:
    """Serialized canonical relation matrix, elements renamed ``0..N-1``.

    Inputs occupy positions ``0..m-1`` and outputs ``m..m+n-1``.
    """

    key: str

    @property
    def shape(self) -> tuple[int, int, int]:
        head = self.key.split(":", 1)[0]
        m, n, size = (int(x) for x in head.split("."))
        return m, n, size

    @property
    def order(self) -> int:
        return self.shape[2]

    def to_fpo(self) -> Fpo:
        m, n, size = self.shape
        body = self.key.split(":", 1)[1]
        bits = int(body, 16) if body else 0
        up = []
        for i in range(size):
            row = 0
            for j in range(size):
                if bits >> (size * size - 1 - (i * size + j)) & 1:
                    row |= 1 << j
            up.append(row)
        names = [str(i) for i in range(size)]
        return Fpo.from_closed(names, up, names[:m], names[m:m + n])

    def __str__(self) -> str:
        return self.key


def _serialize(fpo: Fpo, order: list[int]) -> CanonicalForm:
    size = len(order)
    pos = {v: k for k, v in enumerate(order)}
    bits = 0
    for i, v in enumerate(order):
        for w in iter_bits(fpo._up[v]):
            bits |= 1 << (size * size - 1 - (i * size + pos[w]))
    digits = (size * size + 3) // 4
    body = format(bits, "x").zfill(digits) if digits else ""
    m, n = len(fpo.inputs), len(fpo.outputs)
    return CanonicalForm(f"{m}.{n}.{size}:{body}")


def _refine(fpo: Fpo, internal: list[int], frame: list[int]) -> dict[int, int]:
    fpos = {v: k for k, v in enumerate(frame)}
    inmask = 0
    for v in internal:
        inmask |= 1 << v

    def framebits(mask):
        return sum(1 << fpos[j] for j in iter_bits(mask) if j in fpos)

    sig = {v: (framebits(fpo._down[v]), framebits(fpo._up[v]),
               (fpo._up[v] & inmask).bit_count(), (fpo._down[v] & inmask).bit_count())
           for v in internal}
    colour = _rank(sig)
    ncol = len(set(colour.values()))
    while True:
        sig = {v: (colour[v],
                   tuple(sorted(colour[w] for w in iter_bits(fpo._up[v] & inmask))),
                   tuple(sorted(colour[w] for w in iter_bits(fpo._down[v] & inmask))))
               for v in internal}
        new = _rank(sig)
        k = len(set(new.values()))
        colour = new
        if k == ncol:
            return colour
        ncol = k


def _rank(sig: dict) -> dict[int, int]:
    values = sorted(set(sig.values()))
    where = {s: i for i, s in enumerate(values)}
    return {v: where[s] for v, s in sig.items()}


def _twin_classes(fpo: Fpo, internal: list[int]) -> dict[int, int]:
    """Map each internal element to a representative of its twin class.

    Twins are incomparable and have identical strict up- and down-sets, so
    swapping them is an automorphism.
    """
    rep = {}
    seen = []
    for v in internal:
        for w in seen:
            if fpo._up[v] >> w & 1 or fpo._up[w] >> v & 1:
                continue
            drop = ~((1 << v) | (1 << w))
            if (fpo._up[v] & drop) == (fpo._up[w] & drop) and (fpo._down[v] & drop) == (fpo._down[w] & drop):
                rep[v] = rep[w]
                break
        else:
            rep[v] = v
            seen.append(v)
    return rep


def canonical_labelling(fpo: Fpo) -> list[str]:
    """Element ids listed in canonical position order."""
    frame = [fpo.index(e) for e in fpo.frame]
    fset = set(frame)
    internal = [v for v in range(len(fpo)) if v not in fset]
    if not internal:
        return [fpo.elements[v] for v in frame]
    colour = _refine(fpo, internal, frame)
    twins = _twin_classes(fpo, internal)
    cells: list[list[int]] = []
    for c in sorted(set(colour.values())):
        cells.append([v for v in internal if colour[v] == c])
    up = fpo._up

    def step_key(placed, v):
        k = 0
        for q in placed:
            k = (k << 2) | ((up[q] >> v & 1) << 1) | (up[v] >> q & 1)
        return k

    best_keys: list[int] = []
    best_order: list[int] = []
    order = list(frame)
    keys: list[int] = []

    def dfs(cell_i, remaining):
        nonlocal best_keys, best_order
        if cell_i == len(cells):
            if not best_order or keys < best_keys:
                best_keys = list(keys)
                best_order = list(order)
            return
        if not remaining:
            nxt = cell_i + 1
            dfs(nxt, list(cells[nxt]) if nxt < len(cells) else [])
            return
        depth = len(keys)
        tried = set()
        for v in remaining:
            if twins[v] in tried:
                continue
            tried.add(twins[v])
            keys.append(step_key(order, v))
            if best_order and keys > best_keys[:depth + 1]:
                keys.pop()
                continue
            order.append(v)
            dfs(cell_i, [w for w in remaining if w != v])
            order.pop()
            keys.pop()

    dfs(0, list(cells[0]))
    return [fpo.elements[v] for v in best_order]


def canonical_form(fpo: Fpo) -> CanonicalForm:
    labelling = canonical_labelling(fpo)
    return _serialize(fpo, [fpo.index(e) for e in labelling])


def canonical_fpo(fpo: Fpo) -> Fpo:
    """The FPO with elements renamed and ordered canonically."""
    return canonical_form(fpo).to_fpo()


def is_relabelling_isomorphic(a: Fpo, b: Fpo) -> bool:
    return a.fpo_class == b.fpo_class and len(a) == len(b) and canonical_form(a) == canonical_form(b)
