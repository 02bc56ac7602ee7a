"""Finite causal sites (spacetime regions as posets) and C-local embeddings."""
from __future__ import annotations

import itertools
import json
import re
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import BudgetExceeded, LocalisationError
from .poset import Fpo, iter_bits


def point_id(coords: Sequence[int]) -> str:
    return ",".join(str(int(c)) for c in coords)


@dataclass(frozen=True, eq=False)
class CausalSite:
    """Points with a closed strict precedence order.

    ``order`` is an Fpo with empty frames; ``coords`` maps point ids to
    integer coordinates ``(t, x1, ..., xd)`` when the site is a lattice.
    """

    order: Fpo
    coords: dict = field(default_factory=dict)
    provenance: dict = field(default_factory=lambda: {"kind": "explicit"})

    @property
    def points(self) -> tuple[str, ...]:
        return self.order.elements

    def __len__(self) -> int:
        return len(self.order)

    def __contains__(self, p) -> bool:
        return p in self.order

    def leq(self, p: str, q: str) -> bool:
        return self.order.leq(p, q)

    def less(self, p: str, q: str) -> bool:
        return self.order.less(p, q)

    def point_at(self, coords: Sequence[int]) -> str:
        pid = point_id(coords)
        if pid not in self.order:
            raise LocalisationError(f"no site point at {list(coords)}")
        return pid

    @classmethod
    def explicit(cls, points: Sequence[str], relations: Sequence[tuple[str, str]]) -> "CausalSite":
        return cls(Fpo(points, relations))

    def to_dict(self) -> dict:
        return {"points": list(self.points), "relations": [list(p) for p in self.order.relations],
                "coords": {k: list(v) for k, v in self.coords.items()}, "provenance": self.provenance}

    @classmethod
    def from_dict(cls, data: dict) -> "CausalSite":
        order = Fpo(data["points"], [tuple(p) for p in data.get("relations", [])])
        coords = {k: tuple(v) for k, v in data.get("coords", {}).items()}
        return cls(order, coords, data.get("provenance", {"kind": "explicit"}))


def causally_precedes(p: Sequence[int], q: Sequence[int], strict_timelike: bool = False) -> bool:
    """``p <= q`` in Minkowski order with exact integer arithmetic."""
    dt = q[0] - p[0]
    dx2 = sum((b - a) ** 2 for a, b in zip(p[1:], q[1:]))
    if strict_timelike:
        return (dt > 0 and dt * dt > dx2) or (dt == 0 and dx2 == 0)
    return dt >= 0 and dt * dt >= dx2


def minkowski_lattice(d: int, t_range: tuple[int, int], x_ranges, strict_timelike: bool = False) -> CausalSite:
    """Integer lattice in 1+d dimensions; ranges are inclusive ``(lo, hi)`` pairs.

    ``x_ranges`` is one pair used for every spatial axis or a list of d pairs.
    Lightlike separated points are related unless ``strict_timelike``.
    """
    if x_ranges and isinstance(x_ranges[0], int):
        x_ranges = [tuple(x_ranges)] * d
    if len(x_ranges) != d:
        raise ValueError("need one spatial range per dimension")
    axes = [range(t_range[0], t_range[1] + 1)] + [range(lo, hi + 1) for lo, hi in x_ranges]
    pts = np.array(list(itertools.product(*axes)), dtype=np.int64).reshape(-1, d + 1)
    diff = pts[None, :, :] - pts[:, None, :]  # diff[i, j] = q_j - p_i
    dt = diff[:, :, 0]
    dx2 = (diff[:, :, 1:] ** 2).sum(axis=2)
    if strict_timelike:
        rel = (dt > 0) & (dt * dt > dx2)
    else:
        rel = (dt >= 0) & (dt * dt >= dx2)
    np.fill_diagonal(rel, False)
    ids = [point_id(p) for p in pts]
    up = []
    for row in rel:
        mask = 0
        for j in np.flatnonzero(row):
            mask |= 1 << int(j)
        up.append(mask)
    coords = {pid: tuple(int(c) for c in p) for pid, p in zip(ids, pts)}
    prov = {"kind": "minkowski_lattice", "d": d, "t": list(t_range), "x": [list(r) for r in x_ranges],
            "strict_timelike": strict_timelike}
    return CausalSite(Fpo.from_closed(ids, up, (), ()), coords, prov)


def disjoint_union(a: CausalSite, b: CausalSite) -> CausalSite:
    """Both sites side by side with no relations between them; clashing ids of ``b`` get primes."""
    taken = set(a.points)
    rename = {}
    for p in b.points:
        new = p
        while new in taken or (new != p and new in b):
            new += "'"
        rename[p] = new
        taken.add(new)
    shift = len(a)
    up = list(a.order._up) + [m << shift for m in b.order._up]
    order = Fpo.from_closed(list(a.points) + [rename[p] for p in b.points], up, (), ())
    coords = dict(a.coords)
    coords.update({rename[p]: c for p, c in b.coords.items()})
    return CausalSite(order, coords, {"kind": "disjoint_union", "children": [a.provenance, b.provenance]})


_RANGE = re.compile(r"^(-?\d+)\.\.(-?\d+)$")


def parse_site(text: str) -> CausalSite:
    """Parse ``mink:d=1,t=-4..4,x=-4..4`` (``x1=``, ``x2=`` for per-axis ranges; ``lightlike=0`` for strict mode)."""
    if not text.startswith("mink:"):
        raise ValueError(f"unknown site description {text!r}")
    fields = {}
    for part in text[5:].split(","):
        if "=" not in part:
            raise ValueError(f"bad site field {part!r}")
        k, v = part.split("=", 1)
        fields[k.strip()] = v.strip()

    def rng(v):
        m = _RANGE.match(v)
        if not m:
            raise ValueError(f"bad range {v!r}")
        return int(m.group(1)), int(m.group(2))

    d = int(fields.get("d", 1))
    t = rng(fields.get("t", "0..0"))
    if "x" in fields:
        xs = [rng(fields["x"])] * d
    else:
        xs = [rng(fields.get(f"x{k + 1}", "0..0")) for k in range(d)]
    strict = fields.get("lightlike", "1") in ("0", "false", "no")
    return minkowski_lattice(d, t, xs, strict_timelike=strict)


@dataclass(frozen=True)
class Localisation:
    """Frame element id -> site point id."""

    points: dict

    def __getitem__(self, e: str) -> str:
        return self.points[e]

    def check(self, site: CausalSite, frame: Sequence[str]) -> None:
        missing = [e for e in frame if e not in self.points]
        if missing:
            raise LocalisationError(f"no point for frame element(s) {', '.join(missing)}")
        absent = [p for p in (self.points[e] for e in frame) if p not in site]
        if absent:
            raise LocalisationError(f"localised point(s) not in site: {', '.join(absent)}")

    @classmethod
    def from_dict(cls, data: dict, site: CausalSite | None = None) -> "Localisation":
        out = {}
        for e, v in data.items():
            if isinstance(v, (list, tuple)):
                out[e] = point_id(v) if site is None else site.point_at(v)
            else:
                out[e] = str(v)
        return cls(out)

    def to_dict(self) -> dict:
        return dict(self.points)


@dataclass(frozen=True)
class Embedding:
    """FPO element id -> site point id."""

    assignment: dict

    def __getitem__(self, e: str) -> str:
        return self.assignment[e]

    def to_dict(self) -> dict:
        return dict(self.assignment)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def unanchored(fpo: Fpo) -> list[str]:
    """Internal elements above no input and below no output."""
    out = []
    for x in fpo.internal:
        if not any(fpo.less(i, x) for i in fpo.inputs) and not any(fpo.less(x, o) for o in fpo.outputs):
            out.append(x)
    return out


def site_window_fpo(site: CausalSite, loc: Localisation, frame: Fpo | tuple[Sequence[str], Sequence[str]],
                    full: bool = False) -> Fpo:
    """Finite FPO target whose FOP maps correspond to C-local embeddings.

    Frame elements are fresh copies named after the FPO's frame ids, with
    ``X < p`` iff ``C(X) <= p`` and ``p < A`` iff ``p <= C(A)``; internal
    elements are the site points above a localised input or below a
    localised output (every point with ``full``), ordered as in the site.
    """
    inputs, outputs = (frame.inputs, frame.outputs) if isinstance(frame, Fpo) else frame
    inputs, outputs = list(inputs), list(outputs)
    loc.check(site, inputs + outputs)
    order = site.order
    idx = order._index
    if full:
        keep = (1 << len(order)) - 1
    else:
        keep = 0
        for e in inputs:
            i = idx[loc[e]]
            keep |= order._up[i] | 1 << i
        for e in outputs:
            i = idx[loc[e]]
            keep |= order._down[i] | 1 << i
    pts = list(iter_bits(keep))
    pos = {p: k for k, p in enumerate(pts)}
    m = len(inputs)
    shift = m
    names = inputs + [order.elements[p] for p in pts] + outputs
    clash = set(inputs + outputs) & {order.elements[p] for p in pts}
    if clash:
        raise LocalisationError(f"frame ids clash with site point ids: {', '.join(sorted(clash))}")
    n_pts = len(pts)
    out_base = m + n_pts
    le_out = []
    for e in outputs:
        le_out.append(order._down[idx[loc[e]]] | 1 << idx[loc[e]])
    up = []
    for e in inputs:
        i = idx[loc[e]]
        ge = (order._up[i] | 1 << i) & keep
        mask = sum(1 << (shift + pos[p]) for p in iter_bits(ge))
        for k, f in enumerate(outputs):
            if order.leq(loc[e], loc[f]):
                mask |= 1 << (out_base + k)
        up.append(mask)
    for p in pts:
        mask = sum(1 << (shift + pos[q]) for q in iter_bits(order._up[p] & keep))
        for k in range(len(outputs)):
            if le_out[k] >> p & 1:
                mask |= 1 << (out_base + k)
        up.append(mask)
    up += [0] * len(outputs)
    return Fpo.from_closed(names, up, inputs, outputs)


def window_for(fpo: Fpo, site: CausalSite, loc: Localisation) -> Fpo:
    return site_window_fpo(site, loc, fpo, full=bool(unanchored(fpo)))


def is_c_local_embedding(fpo: Fpo, site: CausalSite, loc: Localisation, emb: Embedding) -> bool:
    for e in fpo.frame:
        if emb[e] != loc[e]:
            return False
    for a, b in fpo.relations:
        if not site.leq(emb[a], emb[b]):
            return False
    return True


def c_local_embed(fpo: Fpo, site: CausalSite, loc: Localisation, budget: int | None = None) -> Embedding | None:
    """Order-preserving map into the site that sends each frame element to its localised point.

    Direct backtracking over site points: internal elements are placed in
    a topological order, each restricted to points consistent with the
    localised frame and with already placed comparable elements.
    """
    loc.check(site, fpo.frame)
    order = site.order
    idx = order._index
    full = (1 << len(order)) - 1
    ge = [m | 1 << i for i, m in enumerate(order._up)]
    le = [m | 1 << i for i, m in enumerate(order._down)]
    placed = {e: idx[loc[e]] for e in fpo.frame}
    for a, b in fpo.relations:
        if a in placed and b in placed and not ge[placed[a]] >> placed[b] & 1:
            return None
    internal = sorted(fpo.internal, key=lambda e: (fpo._down[fpo.index(e)].bit_count(), fpo.index(e)))
    nodes = [0]

    def candidates(e):
        mask = full
        i = fpo.index(e)
        for j in iter_bits(fpo._down[i]):
            f = fpo.elements[j]
            if f in placed:
                mask &= ge[placed[f]]
        for j in iter_bits(fpo._up[i]):
            f = fpo.elements[j]
            if f in placed:
                mask &= le[placed[f]]
        return mask

    def rec(k):
        if k == len(internal):
            return True
        e = internal[k]
        for p in iter_bits(candidates(e)):
            nodes[0] += 1
            if budget is not None and nodes[0] > budget:
                raise BudgetExceeded(budget)
            placed[e] = p
            if rec(k + 1):
                return True
            del placed[e]
        return False

    if not rec(0):
        return None
    return Embedding({e: order.elements[placed[e]] for e in fpo.elements})


def embedding_from_window_map(fpo: Fpo, loc: Localisation, assignment: dict) -> Embedding:
    """Translate a FOP map into a site window back to site points."""
    frame_copies = set(fpo.frame)
    return Embedding({e: loc[t] if t in frame_copies else t for e, t in assignment.items()})
