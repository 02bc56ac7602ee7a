"""Open circuit diagrams and their framed partial orders.

A diagram is a set of boxes with numbered ports, joined by wires to each
other and to the external inputs and outputs.  Every port is used by
exactly one wire.  Wire endpoints are tuples:

* ``("box", id, k)``: port ``k`` of a box (an output port when used as a
  source, an input port when used as a destination);
* ``("in", k)``: the k-th external input (sources only);
* ``("out", k)``: the k-th external output (destinations only).
"""
from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import DiagramError, FopValidationError, QuotientCycleError
from .poset import Fpo, iter_bits
from .search import FopMap, fop_violation

Endpoint = tuple


@dataclass(frozen=True)
class Box:
    id: str
    n_in: int
    n_out: int
    contents: tuple[str, ...] = ()


@dataclass(frozen=True)
class Wire:
    src: Endpoint
    dst: Endpoint


@dataclass(frozen=True)
class Diagram:
    boxes: tuple[Box, ...]
    wires: tuple[Wire, ...]
    input_names: tuple[str, ...] = ()
    output_names: tuple[str, ...] = ()

    @property
    def ext_inputs(self) -> int:
        return len(self.input_names)

    @property
    def ext_outputs(self) -> int:
        return len(self.output_names)

    def box(self, box_id: str) -> Box:
        for b in self.boxes:
            if b.id == box_id:
                return b
        raise KeyError(box_id)

    def to_dict(self) -> dict:
        return {
            "inputs": list(self.input_names),
            "outputs": list(self.output_names),
            "boxes": [dict({"id": b.id, "in_ports": b.n_in, "out_ports": b.n_out},
                           **({"contents": list(b.contents)} if b.contents else {})) for b in self.boxes],
            "wires": [{"from": _ep_to_json(w.src), "to": _ep_to_json(w.dst)} for w in self.wires],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Diagram":
        ins = data.get("inputs", data.get("ext_inputs", 0))
        outs = data.get("outputs", data.get("ext_outputs", 0))
        ins = [f"I{k + 1}" for k in range(ins)] if isinstance(ins, int) else [str(x) for x in ins]
        outs = [f"O{k + 1}" for k in range(outs)] if isinstance(outs, int) else [str(x) for x in outs]
        try:
            boxes = tuple(Box(str(b["id"]), int(b.get("in_ports", 0)), int(b.get("out_ports", 0)),
                              tuple(b.get("contents", ()))) for b in data.get("boxes", []))
            wires = tuple(Wire(_ep_from_json(w["from"]), _ep_from_json(w["to"])) for w in data.get("wires", []))
        except (KeyError, TypeError, ValueError) as exc:
            raise DiagramError([f"malformed diagram JSON: {exc}"]) from None
        return cls(boxes, wires, tuple(ins), tuple(outs))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _ep_to_json(ep: Endpoint) -> dict:
    if ep[0] == "box":
        return {"box": ep[1], "port": ep[2]}
    return {"input" if ep[0] == "in" else "output": ep[1]}


def _ep_from_json(obj: dict) -> Endpoint:
    if "box" in obj:
        return ("box", str(obj["box"]), int(obj.get("port", 0)))
    if "input" in obj:
        return ("in", int(obj["input"]))
    if "output" in obj:
        return ("out", int(obj["output"]))
    raise ValueError(f"bad endpoint {obj}")


def diagram(boxes: Iterable, wires: Iterable, inputs: Sequence[str] = (), outputs: Sequence[str] = ()) -> Diagram:
    """Convenience constructor; boxes may be ``(id, n_in, n_out)`` tuples."""
    bs = tuple(b if isinstance(b, Box) else Box(*b) for b in boxes)
    ws = tuple(w if isinstance(w, Wire) else Wire(*w) for w in wires)
    return Diagram(bs, ws, tuple(inputs), tuple(outputs))


def validate_diagram(d: Diagram) -> list[str]:
    """Every violated well-formedness condition, each with a witness."""
    out = []
    ids = {}
    for b in d.boxes:
        if b.id in ids:
            out.append(f"duplicate box id {b.id}")
        ids[b.id] = b
    names = list(d.input_names) + list(d.output_names)
    if len(set(names)) != len(names):
        out.append("duplicate external port name")
    for n in names:
        if n in ids:
            out.append(f"name clash between box and external port {n}")
    used_src, used_dst = {}, {}
    for w in d.wires:
        for role, ep, used in (("source", w.src, used_src), ("destination", w.dst, used_dst)):
            kind = ep[0]
            if role == "source" and kind not in ("box", "in") or role == "destination" and kind not in ("box", "out"):
                out.append(f"bad {role} endpoint {ep}")
                continue
            if kind == "box":
                b = ids.get(ep[1])
                if b is None:
                    out.append(f"unknown box {ep[1]}")
                    continue
                limit = b.n_out if role == "source" else b.n_in
                if not 0 <= ep[2] < limit:
                    out.append(f"port out of range {ep}")
                    continue
            else:
                limit = d.ext_inputs if kind == "in" else d.ext_outputs
                if not 0 <= ep[1] < limit:
                    out.append(f"external port out of range {ep}")
                    continue
            if ep in used:
                out.append(f"port used twice {ep}")
            used[ep] = True
    for b in d.boxes:
        for k in range(b.n_out):
            if ("box", b.id, k) not in used_src:
                out.append(f"unused port: output {k} of box {b.id}")
        for k in range(b.n_in):
            if ("box", b.id, k) not in used_dst:
                out.append(f"unused port: input {k} of box {b.id}")
    for k in range(d.ext_inputs):
        if ("in", k) not in used_src:
            out.append(f"unused port: external input {d.input_names[k]}")
    for k in range(d.ext_outputs):
        if ("out", k) not in used_dst:
            out.append(f"unused port: external output {d.output_names[k]}")
    cyc = _box_cycle(d)
    if cyc:
        out.append("cycle: " + " -> ".join(cyc))
    return out


def _box_cycle(d: Diagram) -> list[str] | None:
    succ = {b.id: [] for b in d.boxes}
    for w in d.wires:
        if w.src[0] == "box" and w.dst[0] == "box" and w.src[1] in succ and w.dst[1] in succ:
            succ[w.src[1]].append(w.dst[1])
    return _find_cycle(succ)


def _find_cycle(succ: dict) -> list | None:
    state = {v: 0 for v in succ}
    for root in succ:
        if state[root]:
            continue
        path = [root]
        stack = [iter(succ[root])]
        state[root] = 1
        while stack:
            nxt = next(stack[-1], None)
            if nxt is None:
                stack.pop()
                state[path.pop()] = 2
                continue
            if state[nxt] == 1:
                return path[path.index(nxt):] + [nxt]
            if state[nxt] == 0:
                state[nxt] = 1
                path.append(nxt)
                stack.append(iter(succ[nxt]))
    return None


def require_valid(d: Diagram) -> None:
    problems = validate_diagram(d)
    if problems:
        raise DiagramError(problems)


def _node(d: Diagram, ep: Endpoint) -> str:
    if ep[0] == "box":
        return ep[1]
    return d.input_names[ep[1]] if ep[0] == "in" else d.output_names[ep[1]]


def raw_fpo(d: Diagram) -> Fpo:
    """Order on boxes and external ports given by directed paths, with no identifications."""
    require_valid(d)
    els = list(d.input_names) + [b.id for b in d.boxes] + list(d.output_names)
    rels = [(_node(d, w.src), _node(d, w.dst)) for w in d.wires]
    return Fpo(els, rels, d.input_names, d.output_names)


def _covers(fpo: Fpo, i: int) -> list[int]:
    up = fpo._up[i]
    return [j for j in iter_bits(up) if not up & fpo._down[j]]


def _lower_covers(fpo: Fpo, i: int) -> list[int]:
    down = fpo._down[i]
    return [j for j in iter_bits(down) if not down & fpo._up[j]]


def identification_candidates(fpo: Fpo, phase: str) -> list[tuple[str, str]]:
    """Pairs (internal element, frame element it is identified with).

    ``phase="child"``: the internal element's only cover is an output.
    ``phase="parent"``: its only lower cover is an input.
    """
    out = []
    frame = fpo.outputs if phase == "child" else fpo.inputs
    for e in fpo.internal:
        i = fpo.index(e)
        cov = _covers(fpo, i) if phase == "child" else _lower_covers(fpo, i)
        if len(cov) == 1 and fpo.elements[cov[0]] in frame:
            out.append((e, fpo.elements[cov[0]]))
    return out


def identify(fpo: Fpo, rng: random.Random | None = None) -> tuple[Fpo, dict[str, str]]:
    """Apply both identification passes to fixpoint, child pass first.

    Identifying an internal element with its unique frame cover (or lower
    cover) deletes it while keeping every relation it mediated.  Returns the
    reduced FPO and a map from each deleted element to its frame element.
    ``rng`` picks among candidates at random (used to test confluence).
    """
    absorbed: dict[str, str] = {}
    for phase in ("child", "parent"):
        while True:
            cands = identification_candidates(fpo, phase)
            if not cands:
                break
            e, f = cands[rng.randrange(len(cands))] if rng else cands[0]
            absorbed[e] = f
            fpo = fpo.without(e)
    return fpo, absorbed


def is_identification_normal(fpo: Fpo) -> bool:
    return not identification_candidates(fpo, "child") and not identification_candidates(fpo, "parent")


def diagram_to_fpo_with_members(d: Diagram) -> tuple[Fpo, dict[str, list[str]]]:
    """The diagram's FPO and, per element, the boxes it stands for."""
    fpo, absorbed = identify(raw_fpo(d))
    members: dict[str, list[str]] = {e: [] for e in fpo.elements}
    box_ids = {b.id for b in d.boxes}
    for b in d.boxes:
        members[absorbed.get(b.id, b.id)].append(b.id)
    for e in fpo.internal:
        assert e in box_ids
    return fpo, members


def diagram_to_fpo(d: Diagram, identify_frame: bool = True) -> Fpo:
    """Element per box and external port, ordered by directed paths, then identified."""
    if not identify_frame:
        return raw_fpo(d)
    return diagram_to_fpo_with_members(d)[0]


def _collapse(d: Diagram, group_of: dict, names: dict, order: list, absorb: dict | None = None,
              extra: Sequence[tuple] = ()) -> Diagram:
    """Merge boxes into group boxes.

    ``group_of`` maps box ids (and, for absorbed ports, port endpoints) to
    group keys; ``names`` maps group keys to new box ids; ``extra`` lists
    additional (src group, dst group) wires.
    """
    absorb = absorb or {}
    n_in = {g: 0 for g in order}
    n_out = {g: 0 for g in order}
    wires = []

    def group(ep):
        if ep[0] == "box":
            return group_of[ep[1]]
        return absorb.get(ep)

    def new_src(g):
        n_out[g] += 1
        return ("box", names[g], n_out[g] - 1)

    def new_dst(g):
        n_in[g] += 1
        return ("box", names[g], n_in[g] - 1)

    for ep, g in absorb.items():
        if ep[0] == "in":
            wires.append(Wire(ep, new_dst(g)))
        else:
            wires.append(Wire(new_src(g), ep))
    for w in d.wires:
        gs, gd = group(w.src), group(w.dst)
        if gs is not None and gs == gd:
            continue
        src = w.src if gs is None else new_src(gs)
        dst = w.dst if gd is None else new_dst(gd)
        wires.append(Wire(src, dst))
    for gs, gd in extra:
        wires.append(Wire(new_src(gs), new_dst(gd)))
    contents = {g: [] for g in order}
    for b in d.boxes:
        g = group_of[b.id]
        contents[g].extend(b.contents or (b.id,))
    boxes = tuple(Box(names[g], n_in[g], n_out[g], tuple(contents[g])) for g in order)
    return Diagram(boxes, tuple(wires), d.input_names, d.output_names)


def coarse_grain(d: Diagram, partition: Sequence[Sequence[str]]) -> Diagram:
    """Compose each block of boxes into a single box.

    Singleton blocks keep their box id; larger blocks are named by joining
    their members with ``+``.
    """
    require_valid(d)
    group_of = {}
    for k, block in enumerate(partition):
        for b in block:
            if b in group_of:
                raise DiagramError([f"box {b} appears in two blocks"])
            group_of[b] = k
    missing = [b.id for b in d.boxes if b.id not in group_of]
    unknown = [b for b in group_of if b not in {x.id for x in d.boxes}]
    if missing or unknown:
        raise DiagramError([f"partition does not cover box {b}" for b in missing] +
                           [f"partition names unknown box {b}" for b in unknown])
    names = {k: "+".join(block) for k, block in enumerate(partition)}
    order = list(range(len(partition)))
    succ = {k: set() for k in order}
    for w in d.wires:
        if w.src[0] == "box" and w.dst[0] == "box":
            a, b = group_of[w.src[1]], group_of[w.dst[1]]
            if a != b:
                succ[a].add(b)
    cyc = _find_cycle({k: sorted(v) for k, v in succ.items()})
    if cyc:
        raise QuotientCycleError([names[k] for k in cyc])
    return _collapse(d, group_of, names, order)


def convert_diagram(d: Diagram, fop: FopMap) -> Diagram:
    """Rewrite ``d`` along a FOP map out of its FPO.

    Boxes whose elements share an image are composed into one box.  Targets
    with an empty preimage become unit-scalar boxes (``unit:`` prefix), each
    target frame element gets a box next to its port (an identity box with
    ``id:`` prefix when nothing maps there) and missing relations of the
    target are realised by trivial-system wires.  The FPO of the result is
    the target after identification; each new box records the source boxes
    it contains.
    """
    src, members = diagram_to_fpo_with_members(d)
    if fop.source != src:
        raise FopValidationError("map source is not the FPO of the diagram")
    bad = fop_violation(fop)
    if bad is not None:
        raise FopValidationError(*bad)
    t = fop.target
    group_of = {}
    for e, boxes in members.items():
        for b in boxes:
            group_of[b] = fop(e)
    names = {}
    for y in t.elements:
        has = any(g == y for g in group_of.values())
        if t.is_internal(y):
            names[y] = y if has else f"unit:{y}"
        else:
            names[y] = f"frame:{y}" if has else f"id:{y}"
    absorb = {}
    for k, y in enumerate(t.inputs):
        absorb[("in", k)] = y
    for k, y in enumerate(t.outputs):
        absorb[("out", k)] = y
    existing = set()
    for w in d.wires:
        gs = group_of[w.src[1]] if w.src[0] == "box" else absorb[w.src]
        gd = group_of[w.dst[1]] if w.dst[0] == "box" else absorb[w.dst]
        existing.add((gs, gd))
    extra = [(x, y) for x, y in t.relations if (x, y) not in existing]
    order = [y for y in t.elements]
    return _collapse(d, group_of, names, order, absorb, extra)


def substitute_box(d: Diagram, box_id: str, inner: Diagram, prefix: str | None = None) -> Diagram:
    """Replace a box by a diagram whose external ports match the box's ports."""
    box = d.box(box_id)
    if inner.ext_inputs != box.n_in or inner.ext_outputs != box.n_out:
        raise DiagramError([f"inner diagram arity does not match box {box_id}"])
    prefix = f"{box_id}/" if prefix is None else prefix

    def ren(ep):
        return ("box", prefix + ep[1], ep[2]) if ep[0] == "box" else ep

    feeds = {}  # box input port -> outer source
    takes = {}  # box output port -> outer destination
    wires = []
    for w in d.wires:
        if w.dst[0] == "box" and w.dst[1] == box_id:
            feeds[w.dst[2]] = w.src
        elif w.src[0] == "box" and w.src[1] == box_id:
            takes[w.src[2]] = w.dst
        else:
            wires.append(w)
    for w in inner.wires:
        s = feeds[w.src[1]] if w.src[0] == "in" else ren(w.src)
        t = takes[w.dst[1]] if w.dst[0] == "out" else ren(w.dst)
        wires.append(Wire(s, t))
    boxes = [b for b in d.boxes if b.id != box_id]
    boxes += [Box(prefix + b.id, b.n_in, b.n_out, b.contents) for b in inner.boxes]
    return Diagram(tuple(boxes), tuple(wires), d.input_names, d.output_names)


def fpo_to_diagram(fpo: Fpo) -> Diagram:
    """Diagram whose wires follow the Hasse diagram of ``fpo``.

    Internal elements become boxes with one port per cover; each frame
    element gets a box ``in:x`` or ``out:x`` next to its port, which the
    identification step removes again.
    """
    def bid(e):
        if e in fpo.inputs:
            return f"in:{e}"
        if e in fpo.outputs:
            return f"out:{e}"
        return e

    n_in = {bid(e): 0 for e in fpo.elements}
    n_out = {bid(e): 0 for e in fpo.elements}
    wires = []
    for k, e in enumerate(fpo.inputs):
        wires.append(Wire(("in", k), ("box", bid(e), 0)))
        n_in[bid(e)] = 1
    for a, b in _hasse(fpo):
        sa, sb = bid(a), bid(b)
        wires.append(Wire(("box", sa, n_out[sa]), ("box", sb, n_in[sb])))
        n_out[sa] += 1
        n_in[sb] += 1
    for k, e in enumerate(fpo.outputs):
        wires.append(Wire(("box", bid(e), n_out[bid(e)]), ("out", k)))
        n_out[bid(e)] += 1
    boxes = tuple(Box(bid(e), n_in[bid(e)], n_out[bid(e)]) for e in fpo.elements)
    return Diagram(boxes, tuple(wires), fpo.inputs, fpo.outputs)


def _hasse(fpo: Fpo):
    from .poset import hasse_reduction
    return hasse_reduction(fpo)


def random_diagram(rng: random.Random, m: int, n: int, n_boxes: int, max_ports: int = 2) -> Diagram:
    """Random well-formed diagram built box by box in causal order."""
    ins = tuple(f"I{k + 1}" for k in range(m))
    outs = tuple(f"O{k + 1}" for k in range(n))
    open_ends: list[Endpoint] = [("in", k) for k in range(m)]
    boxes, wires = [], []
    for i in range(n_boxes):
        bid = f"b{i + 1}"
        k_in = rng.randint(0, min(max_ports, len(open_ends)))
        for port in range(k_in):
            src = open_ends.pop(rng.randrange(len(open_ends)))
            wires.append(Wire(src, ("box", bid, port)))
        k_out = rng.randint(0 if i < n_boxes - 1 else 1, max_ports)
        open_ends.extend(("box", bid, port) for port in range(k_out))
        boxes.append(Box(bid, k_in, k_out))
    extra = 0
    while len(open_ends) < n:
        bid = f"s{extra + 1}"
        extra += 1
        boxes.append(Box(bid, 0, 1))
        open_ends.append(("box", bid, 0))
    rng.shuffle(open_ends)
    for k in range(n):
        wires.append(Wire(open_ends.pop(), ("out", k)))
    if open_ends:
        boxes.append(Box("discard", len(open_ends), 0))
        for port, src in enumerate(open_ends):
            wires.append(Wire(src, ("box", "discard", port)))
    return Diagram(tuple(boxes), tuple(wires), ins, outs)
