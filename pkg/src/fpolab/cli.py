"""Command-line interface.

Exit codes: 0 affirmative answer, 1 negative answer, 2 usage or validation
error, 3 search budget exceeded.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import os
import random
import sys
from pathlib import Path

from . import enumeration as en
from . import quantum as qm
from . import search as fs
from . import spacetime as st
from .diagram import Diagram, diagram_to_fpo, validate_diagram
from .errors import BudgetExceeded, FpoError
from .poset import Fpo, to_dot

EXIT_YES, EXIT_NO, EXIT_USAGE, EXIT_BUDGET = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _read_json(path: str):
    try:
        return json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise UsageError(f"no such file: {path}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: invalid JSON ({exc})") from None


def _read_fpo(path: str) -> Fpo:
    return Fpo.from_dict(_read_json(path))


def _emit(text: str, out: str | None) -> None:
    if not text.endswith("\n"):
        text += "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _dump(obj) -> str:
    return json.dumps(obj, indent=1, sort_keys=True)


def _budget(args) -> int | None:
    value = args.budget
    if value is None:
        env = os.environ.get("FPOLAB_BUDGET")
        if env:
            try:
                value = int(env)
            except ValueError:
                raise UsageError(f"FPOLAB_BUDGET must be an integer, got {env!r}") from None
    if value is not None and value <= 0:
        raise UsageError("budget must be positive")
    return value


def _note(msg: str) -> None:
    print(msg, file=sys.stderr)


# subcommands

def cmd_g(args) -> int:
    d = Diagram.from_dict(_read_json(args.diagram))
    problems = validate_diagram(d)
    if problems:
        for p in problems:
            _note(p)
        return EXIT_USAGE
    if args.dry_run:
        return EXIT_YES
    fpo = diagram_to_fpo(d, identify_frame=not args.no_identify)
    _emit(_dump(fpo.to_dict()), args.out)
    return EXIT_YES


def cmd_embeds(args) -> int:
    lhs, rhs = _read_fpo(args.lhs), _read_fpo(args.rhs)
    if lhs.fpo_class != rhs.fpo_class:
        raise UsageError(f"class mismatch: {lhs.fpo_class} vs {rhs.fpo_class}")
    if args.dry_run:
        return EXIT_YES
    m = fs.find_fop_map(lhs, rhs, _budget(args))
    if m is None:
        print("no FOP map")
        return EXIT_NO
    text = _dump(m.to_dict())
    if args.witness:
        Path(args.witness).write_text(text + "\n")
    print(_dump(m.assignment))
    return EXIT_YES


def cmd_classify(args) -> int:
    m = fs.FopMap.from_dict(_read_json(args.map))
    if args.dry_run:
        return EXIT_YES
    c = fs.classify_map(m)
    out = {"class": c.map_class.name if c.map_class else None, "reason": c.reason,
           "witness": list(c.witness) if c.witness else None}
    print(_dump(out))
    return EXIT_YES if c.map_class is not None else EXIT_NO


def cmd_minrep(args) -> int:
    s = _read_fpo(args.input)
    if args.dry_run:
        return EXIT_YES
    r = fs.minimal_representative(s, args.strategy, _budget(args))
    _emit(_dump(r.to_dict()), args.out)
    return EXIT_YES


def _source_hash() -> str:
    h = hashlib.sha256()
    for path in sorted(Path(__file__).parent.glob("*.py")):
        h.update(path.name.encode())
        h.update(path.read_bytes())
    return h.hexdigest()[:16]


def _cache_dir(args) -> Path | None:
    if args.no_cache:
        return None
    if args.cache_dir:
        return Path(args.cache_dir)
    env = os.environ.get("FPOLAB_CACHE")
    return Path(env) if env else Path.home() / ".cache" / "fpolab"


def cmd_enumerate(args) -> int:
    filt = en.FILTER_ALIASES.get(args.filter, args.filter)
    if filt not in en.FILTERS:
        raise UsageError(f"unknown filter {args.filter}")
    if args.max_order < args.inputs + args.outputs or min(args.inputs, args.outputs) < 0:
        raise UsageError("max-order must be at least inputs + outputs")
    if args.dry_run:
        return EXIT_YES
    cache = _cache_dir(args)
    key = f"{args.inputs}-{args.outputs}-{args.max_order}-{filt}-{args.strategy}-{_source_hash()}"
    cached = cache / f"catalog-{key}.json" if cache else None
    if cached and cached.exists():
        text = cached.read_text()
    else:
        cat = en.enumerate_minimal_representatives((args.inputs, args.outputs), args.max_order, filt,
                                                   args.strategy, workers=args.threads)
        text = cat.to_json()
        if cached:
            try:
                cache.mkdir(parents=True, exist_ok=True)
                cached.write_text(text)
            except OSError as exc:
                _note(f"cache not written: {exc}")
    _emit(text, args.out)
    _note(f"{len(json.loads(text))} frame-permutation classes")
    return EXIT_YES


def cmd_named(args) -> int:
    links = json.loads(args.links) if args.links else ()
    pairs = json.loads(args.pairs) if args.pairs else ()
    fpo = en.catalog_named(args.name, args.n, args.inputs, args.outputs, links, pairs)
    if args.dry_run:
        return EXIT_YES
    _emit(_dump(fpo.to_dict()), args.out)
    return EXIT_YES


def _load_site(text: str, strict: bool) -> st.CausalSite:
    if text.startswith("mink:"):
        if strict and "lightlike=" not in text:
            text += ",lightlike=0"
        try:
            return st.parse_site(text)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    return st.CausalSite.from_dict(_read_json(text))


def cmd_embed_spacetime(args) -> int:
    fpo = _read_fpo(args.fpo)
    site = _load_site(args.site, args.strict_timelike)
    loc = st.Localisation.from_dict(_read_json(args.loc), site)
    loc.check(site, fpo.frame)
    if args.dry_run:
        return EXIT_YES
    emb = st.c_local_embed(fpo, site, loc, _budget(args))
    if emb is None:
        print("no C-local embedding")
        return EXIT_NO
    text = _dump({"fpo": fpo.to_dict(), "localisation": loc.to_dict(), "site": site.provenance,
                  "embedding": emb.to_dict()})
    if args.witness:
        Path(args.witness).write_text(text + "\n")
    print(_dump(emb.to_dict()))
    return EXIT_YES


def cmd_exogenise(args) -> int:
    s = _read_fpo(args.input)
    if args.dry_run:
        if not en.is_causal_relevant(s):
            raise UsageError("input has internal maximal elements")
        return EXIT_YES
    _emit(_dump(en.exogenise(s).to_dict()), args.out)
    return EXIT_YES


def _load_gate(text: str) -> qm.UnitaryGate:
    if text.lower() in qm.GATES:
        return qm.named_gate(text)
    return qm.UnitaryGate.from_dict(_read_json(text))


def cmd_quantum(args) -> int:
    gate = _load_gate(args.gate)
    if args.dry_run:
        return EXIT_YES
    if args.qcmd == "evcond":
        states = qm.basis_states(args.basis)
        res = qm.evcond_check(gate, states, states)
        print(_dump(res.to_dict()))
        return EXIT_YES if res.holds else EXIT_NO
    if args.qcmd == "clifford":
        res = qm.is_clifford_22(gate)
        print(_dump(res.to_dict()))
        return EXIT_YES if res.is_clifford else EXIT_NO
    res = qm.is_clifford_22(gate)
    if not res.is_clifford:
        print(_dump(res.to_dict()))
        return EXIT_NO
    choi = qm.zigzag1_channel(gate)
    dist = qm.choi_distance(choi, qm.choi_of_unitary(gate))
    ok = dist < 1e-9
    report = {"distance": dist, "matches": ok, "choi_violations": choi.violations()}
    if args.report:
        report["tableau"] = res.to_dict()["tableau"]
    print(_dump(report))
    return EXIT_YES if ok else EXIT_NO


def cmd_dot(args) -> int:
    fpo = _read_fpo(args.input)
    if args.dry_run:
        return EXIT_YES
    _emit(to_dot(fpo, Path(args.input).stem), args.out)
    return EXIT_YES


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--budget", type=int, default=None, help="search node budget (default: $FPOLAB_BUDGET or unlimited)")
    common.add_argument("--seed", type=int, default=0, help="seed for randomized choices")
    common.add_argument("--threads", type=int, default=1, help="worker processes")
    common.add_argument("--dry-run", action="store_true", help="validate inputs without searching")

    p = argparse.ArgumentParser(prog="fpolab", description="Framed partial orders and causal embeddability.")
    sub = p.add_subparsers(dest="cmd", required=True)

    s = sub.add_parser("g", parents=[common], help="FPO of a diagram")
    s.add_argument("--diagram", required=True)
    s.add_argument("--out")
    s.add_argument("--no-identify", action="store_true", help="skip frame identifications")
    s.set_defaults(func=cmd_g)

    s = sub.add_parser("embeds", parents=[common], help="search for a FOP map lhs -> rhs")
    s.add_argument("--lhs", required=True)
    s.add_argument("--rhs", required=True)
    s.add_argument("--witness")
    s.set_defaults(func=cmd_embeds)

    s = sub.add_parser("classify", parents=[common], help="classify a map as FOP, FOE or relabelling")
    s.add_argument("--map", required=True)
    s.set_defaults(func=cmd_classify)

    s = sub.add_parser("minrep", parents=[common], help="minimal representative")
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--out")
    s.add_argument("--strategy", choices=["general", "idempotent"], default="general")
    s.set_defaults(func=cmd_minrep)

    s = sub.add_parser("enumerate", parents=[common], help="catalog of minimal representatives")
    s.add_argument("--inputs", type=int, required=True)
    s.add_argument("--outputs", type=int, required=True)
    s.add_argument("--max-order", type=int, required=True)
    s.add_argument("--filter", default="all", help="all | causal | markov | det")
    s.add_argument("--strategy", choices=["general", "idempotent"], default="general")
    s.add_argument("--out")
    s.add_argument("--cache-dir")
    s.add_argument("--no-cache", action="store_true")
    s.set_defaults(func=cmd_enumerate)

    s = sub.add_parser("named", parents=[common], help="named FPO family member")
    s.add_argument("--name", required=True)
    s.add_argument("--n", type=int)
    s.add_argument("--inputs", type=int)
    s.add_argument("--outputs", type=int)
    s.add_argument("--links", help="JSON list of output-index lists, one per input")
    s.add_argument("--pairs", help="JSON list of output index pairs")
    s.add_argument("--out")
    s.set_defaults(func=cmd_named)

    s = sub.add_parser("embed-spacetime", parents=[common], help="C-local embedding into a causal site")
    s.add_argument("--fpo", required=True)
    s.add_argument("--site", required=True, help="mink:d=1,t=-4..4,x=-4..4 or a site JSON file")
    s.add_argument("--loc", required=True)
    s.add_argument("--witness")
    s.add_argument("--strict-timelike", action="store_true", help="do not relate lightlike separated points")
    s.set_defaults(func=cmd_embed_spacetime)

    s = sub.add_parser("exogenise", parents=[common], help="Markov reduction")
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--out")
    s.set_defaults(func=cmd_exogenise)

    s = sub.add_parser("quantum", help="quantum checks")
    qsub = s.add_subparsers(dest="qcmd", required=True)
    q = qsub.add_parser("evcond", parents=[common])
    q.add_argument("--gate", required=True)
    q.add_argument("--basis", default="zero-plus")
    q.set_defaults(func=cmd_quantum)
    q = qsub.add_parser("clifford", parents=[common])
    q.add_argument("--gate", required=True)
    q.set_defaults(func=cmd_quantum)
    q = qsub.add_parser("zigzag1", parents=[common])
    q.add_argument("--gate", required=True)
    q.add_argument("--report", action="store_true")
    q.set_defaults(func=cmd_quantum)

    s = sub.add_parser("dot", parents=[common], help="Graphviz source of the Hasse diagram")
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--out")
    s.set_defaults(func=cmd_dot)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_YES
    random.seed(args.seed)
    try:
        return args.func(args)
    except BudgetExceeded as exc:
        _note(f"budget exceeded: {exc}")
        return EXIT_BUDGET
    except (UsageError, FpoError, KeyError, ValueError) as exc:
        _note(f"error: {exc}")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
