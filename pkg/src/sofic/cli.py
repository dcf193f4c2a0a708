"""Command line front end: ``sofic <area> <command> [options]``.

Exit codes: 0 success, 1 verification failure, 2 usage or input error.
Every JSON/CSV artifact embeds the resolved command line so that
``sofic rerun ARTIFACT`` reproduces it.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import os
import re
import sys
from fractions import Fraction
from pathlib import Path
from typing import Sequence

from . import __version__, exactla, l2, permcalc, witness
from .amenact import FiniteAction, folner_search, paradox_certificate, propagation_check
from .approx import LabeledGraph, ball_to_graph, default_group_for, good_set, random_free_graph, torus_graph
from .groups import FreeAbelianGroup, FreeGroup, MarkedGroup, ball, cyclic, group_from_json
from .permcalc import Permutation

CACHE_ENV = "SOFIC_CACHE_DIR"


class InputError(Exception):
    """Malformed input file or argument; reported with exit code 2."""


class VerificationFailure(Exception):
    """A check ran and failed; reported with exit code 1."""


# -- input helpers ---------------------------------------------------------------------------

def _load_json(path: str) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None


def parse_group(spec: str) -> MarkedGroup:
    """``Z``, ``Z2``, ``Z/5``, ``F2`` or a JSON file."""
    m = re.fullmatch(r"Z(\d*)", spec)
    if m:
        return FreeAbelianGroup(int(m.group(1) or 1))
    m = re.fullmatch(r"Z/(\d+)", spec)
    if m:
        return cyclic(int(m.group(1)))
    m = re.fullmatch(r"F(\d+)", spec)
    if m:
        return FreeGroup(int(m.group(1)))
    try:
        return group_from_json(_load_json(spec))
    except (KeyError, ValueError) as exc:
        raise InputError(f"{spec}: not a group description ({exc})") from None


def parse_graphs(spec: str) -> list[tuple[LabeledGraph, MarkedGroup | None, dict]]:
    """Graph families: ``torus1d:8,16``, ``torus2d:10``, ``free2:2000@0``, ``ball:F2:9`` or a JSON file."""
    m = re.fullmatch(r"torus(\d+)d:([\d,]+)", spec)
    if m:
        d = int(m.group(1))
        return [(torus_graph(d, int(n)), FreeAbelianGroup(d), {}) for n in m.group(2).split(",")]
    m = re.fullmatch(r"free(\d+):([\d,]+)(?:@(\d+))?", spec)
    if m:
        k, seed = int(m.group(1)), int(m.group(3) or 0)
        return [(random_free_graph(k, int(n), seed), FreeGroup(k), {}) for n in m.group(2).split(",")]
    m = re.fullmatch(r"ball:([^:]+):(\d+)", spec)
    if m:
        group = parse_group(m.group(1))
        b = ball(group, int(m.group(2)))
        return [(ball_to_graph(b), group, {"depth": b.depth})]
    doc = _load_json(spec)
    try:
        g = LabeledGraph.from_json(doc)
    except (KeyError, ValueError, TypeError) as exc:
        raise InputError(f"{spec}: not a graph description ({exc})") from None
    group = group_from_json(g.meta["group"]) if "group" in g.meta else default_group_for(g)
    return [(g, group, {})]


def _one_graph(spec: str) -> tuple[LabeledGraph, MarkedGroup | None, dict]:
    graphs = parse_graphs(spec)
    if len(graphs) != 1:
        raise InputError(f"{spec}: expected a single graph")
    return graphs[0]


def parse_perm(text: str) -> Permutation:
    """1-based one-line notation ``2,1,3`` or cycles ``(1 2)(3 4 5)/5``."""
    text = text.strip()
    try:
        if text.startswith("("):
            body, _, deg = text.partition("/")
            cycles = [tuple(int(v) for v in c.split()) for c in re.findall(r"\(([^)]*)\)", body)]
            d = int(deg) if deg else max((max(c) for c in cycles if c), default=1)
            return Permutation.from_cycles(d, [c for c in cycles if c])
        return Permutation.from_one_line(int(v) for v in text.split(","))
    except ValueError as exc:
        raise InputError(f"bad permutation {text!r}: {exc}") from None


def parse_words(group: MarkedGroup, text: str) -> list[tuple[int, ...]]:
    return [group.parse_word(w) for w in text.split(",")]


def load_matrix(path: str) -> exactla.SparseIntMatrix:
    if path.endswith(".json"):
        return exactla.SparseIntMatrix.from_json(_load_json(path))
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from None
    try:
        return exactla.parse_triplets(text, path)
    except exactla.MatrixFormatError as exc:
        raise InputError(str(exc)) from None


def _cached_good_set(graph: LabeledGraph, group: MarkedGroup, r: int) -> frozenset[int]:
    """Good set, optionally memoized on disk under ``$SOFIC_CACHE_DIR``."""
    root = os.environ.get(CACHE_ENV)
    if not root:
        return good_set(graph, group, r)
    body = json.dumps({"maps": graph.maps, "group": group.to_json(), "r": r}, sort_keys=True)
    path = Path(root) / f"goodset-{hashlib.sha256(body.encode()).hexdigest()[:24]}.json"
    if path.exists():
        return graph.store_good_set(r, json.loads(path.read_text()))
    vs = good_set(graph, group, r)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(sorted(vs)))
    return vs


# -- output helpers ----------------------------------------------------------------------------

def _strip_out(argv: Sequence[str]) -> list[str]:
    out, skip = [], False
    for tok in argv:
        if skip:
            skip = False
        elif tok == "--out":
            skip = True
        elif not tok.startswith("--out="):
            out.append(tok)
    return out


def _config(args: argparse.Namespace) -> dict:
    """Resolved invocation; the output path is left out so reruns are byte-identical."""
    return {"argv": _strip_out(args._argv), "version": __version__, "seed": getattr(args, "seed", None)}


def _emit(args: argparse.Namespace, payload: dict) -> None:
    doc = {"config": _config(args), **payload}
    text = json.dumps(doc, indent=2, default=str)
    if getattr(args, "out", None):
        Path(args.out).write_text(text + "\n")
    print(text)


# -- approx --------------------------------------------------------------------------------------

def cmd_approx_build(args) -> int:
    if args.witness:
        w = witness.SoficWitness.from_json(_load_json(args.witness))
        g = witness.witness_to_graph(w)
    else:
        g, _, _ = _one_graph(args.graph)
    doc = g.to_json()
    doc["meta"] = {**doc["meta"], "config": _config(args)}
    text = json.dumps(doc)
    if args.out:
        Path(args.out).write_text(text + "\n")
    else:
        print(text)
    return 0


def cmd_approx_goodset(args) -> int:
    g, group, _ = _one_graph(args.graph)
    if args.group:
        group = parse_group(args.group)
    if group is None:
        raise InputError("cannot infer the group for this graph; pass --group")
    vs = _cached_good_set(g, group, args.radius)
    _emit(args, {"n": g.n, "radius": args.radius, "good": len(vs), "fraction": len(vs) / g.n,
                 "good_set": sorted(vs) if args.list else None})
    return 0


# -- witness --------------------------------------------------------------------------------------

def _load_witness(path: str) -> witness.SoficWitness:
    doc = _load_json(path)
    if "witness" in doc:  # output of `witness from-quotient` or `witness amplify`
        doc = doc["witness"]
    try:
        return witness.SoficWitness.from_json(doc)
    except (KeyError, ValueError) as exc:
        raise InputError(f"{path}: not a witness description ({exc})") from None


def cmd_witness_verify(args) -> int:
    w = _load_witness(args.input)
    if args.epsilon:
        w = witness.SoficWitness(w.group, w.F, w.n, w.map, Fraction(args.epsilon))
    rep = witness.verify_witness(w)
    _emit(args, {"report": rep.to_json()})
    return 0 if rep.passed else 1


def cmd_witness_amplify(args) -> int:
    w = _load_witness(args.input)
    big = witness.amplify(w, args.k)
    rep = witness.verify_witness(big)
    _emit(args, {"k": args.k, "witness": big.to_json(), "report": rep.to_json()})
    return 0


def cmd_witness_from_quotient(args) -> int:
    group = parse_group(args.group)
    perms = [parse_perm(p) for p in args.perms.split(";")]
    F = [group.evaluate(w) for w in parse_words(group, args.F)]
    w = witness.witness_from_quotient(group, perms, F, Fraction(args.epsilon))
    _emit(args, {"witness": w.to_json(), "report": witness.verify_witness(w).to_json()})
    return 0


# -- perm ------------------------------------------------------------------------------------------

def cmd_perm_stats(args) -> int:
    p = parse_perm(args.perm)
    st = permcalc.cycle_stats(p)
    _emit(args, {"degree": st.degree, "counts": st.counts, "fixed": st.fixed,
                 "frequencies": {t: str(v) for t, v in st.frequencies().items()}})
    return 0


def cmd_perm_realize(args) -> int:
    dist = {}
    for part in filter(None, args.dist.split(",")):
        t, _, v = part.partition(":")
        dist[int(t)] = Fraction(v)
    p = permcalc.realize_stats(dist, args.n)
    _emit(args, {"perm": p.one_line(), "counts": permcalc.cycle_stats(p).counts})
    return 0


def cmd_perm_conjugate(args) -> int:
    s, r = parse_perm(args.sigma), parse_perm(args.rho)
    try:
        c = permcalc.conjugator(s, r)
    except permcalc.NotConjugateError as exc:
        _emit(args, {"conjugate": False, "reason": str(exc)})
        return 1
    _emit(args, {"conjugate": True, "c": c.one_line()})
    return 0


def cmd_perm_cover(args) -> int:
    s = parse_perm(args.sigma)
    closure = permcalc.covering_closure(s, args.k)
    order = len(permcalc._even_perms(s.degree))
    _emit(args, {"degree": s.degree, "k": args.k, "reached": len(closure), "alternating_order": order,
                 "covers": len(closure) == order, "hypothesis": permcalc.covering_hypothesis(s)})
    return 0


# -- la ----------------------------------------------------------------------------------------------

def cmd_la(args) -> int:
    A = load_matrix(args.input)
    if args.command == "rank":
        out = {"rank": exactla.rank(A), "kernel_dim": exactla.kernel_dim(A)}
    elif args.command == "charpoly":
        out = {"charpoly": exactla.charpoly(A, args.method)}
    elif args.command == "detstar":
        ds = exactla.det_star(A, args.method)
        if args.plain:
            print(ds)
            return 0
        out = {"det_star": str(ds), "ln_det_star": exactla._big_log(ds)}
    else:
        neg, zero, pos = exactla.inertia(A, Fraction(args.lam))
        out = {"lambda": args.lam, "n_minus": neg, "n_zero": zero, "n_plus": pos}
    _emit(args, out)
    return 0


# -- l2 ---------------------------------------------------------------------------------------------

def _load_op(path: str) -> l2.GroupRingMatrix:
    try:
        return l2.GroupRingMatrix.from_json(_load_json(path))
    except (KeyError, ValueError) as exc:
        raise InputError(f"{path}: not a group-ring matrix ({exc})") from None


def _prepare(A: l2.GroupRingMatrix, g: LabeledGraph) -> None:
    if g.cached_good_set(A.width) is None and (g.good_radius or -1) < A.width:
        _cached_good_set(g, A.group, A.width)


def cmd_l2(args) -> int:
    A = _load_op(args.op)
    if args.command == "study":
        graphs = [g for g, _, _ in parse_graphs(args.graphs)]
        for g in graphs:
            _prepare(A, g)
        lams = [Fraction(x) for x in args.lambdas.split(",")] if args.lambdas else []
        rows = l2.convergence_study(A, graphs, lams, exact_cap=args.exact_cap, workers=args.workers)
        cols = l2.study_columns(lams)
        buf = io.StringIO()
        buf.write(f"# config: {json.dumps(_config(args), sort_keys=True)}\n")
        wr = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
        wr.writeheader()
        for row in rows:
            wr.writerow({c: row.get(c, "") for c in cols})
        if args.out:
            Path(args.out).write_text(buf.getvalue())
        print(buf.getvalue(), end="")
        return 1 if any(r["error"] for r in rows) else 0
    g, _, _ = _one_graph(args.graph)
    _prepare(A, g)
    if args.command == "kernel":
        v = l2.normalized_kernel_dim(A, g)
        _emit(args, {"n": g.n, "kernel_dim": str(v), "value": float(v)})
    elif args.command == "detstar":
        res = l2.log_det_star_normalized(A, g, operator=args.operator, exact_cap=args.exact_cap)
        _emit(args, {"n": g.n, "value": res.value, "path": res.path, "dim": res.dim,
                     "det_star": None if res.det_star is None else str(res.det_star),
                     "zero_count": res.zero_count})
    else:
        lams = [Fraction(x) for x in args.lambdas.split(",")]
        vals = l2.spectral_density(A, g, lams)
        _emit(args, {"n": g.n, "density": {str(l): str(v) for l, v in zip(lams, vals)}})
    return 0


# -- act -------------------------------------------------------------------------------------------

def _load_action(args) -> tuple[FiniteAction, dict]:
    if args.action:
        try:
            return FiniteAction.from_json(_load_json(args.action)), {}
        except (KeyError, ValueError) as exc:
            raise InputError(f"{args.action}: not an action description ({exc})") from None
    if args.witness:
        return FiniteAction.from_witness(_load_witness(args.witness)), {}
    if not args.graph:
        raise InputError("one of --action, --witness, --graph is required")
    g, group, extra = _one_graph(args.graph)
    if args.group:
        group = parse_group(args.group)
    if group is None:
        raise InputError("cannot infer the group for this graph; pass --group")
    return FiniteAction.from_graph(g, group), extra


def _K(a: FiniteAction, text: str | None):
    if text:
        return parse_words(a.group, text)
    return [(i,) for i in range(a.group.m)]


def cmd_act(args) -> int:
    a, extra = _load_action(args)
    K = _K(a, args.K)
    if args.command == "folner":
        res = folner_search(a, K, Fraction(args.epsilon), budget=args.budget, seed=args.seed)
        payload = res.to_json()
        if not args.list:
            payload.pop("F")
        _emit(args, payload)
        return 0 if res.success else 1
    if args.command == "paradox":
        if args.A_radius is not None:
            if "depth" not in extra:
                raise InputError("--A-radius needs a ball:GROUP:R graph")
            A_set = [i for i, d in enumerate(extra["depth"]) if d <= args.A_radius]
        else:
            A_set = range(a.size)
        cert = paradox_certificate(a, A_set, K, args.p)
        payload = cert.to_json()
        if cert.success and not args.list:
            payload["pieces"] = [{"s": p["s"], "t": p["t"], "size": len(p["points"])}
                                 for p in payload["pieces"]]
        _emit(args, payload)
        return 0 if cert.success else 1
    res = propagation_check(a, K, args.r)
    _emit(args, {"holds": res.holds, "point": res.point, "lhs": res.lhs_size, "rhs": res.rhs_size})
    return 0 if res.holds else 1


# -- rerun -----------------------------------------------------------------------------------------

def cmd_rerun(args) -> int:
    text = Path(args.artifact).read_text()
    if text.startswith("# config:"):
        config = json.loads(text.splitlines()[0][len("# config:"):])
    else:
        doc = json.loads(text)
        config = doc.get("config") or doc.get("meta", {}).get("config")
    if not config or "argv" not in config:
        raise InputError(f"{args.artifact}: no embedded config")
    argv = list(config["argv"])
    if args.out:
        argv += ["--out", args.out]
    return main(argv)


# -- parser ----------------------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sofic", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    areas = p.add_subparsers(dest="area", required=True)

    ap = areas.add_parser("approx", help="labeled graph approximations").add_subparsers(dest="command", required=True)
    b = ap.add_parser("build")
    src = b.add_mutually_exclusive_group(required=True)
    src.add_argument("--graph", help="torus1d:N, torus2d:N, free2:N@SEED, ball:F2:R or JSON")
    src.add_argument("--witness", help="witness JSON")
    b.add_argument("--out")
    b.set_defaults(func=cmd_approx_build)
    gs = ap.add_parser("goodset")
    gs.add_argument("--graph", required=True)
    gs.add_argument("--group")
    gs.add_argument("--radius", type=int, required=True)
    gs.add_argument("--list", action="store_true")
    gs.add_argument("--out")
    gs.set_defaults(func=cmd_approx_goodset)

    wp = areas.add_parser("witness", help="permutation witnesses").add_subparsers(dest="command", required=True)
    v = wp.add_parser("verify")
    v.add_argument("--in", dest="input", required=True)
    v.add_argument("--epsilon")
    v.add_argument("--out")
    v.set_defaults(func=cmd_witness_verify)
    am = wp.add_parser("amplify")
    am.add_argument("--in", dest="input", required=True)
    am.add_argument("--k", type=int, required=True)
    am.add_argument("--out")
    am.set_defaults(func=cmd_witness_amplify)
    fq = wp.add_parser("from-quotient")
    fq.add_argument("--group", required=True)
    fq.add_argument("--perms", required=True, help="one permutation per generator, separated by ';'")
    fq.add_argument("--F", required=True, help="comma-separated words")
    fq.add_argument("--epsilon", default="1/10")
    fq.add_argument("--out")
    fq.set_defaults(func=cmd_witness_from_quotient)

    pp = areas.add_parser("perm", help="cycle statistics").add_subparsers(dest="command", required=True)
    s = pp.add_parser("stats")
    s.add_argument("--perm", required=True)
    s.add_argument("--out")
    s.set_defaults(func=cmd_perm_stats)
    r = pp.add_parser("realize")
    r.add_argument("--dist", required=True, help="e.g. 2:1/2,3:1/8")
    r.add_argument("--n", type=int, required=True)
    r.add_argument("--out")
    r.set_defaults(func=cmd_perm_realize)
    c = pp.add_parser("conjugate")
    c.add_argument("--sigma", required=True)
    c.add_argument("--rho", required=True)
    c.add_argument("--out")
    c.set_defaults(func=cmd_perm_conjugate)
    cv = pp.add_parser("cover")
    cv.add_argument("--sigma", required=True)
    cv.add_argument("--k", type=int, default=4)
    cv.add_argument("--out")
    cv.set_defaults(func=cmd_perm_cover)

    lp = areas.add_parser("la", help="exact linear algebra").add_subparsers(dest="command", required=True)
    for name in ("rank", "charpoly", "detstar", "inertia"):
        q = lp.add_parser(name)
        q.add_argument("--in", dest="input", required=True, help="triplet/.mtx or JSON matrix")
        q.add_argument("--method", default="auto", choices=["auto", "berkowitz", "modular"])
        q.add_argument("--lambda", dest="lam", default="0")
        q.add_argument("--plain", action="store_true", help="print only the value")
        q.add_argument("--out")
        q.set_defaults(func=cmd_la)

    l2p = areas.add_parser("l2", help="L2-invariant approximations").add_subparsers(dest="command", required=True)
    for name in ("kernel", "detstar", "density", "study"):
        q = l2p.add_parser(name)
        q.add_argument("--op", required=True, help="group-ring matrix JSON")
        if name == "study":
            q.add_argument("--graphs", required=True)
            q.add_argument("--workers", type=int, default=1)
        else:
            q.add_argument("--graph", required=True)
        q.add_argument("--lambdas", default="" if name != "density" else None, required=name == "density")
        q.add_argument("--operator", default="delta", choices=["delta", "A"])
        q.add_argument("--exact-cap", type=int, default=exactla.EXACT_DIM_CAP)
        q.add_argument("--out")
        q.set_defaults(func=cmd_l2)

    acp = areas.add_parser("act", help="finite actions").add_subparsers(dest="command", required=True)
    for name in ("folner", "paradox", "propagate"):
        q = acp.add_parser(name)
        q.add_argument("--action")
        q.add_argument("--witness")
        q.add_argument("--graph")
        q.add_argument("--group")
        q.add_argument("--K", help="comma-separated words (default: all generators)")
        q.add_argument("--epsilon", default="1/10")
        q.add_argument("--budget", type=int, default=4000)
        q.add_argument("--seed", type=int, default=0)
        q.add_argument("--p", type=int, default=1)
        q.add_argument("--r", type=int, default=1)
        q.add_argument("--A-radius", dest="A_radius", type=int)
        q.add_argument("--list", action="store_true")
        q.add_argument("--out")
        q.set_defaults(func=cmd_act)

    rr = areas.add_parser("rerun", help="re-run the config embedded in an artifact")
    rr.add_argument("artifact")
    rr.add_argument("--out")
    rr.set_defaults(func=cmd_rerun)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    args._argv = argv
    try:
        return int(args.func(args))
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, KeyError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except VerificationFailure as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
