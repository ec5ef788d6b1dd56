"""Command line: build, verify, classify and analyze.

Exit codes: 0 pass, 2 configuration or input error, 3 stage failure,
4 verification mismatch.
"""

import argparse
import json
import math
import os
import sys
import tempfile

import jsonschema

from . import analysis, coxeter
from .pipeline import BuildParams, StageError, build_spine, make_relator, replay_trace
from .rosegraph import CircleFamily, EdgePartition, LabeledGraph, dumps, to_dot
from .spine import CUBICAL, SIMPLICIAL, Spine, SpineError, check_regularity
from .words import Presentation, ReducedWord, WordError, random_cyclically_reduced_word, \
    sample_presentation

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_STAGE = 3
EXIT_MISMATCH = 4

FORMAT = "spineforge-spine/1"

SPINE_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["format", "kind", "d", "k", "relator", "copies", "partition", "fibers", "sigma"],
    "properties": {
        "format": {"const": FORMAT},
        "kind": {"enum": [SIMPLICIAL, CUBICAL]},
        "d": {"type": "integer", "minimum": 2},
        "k": {"type": "integer", "minimum": 1},
        "relator": {"type": "string", "pattern": "^[a-zA-Z]+$"},
        "copies": {"type": "integer", "minimum": 1},
        "partition": {
            "type": "object",
            "required": ["cls", "ori"],
            "properties": {
                "cls": {"type": "array", "items": {"type": "integer", "minimum": 0}},
                "ori": {"type": "array", "items": {"enum": [1, -1]}},
            },
        },
        "fibers": {"type": "array",
                   "items": {"type": "array", "items": {"type": "integer", "minimum": 0}}},
        "sigma": {
            "type": "object",
            "required": ["vertices", "edges"],
            "properties": {
                "vertices": {"type": "integer", "minimum": 0},
                "edges": {"type": "array", "items": {
                    "type": "object", "required": ["u", "v", "label"],
                    "properties": {"u": {"type": "integer"}, "v": {"type": "integer"},
                                   "label": {"type": "string"}}}},
            },
        },
    },
}

REPORT_FIELDS = ("immersed", "R1", "R2", "R3", "R4", "R5", "pass")


class InputError(ValueError):
    pass


# serialization

def spine_to_json(s):
    return {"format": FORMAT, "kind": s.kind, "d": s.d, "k": s.k,
            "relator": str(s.L.word), "copies": s.L.copies,
            "partition": {"cls": list(s.partition.cls), "ori": list(s.partition.ori)},
            "fibers": [list(f) for f in s.fibers], "sigma": s.sigma.to_json()}


def _pointer(err):
    return "/" + "/".join(str(x) for x in err.absolute_path)


def parse_spine(text):
    """Spine from spine.json text; InputError carries a JSON pointer on schema errors."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"parse error: {exc}") from exc
    errors = sorted(jsonschema.Draft202012Validator(SPINE_SCHEMA).iter_errors(data),
                    key=lambda e: list(e.absolute_path))
    if errors:
        raise InputError(f"schema error at {_pointer(errors[0])}: {errors[0].message}")
    try:
        L = CircleFamily(ReducedWord.parse(data["relator"]), data["copies"])
    except WordError as exc:
        raise InputError(f"schema error at /relator: {exc}") from exc
    part = data["partition"]
    if len(part["cls"]) != L.num_edges or len(part["ori"]) != L.num_edges:
        raise InputError("schema error at /partition: length does not match the relator")
    if any(e >= L.num_edges for f in data["fibers"] for e in f):
        raise InputError("schema error at /fibers: strand out of range")
    s = Spine(L, EdgePartition(part["cls"], part["ori"]), data["kind"], data["d"],
              fibers=data["fibers"], k=data["k"])
    return s, data


def export(s, fmt):
    """Bytes of the spine in one of the formats json or dot."""
    if fmt == "json":
        return dumps(spine_to_json(s))
    if fmt == "dot":
        glued = [E for E, p in enumerate(s.preimages()) if len(p) > 1]
        return to_dot(s.sigma, glued).encode()
    raise InputError(f"unknown format {fmt!r}")


def write_atomic(path, data):
    if isinstance(data, str):
        data = data.encode()
    folder = os.path.dirname(os.path.abspath(path))
    os.makedirs(folder, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=folder, prefix=".tmp-")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def threads():
    """Worker cap from SPINEFORGE_THREADS; every stage currently runs in one thread."""
    raw = os.environ.get("SPINEFORGE_THREADS")
    if raw is None:
        return 1
    try:
        val = int(raw)
    except ValueError:
        raise InputError(f"SPINEFORGE_THREADS must be a positive integer, got {raw!r}") from None
    if val < 1:
        raise InputError(f"SPINEFORGE_THREADS must be a positive integer, got {raw!r}")
    return val


def _formats(raw, allowed):
    out = [f.strip() for f in raw.split(",") if f.strip()]
    for f in out:
        if f not in allowed:
            raise InputError(f"unknown format {f!r}; choose from {', '.join(allowed)}")
    return out


# subcommands

def _params(args):
    return BuildParams(d=args.d, kind=args.kind, k=args.k, n=args.n, lam=args.lam, N=args.bigN,
                       copies=args.copies, seed=args.seed, retry_budget=args.retry_budget,
                       model=args.model)


def run_build(args):
    fmts = _formats(args.format, ("json", "dot"))
    threads()
    try:
        p = _params(args).validate()
        r = make_relator(p)
    except (ValueError, WordError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    status = EXIT_OK
    try:
        res = build_spine(r, p)
    except StageError as exc:
        res = exc.result
        if res is None or not res.report.passed:
            print(f"stage {exc.stage} failed: {exc.message}", file=sys.stderr)
            if exc.witness is not None:
                print(json.dumps(exc.witness, sort_keys=True), file=sys.stderr)
            status = EXIT_STAGE
        else:
            print(f"warning: {exc.message} ({json.dumps(exc.witness, sort_keys=True)})",
                  file=sys.stderr)
        if res is None:
            return status
    out = args.out
    write_atomic(os.path.join(out, "trace.jsonl"), res.trace_jsonl())
    report = dict(res.report.to_json())
    report["top_edge_required"] = p.top_edge
    report["info"] = res.info
    write_atomic(os.path.join(out, "report.json"), dumps(report))
    if "json" in fmts:
        write_atomic(os.path.join(out, "spine.json"), export(res.spine, "json"))
    if "dot" in fmts:
        write_atomic(os.path.join(out, "spine.dot"), export(res.spine, "dot"))
    verdicts = " ".join(f"{k}={'pass' if v else 'fail'}" for k, v in res.report.verdicts().items())
    print(f"{verdicts} min_top_edge={res.report.min_top_edge} trace={res.trace_hash()[:16]}")
    return status


def verify_file(path, report_path=None):
    """(fresh report, mismatched fields); fields are compared only when a stored report exists."""
    with open(path, encoding="utf-8") as fh:
        s, data = parse_spine(fh.read())
    if LabeledGraph.from_json(data["sigma"]) != s.sigma:
        raise InputError("schema error at /sigma: graph does not match the partition")
    fresh = check_regularity(s).to_json()
    if report_path is None:
        cand = os.path.join(os.path.dirname(path), "report.json")
        report_path = cand if os.path.exists(cand) else None
    bad = []
    if report_path is not None:
        with open(report_path, encoding="utf-8") as fh:
            try:
                stored = json.load(fh)
            except json.JSONDecodeError as exc:
                raise InputError(f"parse error in report: {exc}") from exc
        for key in REPORT_FIELDS:
            a = stored.get(key)
            b = fresh[key]
            if isinstance(b, dict):
                a = a.get("pass") if isinstance(a, dict) else None
                b = b["pass"]
            if a != b:
                bad.append(key)
    return fresh, bad


def run_verify(args):
    try:
        threads()
        if args.trace:
            with open(args.trace, encoding="utf-8") as fh:
                trace = [json.loads(line) for line in fh if line.strip()]
            st = replay_trace(trace, args.upto)
            glued = sum(1 for c in st.cls if c >= 0)
            print(json.dumps({"lines": len(trace) if args.upto is None else args.upto,
                              "glued_edges": glued, "edges": len(st.cls)}, sort_keys=True))
            return EXIT_OK
        fresh, bad = verify_file(args.file, args.report)
    except (OSError, InputError, SpineError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(dumps({"fields_mismatched": bad, "report": fresh}).decode(), end="")
    if bad:
        print(f"verification mismatch: {', '.join(bad)}", file=sys.stderr)
        return EXIT_MISMATCH
    return EXIT_OK


_KIND_ALIASES = {SIMPLICIAL: coxeter.SIMPLEX, CUBICAL: coxeter.CUBE,
                 coxeter.SIMPLEX: coxeter.SIMPLEX, coxeter.CUBE: coxeter.CUBE}


def run_classify(args):
    try:
        fmts = _formats(args.format, ("json", "csv"))
        if args.m is None or args.d is None:
            rows = coxeter.golden_table()
            data = [{"kind": k, "m": m, "d": d, "expected": w, "got": g, "ok": ok}
                    for k, m, d, w, g, ok in rows]
            if "csv" in fmts:
                print(coxeter.table_csv(), end="")
            if "json" in fmts:
                print(dumps({"golden": data}).decode(), end="")
            return EXIT_OK if all(r[-1] for r in rows) else EXIT_MISMATCH
        diag = coxeter.CoxeterDiagram(_KIND_ALIASES[args.kind or SIMPLICIAL], args.m, args.d)
        c = coxeter.classify(diag)
    except (KeyError, coxeter.CoxeterError, InputError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = {"kind": diag.kind, "m": diag.m, "d": diag.d, "labels": diag.labels(), "class": c,
           "vertex_figures": [list(f) for f in coxeter.vertex_figures(diag)]}
    if "json" in fmts:
        print(dumps(out).decode(), end="")
    if "csv" in fmts:
        print(f"kind,m,d,class\n{diag.kind},{diag.m},{diag.d},{c}")
    return EXIT_OK


def run_analyze(args):
    try:
        fmts = _formats(args.format, ("json", "csv"))
        threads()
        k = args.k
        n = args.n or 4096
        if args.density is not None:
            p = sample_presentation(k, n, args.density, args.seed)
        else:
            p = Presentation(k, [random_cyclically_reduced_word(k, n, args.seed)])
        kind = args.kind or SIMPLICIAL
        dd = BuildParams(d=args.d or 2, kind=kind).dd
        delta = args.delta
        C = args.C if args.C is not None else 0.2 * delta / math.log(2 * k - 1)
    except (ValueError, WordError, InputError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = {"k": k, "n": n, "relators": len(p.relators), "seed": args.seed,
           "max_piece": analysis.max_piece(p)}
    out["pieces_ratio"] = out["max_piece"] / n
    try:
        bd = analysis.bead_decompose(p.relators[0], delta, C, dd, seed=args.seed, k=k)
        out["beads"] = bd.to_json()
        out["lips_legal"] = analysis.lips_glue_legally(p.relators[0], bd)
    except analysis.AnalysisError as exc:
        out["beads"] = {"error": str(exc)}
    status = EXIT_OK
    if args.spine:
        try:
            with open(args.spine, encoding="utf-8") as fh:
                s, _ = parse_spine(fh.read())
        except (OSError, InputError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        out["lift"] = analysis.long_subword_lift_check(s, s.L.word, args.beta).to_json()
    if args.out:
        if "json" in fmts:
            write_atomic(os.path.join(args.out, "analysis.json"), dumps(out))
        if "csv" in fmts:
            write_atomic(os.path.join(args.out, "pieces.csv"), analysis.pieces_histogram(p))
    print(dumps(out).decode(), end="")
    return status


# argument parsing

def _build_flags(sp):
    sp.add_argument("--kind", choices=[SIMPLICIAL, CUBICAL], required=True)
    sp.add_argument("--d", type=int, required=True)
    sp.add_argument("--k", type=int, default=3)
    sp.add_argument("--n", type=int)
    sp.add_argument("--lambda", dest="lam", type=int)
    sp.add_argument("--bigN", type=int)
    sp.add_argument("--copies", type=int, default=1)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--retry-budget", type=int, default=20000)
    sp.add_argument("--model", choices=["planted", "uniform"], default="planted")
    sp.add_argument("--out", default=".")
    sp.add_argument("--format", default="json,dot", help="comma separated subset of json,dot")


def make_parser():
    ap = argparse.ArgumentParser(prog="spineforge",
                                 description="Regular spines over random relators.")
    sub = ap.add_subparsers(dest="command", required=True)

    b = sub.add_parser("build", help="build a spine and write spine.json, report.json, trace.jsonl")
    _build_flags(b)

    v = sub.add_parser("verify", help="re-check a stored spine against its report")
    v.add_argument("file", nargs="?", default="spine.json")
    v.add_argument("--report")
    v.add_argument("--trace", help="replay a trace instead of checking a spine")
    v.add_argument("--upto", type=int, help="number of trace lines to replay")

    c = sub.add_parser("classify", help="classify a Coxeter diagram, or the golden table")
    c.add_argument("--kind", choices=sorted(_KIND_ALIASES))
    c.add_argument("--m", type=int)
    c.add_argument("--d", type=int)
    c.add_argument("--format", default="json")

    a = sub.add_parser("analyze", help="piece statistics and bead decomposition")
    a.add_argument("--kind", choices=[SIMPLICIAL, CUBICAL])
    a.add_argument("--d", type=int)
    a.add_argument("--k", type=int, default=2)
    a.add_argument("--n", type=int)
    a.add_argument("--seed", type=int, default=0)
    a.add_argument("--density", type=float)
    a.add_argument("--delta", type=float, default=0.3)
    a.add_argument("--C", type=float)
    a.add_argument("--beta", type=float, default=0.1)
    a.add_argument("--spine", help="spine.json to run the lift check on")
    a.add_argument("--out")
    a.add_argument("--format", default="json")
    return ap


def main(argv=None):
    args = make_parser().parse_args(argv)
    try:
        return {"build": run_build, "verify": run_verify, "classify": run_classify,
                "analyze": run_analyze}[args.command](args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
