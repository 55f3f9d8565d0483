"""Command-line entry point: ``binoa <command> ...``.

Exit status is 0 for a conclusive answer, 2 when a search ran out of
budget and 1 on errors. Every command prints a plain report and can
write the same data as JSON with ``--json``.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from . import bounds, lp, model, solver, store
from .boolean import BooleanFunction, ci_order, nordstrom_robinson, weight
from .core import (
    FormatError,
    ParameterError,
    delete_columns,
    format_oam,
    format_oat,
    is_simple,
    parse_oam,
    parse_oat,
    verify_strength,
)

EXIT_OK, EXIT_ERROR, EXIT_INDETERMINATE = 0, 1, 2


class Report:
    """Ordered key/value report; ``time`` fields are the only nondeterministic ones."""

    def __init__(self, command: str):
        self.command = command
        self.fields: dict[str, object] = {}
        self.blocks: list[str] = []
        self.json_only: dict[str, object] = {}
        self._t0 = time.monotonic()

    def __setitem__(self, key, value):
        self.fields[key] = value

    def text(self) -> str:
        lines = [f"command: {self.command}"]
        for k, v in self.fields.items():
            lines.append(f"{k}: {v}")
        lines.append(f"time: {time.monotonic() - self._t0:.3f}s")
        out = "\n".join(lines) + "\n"
        for b in self.blocks:
            out += "\n" + b.rstrip("\n") + "\n"
        return out

    def data(self) -> dict:
        d = {"command": self.command, **{k: _jsonable(v) for k, v in self.fields.items()}}
        d.update({k: _jsonable(v) for k, v in self.json_only.items()})
        d["wall_time"] = round(time.monotonic() - self._t0, 6)
        return d


def _jsonable(v):
    if isinstance(v, (str, int, float, bool)) or v is None:
        return v
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    return str(v)


def _read_array(path: str):
    """Load an OAT1 or OAM1 file as a BinaryArray, plus the strength it claims (0 if none)."""
    text = Path(path).read_text()
    first = text.split("\n", 1)[0].split()
    if len(first) == 4:
        return parse_oat(text)
    if len(first) == 2:
        return parse_oam(text).array(), 0
    raise FormatError("header is neither 'N n s t' nor 'n N'", 1)


def _workers(args) -> int:
    return args.workers if args.workers is not None else solver.default_workers()


def _budget(args) -> float:
    if args.budget <= 0:
        raise ParameterError("--budget must be positive")
    return args.budget


# ---------------------------------------------------------------- commands


def cmd_verify(args, rep: Report) -> int:
    a, claimed = _read_array(args.input)
    t = args.strength if args.strength is not None else claimed
    if t < 1:
        raise ParameterError("give --strength or a file with a claimed strength")
    res = verify_strength(a, t)
    rep["input"] = args.input
    rep["runs"] = a.N
    rep["factors"] = a.n
    rep["strength"] = t
    rep["ok"] = res.ok
    rep["index"] = res.index
    rep["simple"] = is_simple(a)
    if not res.ok:
        rep["violation"] = res.violation if res.violation else res.reason
    return EXIT_OK


def cmd_bound(args, rep: Report) -> int:
    d = lp.delsarte_min_runs(args.n, args.t)
    rep["n"], rep["t"] = args.n, args.t
    rep["lp_value"] = str(d.lp_value)
    rep["min_lambda"] = d.min_lambda
    rep["min_runs"] = d.min_runs
    if args.certificate:
        rep.blocks.append(lp.format_certificate(d.result))
    return EXIT_OK


def cmd_rank(args, rep: Report) -> int:
    cs = model.build_constraints(args.n, args.t, args.index)
    rep["n"], rep["t"] = args.n, args.t
    rep["rows"] = len(cs.rows)
    rep["variables"] = cs.variable_count
    rep["rank"] = model.rank(cs)
    rep["rank_with_total_row"] = model.rank(cs, include_total=True)
    rep["expected"] = model.expected_rank(args.n, args.t)
    if args.export:
        Path(args.export).write_text(model.format_lp_text(cs))
        rep["lp_file"] = args.export
    return EXIT_OK


def cmd_pmax(args, rep: Report) -> int:
    b = lp.lp_max_multiplicity_bound(args.n, args.t, args.index)
    rep["n"], rep["t"], rep["lambda"] = args.n, args.t, args.index
    rep["lp_value"] = "infeasible" if b.lp_infeasible else str(b.lp_value)
    rep["pmax"] = b.pmax
    return EXIT_OK


def _status_exit(status: solver.Status) -> int:
    return EXIT_INDETERMINATE if status is solver.Status.INDETERMINATE else EXIT_OK


def _solve(rep: Report, n, t, index, pmax, mode, budget, workers, method, split, out):
    rep["n"], rep["t"], rep["lambda"] = n, t, index
    rep["mode"] = mode
    rep["workers"] = workers
    rep["budget_seconds"] = budget
    if mode == "feasible":
        r = solver.feasible(n, t, index, pmax, method=method, budget_seconds=budget,
                            workers=workers, split_depth=split)
        rep["pmax"] = r.pmax
        rep["method"] = r.method
        rep["status"] = r.status.value
        rep["nodes"] = r.nodes
        if r.witnesses and out:
            Path(out).write_text(format_oam(r.witnesses[0]))
            rep["witness"] = out
        return _status_exit(r.status)
    if mode == "enumerate":
        r = solver.enumerate_classes(n, t, index, pmax=pmax, method=method, budget_seconds=budget,
                                     workers=workers, split_depth=split)
        return _class_result(rep, r, out)
    raise ParameterError(f"unknown mode {mode!r}")


def _class_result(rep: Report, r: solver.ClassReport, out) -> int:
    rep["method"] = r.method
    rep["status"] = r.status.value
    rep["complete"] = r.complete
    rep["classes"] = len(r.classes)
    rep["nodes"] = r.nodes
    if out:
        arch = store.ClassArchive.from_report(r)
        store.save_archive(arch, out)
        rep["archive"] = out
        rep["content_id"] = arch.content_id
    return _status_exit(r.status)


def cmd_solve(args, rep: Report) -> int:
    if args.job:
        job = json.loads(Path(args.job).read_text())
        missing = {"n", "t", "lambda", "mode", "budgetSeconds"} - job.keys()
        if missing:
            raise ParameterError(f"job file lacks {sorted(missing)}")
        if job["mode"] == "extend":
            reps = store.load_archive(job["archive"]).classes
            rep["job"] = args.job
            return _extend(rep, reps, job["t"], job["lambda"], job.get("pmax"),
                           float(job["budgetSeconds"]), _workers(args), args.split, args.out)
        rep["job"] = args.job
        return _solve(rep, job["n"], job["t"], job["lambda"], job.get("pmax"), job["mode"],
                      float(job["budgetSeconds"]), _workers(args), args.method, args.split, args.out)
    for name in ("n", "t", "index", "budget"):
        if getattr(args, name) is None:
            raise ParameterError(f"--{'lambda' if name == 'index' else name} is required without --job")
    return _solve(rep, args.n, args.t, args.index, args.pmax,
                  "enumerate" if args.enumerate else "feasible",
                  _budget(args), _workers(args), args.method, args.split, args.out)


def cmd_classify(args, rep: Report) -> int:
    budget, workers = _budget(args), _workers(args)
    rep["n"], rep["t"], rep["lambda"] = args.n, args.t, args.index
    rep["workers"] = workers
    rep["budget_seconds"] = budget
    if args.method == "direct":
        r = solver.enumerate_classes(args.n, args.t, args.index, method="direct",
                                     budget_seconds=budget, workers=workers,
                                     split_depth=args.split, checkpoint=args.checkpoint)
        return _class_result(rep, r, args.out)
    chain = solver.classify_chain(args.n, args.t, args.index, budget_seconds=budget,
                                  workers=workers, split_depth=args.split,
                                  checkpoint=args.checkpoint)
    rep["chain"] = " ".join(f"a={c.factors}:{len(c.classes) if c.complete else '?'}" for c in chain)
    last = chain[-1]
    if last.factors < args.n and last.status is solver.Status.UNSAT:
        rep["note"] = f"no arrays with {last.factors} factors, hence none with more"
        rep["status"] = "UNSAT"
        rep["classes"] = 0
        rep["complete"] = True
        rep["nodes"] = sum(c.nodes for c in chain)
        return EXIT_OK
    code = _class_result(rep, last, args.out)
    rep["nodes"] = sum(c.nodes for c in chain)
    return code


def _extend(rep, reps, t, index, pmax, budget, workers, split, out) -> int:
    rep["t"], rep["lambda"] = t, index
    rep["reps"] = len(reps)
    rep["workers"] = workers
    rep["budget_seconds"] = budget
    r = solver.extend_classes(list(reps), t, index, pmax=pmax, budget_seconds=budget,
                              workers=workers, split_depth=split)
    rep["factors"] = r.factors
    return _class_result(rep, r, out)


def cmd_extend(args, rep: Report) -> int:
    arch = store.load_archive(args.input)
    if not arch.classes:
        raise ParameterError("archive holds no classes to extend")
    rep["input"] = args.input
    p = arch.params
    return _extend(rep, arch.classes, p.strength, p.index, args.pmax, _budget(args),
                   _workers(args), args.split, args.out)


def cmd_nr(args, rep: Report) -> int:
    a = nordstrom_robinson()
    if args.columns is not None:
        if not 1 <= args.columns <= 16:
            raise ParameterError("--columns must be between 1 and 16")
        a = delete_columns(a, range(args.columns, 16))
    res = verify_strength(a, 5) if a.n > 5 else None
    rep["runs"], rep["factors"] = a.N, a.n
    rep["strength5"] = bool(res and res.ok)
    rep["index"] = res.index if res else None
    rep["simple"] = is_simple(a)
    if args.out:
        Path(args.out).write_text(format_oat(a, 5 if res and res.ok else 0))
        rep["output"] = args.out
    return EXIT_OK


def cmd_ci(args, rep: Report) -> int:
    if args.hex is not None:
        if args.n is None:
            raise ParameterError("--hex needs --n")
        f = BooleanFunction.from_hex(args.n, args.hex)
    elif args.input is not None:
        a, _ = _read_array(args.input)
        f = BooleanFunction.from_support(a)
    else:
        raise ParameterError("give --hex with --n, or --in")
    rep["n"] = f.n
    rep["weight"] = weight(f)
    rep["ci_order"] = ci_order(f)
    return EXIT_OK


def cmd_table(args, rep: Report) -> int:
    exclusions = [(96, 11, 4, "asserted", "no OA(96, 11, 2, 4)"),
                  (112, 11, 4, "asserted", "no OA(112, 11, 2, 4)")]
    if args.with_search:
        exclusions += bounds.search_exclusions(args.budget)
    kb = bounds.standard_knowledge_base(args.tmin, args.tmax, args.nmax, exclusions=exclusions)
    closed = bounds.propagate(kb)
    rep["grid"] = f"{args.tmin} <= t <= {args.tmax}, n <= {args.nmax}"
    rep["exclusions"] = "asserted + exhaustive search" if args.with_search else "asserted"
    if closed.on_grid(11, 5):
        st = closed.status("omega", 11, 5)
        rep["omega(11,5)"] = ("closed at %d" % st["lower"]) if st["closed"] else \
            f"open: {st['lower']} <= ω(11,5) <= {st['upper']}"
    rep.json_only["table"] = bounds.table_rows(closed)
    rep.blocks.append(bounds.omega_table(closed))
    if args.explain:
        n, t = args.explain
        f = closed.exact("omega", n, t) or closed.lower("omega", n, t)
        if f is not None:
            rep.blocks.append(bounds.explain(f))
    return EXIT_OK


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="binoa", description="Exact tools for binary orthogonal arrays.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--json", metavar="PATH", help="also write the report as JSON")
        return sp

    def search_opts(sp, budget_required=True):
        sp.add_argument("--budget", type=float, required=budget_required, metavar="SECONDS",
                        help="wall-clock budget; running out gives INDETERMINATE")
        sp.add_argument("--workers", type=int, help="worker processes (default: $BINOA_WORKERS or 1)")
        sp.add_argument("--split", type=int, default=0, metavar="DEPTH",
                        help="split the search into subtrees at this depth")
        sp.add_argument("--out", help="witness (OAM1) or class archive (CLS1) output")

    sp = common(sub.add_parser("verify", help="check strength and simplicity of an OAT1/OAM1 file"))
    sp.add_argument("--in", dest="input", required=True)
    sp.add_argument("--strength", type=int)
    sp.set_defaults(func=cmd_verify)

    sp = common(sub.add_parser("bound", help="Delsarte LP lower bound on runs"))
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--t", type=int, required=True)
    sp.add_argument("--certificate", action="store_true", help="print the primal/dual certificate")
    sp.set_defaults(func=cmd_bound)

    sp = common(sub.add_parser("rank", help="rank of the run-balance system"))
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--t", type=int, required=True)
    sp.add_argument("--lambda", dest="index", type=int, default=1)
    sp.add_argument("--export", metavar="PATH", help="write the system in LP text format")
    sp.set_defaults(func=cmd_rank)

    sp = common(sub.add_parser("pmax", help="LP bound on any run's multiplicity"))
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--t", type=int, required=True)
    sp.add_argument("--lambda", dest="index", type=int, required=True)
    sp.set_defaults(func=cmd_pmax)

    sp = common(sub.add_parser("solve", help="decide existence (or enumerate with --enumerate)"))
    sp.add_argument("--n", type=int)
    sp.add_argument("--t", type=int)
    sp.add_argument("--lambda", dest="index", type=int)
    sp.add_argument("--pmax", type=int)
    sp.add_argument("--method", choices=("auto", "direct", "extend"), default="auto")
    sp.add_argument("--enumerate", action="store_true")
    sp.add_argument("--job", help="JSON job: {n, t, lambda, pmax?, mode, budgetSeconds}")
    search_opts(sp, budget_required=False)
    sp.set_defaults(func=cmd_solve)

    sp = common(sub.add_parser("classify", help="isomorphism classes, column by column"))
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--t", type=int, required=True)
    sp.add_argument("--lambda", dest="index", type=int, required=True)
    sp.add_argument("--method", choices=("extend", "direct"), default="extend")
    sp.add_argument("--checkpoint", metavar="PATH")
    search_opts(sp)
    sp.set_defaults(func=cmd_classify)

    sp = common(sub.add_parser("extend", help="extend the classes of a CLS1 archive by one column"))
    sp.add_argument("--in", dest="input", required=True)
    sp.add_argument("--pmax", type=int)
    search_opts(sp)
    sp.set_defaults(func=cmd_extend)

    sp = common(sub.add_parser("nr", help="build the Nordstrom-Robinson OA(256, 16, 2, 5)"))
    sp.add_argument("--columns", type=int, help="keep only the first k columns")
    sp.add_argument("--out", help="write OAT1")
    sp.set_defaults(func=cmd_nr)

    sp = common(sub.add_parser("ci", help="weight and correlation-immunity order"))
    sp.add_argument("--hex")
    sp.add_argument("--n", type=int)
    sp.add_argument("--in", dest="input", help="support as OAT1/OAM1")
    sp.set_defaults(func=cmd_ci)

    sp = common(sub.add_parser("table", help="propagated table of ω(n, t) with sources"))
    sp.add_argument("--tmin", type=int, default=4)
    sp.add_argument("--tmax", type=int, default=5)
    sp.add_argument("--nmax", type=int, default=16)
    sp.add_argument("--with-search", action="store_true",
                    help="add the exclusions proved by exhaustive search")
    sp.add_argument("--budget", type=float, help="budget for --with-search")
    sp.add_argument("--explain", type=int, nargs=2, metavar=("N", "T"),
                    help="print the derivation of ω(N, T)")
    sp.set_defaults(func=cmd_table)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    rep = Report(args.command)
    try:
        code = args.func(args, rep)
    except (ParameterError, FormatError, store.IntegrityError, store.CheckpointError,
            bounds.InconsistencyError, OSError, ValueError, RuntimeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR
    sys.stdout.write(rep.text())
    if args.json:
        data = rep.data()
        data["exit_code"] = code
        Path(args.json).write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
