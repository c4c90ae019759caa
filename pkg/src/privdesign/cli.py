"""Command-line front end.

    privdesign solve    --spec FILE [--report OUT] [--orders]
    privdesign verify   --mechanism FILE [--epsilon X]
    privdesign compare  --spec FILE --mechanism NAME_OR_FILE ... [--csv]
    privdesign vertices --spec FILE
    privdesign project  --spec FILE

Mechanism names ``geometric``, ``optimal`` and ``uninformative`` are built
in; anything else is read as a JSON table.  Exit status is 0 on success, 1
when ``verify`` finds a violation, 2 for unreadable or invalid input and 3
when a size cap is exceeded.
"""
from __future__ import annotations

import argparse
import csv
import io as _stdio
import sys

import numpy as np

from . import __version__
from .core import DEDUP_TOL, LOG_TOL, NORM_TOL, PRUNE_TOL, CapExceededError, ValidationError, project_belief
from .decision import full_information_value, interim_value
from .design import solve_database, solve_oblivious
from .io import SCHEMA_VERSION, ProblemSpec, dumps, load_mechanism, load_problem
from .mechanisms import (
    ObliviousMechanism,
    geometric,
    induced_distribution,
    mechanism_value,
    uninformative,
    verify_database_dp,
    verify_dp,
)
from .orders import frechet_representation, spm_dominates, upper_bound_peaks, uprr_compare
from .polytope import (
    DatabasePolytope,
    ObliviousPolytope,
    enumerate_database_vertices,
    enumerate_oblivious_vertices,
    projection_gap,
)

BUILTIN_MECHANISMS = ("geometric", "optimal", "uninformative")


class UsageError(ValidationError):
    pass


def _sig(signature) -> list[int]:
    return sorted(signature.phi)


def _header(command: str, eps: float, args) -> dict:
    return {
        "schema": SCHEMA_VERSION,
        "command": command,
        "version": __version__,
        "epsilon": eps,
        "tolerances": {
            "normalization": NORM_TOL,
            "log_ratio": args.tolerance,
            "dedup": DEDUP_TOL,
            "prune": PRUNE_TOL,
        },
    }


def _caps(args, spec: ProblemSpec | None = None) -> tuple[int, int]:
    opts = spec.options if spec is not None else {}
    max_n = args.max_n if args.max_n is not None else int(opts.get("max_n", 20))
    max_db_n = args.max_n if args.max_n is not None else int(opts.get("max_database_n", 4))
    return max_n, 2**max_db_n


def _load_spec(args) -> tuple[ProblemSpec, float]:
    if not args.spec:
        raise UsageError("--spec is required for this command")
    spec = load_problem(args.spec)
    eps = args.epsilon if args.epsilon is not None else spec.epsilon
    if eps <= 0:
        raise UsageError("--epsilon must be positive")
    return spec, eps


def _orders_block(spec: ProblemSpec, eps: float, other) -> dict:
    """Geometric-versus-other comparisons in the UPRR and supermodular orders."""
    tau_g = induced_distribution(geometric(eps, spec.n), spec.mu0)
    peaks = upper_bound_peaks(tau_g, spec.mu0, eps)
    try:
        assignment = uprr_compare(tau_g, other, peaks=peaks)
    except ValidationError:
        return {"uprr_geometric_dominates": None, "peaks": None, "spm_geometric_dominates": None}
    block = {
        "uprr_geometric_dominates": assignment is not None,
        "peaks": list(peaks) if assignment is not None else None,
    }
    F = frechet_representation(tau_g, peaks)
    G = frechet_representation(other, upper_bound_peaks(other, spec.mu0, eps))
    rep = spm_dominates(F, G)
    block["spm_geometric_dominates"] = rep.dominates
    block["spm_worst_violation"] = rep.worst_violation
    return block


def build_solve_report(spec: ProblemSpec, eps: float, args) -> dict:
    dp = spec.problem
    mu0 = spec.mu0
    max_n, max_db = _caps(args, spec)
    report = _header("solve", eps, args)
    report["n"] = spec.n
    report["no_info_value"] = interim_value(mu0, dp).value
    report["full_info_value"] = full_information_value(mu0, dp)

    oblivious = solve_oblivious(mu0, dp, eps, max_n=max_n)
    if spec.database_prior is None:
        sol = oblivious
        report["kind"] = "oblivious"
        report["optimum"] = sol.optimum
        report["support"] = [
            {"signature": _sig(s), "weight": w, "value": v, "belief": b}
            for s, w, v, b in zip(sol.signatures, sol.distribution.weights, sol.support_values, sol.distribution.support)
        ]
        check = verify_dp(ObliviousMechanism(sol.signal), eps, tol=args.tolerance)
    else:
        sol = solve_database(spec.database_prior, dp, eps, max_databases=max_db)
        report["kind"] = "database"
        report["optimum"] = sol.optimum
        report["oblivious_optimum"] = oblivious.optimum
        report["support"] = [
            {"weight": w, "value": v, "belief": b, "state_belief": project_belief(b).probs}
            for w, v, b in zip(sol.distribution.weights, sol.support_values, sol.distribution.support)
        ]
        check = verify_database_dp(sol.signal.probs, spec.n, eps, tol=args.tolerance)
    report["signal"] = {"outputs": [str(o) for o in sol.signal.outputs], "probs": sol.signal.probs}
    report["dp_verified"] = check.private
    report["worst_log_ratio"] = check.worst_log_ratio
    geo = mechanism_value(geometric(eps, spec.n), mu0, dp)
    report["geometric_value"] = geo
    report["gap"] = report["optimum"] - geo
    if args.orders:
        report["orders"] = _orders_block(spec, eps, oblivious.distribution)
    return report


def cmd_solve(args) -> int:
    spec, eps = _load_spec(args)
    text = dumps(build_solve_report(spec, eps, args))
    _emit(text, args)
    return 0


def _resolve_mechanism(token: str, spec: ProblemSpec | None, eps: float | None, args):
    if token in BUILTIN_MECHANISMS:
        if spec is None or eps is None:
            raise UsageError(f"built-in mechanism '{token}' needs --spec")
        if token == "geometric":
            return geometric(eps, spec.n), None
        if token == "uninformative":
            return uninformative(spec.n), None
        max_n, _ = _caps(args, spec)
        sol = solve_oblivious(spec.mu0, spec.problem, eps, max_n=max_n)
        return ObliviousMechanism(sol.signal, "optimal"), None
    return load_mechanism(token)


def cmd_verify(args) -> int:
    if not args.mechanism:
        raise UsageError("verify needs at least one --mechanism")
    spec, spec_eps = (None, None)
    if args.spec:
        spec, spec_eps = _load_spec(args)
    status = 0
    results = []
    for token in args.mechanism:
        mech, file_eps = _resolve_mechanism(token, spec, spec_eps, args)
        eps = args.epsilon if args.epsilon is not None else (file_eps if file_eps is not None else spec_eps)
        if eps is None:
            raise UsageError(f"no epsilon for {token}; pass --epsilon")
        rep = verify_dp(mech, eps, tol=args.tolerance)
        ratio = "inf" if not np.isfinite(rep.worst_log_ratio) else "%.17g" % rep.worst_log_ratio
        print(f"{'PASS' if rep.private else 'FAIL'} {token} epsilon={eps:g} worst_log_ratio={ratio}")
        results.append({
            "mechanism": token,
            "epsilon": eps,
            "dp_verified": rep.private,
            "worst_log_ratio": rep.worst_log_ratio if np.isfinite(rep.worst_log_ratio) else None,
        })
        if not rep.private:
            status = 1
    if args.report:
        report = {"schema": SCHEMA_VERSION, "command": "verify", "log_ratio_tolerance": args.tolerance,
                  "results": results}
        _write(args.report, dumps(report))
    return status


def cmd_compare(args) -> int:
    spec, eps = _load_spec(args)
    tokens = args.mechanism or list(BUILTIN_MECHANISMS)
    tau_g = induced_distribution(geometric(eps, spec.n), spec.mu0)
    peaks = upper_bound_peaks(tau_g, spec.mu0, eps)
    rows = []
    for token in tokens:
        mech, _ = _resolve_mechanism(token, spec, eps, args)
        if mech.n != spec.n:
            raise UsageError(f"mechanism {token} has {mech.n + 1} input states, spec has {spec.n + 1}")
        check = verify_dp(mech, eps, tol=args.tolerance)
        try:
            uprr = uprr_compare(tau_g, induced_distribution(mech, spec.mu0), peaks=peaks) is not None
        except ValidationError:
            uprr = None  # posteriors with zero entries have no defined relative risk
        rows.append({
            "mechanism": token,
            "value": mechanism_value(mech, spec.mu0, spec.problem),
            "dp_verified": check.private,
            "worst_log_ratio": check.worst_log_ratio if np.isfinite(check.worst_log_ratio) else None,
            "uprr_geometric_dominates": uprr,
        })
    if args.csv:
        buf = _stdio.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(list(rows[0]))
        for r in rows:
            writer.writerow([_csv_cell(v) for v in r.values()])
        text = buf.getvalue().rstrip("\n")
    else:
        report = _header("compare", eps, args)
        report["rows"] = rows
        text = dumps(report)
    _emit(text, args)
    return 0


def _csv_cell(v) -> str:
    if v is None:
        return "n/a"
    if isinstance(v, bool):
        return "yes" if v else "no"
    if isinstance(v, float):
        return "%.17g" % v
    return str(v)


def cmd_vertices(args) -> int:
    spec, eps = _load_spec(args)
    max_n, max_db = _caps(args, spec)
    report = _header("vertices", eps, args)
    report["n"] = spec.n
    report["oblivious_vertices"] = [
        {"signature": _sig(s), "belief": v.probs}
        for s, v in enumerate_oblivious_vertices(ObliviousPolytope(eps, spec.mu0), max_n=max_n)
    ]
    if spec.database_prior is not None:
        poly = DatabasePolytope(eps, spec.database_prior)
        report["database_vertices"] = [
            v.probs for v in enumerate_database_vertices(poly, max_databases=max_db)
        ]
    _emit(dumps(report), args)
    return 0


def cmd_project(args) -> int:
    spec, eps = _load_spec(args)
    if spec.database_prior is None:
        raise UsageError("project needs a spec with 'database_prior'")
    _, max_db = _caps(args, spec)
    gap = projection_gap(DatabasePolytope(eps, spec.database_prior), ObliviousPolytope(eps, spec.mu0), max_db)
    report = _header("project", eps, args)
    report["n"] = spec.n
    report["n_database_vertices"] = gap.n_database_vertices
    report["outside"] = [
        {
            "index": pv.index,
            "database_belief": pv.database_belief.probs,
            "state_belief": pv.state_belief.probs,
            "violations": [[w, side] for w, side in pv.report.violations],
        }
        for pv in gap.outside
    ]
    report["unattained_signatures"] = [_sig(s) for s in gap.unattained]
    report["certified_equal"] = gap.certified_equal
    _emit(dumps(report), args)
    return 0


def _write(path, text: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text + "\n")


def _emit(text: str, args) -> None:
    print(text)
    if args.report:
        _write(args.report, text)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--spec", help="problem spec (JSON)")
    common.add_argument("--mechanism", action="append", default=[],
                        help="mechanism table (JSON) or built-in name; repeatable")
    common.add_argument("--report", help="also write the report to this file")
    common.add_argument("--csv", action="store_true", help="CSV table output (compare only)")
    common.add_argument("--epsilon", type=float, help="override the privacy budget")
    common.add_argument("--tolerance", type=float, default=LOG_TOL,
                        help="log-ratio tolerance for privacy checks (default %(default)g)")
    common.add_argument("--max-n", type=int, dest="max_n",
                        help="cap on N for vertex enumeration (database enumeration uses 2**K databases)")
    common.add_argument("--orders", action="store_true", help="add UPRR and supermodular-order verdicts (solve)")

    parser = argparse.ArgumentParser(prog="privdesign", description="Optimal differentially private count publication.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn, help_text in [
        ("solve", cmd_solve, "solve the design problem and report the optimal mechanism"),
        ("verify", cmd_verify, "check mechanisms for ε-differential privacy"),
        ("compare", cmd_compare, "value table for several mechanisms"),
        ("vertices", cmd_vertices, "list vertices of the privacy polytopes"),
        ("project", cmd_project, "compare projected database posteriors with oblivious ones"),
    ]:
        p = sub.add_parser(name, parents=[common], help=help_text)
        p.set_defaults(func=fn)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CapExceededError as exc:
        print(f"privdesign: size cap exceeded: {exc}", file=sys.stderr)
        return 3
    except ValidationError as exc:
        print(f"privdesign: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
