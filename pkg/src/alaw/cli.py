"""Command-line entry point: ``alaw {bound,verify,scan,series,telescope}``.

Exit codes: 0 all asserted checks pass, 1 a certified lemma verdict failed,
2 usage or domain error, 3 internal-consistency failure in the bound engine.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from alaw import bound as B
from alaw.correlation import certify, is_zero_profile
from alaw.entropy import raw_mutual_information
from alaw.errors import AlawError, InternalConsistencyError
from alaw.lemmas import (
    SuiteConfig,
    TelescopeLayout,
    check_lemma7,
    run_suite,
    summarize,
    telescope_identity,
)
from alaw.lemmas.common import NO_ASSUMPTION, Assumption
from alaw.qstate import (
    ChainState,
    Region,
    make_bell_chain,
    make_ghz,
    make_product,
    make_random_mps,
    make_tfim_ground,
)

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE, EXIT_INTERNAL = 0, 1, 2, 3
FAMILIES = ("product", "bell", "ghz", "mps", "tfim")
SCAN_COLUMNS = ("scale", "l_b1", "l_a", "l_b2", "mi_ac", "mi_b1b2", "eta_placements")


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------


def _clean(obj):
    """JSON-safe copy: numpy scalars unwrapped, non-finite floats as strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    return obj


def dumps_json(obj) -> str:
    return json.dumps(_clean(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


def _cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def dumps_csv(rows: list[dict], columns: tuple[str, ...] | list[str]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_cell(r[c]) for c in columns])
    return buf.getvalue()


class Output:
    """Writes named artifacts under the output directory and echoes the primary one."""

    def __init__(self, args: argparse.Namespace):
        root = args.output_dir or os.environ.get("ALAW_OUTPUT_DIR") or "."
        self.dir = Path(root)
        self.format = args.format
        self.written: list[str] = []

    def write(self, name: str, text: str) -> None:
        self.dir.mkdir(parents=True, exist_ok=True)
        (self.dir / name).write_text(text, encoding="utf-8")
        self.written.append(name)

    def emit(self, stem: str, report: dict, rows: list[dict] | None = None,
             columns: tuple[str, ...] | None = None) -> None:
        """Write ``stem.json`` (and ``stem.csv`` when tabular) and print the chosen format."""
        js = dumps_json(report)
        self.write(f"{stem}.json", js)
        table = dumps_csv(rows, columns) if rows is not None else None
        if table is not None:
            self.write(f"{stem}.csv", table)
        sys.stdout.write(table if self.format == "csv" and table is not None else js)


# ---------------------------------------------------------------------------
# state families
# ---------------------------------------------------------------------------


def build_state(args: argparse.Namespace) -> ChainState:
    fam = args.family
    if fam == "bell":
        pairs = args.pairs if args.pairs is not None else (args.sites or 8) // 2
        return make_bell_chain(pairs)
    sites = args.sites if args.sites is not None else _default_sites(fam)
    if fam == "product":
        return make_product(sites)
    if fam == "ghz":
        return make_ghz(sites)
    if fam == "mps":
        return make_random_mps(sites, args.bond_dim, args.seed)
    if fam == "tfim":
        return make_tfim_ground(sites, args.field)
    raise AssertionError(fam)


def _default_sites(family: str) -> int:
    return {"product": 8, "ghz": 10, "mps": 10, "tfim": 12}[family]


def family_params(args: argparse.Namespace, state: ChainState) -> dict:
    out = {"family": args.family, "sites": state.num_sites, "label": state.label}
    if args.family == "mps":
        out.update(bond_dim=args.bond_dim, seed=args.seed)
    if args.family == "tfim":
        out["field"] = args.field
    return out


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_bound(args: argparse.Namespace, out: Output) -> int:
    params = B.BoundParams(args.xi, args.alpha0)
    trace = B.compute_bound(params, depth=args.depth, greedy=args.greedy,
                            geometric=args.geometric)
    report = trace.to_dict()
    report["mode"] = {"greedy": args.greedy, "ladder": "geometric" if args.geometric else "tight"}
    warnings = []
    if not trace.checks["assembly_closes"]:
        warnings.append("geometric ladder does not close the Lemma 10 form")
    report["warnings"] = warnings
    descent = trace.descent_rows()
    ladder = trace.ladder_rows()
    out.write("bound_descent.csv", dumps_csv(descent, ("n", "phase", "s_bar", "s_bar_units", "Q_c")))
    out.write("bound_ladder.csv", dumps_csv(
        ladder, ("m", "sigma", "s_bar", "Q", "lambda_even", "lambda_odd")))
    summary = [{"key": k, "value": v} for k, v in sorted(trace.summary().items())
               if not isinstance(v, dict)]
    out.emit("bound", report, summary, ("key", "value"))
    for w in warnings:
        print(f"warning: {w}", file=sys.stderr)
    return EXIT_OK


def _assumption(args: argparse.Namespace, state: ChainState):
    profile, cert = certify(state, poly_prefactor=args.poly_prefactor)
    warnings = []
    info = {"certificate": cert.to_dict(), "profile_csv": "correlation_profile.csv"}
    if args.xi_override is not None:
        if not is_zero_profile(profile):
            raise _Usage("--xi-override is only allowed for states with a zero correlation profile")
        return Assumption(args.xi_override, True, 1.0, "override"), profile, info, warnings
    if not cert.certified:
        warnings.append("decay certificate failed: assumption-dependent verdicts are uncertified")
    assume = Assumption.from_certificate(cert)
    if not math.isfinite(assume.xi):
        # Checks stay well defined at any finite length; none of them is counted.
        assume = Assumption(1.0, False, cert.prefactor, "uncertified placeholder")
    return assume, profile, info, warnings


class _Usage(Exception):
    pass


def cmd_verify(args: argparse.Namespace, out: Output) -> int:
    state = build_state(args)
    assume, profile, info, warnings = _assumption(args, state)
    out.write("correlation_profile.csv", profile.to_csv())
    alphas = tuple(args.alpha) if args.alpha else SuiteConfig.alphas
    config = SuiteConfig(alphas=alphas, max_b=args.max_b, max_a=args.max_a,
                         window_max_a=args.window_max_a)
    verdicts = run_suite(state, assume, config, jobs=args.jobs)
    dependent = [v for v in verdicts if v.context.get("assumption") != NO_ASSUMPTION]
    violated = [v for v in verdicts if v.violated]
    report = {
        "state": family_params(args, state),
        "assumption": {**assume.to_dict(), "certified": assume.certified},
        **info,
        "config": {"alphas": list(alphas), "max_b": config.max_b, "max_a": config.max_a,
                   "window_max_a": config.window_max_a},
        "summary": summarize(verdicts),
        "totals": {
            "verdicts": len(verdicts),
            "counted": sum(v.preconditions_met and v.certified for v in verdicts),
            "certified_assumption_verdicts": sum(v.certified for v in dependent),
            "violated": len(violated),
        },
        "warnings": warnings,
        "verdicts": [v.to_dict() for v in verdicts],
    }
    rows = [{"lemma_id": k, **v} for k, v in report["summary"].items()]
    out.emit("verify", report, rows, ("lemma_id", "total", "counted", "passed", "violated"))
    for w in warnings:
        print(f"warning: {w}", file=sys.stderr)
    return EXIT_VIOLATION if violated else EXIT_OK


def scan_rows(state: ChainState, max_scale: int, sizes: tuple[int, int, int]) -> list[dict]:
    """Maxima of ``I(A:C)`` and ``I(B1:B2)`` over placements at scales ``1..max_scale``."""
    n = state.num_sites
    rows = []
    for s in range(1, max_scale + 1):
        l1, l2, l3 = (s * k for k in sizes)
        total = l1 + l2 + l3
        if total > n:
            raise _Usage(f"scale {s} needs {total} sites, chain has {n}")
        best_ac = best_bb = 0.0
        count = 0
        for left, right in sorted({(l1, l3), (l3, l1)}):
            for start in range(n - total + 1):
                b1 = Region.block(start, left)
                a = Region.block(start + left, l2)
                b2 = Region.block(start + left + l2, right)
                c = Region.block(start, total).complement(n)
                count += 1
                if len(c):
                    best_ac = max(best_ac, raw_mutual_information(state, a, c))
                best_bb = max(best_bb, raw_mutual_information(state, b1, b2))
        rows.append({"scale": s, "l_b1": l1, "l_a": l2, "l_b2": l3, "mi_ac": max(best_ac, 0.0),
                     "mi_b1b2": max(best_bb, 0.0), "eta_placements": count})
    return rows


def cmd_scan(args: argparse.Namespace, out: Output) -> int:
    state = build_state(args)
    if len(args.sizes) != 3 or min(args.sizes) < 1:
        raise _Usage("--sizes takes three positive multipliers")
    max_scale = args.scales if args.scales is not None else state.num_sites // sum(args.sizes)
    if max_scale < 1:
        raise _Usage("chain too short for a single scale")
    rows = scan_rows(state, max_scale, tuple(args.sizes))
    report = {"state": family_params(args, state), "sizes": list(args.sizes), "rows": rows}
    out.emit("scan", report, rows, SCAN_COLUMNS)
    return EXIT_OK


def cmd_series(args: argparse.Namespace, out: Output) -> int:
    params = B.BoundParams(args.xi, args.alpha0)
    lam = B.lambda_sum(params, args.depth, geometric=args.geometric)
    half = B.lambda_sum(params, max(2, lam.depth // 2), geometric=args.geometric)
    stable = abs(lam.coeff - half.coeff) <= 1e-9 and abs(lam.const - half.const) <= 1e-9
    if not stable:
        raise InternalConsistencyError("lambda series is not depth-stable")
    report = {
        "xi": params.xi, "alpha0": params.alpha0, "depth": lam.depth,
        "ladder": "geometric" if args.geometric else "tight",
        "lambda_coeff": lam.coeff, "lambda_const": lam.const,
        "reference": {"coeff": B.REFERENCE_COEFF, "const": B.REFERENCE_CONST,
                      "envelope": B.ENVELOPE},
        "within_envelope": lam.within_envelope,
        "depth_check": {"depth": half.depth, "coeff_diff": lam.coeff - half.coeff,
                        "const_diff": lam.const - half.const},
    }
    terms = {t.i: t for t in lam.terms}
    rows = []
    for r in lam.rungs[:-1]:
        ev, od = terms[2 * r.m], terms[2 * r.m + 1]
        rows.append({"m": r.m, "sigma": r.sigma, "Q": r.Q, "coeff_even": ev.coeff,
                     "coeff_odd": od.coeff, "const": ev.const + od.const})
    out.emit("series", report, rows, ("m", "sigma", "Q", "coeff_even", "coeff_odd", "const"))
    return EXIT_OK


def cmd_telescope(args: argparse.Namespace, out: Output) -> int:
    state = build_state(args)
    layout = TelescopeLayout(args.l0, args.n, args.start)
    ident = telescope_identity(state, layout)
    report = {"state": family_params(args, state), "identity": ident,
              "blocks": layout.blocks()}
    exit_code = EXIT_OK
    if layout.start == 0:
        v = check_lemma7(state, args.l0, args.n)
        report["lemma7"] = v.to_dict()
        if v.violated:
            exit_code = EXIT_VIOLATION
    if abs(ident["residual"]) > 1e-9:
        exit_code = EXIT_VIOLATION
    rows = [{"quantity": k, "value": ident[k]} for k in ("lhs", "rhs", "residual", "f_sum")]
    out.emit("telescope", report, rows, ("quantity", "value"))
    return exit_code


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=0, help="seed for random generators")
    p.add_argument("--output-dir", default=None,
                   help="artifact directory (default: $ALAW_OUTPUT_DIR or .)")
    p.add_argument("--format", choices=("json", "csv"), default="json",
                   help="format echoed to stdout")
    p.add_argument("--jobs", type=int, default=1, help="worker processes for suites")


def _family(p: argparse.ArgumentParser, default: str = "tfim") -> None:
    p.add_argument("--family", choices=FAMILIES, default=default)
    p.add_argument("--sites", type=int, default=None)
    p.add_argument("--pairs", type=int, default=None, help="Bell pairs (bell family)")
    p.add_argument("--field", type=float, default=2.0, help="transverse field (tfim)")
    p.add_argument("--bond-dim", type=int, default=2, help="bond dimension (mps)")


def _bound_params(p: argparse.ArgumentParser) -> None:
    p.add_argument("--xi", type=float, required=True)
    p.add_argument("--alpha0", type=float, required=True)
    p.add_argument("--depth", type=int, default=B.DEFAULT_DEPTH)
    p.add_argument("--tight", action="store_true",
                   help="recursive ladder (the default; kept for explicitness)")
    p.add_argument("--geometric", action="store_true",
                   help="freeze the ladder ratio at its first value")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="alaw", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bound", help="closed-form bound with audit trace")
    _bound_params(p)
    p.add_argument("--greedy", action="store_true",
                   help="stop refinement as soon as the target density is met")
    _common(p)

    p = sub.add_parser("verify", help="certify a state and run every lemma checker")
    _family(p)
    p.add_argument("--alpha", type=float, action="append", default=None,
                   help="cut-off exponent; repeat for several (default 0.25 and 0.5)")
    p.add_argument("--max-b", type=int, default=4)
    p.add_argument("--max-a", type=int, default=4)
    p.add_argument("--window-max-a", type=int, default=3,
                   help="largest A for which every Schmidt window is checked")
    p.add_argument("--xi-override", type=float, default=None,
                   help="correlation length for zero-profile states")
    p.add_argument("--poly-prefactor", action="store_true",
                   help="fit a constant prefactor P >= 1 alongside the length")
    _common(p)

    p = sub.add_parser("scan", help="mutual information versus length scale")
    _family(p)
    p.add_argument("--scales", type=int, default=None, help="largest scale (default: fits chain)")
    p.add_argument("--sizes", type=int, nargs=3, default=[1, 1, 1],
                   metavar=("B1", "A", "B2"), help="block multipliers per scale")
    _common(p)

    p = sub.add_parser("series", help="lambda series coefficients")
    _bound_params(p)
    _common(p)

    p = sub.add_parser("telescope", help="telescoping identity and Lemma 7 on a state")
    _family(p)
    p.add_argument("--l0", type=int, default=1)
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--start", type=int, default=0)
    _common(p)
    return parser


COMMANDS = {"bound": cmd_bound, "verify": cmd_verify, "scan": cmd_scan,
            "series": cmd_series, "telescope": cmd_telescope}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    if args.jobs < 1:
        print("error: --jobs must be positive", file=sys.stderr)
        return EXIT_USAGE
    out = Output(args)
    try:
        return COMMANDS[args.command](args, out)
    except InternalConsistencyError as exc:
        print(f"internal consistency failure: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except (_Usage, AlawError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
