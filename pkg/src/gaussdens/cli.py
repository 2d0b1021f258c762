"""Command-line front end.

Subcommands::

    exact "EXPR"      closed-form density with its derivation trace
    estimate "EXPR"   schedule evaluation + extrapolation report
    compare "EXPR"    both engines and their discrepancy
    sweep "EXPR"      dense (s, value, tail_bound) table for plotting
    oracle "EXPR"     brute-force partial sums / box counts vs the fast engine
    check             invariant suite over the built-in corpus

Exit codes: 0 success, 1 engine error, 2 parse/validation error,
3 non-convergent estimate under --strict.

Output is a human table by default; ``--format csv`` and ``--format json``
switch the representation, ``--out PATH`` writes to files.  CSV output is
byte-identical across runs and worker counts for identical inputs.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from . import corpus as corpus_mod
from .dsl import ParseError, parse_expression, to_dsl
from .estimator import EstimatorConfig, estimate_density, schedule
from .exact import exact_density
from .oracle import brute_partial_sum, counting_density
from .series import BudgetExceeded, density_at, partial_double_sum
from .sets import ValidationError, grid_mask, normalize

__all__ = ["main"]

_ORACLE_S = (1.25, 1.5, 2.0, 3.0)


def _parse_schedule(text: str) -> tuple[int, int]:
    try:
        lo, hi = text.split("..")
        k0, k1 = int(lo.lstrip("k")), int(hi.lstrip("k"))
    except Exception:
        raise argparse.ArgumentTypeError(
            f"schedule must look like 'k0..k6' or '0..6', got {text!r}"
        )
    if k1 < k0 or k0 < 0:
        raise argparse.ArgumentTypeError(f"need 0 <= k0 <= k1 in {text!r}")
    return (k0, k1)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gaussdens",
        description="Densities of Gaussian-integer sets in the open first quadrant.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, with_expr=True):
        if with_expr:
            p.add_argument("expression", help="set expression in the DSL")
        p.add_argument("--schedule", type=_parse_schedule, default=(0, 6),
                       metavar="k0..k6", help="s-schedule range: s = 1 + 0.5*2^-k")
        p.add_argument("--eps", type=float, default=1e-6,
                       help="per-point tail target (default 1e-6)")
        p.add_argument("--budget", type=int, default=10 ** 8,
                       help="term budget per evaluation (default 1e8)")
        p.add_argument("--degree", type=int, default=2,
                       help="polynomial degree of the extrapolation fit")
        p.add_argument("--workers", type=int, default=1,
                       help="parallel evaluations (results are identical)")
        p.add_argument("--strict", action="store_true",
                       help="exit 3 when the estimate does not converge")
        p.add_argument("--format", choices=("table", "csv", "json"), default="table")
        p.add_argument("--out", default=None, help="write output to this path")
        p.add_argument("--config", default=None, metavar="PATH",
                       help="key=value file supplying defaults for these flags")

    add_common(sub.add_parser("exact", help="closed-form density"))
    add_common(sub.add_parser("estimate", help="extrapolated density"))
    add_common(sub.add_parser("compare", help="exact vs estimate"))
    p_sweep = sub.add_parser("sweep", help="dense s-sweep table")
    add_common(p_sweep)
    p_sweep.add_argument("--points", type=int, default=25, help="sweep size")
    p_oracle = sub.add_parser("oracle", help="brute-force cross-checks")
    add_common(p_oracle)
    p_oracle.add_argument("--N", type=int, default=200, help="truncation box side")
    p_check = sub.add_parser("check", help="corpus invariant suite")
    add_common(p_check, with_expr=False)
    return parser


def _config(args, extra_eps: Optional[float] = None) -> EstimatorConfig:
    k0, k1 = args.schedule
    return EstimatorConfig(
        s_schedule=schedule(k0, k1),
        per_point_eps=extra_eps if extra_eps is not None else args.eps,
        fit_degree=args.degree,
        term_budget=args.budget,
        workers=args.workers,
    )


def _emit(text: str, out: Optional[str]) -> None:
    if out is None:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
    else:
        with open(out, "w", newline="") as fh:
            fh.write(text)


def _csv_text(rows: Sequence[dict]) -> str:
    if not rows:
        return ""
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(rows[0].keys()), lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


def _cmd_exact(args) -> int:
    expr = parse_expression(args.expression)
    value = exact_density(expr)
    if args.format == "json":
        _emit(json.dumps(value.to_dict(), indent=2, sort_keys=True), args.out)
    elif args.format == "csv":
        row = {"kind": value.kind,
               "value": repr(value.as_float()) if value.is_known else "",
               "numerator": value.rational.numerator if value.kind == "rational" else "",
               "denominator": value.rational.denominator if value.kind == "rational" else "",
               "trace": ";".join(value.trace)}
        _emit(_csv_text([row]), args.out)
    else:
        lines = [f"expression: {to_dsl(expr)}"]
        if value.kind == "rational":
            lines.append(f"density   = {value.rational} = {value.as_float()!r}")
        elif value.kind == "real":
            lines.append(f"density   = {value.as_float()!r}  ({value.symbolic})")
        else:
            lines.append("density   = unknown (no closed-form rule applies)")
        if value.trace:
            lines.append("trace     : " + " -> ".join(value.trace))
        _emit("\n".join(lines), args.out)
    return 0


def _estimate_with_reference(expr, cfg):
    reference = exact_density(expr)
    report = estimate_density(expr, cfg, exact_reference=reference)
    return reference, report


def _report_tables(report) -> tuple[str, str]:
    points = _csv_text([p.to_row() for p in report.points])
    summary = _csv_text([report.summary_row()])
    return points, summary


def _cmd_estimate(args) -> int:
    expr = parse_expression(args.expression)
    cfg = _config(args)
    _, report = _estimate_with_reference(expr, cfg)
    if args.format == "json":
        _emit(json.dumps(report.to_dict(), indent=2, sort_keys=True), args.out)
    elif args.format == "csv":
        points, summary = _report_tables(report)
        if args.out:
            base = args.out[:-4] if args.out.endswith(".csv") else args.out
            _emit(points, base + ".points.csv")
            _emit(summary, base + ".summary.csv")
        else:
            _emit(points + "\n" + summary, None)
    else:
        lines = [f"expression  : {to_dsl(expr)}"]
        for p in report.points:
            lines.append(
                f"  s={p.s:<12.10g} value={p.value:.12g} tail<={p.tail_bound:.3g} "
                f"terms={p.terms_used} [{p.method}]"
            )
        lines.append(f"extrapolated: {report.extrapolated!r}"
                     + (" (clamped)" if report.clamped else ""))
        lines.append(f"fit residual: {report.fit_residual:.3g}   drift: {report.drift:.3g}")
        lines.append(f"converged   : {report.converged}"
                     + ("   [budget-limited]" if report.budget_limited else ""))
        if report.exact_reference is not None and report.exact_reference.is_known:
            exact = report.exact_reference.as_float()
            lines.append(f"exact ref   : {exact!r}  |delta|={abs(report.extrapolated - exact):.3g}")
        _emit("\n".join(lines), args.out)
    if args.strict and not report.converged:
        return 3
    return 0


def _cmd_compare(args) -> int:
    expr = parse_expression(args.expression)
    cfg = _config(args)
    reference, report = _estimate_with_reference(expr, cfg)
    rows = [{
        "exact": repr(reference.as_float()) if reference.is_known else "",
        "extrapolated": repr(report.extrapolated),
        "discrepancy": repr(abs(report.extrapolated - reference.as_float()))
        if reference.is_known else "",
        "converged": report.converged,
    }]
    if args.format == "json":
        doc = {"exact": reference.to_dict(), "estimate": report.to_dict()}
        if reference.is_known:
            doc["discrepancy"] = repr(abs(report.extrapolated - reference.as_float()))
        _emit(json.dumps(doc, indent=2, sort_keys=True), args.out)
    elif args.format == "csv":
        _emit(_csv_text(rows), args.out)
    else:
        lines = [f"expression  : {to_dsl(expr)}"]
        if reference.is_known:
            lines.append(f"exact       : {reference.as_float()!r}"
                         f"  [{' -> '.join(reference.trace)}]")
        else:
            lines.append("exact       : unknown")
        lines.append(f"extrapolated: {report.extrapolated!r} (converged={report.converged})")
        if reference.is_known:
            lines.append(f"discrepancy : {abs(report.extrapolated - reference.as_float()):.6g}")
        _emit("\n".join(lines), args.out)
    if args.strict and not report.converged:
        return 3
    return 0


def _cmd_sweep(args) -> int:
    expr = parse_expression(args.expression)
    k0, k1 = args.schedule
    count = max(args.points, 2)
    rows = []
    for j in range(count):
        k = k0 + (k1 - k0) * j / (count - 1)
        s = 1.0 + 0.5 * 2.0 ** (-k)
        ev = density_at(expr, s, args.eps, term_budget=args.budget, loosen=True)
        rows.append(ev.to_row())
    if args.format == "json":
        _emit(json.dumps(rows, indent=2, sort_keys=True), args.out)
    else:
        _emit(_csv_text(rows), args.out)
    return 0


def _cmd_oracle(args) -> int:
    expr = parse_expression(args.expression)
    n = args.N
    rows = []
    for s in _ORACLE_S:
        brute = brute_partial_sum(expr, s, n)
        fast = partial_double_sum(expr, s, n)
        denom = max(abs(brute), 1e-300)
        rows.append({
            "check": "partial_sum",
            "s": repr(s),
            "N": n,
            "oracle": repr(brute),
            "engine": repr(fast),
            "rel_diff": repr(abs(brute - fast) / denom),
        })
    count = counting_density(expr, n)
    rows.append({
        "check": "counting",
        "s": "",
        "N": n,
        "oracle": repr(count.ratio),
        "engine": "",
        "rel_diff": "",
    })
    if args.format == "json":
        _emit(json.dumps(rows, indent=2, sort_keys=True), args.out)
    elif args.format == "csv":
        _emit(_csv_text(rows), args.out)
    else:
        lines = [f"expression: {to_dsl(expr)}"]
        for r in rows:
            if r["check"] == "partial_sum":
                lines.append(f"  s={r['s']:<6} N={r['N']} oracle={r['oracle']} "
                             f"engine={r['engine']} rel_diff={r['rel_diff']}")
            else:
                lines.append(f"  box count ratio at N={r['N']}: {r['oracle']}")
        _emit("\n".join(lines), args.out)
    return 0


# ---------------------------------------------------------------------------
# check: corpus invariant suite
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class _CheckRow:
    check: str
    subject: str
    status: str
    detail: str

    def to_row(self) -> dict:
        return {"check": self.check, "subject": self.subject,
                "status": self.status, "detail": self.detail}


def _check_entry(item) -> list[_CheckRow]:
    entry, args = item
    rows: list[_CheckRow] = []
    expr = entry.expr

    # membership is preserved by normalisation on a 64x64 window
    mask_raw = grid_mask(expr, 1, 64, 64)
    mask_norm = grid_mask(normalize(expr), 1, 64, 64)
    same = bool((mask_raw == mask_norm).all())
    rows.append(_CheckRow("normalize-membership", entry.name,
                          "pass" if same else "FAIL", ""))

    # exact engine agrees with the recorded corpus density
    value = exact_density(expr)
    if entry.density is None:
        ok = not value.is_known
        detail = value.kind
    else:
        ok = value.is_known and value.rational == Fraction(entry.density)
        detail = f"exact={value.rational if value.is_known else 'unknown'}"
    rows.append(_CheckRow("exact-density", entry.name, "pass" if ok else "FAIL", detail))

    # brute force equals the fast partial sum at a small box
    brute = brute_partial_sum(expr, 1.5, 120)
    fast = partial_double_sum(expr, 1.5, 120)
    rel = abs(brute - fast) / max(abs(brute), 1e-300)
    rows.append(_CheckRow("oracle-equivalence", entry.name,
                          "pass" if rel <= 1e-12 else "FAIL", f"rel={rel!r}"))

    # extrapolation matches the exact value
    if "estimate" in entry.tags and entry.density is not None:
        if "near" in entry.tags:
            cfg = EstimatorConfig(s_schedule=schedule(4, 10), per_point_eps=1e-5,
                                  workers=args.workers)
            tol = 2e-2
        else:
            cfg = EstimatorConfig(workers=args.workers)
            tol = 5e-3
        report = estimate_density(expr, cfg)
        delta = abs(report.extrapolated - float(entry.density))
        rows.append(_CheckRow("estimate-agreement", entry.name,
                              "pass" if delta <= tol else "FAIL",
                              f"delta={delta!r}"))
    return rows


def _cmd_check(args) -> int:
    entries = [(c, args) for c in corpus_mod.CORPUS]
    if args.workers > 1:
        with ThreadPoolExecutor(max_workers=args.workers) as pool:
            groups = list(pool.map(_check_entry, entries))
    else:
        groups = [_check_entry(item) for item in entries]
    rows = [row.to_row() for group in groups for row in group]
    failed = sum(1 for r in rows if r["status"] != "pass")
    if args.format == "json":
        _emit(json.dumps(rows, indent=2, sort_keys=True), args.out)
    else:
        text = _csv_text(rows)
        if args.format == "table" and args.out is None:
            for r in rows:
                sys.stdout.write(f"{r['status']:>4}  {r['check']:<22} {r['subject']:<24}"
                                 f" {r['detail']}\n")
            sys.stdout.write(f"{len(rows) - failed}/{len(rows)} checks passed\n")
        else:
            _emit(text, args.out)
    return 0 if failed == 0 else 1


_COMMON_KEYS = ("schedule", "eps", "budget", "degree", "workers", "format", "out")
_EXTRA_KEYS = {"sweep": ("points",), "oracle": ("N",)}


def _load_config_tokens(path: str, command: str) -> list[str]:
    """key=value lines -> flag tokens; explicit command-line flags win."""
    allowed = set(_COMMON_KEYS) | set(_EXTRA_KEYS.get(command, ()))
    tokens: list[str] = []
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValidationError(f"{path}:{lineno}: expected key=value, got {line!r}")
            key, value = (part.strip() for part in line.split("=", 1))
            if key == "strict":
                if value.lower() in ("1", "true", "yes", "on"):
                    tokens.append("--strict")
            elif key in allowed:
                tokens.extend([f"--{key}", value])
            else:
                raise ValidationError(f"{path}:{lineno}: unknown option {key!r}")
    return tokens


def _apply_config(argv: list[str]) -> list[str]:
    path = None
    rest: list[str] = []
    i = 0
    while i < len(argv):
        tok = argv[i]
        if tok == "--config":
            if i + 1 >= len(argv):
                raise ValidationError("--config requires a path")
            path = argv[i + 1]
            i += 2
            continue
        if tok.startswith("--config="):
            path = tok.split("=", 1)[1]
            i += 1
            continue
        rest.append(tok)
        i += 1
    if path is None:
        return argv
    if not rest:
        raise ValidationError("--config requires a subcommand")
    # inject right after the subcommand so later (user) flags take precedence
    return rest[:1] + _load_config_tokens(path, rest[0]) + rest[1:]


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    raw = list(argv) if argv is not None else sys.argv[1:]
    try:
        raw = _apply_config(raw)
    except (ValidationError, OSError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    args = parser.parse_args(raw)
    handlers = {
        "exact": _cmd_exact,
        "estimate": _cmd_estimate,
        "compare": _cmd_compare,
        "sweep": _cmd_sweep,
        "oracle": _cmd_oracle,
        "check": _cmd_check,
    }
    try:
        return handlers[args.command](args)
    except (ParseError, ValidationError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    except (BudgetExceeded, ValueError) as exc:
        sys.stderr.write(f"engine error: {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
