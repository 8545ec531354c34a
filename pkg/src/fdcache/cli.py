"""Command-line front end: tradeoff | verify | bounds | lemmas | golden.

Exit codes: 0 success, 1 verification/identity failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction

from .analysis import (
    RatePoint,
    check_point,
    region_33,
    tradeoff_curve,
)
from .core import (
    DemandType,
    NotFullyDemandedError,
    SchemeParams,
    format_fraction,
    parse_fraction,
)
from .harness import (
    ENGINES,
    SweepLimitExceeded,
    golden_example_check,
    golden_json_dict,
    identity_json_dict,
    identity_suite,
    report_json_dict,
    reports_csv_rows,
    sweep_csv_rows,
    sweep_json_dict,
    to_json,
    verify_demand,
    verify_sweep,
)

SETTINGS = {"mixed": "mixed", "300": "type300", "210": "type210", "111": "type111"}


def _decimal(value: Fraction) -> str:
    return format(float(value), ".10g")


def _emit(text: str, output: str | None) -> None:
    if output:
        with open(output, "w", encoding="utf-8") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)


def _parse_ints(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(part) for part in text.split(","))
    except ValueError:
        raise ValueError(f"expected comma-separated integers, got {text!r}") from None


def cmd_tradeoff(args) -> int:
    dtype = DemandType.of(_parse_ints(args.type)) if args.type else None
    rows = tradeoff_curve(args.n, args.k, dtype=dtype, worst=args.worst, hull=args.hull)
    if args.format == "json":
        payload = {
            "n_files": args.n,
            "n_users": args.k,
            "demand_class": "worst" if args.worst else {"type": list(dtype.counts)},
            "hull": args.hull,
            "rows": [
                {
                    "r": row.r,
                    "M": format_fraction(row.point.memory),
                    "M_dec": _decimal(row.point.memory),
                    "R": format_fraction(row.point.rate),
                    "R_dec": _decimal(row.point.rate),
                    "S": None if row.saving is None else format_fraction(row.saving),
                }
                for row in rows
            ],
        }
        _emit(to_json(payload), args.output)
    elif args.format == "csv":
        lines = ["r,M_frac,M_dec,R_frac,R_dec,S_frac"]
        for row in rows:
            lines.append(
                ",".join(
                    [
                        "" if row.r is None else str(row.r),
                        format_fraction(row.point.memory),
                        _decimal(row.point.memory),
                        format_fraction(row.point.rate),
                        _decimal(row.point.rate),
                        "" if row.saving is None else format_fraction(row.saving),
                    ]
                )
            )
        _emit("\n".join(lines) + "\n", args.output)
    else:
        label = "worst case" if args.worst else f"type ({dtype.label()})"
        lines = [f"tradeoff for N={args.n} K={args.k}, {label}"]
        for row in rows:
            tag = "endpoint" if row.r is None else f"r={row.r}"
            saving = "" if row.saving is None else f"  S={format_fraction(row.saving)}"
            lines.append(
                f"  {tag}: M={format_fraction(row.point.memory)}"
                f" ({_decimal(row.point.memory)}), R={format_fraction(row.point.rate)}"
                f" ({_decimal(row.point.rate)}){saving}"
            )
        _emit("\n".join(lines) + "\n", args.output)
    return 0


def cmd_verify(args) -> int:
    params = SchemeParams(args.n, args.k, args.r)
    if args.demand:
        report = verify_demand(
            params,
            _parse_ints(args.demand),
            engine=args.engine,
            seed=args.seed,
            payload_width=args.payload_bytes,
            run_oracle=not args.no_oracle,
        )
        if args.format == "json":
            _emit(to_json(report_json_dict(report, timing=args.timing)), args.output)
        elif args.format == "csv":
            _emit("\n".join(reports_csv_rows([report])) + "\n", args.output)
        else:
            verdict = "ok" if report.success else "FAILED"
            _emit(
                f"demand {report.demand}: {verdict}, T={report.t_count},"
                f" rate={format_fraction(report.rate_measured)},"
                f" memory={format_fraction(report.memory_measured)},"
                f" oracle={report.oracle_ok}\n",
                args.output,
            )
        return 0 if report.success and report.oracle_ok is not False else 1

    demand_class = "fully_demanded" if args.all_fully_demanded else DemandType.of(_parse_ints(args.type))
    sweep = verify_sweep(
        params,
        demand_class,
        engine=args.engine,
        seed=args.seed,
        jobs=args.jobs,
        payload_width=args.payload_bytes,
        run_oracle=not args.no_oracle,
        limit=args.limit,
        force=args.force,
    )
    if args.format == "json":
        _emit(to_json(sweep_json_dict(sweep, timing=args.timing)), args.output)
    elif args.format == "csv":
        _emit("\n".join(sweep_csv_rows(sweep)) + "\n", args.output)
    else:
        verdict = "ok" if sweep.success else "FAILED"
        lines = [
            f"sweep {sweep.demand_class} at N={args.n} K={args.k} r={args.r}:"
            f" {sweep.count} demands, {verdict}, oracle={sweep.oracle_ok}"
        ]
        for row in sweep.per_type():
            lines.append(
                f"  type ({','.join(str(c) for c in row['type'])}):"
                f" {row['demands']} demands, T={row['T']}, rate={row['rate']}"
            )
        for failed in sweep.failures:
            lines.append(f"  FAILED demand {failed.demand}")
        _emit("\n".join(lines) + "\n", args.output)
    return 0 if sweep.success else 1


def cmd_bounds(args) -> int:
    region = region_33(SETTINGS[args.setting])
    check = None
    if args.check:
        parts = args.check.split(",")
        if len(parts) != 2:
            raise ValueError(f"--check expects M,R got {args.check!r}")
        point = RatePoint(parse_fraction(parts[0]), parse_fraction(parts[1]))
        check = check_point(point, region)
    if args.format == "json":
        payload = {
            "setting": args.setting,
            "facets": [f.label() for f in region.outer_facets],
            "inner_corners": [
                [format_fraction(p.memory), format_fraction(p.rate)]
                for p in region.inner_corners
            ],
        }
        if check is not None:
            payload["check"] = {
                "point": [format_fraction(check.point.memory), format_fraction(check.point.rate)],
                "satisfied": check.satisfied,
                "facets": [
                    {"facet": fc.facet.label(), "value": format_fraction(fc.value), "ok": fc.satisfied}
                    for fc in check.facets
                ],
            }
        _emit(to_json(payload), args.output)
    elif args.format == "csv":
        lines = ["kind,a,b,c_or_R,ok"]
        for facet in region.outer_facets:
            lines.append(
                f"facet,{format_fraction(facet.m_coef)},{format_fraction(facet.r_coef)},"
                f"{format_fraction(facet.bound)},"
            )
        for corner in region.inner_corners:
            lines.append(f"corner,{format_fraction(corner.memory)},{format_fraction(corner.rate)},,")
        if check is not None:
            for fc in check.facets:
                lines.append(
                    f"check,{fc.facet.label()},{format_fraction(fc.value)},,{str(fc.satisfied).lower()}"
                )
        _emit("\n".join(lines) + "\n", args.output)
    else:
        lines = [f"(3,3) setting {args.setting}"]
        lines.append("outer facets: " + "; ".join(f.label() for f in region.outer_facets))
        corners = ", ".join(
            f"({format_fraction(p.memory)}, {format_fraction(p.rate)})" for p in region.inner_corners
        )
        lines.append(f"inner corners: {corners}")
        if check is not None:
            lines.append(
                f"check ({format_fraction(check.point.memory)}, {format_fraction(check.point.rate)}):"
                f" {'satisfies all facets' if check.satisfied else 'VIOLATES'}"
            )
            for fc in check.facets:
                status = "ok" if fc.satisfied else "violated"
                lines.append(f"  {fc.facet.label()}: value {format_fraction(fc.value)} -> {status}")
        _emit("\n".join(lines) + "\n", args.output)
    return 0


def cmd_lemmas(args) -> int:
    params = SchemeParams(args.n, args.k, args.r)
    demands = [_parse_ints(args.demand)] if args.demand else None
    report = identity_suite(params, demands=demands, samples=args.samples)
    if args.format == "json":
        _emit(to_json(identity_json_dict(report)), args.output)
    elif args.format == "csv":
        lines = ["family,checked,failed"]
        for name, result in report.families.items():
            lines.append(f"{name},{result.checked},{len(result.failures)}")
        _emit("\n".join(lines) + "\n", args.output)
    else:
        lines = [
            f"identity suite at N={args.n} K={args.k} r={args.r}"
            f" over {len(report.demands)} demand(s)"
        ]
        for name, result in report.families.items():
            verdict = "ok" if result.ok else "FAILED"
            lines.append(f"  {name}: {result.checked} checks, {verdict}")
            lines.extend(f"    {failure}" for failure in result.failures)
        _emit("\n".join(lines) + "\n", args.output)
    return 0 if report.success else 1


def cmd_golden(args) -> int:
    report = golden_example_check()
    if args.format == "json":
        _emit(to_json(golden_json_dict(report)), args.output)
    elif args.format == "csv":
        lines = ["check,ok"]
        lines.extend(f"{check.name},{str(check.ok).lower()}" for check in report.checks)
        _emit("\n".join(lines) + "\n", args.output)
    else:
        lines = ["golden (3,6) r=1 construction check"]
        for check in report.checks:
            verdict = "ok" if check.ok else f"FAILED {check.detail}"
            lines.append(f"  {check.name}: {verdict}")
        _emit("\n".join(lines) + "\n", args.output)
    return 0 if report.success else 1


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--format", choices=("text", "json", "csv"), default="text")
    parser.add_argument("--output", help="write to this path instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fdcache",
        description="Construct, verify, and analyze coded caching for fully demanded systems",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("tradeoff", help="emit the (M, R) curve for a demand type")
    p.add_argument("--n", type=int, required=True, help="number of files N")
    p.add_argument("--k", type=int, required=True, help="number of users K")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--type", help="demand type as comma-separated counts, e.g. 3,1,1,1")
    group.add_argument("--worst", action="store_true", help="worst case over fully demanded types")
    p.add_argument("--hull", action="store_true", help="keep only lower-convex-hull rows")
    _add_common(p)
    p.set_defaults(func=cmd_tradeoff)

    p = sub.add_parser("verify", help="run end-to-end verification")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--r", type=int, required=True)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--demand", help="one demand vector, e.g. 1,1,1,1,2,3")
    group.add_argument("--type", help="sweep one demand type, e.g. 4,1,1")
    group.add_argument("--all-fully-demanded", action="store_true", help="sweep every fully demanded vector")
    p.add_argument("--engine", choices=ENGINES, default="both")
    p.add_argument("--seed", default="0")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--payload-bytes", type=int, default=1)
    p.add_argument("--no-oracle", action="store_true", help="skip the rank-oracle cross-check")
    p.add_argument("--limit", type=int, default=100_000, help="refuse sweeps larger than this")
    p.add_argument("--force", action="store_true", help="run even past the sweep limit")
    p.add_argument("--timing", action="store_true", help="include elapsed_ms in reports")
    _add_common(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("bounds", help="(3,3) bound regions and point checks")
    p.add_argument("--setting", choices=tuple(SETTINGS), required=True)
    p.add_argument("--check", help="point to classify, as M,R fractions e.g. 5/3,1/2")
    _add_common(p)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("lemmas", help="run the XOR identity suites")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--demand", help="check one demand instead of sampling")
    p.add_argument("--samples", type=int, default=10)
    _add_common(p)
    p.set_defaults(func=cmd_lemmas)

    p = sub.add_parser("golden", help="check the (3,6) r=1 worked construction")
    _add_common(p)
    p.set_defaults(func=cmd_golden)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (NotFullyDemandedError, SweepLimitExceeded) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
