#!/usr/bin/env python3
"""Run the full verification campaign and write a JSON summary.

Covers the exhaustive decode sweeps (both engines plus the rank oracle), the
XOR identity suites, and the golden worked-example check.  Exits nonzero on
any failure.
"""

from __future__ import annotations

import argparse
import json
import pathlib
import time

from fdcache.core import SchemeParams
from fdcache.harness import (
    golden_example_check,
    golden_json_dict,
    identity_json_dict,
    identity_suite,
    sweep_json_dict,
    verify_sweep,
)

SWEEPS = [
    (2, 2, 0), (2, 2, 1),
    (3, 3, 0), (3, 3, 1), (3, 3, 2),
    (3, 4, 0), (3, 4, 1), (3, 4, 2), (3, 4, 3),
    (3, 6, 1),
    (4, 6, 1), (4, 6, 2),
]

SUITES = [(3, 6, 1), (4, 6, 2)]


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", default="0")
    parser.add_argument("--jobs", type=int, default=1)
    parser.add_argument("--samples", type=int, default=10, help="demands per identity suite")
    parser.add_argument("--out", default="out/campaign.json")
    args = parser.parse_args()

    ok = True
    summary = {"seed": args.seed, "sweeps": [], "identity_suites": [], "golden": None}

    for n, k, r in SWEEPS:
        started = time.perf_counter()
        sweep = verify_sweep(
            SchemeParams(n, k, r), "fully_demanded", engine="both", seed=args.seed, jobs=args.jobs
        )
        elapsed = time.perf_counter() - started
        ok = ok and sweep.success
        summary["sweeps"].append(sweep_json_dict(sweep))
        print(
            f"sweep ({n},{k}) r={r}: {sweep.count} demands,"
            f" {'ok' if sweep.success else 'FAILED'}, oracle={sweep.oracle_ok}, {elapsed:.1f}s"
        )

    for n, k, r in SUITES:
        suite = identity_suite(SchemeParams(n, k, r), samples=args.samples)
        ok = ok and suite.success
        summary["identity_suites"].append(identity_json_dict(suite))
        counts = {name: family.checked for name, family in suite.families.items()}
        print(f"identities ({n},{k}) r={r}: {'ok' if suite.success else 'FAILED'} {counts}")

    golden = golden_example_check()
    ok = ok and golden.success
    summary["golden"] = golden_json_dict(golden)
    print(f"golden example: {'ok' if golden.success else 'FAILED'}")

    out = pathlib.Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps(summary, indent=2) + "\n", encoding="utf-8")
    print(f"wrote {out}")
    return 0 if ok else 1


if __name__ == "__main__":
    raise SystemExit(main())
