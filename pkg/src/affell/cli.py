"""Command line entry point.

    affell verify TYPE [--level K] [--mode MODE] [--checks a,b,c]
                  [--tau RE,IM] [--seed S] [--report json|text] [--out PATH]

Exit codes: 0 all checks pass, 1 at least one check failed, 2 configuration
error, 3 numeric (series truncation / pole) error.
"""
from __future__ import annotations

import argparse
import os
import sys

from .harness import (
    CHECKS,
    ConfigError,
    ScenarioConfig,
    emit_report,
    run_suite,
)
from .theta import PoleError, SeriesConfig, TruncationError


def _parse_tau(text: str) -> complex:
    try:
        re_s, im_s = text.split(",")
        return complex(float(re_s), float(im_s))
    except ValueError as exc:
        raise ConfigError(f"bad tau {text!r}; expected RE,IM") from exc


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="affell")
    sub = p.add_subparsers(dest="command", required=True)
    v = sub.add_parser("verify", help="run property checks on one affine type")
    v.add_argument("type", help="affine type label, e.g. C2~1 or A2~2")
    v.add_argument("--level", type=int, default=1, metavar="K")
    v.add_argument(
        "--mode", choices=["invariant", "generic"], default="invariant"
    )
    v.add_argument(
        "--checks",
        default=None,
        help="comma-separated subset of: " + ", ".join(sorted(CHECKS)),
    )
    v.add_argument("--tau", default="0.05,0.8", metavar="RE,IM")
    v.add_argument("--seed", type=int, default=0, metavar="S")
    v.add_argument("--report", choices=["json", "text"], default="text")
    v.add_argument("--out", default=None, metavar="PATH")
    v.add_argument("--points", type=int, default=6, metavar="N")
    return p


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        series = SeriesConfig()
        env_tol = os.environ.get("AFFELL_SERIES_TOL")
        if env_tol is not None:
            series = SeriesConfig(tol=float(env_tol))
        config = ScenarioConfig(
            type_label=args.type,
            level_k=args.level,
            mode=args.mode,
            tau=_parse_tau(args.tau),
            sample_points=args.points,
            seed=args.seed,
            series=series,
        )
        checks = None
        if args.checks is not None:
            checks = [c.strip() for c in args.checks.split(",") if c.strip()]
        reports = run_suite(config, checks)
    except (ConfigError, ValueError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except (TruncationError, PoleError) as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return 3
    text = emit_report(reports, args.report, config)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return 0 if all(r.status != "fail" for r in reports) else 1


if __name__ == "__main__":
    sys.exit(main())
