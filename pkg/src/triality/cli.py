"""Command-line entry point.

    triality sweep --config CONFIG.json [--out-dir DIR]
    triality verify [--seed N] [--cases N]
    triality discrepancy --gamma1 X --gamma2 Y [--json PATH]

Exit codes: 0 success, 1 verification failure, 2 config error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .channels import compare_paper_vs_oracle
from .core import DensityMatrix
from .sweep import ConfigError, OutputError, load_config, run_sweep
from .verify import run_verify

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_CONFIG = 2
EXIT_IO = 3

DISCREPANCY_STATES = {
    "basis_2": np.diag([0.0, 0.0, 1.0]),
    "max_coherent_qutrit": np.full((3, 3), 1.0 / 3.0),
    "maximally_mixed": np.eye(3) / 3.0,
    "mixed_sample": np.array(
        [[0.5, 0.1 - 0.05j, 0.05], [0.1 + 0.05j, 0.3, 0.02j], [0.05, -0.02j, 0.2]]
    ),
}


def run_discrepancy_report(gamma1: float, gamma2: float) -> tuple[str, dict]:
    """Text table and JSON-ready dict comparing printed rules with the cascade."""
    lines = [f"qutrit amplitude damping: printed rules vs cascade  (gamma1={gamma1:g}, gamma2={gamma2:g})"]
    payload = {"gamma1": gamma1, "gamma2": gamma2, "states": {}}
    for name, matrix in DISCREPANCY_STATES.items():
        report = compare_paper_vs_oracle(DensityMatrix(matrix), gamma1, gamma2)
        payload["states"][name] = report.to_dict()
        lines.append("")
        lines.append(f"state {name}  (max deviation {report.max_abs_deviation:.3e})")
        lines.append(f"  {'quantity':<28} {'printed':>12} {'oracle':>12} {'|diff|':>10}  verdict")
        for c in report.comparisons:
            lines.append(
                f"  {c.quantity:<28} {c.paper_value:>12.6f} {c.oracle_value:>12.6f} "
                f"{c.deviation:>10.2e}  {c.verdict}"
            )
    return "\n".join(lines), payload


def _cmd_sweep(args) -> int:
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(f"config error at {exc.path}: {exc.message}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"cannot read {args.config}: {exc.strerror or exc}", file=sys.stderr)
        return EXIT_IO
    try:
        records = run_sweep(cfg, out_dir=args.out_dir)
    except OutputError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_IO
    print(f"{cfg.name}: {len(records)} records ({cfg.kind}) written to {args.out_dir}")
    return EXIT_OK


def _cmd_verify(args) -> int:
    if args.cases < 1:
        print("--cases must be at least 1", file=sys.stderr)
        return EXIT_CONFIG
    report = run_verify(args.seed, args.cases, inject_fault=args.inject_fault)
    print(report.text())
    return EXIT_OK if report.ok else EXIT_VERIFY_FAILED


def _cmd_discrepancy(args) -> int:
    for name in ("gamma1", "gamma2"):
        value = getattr(args, name)
        if not 0.0 <= value <= 1.0:
            print(f"--{name} must lie in [0, 1], got {value}", file=sys.stderr)
            return EXIT_CONFIG
    text, payload = run_discrepancy_report(args.gamma1, args.gamma2)
    print(text)
    if args.json:
        try:
            with open(args.json, "w", encoding="utf-8") as fh:
                json.dump(payload, fh, indent=2)
                fh.write("\n")
        except OSError as exc:
            print(f"cannot write {args.json}: {exc.strerror or exc}", file=sys.stderr)
            return EXIT_IO
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="triality",
        description="Visibility / predictability / entanglement under damping channels.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", help="sweep a damping parameter and write curves")
    p.add_argument("--config", required=True, help="JSON sweep configuration")
    p.add_argument("--out-dir", default=".", help="directory for output files (default: .)")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("verify", help="run the randomized property suite")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--cases", type=int, default=1000, help="random states per check")
    p.add_argument("--inject-fault", action="store_true", help=argparse.SUPPRESS)
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("discrepancy", help="compare printed qutrit damping rules with the cascade channel")
    p.add_argument("--gamma1", type=float, required=True)
    p.add_argument("--gamma2", type=float, required=True)
    p.add_argument("--json", help="also write the report as JSON to this path")
    p.set_defaults(func=_cmd_discrepancy)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
