"""Command-line entry point.

Exit codes: 0 success, 1 configuration error, 2 runtime or I/O error,
3 validation failure.
"""

from __future__ import annotations

import sys

from . import report
from .errors import ConfigurationError
from .harness import default_out_path, parse_config, run_dmt, run_outage, run_validate, run_wer


def main(argv=None) -> int:
    try:
        cfg = parse_config(argv)
    except ConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    try:
        if cfg.command == "validate":
            rep = run_validate(cfg)
            for check in rep.checks:
                status = "PASS" if check.passed else "FAIL"
                print(f"[{status}] {check.name}: {check.detail}")
            if rep.passed:
                print("validate: all checks passed")
                return 0
            print("validate: failures present", file=sys.stderr)
            return 3

        if cfg.command == "wer":
            records = run_wer(cfg)
        elif cfg.command == "outage":
            records = run_outage(cfg)
        else:
            records = run_dmt(cfg)
        out = default_out_path(cfg)
        report.write_csv(records, out, cfg.command, cfg.scheme, cfg.seed)
        fig = report.figure_path_for(out)
        report.render_svg(records, fig, cfg.command)
        print(f"wrote {out} and {fig}")
        return 0
    except (ConfigurationError, OSError, RuntimeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
