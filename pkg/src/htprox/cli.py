"""Command-line entry point: ``htprox {separation,bounds,validate,run}``.

Exit codes: 0 success, 1 check failure, 2 configuration error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from typing import List, Optional

from .harness.config import ConfigError, as_dict, load_config, parse_value, resolve_out_dir
from .harness import experiments as ex
from .harness.output import write_csv, write_svg
from .oracles import OracleBudgetError

EXIT_OK, EXIT_CHECK, EXIT_CONFIG = 0, 1, 2

_DEFAULTS = {
    "separation": {"experiment": "separation", "c0_grid": [0.5, 1.0, 2.0],
                   "sampler": {"iterations": 512, "chains": 10_000},
                   "oracle": {"tail_envelope": True}},
    "bounds": {"experiment": "bounds_overlay"},
    "validate": {"experiment": "validate"},
    "run": {"experiment": "single_run"},
}
_ALLOWED = {"separation": ("separation",), "bounds": ("bounds_overlay",),
            "validate": ("validate", "validate_rng", "validate_oracles"),
            "run": ("single_run",)}


def _split_overrides(extra: List[str]):
    out = {}
    for tok in extra:
        if not tok.startswith("--") or "=" not in tok:
            raise ConfigError(f"unrecognized argument {tok!r} (overrides look like --section.key=value)")
        key, val = tok[2:].split("=", 1)
        out[key] = parse_value(val)
    return out


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="htprox", description="Proximal samplers for heavy-tailed targets")
    sub = p.add_subparsers(dest="command", required=True)
    for name, help_ in (("separation", "Gaussian vs stable proximal sampler on one target"),
                        ("bounds", "evaluate theory curves over an iteration grid"),
                        ("validate", "run the statistical self-check suite"),
                        ("run", "run a single sampler configuration")):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--config", help="JSON experiment config")
        sp.add_argument("--out", help="output directory (falls back to $HTPROX_OUT)")
        sp.add_argument("--seed", type=int, help="u64 seed")
        sp.add_argument("--threads", type=int, default=1, help="worker cap")
        sp.add_argument("--svg", action="store_true", help="also write a TV-vs-k SVG plot")
    return p


def _svg_series(rows):
    series = {}
    for r in rows:
        if r.div_kind == "radial_tv" and r.k > 0 and r.sampler != "exact_target":
            series.setdefault(f"{r.experiment} {r.sampler}", []).append((r.k, r.div_value))
    return series


def _json_safe(obj):
    # strict JSON has no NaN; unavailable statistics become null
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    return obj


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args, extra = parser.parse_known_args(argv)
    try:
        overrides = _split_overrides(extra)
        if args.seed is not None:
            overrides["seed"] = args.seed
        if args.svg:
            overrides["svg"] = True
        cfg = load_config(args.config, overrides, _DEFAULTS[args.command])
        if cfg.experiment not in _ALLOWED[args.command]:
            raise ConfigError(f"config experiment {cfg.experiment!r} does not match "
                              f"subcommand {args.command!r}")
        if args.threads < 1:
            raise ConfigError("--threads must be >= 1")
        out = resolve_out_dir(cfg, args.out)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG

    with open(os.path.join(out, "config.json"), "w") as fh:
        json.dump(as_dict(cfg), fh, indent=2)

    try:
        if args.command == "validate":
            results = ex.run_validation(cfg)
            lines = [r.line() for r in results]
            with open(os.path.join(out, "validation.txt"), "w") as fh:
                fh.write("\n".join(lines) + "\n")
            print("\n".join(lines))
            return EXIT_OK if all(r.passed for r in results) else EXIT_CHECK

        if args.command == "bounds":
            rows = ex.run_bounds_overlay(cfg)
            write_csv(os.path.join(out, "bounds.csv"), rows)
            if cfg.svg:
                series = {}
                for r in rows:
                    series.setdefault(r.sampler, []).append((r.k, r.bound_value))
                write_svg(os.path.join(out, "bounds.svg"), series, "TV lower bounds",
                          ylabel="bound")
            print(f"wrote {len(rows)} rows to {os.path.join(out, 'bounds.csv')}")
            return EXIT_OK

        if args.command == "run":
            rows, run = ex.run_single(cfg, args.threads)
            write_csv(os.path.join(out, "results.csv"), rows)
            if cfg.svg:
                write_svg(os.path.join(out, "results.svg"), _svg_series(rows), "radial TV")
            print(f"wrote {len(rows)} rows to {os.path.join(out, 'results.csv')}")
            return EXIT_OK

        rows, summary = ex.run_separation(cfg, args.threads)
        write_csv(os.path.join(out, "separation.csv"), rows)
        with open(os.path.join(out, "summary.json"), "w") as fh:
            json.dump(_json_safe(summary), fh, indent=2)
        if cfg.svg:
            write_svg(os.path.join(out, "separation.svg"), _svg_series(rows), "radial TV vs k")
        print(ex.format_summary(summary))
        return EXIT_CHECK if summary["pass"] is False else EXIT_OK
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except OracleBudgetError as e:
        print(f"sampler failure: {e}", file=sys.stderr)
        return EXIT_CHECK


if __name__ == "__main__":
    sys.exit(main())
