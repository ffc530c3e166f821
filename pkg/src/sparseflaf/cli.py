"""Command-line front end.

Subcommands: ``sweep`` (block-count sweep at a fixed nonlinearity),
``tracking`` (midpoint threshold switch), ``single`` (one learning curve
at a fixed block count) and ``selftest`` (golden-trace and reduction
identity checks).  Configuration resolves built-in defaults, then an
optional flat ``key = value`` config file, then ``--set`` overrides.

Exit status: 0 when all requested outputs were produced, 2 for usage and
validation errors, 1 for runtime failures.
"""

import argparse
import os
import sys
from dataclasses import dataclass, replace

from .errors import ConfigurationError
from .experiment import (ExperimentConfig, run_block_sweep, run_ensemble,
                         run_tracking, steady_state_emse, sweep_config,
                         tracking_config, write_learning_curves,
                         write_mixing_trace, write_sweep_table)
from .selftest import run_selftest

DEFAULT_BLOCK_COUNTS = (1, 2, 4, 5, 8, 10, 20)
OUTPUT_DIR_ENV = "SPARSEFLAF_OUTDIR"


class UsageError(Exception):
    pass


def _parse_bool(text):
    low = text.lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _parse_algorithms(text):
    return tuple(part.strip() for part in text.split(",") if part.strip())


# every settable key with its parser; config fields plus the experiment
# shorthands (stationary zeta, tracking thresholds, steady-state window)
SETTING_PARSERS = {
    "M": int, "P": int, "n_blocks": int, "signal_length": int,
    "num_runs": int, "base_seed": int, "threads": int,
    "snr_db": float, "coloring_pole": float,
    "mu_lin": float, "delta_lin": float,
    "mu_fl1": float, "delta_fl1": float,
    "mu_fl2": float, "delta_fl2": float,
    "gamma": float, "epsilon": float, "beta": float, "alpha": float,
    "xi_prop": float, "xi_vss": float,
    "mu_c": float, "beta_r": float, "a_init": float, "r_init": float,
    "freeze_fir": _parse_bool, "engine": str,
    "algorithms": _parse_algorithms,
    "zeta": float, "zeta_first": float, "zeta_second": float,
    "window_fraction": float,
}

# keys that do not map straight onto ExperimentConfig fields
EXTRA_KEYS = ("zeta", "zeta_first", "zeta_second", "window_fraction")


@dataclass
class CliInvocation:
    subcommand: str
    config_path: str = None
    overrides: tuple = ()
    output_dir: str = None
    runs: int = None
    seed: int = None
    threads: int = None
    blocks: tuple = None


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="sparseflaf",
        description="Combined sparse-regularized functional-link adaptive "
                    "filtering experiments")
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name, help_text in (
            ("sweep", "steady-state EMSE vs block count"),
            ("tracking", "learning curves across a nonlinearity switch"),
            ("single", "one learning curve at a fixed block count"),
            ("selftest", "golden-trace and reduction-identity checks")):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", dest="config_path", metavar="FILE",
                       help="flat key = value config file")
        p.add_argument("--set", dest="overrides", action="append",
                       default=[], metavar="KEY=VALUE",
                       help="override one configuration key")
        p.add_argument("--output-dir", "-o", dest="output_dir", metavar="DIR",
                       help=f"output directory (default ${OUTPUT_DIR_ENV} or .)")
        p.add_argument("--runs", type=int, help="number of Monte Carlo runs")
        p.add_argument("--seed", type=int, help="base seed")
        p.add_argument("--threads", type=int, help="trial worker cap")
        if name == "sweep":
            p.add_argument("--blocks", metavar="N,N,...",
                           help="comma-separated block counts "
                                f"(default {','.join(map(str, DEFAULT_BLOCK_COUNTS))})")
    return parser


def parse_invocation(argv=None) -> CliInvocation:
    """Parse argv; argparse exits with status 2 on malformed usage."""
    args = _build_parser().parse_args(argv)
    blocks = None
    if getattr(args, "blocks", None):
        try:
            blocks = tuple(int(c) for c in args.blocks.split(","))
        except ValueError:
            raise UsageError(f"--blocks expects integers, got {args.blocks!r}")
    return CliInvocation(subcommand=args.subcommand,
                         config_path=args.config_path,
                         overrides=tuple(args.overrides),
                         output_dir=args.output_dir,
                         runs=args.runs, seed=args.seed,
                         threads=args.threads, blocks=blocks)


def _parse_setting(key, value):
    if key not in SETTING_PARSERS:
        valid = ", ".join(sorted(SETTING_PARSERS))
        raise UsageError(f"unknown configuration key {key!r}; valid keys: {valid}")
    try:
        return SETTING_PARSERS[key](value)
    except ValueError as exc:
        raise UsageError(f"bad value for {key!r}: {exc}")


def load_config_file(path) -> dict:
    """Flat key = value lines; '#' starts a comment."""
    settings = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc}")
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key = value, got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        settings[key] = _parse_setting(key, value)
    return settings


def resolve_settings(inv: CliInvocation) -> dict:
    """Defaults <- config file <- --set overrides <- shorthand flags."""
    settings = {}
    if inv.config_path:
        settings.update(load_config_file(inv.config_path))
    for item in inv.overrides:
        if "=" not in item:
            raise UsageError(f"--set expects KEY=VALUE, got {item!r}")
        key, value = (part.strip() for part in item.split("=", 1))
        settings[key] = _parse_setting(key, value)
    if inv.runs is not None:
        settings["num_runs"] = inv.runs
    if inv.seed is not None:
        settings["base_seed"] = inv.seed
    if inv.threads is not None:
        settings["threads"] = inv.threads
    return settings


def _build_config(inv: CliInvocation) -> tuple:
    settings = resolve_settings(inv)
    extras = {k: settings.pop(k) for k in list(settings) if k in EXTRA_KEYS}
    if inv.subcommand == "tracking":
        # tracking_config places the switch at the configured midpoint
        cfg = tracking_config(zeta_first=extras.get("zeta_first", 0.08),
                              zeta_second=extras.get("zeta_second", 0.05),
                              **settings)
    else:
        cfg = sweep_config(**settings)
        if "zeta" in extras:
            cfg = replace(cfg, zeta_schedule=((0, extras["zeta"]),))
    cfg.validate()
    return cfg, extras


def _output_dir(inv: CliInvocation) -> str:
    out = inv.output_dir or os.environ.get(OUTPUT_DIR_ENV) or "."
    os.makedirs(out, exist_ok=True)
    return out


def _cmd_sweep(inv: CliInvocation) -> int:
    cfg, extras = _build_config(inv)
    counts = inv.blocks or DEFAULT_BLOCK_COUNTS
    window = extras.get("window_fraction", 0.1)
    qf = cfg.expansion().Qf
    for c in counts:
        if c < 1 or qf % c != 0:
            raise UsageError(f"block count {c} does not divide Qf={qf}")
    sweep = run_block_sweep(cfg, counts, window_fraction=window)
    path = os.path.join(_output_dir(inv), "sweep.csv")
    write_sweep_table(path, sweep)
    print(f"wrote {path}")
    print("L_blocks  emse_db_combined")
    for c in counts:
        print(f"{c:8d}  {sweep.combined_ss[c]:16.3f}")
    for algo, val in sweep.baseline_ss.items():
        print(f"baseline {algo}: {val:.3f} dB")
    return 0


def _cmd_tracking(inv: CliInvocation) -> int:
    cfg, extras = _build_config(inv)
    result = run_tracking(cfg)
    out = _output_dir(inv)
    emse_path = os.path.join(out, "tracking_emse.csv")
    write_learning_curves(emse_path, result.traces, cfg)
    print(f"wrote {emse_path}")
    if result.lambda_mean is not None:
        lam_path = os.path.join(out, "tracking_lambda.csv")
        write_mixing_trace(lam_path, result.lambda_mean, cfg)
        print(f"wrote {lam_path}")
    window = extras.get("window_fraction", 0.1)
    for algo, trace in result.traces.items():
        print(f"steady-state {algo}: {steady_state_emse(trace, window):.3f} dB")
    return 0


def _cmd_single(inv: CliInvocation) -> int:
    cfg, extras = _build_config(inv)
    result = run_ensemble(cfg)
    path = os.path.join(_output_dir(inv), "learning_curve.csv")
    write_learning_curves(path, result.traces, cfg)
    print(f"wrote {path}")
    window = extras.get("window_fraction", 0.1)
    for algo, trace in result.traces.items():
        print(f"steady-state {algo}: {steady_state_emse(trace, window):.3f} dB")
    return 0


def run(inv: CliInvocation) -> int:
    """Dispatch a parsed invocation; maps error classes to exit codes."""
    try:
        if inv.subcommand == "selftest":
            return 0 if run_selftest() else 1
        if inv.subcommand == "sweep":
            return _cmd_sweep(inv)
        if inv.subcommand == "tracking":
            return _cmd_tracking(inv)
        if inv.subcommand == "single":
            return _cmd_single(inv)
        raise UsageError(f"unknown subcommand {inv.subcommand!r}")
    except (UsageError, ConfigurationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 1


def main(argv=None) -> int:
    try:
        inv = parse_invocation(argv)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return run(inv)


if __name__ == "__main__":
    sys.exit(main())
