"""Command-line interface.

Subcommands::

    irsmin run          optimize one configuration, print outage per method
    irsmin sweep        sweep N, gamma or M and write a CSV
    irsmin gradcheck    finite-difference validation of both gradients
    irsmin gen-samples  write a channel sample set to disk

Every configuration field is exposed as a flag; ``--config FILE`` loads the
same keys from a flat ``key = value`` file (``#`` starts a comment, hyphens
and underscores are interchangeable).  Flags given on the command line
override the file; the file overrides the built-in full-scale defaults.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from irsmin import _kernels
from irsmin.channel import Position3D, ScenarioGeometry, draw_user_position, generate_sample_set
from irsmin.experiments import (
    METHODS,
    SWEEP_PARAMS,
    ExperimentConfig,
    derive_seed,
    emit_csv,
    run_realization,
    run_sweep,
)
from irsmin.sampleio import save_sample_set
from irsmin.solver import SolverConfig, gradient_check

GRADCHECK_TOL = 1e-6


class ConfigError(Exception):
    """A problem with flags or the config file; exits with status 2."""


def _parse_bool(text: str) -> bool:
    val = text.strip().lower()
    if val in ("1", "true", "yes", "on"):
        return True
    if val in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def _parse_vec3(text: str) -> tuple[float, float, float]:
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 3:
        raise ValueError(f"expected 'x,y,z', got {text!r}")
    return tuple(float(p) for p in parts)


def _parse_floats(text: str) -> tuple[float, ...]:
    items = [p.strip() for p in text.split(",") if p.strip()]
    return tuple(float(p) for p in items)


def _parse_methods(text: str) -> tuple[str, ...]:
    items = tuple(p.strip() for p in text.split(",") if p.strip())
    for item in items:
        if item not in METHODS:
            raise ValueError(f"unknown method {item!r} (choices: {', '.join(METHODS)})")
    return items


def _parse_scale(text: str):
    if text.strip().lower() == "auto":
        return None
    return float(text)


# key -> (parser, default, help); keys double as config-file keys and,
# hyphenated, as flag names.
OPTIONS = {
    "m": (int, 15, "BS antennas"),
    "n": (int, 50, "IRS elements (0 disables the IRS)"),
    "gamma": (float, 3.0, "SNR threshold"),
    "power_dbm": (float, 30.0, "max transmit power in dBm"),
    "noise_dbm": (float, -80.0, "noise power in dBm"),
    "t_train": (int, 250, "training channel samples per realization"),
    "t_eval": (int, 1000, "evaluation channel samples per realization"),
    "realizations": (int, 60, "Monte Carlo realizations"),
    "lw": (float, 1.0, "initial beamformer step size"),
    "lv": (float, 0.1, "initial phase-shift step size"),
    "decay": (float, 0.99, "step-size decay factor"),
    "outer_iters": (int, 1000, "outer (alternation) iterations"),
    "inner_iters": (int, 5000, "max inner SGD steps per block"),
    "epsilon": (float, 1e-5, "relative objective change that stops an inner block"),
    "margin_scale": (_parse_scale, None, "sigmoid argument scale; 'auto' = 1/noise power"),
    "decay_scope": (str, "outer", "apply decay per 'outer' iteration or per 'inner' step"),
    "methods": (_parse_methods, METHODS, "comma-separated subset of: " + ",".join(METHODS)),
    "seed": (int, 0, "master seed"),
    "workers": (int, 1, "concurrent realizations"),
    "eval_on_train": (_parse_bool, False, "evaluate outage on the training set"),
    "bs_pos": (_parse_vec3, (0.0, 0.0, 10.0), "BS position x,y,z in meters"),
    "irs_pos": (_parse_vec3, (15.0, 5.0, 5.0), "IRS position x,y,z in meters"),
    "user_center": (_parse_vec3, (18.0, 1.0, 0.0), "user region center x,y,z"),
    "user_side": (float, 2.0, "user region side length in meters"),
    "beta_direct": (float, 2.5, "BS-user path-loss exponent"),
    "beta_bs_irs": (float, 2.1, "BS-IRS path-loss exponent"),
    "beta_irs_user": (float, 2.2, "IRS-user path-loss exponent"),
    "param": (str, None, "sweep parameter: " + ", ".join(SWEEP_PARAMS)),
    "values": (_parse_floats, None, "comma-separated sweep values"),
    "out": (str, None, "output file path"),
}


def _add_option_flags(parser: argparse.ArgumentParser, keys) -> None:
    for key in keys:
        caster, default, help_text = OPTIONS[key]
        flag = "--" + key.replace("_", "-")
        if default is not None:
            help_text = f"{help_text} (default: {default})"
        parser.add_argument(flag, dest=key, type=str, default=None, help=help_text)


_CONFIG_KEYS = [k for k in OPTIONS if k not in ("param", "values", "out")]
_SWEEP_KEYS = list(OPTIONS)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="irsmin",
        description="Outage minimization for an IRS-aided MISO downlink.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="optimize one configuration, print outage per method")
    sweep_p = sub.add_parser("sweep", help="sweep a parameter and write a CSV")
    grad_p = sub.add_parser("gradcheck", help="finite-difference gradient validation")
    gen_p = sub.add_parser("gen-samples", help="write a channel sample set to disk")

    for p, keys in (
        (run_p, _CONFIG_KEYS),
        (sweep_p, _SWEEP_KEYS),
        (gen_p, _CONFIG_KEYS + ["out"]),
    ):
        p.add_argument("--config", default=None, help="flat key = value config file")
        _add_option_flags(p, keys)
    grad_p.add_argument("--seed", dest="seed", type=str, default=None, help="random seed")
    grad_p.add_argument(
        "--instances", type=int, default=10, help="random instances per problem size"
    )
    return parser


def _read_config_file(path: str) -> dict:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip().replace("-", "_")
        if key not in OPTIONS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        values[key] = value.strip()
    return values


def _merge_options(args: argparse.Namespace, keys) -> dict:
    """Resolve key -> typed value with precedence flag > config file > default."""
    file_values = _read_config_file(args.config) if getattr(args, "config", None) else {}
    resolved = {}
    for key in keys:
        caster, default, _ = OPTIONS[key]
        raw = getattr(args, key, None)
        if raw is None:
            raw = file_values.get(key)
        if raw is None:
            resolved[key] = default
            continue
        try:
            resolved[key] = caster(raw)
        except ValueError as exc:
            raise ConfigError(f"invalid value for {key}: {exc}") from exc
    return resolved


def _geometry_from(opts: dict) -> ScenarioGeometry:
    return ScenarioGeometry(
        bs_position=Position3D(*opts["bs_pos"]),
        irs_position=Position3D(*opts["irs_pos"]),
        user_region_center=Position3D(*opts["user_center"]),
        user_region_side=opts["user_side"],
        beta_direct=opts["beta_direct"],
        beta_bs_irs=opts["beta_bs_irs"],
        beta_irs_user=opts["beta_irs_user"],
    )


def _experiment_config(opts: dict, sweep_param=None, sweep_values=None) -> ExperimentConfig:
    solver = SolverConfig(
        l_w=opts["lw"],
        l_v=opts["lv"],
        decay=opts["decay"],
        outer_iters=opts["outer_iters"],
        inner_iters=opts["inner_iters"],
        epsilon=opts["epsilon"],
        margin_scale=opts["margin_scale"],
        decay_scope=opts["decay_scope"],
    )
    try:
        return ExperimentConfig(
            geometry=_geometry_from(opts),
            m=opts["m"],
            n=opts["n"],
            gamma=opts["gamma"],
            p_dbm=opts["power_dbm"],
            noise_dbm=opts["noise_dbm"],
            t_train=opts["t_train"],
            t_eval=opts["t_eval"],
            realizations=opts["realizations"],
            solver=solver,
            methods=opts["methods"],
            sweep_param=sweep_param,
            sweep_values=sweep_values,
            master_seed=opts["seed"],
            eval_on_train=opts["eval_on_train"],
            workers=opts["workers"],
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _cmd_run(args) -> int:
    cfg = _experiment_config(_merge_options(args, _CONFIG_KEYS))
    print(f"kernel backend: {_kernels.backend_name()}")
    for method in cfg.methods:
        if method == "random_phase" and cfg.n == 0:
            print(f"{method}: skipped (n = 0)")
            continue
        outages = [
            run_realization(cfg, method, derive_seed(cfg.master_seed, "realization", r))
            for r in range(cfg.realizations)
        ]
        mean = float(np.mean(outages))
        std = float(np.std(outages, ddof=1)) if len(outages) > 1 else 0.0
        print(f"{method}: outage {mean:.6g} +/- {std:.6g} over {cfg.realizations} realizations")
    return 0


def _cmd_sweep(args) -> int:
    opts = _merge_options(args, _SWEEP_KEYS)
    if opts["param"] is None or opts["values"] is None:
        raise ConfigError("sweep requires --param and --values")
    out = opts["out"] or "sweep.csv"
    cfg = _experiment_config(opts, sweep_param=opts["param"], sweep_values=opts["values"])
    result = run_sweep(cfg)
    emit_csv(result, out)
    print(f"wrote {len(result.rows)} rows to {out}")
    return 0


def _cmd_gradcheck(args) -> int:
    seed = int(args.seed) if args.seed is not None else 0
    err = gradient_check(instances=args.instances, seed=seed)
    print(f"max relative gradient error: {err:.3e}")
    if err >= GRADCHECK_TOL:
        print(f"FAIL: error above {GRADCHECK_TOL:g}", file=sys.stderr)
        return 1
    return 0


def _cmd_gen_samples(args) -> int:
    opts = _merge_options(args, _CONFIG_KEYS + ["out"])
    if opts["out"] is None:
        raise ConfigError("gen-samples requires --out")
    cfg = _experiment_config(opts)
    user_rng = np.random.default_rng(derive_seed(cfg.master_seed, "user", 0))
    user_pos = draw_user_position(cfg.geometry, user_rng)
    sset = generate_sample_set(
        cfg.geometry, cfg.m, cfg.n, cfg.t_train, user_pos, derive_seed(cfg.master_seed, "train", 0)
    )
    save_sample_set(sset, opts["out"])
    print(f"wrote {sset.t} samples (m={sset.m}, n={sset.n}) to {opts['out']}")
    return 0


_COMMANDS = {
    "run": _cmd_run,
    "sweep": _cmd_sweep,
    "gradcheck": _cmd_gradcheck,
    "gen-samples": _cmd_gen_samples,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
