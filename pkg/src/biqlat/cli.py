"""Command-line front end: field inspection, splitting, BER sweeps, secrecy.

Exit codes: 0 success, 2 usage or domain error, 3 internal invariant
violation.  Every file-producing subcommand writes a JSON manifest next to
its output that echoes the full parameter set and master seed.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from . import __version__
from .errors import BiqlatError, ConfigFileError
from .ideals_crt import Splitting, build_crt_context, quadratic_splitting, splits_completely
from .number_field import build_field
from .secrecy_analysis import SecrecyParams, leakage_bound, secrecy_rate_bound, sigma_eq
from .presets import build_sweep_setup
from .wiretap_channel import (
    MODE_IDEALIZED,
    MODE_TRUE_ZF,
    matrix_from_json,
    matrix_to_json,
    run_ber_sweep,
)

SCHEMA_DIR = Path(__file__).parent / "schemas"


def canonical_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_field_info(args) -> int:
    fld = build_field(args.a, args.b)
    report = fld.to_dict()
    report["embedding_matrix"] = [[float(x) for x in row] for row in fld.embedding_matrix]
    sys.stdout.write(canonical_json(report))
    return 0


def cmd_split(args) -> int:
    fld = build_field(args.a, args.b)
    classes = {
        "a": quadratic_splitting(fld.a, args.p).value,
        "b": quadratic_splitting(fld.b, args.p).value,
        "k": quadratic_splitting(fld.k, args.p).value,
    }
    complete = splits_completely(fld, args.p)
    report = {
        "schema_version": 1,
        "a": fld.a,
        "b": fld.b,
        "p": args.p,
        "subfields": classes,
        "completely_split": complete,
        "crt": None,
        "modulus_norm": None,
    }
    if complete:
        ctx = build_crt_context(fld, args.p)
        report["crt"] = ctx.to_dict()
        report["modulus_norm"] = ctx.modulus_norm
    sys.stdout.write(canonical_json(report))
    return 0


_CONFIG_KEYS = {
    "a": int, "b": int, "p": int, "n": int, "seed": int, "k_e": int,
    "snr_min": float, "snr_max": float, "snr_step": float,
    "target_errors": int, "max_frames": int, "threads": int,
    "eve_noise_var": float, "mode": str, "out": str, "max_iters": int,
}

_SIM_DEFAULTS = {
    "a": 17, "b": 33, "p": 2, "n": 800, "seed": 1, "k_e": 0,
    "snr_min": 0.0, "snr_max": 24.0, "snr_step": 3.0,
    "target_errors": 800, "max_frames": 20_000, "threads": 1,
    "eve_noise_var": 6.0, "mode": MODE_IDEALIZED, "out": "ber_sweep.csv",
    "max_iters": 50,
}


def parse_config_file(path: str) -> dict:
    """key = value lines with # comments; unknown keys are rejected."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigFileError(f"{path}:{lineno}: expected 'key = value'")
        key, _, val = line.partition("=")
        key, val = key.strip(), val.strip()
        if key not in _CONFIG_KEYS:
            raise ConfigFileError(f"{path}:{lineno}: unknown key {key!r}")
        try:
            out[key] = _CONFIG_KEYS[key](val)
        except ValueError as exc:
            raise ConfigFileError(f"{path}:{lineno}: bad value for {key}: {val!r}") from exc
    return out


def cmd_simulate(args) -> int:
    params = dict(_SIM_DEFAULTS)
    if args.config:
        params.update(parse_config_file(args.config))
    for key in _CONFIG_KEYS:
        flag = getattr(args, key, None)
        if flag is not None:
            params[key] = flag

    chan, cfg = build_sweep_setup(
        n=params["n"], seed=params["seed"], k_e=params["k_e"],
        eve_noise_var=params["eve_noise_var"], mode=params["mode"],
        a=params["a"], b=params["b"], p=params["p"],
    )
    steps = int(round((params["snr_max"] - params["snr_min"]) / params["snr_step"]))
    grid = [params["snr_min"] + i * params["snr_step"] for i in range(steps + 1)]
    result = run_ber_sweep(
        chan, cfg, grid,
        target_bob_errors=params["target_errors"],
        max_frames=params["max_frames"],
        master_seed=params["seed"],
        threads=params["threads"],
        max_iters=params["max_iters"],
    )
    out_path = Path(params["out"])
    out_path.write_text(result.to_csv())
    manifest = {
        "artifact_version": __version__,
        "subcommand": "simulate",
        "master_seed": params["seed"],
        "parameters": {k: params[k] for k in sorted(params)},
        "snr_grid_db": grid,
        "channel": {
            "h_b": matrix_to_json(chan.h_b),
            "h_e": matrix_to_json(chan.h_e),
            "sigma_b": chan.sigma_b,
            "sigma_e": chan.sigma_e,
            "mode": chan.mode,
        },
        "outputs": [str(out_path)],
    }
    Path(str(out_path) + ".manifest.json").write_text(canonical_json(manifest))
    sys.stdout.write(result.to_csv())
    return 0


def cmd_secrecy(args) -> int:
    params = SecrecyParams(
        sigma_s=args.sigma_s, alpha=args.alpha, n_a=args.n_a,
        c_b=args.c_b, c_e=args.c_e, rate=args.rate,
    )
    bound = secrecy_rate_bound(params)
    report = {
        "schema_version": 1,
        "c_b": args.c_b,
        "c_e": args.c_e,
        "alpha": args.alpha,
        "n_a": args.n_a,
        "sigma_s": args.sigma_s,
        "sigma_eq": sigma_eq(params),
        "rate_bound_nats": bound,
        "rate_bound_bits": bound / math.log(2.0),
    }
    if args.eps is not None:
        if args.n is None or args.rate is None:
            raise BiqlatError("leakage bound needs --eps together with --n and --rate")
        report["eps"] = args.eps
        report["n"] = args.n
        report["rate"] = args.rate
        report["leakage_bits"] = leakage_bound(args.n, args.eps, args.rate)
    sys.stdout.write(canonical_json(report))
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="biqlat",
        description="Multilevel lattice codes over biquadratic fields: "
                    "construction, simulation, and secrecy calculators.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_field = sub.add_parser("field-info", help="describe Q(sqrt a, sqrt b) and O_K")
    p_field.add_argument("--a", type=int, required=True)
    p_field.add_argument("--b", type=int, required=True)
    p_field.set_defaults(func=cmd_field_info)

    p_split = sub.add_parser("split", help="classify a prime and list the CRT data")
    p_split.add_argument("--a", type=int, required=True)
    p_split.add_argument("--b", type=int, required=True)
    p_split.add_argument("--p", type=int, required=True)
    p_split.set_defaults(func=cmd_split)

    p_sim = sub.add_parser("simulate", help="run the Monte Carlo BER sweep")
    p_sim.add_argument("--config", type=str, default=None,
                       help="key = value config file; flags override it")
    p_sim.add_argument("--a", type=int)
    p_sim.add_argument("--b", type=int)
    p_sim.add_argument("--p", type=int)
    p_sim.add_argument("--n", type=int)
    p_sim.add_argument("--seed", type=int)
    p_sim.add_argument("--k-e", dest="k_e", type=int)
    p_sim.add_argument("--snr-min", dest="snr_min", type=float)
    p_sim.add_argument("--snr-max", dest="snr_max", type=float)
    p_sim.add_argument("--snr-step", dest="snr_step", type=float)
    p_sim.add_argument("--target-errors", dest="target_errors", type=int)
    p_sim.add_argument("--max-frames", dest="max_frames", type=int)
    p_sim.add_argument("--max-iters", dest="max_iters", type=int)
    p_sim.add_argument("--threads", type=int)
    p_sim.add_argument("--eve-noise-var", dest="eve_noise_var", type=float)
    p_sim.add_argument("--mode", choices=[MODE_IDEALIZED, MODE_TRUE_ZF])
    p_sim.add_argument("--out", type=str)
    p_sim.set_defaults(func=cmd_simulate)

    p_sec = sub.add_parser("secrecy", help="closed-form secrecy calculators")
    p_sec.add_argument("--sigma-s", dest="sigma_s", type=float, default=1.0)
    p_sec.add_argument("--alpha", type=float, default=1.0)
    p_sec.add_argument("--n-a", dest="n_a", type=int, default=2)
    p_sec.add_argument("--c-b", dest="c_b", type=float, default=0.0)
    p_sec.add_argument("--c-e", dest="c_e", type=float, default=0.0)
    p_sec.add_argument("--rate", type=float, default=None, help="rate in nats/use")
    p_sec.add_argument("--eps", type=float, default=None)
    p_sec.add_argument("--n", type=int, default=None)
    p_sec.set_defaults(func=cmd_secrecy)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except BiqlatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SystemExit as exc:          # argparse uses exit code 2 for usage errors
        return int(exc.code or 0)
    except Exception as exc:           # noqa: BLE001 - invariant violations map to 3
        print(f"internal error: {exc!r}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
