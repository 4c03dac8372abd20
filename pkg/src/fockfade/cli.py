"""Command-line frontend: sweeps, optimization, thresholds, channel info.

Writes CSV tables (sweeps) or JSON scalars, each accompanied by a
``<out>.manifest.json`` recording the fully resolved configuration so a
run can be reproduced byte-identically.  Exit codes: 0 success, 2 config
or usage error, 3 numerical failure (trace/cutoff).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
import time

from . import __version__, experiments, fading
from .errors import (
    ConstructionError,
    DomainError,
    FockfadeError,
    NoSolutionError,
    TruncationError,
)
from .experiments import Cutoffs, SweepConfig, default_cutoffs
from .states import FAMILIES, StateRecipe, T_FAMILIES, squeezing_from_db

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

_SETTINGS = {"asym": "asymmetric", "asymmetric": "asymmetric",
             "sym": "symmetric", "symmetric": "symmetric"}


class ConfigError(Exception):
    pass


def parse_losses(spec: str) -> tuple[float, ...]:
    """Parse a loss grid 'min:max:count' in dB (linear spacing)."""
    parts = spec.split(":")
    if len(parts) != 3:
        raise ConfigError(f"loss grid must be min:max:count, got {spec!r}")
    try:
        lo, hi = float(parts[0]), float(parts[1])
        count = int(parts[2])
    except ValueError as exc:
        raise ConfigError(f"bad loss grid {spec!r}: {exc}") from None
    if count < 1 or hi < lo or (count > 1 and hi == lo):
        raise ConfigError(f"bad loss grid {spec!r}")
    if count == 1:
        return (lo,)
    step = (hi - lo) / (count - 1)
    return tuple(lo + i * step for i in range(count))


def parse_states(spec: str) -> tuple[str, ...]:
    names = tuple(s.strip() for s in spec.split(",") if s.strip())
    if not names:
        raise ConfigError("empty state list")
    for name in names:
        base = "noon" if name.startswith("noon") else name
        if base not in FAMILIES:
            raise ConfigError(f"unknown state family {name!r}")
    return names


def read_config_file(path: str) -> dict[str, str]:
    """Flat key=value config file; '#' starts a comment."""
    out: dict[str, str] = {}
    try:
        with open(path) as fh:
            for lineno, raw in enumerate(fh, 1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ConfigError(f"{path}:{lineno}: expected key=value")
                key, val = line.split("=", 1)
                out[key.strip().replace("-", "_")] = val.strip()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from None
    return out


def _atomic_write(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".fockfade-")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _g9(x: float) -> str:
    return f"{x:.9g}"


def write_manifest(out_base: str, subcommand: str, resolved: dict,
                   extra: dict | None = None, elapsed: float = 0.0) -> None:
    manifest = {
        "tool": "fockfade",
        "version": __version__,
        "subcommand": subcommand,
        "config": resolved,
        "wall_clock_s": round(elapsed, 3),
    }
    if extra:
        manifest.update(extra)
    _atomic_write(out_base + ".manifest.json",
                  json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fockfade",
        description="Entanglement transfer of Gaussian and non-Gaussian "
                    "states over fading bosonic channels.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def add_common(p):
        p.add_argument("--config", help="flat key=value config file")
        p.add_argument("-o", "--out", default="result", help="output basename")

    p = sub.add_parser("sweep", help="E_LN / R_E versus mean channel loss")
    add_common(p)
    p.add_argument("--setting", choices=sorted(_SETTINGS), default="asym")
    p.add_argument("--mode", choices=["ensemble", "measured"], default="ensemble")
    p.add_argument("--metric", choices=["eln", "rate", "both"], default="both")
    p.add_argument("--squeezing-db", type=float, default=3.0,
                   help="source TMSV squeezing in dB")
    p.add_argument("--states", default="tmsv",
                   help="comma list, e.g. tmsv,pss_s,pas_b,noon")
    p.add_argument("--losses", default="5:30:6", help="mean loss grid min:max:count (dB)")
    p.add_argument("--t", type=float, default=experiments.DEFAULT_T,
                   help="beam-splitter transmissivity for heralded families")
    p.add_argument("--noon-n", type=int, default=2)
    p.add_argument("--calibrate-eln", type=float, default=None,
                   help="instead of a common source, calibrate every state "
                        "to this initial E_LN (ebits)")
    p.add_argument("--chi", type=float, default=None,
                   help="excess noise on every transmitted mode")
    p.add_argument("--chi1", type=float, default=None)
    p.add_argument("--chi2", type=float, default=None)
    p.add_argument("--f-max", type=int, default=None)
    p.add_argument("--ell-max", type=int, default=None)
    p.add_argument("--quad-order", type=int, default=fading.DEFAULT_ORDER)
    p.add_argument("--sym-quad-order", type=int, default=48)

    p = sub.add_parser("optimize-t", help="optimize the heralding transmissivity")
    add_common(p)
    p.add_argument("--family", required=True, choices=sorted(T_FAMILIES))
    p.add_argument("--squeezing-db", type=float, default=3.0)
    p.add_argument("--objective", choices=["initial_eln", "initial_rate", "rate_at_loss"],
                   default="initial_rate")
    p.add_argument("--loss-db", type=float, default=None)
    p.add_argument("--setting", choices=sorted(_SETTINGS), default="asym")
    p.add_argument("--chi1", type=float, default=None)
    p.add_argument("--chi2", type=float, default=None)

    p = sub.add_parser("threshold", help="memory/post-selection feedback threshold")
    add_common(p)
    p.add_argument("--family", required=True, choices=sorted(T_FAMILIES))
    p.add_argument("--squeezing-db", type=float, default=3.0)
    p.add_argument("--t", type=float, default=experiments.DEFAULT_T)
    p.add_argument("--loss-db", type=float, required=True)
    p.add_argument("--chi2", type=float, default=0.0)

    p = sub.add_parser("compare-bell",
                       help="rate ratio of TMSV transfer to Bell-pair transfer")
    add_common(p)
    p.add_argument("--squeezing-db", type=float, default=3.0)
    p.add_argument("--loss-db", type=float, required=True)
    p.add_argument("--chi2", type=float, default=experiments.DEFAULT_CHI)

    p = sub.add_parser("channel-info", help="fading channel solved for a mean loss")
    add_common(p)
    p.add_argument("--target-loss-db", type=float, required=True)
    p.add_argument("--beta-aperture", type=float, default=1.0)
    p.add_argument("--spot-ratio", type=float, default=fading.DEFAULT_SPOT_RATIO)

    return parser


def apply_config_file(parser: argparse.ArgumentParser, argv: list[str]) -> argparse.Namespace:
    """Resolve precedence: explicit flags > config file > parser defaults."""
    args = parser.parse_args(argv)
    if not getattr(args, "config", None):
        return args
    overrides = read_config_file(args.config)
    known = vars(args)
    for key, val in overrides.items():
        if key not in known:
            raise ConfigError(f"config key {key!r} is not a flag of this subcommand")
    # re-parse so command-line flags win over the file values
    sub_parser = None
    for action in parser._subparsers._group_actions:  # noqa: SLF001
        sub_parser = action.choices[args.subcommand]
    defaults = {}
    for key, val in overrides.items():
        current = known[key]
        if isinstance(current, bool):
            defaults[key] = val.lower() in ("1", "true", "yes")
        elif isinstance(current, int) and not isinstance(current, bool):
            defaults[key] = int(val)
        elif isinstance(current, float):
            defaults[key] = float(val)
        else:
            defaults[key] = val
    sub_parser.set_defaults(**defaults)
    return parser.parse_args(argv)


def _resolve_chis(args, setting: str) -> tuple[float, float]:
    if getattr(args, "chi", None) is not None:
        chi1 = chi2 = args.chi
    else:
        chi1 = args.chi1
        chi2 = args.chi2
    if chi2 is None:
        chi2 = experiments.DEFAULT_CHI
    if chi1 is None:
        chi1 = chi2 if setting == "symmetric" else 0.0
    return chi1, chi2


def cmd_sweep(args) -> int:
    setting = _SETTINGS[args.setting]
    chi1, chi2 = _resolve_chis(args, setting)
    losses = parse_losses(args.losses)
    names = parse_states(args.states)
    families = tuple("noon" if n.startswith("noon") else n for n in names)
    if args.calibrate_eln is not None:
        states = experiments.calibrated_recipes(
            args.calibrate_eln, families, T=args.t, noon_n=args.noon_n)
    else:
        states = experiments.operational_recipes(
            args.squeezing_db, families, T=args.t, noon_n=args.noon_n)
    cuts = default_cutoffs(args.squeezing_db)
    if args.f_max is not None or args.ell_max is not None:
        cuts = Cutoffs(args.f_max or cuts.f_max, args.ell_max or cuts.ell_max)
    cfg = SweepConfig(
        setting=setting, averaging=args.mode, states=states,
        loss_grid_db=losses, chi1=chi1, chi2=chi2, cutoffs=cuts,
        quad_order=args.quad_order, sym_quad_order=args.sym_quad_order,
        metric=args.metric)

    start = time.perf_counter()
    result = experiments.run_sweep(cfg)
    elapsed = time.perf_counter() - start

    lines = ["loss_db,state,E_LN,P_c,R_E,trace_deficit"]
    for r in result.rows:
        lines.append(",".join(
            [_g9(r.loss_db), r.state, _g9(r.eln), _g9(r.p_c), _g9(r.rate),
             _g9(r.trace_deficit)]))
    _atomic_write(args.out + ".csv", "\n".join(lines) + "\n")
    resolved = {
        "setting": setting, "mode": args.mode, "metric": args.metric,
        "squeezing_db": args.squeezing_db, "calibrate_eln": args.calibrate_eln,
        "transmissivity": args.t, "noon_n": args.noon_n,
        "states": list(names), "losses": list(losses),
        "chi1": chi1, "chi2": chi2,
        "f_max": cuts.f_max, "ell_max": cuts.ell_max,
        "quad_order": args.quad_order, "sym_quad_order": args.sym_quad_order,
        "threads": int(os.environ.get("FOCKFADE_THREADS", "1")),
    }
    diagnostics = {
        "rows": len(result.rows),
        "max_trace_deficit": max((r.trace_deficit for r in result.rows), default=0.0),
    }
    write_manifest(args.out, "sweep", resolved, {"diagnostics": diagnostics}, elapsed)
    return EXIT_OK


def cmd_optimize_t(args) -> int:
    setting = _SETTINGS[args.setting]
    chi1, chi2 = _resolve_chis(args, setting)
    start = time.perf_counter()
    res = experiments.optimize_T(
        args.family, args.squeezing_db, objective=args.objective,
        loss_db=args.loss_db, setting=setting, chi1=chi1, chi2=chi2)
    elapsed = time.perf_counter() - start
    payload = {"family": args.family, "T_star": res.T, "objective": res.objective,
               "value": res.value, "P_c": res.p_c,
               "p_c_vanishes_at_T_star": res.p_c < 1e-12}
    _atomic_write(args.out + ".json", json.dumps(payload, indent=2) + "\n")
    resolved = {"family": args.family, "squeezing_db": args.squeezing_db,
                "objective": args.objective, "loss_db": args.loss_db,
                "setting": setting, "chi1": chi1, "chi2": chi2}
    write_manifest(args.out, "optimize-t", resolved, elapsed=elapsed)
    return EXIT_OK


def cmd_threshold(args) -> int:
    sq = squeezing_from_db(args.squeezing_db)
    ng = StateRecipe(family=args.family, squeezing=sq, T=args.t)
    g = StateRecipe(family="tmsv", squeezing=sq)
    ch = fading.solve_sigma_for_loss(args.loss_db)
    start = time.perf_counter()
    res = experiments.memory_threshold(ng, g, ch, chi2=args.chi2)
    elapsed = time.perf_counter() - start
    payload = {"family": args.family, "loss_db": args.loss_db,
               "eta_th": res.eta_th, "boundary_root": res.boundary_root,
               "mu": res.mu, "memory_factor": res.memory_factor}
    _atomic_write(args.out + ".json", json.dumps(payload, indent=2) + "\n")
    resolved = {"family": args.family, "squeezing_db": args.squeezing_db,
                "transmissivity": args.t, "loss_db": args.loss_db,
                "chi2": args.chi2, "sigma_b": ch.sigma_b}
    write_manifest(args.out, "threshold", resolved, elapsed=elapsed)
    return EXIT_OK


def cmd_compare_bell(args) -> int:
    ch = fading.solve_sigma_for_loss(args.loss_db)
    start = time.perf_counter()
    ratio = experiments.single_photon_ratio(args.squeezing_db, ch, chi2=args.chi2)
    elapsed = time.perf_counter() - start
    payload = {"squeezing_db": args.squeezing_db, "loss_db": args.loss_db,
               "chi2": args.chi2, "rate_ratio": ratio}
    _atomic_write(args.out + ".json", json.dumps(payload, indent=2) + "\n")
    resolved = dict(payload, sigma_b=ch.sigma_b)
    write_manifest(args.out, "compare-bell", resolved, elapsed=elapsed)
    return EXIT_OK


def cmd_channel_info(args) -> int:
    start = time.perf_counter()
    ch = fading.solve_sigma_for_loss(
        args.target_loss_db, args.beta_aperture, args.spot_ratio)
    elapsed = time.perf_counter() - start
    payload = {
        "target_loss_db": args.target_loss_db,
        "sigma_b": ch.sigma_b,
        "eta0": ch.eta0,
        "gamma_s": ch.gamma_s,
        "L": ch.L_scale,
        "mean_T": fading.mean_intensity_transmittance(ch),
        "mean_loss_db": fading.mean_loss_db(ch),
    }
    _atomic_write(args.out + ".json", json.dumps(payload, indent=2) + "\n")
    resolved = {"target_loss_db": args.target_loss_db,
                "beta_aperture": args.beta_aperture,
                "spot_ratio": args.spot_ratio}
    write_manifest(args.out, "channel-info", resolved, elapsed=elapsed)
    return EXIT_OK


_DISPATCH = {
    "sweep": cmd_sweep,
    "optimize-t": cmd_optimize_t,
    "threshold": cmd_threshold,
    "compare-bell": cmd_compare_bell,
    "channel-info": cmd_channel_info,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = apply_config_file(parser, sys.argv[1:] if argv is None else list(argv))
    except ConfigError as exc:
        print(f"fockfade: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return _DISPATCH[args.subcommand](args)
    except ConfigError as exc:
        print(f"fockfade: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except TruncationError as exc:
        print(f"fockfade: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ConstructionError, DomainError, NoSolutionError) as exc:
        print(f"fockfade: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FockfadeError as exc:
        print(f"fockfade: error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
