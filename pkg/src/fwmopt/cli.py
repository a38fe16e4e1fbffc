"""Command-line reproduction of the conversion-efficiency figures and GA runs.

Every command writes CSV files (``#``-prefixed provenance lines, then a
header row) and/or JSON into ``--out``. Exit codes: 0 success, 2 config
error, 3 solver error.
"""

from __future__ import annotations

import argparse
import copy
import csv
import functools
import json
import logging
import math
import sys
from pathlib import Path

import jsonschema
import numpy as np

from .analytic import ce_closed_form, optimal_constants
from .core import FWMError, MediumParams, validate_params
from .optimizer import AverageOverGrid, CostSpec, GAConfig, GenomeSpec, SingleKappa, run_ga
from .propagation import Backend, SolverOptions, ce_sweep, propagate
from .waveforms import (
    FIG3_FOURIER,
    FIG4_BERNSTEIN,
    FIG4_FOURIER,
    ConstantAmplitudes,
    ConstantDetuning,
    ConstantRatio,
    LinearRamp,
    coupling_at,
    sample_waveform,
    waveform_from_dict,
)

logger = logging.getLogger("fwmopt")

EXIT_CONFIG = 2
EXIT_SOLVER = 3

_NUM = {"type": "number"}
CONFIG_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "medium": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"alpha": _NUM, "gamma": _NUM, "omega_p0": _NUM},
        },
        "coupling": {
            "type": "object",
            "properties": {
                "type": {"enum": ["linear_ramp", "constant_ratio", "constant_amplitudes"]},
                "omega_c0": _NUM, "omega_d0": _NUM, "theta": _NUM,
                "omega_c": _NUM, "omega_d": _NUM,
            },
            "required": ["type"],
            "additionalProperties": False,
        },
        "detuning": {
            "type": "object",
            "properties": {
                "family": {"enum": ["constant", "fourier", "bernstein"]},
                "coefficients": {"type": "array", "items": _NUM, "minItems": 1},
            },
            "required": ["family", "coefficients"],
            "additionalProperties": False,
        },
        "kappa": _NUM,
        "kappa_grid": {"type": "array", "items": _NUM, "minItems": 1},
        "solver": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "steps": {"type": "integer", "minimum": 16},
                "backend": {"enum": [b.value for b in Backend]},
                "richardson_check": {"type": "boolean"},
            },
        },
        "ga": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "family": {"enum": ["fourier", "bernstein"]},
                "size": {"type": "integer", "minimum": 1},
                "bound": {"type": "number", "exclusiveMinimum": 0},
                "target": {"enum": ["single", "average"]},
                "population": {"type": "integer"},
                "generations": {"type": "integer"},
                "tournament_size": {"type": "integer"},
                "crossover_rate": _NUM,
                "mutation_sigma": _NUM,
                "mutation_rate": _NUM,
                "sigma_halving_period": {"type": "integer", "minimum": 1},
                "elite_count": {"type": "integer"},
                "rng_seed": {"type": "integer", "minimum": 0},
            },
        },
    },
}

# Defaults reproduce the reference figures; each command overrides some of them.
BASE_DEFAULTS = {
    "medium": {"alpha": 200.0, "gamma": 1e-4, "omega_p0": 0.03},
    "coupling": {"type": "linear_ramp", "omega_c0": 1.5, "omega_d0": 1.5},
    "solver": {"steps": 4096, "backend": "reduced", "richardson_check": True},
}

COMMAND_DEFAULTS = {
    "fig2": {
        "medium": {"gamma": 0.0},
        "coupling": {"type": "constant_amplitudes", "omega_d": 1.5},
        "kappa_grid": [round(0.1 * i, 10) for i in range(51)],
        "solver": {"steps": 256, "backend": "lindblad"},
    },
    "fig3": {
        "detuning": FIG3_FOURIER.to_dict(),
        "kappa_grid": [round(0.1 * i, 10) for i in range(51)],
    },
    "fig4": {"medium": {"alpha": 50.0}, "kappa": 15.0},
    "optimize": {
        "medium": {"alpha": 50.0},
        "kappa": 15.0,
        "solver": {"richardson_check": False},
        "ga": {"family": "fourier", "target": "single"},
    },
    "propagate": {"detuning": {"family": "constant", "coefficients": [0.0]}, "kappa": 0.0},
}


class ConfigError(FWMError, ValueError):
    pass


def _merge(base: dict, over: dict) -> dict:
    out = copy.deepcopy(base)
    for key, val in over.items():
        if isinstance(val, dict) and isinstance(out.get(key), dict):
            if key in ("coupling", "detuning") and val.get("type", val.get("family")) != out[key].get(
                "type", out[key].get("family")
            ):
                out[key] = copy.deepcopy(val)
            else:
                out[key] = _merge(out[key], val)
        else:
            out[key] = copy.deepcopy(val)
    return out


def resolve_config(command: str, user: dict | None, args=None) -> dict:
    """Merge base defaults, command defaults, the user file and CLI flags."""
    user = user or {}
    try:
        jsonschema.validate(user, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise ConfigError(f"invalid config: {exc.message}") from None
    cfg = _merge(_merge(BASE_DEFAULTS, COMMAND_DEFAULTS.get(command, {})), user)
    if args is not None:
        if args.steps is not None:
            cfg["solver"]["steps"] = args.steps
        if args.backend is not None:
            cfg["solver"]["backend"] = args.backend
        if args.seed is not None:
            cfg.setdefault("ga", {})["rng_seed"] = args.seed
    jsonschema.validate(cfg, CONFIG_SCHEMA)
    return cfg


def _config_errors(fn):
    """Re-raise value errors from config builders as ``ConfigError``."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except ConfigError:
            raise
        except (ValueError, TypeError) as exc:
            raise ConfigError(str(exc)) from None

    return wrapper


@_config_errors
def build_medium(cfg) -> MediumParams:
    m = cfg["medium"]
    return validate_params(MediumParams(float(m["alpha"]), float(m["gamma"]), float(m["omega_p0"])))


@_config_errors
def build_coupling(c: dict):
    kind = c["type"]
    try:
        if kind == "linear_ramp":
            return LinearRamp(float(c["omega_c0"]), float(c["omega_d0"]))
        if kind == "constant_ratio":
            return ConstantRatio(float(c["theta"]))
        return ConstantAmplitudes(float(c["omega_c"]), float(c["omega_d"]))
    except KeyError as exc:
        raise ConfigError(f"coupling {kind!r} is missing field {exc}") from None


@_config_errors
def build_solver(cfg) -> SolverOptions:
    s = cfg["solver"]
    opts = SolverOptions(int(s["steps"]), Backend(s["backend"]), bool(s["richardson_check"]))
    if opts.backend is Backend.MATRIX and cfg["medium"]["gamma"] > 0:
        raise ConfigError("the matrix backend needs medium.gamma = 0")
    return opts


build_waveform = _config_errors(waveform_from_dict)


def fmt(x) -> str:
    return f"{x:.9g}"


def write_csv(path: Path, header, rows, meta: dict) -> None:
    with open(path, "w", newline="") as fh:
        for key, val in meta.items():
            fh.write(f"# {key}: {json.dumps(val, sort_keys=True)}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])


def write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, sort_keys=True, indent=2) + "\n")


# --------------------------------------------------------------------------- #
# Commands
# --------------------------------------------------------------------------- #


def cmd_fig2(cfg: dict, out: Path) -> dict:
    """CE versus kappa for fixed matched-case constants and per-kappa optimal constants."""
    medium = build_medium(cfg)
    opts = build_solver(cfg)
    omega_d = float(cfg["coupling"].get("omega_d", 1.5))
    alpha = medium.alpha
    th0, d0 = optimal_constants(0.0, alpha)
    rows = []
    for k in cfg["kappa_grid"]:
        th, d = optimal_constants(k, alpha)
        fixed_num = propagate(
            medium, ConstantAmplitudes(omega_d / math.tan(th0), omega_d), ConstantDetuning(d0), k, opts
        ).ce
        opt_num = propagate(
            medium, ConstantAmplitudes(omega_d / math.tan(th), omega_d), ConstantDetuning(d), k, opts
        ).ce
        rows.append((k, ce_closed_form(th0, d0, alpha, k), ce_closed_form(th, d, alpha, k), fixed_num, opt_num))
    write_csv(
        out / "fig2.csv",
        ["kappa", "ce_fixed_analytic", "ce_opt_analytic", "ce_fixed_numeric", "ce_opt_numeric"],
        rows,
        {"command": "fig2", "config": cfg},
    )
    return {"rows": len(rows)}


def cmd_fig3(cfg: dict, out: Path) -> dict:
    medium = build_medium(cfg)
    opts = build_solver(cfg)
    coupling = build_coupling(cfg["coupling"])
    wave = build_waveform(cfg["detuning"])
    kappas = cfg["kappa_grid"]
    p2 = ce_sweep(medium, coupling, ConstantDetuning(0.0), kappas, opts)
    p3 = ce_sweep(medium, coupling, wave, kappas, opts)
    rows = [(k, a, b) for (k, a), (_, b) in zip(p2, p3)]
    meta = {"command": "fig3", "config": cfg}
    write_csv(out / "fig3.csv", ["kappa", "ce_protocol2", "ce_protocol3"], rows, meta)
    z, delta = sample_waveform(wave, 1001)
    oc, od = coupling_at(coupling, z)
    write_csv(out / "fig3_waveform.csv", ["z", "delta", "omega_c", "omega_d"], zip(z, delta, oc, od), meta)
    return {"kappa": rows[-1][0], "ce_protocol2": rows[-1][1], "ce_protocol3": rows[-1][2], "delta_min": float(delta.min())}


def cmd_fig4(cfg: dict, out: Path) -> dict:
    medium = build_medium(cfg)
    opts = build_solver(cfg)
    coupling = build_coupling(cfg["coupling"])
    kappa = float(cfg["kappa"])
    meta = {"command": "fig4", "config": cfg}
    th, d = optimal_constants(kappa, medium.alpha)
    omega_d = float(cfg["coupling"].get("omega_d0", 1.5))
    summary = {
        "protocol_I": propagate(
            medium, ConstantAmplitudes(omega_d / math.tan(th), omega_d), ConstantDetuning(d), kappa, opts
        ).ce,
        "protocol_II": propagate(medium, coupling, ConstantDetuning(0.0), kappa, opts).ce,
    }
    waves = {"fourier": FIG4_FOURIER, "bernstein": FIG4_BERNSTEIN}
    if "detuning" in cfg:
        user = build_waveform(cfg["detuning"])
        waves[user.family] = user
    for name, wave in waves.items():
        res = propagate(medium, coupling, wave, kappa, opts)
        summary[f"protocol_III_{name}"] = res.ce
        write_csv(
            out / f"fig4_{name}.csv",
            ["z", "delta", "probe_power", "signal_power"],
            zip(res.z_grid, wave(res.z_grid), res.probe_power, res.signal_power),
            {**meta, "waveform": wave.to_dict()},
        )
    write_json(out / "fig4_summary.json", {"summary": summary, "config": cfg})
    return summary


@_config_errors
def build_ga(cfg: dict):
    ga = dict(cfg.get("ga", {}))
    family = ga.pop("family", "fourier")
    size = ga.pop("size", None)
    bound = ga.pop("bound", None)
    target = ga.pop("target", "single")
    spec = GenomeSpec(family, size)
    if bound is not None:
        spec = GenomeSpec(family, size, ((-bound, bound),) * spec.n_genes)
    opts = build_solver(cfg)
    if target == "single":
        tgt = SingleKappa(float(cfg["kappa"]))
    else:
        tgt = AverageOverGrid(tuple(cfg["kappa_grid"])) if "kappa_grid" in cfg else AverageOverGrid()
    cost = CostSpec(tgt, build_medium(cfg), build_coupling(cfg["coupling"]), opts)
    return spec, cost, GAConfig(**ga)


def cmd_optimize(cfg: dict, out: Path) -> dict:
    spec, cost, ga = build_ga(cfg)
    report = run_ga(spec, cost, ga)
    data = json.loads(report.to_json())
    data["run_config"] = cfg
    write_json(out / "report.json", data)
    z, delta = sample_waveform(spec.waveform(report.best_genome), 256)
    write_csv(out / "best_waveform.csv", ["z", "delta"], zip(z, delta), {"command": "optimize", "config": cfg})
    return {"best_ce": report.best_ce, "best_genome": report.best_genome}


def cmd_propagate(cfg: dict, out: Path) -> dict:
    medium = build_medium(cfg)
    res = propagate(
        medium,
        build_coupling(cfg["coupling"]),
        build_waveform(cfg["detuning"]),
        float(cfg["kappa"]),
        build_solver(cfg),
    )
    path = out / "propagate.csv"
    write_csv(
        path,
        ["z", "probe_power", "signal_power"],
        zip(res.z_grid, res.probe_power, res.signal_power),
        {"command": "propagate", "config": cfg},
    )
    with open(path, "a") as fh:
        fh.write(f"# ce: {fmt(res.ce)}\n")
    return {"ce": res.ce, "loss": res.loss}


COMMANDS = {
    "fig2": cmd_fig2,
    "fig3": cmd_fig3,
    "fig4": cmd_fig4,
    "optimize": cmd_optimize,
    "propagate": cmd_propagate,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fwmopt", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in COMMANDS.items():
        p = sub.add_parser(name, help=(fn.__doc__ or name).splitlines()[0])
        p.add_argument("--config", type=Path, help="JSON run configuration")
        p.add_argument("--out", type=Path, default=Path("."), help="output directory")
        p.add_argument("--seed", type=int, help="GA random seed")
        p.add_argument("--steps", type=int, help="RK4 steps over the medium")
        p.add_argument("--backend", choices=[b.value for b in Backend])
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    try:
        user = json.loads(args.config.read_text()) if args.config else {}
        cfg = resolve_config(args.command, user, args)
        args.out.mkdir(parents=True, exist_ok=True)
    except (OSError, ValueError, jsonschema.ValidationError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        summary = COMMANDS[args.command](cfg, args.out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (FWMError, ArithmeticError, ValueError, np.linalg.LinAlgError) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    print(json.dumps(summary, sort_keys=True, default=float))
    return 0


if __name__ == "__main__":
    sys.exit(main())
