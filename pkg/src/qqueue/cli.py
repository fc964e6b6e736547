"""
Command-line front end.

    qqueue simulate|spectrum|montecarlo|classical-matrix CONFIG.json
           [--out DIR] [--seed N] [--leading-only] [--format csv|json|svg] [--workers N]

Exit codes: 0 success, 2 configuration or output-path error, 3 capability
error (dimension gate), 4 numerical failure. The default output directory is
taken from ``$QQUEUE_OUT_DIR`` when neither ``--out`` nor ``output.dir`` is given.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import os
import sys
from pathlib import Path

from . import __version__
from .analysis import (
    check_semistability_operator,
    classify_spectrum,
    extract_stochastic_matrix,
    semistability_from_distributions,
)
from .channels import MAX_SUPEROPERATOR_DIM, invariant_state, leading_eigenvalues, superoperator
from .config import ExperimentConfig, load_config
from .errors import CapabilityError, ConfigError, InvalidDimsError, InvalidStateError, NumericalError
from .evolution import run_trajectory
from .io import write_bars_svg, write_csv, write_heatmap_svg, write_matrix_dat
from .queue import build_step_channel
from .randstates import monte_carlo_mean

log = logging.getLogger("qqueue")

EXIT_OK, EXIT_CONFIG, EXIT_CAPABILITY, EXIT_NUMERICAL = 0, 2, 3, 4
DEFAULT_OUT = "qqueue_out"


def _out_dir(cfg: ExperimentConfig, args) -> Path:
    return Path(args.out or cfg.out_dir or os.environ.get("QQUEUE_OUT_DIR") or DEFAULT_OUT)


def _metadata(cfg: ExperimentConfig, command: str) -> dict:
    return {"command": command, "version": __version__, "config": cfg.to_dict()}


def _dump_json(path: Path, doc: dict) -> None:
    path.write_text(json.dumps(doc, indent=1))


def _prepare(cfg: ExperimentConfig):
    try:
        step = build_step_channel(cfg.dims, cfg.coin, classical=cfg.classical)
    except (InvalidDimsError, ValueError) as exc:
        raise ConfigError(f"coin/dims: {exc}") from exc
    return step


def _initial(cfg: ExperimentConfig):
    try:
        return cfg.resolve_initial_state()
    except (InvalidDimsError, InvalidStateError, ValueError) as exc:
        raise ConfigError(f"initial_state: {exc}") from exc


def cmd_simulate(cfg: ExperimentConfig, out: Path) -> dict:
    if cfg.run is None:
        raise ConfigError("simulate needs a 'run' section")
    step = _prepare(cfg)
    rho0 = _initial(cfg)
    run = cfg.run
    traj = run_trajectory(step, rho0, cfg.dims, run.t_max, state_every=run.checkpoint_every)
    per_state = semistability_from_distributions(traj.probs, run.eps, run.window)
    method = "superoperator" if step.dim <= MAX_SUPEROPERATOR_DIM else "heisenberg"
    operator = check_semistability_operator(step, cfg.dims, run.eps, max(run.t_max, 1), window=run.window,
                                            method=method, stop_on_convergence=False)
    report = {
        "metadata": _metadata(cfg, "simulate"),
        "per_state": per_state.to_dict(),
        "operator_level": operator.to_dict(),
        "operator_norm_at_t_max": operator.norm_history[-1][1],
    }
    out.mkdir(parents=True, exist_ok=True)
    if "csv" in cfg.formats:
        traj.to_csv(out / "trajectory.csv")
        write_matrix_dat(out / "heatmap.dat", traj.probs)
    if "json" in cfg.formats:
        traj.to_json(out / "trajectory.json", _metadata(cfg, "simulate"))
    if "svg" in cfg.formats:
        write_heatmap_svg(out / "heatmap.svg", traj.probs)
    _dump_json(out / "report.json", report)
    return report


def cmd_spectrum(cfg: ExperimentConfig, out: Path, leading_only: bool = False) -> dict:
    step = _prepare(cfg)
    if leading_only:
        rep = leading_eigenvalues(step)
        doc = {"metadata": _metadata(cfg, "spectrum"), **rep.to_dict()}
    else:
        rep = classify_spectrum(step)
        inv = invariant_state(superoperator(step))
        doc = {
            "metadata": _metadata(cfg, "spectrum"),
            **rep.to_dict(),
            "invariant_state_unique": inv.unique,
            "unit_eigenvalue_multiplicity": inv.multiplicity,
        }
    out.mkdir(parents=True, exist_ok=True)
    write_csv(out / "spectrum.csv", ["re", "im", "modulus"], rep.rows())
    _dump_json(out / "classification.json", {k: v for k, v in doc.items() if k != "eigenvalues"})
    return doc


def cmd_montecarlo(cfg: ExperimentConfig, out: Path) -> dict:
    if cfg.montecarlo is None:
        raise ConfigError("montecarlo needs a 'montecarlo' section")
    step = _prepare(cfg)
    summary = monte_carlo_mean(step, cfg.dims, cfg.montecarlo, workers=cfg.workers)
    out.mkdir(parents=True, exist_ok=True)
    if "csv" in cfg.formats:
        summary.to_csv(out / "montecarlo.csv")
    if "json" in cfg.formats:
        summary.to_json(out / "montecarlo.json", _metadata(cfg, "montecarlo"))
    if "svg" in cfg.formats:
        write_bars_svg(out / "montecarlo.svg", summary.mean, summary.stddev)
    return {"mean": summary.mean.tolist(), "stddev": summary.stddev.tolist(), **summary.metadata()}


def cmd_classical_matrix(cfg: ExperimentConfig, out: Path) -> dict:
    try:
        sm = extract_stochastic_matrix(cfg.coin, cfg.dims)
    except InvalidDimsError as exc:
        raise ConfigError(f"coin: {exc}") from exc
    out.mkdir(parents=True, exist_ok=True)
    write_csv(out / "stochastic_matrix.csv", [f"in{i}" for i in range(sm.dim)], sm.entries)
    doc = {"metadata": _metadata(cfg, "classical-matrix"), **sm.to_dict()}
    _dump_json(out / "stochastic_matrix.json", doc)
    return doc


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qqueue", description="Quantum queue (DTQMC) simulator")
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("command", choices=["simulate", "spectrum", "montecarlo", "classical-matrix"])
    p.add_argument("config", help="experiment configuration (JSON)")
    p.add_argument("--out", help="output directory")
    p.add_argument("--seed", type=int, help="override the configured seed")
    p.add_argument("--leading-only", action="store_true",
                   help="spectrum: leading eigenvalues only, via ARPACK on the matrix-free channel")
    p.add_argument("--format", action="append", choices=["csv", "json", "svg"], dest="formats",
                   help="output format (repeatable); default from config")
    p.add_argument("--workers", type=int, help="montecarlo: worker processes")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def _apply_overrides(cfg: ExperimentConfig, args) -> ExperimentConfig:
    if args.seed is not None:
        if not 0 <= args.seed < 2**64:
            raise ConfigError("--seed: must be a 64-bit unsigned integer")
        cfg.seed = args.seed
        if cfg.montecarlo is not None:
            cfg.montecarlo = dataclasses.replace(cfg.montecarlo, seed=args.seed)
    if args.formats:
        cfg.formats = tuple(dict.fromkeys(args.formats))
    if args.workers is not None:
        if args.workers < 1:
            raise ConfigError("--workers: must be >= 1")
        cfg.workers = args.workers
    return cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = _apply_overrides(load_config(args.config), args)
        out = _out_dir(cfg, args)
        if out.exists() and not out.is_dir():
            raise ConfigError(f"output path {out} exists and is not a directory")
        if args.command == "simulate":
            result = cmd_simulate(cfg, out)
        elif args.command == "spectrum":
            result = cmd_spectrum(cfg, out, leading_only=args.leading_only)
        elif args.command == "montecarlo":
            result = cmd_montecarlo(cfg, out)
        else:
            result = cmd_classical_matrix(cfg, out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"output error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CapabilityError as exc:
        print(f"capability error: {exc}", file=sys.stderr)
        return EXIT_CAPABILITY
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    log.info("wrote results to %s", out)
    print(_summary(args.command, result))
    return EXIT_OK


def _summary(command: str, result: dict) -> str:
    if command == "simulate":
        ps = result["per_state"]
        return (f"per-state converged={ps['converged']} t_stop={ps['t_stop']} final_norm={ps['final_norm']:.3e}; "
                f"operator norm at t_max={result['operator_norm_at_t_max']:.3e}")
    if command == "spectrum":
        return f"{result['classification']} ({result['n_unit_modulus']} eigenvalues on the unit circle)"
    if command == "montecarlo":
        return (f"{result['n_converged']}/{result['n_samples']} converged; "
                f"max stddev {max(result['stddev']):.3e}")
    return f"{result['dim']}x{result['dim']} stochastic matrix, tp_verified={result['tp_verified']}"


if __name__ == "__main__":
    sys.exit(main())
