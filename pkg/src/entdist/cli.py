"""Command-line entry point: ``entdist {run-two-qubit,run-ghz,sweep,verify}``.

Exit codes: 0 on completion, 1 on a simulation error or a failed
acceptance criterion, 2 on a usage or configuration error.
"""

from __future__ import annotations

import argparse
import sys
from typing import Sequence

import numpy as np

from . import acceptance
from .analysis import SweepSpec, SweepVariable, sample_noise, sweep, trial_seed
from .circuit import load_circuit
from .config import ConfigError, RunConfig, load_config, override
from .elements import HomodyneModel, NoiseParams
from .errors import ParameterError, SimulationError
from .protocols import run_ghz, run_two_qubit
from .records import write_reports, write_sweep_csv, write_sweep_records

DEFAULT_OUTPUT = {
    "run-two-qubit": "two_qubit.jsonl",
    "run-ghz": "ghz.jsonl",
    "sweep": "sweep.csv",
}


class UsageError(Exception):
    pass


def _noise(spec: NoiseParams | str, rng: np.random.Generator) -> NoiseParams:
    if spec == "random":
        return sample_noise(rng)
    if spec == "identity":
        return NoiseParams.identity()
    return spec


def _two_qubit_reports(cfg: RunConfig):
    circuit = load_circuit(cfg.circuit) if cfg.circuit else None
    homodyne = HomodyneModel(cfg.p_err)
    for t in range(cfg.trials):
        ts = trial_seed(cfg.seed, 0, t)
        nrng = np.random.default_rng([ts, 1])
        na, nb = _noise(cfg.noise_a, nrng), _noise(cfg.noise_b, nrng)
        yield run_two_qubit(na, nb, cfg.fiber, homodyne, ts,
                            compensate=cfg.compensate, circuit=circuit)


def _ghz_reports(cfg: RunConfig):
    homodyne = HomodyneModel(cfg.p_err)
    for t in range(cfg.trials):
        ts = trial_seed(cfg.seed, 0, t)
        nrng = np.random.default_rng([ts, 1])
        if isinstance(cfg.noises, tuple):
            noises = list(cfg.noises)
        else:
            noises = [_noise(cfg.noises, nrng) for _ in range(cfg.n)]
        yield run_ghz(cfg.n, noises, homodyne, ts, experimental_odd_n=cfg.experimental_odd_n)


def _run_reports(cfg: RunConfig, reports, output: str) -> None:
    successes, fids = 0, []

    def tally(stream):
        nonlocal successes
        for r in stream:
            successes += r.success
            fids.append(r.fidelity)
            yield r

    with open(output, "w", encoding="utf-8") as fh:
        n = write_reports(fh, tally(reports))
    print(f"trials {n}  success rate {successes / n:.6f}  mean fidelity {np.mean(fids):.12f}")
    print(f"wrote {output}")


def cmd_run_two_qubit(cfg: RunConfig) -> int:
    _run_reports(cfg, _two_qubit_reports(cfg), cfg.output or DEFAULT_OUTPUT["run-two-qubit"])
    return 0


def cmd_run_ghz(cfg: RunConfig) -> int:
    if cfg.n % 2 and not cfg.experimental_odd_n:
        raise UsageError(
            f"n={cfg.n} is odd; the alternating frequency pattern is only defined for even n. "
            "Use --experimental-odd-n to run it anyway."
        )
    _run_reports(cfg, _ghz_reports(cfg), cfg.output or DEFAULT_OUTPUT["run-ghz"])
    return 0


def cmd_sweep(cfg: RunConfig) -> int:
    if cfg.sweep_variable is None:
        raise UsageError("sweep needs sweep.variable in the config file "
                         f"(one of {', '.join(v.value for v in SweepVariable)})")
    spec = SweepSpec(cfg.sweep_variable, cfg.sweep_grid, cfg.trials, cfg.seed,
                     p_err=cfg.p_err, fiber=cfg.fiber, compensate=cfg.compensate)
    result = sweep(spec)
    output = cfg.output or DEFAULT_OUTPUT["sweep"]
    with open(output, "w", encoding="utf-8", newline="") as fh:
        if output.endswith(".jsonl"):
            write_sweep_records(fh, result)
        else:
            write_sweep_csv(fh, result)
    for p in result.points:
        print(f"{spec.variable.value}={p.value:g}  mean fidelity {p.mean_fidelity:.6f}  "
              f"success rate {p.success_rate:.6f}  stderr {p.std_error:.2e}")
    print(f"wrote {output}")
    return 0


def cmd_verify(only: Sequence[str] | None) -> int:
    if only:
        unknown = [c for c in only if c not in acceptance.CRITERIA]
        if unknown:
            raise UsageError(f"unknown criterion {unknown[0]!r} "
                             f"(known: {', '.join(acceptance.CRITERIA)})")
    results = acceptance.run_acceptance(list(only) if only else None,
                                        echo=lambda s: print(s, flush=True))
    failed = [r for r in results if not r.passed]
    if failed:
        print("failed: " + ", ".join(f"{r.id} {r.name}" for r in failed))
        return 1
    print(f"all {len(results)} criteria passed")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="entdist",
        description="Simulate deterministic entanglement distribution over collective-noise channels.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", metavar="PATH", help="YAML run configuration")
        p.add_argument("--seed", type=int, help="master seed")
        p.add_argument("--trials", type=int, help="trials (per grid point for sweep)")
        p.add_argument("--p-err", type=float, dest="p_err", help="homodyne readout error in [0, 0.5]")
        p.add_argument("--output", metavar="PATH", help="output file")

    common(sub.add_parser("run-two-qubit", help="distribute Bell pairs"))
    ghz = sub.add_parser("run-ghz", help="distribute n-photon GHZ states")
    common(ghz)
    ghz.add_argument("--n", type=int, help="number of parties (even)")
    ghz.add_argument("--experimental-odd-n", action="store_true", dest="experimental_odd_n",
                     help="allow odd n with the w1 w2 ... w1 frequency pattern")
    common(sub.add_parser("sweep", help="sweep one parameter and write a CSV table"))
    verify = sub.add_parser("verify", help="run the acceptance suite")
    verify.add_argument("--only", nargs="+", metavar="ID", help="run only these criteria (C1..C8)")
    return parser


def _config(args: argparse.Namespace) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    return override(
        cfg,
        seed=args.seed,
        trials=args.trials,
        p_err=args.p_err,
        output=args.output,
        n=getattr(args, "n", None),
        experimental_odd_n=getattr(args, "experimental_odd_n", None),
    )


COMMANDS = {
    "run-two-qubit": cmd_run_two_qubit,
    "run-ghz": cmd_run_ghz,
    "sweep": cmd_sweep,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits 2 on usage errors, 0 on --help
        return int(exc.code or 0)
    try:
        if args.command == "verify":
            return cmd_verify(args.only)
        return COMMANDS[args.command](_config(args))
    except (ConfigError, UsageError, ParameterError) as exc:
        print(f"entdist: error: {exc}", file=sys.stderr)
        return 2
    except SimulationError as exc:
        print(f"entdist: simulation failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"entdist: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
