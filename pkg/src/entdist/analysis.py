"""Monte Carlo harness, parameter sweeps and exact outcome statistics."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from itertools import product
from typing import Iterable, Iterator, Sequence

import numpy as np

from .circuit import Circuit
from .elements import FiberConfig, HomodyneModel, NoiseParams, frequency_upconvert
from .errors import ParameterError
from .protocols import (
    Outcome,
    ProtocolReport,
    _default_circuit,
    _ghz_default,
    apply_correction,
    cat_target,
    collapsed_branch,
    convert_all,
    correction_for,
    identify_outcome,
    output_modes,
    prepare_ghz_probe_state,
    prepare_probe_state,
    run_two_qubit,
)
from .state import fidelity, partition_weights


class SweepVariable(Enum):
    HOMODYNE_ERR = "homodyne_err"
    FIBER_DELTA = "fiber_delta"
    NOISE_ANGLE = "noise_angle"


@dataclass(frozen=True)
class SweepSpec:
    """What to sweep and how.

    ``p_err``, ``fiber`` and ``compensate`` are the fixed settings for the
    variables that are not being swept.  For ``FIBER_DELTA`` the grid holds
    ``L_A - L_B`` in metres, with ``L_B`` taken from ``fiber``.  For
    ``NOISE_ANGLE`` both channels use ``alpha = cos(phi)``, ``beta = sin(phi)``.
    """

    variable: SweepVariable
    grid: tuple[float, ...]
    trials_per_point: int
    seed: int
    p_err: float = 0.0
    fiber: FiberConfig = field(default_factory=FiberConfig)
    compensate: bool = True

    def __post_init__(self):
        if not isinstance(self.variable, SweepVariable):
            try:
                object.__setattr__(self, "variable", SweepVariable(self.variable))
            except ValueError:
                raise ParameterError(f"unknown sweep variable {self.variable!r}") from None
        grid = tuple(float(g) for g in self.grid)
        object.__setattr__(self, "grid", grid)
        if not grid:
            raise ParameterError("sweep grid is empty")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ParameterError("sweep grid must be strictly increasing")
        if int(self.trials_per_point) < 1:
            raise ParameterError("trials_per_point must be at least 1")
        if int(self.seed) < 0:
            raise ParameterError("seed must be non-negative")


@dataclass(frozen=True)
class SweepPoint:
    value: float
    trials: int
    mean_fidelity: float
    success_rate: float
    counts: tuple[int, int, int, int]  # PHI1..PHI4
    std_error: float

    @property
    def frequencies(self) -> tuple[float, ...]:
        return tuple(c / self.trials for c in self.counts)


@dataclass(frozen=True)
class SweepResult:
    variable: SweepVariable
    points: tuple[SweepPoint, ...]


def sample_noise(rng: np.random.Generator) -> NoiseParams:
    """Haar-random collective-noise rotation (uniform unit vector in C^2)."""
    z = rng.standard_normal(4)
    alpha, beta = complex(z[0], z[1]), complex(z[2], z[3])
    r = math.sqrt(abs(alpha) ** 2 + abs(beta) ** 2)
    return NoiseParams(alpha / r, beta / r)


def trial_seed(seed: int, point: int, trial: int) -> int:
    """Independent 63-bit seed for one trial, stable across serial/parallel runs."""
    ss = np.random.SeedSequence([int(seed), int(point), int(trial)])
    return int(ss.generate_state(1, np.uint64)[0] >> np.uint64(1))


def iter_two_qubit_trials(
    trials: int,
    homodyne: HomodyneModel,
    fiber: FiberConfig,
    seed: int,
    *,
    noise: tuple[NoiseParams, NoiseParams] | None = None,
    compensate: bool = True,
    point: int = 0,
    circuit: Circuit | None = None,
) -> Iterator[ProtocolReport]:
    """Yield one report per trial; noise is resampled per trial unless fixed."""
    if trials < 1:
        raise ParameterError("trials must be at least 1")
    circuit = circuit or _default_circuit()
    for t in range(trials):
        ts = trial_seed(seed, point, t)
        if noise is None:
            nrng = np.random.default_rng([ts, 1])
            na, nb = sample_noise(nrng), sample_noise(nrng)
        else:
            na, nb = noise
        yield run_two_qubit(na, nb, fiber, homodyne, ts, compensate=compensate, circuit=circuit)


def summarize(reports: Iterable[ProtocolReport], value: float = 0.0) -> SweepPoint:
    fids, successes = [], 0
    counts = dict.fromkeys(Outcome, 0)
    for r in reports:
        fids.append(r.fidelity)
        successes += r.success
        counts[r.record.outcome] += 1
    n = len(fids)
    arr = np.asarray(fids, dtype=float)
    stderr = float(arr.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return SweepPoint(
        value=float(value),
        trials=n,
        mean_fidelity=float(arr.mean()),
        success_rate=successes / n,
        counts=tuple(counts[o] for o in Outcome),
        std_error=stderr,
    )


def run_monte_carlo(
    trials: int,
    homodyne: HomodyneModel,
    fiber: FiberConfig,
    seed: int,
    *,
    noise: tuple[NoiseParams, NoiseParams] | None = None,
    compensate: bool = True,
    point: int = 0,
    value: float = 0.0,
    circuit: Circuit | None = None,
) -> SweepPoint:
    return summarize(
        iter_two_qubit_trials(trials, homodyne, fiber, seed, noise=noise,
                              compensate=compensate, point=point, circuit=circuit),
        value,
    )


def sweep(spec: SweepSpec) -> SweepResult:
    points = []
    for idx, value in enumerate(spec.grid):
        homodyne = HomodyneModel(spec.p_err)
        fiber = spec.fiber
        noise = None
        if spec.variable is SweepVariable.HOMODYNE_ERR:
            homodyne = HomodyneModel(value)
        elif spec.variable is SweepVariable.FIBER_DELTA:
            fiber = replace(spec.fiber, length_a=spec.fiber.length_b + value)
        elif spec.variable is SweepVariable.NOISE_ANGLE:
            nz = NoiseParams(math.cos(value), math.sin(value))
            noise = (nz, nz)
        else:  # pragma: no cover - SweepSpec validates the variable
            raise ParameterError(f"unknown sweep variable {spec.variable!r}")
        points.append(run_monte_carlo(
            spec.trials_per_point, homodyne, fiber, spec.seed,
            noise=noise, compensate=spec.compensate, point=idx, value=value,
        ))
    return SweepResult(spec.variable, tuple(points))


def outcome_distribution_check(noise_a: NoiseParams,
                               noise_b: NoiseParams) -> dict[Outcome, tuple[float, float]]:
    """Per-branch ``(simulated, analytic)`` probabilities, no sampling involved."""
    state = prepare_probe_state(noise_a, noise_b)
    sim = partition_weights(state, lambda k: identify_outcome(*k.probes))
    a, b, d, g = noise_a.alpha, noise_a.beta, noise_b.alpha, noise_b.beta
    analytic = {
        Outcome.PHI1: abs(a * d) ** 2,
        Outcome.PHI2: abs(b * g) ** 2,
        Outcome.PHI3: abs(a * g) ** 2,
        Outcome.PHI4: abs(b * d) ** 2,
    }
    return {o: (sim.get(o, 0.0), analytic[o]) for o in Outcome}


def ghz_outcome_distribution_check(
    noises: Sequence[NoiseParams], *, experimental_odd_n: bool = False,
) -> dict[tuple[int, ...], tuple[float, float]]:
    """Per-bitstring ``(simulated, analytic)`` probabilities for the GHZ probe readout."""
    n = len(noises)
    circuit = _ghz_default(n)
    state = prepare_ghz_probe_state(n, noises, circuit, experimental_odd_n)
    bit = {"theta": 0, "theta'": 1}
    sim = partition_weights(state, lambda k: tuple(bit[p.value] for p in k.probes))
    table = {}
    for bits in product((0, 1), repeat=n):
        amp = 1.0
        for nz, j in zip(noises, bits):
            amp *= abs(nz.alpha if j == 0 else nz.beta)
        table[bits] = (sim.get(bits, 0.0), amp ** 2)
    return table


def homodyne_truth_table(circuit: Circuit | None = None) -> dict[tuple[Outcome, Outcome], float]:
    """Final fidelity for every (true branch, reported branch) pair."""
    circuit = circuit or _default_circuit()
    table = {}
    for true in Outcome:
        converted = frequency_upconvert(convert_all(collapsed_branch(true, circuit), circuit), (0, 1))
        for reported in Outcome:
            corrected = apply_correction(converted, correction_for(reported))
            table[true, reported] = fidelity(corrected, cat_target(output_modes(reported, circuit)))
    return table


def homodyne_success_oracle(p_err: float, outcome_probs: dict[Outcome, float] | None = None,
                            circuit: Circuit | None = None) -> tuple[float, float]:
    """Exact ``(success probability, mean fidelity)`` at readout error ``p_err``.

    Enumerates the 4x4 table of true and reported branches; each party's
    report flips independently with probability ``p_err``.  Without
    ``outcome_probs`` the branches are weighted equally, which is their mean
    under Haar-random noise.
    """
    probs = outcome_probs or dict.fromkeys(Outcome, 0.25)
    table = homodyne_truth_table(circuit)
    success = mean_fid = 0.0
    for true, reported in product(Outcome, repeat=2):
        flips = sum(t != r for t, r in zip(true.polarizations, reported.polarizations))
        w = probs[true] * p_err ** flips * (1 - p_err) ** (2 - flips)
        f = table[true, reported]
        mean_fid += w * f
        success += w * (f >= 1 - 1e-9)
    return success, mean_fid
