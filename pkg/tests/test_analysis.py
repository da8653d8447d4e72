import math

import numpy as np
import pytest

from entdist.analysis import (
    SweepSpec,
    SweepVariable,
    ghz_outcome_distribution_check,
    homodyne_success_oracle,
    homodyne_truth_table,
    outcome_distribution_check,
    run_monte_carlo,
    sample_noise,
    sweep,
    trial_seed,
)
from entdist.elements import FiberConfig, HomodyneModel, NoiseParams
from entdist.errors import ParameterError
from entdist.protocols import Outcome


def test_sample_noise_is_unit_and_isotropic():
    rng = np.random.default_rng(0)
    draws = [sample_noise(rng) for _ in range(20_000)]
    w = np.array([abs(d.alpha) ** 2 for d in draws])
    # |alpha|^2 is uniform on [0, 1] for a Haar-random unit vector in C^2
    assert abs(w.mean() - 0.5) < 4 * math.sqrt(1 / 12 / len(w))
    assert abs(np.mean([d.alpha for d in draws])) < 0.02


def test_trial_seed_is_stable_and_distinct():
    assert trial_seed(1, 0, 0) == trial_seed(1, 0, 0)
    seeds = {trial_seed(1, p, t) for p in range(5) for t in range(200)}
    assert len(seeds) == 1000


def test_monte_carlo_is_deterministic():
    a = run_monte_carlo(200, HomodyneModel(0.2), FiberConfig(), seed=5)
    b = run_monte_carlo(200, HomodyneModel(0.2), FiberConfig(), seed=5)
    assert a == b


def test_stderr_halves_with_four_times_trials():
    small = run_monte_carlo(1000, HomodyneModel(0.3), FiberConfig(), seed=12)
    big = run_monte_carlo(4000, HomodyneModel(0.3), FiberConfig(), seed=13)
    assert small.std_error / big.std_error == pytest.approx(2.0, abs=0.3)


def test_outcome_frequencies_sum_to_one():
    p = run_monte_carlo(300, HomodyneModel(0.1), FiberConfig(), seed=3)
    assert sum(p.counts) == 300
    assert sum(p.frequencies) == pytest.approx(1.0)


def test_homodyne_sweep_is_monotone():
    res = sweep(SweepSpec(SweepVariable.HOMODYNE_ERR, (0, 0.1, 0.25, 0.5), 1500, seed=4))
    rates = [p.success_rate for p in res.points]
    assert rates[0] == 1.0
    assert all(b <= a + 3 * p.std_error for a, b, p in zip(rates, rates[1:], res.points[1:]))
    assert rates[-1] == pytest.approx(0.25, abs=0.04)


def test_fiber_sweep_with_compensation_is_perfect():
    res = sweep(SweepSpec("fiber_delta", (0.0, 0.02, 0.05, 0.3), 50, seed=6))
    assert all(p.mean_fidelity >= 1 - 1e-9 for p in res.points)


def test_fiber_sweep_without_compensation_follows_cosine():
    fiber = FiberConfig(velocity=2e8, omega1=1e15, omega2=1e15 + 2 * math.pi * 1e9)
    res = sweep(SweepSpec("fiber_delta", (0.0, 0.05, 0.1), 20, seed=6, fiber=fiber, compensate=False))
    for p in res.points:
        dphi = 2 * math.pi * 1e9 * p.value / 2e8
        assert p.mean_fidelity == pytest.approx(math.cos(dphi / 2) ** 2, abs=1e-9)


def test_noise_angle_sweep():
    res = sweep(SweepSpec("noise_angle", (0.0, math.pi / 4, math.pi / 2), 400, seed=7))
    assert all(p.success_rate == 1.0 for p in res.points)
    assert res.points[0].counts == (400, 0, 0, 0)
    assert res.points[-1].counts == (0, 400, 0, 0)
    mid = res.points[1].frequencies
    assert all(abs(f - 0.25) < 4 * math.sqrt(0.25 * 0.75 / 400) for f in mid)


@pytest.mark.parametrize("kwargs", [
    dict(grid=()),
    dict(grid=(0.2, 0.1)),
    dict(trials_per_point=0),
    dict(variable="temperature"),
])
def test_bad_sweep_specs(kwargs):
    base = dict(variable="homodyne_err", grid=(0.0,), trials_per_point=1, seed=0)
    with pytest.raises(ParameterError):
        SweepSpec(**{**base, **kwargs})


def test_distribution_check_agrees():
    rng = np.random.default_rng(9)
    for _ in range(20):
        table = outcome_distribution_check(sample_noise(rng), sample_noise(rng))
        assert all(abs(s - a) < 1e-12 for s, a in table.values())


def test_ghz_distribution_check_agrees():
    rng = np.random.default_rng(10)
    table = ghz_outcome_distribution_check([sample_noise(rng) for _ in range(4)])
    assert len(table) == 16
    assert all(abs(s - a) < 1e-12 for s, a in table.values())


def test_truth_table_is_diagonal():
    table = homodyne_truth_table()
    for (true, reported), f in table.items():
        assert f == pytest.approx(1.0 if true is reported else 0.0, abs=1e-12)


@pytest.mark.parametrize("p", [0.0, 0.1, 0.25, 0.5])
def test_oracle_is_square_of_single_readout(p):
    success, fid = homodyne_success_oracle(p)
    assert success == pytest.approx((1 - p) ** 2)
    assert fid == pytest.approx((1 - p) ** 2)


def test_oracle_with_skewed_outcome_weights():
    probs = {Outcome.PHI1: 0.7, Outcome.PHI2: 0.1, Outcome.PHI3: 0.1, Outcome.PHI4: 0.1}
    assert homodyne_success_oracle(0.2, probs)[0] == pytest.approx(0.64)


def test_fixed_noise_monte_carlo():
    nz = NoiseParams(1.0, 0.0)
    p = run_monte_carlo(50, HomodyneModel(0.0), FiberConfig(), seed=1, noise=(nz, nz))
    assert p.counts == (50, 0, 0, 0)
