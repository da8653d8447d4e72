import math

import numpy as np
import pytest

from entdist.analysis import sample_noise
from entdist.elements import FiberConfig, HomodyneModel, NoiseParams
from entdist.errors import ParameterError, RoutingError
from entdist.protocols import (
    CORRECTIONS,
    Outcome,
    collapsed_branch,
    conversion_network,
    correction_for,
    derive_correction_table,
    identify_outcome,
    make_ghz_source,
    output_modes,
    routing_modes,
    run_ghz,
    run_two_qubit,
)
from entdist.state import Polarization, ProbePhase

TH, TP = ProbePhase.THETA, ProbePhase.THETA_PRIME
IDENT = NoiseParams.identity()


def test_identify_outcome_table():
    assert identify_outcome(TH, TH) is Outcome.PHI1
    assert identify_outcome(TP, TP) is Outcome.PHI2
    assert identify_outcome(TH, TP) is Outcome.PHI3
    assert identify_outcome(TP, TH) is Outcome.PHI4
    with pytest.raises(Exception):
        identify_outcome(ProbePhase.ZERO, TH)


def test_correction_table_matches_derivation():
    assert derive_correction_table() == dict(CORRECTIONS)
    assert all(correction_for(o) == CORRECTIONS[o] for o in Outcome)


def test_branch_modes():
    assert routing_modes(Outcome.PHI1) == ("a2", "b2")
    assert routing_modes(Outcome.PHI4) == ("a1", "b2")
    assert output_modes(Outcome.PHI1) == ("c2", "d2")
    assert output_modes(Outcome.PHI2) == ("c1", "d1")
    assert output_modes(Outcome.PHI3) == ("c2", "d1")
    assert output_modes(Outcome.PHI4) == ("c1", "d2")


def test_conversion_network_checks_routing():
    with pytest.raises(RoutingError):
        conversion_network(collapsed_branch(Outcome.PHI1), Outcome.PHI2)


def test_identity_noise_gives_phi1_and_unit_fidelity():
    r = run_two_qubit(IDENT, IDENT, rng=0)
    assert r.record.outcome is Outcome.PHI1
    assert r.fidelity == pytest.approx(1.0, abs=1e-12)
    assert r.success


def test_pure_flip_noise_gives_phi2():
    flip = NoiseParams(0.0, 1.0)
    r = run_two_qubit(flip, flip, rng=0)
    assert r.record.outcome is Outcome.PHI2 and r.success


def test_random_noise_always_succeeds():
    rng = np.random.default_rng(2)
    for seed in range(200):
        r = run_two_qubit(sample_noise(rng), sample_noise(rng), rng=seed)
        assert r.fidelity >= 1 - 1e-9


def test_uncompensated_fiber_fidelity_is_cos_squared():
    fiber = FiberConfig(length_a=10.05, length_b=10.0, velocity=2e8,
                        omega1=1.0e15, omega2=1.0e15 + 2 * math.pi * 1e9)
    rng = np.random.default_rng(3)
    for seed in range(20):
        na, nb = sample_noise(rng), sample_noise(rng)
        raw = run_two_qubit(na, nb, fiber, rng=seed, compensate=False)
        fixed = run_two_qubit(na, nb, fiber, rng=seed)
        assert raw.fidelity == pytest.approx(math.cos(fiber.delta_phi / 2) ** 2, abs=1e-9)
        assert fixed.fidelity == pytest.approx(1.0, abs=1e-9)


def test_misreport_fails_the_run():
    # p_err = 0.5 with a seed that flips at least one report
    for seed in range(50):
        r = run_two_qubit(IDENT, IDENT, homodyne=HomodyneModel(0.5), rng=seed)
        if r.record.reported != r.record.true:
            assert not r.success and r.fidelity == 0.0
            return
    pytest.fail("no misreported trial in 50 seeds")


def test_same_seed_same_report():
    na, nb = NoiseParams(0.6, 0.8), NoiseParams(0.8, 0.6j)
    a = run_two_qubit(na, nb, homodyne=HomodyneModel(0.2), rng=11)
    b = run_two_qubit(na, nb, homodyne=HomodyneModel(0.2), rng=11)
    assert a.record == b.record and a.final_state == b.final_state


def test_ghz_source_shape():
    s = make_ghz_source(4)
    assert len(s) == 2
    freqs = {tuple(p.freq.value for p in k.photons) for k in s}
    assert freqs == {("w1", "w2", "w1", "w2"), ("w2", "w1", "w2", "w1")}
    assert all(p.pol is Polarization.H for k in s for p in k.photons)


def test_ghz_identity_noise():
    r = run_ghz(4, [IDENT] * 4, rng=0)
    assert r.record.outcome == (0, 0, 0, 0)
    assert r.fidelity == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("n", [2, 4, 6])
def test_ghz_random_noise(n):
    rng = np.random.default_rng(n)
    for seed in range(25):
        r = run_ghz(n, [sample_noise(rng) for _ in range(n)], rng=seed)
        assert r.fidelity >= 1 - 1e-9


def test_ghz_two_matches_two_qubit():
    rng = np.random.default_rng(8)
    for seed in range(50):
        na, nb = sample_noise(rng), sample_noise(rng)
        two = run_two_qubit(na, nb, homodyne=HomodyneModel(0.25), rng=seed)
        ghz = run_ghz(2, [na, nb], homodyne=HomodyneModel(0.25), rng=seed)
        assert two.record.reported == ghz.record.reported
        assert two.fidelity == pytest.approx(ghz.fidelity, abs=1e-12)


def test_odd_n_needs_flag():
    with pytest.raises(ParameterError, match="odd"):
        run_ghz(3, [IDENT] * 3)
    r = run_ghz(3, [IDENT] * 3, experimental_odd_n=True)
    assert 0.0 <= r.fidelity <= 1.0


def test_noise_count_must_match():
    with pytest.raises(ParameterError):
        run_ghz(4, [IDENT] * 3)
