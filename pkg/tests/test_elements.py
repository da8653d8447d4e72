import cmath
import math
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import S, ket, state
from entdist.acceptance import random_state
from entdist.analysis import sample_noise
from entdist.errors import (
    ImproperErasureError,
    MalformedElementError,
    MeasurementOrderError,
    ParameterError,
    RoutingError,
    UpconvertedError,
)
from entdist.elements import (
    FiberConfig,
    HomodyneModel,
    NoiseParams,
    QndConfig,
    apply_collective_noise,
    apply_hwp_r90,
    apply_pauli,
    apply_pbs,
    apply_polarization_unitary,
    apply_wdm,
    compensate_phase,
    cross_kerr_qnd,
    fiber_phase,
    frequency_upconvert,
    homodyne_measure,
)
from entdist.protocols import prepare_probe_state
from entdist.state import BasisKet, ProbePhase, StateVector, norm, partition_weights

TH, TP = ProbePhase.THETA, ProbePhase.THETA_PRIME
QUARTER_WAVE = FiberConfig(length_a=10.05, length_b=10.0, velocity=2e8,
                           omega1=1.0e15, omega2=1.0e15 + 2 * math.pi * 1e9)


def photon_marginal(s: StateVector) -> dict:
    return partition_weights(s, lambda k: k.photons)


def amp_multiset(s: StateVector) -> Counter:
    return Counter(complex(round(a.real, 14), round(a.imag, 14)) for _, a in s.items())


# -- parameter objects -----------------------------------------------------------


def test_noise_params_validate():
    NoiseParams(0.6, 0.8j)
    with pytest.raises(ParameterError):
        NoiseParams(1.0, 0.1)
    m = NoiseParams(0.6, 0.8j).matrix()
    assert np.allclose(m.conj().T @ m, np.eye(2))


@pytest.mark.parametrize("field", ["length_a", "length_b", "velocity", "omega1", "omega2"])
def test_fiber_rejects_nonpositive(field):
    with pytest.raises(ParameterError, match=field):
        FiberConfig(**{field: -1.0})


def test_homodyne_range():
    with pytest.raises(ParameterError):
        HomodyneModel(0.6)


# -- collective noise --------------------------------------------------------------


def test_identity_noise_is_identity(source):
    assert apply_collective_noise(source, 0, NoiseParams.identity()) == source


def test_noise_expansion_coefficients(source, rng):
    na, nb = sample_noise(rng), sample_noise(rng)
    s = apply_collective_noise(apply_collective_noise(source, 0, na), 1, nb)
    assert len(s) == 8
    coef = {"H": {0: na.alpha, 1: nb.alpha}, "V": {0: na.beta, 1: nb.beta}}
    for pa in "HV":
        for pb in "HV":
            for fa, fb in (("W1", "W2"), ("W2", "W1")):
                k = ket((pa, fa, "a"), (pb, fb, "b"))
                assert abs(s.amplitude(k) - coef[pa][0] * coef[pb][1] * S) < 1e-12


def test_noise_preserves_norm(rng):
    for _ in range(1000):
        s = random_state(rng)
        out = apply_collective_noise(s, int(rng.integers(2)), sample_noise(rng))
        assert abs(norm(out) - 1) < 1e-12


def test_polarization_unitary_must_be_unitary(source):
    with pytest.raises(MalformedElementError):
        apply_polarization_unitary(source, 0, np.array([[1, 1], [0, 1]]))


# -- label bijections --------------------------------------------------------------


def test_pbs_examples():
    h = state((ket(("H", "W1", "a")), 1))
    v = state((ket(("V", "W1", "a")), 1))
    d = state((ket(("H", "W1", "a")), S), (ket(("V", "W1", "a")), S))
    assert apply_pbs(h, 0, "a", "a2", "a1") == state((ket(("H", "W1", "a2")), 1))
    assert apply_pbs(v, 0, "a", "a2", "a1") == state((ket(("V", "W1", "a1")), 1))
    out = apply_pbs(d, 0, "a", "a2", "a1")
    assert out == state((ket(("H", "W1", "a2")), S), (ket(("V", "W1", "a1")), S))
    assert norm(out) == pytest.approx(1)


def test_wdm_examples():
    s = state((ket(("H", "W1", "a2")), S), (ket(("H", "W2", "a2")), S))
    out = apply_wdm(s, 0, "a2", "c1w", "c2w")
    assert out == state((ket(("H", "W1", "c1w")), S), (ket(("H", "W2", "c2w")), S))
    with pytest.raises(UpconvertedError):
        apply_wdm(state((ket(("H", "W0", "a2")), 1)), 0, "a2", "x", "y")
    with pytest.raises(MalformedElementError):
        apply_wdm(s, 0, "a2", "x", "x")


def test_hwp_examples():
    h = state((ket(("H", "W1", "m")), 1))
    assert apply_hwp_r90(h, 0, "m") == state((ket(("V", "W1", "m")), 1))
    assert apply_hwp_r90(h, 0, "elsewhere") == h


@pytest.mark.parametrize("element", [
    lambda s: apply_pbs(s, 0, "a", "a2", "a1"),
    lambda s: apply_wdm(s, 0, "a", "a1", "a2"),
    lambda s: apply_hwp_r90(s, 0, "a"),
])
def test_bijections_keep_terms_and_amplitudes(element, rng):
    for _ in range(200):
        s = random_state(rng, modes=("a", "b", "x"))
        out = element(s)
        assert len(out) == len(s)
        assert amp_multiset(out) == amp_multiset(s)


def test_hwp_is_involution(rng):
    for _ in range(100):
        s = random_state(rng, modes=("a", "b"))
        assert apply_hwp_r90(apply_hwp_r90(s, 1, "b"), 1, "b") == s


@pytest.mark.parametrize("label", ["X", "Z", "XZ"])
def test_paulis_square_to_plus_minus_identity(label, rng):
    s = random_state(rng)
    twice = apply_pauli(apply_pauli(s, 0, label), 0, label)
    sign = -1 if label == "XZ" else 1
    assert twice.isclose(StateVector([(k, sign * a) for k, a in s.items()]))


# -- QND and homodyne ------------------------------------------------------------------


def routed(state_):
    return apply_pbs(apply_pbs(state_, 0, "a", "a2", "a1"), 1, "b", "b2", "b1")


def test_qnd_monitored_photon_gets_theta():
    s = state((ket(("H", "W1", "a2"), ("H", "W2", "b2")), 1))
    out = cross_kerr_qnd(s, QndConfig(0, "a2", "a1"))
    assert out.probe_count == 2
    (k,) = out.terms
    assert k.probes == (TH, ProbePhase.ZERO)
    assert k.photons == next(iter(s)).photons


def test_qnd_rejects_unexpected_mode():
    s = state((ket(("H", "W1", "zz"), ("H", "W2", "b2")), 1))
    with pytest.raises(RoutingError):
        cross_kerr_qnd(s, QndConfig(0, "a2", "a1"))


def test_qnd_four_probe_tuples(source, rng):
    na, nb = sample_noise(rng), sample_noise(rng)
    s = prepare_probe_state(na, nb)
    weights = partition_weights(s, lambda k: k.probes)
    expected = {
        (TH, TH): abs(na.alpha * nb.alpha) ** 2,
        (TP, TP): abs(na.beta * nb.beta) ** 2,
        (TH, TP): abs(na.alpha * nb.beta) ** 2,
        (TP, TH): abs(na.beta * nb.alpha) ** 2,
    }
    assert set(weights) == set(expected)
    for key, w in expected.items():
        assert abs(weights[key] - w) < 1e-12


def test_qnd_is_nondemolition(source, rng):
    for _ in range(200):
        s = routed(apply_collective_noise(apply_collective_noise(source, 0, sample_noise(rng)),
                                          1, sample_noise(rng)))
        after = cross_kerr_qnd(cross_kerr_qnd(s, QndConfig(0, "a2", "a1")), QndConfig(1, "b2", "b1"))
        before_m, after_m = photon_marginal(s), photon_marginal(after)
        assert before_m.keys() == after_m.keys()
        assert all(abs(before_m[k] - after_m[k]) < 1e-12 for k in before_m)


def test_homodyne_identity_noise_reports_theta(rng):
    s = prepare_probe_state(NoiseParams.identity(), NoiseParams.identity())
    rep_a, true_a, s = homodyne_measure(s, 0, HomodyneModel(0.0), rng)
    rep_b, true_b, s = homodyne_measure(s, 1, HomodyneModel(0.0), rng)
    assert (rep_a, rep_b, true_a, true_b) == (TH, TH, TH, TH)
    assert {k.photons[0].mode for k in s} == {"a2"}


def test_homodyne_before_qnd_is_an_error(source, rng):
    with pytest.raises(MeasurementOrderError):
        homodyne_measure(source, 0, HomodyneModel(), rng)


def test_homodyne_takes_two_draws_always():
    s = prepare_probe_state(NoiseParams(0.6, 0.8), NoiseParams(0.6, 0.8))
    for p in (0.0, 0.3):
        a, b = np.random.default_rng(4), np.random.default_rng(4)
        homodyne_measure(s, 0, HomodyneModel(p), a)
        b.random(2)
        assert a.random() == b.random()


def test_homodyne_frequencies_within_four_sigma():
    na = NoiseParams(math.sqrt(0.3), math.sqrt(0.7) * 1j)
    s = prepare_probe_state(na, NoiseParams.identity())
    rng = np.random.default_rng(77)
    n = 100_000
    hits = sum(homodyne_measure(s, 0, HomodyneModel(), rng)[0] is TH for _ in range(n))
    p = 0.3
    assert abs(hits / n - p) < 4 * math.sqrt(p * (1 - p) / n)


def test_homodyne_half_error_decorrelates_report():
    s = prepare_probe_state(NoiseParams(S, S), NoiseParams.identity())
    rng = np.random.default_rng(78)
    rep, tru = [], []
    for _ in range(100_000):
        r, t, _ = homodyne_measure(s, 0, HomodyneModel(0.5), rng)
        rep.append(r is TH)
        tru.append(t is TH)
    assert abs(np.corrcoef(rep, tru)[0, 1]) < 0.02


# -- fiber phase and frequency erasure --------------------------------------------------


def test_equal_lengths_give_no_phase(source):
    cfg = FiberConfig(length_a=5.0, length_b=5.0)
    assert cfg.delta_phi == 0
    assert fiber_phase(source, cfg).isclose(source)


def test_quarter_wave_example(source):
    assert QUARTER_WAVE.delta_phi == pytest.approx(math.pi / 2, rel=1e-6)
    out = fiber_phase(source, QUARTER_WAVE)
    k21 = ket(("H", "W2", "a"), ("H", "W1", "b"))
    assert cmath.phase(out.amplitude(k21)) == pytest.approx(math.pi / 2, rel=1e-6)


def test_compensation_inverts_fiber_phase(rng):
    cfg = FiberConfig(length_a=10.3, length_b=10.0)
    for _ in range(100):
        s = random_state(rng)
        assert compensate_phase(fiber_phase(s, cfg), cfg).isclose(s)


def test_compensation_on_upconverted_bell():
    dphi = QUARTER_WAVE.delta_phi
    hh, vv = ket(("H", "W0", "c"), ("H", "W0", "d")), ket(("V", "W0", "c"), ("V", "W0", "d"))
    phased = state((hh, S), (vv, S * cmath.exp(1j * dphi)))
    assert compensate_phase(phased, QUARTER_WAVE).isclose(state((hh, S), (vv, S)))


def test_fiber_phase_commutes_with_routing(rng):
    cfg = FiberConfig(length_a=10.3, length_b=10.0)
    for _ in range(200):
        s = random_state(rng, modes=("a", "b", "x"))
        for el in (lambda t: apply_pbs(t, 0, "a", "a2", "a1"),
                   lambda t: apply_wdm(t, 1, "b", "b1", "b2")):
            assert el(fiber_phase(s, cfg)).isclose(fiber_phase(el(s), cfg))


def test_upconvert_phi1_branch():
    s = state((ket(("H", "W1", "c2"), ("V", "W2", "d2")), S),
              (ket(("V", "W2", "c2"), ("H", "W1", "d2")), S))
    out = frequency_upconvert(s, (0, 1))
    assert out == state((ket(("H", "W0", "c2"), ("V", "W0", "d2")), S),
                        (ket(("V", "W0", "c2"), ("H", "W0", "d2")), S))
    assert frequency_upconvert(out, (0, 1)) == out


def test_upconvert_collision_raises():
    s = state((ket(("H", "W1", "c"), ("H", "W2", "d")), S),
              (ket(("H", "W2", "c"), ("H", "W1", "d")), -S))
    with pytest.raises(ImproperErasureError):
        frequency_upconvert(s, (0, 1))


@settings(max_examples=200, deadline=None)
@given(st.floats(0, 2 * math.pi), st.floats(0, 2 * math.pi), st.floats(0, math.pi / 2))
def test_noise_norm_property(phi_a, phi_b, angle):
    nz = NoiseParams(math.cos(angle) * cmath.exp(1j * phi_a), math.sin(angle) * cmath.exp(1j * phi_b))
    s = StateVector([(BasisKet((p,)), 1) for p in ket(("H", "W1", "a")).photons])
    assert abs(norm(apply_collective_noise(s, 0, nz)) - 1) < 1e-12
