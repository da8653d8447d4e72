"""Acceptance criteria with fixed seeds, shared by the test suite and ``entdist verify``.

Each criterion returns a :class:`CriterionResult`.  Expected values are
computed here by independent means (hand-coded branch tables, direct
coefficient products, closed-form phases) rather than read back from the
code paths under test.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, replace
from fractions import Fraction
from itertools import product
from typing import Callable

import numpy as np

from . import protocols
from .analysis import (
    SweepSpec,
    SweepVariable,
    ghz_outcome_distribution_check,
    homodyne_success_oracle,
    iter_two_qubit_trials,
    outcome_distribution_check,
    run_monte_carlo,
    sample_noise,
    sweep,
)
from .elements import (
    FiberConfig,
    HomodyneModel,
    NoiseParams,
    QndConfig,
    apply_collective_noise,
    apply_hwp_r90,
    apply_pauli,
    apply_pbs,
    apply_wdm,
    compensate_phase,
    cross_kerr_qnd,
    fiber_phase,
    frequency_upconvert,
    homodyne_measure,
)
from .protocols import (
    Outcome,
    apply_correction,
    conversion_network,
    correction_for,
    derive_correction_table,
    make_two_photon_source,
    prepare_probe_state,
    run_ghz,
    run_two_qubit,
)
from .state import (
    BasisKet,
    Frequency,
    PhotonKet,
    Polarization,
    StateVector,
    discard_probes,
    fidelity,
    norm,
    partition_weights,
)

H, V = Polarization.H, Polarization.V
W0, W1, W2 = Frequency.W0, Frequency.W1, Frequency.W2
SQRT_HALF = 1 / math.sqrt(2)

# Branch polarizations and modes as stated for the two-party setup.
PAPER_BRANCHES = {
    Outcome.PHI1: ((H, H), ("a2", "b2")),
    Outcome.PHI2: ((V, V), ("a1", "b1")),
    Outcome.PHI3: ((H, V), ("a2", "b1")),
    Outcome.PHI4: ((V, H), ("a1", "b2")),
}

# Converted branches: ((pol_a, freq_a, pol_b, freq_b) per term, exit modes).
PAPER_CONVERTED = {
    Outcome.PHI1: ([(H, W1, V, W2), (V, W2, H, W1)], ("c2", "d2")),
    Outcome.PHI2: ([(V, W1, H, W2), (H, W2, V, W1)], ("c1", "d1")),
    Outcome.PHI3: ([(H, W1, H, W2), (V, W2, V, W1)], ("c2", "d1")),
    Outcome.PHI4: ([(V, W1, V, W2), (H, W2, H, W1)], ("c1", "d2")),
}


@dataclass(frozen=True)
class CriterionResult:
    id: str
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.id} {self.name}: {self.detail}"


def _haar_pairs(seed: int, count: int) -> list[tuple[NoiseParams, NoiseParams]]:
    rng = np.random.default_rng(seed)
    return [(sample_noise(rng), sample_noise(rng)) for _ in range(count)]


def _branch_state(outcome: Outcome, amplitude=SQRT_HALF) -> StateVector:
    (pa, pb), (ma, mb) = PAPER_BRANCHES[outcome]
    return StateVector([
        (BasisKet((PhotonKet(pa, W1, ma), PhotonKet(pb, W2, mb))), amplitude),
        (BasisKet((PhotonKet(pa, W2, ma), PhotonKet(pb, W1, mb))), amplitude),
    ])


def _bell(modes, amplitude=SQRT_HALF, phase=0.0) -> StateVector:
    second = amplitude * complex(math.cos(phase), math.sin(phase)) if phase else amplitude
    return StateVector([
        (BasisKet(tuple(PhotonKet(H, W0, m) for m in modes)), amplitude),
        (BasisKet(tuple(PhotonKet(V, W0, m) for m in modes)), second),
    ])


def random_state(rng: np.random.Generator, n_photons: int = 2,
                 modes: tuple[str, ...] = ("a", "a1", "a2", "c1w", "c2w"),
                 freqs: tuple[Frequency, ...] = (W1, W2),
                 max_terms: int = 8) -> StateVector:
    """Random normalized superposition over a small label alphabet."""
    k = int(rng.integers(1, max_terms + 1))
    terms = []
    for _ in range(k):
        photons = tuple(
            PhotonKet(
                (H, V)[rng.integers(2)],
                freqs[rng.integers(len(freqs))],
                modes[rng.integers(len(modes))],
            )
            for _ in range(n_photons)
        )
        terms.append((BasisKet(photons), complex(rng.standard_normal(), rng.standard_normal())))
    return StateVector(terms).normalized()


# -- criteria --------------------------------------------------------------------


def c1_noise_independence() -> CriterionResult:
    start = time.perf_counter()
    fiber = FiberConfig(length_a=1.0e4, length_b=1.0e4)
    reports = list(iter_two_qubit_trials(1000, HomodyneModel(0.0), fiber, seed=101))
    elapsed = time.perf_counter() - start
    worst = min(r.fidelity for r in reports)
    rate = sum(r.success for r in reports) / len(reports)
    ok = worst >= 1 - 1e-9 and rate == 1.0 and elapsed < 10.0
    return CriterionResult("C1", "noise independence", ok,
                           f"1000 Haar trials, min fidelity {worst:.15f}, success rate {rate}, "
                           f"{elapsed:.2f} s")


def c2_noisy_expansion() -> CriterionResult:
    worst = 0.0
    ok = True
    for na, nb in _haar_pairs(202, 100):
        out = apply_collective_noise(apply_collective_noise(make_two_photon_source(), 0, na), 1, nb)
        coef = {H: na.alpha, V: na.beta}, {H: nb.alpha, V: nb.beta}
        expected = {}
        for (fa, fb), pa, pb in product([(W1, W2), (W2, W1)], (H, V), (H, V)):
            ket = BasisKet((PhotonKet(pa, fa, "a"), PhotonKet(pb, fb, "b")))
            expected[ket] = coef[0][pa] * coef[1][pb] / math.sqrt(2)
        if set(out.terms) != set(expected) or len(out) != 8:
            ok = False
            break
        worst = max(worst, max(abs(out.amplitude(k) - v) for k, v in expected.items()))
    ok = ok and worst <= 1e-12
    return CriterionResult("C2", "noisy eight-term expansion", ok,
                           f"100 draws, max coefficient error {worst:.3e}")


def c3_outcome_routing() -> CriterionResult:
    worst = 0.0
    for na, nb in _haar_pairs(303, 100):
        a, b, d, g = na.alpha, na.beta, nb.alpha, nb.beta
        analytic = {Outcome.PHI1: abs(a * d) ** 2, Outcome.PHI2: abs(b * g) ** 2,
                    Outcome.PHI3: abs(a * g) ** 2, Outcome.PHI4: abs(b * d) ** 2}
        table = outcome_distribution_check(na, nb)
        worst = max(worst, max(abs(table[o][0] - analytic[o]) for o in Outcome))
        worst = max(worst, abs(sum(t[0] for t in table.values()) - 1.0))
    misrouted = 0
    model = HomodyneModel(0.0)
    for i, (na, nb) in enumerate(_haar_pairs(304, 1000)):
        rng = np.random.default_rng([304, i])
        state = prepare_probe_state(na, nb)
        ra, _, state = homodyne_measure(state, 0, model, rng)
        rb, _, state = homodyne_measure(state, 1, model, rng)
        outcome = protocols.identify_outcome(ra, rb)
        expected = PAPER_BRANCHES[outcome][1]
        if any(tuple(p.mode for p in k.photons) != expected for k in discard_probes(state)):
            misrouted += 1
    ok = worst <= 1e-12 and misrouted == 0
    return CriterionResult("C3", "outcome routing and distribution", ok,
                           f"max weight error {worst:.3e}, misrouted {misrouted}/1000")


def c4_conversion_and_correction() -> CriterionResult:
    problems = []
    for outcome in Outcome:
        converted = conversion_network(_branch_state(outcome), outcome)
        terms, modes = PAPER_CONVERTED[outcome]
        expected = StateVector([
            (BasisKet((PhotonKet(pa, fa, modes[0]), PhotonKet(pb, fb, modes[1]))), SQRT_HALF)
            for pa, fa, pb, fb in terms
        ])
        if converted != expected:
            problems.append(f"{outcome.name} conversion")
        exact = conversion_network(_branch_state(outcome, Fraction(1)), outcome)
        exact = apply_correction(frequency_upconvert(exact, (0, 1)), correction_for(outcome))
        if fidelity(exact, _bell(modes, Fraction(1)), normalize=True) != 1:
            problems.append(f"{outcome.name} correction")
    if derive_correction_table() != {o: correction_for(o) for o in Outcome}:
        problems.append("table differs from brute-force derivation")
    ok = not problems
    return CriterionResult("C4", "conversion network and correction soundness", ok,
                           "all four branches exact" if ok else "; ".join(problems))


def c5_ghz() -> CriterionResult:
    rng = np.random.default_rng(505)
    worst_fid, worst_w = 1.0, 0.0
    for t in range(200):
        noises = [sample_noise(rng) for _ in range(4)]
        rep = run_ghz(4, noises, HomodyneModel(0.0), rng=5050 + t)
        worst_fid = min(worst_fid, rep.fidelity)
        table = ghz_outcome_distribution_check(noises)
        for bits, (sim, _) in table.items():
            analytic = 1.0
            for nz, j in zip(noises, bits):
                analytic *= abs(nz.alpha if j == 0 else nz.beta) ** 2
            worst_w = max(worst_w, abs(sim - analytic))
    bits_of = {Outcome.PHI1: (0, 0), Outcome.PHI2: (1, 1), Outcome.PHI3: (0, 1), Outcome.PHI4: (1, 0)}
    mismatches = 0
    for i, (na, nb) in enumerate(_haar_pairs(506, 200)):
        model = HomodyneModel((0.0, 0.3)[i % 2])
        two = run_two_qubit(na, nb, FiberConfig(), model, rng=i)
        ghz = run_ghz(2, [na, nb], model, rng=i)
        if (bits_of[two.record.outcome] != ghz.record.outcome
                or abs(two.fidelity - ghz.fidelity) > 1e-12 or two.success != ghz.success):
            mismatches += 1
    ok = worst_fid >= 1 - 1e-9 and worst_w <= 1e-12 and mismatches == 0
    return CriterionResult(
        "C5", "GHZ pipeline", ok,
        f"n=4 min fidelity {worst_fid:.15f}, max weight error {worst_w:.3e}, "
        f"n=2 vs two-qubit mismatches {mismatches}/200",
    )


def c6_fiber_phase() -> CriterionResult:
    problems = []
    if FiberConfig(length_a=2500.0, length_b=2500.0).delta_phi != 0.0:
        problems.append("equal arms do not give zero phase")
    w1 = 2 * math.pi * 193.4e12
    cfg = FiberConfig(length_a=1000.05, length_b=1000.0, velocity=2e8,
                      omega1=w1, omega2=w1 + 2 * math.pi * 1e9)
    if abs(cfg.delta_phi - math.pi / 2) > 1e-9:
        problems.append(f"hand value: got {cfg.delta_phi!r}, want pi/2")
    pairs = _haar_pairs(606, 30)
    for k, diff in enumerate((0.01, 0.05, 0.13)):
        fiber = replace(cfg, length_a=cfg.length_b + diff)
        dphi = (2 * math.pi * 1e9) * diff / 2e8
        want = math.cos(dphi / 2) ** 2
        for i, (na, nb) in enumerate(pairs[10 * k:10 * k + 10]):
            raw = run_two_qubit(na, nb, fiber, HomodyneModel(0.0), rng=i, compensate=False)
            fixed = run_two_qubit(na, nb, fiber, HomodyneModel(0.0), rng=i, compensate=True)
            if abs(raw.fidelity - want) > 1e-9:
                problems.append(f"uncompensated {diff} m: {raw.fidelity} vs {want}")
            if fixed.fidelity < 1 - 1e-9:
                problems.append(f"compensated {diff} m: {fixed.fidelity}")
    ok = not problems
    return CriterionResult("C6", "fiber phase and compensation", ok,
                           "formula, cos^2 law and compensation hold" if ok else "; ".join(problems[:3]))


def c7_worst_case_discrimination(trials: int = 100_000, mid_trials: int = 20_000) -> CriterionResult:
    ends = sweep(SweepSpec(SweepVariable.HOMODYNE_ERR, (0.0, 0.5), trials, seed=707))
    mids = sweep(SweepSpec(SweepVariable.HOMODYNE_ERR, (0.1, 0.25), mid_trials, seed=708))
    p0, p5 = ends.points
    ok = p0.success_rate == 1.0 and abs(p5.success_rate - 0.25) <= 0.01
    detail = [f"p=0: {p0.success_rate}", f"p=0.5: {p5.success_rate:.5f}"]
    for p in mids.points:
        want, _ = homodyne_success_oracle(p.value)
        sigma = math.sqrt(want * (1 - want) / p.trials)
        within = abs(p.success_rate - want) <= 4 * sigma
        ok = ok and within
        detail.append(f"p={p.value}: {p.success_rate:.5f} vs oracle {want:.5f}")
    return CriterionResult("C7", "worst-case discrimination", ok, ", ".join(detail))


def _element_zoo(rng: np.random.Generator) -> list[Callable[[StateVector], StateVector]]:
    # Relabeling elements are bijections only on states whose photons avoid their exit modes.
    nz = sample_noise(rng)
    party = int(rng.integers(2))
    fiber = FiberConfig(length_a=float(rng.uniform(1, 2)), length_b=1.0)
    return [
        lambda s: apply_collective_noise(s, party, nz),
        lambda s: apply_pbs(s, party, "a", "a2", "a1"),
        lambda s: apply_wdm(s, party, "a", "c1w", "c2w"),
        lambda s: apply_hwp_r90(s, party, "a"),
        lambda s: apply_pauli(s, party, ("X", "Z", "XZ")[rng.integers(3)]),
        lambda s: fiber_phase(s, fiber),
        lambda s: compensate_phase(s, fiber),
    ]


def c8_properties() -> CriterionResult:
    rng = np.random.default_rng(808)
    worst_norm = worst_complete = worst_qnd = 0.0
    for _ in range(1000):
        s = random_state(rng, modes=("a", "b", "x"))
        for element in _element_zoo(rng):
            worst_norm = max(worst_norm, abs(norm(element(s)) - 1.0))
        parity = lambda k: (k.photons[0].pol, k.photons[1].freq)  # noqa: E731
        worst_complete = max(worst_complete, abs(sum(partition_weights(s, parity).values()) - 1.0))
        routed = random_state(rng, modes=("a1", "a2"))
        qnd = cross_kerr_qnd(routed, QndConfig(0, "a2", "a1"))
        marginal = partition_weights(qnd, lambda k: k.photons)
        before = partition_weights(routed, lambda k: k.photons)
        worst_qnd = max(worst_qnd, max(abs(marginal[k] - w) for k, w in before.items()))
    first = run_monte_carlo(300, HomodyneModel(0.2), FiberConfig(), seed=809)
    second = run_monte_carlo(300, HomodyneModel(0.2), FiberConfig(), seed=809)
    a = [r.record for r in iter_two_qubit_trials(50, HomodyneModel(0.3), FiberConfig(), 810)]
    b = [r.record for r in iter_two_qubit_trials(50, HomodyneModel(0.3), FiberConfig(), 810)]
    deterministic = first == second and a == b
    ok = worst_norm <= 1e-12 and worst_complete <= 1e-12 and worst_qnd <= 1e-12 and deterministic
    return CriterionResult(
        "C8", "property suites", ok,
        f"norm drift {worst_norm:.2e}, completeness {worst_complete:.2e}, "
        f"QND marginal drift {worst_qnd:.2e}, deterministic {deterministic}",
    )


CRITERIA: dict[str, Callable[[], CriterionResult]] = {
    "C1": c1_noise_independence,
    "C2": c2_noisy_expansion,
    "C3": c3_outcome_routing,
    "C4": c4_conversion_and_correction,
    "C5": c5_ghz,
    "C6": c6_fiber_phase,
    "C7": c7_worst_case_discrimination,
    "C8": c8_properties,
}


NAMES = {
    "C1": "noise independence",
    "C2": "noisy eight-term expansion",
    "C3": "outcome routing and distribution",
    "C4": "conversion network and correction soundness",
    "C5": "GHZ pipeline",
    "C6": "fiber phase and compensation",
    "C7": "worst-case discrimination",
    "C8": "property suites",
}


def run_criterion(cid: str) -> CriterionResult:
    try:
        return CRITERIA[cid]()
    except Exception as exc:  # a crash is a failure of that criterion, not of the run
        return CriterionResult(cid, NAMES[cid], False, f"raised {type(exc).__name__}: {exc}")


def run_acceptance(only: list[str] | None = None, echo: Callable[[str], None] | None = None):
    results = []
    for cid in only or list(CRITERIA):
        res = run_criterion(cid)
        if echo:
            echo(res.line())
        results.append(res)
    return results
