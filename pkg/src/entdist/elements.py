"""Optical elements as transformations of :class:`~entdist.state.StateVector`.

Every element acts on the photon of a single party except ``fiber_phase``,
``compensate_phase`` and ``frequency_upconvert``, which attach to
multi-photon frequency patterns.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import (
    DimensionError,
    ImproperErasureError,
    MalformedElementError,
    MeasurementOrderError,
    ParameterError,
    RoutingError,
    UpconvertedError,
)
from .state import (
    NORM_TOLERANCE,
    BasisKet,
    Frequency,
    PhotonKet,
    Polarization,
    ProbePhase,
    StateVector,
    _prune,
    apply_single_photon_map,
    multiply_where,
    norm,
    partition_measure,
)

H, V = Polarization.H, Polarization.V
W0, W1, W2 = Frequency.W0, Frequency.W1, Frequency.W2

ERASURE_TOLERANCE = 1e-9


@dataclass(frozen=True)
class NoiseParams:
    """Collective-noise rotation ``|H> -> alpha|H> + beta|V>`` for one channel."""

    alpha: complex
    beta: complex

    def __post_init__(self):
        a, b = complex(self.alpha), complex(self.beta)
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "beta", b)
        total = abs(a) ** 2 + abs(b) ** 2
        if not math.isfinite(total) or abs(total - 1.0) > NORM_TOLERANCE:
            raise ParameterError(f"|alpha|^2 + |beta|^2 = {total!r}, expected 1")

    @classmethod
    def identity(cls) -> NoiseParams:
        return cls(1.0, 0.0)

    def matrix(self) -> np.ndarray:
        """Unitary in the (H, V) basis; columns are the images of H and V."""
        a, b = self.alpha, self.beta
        return np.array([[a, -b.conjugate()], [b, a.conjugate()]], dtype=complex)


@dataclass(frozen=True)
class QndConfig:
    party: int
    monitored_mode: str
    alt_mode: str
    theta_label: ProbePhase = ProbePhase.THETA
    theta_prime_label: ProbePhase = ProbePhase.THETA_PRIME

    def __post_init__(self):
        if self.monitored_mode == self.alt_mode:
            raise MalformedElementError("QND monitored and alternate modes must differ")


@dataclass(frozen=True)
class FiberConfig:
    """Fiber lengths (m), group velocity (m/s) and the two carrier frequencies (rad/s)."""

    length_a: float = 1.0e4
    length_b: float = 1.0e4
    velocity: float = 2.0e8
    omega1: float = 2 * math.pi * 193.4e12
    omega2: float = 2 * math.pi * 193.401e12

    def __post_init__(self):
        for name in ("length_a", "length_b", "velocity", "omega1", "omega2"):
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or not math.isfinite(value) or value <= 0:
                raise ParameterError(f"{name} must be a positive finite number, got {value!r}")
        if self.omega1 == self.omega2:
            raise ParameterError("omega1 and omega2 must differ")

    @property
    def delta_phi(self) -> float:
        """Relative phase picked up by the |w2 w1> term over the two fibers."""
        w1, w2 = self.omega1, self.omega2
        return ((w2 - w1) * self.length_a + (w1 - w2) * self.length_b) / self.velocity


@dataclass(frozen=True)
class HomodyneModel:
    """Probability ``p_err`` that a probe readout reports theta and theta' swapped."""

    p_err: float = 0.0

    def __post_init__(self):
        if not (isinstance(self.p_err, (int, float)) and 0.0 <= self.p_err <= 0.5):
            raise ParameterError(f"p_err must lie in [0, 0.5], got {self.p_err!r}")


def apply_collective_noise(state: StateVector, party: int, noise: NoiseParams,
                           alphabet: frozenset[str] | None = None) -> StateVector:
    if not isinstance(noise, NoiseParams):
        raise ParameterError(f"expected NoiseParams, got {type(noise).__name__}")
    a, b = noise.alpha, noise.beta
    h_img = ((H, a), (V, b))
    v_img = ((H, -b.conjugate()), (V, a.conjugate()))

    def rule(p: PhotonKet):
        img = h_img if p.pol is H else v_img
        return [(PhotonKet(pol, p.freq, p.mode), w) for pol, w in img]

    return apply_single_photon_map(state, party, rule, alphabet)


def apply_polarization_unitary(state: StateVector, party: int, u: np.ndarray,
                               mode: str | None = None) -> StateVector:
    """Apply a 2x2 unitary in the (H, V) basis, optionally only inside ``mode``."""
    u = np.asarray(u, dtype=complex)
    if u.shape != (2, 2) or not np.allclose(u.conj().T @ u, np.eye(2), atol=1e-12):
        raise MalformedElementError("polarization map must be a 2x2 unitary")
    cols = {H: ((H, complex(u[0, 0])), (V, complex(u[1, 0]))),
            V: ((H, complex(u[0, 1])), (V, complex(u[1, 1])))}

    def rule(p: PhotonKet):
        if mode is not None and p.mode != mode:
            return [(p, 1)]
        return [(PhotonKet(pol, p.freq, p.mode), w) for pol, w in cols[p.pol] if w != 0]

    return apply_single_photon_map(state, party, rule)


def apply_pbs(state: StateVector, party: int, in_mode: str, h_out: str, v_out: str,
              alphabet: frozenset[str] | None = None) -> StateVector:
    """Polarizing beam splitter: H is transmitted to ``h_out``, V reflected to ``v_out``."""
    if h_out == v_out:
        raise MalformedElementError(f"PBS outputs must differ, both are {h_out!r}")

    def rule(p: PhotonKet):
        if p.mode != in_mode:
            return [(p, 1)]
        return [(PhotonKet(p.pol, p.freq, h_out if p.pol is H else v_out), 1)]

    return apply_single_photon_map(state, party, rule, alphabet)


def cross_kerr_qnd(state: StateVector, cfg: QndConfig) -> StateVector:
    """Couple the party's photon to its coherent probe.

    The probe label becomes ``theta`` if the photon travels the monitored
    (H) path and ``theta'`` if it travels the alternate (V) path.  A state
    without a probe register gets one ``ZERO`` label per photon first.
    """
    party = cfg.party
    if not 0 <= party < state.photon_count:
        raise MalformedElementError(f"party {party} out of range")
    probe_count = state.probe_count or state.photon_count
    out: dict[BasisKet, complex] = {}
    for ket, amp in state.items():
        probes = ket.probes or (ProbePhase.ZERO,) * probe_count
        if probes[party] is not ProbePhase.ZERO:
            raise MalformedElementError(f"probe of party {party} already carries a phase")
        mode = ket.photons[party].mode
        if mode == cfg.monitored_mode:
            label = cfg.theta_label
        elif mode == cfg.alt_mode:
            label = cfg.theta_prime_label
        else:
            raise RoutingError(
                f"photon of party {party} is in mode {mode!r}, expected "
                f"{cfg.monitored_mode!r} or {cfg.alt_mode!r}"
            )
        new = BasisKet(ket.photons, probes[:party] + (label,) + probes[party + 1:])
        out[new] = out.get(new, 0) + amp
    return StateVector._wrap(_prune(out), state.photon_count, probe_count)


_FLIP = {ProbePhase.THETA: ProbePhase.THETA_PRIME, ProbePhase.THETA_PRIME: ProbePhase.THETA}


def homodyne_measure(state: StateVector, party: int, model: HomodyneModel,
                     rng: np.random.Generator) -> tuple[ProbePhase, ProbePhase, StateVector]:
    """Read out one party's probe phase.

    Returns ``(reported, true_outcome, collapsed_state)``.  The collapse always
    follows the true outcome; the reported label is swapped with probability
    ``model.p_err``.  Exactly two draws are taken from ``rng`` on every call.
    """
    if state.probe_count == 0 or all(k.probes[party] is ProbePhase.ZERO for k in state):
        raise MeasurementOrderError(f"probe of party {party} has not interacted with a photon")
    true_outcome, collapsed = partition_measure(state, lambda k: k.probes[party], rng)
    if true_outcome is ProbePhase.ZERO:
        raise MeasurementOrderError(f"probe of party {party} still holds the unshifted label")
    flip = rng.random() < model.p_err
    reported = _FLIP[true_outcome] if flip else true_outcome
    return reported, true_outcome, collapsed


def apply_wdm(state: StateVector, party: int, in_mode: str, w1_out: str, w2_out: str,
              alphabet: frozenset[str] | None = None) -> StateVector:
    """Wavelength division multiplexer: route by frequency, ignoring polarization."""
    if w1_out == w2_out:
        raise MalformedElementError(f"WDM outputs must differ, both are {w1_out!r}")

    def rule(p: PhotonKet):
        if p.mode != in_mode:
            return [(p, 1)]
        if p.freq is W0:
            raise UpconvertedError(f"WDM in mode {in_mode!r} met an up-converted photon")
        return [(PhotonKet(p.pol, p.freq, w1_out if p.freq is W1 else w2_out), 1)]

    return apply_single_photon_map(state, party, rule, alphabet)


def apply_hwp_r90(state: StateVector, party: int, mode: str) -> StateVector:
    """Half-wave plate at 45 degrees in ``mode``: swaps H and V."""

    def rule(p: PhotonKet):
        if p.mode != mode:
            return [(p, 1)]
        return [(PhotonKet(V if p.pol is H else H, p.freq, p.mode), 1)]

    return apply_single_photon_map(state, party, rule)


PAULI_LABELS = ("I", "X", "Z", "XZ")


def apply_pauli(state: StateVector, party: int, label: str) -> StateVector:
    """Local polarization Pauli; ``XZ`` means Z first, then X."""
    if label == "I":
        return state
    if label not in PAULI_LABELS:
        raise MalformedElementError(f"unknown Pauli label {label!r}")
    flip = "X" in label
    sign_v = -1 if "Z" in label else 1

    def rule(p: PhotonKet):
        w = sign_v if p.pol is V else 1
        pol = (V if p.pol is H else H) if flip else p.pol
        return [(PhotonKet(pol, p.freq, p.mode), w)]

    return apply_single_photon_map(state, party, rule)


def _is_w2w1(ket: BasisKet) -> bool:
    return ket.photons[0].freq is W2 and ket.photons[1].freq is W1


def fiber_phase(state: StateVector, cfg: FiberConfig) -> StateVector:
    """Attach the fiber-induced relative phase to the |w2 w1> frequency term."""
    if state.photon_count != 2:
        raise DimensionError("fiber phase is defined for photon pairs")
    return multiply_where(state, _is_w2w1, cmath.exp(1j * cfg.delta_phi))


def compensate_phase(state: StateVector, cfg: FiberConfig) -> StateVector:
    """Undo ``fiber_phase``.

    While frequency labels are still present the inverse phase goes on the
    |w2 w1> term.  Once both photons are at the common frequency the phase
    lives on the |VV> polarization term and is removed there.
    """
    if state.photon_count != 2:
        raise DimensionError("fiber phase is defined for photon pairs")
    factor = cmath.exp(-1j * cfg.delta_phi)
    if all(p.freq is W0 for k in state for p in k.photons):
        return multiply_where(state, lambda k: all(p.pol is V for p in k.photons), factor)
    return multiply_where(state, _is_w2w1, factor)


def frequency_upconvert(state: StateVector, parties: Iterable[int]) -> StateVector:
    """Map the listed parties' photons to the common frequency ``W0``."""
    before = norm(state)
    out = state
    for party in parties:
        out = apply_single_photon_map(out, party, lambda p: [(PhotonKet(p.pol, W0, p.mode), 1)])
    after = norm(out)
    if abs(after - before) > ERASURE_TOLERANCE:
        raise ImproperErasureError(
            f"frequency erasure changed the norm from {before:.12g} to {after:.12g}"
        )
    return out
