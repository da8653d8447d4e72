"""Sparse state vectors over labelled photonic basis kets.

A basis ket is an ordered tuple of single-photon labels (polarization,
frequency, spatial mode), one per party, plus an optional tuple of
coherent-probe phase labels, one per monitoring party.  A
:class:`StateVector` maps basis kets to amplitudes and is never mutated
after construction; every operation returns a new state.

Amplitudes are whatever numeric type the caller supplies.  Floating point
``complex`` is the normal case, but the label-permuting elements also
preserve ``int`` and ``fractions.Fraction`` amplitudes, which the
exact-arithmetic checks rely on.
"""

from __future__ import annotations

import cmath
import math
from enum import Enum
from types import MappingProxyType
from typing import Callable, Hashable, Iterable, Iterator, Mapping, NamedTuple

import numpy as np

from .errors import (
    DimensionError,
    MalformedElementError,
    ProbeEntangledError,
    VacuumMeasurementError,
)

PRUNE_THRESHOLD = 1e-15
NORM_TOLERANCE = 1e-12


class _LabelEnum(Enum):
    # Members are singletons; identity hashing is C-level and far cheaper
    # than Enum's name-based __hash__ in the hot dict paths.
    __hash__ = object.__hash__


class Polarization(_LabelEnum):
    H = "H"
    V = "V"

    @property
    def bit(self) -> int:
        """Computational-basis value, with H as 0 and V as 1."""
        return 0 if self is Polarization.H else 1


class Frequency(_LabelEnum):
    W1 = "w1"
    W2 = "w2"
    W0 = "w0"  # common frequency after up-conversion


class ProbePhase(_LabelEnum):
    ZERO = "0"
    THETA = "theta"
    THETA_PRIME = "theta'"


class PhotonKet(NamedTuple):
    pol: Polarization
    freq: Frequency
    mode: str

    def __str__(self) -> str:
        return f"{self.pol.value}_{self.freq.value}@{self.mode}"


class BasisKet(NamedTuple):
    photons: tuple[PhotonKet, ...]
    probes: tuple[ProbePhase, ...] = ()

    def __str__(self) -> str:
        body = " ".join(str(p) for p in self.photons)
        if self.probes:
            body += " ; " + " ".join(p.value for p in self.probes)
        return f"|{body}>"


def photon(pol: Polarization | str, freq: Frequency | str, mode: str) -> PhotonKet:
    """Build a :class:`PhotonKet`, accepting enum names or values as strings."""
    if isinstance(pol, str):
        pol = Polarization[pol] if pol in Polarization.__members__ else Polarization(pol)
    if isinstance(freq, str):
        freq = Frequency[freq] if freq in Frequency.__members__ else Frequency(freq)
    return _checked_photon(PhotonKet(pol, freq, mode))


def _checked_photon(p: object, alphabet: frozenset[str] | None = None) -> PhotonKet:
    if not isinstance(p, PhotonKet):
        raise MalformedElementError(f"element produced {p!r}, not a PhotonKet")
    if not isinstance(p.pol, Polarization):
        raise MalformedElementError(f"invalid polarization label {p.pol!r}")
    if not isinstance(p.freq, Frequency):
        raise MalformedElementError(f"invalid frequency label {p.freq!r}")
    if not isinstance(p.mode, str) or not p.mode:
        raise MalformedElementError(f"invalid spatial mode {p.mode!r}")
    if alphabet is not None and p.mode not in alphabet:
        raise MalformedElementError(f"spatial mode {p.mode!r} is not in the circuit alphabet")
    return p


class StateVector:
    """Immutable sparse superposition of :class:`BasisKet` terms.

    Duplicate kets passed to the constructor have their amplitudes summed, and
    terms whose magnitude falls below ``PRUNE_THRESHOLD`` are dropped.
    """

    __slots__ = ("_terms", "photon_count", "probe_count")

    def __init__(self, terms: Mapping[BasisKet, complex] | Iterable[tuple[BasisKet, complex]]):
        items = terms.items() if isinstance(terms, Mapping) else terms
        acc: dict[BasisKet, complex] = {}
        shape: tuple[int, int] | None = None
        for ket, amp in items:
            if not isinstance(ket, BasisKet):
                raise TypeError(f"expected BasisKet, got {type(ket).__name__}")
            for p in ket.photons:
                _checked_photon(p)
            if not cmath.isfinite(complex(amp)):
                raise ValueError(f"non-finite amplitude {amp!r} on {ket}")
            ket_shape = (len(ket.photons), len(ket.probes))
            if shape is None:
                shape = ket_shape
            elif ket_shape != shape:
                raise DimensionError(
                    f"ket {ket} has shape {ket_shape}, expected {shape} (photons, probes)"
                )
            acc[ket] = acc[ket] + amp if ket in acc else amp
        if shape is None:
            raise DimensionError("a state needs at least one term to fix its photon count")
        if shape[0] < 1:
            raise DimensionError("photon count must be positive")
        self._terms = _prune(acc)
        self.photon_count, self.probe_count = shape

    @classmethod
    def _wrap(cls, terms: dict[BasisKet, complex], photon_count: int, probe_count: int) -> StateVector:
        # Internal fast path: caller guarantees labels are valid and terms pruned.
        obj = object.__new__(cls)
        obj._terms = terms
        obj.photon_count = photon_count
        obj.probe_count = probe_count
        return obj

    @property
    def terms(self) -> Mapping[BasisKet, complex]:
        return MappingProxyType(self._terms)

    def amplitude(self, ket: BasisKet) -> complex:
        return self._terms.get(ket, 0)

    def items(self):
        return self._terms.items()

    def __len__(self) -> int:
        return len(self._terms)

    def __iter__(self) -> Iterator[BasisKet]:
        return iter(self._terms)

    def __bool__(self) -> bool:
        return bool(self._terms)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, StateVector):
            return NotImplemented
        return (
            self.photon_count == other.photon_count
            and self.probe_count == other.probe_count
            and self._terms == other._terms
        )

    __hash__ = None  # type: ignore[assignment]

    def isclose(self, other: StateVector, atol: float = NORM_TOLERANCE) -> bool:
        """Term-by-term amplitude comparison (no global-phase freedom)."""
        if (self.photon_count, self.probe_count) != (other.photon_count, other.probe_count):
            return False
        keys = set(self._terms) | set(other._terms)
        return all(abs(self.amplitude(k) - other.amplitude(k)) <= atol for k in keys)

    def normalized(self) -> StateVector:
        n = norm(self)
        if n == 0:
            raise VacuumMeasurementError("cannot normalize an empty state")
        return StateVector._wrap(
            _prune({k: a / n for k, a in self._terms.items()}),
            self.photon_count,
            self.probe_count,
        )

    def __repr__(self) -> str:
        parts = [f"({_fmt(a)}){k}" for k, a in self._terms.items()]
        return "StateVector(" + " + ".join(parts) + ")"


def _fmt(a: complex) -> str:
    if isinstance(a, complex):
        return f"{a.real:.6g}{a.imag:+.6g}j"
    return str(a)


def _prune(terms: dict[BasisKet, complex]) -> dict[BasisKet, complex]:
    return {k: a for k, a in terms.items() if abs(a) >= PRUNE_THRESHOLD}


def _rebuild(state: StateVector, items: Iterable[tuple[BasisKet, complex]],
             probe_count: int | None = None) -> StateVector:
    acc: dict[BasisKet, complex] = {}
    for ket, amp in items:
        if ket in acc:
            acc[ket] += amp
        else:
            acc[ket] = amp
    return StateVector._wrap(
        _prune(acc),
        state.photon_count,
        state.probe_count if probe_count is None else probe_count,
    )


PhotonRule = Callable[[PhotonKet], Iterable[tuple[PhotonKet, complex]]]


def apply_single_photon_map(
    state: StateVector,
    party: int,
    rule: PhotonRule,
    alphabet: frozenset[str] | None = None,
) -> StateVector:
    """Replace the photon at position ``party`` in every term according to ``rule``.

    ``rule`` maps one :class:`PhotonKet` to a list of ``(PhotonKet, weight)``
    pairs.  Output kets that coincide have their amplitudes summed.  The rule
    is evaluated once per distinct input photon and each produced label is
    validated, optionally against a spatial-mode ``alphabet``.
    """
    if not 0 <= party < state.photon_count:
        raise MalformedElementError(f"party {party} out of range for {state.photon_count} photons")
    cache: dict[PhotonKet, list[tuple[PhotonKet, complex]]] = {}
    out: dict[BasisKet, complex] = {}
    for ket, amp in state._terms.items():
        src = ket.photons[party]
        images = cache.get(src)
        if images is None:
            images = [(_checked_photon(p, alphabet), w) for p, w in rule(src)]
            cache[src] = images
        for dst, w in images:
            photons = ket.photons[:party] + (dst,) + ket.photons[party + 1:]
            new = BasisKet(photons, ket.probes)
            val = amp * w
            if new in out:
                out[new] += val
            else:
                out[new] = val
    return StateVector._wrap(_prune(out), state.photon_count, state.probe_count)


def multiply_where(state: StateVector, predicate: Callable[[BasisKet], bool], factor: complex) -> StateVector:
    """Multiply the amplitude of every term satisfying ``predicate`` by ``factor``."""
    return _rebuild(state, ((k, a * factor if predicate(k) else a) for k, a in state._terms.items()))


def norm(state: StateVector) -> float:
    return math.sqrt(sum(abs(a) ** 2 for a in state._terms.values()))


def inner(target: StateVector, state: StateVector) -> complex:
    """Return ``<target|state>``, matching kets on every label."""
    if target.photon_count != state.photon_count:
        raise DimensionError(
            f"photon counts differ: {target.photon_count} vs {state.photon_count}"
        )
    small, large = (target, state) if len(target) <= len(state) else (state, target)
    total = 0
    for ket in small._terms:
        if ket in large._terms:
            total += target._terms[ket].conjugate() * state._terms[ket]
    return total


def fidelity(state: StateVector, target: StateVector, normalize: bool = False):
    """Squared overlap ``|<target|state>|^2``.

    With ``normalize=True`` the overlap is divided by both squared norms, which
    keeps the result exact when the amplitudes are rationals.
    """
    ov = inner(target, state)
    value = abs(ov) ** 2
    if normalize:
        denom = sum(abs(a) ** 2 for a in state._terms.values()) * sum(
            abs(a) ** 2 for a in target._terms.values()
        )
        value = value / denom
    if isinstance(value, float):
        value = min(value, 1.0)
    return value


def partition_weights(state: StateVector, classifier: Callable[[BasisKet], Hashable]) -> dict:
    """Exact outcome probabilities for a projective measurement.

    Outcomes are keyed in order of first appearance among the stored terms.
    """
    weights: dict = {}
    for ket, amp in state._terms.items():
        o = classifier(ket)
        weights[o] = weights.get(o, 0.0) + abs(amp) ** 2
    return weights


def partition_measure(
    state: StateVector,
    classifier: Callable[[BasisKet], Hashable],
    rng: np.random.Generator,
) -> tuple[Hashable, StateVector]:
    """Sample an outcome of ``classifier`` and collapse onto its subspace.

    Consumes exactly one ``rng.random()`` draw.
    """
    if not state._terms:
        raise VacuumMeasurementError("measurement on an empty state")
    labels: dict = {}
    for ket in state._terms:
        labels[ket] = classifier(ket)
    weights: dict = {}
    for ket, o in labels.items():
        weights[o] = weights.get(o, 0.0) + abs(state._terms[ket]) ** 2
    total = sum(weights.values())
    u = rng.random() * total
    acc = 0.0
    chosen = None
    for o, w in weights.items():
        acc += w
        chosen = o
        if u < acc:
            break
    scale = math.sqrt(weights[chosen])
    kept = {k: a / scale for k, a in state._terms.items() if labels[k] == chosen}
    return chosen, StateVector._wrap(_prune(kept), state.photon_count, state.probe_count)


def discard_probes(state: StateVector) -> StateVector:
    """Drop the probe register once every term carries the same probe labels."""
    probe_sets = {k.probes for k in state._terms}
    if len(probe_sets) > 1:
        raise ProbeEntangledError(
            f"{len(probe_sets)} distinct probe tuples remain; measure the probes first"
        )
    return StateVector._wrap(
        {BasisKet(k.photons): a for k, a in state._terms.items()},
        state.photon_count,
        0,
    )


def product_ket(photons: Iterable[PhotonKet], probes: Iterable[ProbePhase] = ()) -> BasisKet:
    return BasisKet(tuple(photons), tuple(probes))
