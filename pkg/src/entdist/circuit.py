"""Circuit-description files: per-party optical wiring as ordered element lists.

A circuit file is JSON with this layout (``schema_version`` 1)::

    {
      "schema_version": 1,
      "name": "two-qubit",
      "parties": [
        {
          "label": "A",
          "source_mode": "a",
          "routing":    [ {"element": "pbs", "in": "a", "h_out": "a2", "v_out": "a1"},
                          {"element": "qnd", "monitored": "a2", "alt": "a1"} ],
          "conversion": [ {"element": "wdm", "in": "a2", "w1_out": "c1w", "w2_out": "c2w"},
                          {"element": "hwp_r90", "mode": "c2w"},
                          {"element": "pbs", "in": "c1w", "h_out": "c2", "v_out": "c1"} ]
        }
      ]
    }

``routing`` runs after the channel noise and must contain exactly one
``qnd`` element; its ``monitored`` mode is the H path (probe picks up
theta) and ``alt`` the V path (theta').  ``conversion`` is the passive
frequency-to-polarization cell applied after the probes are read out.

Element kinds and their keys:

==========  ==========================================
``pbs``     ``in``, ``h_out``, ``v_out``
``qnd``     ``monitored``, ``alt``
``wdm``     ``in``, ``w1_out``, ``w2_out``
``hwp_r90`` ``mode``
==========  ==========================================
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property
from importlib import resources
from pathlib import Path
from string import ascii_lowercase
from typing import Any, Mapping

from .elements import QndConfig, apply_hwp_r90, apply_pbs, apply_wdm, cross_kerr_qnd
from .errors import ParameterError
from .state import BasisKet, Frequency, PhotonKet, Polarization, StateVector

SCHEMA_VERSION = 1

ELEMENT_KEYS = {
    "pbs": ("in", "h_out", "v_out"),
    "qnd": ("monitored", "alt"),
    "wdm": ("in", "w1_out", "w2_out"),
    "hwp_r90": ("mode",),
}


class CircuitError(ParameterError):
    """A circuit description is malformed."""


@dataclass(frozen=True)
class Element:
    kind: str
    ports: tuple[tuple[str, str], ...]

    def __getitem__(self, key: str) -> str:
        return dict(self.ports)[key]

    def to_dict(self) -> dict:
        return {"element": self.kind, **dict(self.ports)}


@dataclass(frozen=True)
class PartyWiring:
    label: str
    source_mode: str
    routing: tuple[Element, ...]
    conversion: tuple[Element, ...]

    @property
    def qnd(self) -> Element:
        return next(e for e in self.routing if e.kind == "qnd")

    @property
    def h_mode(self) -> str:
        """Post-routing mode of an H photon (probe reads theta)."""
        return self.qnd["monitored"]

    @property
    def v_mode(self) -> str:
        """Post-routing mode of a V photon (probe reads theta')."""
        return self.qnd["alt"]

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "source_mode": self.source_mode,
            "routing": [e.to_dict() for e in self.routing],
            "conversion": [e.to_dict() for e in self.conversion],
        }


@dataclass(frozen=True)
class Circuit:
    name: str
    parties: tuple[PartyWiring, ...]

    @property
    def n_parties(self) -> int:
        return len(self.parties)

    @cached_property
    def alphabet(self) -> frozenset[str]:
        modes = set()
        for p in self.parties:
            modes.add(p.source_mode)
            for e in p.routing + p.conversion:
                modes.update(v for _, v in e.ports)
        return frozenset(modes)

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "name": self.name,
            "parties": [p.to_dict() for p in self.parties],
        }

    def qnd_config(self, party: int) -> QndConfig:
        w = self.parties[party]
        return QndConfig(party, w.h_mode, w.v_mode)

    def route(self, state: StateVector, party: int) -> StateVector:
        return self._run(state, party, self.parties[party].routing)

    def convert(self, state: StateVector, party: int) -> StateVector:
        return self._run(state, party, self.parties[party].conversion)

    def _run(self, state: StateVector, party: int, elements) -> StateVector:
        for e in elements:
            state = apply_element(state, party, e, self.alphabet)
        return state

    @cached_property
    def _conversion_outputs(self) -> tuple[dict[Polarization, str], ...]:
        return tuple(
            {pol: self._trace_output(i, pol) for pol in Polarization}
            for i in range(self.n_parties)
        )

    def conversion_output(self, party: int, pol: Polarization) -> str:
        """Exit mode of the conversion cell for a photon routed as ``pol``.

        Found by propagating single-photon probes at both frequencies; the cell
        must send them to the same exit or it leaks which-frequency information.
        """
        return self._conversion_outputs[party][pol]

    def _trace_output(self, party: int, pol: Polarization) -> str:
        w = self.parties[party]
        entry = w.h_mode if pol is Polarization.H else w.v_mode
        exits = set()
        for freq in (Frequency.W1, Frequency.W2):
            photons = [PhotonKet(Polarization.H, Frequency.W1, p.h_mode) for p in self.parties]
            photons[party] = PhotonKet(pol, freq, entry)
            s = StateVector([(BasisKet(tuple(photons)), 1)])
            s = self.convert(s, party)
            (ket,) = s.terms
            exits.add(ket.photons[party].mode)
        if len(exits) != 1:
            raise CircuitError(
                f"party {w.label}: conversion cell sends {pol.value} photons to {sorted(exits)} "
                "depending on frequency"
            )
        return exits.pop()


def apply_element(state: StateVector, party: int, e: Element,
                  alphabet: frozenset[str] | None = None) -> StateVector:
    if e.kind == "pbs":
        return apply_pbs(state, party, e["in"], e["h_out"], e["v_out"], alphabet)
    if e.kind == "wdm":
        return apply_wdm(state, party, e["in"], e["w1_out"], e["w2_out"], alphabet)
    if e.kind == "hwp_r90":
        return apply_hwp_r90(state, party, e["mode"])
    if e.kind == "qnd":
        return cross_kerr_qnd(state, QndConfig(party, e["monitored"], e["alt"]))
    raise CircuitError(f"unknown element kind {e.kind!r}")


def _parse_element(raw: Any, where: str) -> Element:
    if not isinstance(raw, Mapping):
        raise CircuitError(f"{where}: expected an object, got {type(raw).__name__}")
    kind = raw.get("element")
    if kind not in ELEMENT_KEYS:
        raise CircuitError(f"{where}.element: unknown kind {kind!r}")
    keys = ELEMENT_KEYS[kind]
    extra = set(raw) - set(keys) - {"element"}
    if extra:
        raise CircuitError(f"{where}: unexpected keys {sorted(extra)} for {kind}")
    ports = []
    for k in keys:
        v = raw.get(k)
        if not isinstance(v, str) or not v:
            raise CircuitError(f"{where}.{k}: expected a nonempty mode name, got {v!r}")
        ports.append((k, v))
    return Element(kind, tuple(ports))


def circuit_from_dict(data: Mapping) -> Circuit:
    if not isinstance(data, Mapping):
        raise CircuitError("circuit description must be a JSON object")
    version = data.get("schema_version")
    if version != SCHEMA_VERSION:
        raise CircuitError(f"schema_version: expected {SCHEMA_VERSION}, got {version!r}")
    raw_parties = data.get("parties")
    if not isinstance(raw_parties, list) or len(raw_parties) < 2:
        raise CircuitError("parties: expected a list of at least two parties")
    parties = []
    for i, rp in enumerate(raw_parties):
        where = f"parties[{i}]"
        if not isinstance(rp, Mapping):
            raise CircuitError(f"{where}: expected an object")
        source = rp.get("source_mode")
        if not isinstance(source, str) or not source:
            raise CircuitError(f"{where}.source_mode: expected a nonempty mode name")
        stages = {}
        for stage in ("routing", "conversion"):
            items = rp.get(stage)
            if not isinstance(items, list):
                raise CircuitError(f"{where}.{stage}: expected a list of elements")
            stages[stage] = tuple(
                _parse_element(e, f"{where}.{stage}[{j}]") for j, e in enumerate(items)
            )
        if sum(e.kind == "qnd" for e in stages["routing"]) != 1:
            raise CircuitError(f"{where}.routing: needs exactly one qnd element")
        if any(e.kind == "qnd" for e in stages["conversion"]):
            raise CircuitError(f"{where}.conversion: qnd is only allowed in routing")
        label = rp.get("label", ascii_lowercase[i].upper() if i < 26 else str(i))
        parties.append(PartyWiring(str(label), source, stages["routing"], stages["conversion"]))
    circuit = Circuit(str(data.get("name", "")), tuple(parties))
    for i in range(circuit.n_parties):
        for pol in Polarization:
            circuit.conversion_output(i, pol)
    return circuit


def load_circuit(path: str | Path) -> Circuit:
    with open(path, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise CircuitError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    return circuit_from_dict(data)


def dump_circuit(circuit: Circuit, path: str | Path) -> None:
    Path(path).write_text(json.dumps(circuit.to_dict(), indent=2) + "\n", encoding="utf-8")


def two_qubit_circuit() -> Circuit:
    """The bundled Alice/Bob wiring (modes a, b, a1, a2, b1, b2, c1, c2, d1, d2)."""
    text = resources.files("entdist").joinpath("data/two_qubit.json").read_text(encoding="utf-8")
    return circuit_from_dict(json.loads(text))


def party_cell(label: str, src: str, out: str) -> dict:
    """Wiring for one party, reusing the two-party cell under new mode names."""
    return {
        "label": label,
        "source_mode": src,
        "routing": [
            {"element": "pbs", "in": src, "h_out": f"{src}2", "v_out": f"{src}1"},
            {"element": "qnd", "monitored": f"{src}2", "alt": f"{src}1"},
        ],
        "conversion": [
            {"element": "wdm", "in": f"{src}2", "w1_out": f"{out}1w", "w2_out": f"{out}2w"},
            {"element": "wdm", "in": f"{src}1", "w1_out": f"{out}1w", "w2_out": f"{out}2w"},
            {"element": "hwp_r90", "mode": f"{out}2w"},
            {"element": "pbs", "in": f"{out}1w", "h_out": f"{out}2", "v_out": f"{out}1"},
            {"element": "pbs", "in": f"{out}2w", "h_out": f"{out}1", "v_out": f"{out}2"},
        ],
    }


def ghz_circuit(n: int) -> Circuit:
    """``n`` copies of the two-party cell; party ``i`` uses source mode ``s<i>`` and exits ``o<i>_*``."""
    if n < 2:
        raise ParameterError(f"need at least two parties, got {n}")
    parties = [
        party_cell(ascii_lowercase[i].upper() if i < 26 else f"P{i}", f"s{i}_", f"o{i}_")
        for i in range(n)
    ]
    return circuit_from_dict({"schema_version": SCHEMA_VERSION, "name": f"ghz-{n}", "parties": parties})
