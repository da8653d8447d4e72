"""Load a circuit file, inspect it, and run the pipeline on it.

The bundled wiring is dumped to JSON, renamed, and loaded back, which is
the route for trying an alternative optical layout.
"""

import json
import tempfile
from pathlib import Path

from entdist.circuit import load_circuit, two_qubit_circuit
from entdist.elements import NoiseParams
from entdist.protocols import run_two_qubit
from entdist.state import Polarization

data = two_qubit_circuit().to_dict()
data["name"] = "my-lab-bench"
path = Path(tempfile.mkdtemp()) / "bench.json"
path.write_text(json.dumps(data, indent=2))

circuit = load_circuit(path)
for i, party in enumerate(circuit.parties):
    exits = {pol.value: circuit.conversion_output(i, pol) for pol in Polarization}
    print(f"party {party.label}: source {party.source_mode}, conversion exits {exits}")

report = run_two_qubit(NoiseParams(0.6, 0.8j), NoiseParams(0.8, -0.6), rng=5, circuit=circuit)
print(f"outcome {report.record.outcome.name}, fidelity {report.fidelity:.12f}")
