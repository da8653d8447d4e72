"""Success rate against probe readout error, with the exact oracle alongside.

Writes homodyne_sweep.csv in the current directory.
"""

from entdist.analysis import SweepSpec, SweepVariable, homodyne_success_oracle, sweep
from entdist.records import write_sweep_csv

spec = SweepSpec(SweepVariable.HOMODYNE_ERR, (0.0, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5), 4000, seed=11)
result = sweep(spec)

print("p_err   success   +/- stderr   oracle")
for p in result.points:
    oracle, _ = homodyne_success_oracle(p.value)
    print(f"{p.value:5.2f}   {p.success_rate:7.4f}   {p.std_error:10.4f}   {oracle:6.4f}")

with open("homodyne_sweep.csv", "w", newline="") as fh:
    write_sweep_csv(fh, result)
print("wrote homodyne_sweep.csv")
