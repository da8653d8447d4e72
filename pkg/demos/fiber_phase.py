"""Unequal fiber lengths put a phase on |VV>; the parties can remove it."""

import math

import numpy as np

from entdist.analysis import sample_noise
from entdist.elements import FiberConfig
from entdist.protocols import run_two_qubit

rng = np.random.default_rng(3)
noise = (sample_noise(rng), sample_noise(rng))
base = dict(velocity=2e8, omega1=1.0e15, omega2=1.0e15 + 2 * math.pi * 1e9, length_b=1000.0)

print("L_A - L_B [m]   dphi/pi   raw fidelity   cos^2(dphi/2)   compensated")
for diff in (0.0, 0.025, 0.05, 0.1, 0.2):
    fiber = FiberConfig(length_a=1000.0 + diff, **base)
    raw = run_two_qubit(*noise, fiber, rng=1, compensate=False).fidelity
    fixed = run_two_qubit(*noise, fiber, rng=1).fidelity
    expect = math.cos(fiber.delta_phi / 2) ** 2
    print(f"{diff:13.3f}   {fiber.delta_phi / math.pi:7.3f}   {raw:12.6f}   {expect:13.6f}   {fixed:11.6f}")
