"""Three things a native multi-qubit phase gate buys you.

A triangle of pi-phases is a logical Z for the bit-flip code; one
ancilla-controlled multi-target phase measures a joint parity in a single
shot; and a ladder of such gates interleaved with Hadamards reverses a
register in linearly many steps instead of quadratically many swaps.
"""

import numpy as np

from dotgates import consecutive_ones_parity, logical_z_triangle, order_reversal
from dotgates.circuits import check_parity_run, pauli_string, run_cycle_unit

print("=" * 72)
print("1. Triangle logical Z: sign flip on every majority-one state")
print("=" * 72)

gate = logical_z_triangle()
diag = np.round(np.exp(1j * gate.values).real).astype(int)
for n in range(8):
    print(f"  |{n:03b}>  ->  {'+' if diag[n] > 0 else '-'}|{n:03b}>")
xxx = pauli_string(3, {0: "X", 1: "X", 2: "X"})
g = np.diag(np.exp(1j * gate.values))
print(f"anticommutes with the joint bit flip X X X: "
      f"max |GX + XG| = {np.max(np.abs(g @ xxx + xxx @ g)):.1e}")

print()
print("=" * 72)
print("2. Single-shot parity checks")
print("=" * 72)

rng = np.random.default_rng(7)
for basis in ("z", "x"):
    worst = 0.0
    for _ in range(100):
        psi = rng.normal(size=16) + 1j * rng.normal(size=16)
        psi /= np.linalg.norm(psi)
        outcome, defect = check_parity_run(4, basis, psi, rng)
        worst = max(worst, defect)
    print(f"  joint {basis.upper()}-parity of 4 qubits, 100 random states: "
          f"worst post-state eigenvalue defect {worst:.1e}")
print("  (one entangling gate per check; the two-qubit-gate circuit needs four)")

bell = np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2)
outcomes = [run_cycle_unit(bell, np.random.default_rng(seed))[1] for seed in range(10)]
print(f"  surface-code unit cell on a Bell pair: outcomes always {outcomes[0]}")

print()
print("=" * 72)
print("3. Fast register reversal")
print("=" * 72)

n = 4
r = order_reversal(n)
print(f"{n}-qubit reversal from {n} chain gates (vs {n * (n - 1) // 2} swaps):")
print(np.round(r.real).astype(int))
print("signs follow the count of adjacent 1-pairs in the bit string:")
for bits in ("00010", "01110", "00110", "01111"):
    sign = consecutive_ones_parity(bits)
    pairs = sum(1 for a, b in zip(bits, bits[1:]) if a == b == "1")
    print(f"  {bits}: {pairs} adjacent pair(s)  ->  {'+' if sign > 0 else '-'}1")
