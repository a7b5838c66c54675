"""Diagonal-gate calculus: feasibility, phase gauges, times, decomposition.

A diagonal multi-qubit gate is a phase vector over the computational
basis, defined modulo a *free phase*: one global phase plus a virtual-Z
angle per qubit.  For controlled-phase targets (first half of the phase
vector zero, qubit 0 the control) the free-phase condition splits into

* the parity rule, a signed linear system ``L phi = theta mod 2pi`` on the
  local phases, which decides whether the gate is reachable at all, and
* the dynamics rule, per-bond conditions ``tau * Delta_w = phi_w`` on a
  phase lattice, which fixes the evolution times an array geometry admits.

Two lattice conventions are in circulation, differing by a factor of
two (``mod pi`` against ``mod 2pi``), and they realize different gates;
both are computed and reported so the exact simulator can arbitrate which
times realize a given target.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .basis import (
    TWO_PI,
    bit_table,
    circular_distance,
    single_bit_index,
    wrap_2pi,
)
from .model import DotArray, grid_vector

DEFAULT_TOL = 1e-9


class NoBondVelocity(ValueError):
    """A bond with zero effective velocity cannot realize a nonzero phase."""


@dataclass(frozen=True)
class PhaseVector:
    """Length-2^N vector of phases, canonicalized to [0, 2pi)."""

    values: np.ndarray

    def __init__(self, values):
        arr = wrap_2pi(np.asarray(values, dtype=float)).copy()
        n = arr.shape[0]
        if arr.ndim != 1 or n & (n - 1) or n < 2:
            raise ValueError("phase vector length must be a power of two, >= 2")
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)

    @property
    def n_qubits(self) -> int:
        return int(self.values.shape[0]).bit_length() - 1

    @classmethod
    def zeros(cls, n_qubits: int) -> "PhaseVector":
        return cls(np.zeros(1 << n_qubits))

    def reduced(self) -> np.ndarray:
        """Second half (control qubit excited), for controlled-type gates."""
        half = self.values.shape[0] // 2
        top = self.values[:half]
        if np.max(circular_distance(top, 0.0)) > 1e-7:
            raise ValueError("not a controlled-type gate: first half is not zero")
        return self.values[half:].copy()

    def distance(self, other: "PhaseVector") -> float:
        return float(np.max(circular_distance(self.values, other.values)))

    def equals(self, other: "PhaseVector", tol: float = DEFAULT_TOL) -> bool:
        return self.distance(other) <= tol

    def shifted(self, free: "FreePhase") -> "PhaseVector":
        return PhaseVector(self.values + free.expand().values)


@dataclass(frozen=True)
class FreePhase:
    """Global phase plus one virtual-Z phase per qubit."""

    global_phase: float
    local: tuple[float, ...]

    def __init__(self, global_phase: float = 0.0, local: Sequence[float] = ()):
        object.__setattr__(self, "global_phase", float(global_phase))
        object.__setattr__(self, "local", tuple(float(x) for x in local))

    @property
    def n_qubits(self) -> int:
        return len(self.local)

    def expand(self) -> PhaseVector:
        """Phase at index n is ``global + sum_j b_j(n) local_j``."""
        bits = bit_table(self.n_qubits)
        return PhaseVector(self.global_phase + bits @ np.asarray(self.local))

    def combine(self, other: "FreePhase") -> "FreePhase":
        if len(self.local) != len(other.local):
            raise ValueError("qubit counts differ")
        return FreePhase(
            self.global_phase + other.global_phase,
            tuple(a + b for a, b in zip(self.local, other.local)),
        )


@dataclass(frozen=True)
class MqcpFactor:
    """One control dot applying independent conditional phases to targets."""

    control: int
    targets: tuple[tuple[int, float], ...]

    def __init__(self, control: int, targets: Iterable[tuple[int, float]]):
        tgts = tuple((int(d), float(wrap_2pi(th))) for d, th in targets)
        ids = [d for d, _ in tgts]
        if len(set(ids)) != len(ids) or int(control) in ids:
            raise ValueError("target ids must be distinct and differ from the control")
        object.__setattr__(self, "control", int(control))
        object.__setattr__(self, "targets", tgts)


@dataclass(frozen=True)
class GateSpec:
    """Target gate: either a product of controlled-phase factors or raw phases."""

    factors: tuple[MqcpFactor, ...] | None = None
    raw: PhaseVector | None = None

    def __post_init__(self):
        if (self.factors is None) == (self.raw is None):
            raise ValueError("specify exactly one of factors or raw")

    def expand(self, n_qubits: int | None = None) -> PhaseVector:
        if self.raw is not None:
            if n_qubits is not None and self.raw.n_qubits != n_qubits:
                raise ValueError("raw phase vector size does not match qubit count")
            return self.raw
        if n_qubits is None:
            n_qubits = 1 + max(
                max([f.control] + [d for d, _ in f.targets]) for f in self.factors
            )
        bits = bit_table(n_qubits)
        total = np.zeros(1 << n_qubits)
        for f in self.factors:
            for dot, theta in f.targets:
                total += theta * bits[:, f.control] * bits[:, dot]
        return PhaseVector(total)

    @classmethod
    def from_json(cls, source: str | dict) -> "GateSpec":
        doc = json.loads(source) if isinstance(source, str) else source
        if "raw" in doc:
            return cls(raw=PhaseVector(np.asarray(doc["raw"], dtype=float)))
        factors = tuple(
            MqcpFactor(f["control"], [(t["dot"], t["theta"]) for t in f["targets"]])
            for f in doc["factors"]
        )
        return cls(factors=factors)

    def to_json(self) -> str:
        if self.raw is not None:
            return json.dumps({"raw": list(self.raw.values)})
        return json.dumps(
            {
                "factors": [
                    {
                        "control": f.control,
                        "targets": [{"dot": d, "theta": th} for d, th in f.targets],
                    }
                    for f in self.factors
                ]
            },
            indent=2,
        )


@dataclass(frozen=True)
class ParitySolution:
    feasible: bool
    free: FreePhase | None
    residual: float


def parity_matrix(n_qubits: int) -> np.ndarray:
    """Signed matrix mapping (phi_c, phi_1, .., phi_{N-1}) to the reduced
    gate vector: the row for target bits a is (-1, (-1)^a_1, ..)."""
    if n_qubits < 2:
        raise ValueError("need at least two qubits")
    rows = 1 << (n_qubits - 1)
    mat = np.empty((rows, n_qubits), dtype=np.int64)
    mat[:, 0] = -1
    bits = bit_table(n_qubits - 1)
    mat[:, 1:] = 1 - 2 * bits
    return mat


def _parity_residual(theta_g: np.ndarray, phi: np.ndarray, lmat: np.ndarray) -> float:
    return float(np.max(circular_distance(theta_g, lmat @ phi)))


def solve_parity(theta_g, n_qubits: int, tol: float = DEFAULT_TOL) -> ParitySolution:
    """Solve the parity rule ``L phi = theta_g mod 2pi`` or report infeasibility.

    Candidate local phases come from the all-zero and single-bit rows:
    ``phi_j = (theta(0) - theta(e_j)) / 2`` and the control phase is fixed
    by row zero.  Row zero is then exact by construction and shifting any
    target phase by pi changes no residual, so the only remaining branch is
    a global pi offset on the control phase; both are checked against every
    row.
    """
    theta_g = wrap_2pi(np.asarray(theta_g, dtype=float))
    if theta_g.shape != (1 << (n_qubits - 1),):
        raise ValueError("reduced gate vector must have length 2^(N-1)")
    lmat = parity_matrix(n_qubits)
    n_targets = n_qubits - 1
    phi = np.zeros(n_qubits)
    for j in range(n_targets):
        e_j = single_bit_index(j, n_targets)
        phi[1 + j] = 0.5 * (theta_g[0] - theta_g[e_j])
    phi[0] = np.sum(phi[1:]) - theta_g[0]
    best_phi, best_res = phi, _parity_residual(theta_g, phi, lmat)
    alt = phi.copy()
    alt[0] += np.pi
    alt_res = _parity_residual(theta_g, alt, lmat)
    if alt_res < best_res:
        best_phi, best_res = alt, alt_res
    if best_res > tol:
        return ParitySolution(False, None, best_res)
    free = FreePhase(0.0, wrap_2pi(best_phi))
    return ParitySolution(True, free, best_res)


def mqcp_phase_solution(factor: MqcpFactor, n_qubits: int) -> FreePhase:
    """Closed-form local phases for a one-control multi-target gate.

    ``phi_j = -theta_j / 2 (mod pi)`` on each target and
    ``phi_c = sum_j phi_j (mod 2pi)`` on the control.
    """
    local = np.zeros(n_qubits)
    for dot, theta in factor.targets:
        local[dot] = np.mod(-0.5 * theta, np.pi)
    local[factor.control] = wrap_2pi(
        sum(local[dot] for dot, _ in factor.targets)
    )
    return FreePhase(0.0, local)


@dataclass(frozen=True)
class ControlAnalysis:
    second_control: bool
    control_qubit: int | None
    degenerate_two_qubit: bool


def assert_single_control(theta_g, tol: float = 1e-7) -> ControlAnalysis:
    """Detect whether a second qubit also acts as a control.

    Qubit j (among the targets) is a second control when the gate leaves
    every state with that qubit in |0> untouched.  Such gates either reduce
    to a two-qubit controlled phase (the conditioned block is a constant
    phase) or are rejected by parity.
    """
    theta_g = wrap_2pi(np.asarray(theta_g, dtype=float))
    m = theta_g.shape[0]
    n_targets = m.bit_length() - 1
    bits = bit_table(n_targets)
    for j in range(n_targets):
        off = theta_g[bits[:, j] == 0]
        if np.max(circular_distance(off, 0.0)) <= tol:
            on = theta_g[bits[:, j] == 1]
            constant = bool(np.max(circular_distance(on, on[0])) <= tol)
            return ControlAnalysis(True, j, constant)
    return ControlAnalysis(False, None, False)


@dataclass(frozen=True)
class TimeCandidate:
    tau: float
    per_bond_residual: tuple[float, ...]
    max_residual: float


@dataclass(frozen=True)
class DynamicsCandidates:
    """Candidate gate times on the two superposed phase lattices."""

    mod_pi: tuple[TimeCandidate, ...]
    mod_2pi: tuple[TimeCandidate, ...]

    def best(self, branch: str = "mod_pi") -> TimeCandidate:
        cands = getattr(self, branch)
        if not cands:
            raise ValueError(f"no candidate times on branch {branch!r}")
        return cands[0]


def _detect_stellar_control(array: DotArray) -> int:
    common = set(range(array.n_dots))
    for b in array.bonds:
        common &= {b.j, b.k}
    if not common:
        raise ValueError(
            "array is not stellar; pass the control dot explicitly or use "
            "per-bond calibration targets"
        )
    return min(common)


def _scan_lattice(
    velocities: np.ndarray,
    phases: np.ndarray,
    modulus: float,
    tau_max: float,
    tol: float,
    max_candidates: int = 10_000,
) -> tuple[TimeCandidate, ...]:
    pieces = []
    for delta, phi in zip(velocities, phases):
        if abs(delta) < 1e-15:
            if circular_distance(phi, 0.0, modulus) > tol:
                raise NoBondVelocity(
                    "a zero-velocity bond cannot accumulate the requested phase"
                )
            continue
        # lattice points t = (phi + m * modulus) / delta inside (0, tau_max]
        x_lo, x_hi = sorted((0.0, tau_max * delta))
        m_lo = int(np.ceil((x_lo - phi) / modulus - 1e-12))
        m_hi = int(np.floor((x_hi - phi) / modulus + 1e-12))
        pts = (phi + modulus * np.arange(m_lo, m_hi + 1)) / delta
        pieces.append(pts[(pts > 1e-15) & (pts <= tau_max * (1.0 + 1e-12))])
    if not pieces:
        return ()
    times = np.sort(np.concatenate(pieces))
    keep = np.concatenate([[True], np.diff(times) > 1e-12])
    times = times[keep]
    residuals = circular_distance(np.outer(times, velocities), phases, modulus)
    worst = residuals.max(axis=1)
    order = np.lexsort((times, np.round(worst, 12)))[:max_candidates]
    return tuple(
        TimeCandidate(
            float(times[i]),
            tuple(float(r) for r in residuals[i]),
            float(worst[i]),
        )
        for i in order
    )


def solve_dynamics(
    array: DotArray,
    free: FreePhase,
    tau_max: float,
    control: int | None = None,
    tol: float = DEFAULT_TOL,
) -> DynamicsCandidates:
    """Score candidate gate times against each bond's phase condition.

    The per-bond phase target is the free-phase solution on the bond's
    non-control endpoint.  Candidates are the union of all per-bond lattice
    points up to ``tau_max``, scored by the worst per-bond deviation; exact
    hits exist when velocities are mutually rational.  The ``mod_pi`` branch
    solves ``tau Delta_w = phi_w (mod pi)``; the ``mod_2pi`` branch solves
    ``tau Delta_w = 2 phi_w (mod 2pi)`` and is reported alongside because
    the two conventions differ by a factor of two and realize different
    gates (exact simulation arbitrates which times hit a given target).
    """
    if control is None:
        control = _detect_stellar_control(array)
    velocities = np.array([b.velocity for b in array.bonds])
    phases = []
    for b in array.bonds:
        if control not in (b.j, b.k):
            raise ValueError(f"bond ({b.j}, {b.k}) is not incident to control {control}")
        other = b.k if b.j == control else b.j
        phases.append(free.local[other])
    phases = np.asarray(phases)
    return DynamicsCandidates(
        mod_pi=_scan_lattice(velocities, np.mod(phases, np.pi), np.pi, tau_max, tol),
        mod_2pi=_scan_lattice(velocities, wrap_2pi(2.0 * phases), TWO_PI, tau_max, tol),
    )


def decompose_intrinsic(array: DotArray, tau: float) -> tuple[GateSpec, FreePhase]:
    """Split the ideal evolution at time tau into per-bond controlled-phase
    factors plus local phase corrections.

    Each bond contributes a controlled-phase of angle ``-2 tau Delta_w``;
    the correction on dot j is the sum of ``tau Delta_w`` over bonds at j
    (independent of how bonds are grouped into stars), and the global phase
    collects ``tau S_w``.
    """
    if tau < 0:
        raise ValueError("tau must be nonnegative")
    factors = []
    local = np.zeros(array.n_dots)
    global_phase = 0.0
    for b in array.bonds:
        theta = wrap_2pi(-2.0 * tau * b.velocity)
        factors.append(MqcpFactor(b.j, [(b.k, theta)]))
        local[b.j] += tau * b.velocity
        local[b.k] += tau * b.velocity
        global_phase += tau * b.spin_flip_rate
    corrections = FreePhase(wrap_2pi(global_phase), wrap_2pi(local))
    return GateSpec(factors=tuple(factors)), corrections


def equiv_up_to_free_phase(
    u: PhaseVector, target: PhaseVector, tol: float = DEFAULT_TOL
) -> tuple[bool, FreePhase, float]:
    """Decide whether two diagonal gates differ only by a free phase.

    The candidate global phase is read at index 0 and the per-qubit phases
    at the single-bit indices; all 2^N rows are then verified and the worst
    deviation returned.
    """
    if u.n_qubits != target.n_qubits:
        raise ValueError("phase vectors have different sizes")
    n = u.n_qubits
    delta = wrap_2pi(u.values - target.values)
    global_phase = delta[0]
    local = np.array(
        [wrap_2pi(delta[single_bit_index(j, n)] - global_phase) for j in range(n)]
    )
    free = FreePhase(global_phase, local)
    residual = float(np.max(circular_distance(delta, free.expand().values)))
    return residual <= tol, free, residual


def ideal_gate_vector(array: DotArray, tau: float) -> PhaseVector:
    """Phases ``tau * Lambda`` accumulated by the ideal evolution."""
    return PhaseVector(tau * grid_vector(array))
