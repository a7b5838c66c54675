"""Exact and perturbative dynamics of the dot array.

The computational Hamiltonian splits into a diagonal Zeeman part and an
exchange part assembled from one projector per bond onto the entangled
state ``(s* |uu> + t* |ud> - t |du> + s |dd>) / sqrt(2)``.  The
qubit-frame propagator ``exp(+i tau H0) exp(-i tau (H0 + Hex))`` is
computed by Hermitian eigendecomposition; its first-order approximation is
the diagonal gate ``exp(+i tau Lambda)`` with Lambda the grid vector.

The difference is coherent error, quantified by the average gate fidelity,
a perturbative lower bound, per-state residue phases, the leaked
population, and an optimally compensated residue obtained from a
pseudoinverse fit over the free-phase column space.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .basis import bit_table, wrap_pm_pi
from .calibrate import PulseSchedule
from .gates import FreePhase, PhaseVector
from .model import Bond, Dot, DotArray, grid_vector


class EigensolverFailure(RuntimeError):
    """Dense Hermitian eigendecomposition did not converge."""


class DegenerateSpectrum(RuntimeError):
    """Coupled levels too close for the perturbative treatment."""


def entangled_state(bond: Bond) -> np.ndarray:
    """Normalized bond state (s*, t*, -t, s)/sqrt(2) on (uu, ud, du, dd)."""
    t, s = bond.t, bond.s
    return np.array([np.conj(s), np.conj(t), -t, s]) / np.sqrt(2.0)


@dataclass(frozen=True)
class HamiltonianPair:
    """Diagonal dot part and dense Hermitian exchange part."""

    h0: np.ndarray
    h_ex: np.ndarray


def _embed_projector_add(h: np.ndarray, xi: np.ndarray, weight: float, j: int, k: int, n: int):
    """Add weight * |xi><xi| (acting on dots j, k) into the dense matrix."""
    dim = 1 << n
    idx = np.arange(dim)
    bits_j = (idx >> (n - 1 - j)) & 1
    bits_k = (idx >> (n - 1 - k)) & 1
    sub = 2 * bits_j + bits_k
    rest = idx - (bits_j << (n - 1 - j)) - (bits_k << (n - 1 - k))
    order = np.lexsort((sub, rest))
    grouped = idx[order].reshape(dim // 4, 4)  # rows share the spectator bits
    proj = weight * np.outer(xi, np.conj(xi))
    for a in range(4):
        for b in range(4):
            h[grouped[:, a], grouped[:, b]] += proj[a, b]


def build_hamiltonian(array: DotArray) -> HamiltonianPair:
    """Dot and exchange Hamiltonians in the computational basis.

    ``h0`` holds the Zeeman diagonal ``sum_j (-1)^{b_j} eps_j / 2`` (bit 0 is
    spin up); ``h_ex`` accumulates ``-J_w`` times the embedded projector on
    each bond's entangled state, so its diagonal is minus the grid vector.
    """
    n = array.n_dots
    bits = bit_table(n)
    h0 = ((1 - 2 * bits) @ array.zeemans) / 2.0
    h_ex = np.zeros((1 << n, 1 << n), dtype=complex)
    for bond in array.bonds:
        _embed_projector_add(h_ex, entangled_state(bond), -bond.exchange, bond.j, bond.k, n)
    return HamiltonianPair(h0=h0, h_ex=h_ex)


def _eigh(matrix: np.ndarray):
    try:
        return np.linalg.eigh(matrix)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - numpy rarely fails
        raise EigensolverFailure(str(exc)) from exc


def _expm_herm(matrix: np.ndarray, scale: complex) -> np.ndarray:
    """exp(scale * matrix) for Hermitian matrix via eigendecomposition."""
    evals, evecs = _eigh(matrix)
    return (evecs * np.exp(scale * evals)) @ evecs.conj().T


def qubit_frame_evolution(array: DotArray, tau: float) -> np.ndarray:
    """Exact propagator ``exp(+i tau H0) exp(-i tau (H0 + Hex))``."""
    if tau < 0:
        raise ValueError("tau must be nonnegative")
    pair = build_hamiltonian(array)
    h = np.diag(pair.h0).astype(complex) + pair.h_ex
    u = _expm_herm(h, -1j * tau)
    return (np.exp(1j * tau * pair.h0)[:, None]) * u


def ideal_evolution(array: DotArray, tau: float) -> PhaseVector:
    """First-order diagonal gate: phases ``tau * Lambda``."""
    if tau < 0:
        raise ValueError("tau must be nonnegative")
    return PhaseVector(tau * grid_vector(array))


def unitarity_defect(u: np.ndarray) -> float:
    dim = u.shape[0]
    return float(np.max(np.abs(u.conj().T @ u - np.eye(dim))))


def average_gate_fidelity(u: np.ndarray, v_diag: PhaseVector) -> float:
    """``F = (d + |tr(U^dag V)|^2) / (d (d + 1))`` for diagonal V.

    Only the diagonal of U enters the trace product.
    """
    d = u.shape[0]
    if v_diag.values.shape[0] != d:
        raise ValueError("dimension mismatch")
    tr = np.sum(np.conj(np.diag(u)) * np.exp(1j * v_diag.values))
    return float((d + np.abs(tr) ** 2) / (d * (d + 1)))


def fidelity_lower_bound(residues, leak: float) -> float:
    """``1 - 2d/(d+1) max|phi_n| - 4/(d+1) sum (1 - r_nn)``."""
    residues = np.asarray(residues, dtype=float)
    d = residues.shape[0]
    return float(1.0 - (2.0 * d / (d + 1.0)) * np.max(np.abs(residues)) - (4.0 / (d + 1.0)) * leak)


@dataclass(frozen=True)
class MatchedSpectrum:
    """Perturbed eigensystem matched to the computational basis."""

    energies_0: np.ndarray     # unperturbed Zeeman energies E_n
    energies: np.ndarray       # matched perturbed energies E'_n
    overlaps: np.ndarray       # r_nn = |<n|n'>|^2
    first_order: np.ndarray    # <n|Hex|n>

    @property
    def leak(self) -> float:
        return float(np.sum(1.0 - self.overlaps))

    def energy_shift_residues(self, tau: float) -> np.ndarray:
        """tau * (dE_n - dE_n^(1)), folded to (-pi, pi]."""
        shift = self.energies - self.energies_0 - self.first_order
        return wrap_pm_pi(tau * shift)


def match_eigenstates(array: DotArray, min_overlap: float = 0.5) -> MatchedSpectrum:
    """Pair perturbed eigenstates with basis states by maximal overlap.

    Pairs are assigned greedily by descending overlap with deterministic
    index tie-breaking; an overlap below ``min_overlap`` signals a
    non-perturbative spectrum and raises :class:`DegenerateSpectrum`.
    """
    pair = build_hamiltonian(array)
    h = np.diag(pair.h0).astype(complex) + pair.h_ex
    evals, evecs = _eigh(h)
    return _match_from(pair, evals, evecs, min_overlap)


def _match_from(pair, evals, evecs, min_overlap: float) -> MatchedSpectrum:
    weights = np.abs(evecs) ** 2  # weights[n, m] = |<n|m'>|^2
    dim = weights.shape[0]
    order = np.argsort(-weights, axis=None, kind="stable")
    basis_of = np.full(dim, -1)
    eig_of = np.full(dim, -1)
    assigned = 0
    for flat in order:
        n, m = divmod(int(flat), dim)
        if basis_of[n] >= 0 or eig_of[m] >= 0:
            continue
        basis_of[n] = m
        eig_of[m] = n
        assigned += 1
        if assigned == dim:
            break
    overlaps = weights[np.arange(dim), basis_of]
    if np.min(overlaps) < min_overlap:
        worst = int(np.argmin(overlaps))
        raise DegenerateSpectrum(
            f"state {worst} overlaps its eigenvector by only {overlaps[worst]:.3f}; "
            "the spectrum is outside the perturbative regime"
        )
    return MatchedSpectrum(
        energies_0=pair.h0.copy(),
        energies=evals[basis_of],
        overlaps=overlaps,
        first_order=np.real(np.diag(pair.h_ex)),
    )


def diagonal_residues(u: np.ndarray, ideal: PhaseVector) -> np.ndarray:
    """arg(U_nn e^{-i tau Lambda_n}) folded to (-pi, pi]."""
    return wrap_pm_pi(np.angle(np.diag(u)) - ideal.values)


@dataclass(frozen=True)
class SecondOrder:
    """Leading perturbative residue phases and leaked population."""

    phi: np.ndarray
    leak: float


def perturbation_second_order(
    array: DotArray, tau: float, gap_threshold: float | None = None
) -> SecondOrder:
    """Second-order energy residues and leak from the exchange coupling.

    ``phi_n = tau sum_{m != n} |<n|Hex|m>|^2 / (E_n - E_m)`` and
    ``leak = sum_{n != m} |<n|Hex|m>|^2 / (E_n - E_m)^2`` over the
    unperturbed Zeeman energies.

    Raises
    ------
    DegenerateSpectrum
        If a coupled pair of levels sits closer than ``gap_threshold``
        (default ten times the total exchange energy).
    """
    pair = build_hamiltonian(array)
    if gap_threshold is None:
        gap_threshold = 10.0 * sum(b.exchange for b in array.bonds)
    v = pair.h_ex - np.diag(np.diag(pair.h_ex))
    gaps = pair.h0[:, None] - pair.h0[None, :]
    coupled = np.abs(v) > 1e-14
    bad = coupled & (np.abs(gaps) < gap_threshold)
    if np.any(bad):
        n, m = np.argwhere(bad)[0]
        raise DegenerateSpectrum(
            f"levels {int(n)} and {int(m)} are coupled but separated by only "
            f"{abs(gaps[n, m]):.3e} (threshold {gap_threshold:.3e})"
        )
    weight = np.abs(v) ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(coupled, weight / gaps, 0.0)
        ratio2 = np.where(coupled, weight / gaps**2, 0.0)
    return SecondOrder(phi=tau * ratio.sum(axis=1), leak=float(ratio2.sum()))


def free_phase_design_matrix(n_qubits: int) -> np.ndarray:
    """Columns: all-ones (global phase) then the bit indicator of each qubit."""
    bits = bit_table(n_qubits)
    return np.column_stack([np.ones(1 << n_qubits), bits.astype(float)])


@dataclass(frozen=True)
class PhaseCorrection:
    free: FreePhase
    post: np.ndarray


def optimal_phase_correction(residues, n_qubits: int) -> PhaseCorrection:
    """Least-norm free-phase compensation of residue phases.

    With K the free-phase design matrix, ``y = pinv(K) residues`` and the
    compensated residues ``residues - K y`` have minimal Euclidean norm over
    all free-phase shifts.
    """
    residues = np.asarray(residues, dtype=float)
    k = free_phase_design_matrix(n_qubits)
    y = np.linalg.pinv(k) @ residues
    post = residues - k @ y
    return PhaseCorrection(free=FreePhase(y[0], y[1:]), post=post)


def pulsed_evolution(array: DotArray, schedule: PulseSchedule) -> np.ndarray:
    """Exact qubit-frame propagator of a staged, pulsed evolution.

    Stages evolve under the full Hamiltonian for their duration and each
    boundary pulse is applied as an explicit Pauli operator; the final
    frame rotation uses the total elapsed time.
    """
    pair = build_hamiltonian(array)
    h = np.diag(pair.h0).astype(complex) + pair.h_ex
    evals, evecs = _eigh(h)
    dim = h.shape[0]
    u = np.eye(dim, dtype=complex)
    for stage in schedule.stages:
        if stage.duration > 0:
            step = (evecs * np.exp(-1j * stage.duration * evals)) @ evecs.conj().T
            u = step @ u
        if stage.pulse is not None:
            u = stage.pulse.matrix() @ u
    return (np.exp(1j * schedule.total_time * pair.h0)[:, None]) * u


@dataclass(frozen=True)
class SimReport:
    """Exact-versus-ideal comparison for one evolution."""

    u_exact: np.ndarray
    u_ideal: PhaseVector
    fidelity: float
    bound: float
    residues: np.ndarray
    leak: float
    correction: FreePhase
    post_residues: np.ndarray

    @property
    def max_residue(self) -> float:
        return float(np.max(np.abs(self.residues)))

    @property
    def max_post_residue(self) -> float:
        return float(np.max(np.abs(self.post_residues)))

    def to_json(self) -> str:
        doc = {
            "fidelity": self.fidelity,
            "bound": self.bound,
            "leak": self.leak,
            "residues": list(map(float, self.residues)),
            "max_residue": self.max_residue,
            "correction": {
                "global": self.correction.global_phase,
                "local": list(self.correction.local),
            },
            "post_residues": list(map(float, self.post_residues)),
            "max_post_residue": self.max_post_residue,
            "u_exact_diag_phase": list(map(float, np.angle(np.diag(self.u_exact)))),
            "u_ideal": list(map(float, self.u_ideal.values)),
        }
        return json.dumps(doc, indent=2)


def simulate_gate(array: DotArray, tau: float) -> SimReport:
    """Run the exact evolution and assemble the fidelity accounting."""
    if tau < 0:
        raise ValueError("tau must be nonnegative")
    pair = build_hamiltonian(array)
    h = np.diag(pair.h0).astype(complex) + pair.h_ex
    evals, evecs = _eigh(h)  # shared by the propagator and the matching
    u = (np.exp(1j * tau * pair.h0)[:, None]) * (
        (evecs * np.exp(-1j * tau * evals)) @ evecs.conj().T
    )
    ideal = PhaseVector(-tau * np.real(np.diag(pair.h_ex)))
    fid = average_gate_fidelity(u, ideal)
    spectrum = _match_from(pair, evals, evecs, 0.5)
    residues = diagonal_residues(u, ideal)
    leak = spectrum.leak
    bound = fidelity_lower_bound(residues, leak)
    corr = optimal_phase_correction(residues, array.n_dots)
    return SimReport(
        u_exact=u,
        u_ideal=ideal,
        fidelity=fid,
        bound=bound,
        residues=residues,
        leak=leak,
        correction=corr.free,
        post_residues=corr.post,
    )


def scaled_zeeman_array(array: DotArray, j_over_eps: float) -> DotArray:
    """Copy of the array with Zeeman energies rescaled so the largest
    exchange energy divided by the smallest Zeeman equals ``j_over_eps``."""
    j_max = max(b.exchange for b in array.bonds)
    eps_min = min(d.zeeman for d in array.dots)
    factor = (j_max / j_over_eps) / eps_min
    dots = [Dot(d.id, d.zeeman * factor, d.chem_potential) for d in array.dots]
    return DotArray(dots, array.bonds)


def sweep_rows(array: DotArray, tau: float, grid) -> list[tuple[float, float, float, float]]:
    """(J/eps, infidelity, bound, max residue) rows over a coupling sweep."""
    rows = []
    for x in grid:
        scaled = scaled_zeeman_array(array, float(x))
        report = simulate_gate(scaled, tau)
        rows.append((float(x), 1.0 - report.fidelity, report.bound, report.max_residue))
    return rows
