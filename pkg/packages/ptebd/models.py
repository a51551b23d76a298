# packages/ptebd/models.py
"""
System models and initial states.

Qubit models use the Pauli convention sigma_z|0> = |0>. The spin chain stores
spin up as bit 1, so S^z = diag(-1/2, 1/2) and the occupation n_i = S^z_i + 1/2 is
the bit value itself. Sites are 1-based everywhere in this module.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, NamedTuple, Protocol, Sequence, Tuple, runtime_checkable

import numpy as np

from .bath import SpectralDensity, bose_occupation
from .errors import ArgumentError
from .liouville import embed, pure_state

logger = logging.getLogger(__name__)

IDENTITY = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)

# chain spin operators, bit 1 = spin up
SPIN_X = 0.5 * SIGMA_X
SPIN_Y = -0.5 * SIGMA_Y
SPIN_Z = np.diag([-0.5, 0.5]).astype(complex)

INV_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@runtime_checkable
class SystemModel(Protocol):
    n_sites: int
    local_dim: int
    time_dependent: bool

    def site_hamiltonian(self, site: int, t: float = 0.0) -> np.ndarray: ...

    def bond_hamiltonian(self, site: int, t: float = 0.0) -> np.ndarray: ...

    def coupling_operator(self, site: int) -> np.ndarray: ...

    def hamiltonian(self, t: float = 0.0) -> np.ndarray: ...


class _LocalTerms:
    """Dense Hamiltonian assembled from site and nearest-neighbour bond terms."""

    local_dim = 2
    time_dependent = False

    def _check_site(self, site: int) -> None:
        if not 1 <= site <= self.n_sites:
            raise ArgumentError(f"site {site} outside 1..{self.n_sites}")

    def hamiltonian(self, t: float = 0.0) -> np.ndarray:
        n, d = self.n_sites, self.local_dim
        h = np.zeros((d ** n, d ** n), dtype=complex)
        for i in range(1, n + 1):
            h += embed(self.site_hamiltonian(i, t), i, n, d)
        for i in range(1, n):
            left = np.eye(d ** (i - 1))
            right = np.eye(d ** (n - i - 1))
            h += np.kron(np.kron(left, self.bond_hamiltonian(i, t)), right)
        return h


# ------------ Two-qubit model ------------
@dataclass(frozen=True)
class TwoQubitModel(_LocalTerms):
    """H = sum_a omega_a/2 sigma_z^a + J sigma_x^1 sigma_x^2; each qubit couples via sigma_x."""

    omega1: float = 1.0
    omega2: float = 1.0
    J: float = 0.375
    n_sites: int = field(default=2, init=False)

    def site_hamiltonian(self, site: int, t: float = 0.0) -> np.ndarray:
        self._check_site(site)
        omega = self.omega1 if site == 1 else self.omega2
        return 0.5 * omega * SIGMA_Z

    def bond_hamiltonian(self, site: int, t: float = 0.0) -> np.ndarray:
        if site != 1:
            raise ArgumentError(f"two-qubit model has a single bond, got {site}")
        return self.J * np.kron(SIGMA_X, SIGMA_X)

    def coupling_operator(self, site: int) -> np.ndarray:
        self._check_site(site)
        return SIGMA_X


@dataclass(frozen=True)
class SpinBosonModel(_LocalTerms):
    """H = epsilon/2 sigma_z + delta/2 sigma_x; the bath couples through sigma_z."""

    epsilon: float = 1.0
    delta: float = 1.0
    n_sites: int = field(default=1, init=False)

    def site_hamiltonian(self, site: int = 1, t: float = 0.0) -> np.ndarray:
        self._check_site(site)
        return 0.5 * self.epsilon * SIGMA_Z + 0.5 * self.delta * SIGMA_X

    def bond_hamiltonian(self, site: int, t: float = 0.0) -> np.ndarray:
        raise ArgumentError("a single qubit has no bonds")

    def coupling_operator(self, site: int = 1) -> np.ndarray:
        self._check_site(site)
        return SIGMA_Z


# ------------ Aubry-André chain ------------
def _is_commensurate(beta: float) -> bool:
    frac = Fraction(beta).limit_denominator(12)
    return abs(float(frac) - beta) < 1e-12


def aa_potential(h: float, beta: float, i: int) -> float:
    """h cos(2 pi beta i) for 1-based site i."""
    if i < 1:
        raise ArgumentError(f"site index must be >= 1, got {i}")
    if _is_commensurate(beta):
        logger.warning("beta=%g is commensurate; the potential is periodic, not quasi-periodic", beta)
    return h * math.cos(2.0 * math.pi * beta * i)


@dataclass(frozen=True)
class AAChainModel(_LocalTerms):
    """
    Open XXZ chain in a quasi-periodic field:
    H = sum_i J (Sx Sx + Sy Sy) + Delta Sz Sz - sum_i h_i Sz_i,  h_i = h cos(2 pi beta i).

    ``origin`` is the chain index of site 1, so a sub-chain cut from a longer chain keeps
    its potential. Baths couple through S^z at ``coupled_sites``.
    """

    n_sites: int = 8
    J: float = 1.0
    Delta: float = 1.0
    h: float = 0.0
    beta: float = INV_GOLDEN
    coupled_sites: Tuple[int, ...] = (1,)
    origin: int = 1

    def __post_init__(self) -> None:
        if self.n_sites < 1:
            raise ArgumentError(f"chain needs at least one site, got {self.n_sites}")
        if self.origin < 1:
            raise ArgumentError(f"origin must be >= 1, got {self.origin}")
        for s in self.coupled_sites:
            self._check_site(s)
        if _is_commensurate(self.beta):
            logger.warning("beta=%g is commensurate with the lattice", self.beta)

    def site_field(self, site: int) -> float:
        self._check_site(site)
        return self.h * math.cos(2.0 * math.pi * self.beta * (self.origin + site - 1))

    def site_hamiltonian(self, site: int, t: float = 0.0) -> np.ndarray:
        return -self.site_field(site) * SPIN_Z

    def bond_hamiltonian(self, site: int, t: float = 0.0) -> np.ndarray:
        if not 1 <= site < self.n_sites:
            raise ArgumentError(f"bond {site} outside 1..{self.n_sites - 1}")
        return self.J * (np.kron(SPIN_X, SPIN_X) + np.kron(SPIN_Y, SPIN_Y)) + self.Delta * np.kron(SPIN_Z, SPIN_Z)

    def coupling_operator(self, site: int) -> np.ndarray:
        self._check_site(site)
        return SPIN_Z

    def magnetization(self) -> np.ndarray:
        return sum(embed(SPIN_Z, i, self.n_sites) for i in range(1, self.n_sites + 1))


# ------------ Driven qubits ------------
@dataclass(frozen=True)
class DrivenQubitModel(_LocalTerms):
    """H(t) = omega/2 sigma_z + Lambda sin(Omega t)/2 sigma_x; couples via sigma_z."""

    omega: float = 1.0
    Lambda: float = 50.0
    Omega: float = 10.0
    n_sites: int = field(default=1, init=False)
    time_dependent = True

    @property
    def max_drive_frequency(self) -> float:
        return abs(self.Omega) if self.Lambda else 0.0

    def drive(self, t: float) -> float:
        return self.Lambda * math.sin(self.Omega * t)

    def site_hamiltonian(self, site: int = 1, t: float = 0.0) -> np.ndarray:
        self._check_site(site)
        return 0.5 * self.omega * SIGMA_Z + 0.5 * self.drive(t) * SIGMA_X

    def bond_hamiltonian(self, site: int, t: float = 0.0) -> np.ndarray:
        raise ArgumentError("a single qubit has no bonds")

    def coupling_operator(self, site: int = 1) -> np.ndarray:
        self._check_site(site)
        return SIGMA_Z


@dataclass(frozen=True)
class UncoupledQubits(_LocalTerms):
    """Independent qubits side by side (no bond terms), each with its own drive."""

    qubits: Tuple[DrivenQubitModel, ...] = (DrivenQubitModel(), DrivenQubitModel())

    @property
    def n_sites(self) -> int:
        return len(self.qubits)

    @property
    def time_dependent(self) -> bool:
        return any(q.time_dependent for q in self.qubits)

    @property
    def max_drive_frequency(self) -> float:
        return max(q.max_drive_frequency for q in self.qubits)

    def site_hamiltonian(self, site: int, t: float = 0.0) -> np.ndarray:
        self._check_site(site)
        return self.qubits[site - 1].site_hamiltonian(1, t)

    def bond_hamiltonian(self, site: int, t: float = 0.0) -> np.ndarray:
        return np.zeros((4, 4), dtype=complex)

    def coupling_operator(self, site: int) -> np.ndarray:
        self._check_site(site)
        return self.qubits[site - 1].coupling_operator(1)


def hamiltonian(model: SystemModel, t: float = 0.0) -> np.ndarray:
    if t < 0:
        raise ArgumentError(f"time must be >= 0, got {t}")
    return model.hamiltonian(t)


# ------------ Initial states ------------
def basis_state(bits: str) -> np.ndarray:
    """Density matrix of a computational basis state; site 1 is the leftmost bit."""
    if not bits or set(bits) - {"0", "1"}:
        raise ArgumentError(f"basis state must be a string of 0/1, got {bits!r}")
    psi = np.zeros(2 ** len(bits), dtype=complex)
    psi[int(bits, 2)] = 1.0
    return pure_state(psi)


def bell_state() -> np.ndarray:
    psi = np.zeros(4, dtype=complex)
    psi[0] = psi[3] = 1.0 / math.sqrt(2.0)
    return pure_state(psi)


def ground_state(model: SystemModel, t: float = 0.0) -> np.ndarray:
    w, v = np.linalg.eigh(model.hamiltonian(t))
    if w.size > 1 and abs(w[1] - w[0]) < 1e-10:
        logger.warning("ground state is degenerate; taking the first eigenvector")
    return pure_state(v[:, 0])


def _bits_to_vector(bits: Sequence[int]) -> np.ndarray:
    psi = np.zeros(2 ** len(bits), dtype=complex)
    psi[int("".join(str(b) for b in bits), 2)] = 1.0
    return psi


def neel_bell_state(n_sites: int) -> np.ndarray:
    """
    (|1 x 1> + |0 x 0>)/sqrt(2) with x the interior Néel pattern (even sites up).

    >>> np.flatnonzero(neel_bell_state(8)).tolist() == [int('01010100', 2), int('11010101', 2)]
    True
    """
    if n_sites < 4 or n_sites % 2:
        raise ArgumentError(f"neel_bell_state needs an even N >= 4, got {n_sites}")
    interior = [1 if i % 2 == 0 else 0 for i in range(2, n_sites)]
    return (_bits_to_vector([1] + interior + [1]) + _bits_to_vector([0] + interior + [0])) / math.sqrt(2.0)


def buffer_bell_state(n_sites: int, pair: Tuple[int, int]) -> np.ndarray:
    """Bell pair (|00> + |11>)/sqrt(2) on two adjacent sites, every other site in |0>."""
    a, b = pair
    if not (1 <= a < n_sites and b == a + 1):
        raise ArgumentError(f"buffer pair must be adjacent sites inside 1..{n_sites}, got {pair}")
    zeros = [0] * n_sites
    ones = list(zeros)
    ones[a - 1] = ones[b - 1] = 1
    return (_bits_to_vector(zeros) + _bits_to_vector(ones)) / math.sqrt(2.0)


# ------------ Resonance analysis ------------
class Transition(NamedTuple):
    omega: float
    weight: float
    matrix_element: float


@dataclass(frozen=True)
class ResonanceReport:
    transitions: List[Transition]
    total_flux: float

    @property
    def count(self) -> int:
        return sum(1 for tr in self.transitions if tr.weight > 0)


def resonance_report(chain: AAChainModel, J: SpectralDensity, T: float, tol: float = 1e-10) -> ResonanceReport:
    """
    Every positive gap E_a - E_b whose bath-operator matrix element is nonzero, weighted
    by J(w) n(w). The flux proxy sums |S_ab|^2 J(w) n(w) over all such transitions.
    """
    if chain.n_sites > 10:
        raise ArgumentError(f"resonance analysis is dense; N={chain.n_sites} > 10")
    energies, vecs = np.linalg.eigh(chain.hamiltonian())
    op = sum(embed(chain.coupling_operator(s), s, chain.n_sites) for s in chain.coupled_sites)
    elements = np.abs(vecs.conj().T @ op @ vecs) ** 2
    gaps = energies[:, None] - energies[None, :]
    transitions: List[Transition] = []
    total = 0.0
    for a, b in zip(*np.nonzero((gaps > tol) & (elements > tol ** 2))):
        w = float(gaps[a, b])
        weight = float(J(w) * bose_occupation(w, T))
        transitions.append(Transition(w, weight, float(elements[a, b])))
        total += float(elements[a, b]) * weight
    transitions.sort()
    return ResonanceReport(transitions=transitions, total_flux=total)


def single_particle_ipr(chain: AAChainModel) -> np.ndarray:
    """IPR of every single-excitation eigenmode (hopping J/2, on-site -h_i)."""
    n = chain.n_sites
    h = np.diag([-chain.site_field(i) for i in range(1, n + 1)]).astype(float)
    h += np.diag(np.full(n - 1, 0.5 * chain.J), 1) + np.diag(np.full(n - 1, 0.5 * chain.J), -1)
    _, modes = np.linalg.eigh(h)
    return np.sum(np.abs(modes) ** 4, axis=0)

