# packages/ptebd/liouville.py
"""
Liouville-space conventions.

Density matrices are vectorized row-major: component ``i*d + j`` is ``rho[i, j]``
(ket index first). With that convention ``vec(A rho B) = kron(A, B.T) @ vec(rho)``.
Multi-site states used by the tensor networks are reordered so that each site owns
one leg of dimension ``d**2`` holding its (ket, bra) pair.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import reduce
from typing import Sequence, Tuple

import numpy as np
from scipy import linalg as sla

from .errors import ArgumentError, ShapeError

logger = logging.getLogger(__name__)

HERMITIAN_TOL = 1e-8


# ------------ States ------------
def vectorize(rho) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ShapeError(f"expected a square matrix, got shape {rho.shape}")
    return rho.reshape(-1).copy()


def devectorize(vec, d: int | None = None) -> np.ndarray:
    vec = np.asarray(vec, dtype=complex).reshape(-1)
    if d is None:
        d = int(round(np.sqrt(vec.size)))
    if d * d != vec.size:
        raise ShapeError(f"vector of length {vec.size} is not a vectorized {d}x{d} matrix")
    return vec.reshape(d, d).copy()


def trace_cap(d: int) -> np.ndarray:
    """The vectorized identity; ``trace_cap(d) @ vec(rho) == trace(rho)``."""
    return np.eye(d, dtype=complex).reshape(-1)


def check_density_matrix(rho, tol: float = 1e-8) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ShapeError(f"density matrix must be square, got shape {rho.shape}")
    if np.max(np.abs(rho - rho.conj().T)) > tol:
        raise ArgumentError("density matrix is not Hermitian")
    if abs(np.trace(rho) - 1.0) > tol:
        raise ArgumentError(f"density matrix trace is {np.trace(rho).real:.6g}, expected 1")
    if np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))[0] < -tol:
        raise ArgumentError("density matrix has negative eigenvalues")
    return rho


def pure_state(psi) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    norm = np.linalg.norm(psi)
    if norm == 0:
        raise ArgumentError("state vector has zero norm")
    psi = psi / norm
    return np.outer(psi, psi.conj())


# ------------ Superoperators ------------
def _square(op) -> np.ndarray:
    op = np.asarray(op, dtype=complex)
    if op.ndim != 2 or op.shape[0] != op.shape[1]:
        raise ShapeError(f"operator must be square, got shape {op.shape}")
    return op


def left_super(op) -> np.ndarray:
    op = _square(op)
    return np.kron(op, np.eye(op.shape[0]))


def right_super(op) -> np.ndarray:
    op = _square(op)
    return np.kron(np.eye(op.shape[0]), op.T)


def liouvillian(hamiltonian) -> np.ndarray:
    """``-i[H, .]`` as a ``d**2 x d**2`` matrix."""
    h = _square(hamiltonian)
    if np.max(np.abs(h - h.conj().T), initial=0.0) > HERMITIAN_TOL:
        raise ArgumentError("Hamiltonian is not Hermitian")
    return -1j * (left_super(h) - right_super(h))


def unitary_superop(u) -> np.ndarray:
    u = _square(u)
    return np.kron(u, u.conj())


def propagator(hamiltonian, t: float) -> np.ndarray:
    """``exp(-i H t)`` by eigendecomposition."""
    h = _square(hamiltonian)
    h = 0.5 * (h + h.conj().T)
    w, v = np.linalg.eigh(h)
    return (v * np.exp(-1j * w * t)[None, :]) @ v.conj().T


def superop_expm(generator, t: float) -> np.ndarray:
    """
    ``exp(L t)``. Generators of unitary dynamics are anti-Hermitian and go through an
    exact eigendecomposition; anything else (Redfield) falls back to scipy's expm.
    """
    gen = _square(generator)
    if np.max(np.abs(gen + gen.conj().T), initial=0.0) < 1e-12 * max(1.0, np.max(np.abs(gen), initial=0.0)):
        herm = 1j * gen
        herm = 0.5 * (herm + herm.conj().T)
        w, v = np.linalg.eigh(herm)
        return (v * np.exp(-1j * w * t)[None, :]) @ v.conj().T
    return sla.expm(gen * t)


@dataclass(frozen=True)
class TrotterSplit:
    """
    Symmetric splitting ``half @ bath @ half`` of one time step. Errors are third order
    per step and second order over a fixed total time.
    """

    half_step: np.ndarray
    sequence: Tuple[str, ...] = ("system/2", "bath", "system/2")

    def apply(self, bath_step: np.ndarray, vec: np.ndarray) -> np.ndarray:
        return self.half_step @ (bath_step @ (self.half_step @ vec))

    def step_operator(self, bath_step: np.ndarray) -> np.ndarray:
        return self.half_step @ bath_step @ self.half_step


def trotter_factors(system_generator, delta_t: float) -> TrotterSplit:
    if delta_t <= 0:
        raise ArgumentError(f"time step must be positive, got {delta_t}")
    return TrotterSplit(half_step=superop_expm(system_generator, delta_t / 2.0))


# ------------ Multi-site ordering ------------
def site_ordered(superop, n_sites: int, d: int = 2) -> np.ndarray:
    """
    Reorder an ``n``-site superoperator from composite ``(kets, bras)`` ordering to
    per-site legs. The result has shape ``(d*d,)*n (out) + (d*d,)*n (in)``.
    """
    superop = np.asarray(superop)
    D = d ** n_sites
    if superop.shape != (D * D, D * D):
        raise ShapeError(f"expected a {D*D}x{D*D} superoperator, got {superop.shape}")
    t = superop.reshape((d,) * (4 * n_sites))
    order = []
    for half in (0, 2 * n_sites):
        for i in range(n_sites):
            order += [half + i, half + n_sites + i]
    return t.transpose(order).reshape((d * d,) * (2 * n_sites))


def vectorize_sites(rho, n_sites: int, d: int = 2) -> np.ndarray:
    """Density matrix to a tensor with one ``d*d`` leg per site."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (d ** n_sites, d ** n_sites):
        raise ShapeError(f"expected a {d**n_sites}x{d**n_sites} matrix, got {rho.shape}")
    t = rho.reshape((d,) * (2 * n_sites))
    order = [ax for i in range(n_sites) for ax in (i, n_sites + i)]
    return t.transpose(order).reshape((d * d,) * n_sites)


def devectorize_sites(tensor, n_sites: int, d: int = 2) -> np.ndarray:
    t = np.asarray(tensor, dtype=complex).reshape((d,) * (2 * n_sites))
    order = [2 * i for i in range(n_sites)] + [2 * i + 1 for i in range(n_sites)]
    return t.transpose(order).reshape(d ** n_sites, d ** n_sites)


def embed(op, site: int, n_sites: int, d: int = 2) -> np.ndarray:
    """Place a single-site operator at 1-based ``site`` of an ``n_sites`` register."""
    if not 1 <= site <= n_sites:
        raise ArgumentError(f"site {site} outside 1..{n_sites}")
    factors = [np.eye(d)] * n_sites
    factors[site - 1] = np.asarray(op, dtype=complex)
    return reduce(np.kron, factors)


def partial_trace(rho, keep: Sequence[int], n_sites: int, d: int = 2) -> np.ndarray:
    """Reduced state on the 1-based sites in ``keep`` (returned in ascending site order)."""
    keep = sorted(set(keep))
    if not keep or keep[0] < 1 or keep[-1] > n_sites:
        raise ArgumentError(f"sites {keep} outside 1..{n_sites}")
    rho = np.asarray(rho, dtype=complex).reshape((d,) * (2 * n_sites))
    traced = [i for i in range(n_sites) if i + 1 not in keep]
    for k, i in enumerate(traced):
        ket = i - k
        rho = np.trace(rho, axis1=ket, axis2=ket + rho.ndim // 2)
    dk = d ** len(keep)
    return rho.reshape(dk, dk)
