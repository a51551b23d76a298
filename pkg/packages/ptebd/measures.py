# packages/ptebd/measures.py
"""Quantum-correlation and localization observables."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Dict, Iterable, Optional, Sequence

import numpy as np
from opt_einsum import contract

from .errors import ShapeError, UndefinedValueError
from .models import IDENTITY, SIGMA_X, SIGMA_Y, SIGMA_Z

logger = logging.getLogger(__name__)

PAULIS = (SIGMA_X, SIGMA_Y, SIGMA_Z)
CLASSICAL_TELEPORT_BOUND = 2.0 / 3.0


def _two_qubit(rho) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise ShapeError(f"two-qubit measures need a 4x4 density matrix, got {rho.shape}")
    return rho


def l1_coherence(rho) -> float:
    rho = np.asarray(rho, dtype=complex)
    return float(np.sum(np.abs(rho)) - np.sum(np.abs(np.diag(rho))))


def concurrence(rho) -> float:
    """
    max(0, l1 - l2 - l3 - l4), l_i the descending square roots of the eigenvalues of
    rho @ rho_tilde with rho_tilde = (sy x sy) rho* (sy x sy). When that non-Hermitian
    product is badly conditioned the same spectrum is taken from sqrt(rho) rho_tilde sqrt(rho).
    """
    rho = _two_qubit(rho)
    yy = np.kron(SIGMA_Y, SIGMA_Y)
    rho_tilde = yy @ rho.conj() @ yy
    ev = np.linalg.eigvals(rho @ rho_tilde)
    if np.max(np.abs(ev.imag)) > 1e-8 or np.min(ev.real) < -1e-8:
        w, v = np.linalg.eigh(0.5 * (rho + rho.conj().T))
        root = (v * np.sqrt(np.clip(w, 0.0, None))[None, :]) @ v.conj().T
        ev = np.linalg.eigvalsh(root @ rho_tilde @ root)
    ev = np.real(ev)
    if np.min(ev) < -1e-8:
        logger.warning("concurrence: eigenvalue %.3e below zero clamped", np.min(ev))
    lam = np.sort(np.sqrt(np.clip(ev, 0.0, None)))[::-1]
    return float(max(0.0, lam[0] - lam[1] - lam[2] - lam[3]))


@dataclass(frozen=True, eq=False)
class BlochDecomposition:
    a: np.ndarray
    b: np.ndarray
    C: np.ndarray

    def to_density(self) -> np.ndarray:
        rho = np.kron(IDENTITY, IDENTITY).astype(complex)
        for i, s in enumerate(PAULIS):
            rho += self.a[i] * np.kron(s, IDENTITY) + self.b[i] * np.kron(IDENTITY, s)
            for j, t in enumerate(PAULIS):
                rho += self.C[i, j] * np.kron(s, t)
        return rho / 4.0


def bloch_decompose(rho) -> BlochDecomposition:
    rho = _two_qubit(rho)
    a = np.array([np.trace(rho @ np.kron(s, IDENTITY)).real for s in PAULIS])
    b = np.array([np.trace(rho @ np.kron(IDENTITY, s)).real for s in PAULIS])
    C = np.array([[np.trace(rho @ np.kron(s, t)).real for t in PAULIS] for s in PAULIS])
    return BlochDecomposition(a=a, b=b, C=C)


def geometric_discord(rho) -> float:
    """(|a|^2 + |C|^2 - lambda_max(a a^T + C C^T)) / 4."""
    bd = bloch_decompose(rho)
    k = np.outer(bd.a, bd.a) + bd.C @ bd.C.T
    value = (bd.a @ bd.a + np.sum(bd.C ** 2) - np.linalg.eigvalsh(k)[-1]) / 4.0
    return float(max(0.0, value))


def discord_by_search(rho, step_deg: float = 1.0) -> float:
    """
    Minimum over projective measurements on qubit A of ||rho - sum_k P_k rho P_k||^2_HS,
    searched over a polar grid of measurement axes (one hemisphere suffices).
    """
    rho = _two_qubit(rho)
    theta = np.deg2rad(np.arange(0.0, 90.0 + step_deg / 2, step_deg))
    phi = np.deg2rad(np.arange(0.0, 360.0, step_deg))
    tt, pp = np.meshgrid(theta, phi, indexing="ij")
    axes = np.stack([np.sin(tt) * np.cos(pp), np.sin(tt) * np.sin(pp), np.cos(tt)], axis=-1).reshape(-1, 3)
    ndots = contract("ni,ijk->njk", axes.astype(complex), np.stack(PAULIS))
    measured = np.zeros((len(axes), 4, 4), dtype=complex)
    for sign in (1.0, -1.0):
        proj = contract("njk,lm->njlkm", 0.5 * (IDENTITY[None] + sign * ndots), IDENTITY).reshape(-1, 4, 4)
        measured += proj @ rho[None] @ proj
    distance = np.sum(np.abs(rho[None] - measured) ** 2, axis=(1, 2))
    return float(np.min(distance))


def teleport_fidelity(rho) -> float:
    """(1 + Tr sqrt(C^T C) / 3) / 2; better than classical iff above 2/3."""
    bd = bloch_decompose(rho)
    return float(0.5 * (1.0 + np.sum(np.linalg.svd(bd.C, compute_uv=False)) / 3.0))


def useful_for_teleportation(rho) -> bool:
    return teleport_fidelity(rho) > CLASSICAL_TELEPORT_BOUND


# ------------ Localization ------------
def site_occupations(state, n_sites: int) -> np.ndarray:
    """<n_i> for a chain state vector or density matrix; site 1 is the leading bit."""
    state = np.asarray(state, dtype=complex)
    dim = 2 ** n_sites
    if state.shape == (dim,):
        probs = np.abs(state) ** 2
        probs = probs / np.sum(probs)
    elif state.shape == (dim, dim):
        probs = np.real(np.diag(state))
    else:
        raise ShapeError(f"expected a {dim}-dim state vector or density matrix, got {state.shape}")
    index = np.arange(dim)
    return np.array([np.sum(probs * ((index >> (n_sites - i)) & 1)) for i in range(1, n_sites + 1)])


def imbalance_from_occupations(occupations: Sequence[float]) -> float:
    occ = np.asarray(occupations, dtype=float)
    odd, even = float(np.sum(occ[0::2])), float(np.sum(occ[1::2]))
    if abs(odd + even) < 1e-14:
        raise UndefinedValueError("imbalance undefined: the chain holds no excitations")
    return (odd - even) / (odd + even)


def imbalance(state, n_sites: int) -> float:
    """(N_odd - N_even) / (N_odd + N_even) with n_i = S^z_i + 1/2."""
    return imbalance_from_occupations(site_occupations(state, n_sites))


MEASURES: Dict[str, Callable[[np.ndarray], float]] = {
    "coherence": l1_coherence,
    "concurrence": concurrence,
    "discord": geometric_discord,
    "fidelity": teleport_fidelity,
}
MEASURE_NAMES = tuple(MEASURES) + ("imbalance",)


@dataclass
class CorrelationSeries:
    times: np.ndarray
    coherence: Optional[np.ndarray] = None
    concurrence: Optional[np.ndarray] = None
    discord: Optional[np.ndarray] = None
    fidelity: Optional[np.ndarray] = None
    imbalance: Optional[np.ndarray] = None

    @classmethod
    def from_states(
        cls,
        times: Sequence[float],
        states: Sequence[np.ndarray],
        names: Iterable[str],
        imbalance: Optional[Sequence[float]] = None,
    ) -> "CorrelationSeries":
        series = cls(times=np.asarray(times, dtype=float))
        for name in names:
            if name == "imbalance":
                if imbalance is not None:
                    series.imbalance = np.asarray(imbalance, dtype=float)
                continue
            fn = MEASURES[name]
            setattr(series, name, np.array([fn(rho) for rho in states]))
        return series

    def columns(self) -> Dict[str, np.ndarray]:
        out: Dict[str, np.ndarray] = {}
        for name in MEASURE_NAMES:
            value = getattr(self, name)
            if value is not None:
                out[name] = value
        return out
