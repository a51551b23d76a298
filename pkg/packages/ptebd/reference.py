# packages/ptebd/reference.py
"""
Independent solvers used to check the tensor-network results: dense exact evolution,
the Bloch-Redfield master equation and brute-force summation over Liouville paths.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import List, Literal, Mapping, Optional, Sequence, Tuple

import numpy as np

from .bath import EtaTable, SpectralDensity, correlation_spectrum
from .errors import ArgumentError, CapacityError, ShapeError
from .evolution import EvolutionRecord
from .liouville import (
    check_density_matrix,
    devectorize,
    embed,
    propagator,
    superop_expm,
    unitary_superop,
    vectorize,
)
from .models import SystemModel
from .tensor_core import as_tensor

logger = logging.getLogger(__name__)

MAX_DENSE_DIM = 2 ** 10
MAX_PATHS = 1 << 20
PATH_BLOCK = 1 << 14
POSITIVITY_TOL = 1e-8

Grid = Literal["window", "endpoint"]


def _n_sites_for(dim: int) -> int:
    n = int(round(math.log2(dim))) if dim > 1 else 1
    return n if 2 ** n == dim else 1


def _record(times, states, dim: int, method: str) -> EvolutionRecord:
    n = _n_sites_for(dim)
    return EvolutionRecord(
        times=[float(t) for t in times], n_sites=n,
        states={tuple(range(1, n + 1)): states}, metadata={"method": method},
    )


# ------------ Exact evolution ------------
def exact_evolve(hamiltonian, rho0, times: Sequence[float]) -> EvolutionRecord:
    h = np.asarray(hamiltonian, dtype=complex)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ShapeError(f"Hamiltonian must be square, got {h.shape}")
    dim = h.shape[0]
    if dim > MAX_DENSE_DIM:
        raise CapacityError(f"dense evolution limited to dimension {MAX_DENSE_DIM}, got {dim}")
    rho0 = check_density_matrix(rho0)
    if rho0.shape != h.shape:
        raise ShapeError(f"state {rho0.shape} does not match Hamiltonian {h.shape}")
    w, v = np.linalg.eigh(0.5 * (h + h.conj().T))
    r = v.conj().T @ rho0 @ v
    states = []
    for t in times:
        phase = np.exp(-1j * w * t)
        states.append(v @ (phase[:, None] * r * phase.conj()[None, :]) @ v.conj().T)
    return _record(times, states, dim, "exact")


# ------------ Bloch-Redfield ------------
@dataclass(frozen=True, eq=False)
class BathCoupling:
    """One bath acting on the full system space through ``operator``."""

    spectral: SpectralDensity
    temperature: float
    operator: np.ndarray


def couplings_for(model: SystemModel, baths: Mapping[int, Tuple[SpectralDensity, float]]) -> List[BathCoupling]:
    """Embed the model's coupling operator at each bath site into the full register."""
    n, d = model.n_sites, model.local_dim
    return [
        BathCoupling(J, T, embed(model.coupling_operator(site), site, n, d))
        for site, (J, T) in sorted(baths.items())
    ]


def _secular_mask(freqs: np.ndarray, cutoff: float) -> np.ndarray:
    bohr = freqs.reshape(-1)
    mask = np.abs(bohr[:, None] - bohr[None, :]) <= cutoff
    distinct = np.unique(np.round(bohr, 12))
    merged = []
    for i, a in enumerate(distinct):
        close = [float(b) for b in distinct[i + 1:] if abs(b - a) <= cutoff]
        if close:
            merged.append([float(a)] + close)
    if merged:
        logger.warning("secular approximation merges near-degenerate Bohr frequencies: %s", merged)
    return mask


def redfield_generator(
    hamiltonian,
    baths: Sequence[BathCoupling],
    secular: bool = False,
    lamb_shift: bool = True,
    secular_cutoff: float = 1e-6,
) -> np.ndarray:
    """
    Liouvillian of drho/dt = -i[H, rho] - sum_baths [S, L rho - rho L^dag] with
    L_ab = S_ab Gamma(E_a - E_b) in the energy eigenbasis, returned in the
    computational basis (row-major vectorization).
    """
    h = np.asarray(hamiltonian, dtype=complex)
    dim = h.shape[0]
    if dim > 2 ** 6:
        raise CapacityError(f"Redfield generator limited to dimension 64, got {dim}")
    energies, vecs = np.linalg.eigh(0.5 * (h + h.conj().T))
    freqs = energies[:, None] - energies[None, :]
    eye = np.eye(dim)

    dissipator = np.zeros((dim * dim, dim * dim), dtype=complex)
    spectra = {}
    for bath in baths:
        s = vecs.conj().T @ np.asarray(bath.operator, dtype=complex) @ vecs
        if s.shape != h.shape:
            raise ShapeError(f"coupling operator {s.shape} does not match Hamiltonian {h.shape}")
        gamma = np.empty((dim, dim), dtype=complex)
        for a in range(dim):
            for b in range(dim):
                key = (id(bath), round(float(freqs[a, b]), 12))
                if key not in spectra:
                    spectra[key] = correlation_spectrum(bath.spectral, bath.temperature, float(freqs[a, b]), lamb_shift)
                gamma[a, b] = spectra[key]
        lam = s * gamma
        dissipator += (
            -np.kron(s @ lam, eye) + np.kron(lam, s.T) + np.kron(s, lam.conj()) - np.kron(eye, s.T @ lam.conj())
        )
    if secular:
        dissipator = dissipator * _secular_mask(freqs, secular_cutoff)

    coherent = -1j * (np.kron(np.diag(energies), eye) - np.kron(eye, np.diag(energies)))
    w = np.kron(vecs, vecs.conj())
    return w @ (coherent + dissipator) @ w.conj().T


def bloch_redfield_evolve(
    model,
    baths,
    rho0,
    times: Sequence[float],
    secular: bool = False,
    lamb_shift: bool = True,
) -> EvolutionRecord:
    """
    ``model`` is a time-independent system model or a Hamiltonian matrix; ``baths`` maps
    sites to ``(spectral density, temperature)`` for a model, or is a list of
    BathCoupling for a matrix.
    """
    if isinstance(model, np.ndarray):
        h = model
        couplings = list(baths)
    else:
        if model.time_dependent:
            raise ArgumentError("Bloch-Redfield evolution needs a time-independent Hamiltonian")
        h = model.hamiltonian()
        couplings = couplings_for(model, baths)
    rho0 = check_density_matrix(rho0)
    gen = redfield_generator(h, couplings, secular=secular, lamb_shift=lamb_shift)

    times = [float(t) for t in times]
    v0 = vectorize(rho0)
    steps = np.diff(times)
    states: List[np.ndarray] = []
    if len(times) > 1 and np.allclose(steps, steps[0], rtol=0, atol=1e-12) and times[0] == 0.0:
        prop = superop_expm(gen, steps[0])
        v = v0
        for _ in times:
            states.append(devectorize(v))
            v = prop @ v
    else:
        states = [devectorize(superop_expm(gen, t) @ v0) for t in times]

    worst = min(float(np.linalg.eigvalsh(0.5 * (r + r.conj().T))[0]) for r in states)
    if worst < -POSITIVITY_TOL:
        logger.warning("Redfield evolution left the positive cone: min eigenvalue %.3e", worst)
    logger.info("bloch-redfield finished: dim=%d baths=%d points=%d", h.shape[0], len(couplings), len(times))
    return _record(times, states, h.shape[0], "redfield")


def steady_state(generator) -> np.ndarray:
    """Null vector of the generator with unit trace (first equation replaced by the trace)."""
    gen = as_tensor(generator)
    dim = int(round(math.sqrt(gen.shape[0])))
    a = gen.copy()
    a[0, :] = np.eye(dim).reshape(-1)
    b = np.zeros(dim * dim, dtype=complex)
    b[0] = 1.0
    rho = devectorize(np.linalg.solve(a, b), dim)
    return 0.5 * (rho + rho.conj().T)


# ------------ Path summation ------------
def _pair_coefficient(eta: EtaTable, later: int, earlier: int, n_points: int, grid: Grid) -> complex:
    m = later - earlier
    if m > eta.memory_cutoff:
        return 0j
    if grid == "window":
        return eta.coefficient(m, "interior")
    last = n_points - 1
    if m == 0:
        return eta.coefficient(0, "start" if later == 0 else "end" if later == last else "interior")
    if later == last and earlier == 0:
        return eta.coefficient(m, "end_to_start")
    if later == last:
        return eta.coefficient(m, "end")
    if earlier == 0:
        return eta.coefficient(m, "start")
    return eta.coefficient(m, "interior")


def path_sum(
    eta: EtaTable,
    hamiltonian,
    coupling,
    rho0,
    n_steps: int,
    grid: Grid = "window",
) -> np.ndarray:
    """
    Reduced state after ``n_steps`` by explicit summation over every Liouville path in
    the eigenbasis of ``coupling``, each weighted by the product of influence functions.

    ``window``: paths visit the bath once per step between two half system steps, the
    same discretization PT-TEBD uses. ``endpoint``: paths visit the grid points
    t_0..t_N joined by full system steps, with half windows at both ends.
    """
    if n_steps < 1:
        raise ArgumentError(f"n_steps must be >= 1, got {n_steps}")
    if grid not in ("window", "endpoint"):
        raise ArgumentError(f"unknown path grid {grid!r}")
    h = np.asarray(hamiltonian, dtype=complex)
    op = np.asarray(coupling, dtype=complex)
    rho0 = check_density_matrix(rho0)
    if h.shape != op.shape or rho0.shape != h.shape:
        raise ShapeError(f"shapes disagree: H {h.shape}, coupling {op.shape}, rho0 {rho0.shape}")
    d = h.shape[0]
    D = d * d
    n_points = n_steps if grid == "window" else n_steps + 1
    if float(D) ** n_points > MAX_PATHS:
        raise CapacityError(f"{D}^{n_points} paths exceed the limit of {MAX_PATHS}")

    lam, vecs = np.linalg.eigh(0.5 * (op + op.conj().T))
    w = np.kron(vecs, vecs.conj())
    to_eig = w.conj().T
    dt = eta.delta_t
    full = to_eig @ unitary_superop(propagator(h, dt)) @ w
    half = to_eig @ unitary_superop(propagator(h, 0.5 * dt)) @ w
    v0 = to_eig @ vectorize(rho0)
    if grid == "window":
        v0 = half @ v0

    lp = lam[np.arange(D) // d]
    lq = lam[np.arange(D) % d]
    diff = lp - lq
    coeffs = {
        (k, j): _pair_coefficient(eta, k, j, n_points, grid)
        for k in range(n_points) for j in range(k + 1)
    }

    acc = np.zeros(D, dtype=complex)
    total = D ** n_points
    for start in range(0, total, PATH_BLOCK):
        idx = np.arange(start, min(start + PATH_BLOCK, total))
        paths = np.stack(np.unravel_index(idx, (D,) * n_points), axis=1)
        phase = np.zeros(idx.size, dtype=complex)
        for (k, j), e in coeffs.items():
            if e != 0:
                sk, sj = paths[:, k], paths[:, j]
                phase -= diff[sk] * (e * lp[sj] - np.conj(e) * lq[sj])
        amp = v0[paths[:, 0]] * np.exp(phase)
        for k in range(1, n_points):
            amp = amp * full[paths[:, k], paths[:, k - 1]]
        np.add.at(acc, paths[:, -1], amp)

    out = half @ acc if grid == "window" else acc
    rho = devectorize(w @ out, d)
    logger.debug("path sum over %d paths (%s grid)", total, grid)
    return rho
