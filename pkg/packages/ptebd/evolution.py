# packages/ptebd/evolution.py
"""
Time evolution of system states: PT-TEBD on an augmented matrix product state,
its Markov variant, and pure-state TEBD for closed chains.

The Markov variant keeps the first two bath-correlation lags exact in a one-step
process tensor and folds the remaining lags into a Born-Markov dissipator on the
region around each coupled site (see MemoryTail).

Site tensors of the augmented MPS carry legs ``(left, phys, right, bath)``. ``phys``
is the per-site Liouville leg of dimension d**2 and ``bath`` is the open right bond of
the process tensor attached to that site (dimension 1 where no bath couples). Each
time step applies odd bonds and even bonds for half a step, the process-tensor cores
at the coupled sites, then even and odd bonds for the second half.
"""
from __future__ import annotations

import itertools
import logging
import math
import time
from collections import deque
from dataclasses import dataclass, field
from typing import Any, Deque, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from opt_einsum import contract

from .bath import EtaTable
from .errors import ArgumentError, ConfigurationError, ShapeError
from .liouville import (
    check_density_matrix,
    devectorize_sites,
    embed,
    left_super,
    partial_trace,
    propagator,
    right_super,
    site_ordered,
    superop_expm,
    trace_cap,
    unitary_superop,
    vectorize_sites,
)
from .measures import concurrence, imbalance_from_occupations
from .models import AAChainModel, SystemModel
from .process_tensor import ProcessTensor, build_process_tensor, rebuild_with_memory
from .tensor_core import EXACT, TruncationPolicy, tensor_train, truncated_svd

logger = logging.getLogger(__name__)

SiteSet = Tuple[int, ...]
BathMap = Mapping[int, ProcessTensor]

# time-dependent propagators are sampled this many times per drive period
SUBSTEPS_PER_PERIOD = 16
DT_TOL = 1e-12
COUPLING_TOL = 1e-10


# ------------ Record ------------
@dataclass
class EvolutionRecord:
    """Reduced states and diagnostics at t_k = k * delta_t, k = 0..n_steps."""

    times: List[float]
    n_sites: int
    states: Dict[SiteSet, List[np.ndarray]] = field(default_factory=dict)
    observables: Dict[str, List[float]] = field(default_factory=dict)
    max_bond: List[int] = field(default_factory=list)
    discarded_weight: List[float] = field(default_factory=list)
    trace_error: List[float] = field(default_factory=list)
    wall_time: float = 0.0
    metadata: Dict[str, Any] = field(default_factory=dict)

    @property
    def n_steps(self) -> int:
        return len(self.times) - 1

    def reduced_state(self, t_index: int, sites: Iterable[int]) -> np.ndarray:
        return reduced_state(self, t_index, sites)

    def table(self) -> Dict[str, List[float]]:
        columns: Dict[str, List[float]] = {"t": list(self.times)}
        for name, values in self.observables.items():
            columns[name] = list(values)
        return columns

    def write_csv(self, path) -> Any:
        from .export import columns_to_rows, write_csv

        columns = self.table()
        return write_csv(path, list(columns), columns_to_rows(columns))

    def summary(self) -> Dict[str, Any]:
        return {
            "n_sites": self.n_sites,
            "n_steps": self.n_steps,
            "peak_bond": max(self.max_bond, default=0),
            "discarded_weight": self.discarded_weight[-1] if self.discarded_weight else 0.0,
            "max_trace_error": max(self.trace_error, default=0.0),
            "wall_time": self.wall_time,
            **self.metadata,
        }


def reduced_state(record: EvolutionRecord, t_index: int, sites: Iterable[int]) -> np.ndarray:
    """Partial trace of the smallest stored state that covers ``sites``."""
    wanted = tuple(sorted(set(sites)))
    if not wanted or wanted[0] < 1 or wanted[-1] > record.n_sites:
        raise ArgumentError(f"sites {wanted} outside 1..{record.n_sites}")
    if not 0 <= t_index <= record.n_steps:
        raise ArgumentError(f"time index {t_index} outside 0..{record.n_steps}")
    covering = [key for key in record.states if set(wanted) <= set(key)]
    if not covering:
        raise ArgumentError(f"no stored reduced state covers sites {wanted}")
    key = min(covering, key=len)
    rho = record.states[key][t_index]
    if key == wanted:
        return rho
    keep = [key.index(s) + 1 for s in wanted]
    return partial_trace(rho, keep, len(key))


def default_readout(n_sites: int) -> List[SiteSet]:
    """Whole system for one or two sites; every single site plus the end pair for chains."""
    if n_sites <= 2:
        return [tuple(range(1, n_sites + 1))]
    return [(i,) for i in range(1, n_sites + 1)] + [(1, n_sites)]


# ------------ Gates ------------
def _substeps(model: SystemModel, tau: float) -> int:
    freq = abs(float(getattr(model, "max_drive_frequency", 0.0)))
    if not model.time_dependent or freq == 0.0:
        return 1
    return max(1, math.ceil(tau * freq * SUBSTEPS_PER_PERIOD / (2.0 * math.pi)))


def _site_weight(site: int, n_sites: int) -> float:
    return 1.0 if site in (1, n_sites) else 0.5


def bond_hamiltonian(model: SystemModel, bond: int, t: float) -> np.ndarray:
    """Bond term plus the share of both site terms carried by this bond."""
    n, d = model.n_sites, model.local_dim
    eye = np.eye(d)
    h = np.asarray(model.bond_hamiltonian(bond, t), dtype=complex).copy()
    h += _site_weight(bond, n) * np.kron(model.site_hamiltonian(bond, t), eye)
    h += _site_weight(bond + 1, n) * np.kron(eye, model.site_hamiltonian(bond + 1, t))
    return h


def _time_ordered(hamiltonian_at, t0: float, tau: float, n_sub: int) -> np.ndarray:
    h = tau / n_sub
    u = None
    for j in range(n_sub):
        step = propagator(hamiltonian_at(t0 + (j + 0.5) * h), h)
        u = step if u is None else step @ u
    return u


def bond_unitary(model: SystemModel, bond: int, t0: float, tau: float) -> np.ndarray:
    return _time_ordered(lambda t: bond_hamiltonian(model, bond, t), t0, tau, _substeps(model, tau))


def site_unitary(model: SystemModel, t0: float, tau: float) -> np.ndarray:
    return _time_ordered(lambda t: model.site_hamiltonian(1, t), t0, tau, _substeps(model, tau))


class _GateBook:
    """Liouville gates for one model; time-independent gates are built once per duration."""

    def __init__(self, model: SystemModel):
        self.model = model
        self._cache: Dict[Tuple[int, float], np.ndarray] = {}

    def bond(self, bond: int, t0: float, tau: float) -> np.ndarray:
        key = (bond, tau)
        if not self.model.time_dependent and key in self._cache:
            return self._cache[key]
        gate = site_ordered(unitary_superop(bond_unitary(self.model, bond, t0, tau)), 2, self.model.local_dim)
        if not self.model.time_dependent:
            self._cache[key] = gate
        return gate

    def site(self, t0: float, tau: float) -> np.ndarray:
        key = (0, tau)
        if not self.model.time_dependent and key in self._cache:
            return self._cache[key]
        gate = unitary_superop(site_unitary(self.model, t0, tau))
        if not self.model.time_dependent:
            self._cache[key] = gate
        return gate


# ------------ Augmented MPS ------------
class AugmentedMPS:
    def __init__(self, tensors: List[np.ndarray], local_dim: int = 2):
        self.tensors = tensors
        self.local_dim = local_dim

    @classmethod
    def from_density(cls, rho, n_sites: int, d: int = 2, policy: TruncationPolicy = EXACT) -> "AugmentedMPS":
        vec = vectorize_sites(rho, n_sites, d).reshape(-1)
        cores = tensor_train(vec, [d * d] * n_sites, policy)
        return cls([c[..., None] for c in cores], d)

    @property
    def n_sites(self) -> int:
        return len(self.tensors)

    @property
    def bonds(self) -> List[int]:
        return [a.shape[2] for a in self.tensors[:-1]]

    @property
    def max_bond(self) -> int:
        return max(self.bonds, default=1)

    def apply_site(self, site: int, superop: np.ndarray) -> None:
        a = self.tensors[site - 1]
        self.tensors[site - 1] = contract("Pp,lprb->lPrb", superop, a)

    def apply_bond(self, bond: int, gate: np.ndarray, policy: TruncationPolicy) -> float:
        """Two-site gate on sites (bond, bond+1); returns the relative discarded weight."""
        a, b = self.tensors[bond - 1], self.tensors[bond]
        theta = contract("PQpq,lpmx,mqry->lPxQry", gate, a, b)
        l, D, x, _, r, y = theta.shape
        u, s, vh, dw = truncated_svd(theta.reshape(l * D * x, D * r * y), policy)
        chi = s.size
        self.tensors[bond - 1] = u.reshape(l, D, x, chi).transpose(0, 1, 3, 2)
        self.tensors[bond] = (s[:, None] * vh).reshape(chi, D, r, y)
        total = float(np.sum(s ** 2)) + dw
        return dw / total if total > 0 else 0.0

    def apply_bath(self, site: int, core: np.ndarray) -> None:
        a = self.tensors[site - 1]
        if core.shape[2] != a.shape[3]:
            raise ShapeError(f"bath leg at site {site} has dim {a.shape[3]}, core expects {core.shape[2]}")
        self.tensors[site - 1] = contract("ioLR,lirL->lorR", core, a)

    def contract_caps(self, keep: Sequence[int], caps: Mapping[int, np.ndarray]) -> np.ndarray:
        """Open Liouville legs for ``keep``; every other site traced, bath legs capped."""
        t = trace_cap(self.local_dim)
        env = np.ones(1, dtype=complex)
        for i, a in enumerate(self.tensors, start=1):
            cap = caps.get(i)
            a = a[..., 0] if cap is None else np.tensordot(a, cap, axes=(3, 0))
            if i in keep:
                env = np.tensordot(env, a, axes=(-1, 0))
            else:
                env = np.tensordot(env, np.tensordot(a, t, axes=(1, 0)), axes=(-1, 0))
        return env[..., 0]

    def trace(self, caps: Mapping[int, np.ndarray]) -> complex:
        return complex(self.contract_caps((), caps))

    def reduced(self, sites: Sequence[int], caps: Mapping[int, np.ndarray]) -> np.ndarray:
        keep = sorted(set(sites))
        tensor = self.contract_caps(keep, caps)
        return devectorize_sites(tensor, len(keep), self.local_dim)


# ------------ PT-TEBD ------------
def _validate_baths(model: SystemModel, baths: BathMap, n_steps: int, delta_t: float) -> None:
    coupled = getattr(model, "coupled_sites", None)
    for site, pt in baths.items():
        if not 1 <= site <= model.n_sites:
            raise ConfigurationError(f"bath attached to site {site}, model has sites 1..{model.n_sites}")
        if coupled is not None and site not in coupled:
            raise ConfigurationError(f"site {site} is not among the model's coupled sites {tuple(coupled)}")
        if abs(pt.delta_t - delta_t) > DT_TOL:
            raise ConfigurationError(
                f"process tensor at site {site} was built for dt={pt.delta_t:g}, evolution uses dt={delta_t:g}"
            )
        if pt.n_steps < n_steps:
            raise ConfigurationError(f"process tensor at site {site} covers {pt.n_steps} steps, {n_steps} requested")
        op = np.asarray(model.coupling_operator(site), dtype=complex)
        if op.shape != pt.coupling.shape or np.max(np.abs(op - pt.coupling)) > COUPLING_TOL:
            raise ConfigurationError(f"process tensor at site {site} was built for a different coupling operator")


def _normalized(rho: np.ndarray, norm: complex) -> np.ndarray:
    rho = rho / norm
    return 0.5 * (rho + rho.conj().T)


class MemoryTail:
    """
    Weak-coupling dissipator for the lags a one-step process tensor leaves out.

    At step k the coupling operator of lag m (2 <= m <= K) is carried from bath point
    k - m to bath point k by the free propagator of the region around the bath site,
    weighted by eta_m, and summed into Lam_k. The gate is exp(D) with
    D rho = -[S, Lam_k rho - rho Lam_k^dagger]. The region is the site itself for one
    site and the bond holding the bath site otherwise.
    """

    def __init__(self, model: SystemModel, site: int, eta: EtaTable, delta_t: float):
        self.model = model
        self.site = site
        self.eta = eta
        self.delta_t = delta_t
        self.memory = eta.memory_cutoff
        n, d = model.n_sites, model.local_dim
        coupling = model.coupling_operator(site)
        if n == 1:
            self.bond = None
            self.coupling = np.asarray(coupling, dtype=complex)
        else:
            self.bond = site if site < n else n - 1
            self.coupling = embed(coupling, site - self.bond + 1, 2, d)
        self._recent: Deque[np.ndarray] = deque(maxlen=max(1, self.memory))
        self._gates: Dict[int, Optional[np.ndarray]] = {}
        self._free: Optional[np.ndarray] = None

    def _region_hamiltonian(self, t: float) -> np.ndarray:
        if self.bond is None:
            return np.asarray(self.model.site_hamiltonian(1, t), dtype=complex)
        b, eye = self.bond, np.eye(self.model.local_dim)
        h = np.asarray(self.model.bond_hamiltonian(b, t), dtype=complex).copy()
        h += np.kron(self.model.site_hamiltonian(b, t), eye)
        h += np.kron(eye, self.model.site_hamiltonian(b + 1, t))
        return h

    def _between(self, k: int) -> np.ndarray:
        """Free propagator from bath point k - 1 to bath point k."""
        t0 = (k - 1.5) * self.delta_t
        return _time_ordered(self._region_hamiltonian, t0, self.delta_t, _substeps(self.model, self.delta_t))

    def gate(self, k: int) -> Optional[np.ndarray]:
        top = min(self.memory, k - 1)
        if self.model.time_dependent:
            if k >= 2:
                self._recent.appendleft(self._between(k))
            steps: Iterable[np.ndarray] = self._recent
        else:
            if top in self._gates:
                return self._gates[top]
            if self._free is None:
                self._free = self._between(2)
            steps = itertools.repeat(self._free)
        if top < 2:
            return None

        s = self.coupling
        lam = np.zeros_like(s)
        w = np.eye(s.shape[0], dtype=complex)
        for m, u in zip(range(1, top + 1), steps):
            w = w @ u
            if m >= 2:
                lam += self.eta.coefficient(m) * (w @ s @ w.conj().T)
        generator = -(left_super(s) - right_super(s)) @ (left_super(lam) - right_super(lam.conj().T))
        gate = superop_expm(generator, 1.0)
        if self.bond is not None:
            gate = site_ordered(gate, 2, self.model.local_dim)
        if not self.model.time_dependent:
            self._gates[top] = gate
        return gate

    def apply(self, mps: "AugmentedMPS", k: int, policy: TruncationPolicy) -> float:
        gate = self.gate(k)
        if gate is None:
            return 0.0
        if self.bond is None:
            mps.apply_site(1, gate)
            return 0.0
        return mps.apply_bond(self.bond, gate, policy)


def _propagate(
    model: SystemModel,
    baths: BathMap,
    rho0,
    n_steps: int,
    delta_t: float,
    policy: TruncationPolicy,
    readout: Optional[Sequence[Iterable[int]]],
    track_imbalance: Optional[bool],
    stride: int,
    tails: Sequence[MemoryTail] = (),
) -> EvolutionRecord:
    n, d = model.n_sites, model.local_dim
    if n_steps < 1:
        raise ArgumentError(f"n_steps must be >= 1, got {n_steps}")
    if delta_t <= 0:
        raise ArgumentError(f"delta_t must be > 0, got {delta_t}")
    if stride < 1 or n_steps % stride:
        raise ArgumentError(f"stride {stride} must be >= 1 and divide n_steps={n_steps}")
    rho0 = np.asarray(rho0, dtype=complex)
    if rho0.shape != (d ** n, d ** n):
        raise ShapeError(f"initial state must be {d**n}x{d**n} for {n} sites, got {rho0.shape}")
    check_density_matrix(rho0)
    _validate_baths(model, baths, n_steps, delta_t)

    groups = [tuple(sorted(set(g))) for g in (readout or default_readout(n))]
    if track_imbalance is None:
        track_imbalance = isinstance(model, AAChainModel)
    if track_imbalance:
        groups += [(i,) for i in range(1, n + 1) if (i,) not in groups]

    started = time.perf_counter()
    mps = AugmentedMPS.from_density(rho0, n, d)
    gates = _GateBook(model)
    half = 0.5 * delta_t
    odd = list(range(1, n, 2))
    even = list(range(2, n, 2))

    record = EvolutionRecord(times=[], n_sites=n, states={g: [] for g in groups})
    record.metadata["method"] = "pt-tebd"
    record.metadata["memory_cutoff"] = {str(s): pt.memory_cutoff for s, pt in baths.items()}
    if stride > 1:
        record.metadata["bath_substeps"] = stride
    discarded = 0.0

    def read(k: int) -> None:
        caps = {site: pt.caps[k] for site, pt in baths.items()}
        norm = mps.trace(caps)
        record.times.append(k * delta_t)
        record.trace_error.append(abs(norm - 1.0))
        for g in groups:
            record.states[g].append(_normalized(mps.reduced(g, caps), norm))
        if track_imbalance:
            occ = [record.states[(i,)][-1][1, 1].real for i in range(1, n + 1)]
            record.observables.setdefault("imbalance", []).append(imbalance_from_occupations(occ))
        record.max_bond.append(mps.max_bond)
        record.discarded_weight.append(discarded)

    read(0)
    for k in range(1, n_steps + 1):
        t0 = (k - 1) * delta_t
        if n == 1:
            mps.apply_site(1, gates.site(t0, half))
        else:
            for layer in (odd, even):
                for b in layer:
                    discarded += mps.apply_bond(b, gates.bond(b, t0, half), policy)
        for site, pt in baths.items():
            mps.apply_bath(site, pt.core(k))
        for tail in tails:
            discarded += tail.apply(mps, k, policy)
        if n == 1:
            mps.apply_site(1, gates.site(t0 + half, half))
        else:
            for layer in (even, odd):
                for b in layer:
                    discarded += mps.apply_bond(b, gates.bond(b, t0 + half, half), policy)
        if k % stride == 0:
            read(k)
        logger.debug("step %d: max bond %d discarded %.3e", k, mps.max_bond, discarded)

    record.wall_time = time.perf_counter() - started
    return record


def pt_tebd_evolve(
    model: SystemModel,
    baths: BathMap,
    rho0,
    n_steps: int,
    delta_t: float,
    policy: TruncationPolicy = EXACT,
    readout: Optional[Sequence[Iterable[int]]] = None,
    track_imbalance: Optional[bool] = None,
    stride: int = 1,
) -> EvolutionRecord:
    """
    Propagate ``rho0`` under ``model`` with a process tensor attached at each site in
    ``baths``. Reduced states close the bath legs with the trace caps of the remaining
    steps and are recorded every ``stride`` steps, so a bath sampled on a finer grid
    than the output still reports on the coarse one.
    """
    record = _propagate(model, baths, rho0, n_steps, delta_t, policy, readout, track_imbalance, stride)
    logger.info(
        "pt-tebd finished: sites=%d baths=%d steps=%d peak bond=%d in %.2fs",
        model.n_sites, len(baths), n_steps, max(record.max_bond), record.wall_time,
    )
    return record


def markov_evolve(
    model: SystemModel,
    baths: Mapping[int, Union[ProcessTensor, EtaTable]],
    rho0,
    n_steps: int,
    delta_t: float,
    policy: TruncationPolicy = EXACT,
    readout: Optional[Sequence[Iterable[int]]] = None,
    track_imbalance: Optional[bool] = None,
    stride: int = 1,
) -> EvolutionRecord:
    """
    Markov limit of PT-TEBD. Every bath keeps its self and nearest-neighbour influence
    exactly through a one-step process tensor; the longer lags of its η table enter as a
    weak-coupling dissipator (see MemoryTail). ``baths`` maps sites to process tensors
    or directly to η tables, which skips building the full-memory tensor.
    """
    short: Dict[int, ProcessTensor] = {}
    tails: List[MemoryTail] = []
    built: Dict[int, ProcessTensor] = {}
    for site, bath in baths.items():
        eta = bath.eta if isinstance(bath, ProcessTensor) else bath
        if eta is None:
            raise ArgumentError(f"process tensor at site {site} carries no eta table")
        if isinstance(bath, ProcessTensor):
            if id(bath) not in built:
                built[id(bath)] = rebuild_with_memory(bath, 1)
            short[site] = built[id(bath)]
        else:
            short[site] = build_process_tensor(eta.with_memory(1), n_steps, model.coupling_operator(site))
        if eta.memory_cutoff >= 2:
            tails.append(MemoryTail(model, site, eta, delta_t))
    record = _propagate(model, short, rho0, n_steps, delta_t, policy, readout, track_imbalance, stride, tails)
    record.metadata["method"] = "markov"
    record.metadata["memory_cutoff"] = {str(s): 1 for s in short}
    record.metadata["folded_memory"] = {str(t.site): t.memory for t in tails}
    logger.info(
        "markov finished: sites=%d baths=%d steps=%d peak bond=%d in %.2fs",
        model.n_sites, len(baths), n_steps, max(record.max_bond), record.wall_time,
    )
    return record


# ------------ Closed chains ------------
class PureMPS:
    """
    Right-canonical MPS: ``Bs[i]`` has legs ``(left, phys, right)`` and ``Ss[i]`` holds
    the Schmidt values on the bond left of site i (``Ss[0] = Ss[N] = [1]``).
    """

    def __init__(self, Bs: List[np.ndarray], Ss: List[np.ndarray]):
        self.Bs = Bs
        self.Ss = Ss

    @classmethod
    def from_vector(cls, psi, n_sites: int, d: int = 2) -> "PureMPS":
        psi = np.asarray(psi, dtype=complex).reshape(-1)
        if psi.size != d ** n_sites:
            raise ShapeError(f"state vector of size {psi.size} does not describe {n_sites} sites")
        psi = psi / np.linalg.norm(psi)
        cores = tensor_train(psi, [d] * n_sites)
        Ss: List[np.ndarray] = [np.ones(1)] * (n_sites + 1)
        for i in range(n_sites - 1, -1, -1):
            l, p, r = cores[i].shape
            u, s, vh, _ = truncated_svd(cores[i].reshape(l, p * r))
            cores[i] = vh.reshape(-1, p, r)
            if i > 0:
                Ss[i] = s / np.linalg.norm(s)
                cores[i - 1] = np.tensordot(cores[i - 1], u * s[None, :], axes=(2, 0))
            else:
                cores[0] = cores[0] * u[0, 0]
        return cls(cores, Ss)

    @property
    def n_sites(self) -> int:
        return len(self.Bs)

    @property
    def max_bond(self) -> int:
        return max((s.size for s in self.Ss), default=1)

    def update_bond(self, bond: int, gate: np.ndarray, policy: TruncationPolicy) -> float:
        """
        Apply a two-site unitary on sites (bond, bond+1). The left tensor is recovered as
        C V^dagger so no inverse Schmidt values are needed.
        """
        i = bond - 1
        c = contract("PQpq,lpm,mqr->lPQr", gate, self.Bs[i], self.Bs[i + 1])
        l, d, _, r = c.shape
        theta = self.Ss[i][:, None, None, None] * c
        u, s, vh, dw = truncated_svd(theta.reshape(l * d, d * r), policy)
        norm = float(np.linalg.norm(s))
        self.Bs[i + 1] = vh.reshape(-1, d, r)
        self.Bs[i] = (c.reshape(l * d, d * r) @ vh.conj().T).reshape(l, d, -1) / norm
        self.Ss[i + 1] = s / norm
        return dw / (norm ** 2 + dw)

    def norm(self) -> float:
        return float(np.linalg.norm(self.Bs[0]))

    def _theta(self, site: int) -> np.ndarray:
        return self.Ss[site - 1][:, None, None] * self.Bs[site - 1]

    def site_expectation(self, op, site: int) -> complex:
        theta = self._theta(site)
        return complex(contract("lqr,qp,lpr->", theta.conj(), np.asarray(op, dtype=complex), theta))

    def bond_expectation(self, op, bond: int) -> complex:
        d = self.Bs[bond - 1].shape[1]
        theta = contract("lpm,mqr->lpqr", self._theta(bond), self.Bs[bond])
        gate = np.asarray(op, dtype=complex).reshape(d, d, d, d)
        return complex(contract("lPQr,PQpq,lpqr->", theta.conj(), gate, theta))

    def pair_density(self, i: int, j: int) -> np.ndarray:
        """Reduced density matrix of sites i < j, site i as the leading factor."""
        if not 1 <= i < j <= self.n_sites:
            raise ArgumentError(f"pair ({i}, {j}) must be two distinct sites within 1..{self.n_sites}")
        theta = self._theta(i)
        env = contract("lpr,lPR->pPrR", theta, theta.conj())
        for b in self.Bs[i:j - 1]:
            env = contract("pPaA,asr,AsR->pPrR", env, b, b.conj())
        b = self.Bs[j - 1]
        rho = contract("pPaA,aqr,AQr->pqPQ", env, b, b.conj())
        d = rho.shape[0]
        return rho.reshape(d * d, d * d)

    def to_vector(self) -> np.ndarray:
        psi = self.Bs[0]
        for b in self.Bs[1:]:
            psi = np.tensordot(psi, b, axes=(-1, 0))
        return psi.reshape(-1)


def closed_tebd_evolve(
    chain: SystemModel,
    psi0,
    n_steps: int,
    delta_t: float,
    policy: TruncationPolicy = EXACT,
    pair: Optional[Tuple[int, int]] = None,
) -> EvolutionRecord:
    """
    Second-order TEBD of a pure state (odd bonds dt/2, even bonds dt, odd bonds dt/2).
    Records energy, imbalance and the concurrence of ``pair`` (the chain ends by default).
    """
    n, d = chain.n_sites, chain.local_dim
    if n < 2:
        raise ArgumentError("closed TEBD needs at least two sites")
    if n_steps < 1:
        raise ArgumentError(f"n_steps must be >= 1, got {n_steps}")
    if chain.time_dependent:
        raise ArgumentError("closed TEBD supports time-independent chains only")
    pair = pair or (1, n)
    started = time.perf_counter()
    mps = PureMPS.from_vector(psi0, n, d)

    def gate(bond: int, tau: float) -> np.ndarray:
        u = propagator(bond_hamiltonian(chain, bond, 0.0), tau)
        return u.reshape(d, d, d, d)

    half = {b: gate(b, 0.5 * delta_t) for b in range(1, n, 2)}
    full = {b: gate(b, delta_t) for b in range(2, n, 2)}

    record = EvolutionRecord(times=[], n_sites=n, states={tuple(pair): []})
    record.metadata["method"] = "closed"
    discarded = 0.0

    occupation = np.diag([0.0, 1.0]).astype(complex)
    terms = {b: bond_hamiltonian(chain, b, 0.0) for b in range(1, n)}

    def read(k: int) -> None:
        rho_pair = mps.pair_density(*pair)
        energy = sum(mps.bond_expectation(h, b) for b, h in terms.items())
        occ = [mps.site_expectation(occupation, i).real for i in range(1, n + 1)]
        record.times.append(k * delta_t)
        record.states[tuple(pair)].append(rho_pair)
        record.observables.setdefault("energy", []).append(float(np.real(energy)))
        record.observables.setdefault("imbalance", []).append(imbalance_from_occupations(occ))
        record.observables.setdefault("concurrence", []).append(concurrence(rho_pair))
        record.max_bond.append(mps.max_bond)
        record.discarded_weight.append(discarded)
        record.trace_error.append(abs(mps.norm() - 1.0))

    read(0)
    for k in range(1, n_steps + 1):
        for b, g in half.items():
            discarded += mps.update_bond(b, g, policy)
        for b, g in full.items():
            discarded += mps.update_bond(b, g, policy)
        for b, g in half.items():
            discarded += mps.update_bond(b, g, policy)
        read(k)

    record.wall_time = time.perf_counter() - started
    logger.info("closed tebd finished: sites=%d steps=%d peak bond=%d in %.2fs",
                n, n_steps, max(record.max_bond), record.wall_time)
    return record


def evolve_state_vector(chain: SystemModel, psi0, times: Union[Sequence[float], np.ndarray]) -> List[np.ndarray]:
    """Dense exact pure-state trajectory, used to cross-check the closed TEBD."""
    w, v = np.linalg.eigh(chain.hamiltonian())
    c0 = v.conj().T @ np.asarray(psi0, dtype=complex)
    return [v @ (np.exp(-1j * w * t) * c0) for t in times]
