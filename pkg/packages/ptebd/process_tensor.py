# packages/ptebd/process_tensor.py
"""
Process tensors: the influence functional of one bath as a matrix product operator
over time steps.

Influence functions are built in the eigenbasis of the system coupling operator, where
each Liouville index ``s = p*d + q`` carries the eigenvalue pair (lam[p], lam[q]).
The MPO is assembled row by row, from the longest retained lag down to the self term,
compressing after every row. The finished cores act on the computational Liouville
basis with legs ``(in, out, left, right)``.
"""
from __future__ import annotations

import json
import logging
import struct
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import numpy as np
from opt_einsum import contract

from .bath import EtaTable
from .errors import ArgumentError, ShapeError
from .liouville import trace_cap
from .tensor_core import TruncationPolicy, compress_train

logger = logging.getLogger(__name__)

MAGIC = b"PTEB"
FORMAT_VERSION = 1


# ------------ Influence functions ------------
@dataclass(frozen=True, eq=False)
class InfluenceFunction:
    """
    ``tensor`` is ``(d, d)`` for lag 0 (indexed by the later pair p, q) and
    ``(d, d, d, d)`` for lag m > 0 (later p, q then earlier p', q').
    """

    lag: int
    tensor: np.ndarray

    @property
    def matrix(self) -> np.ndarray:
        d = self.tensor.shape[0]
        if self.lag == 0:
            return self.tensor.reshape(d * d)
        return self.tensor.reshape(d * d, d * d)


def influence_function(eta: EtaTable, m: int, eigenvalues) -> InfluenceFunction:
    """
    exp(-(lam_p - lam_q) (eta lam_p' - conj(eta) lam_q')); the self term uses the later
    pair on both sides. Lags beyond the memory cutoff give all-ones.
    """
    if m < 0:
        raise ArgumentError(f"lag must be >= 0, got {m}")
    lam = np.asarray(eigenvalues, dtype=float).reshape(-1)
    d = lam.size
    diff = lam[:, None] - lam[None, :]
    if m == 0:
        e = eta.coefficient(0)
        return InfluenceFunction(0, np.exp(-diff * (e * lam[:, None] - np.conj(e) * lam[None, :])))
    if m > eta.memory_cutoff:
        return InfluenceFunction(m, np.ones((d, d, d, d), dtype=complex))
    e = eta.coefficient(m)
    earlier = e * lam[:, None] - np.conj(e) * lam[None, :]
    return InfluenceFunction(m, np.exp(-diff[:, :, None, None] * earlier[None, None, :, :]))


# ------------ Process tensor ------------
@dataclass(eq=False)
class ProcessTensor:
    cores: List[np.ndarray]
    delta_t: float
    coupling: np.ndarray
    eta: Optional[EtaTable] = None
    policy: TruncationPolicy = field(default_factory=TruncationPolicy)
    discarded_weight: float = 0.0
    eta_checksum: str = ""

    @property
    def n_steps(self) -> int:
        return len(self.cores)

    @property
    def phys_dim(self) -> int:
        return self.cores[0].shape[0]

    @property
    def bonds(self) -> List[int]:
        return [self.cores[0].shape[2]] + [c.shape[3] for c in self.cores]

    @property
    def max_bond(self) -> int:
        return max(self.bonds)

    @property
    def memory_cutoff(self) -> int:
        return self.eta.memory_cutoff if self.eta is not None else 0

    @cached_property
    def caps(self) -> List[np.ndarray]:
        """``caps[k]`` closes the right bond of step k by tracing every later step."""
        d = int(round(np.sqrt(self.phys_dim)))
        t = trace_cap(d)
        caps: List[np.ndarray] = [np.ones(1, dtype=complex)]
        for core in reversed(self.cores):
            caps.append(contract("i,iolr,o,r->l", t, core, t, caps[-1]) / d)
        return caps[::-1]

    def core(self, step: int) -> np.ndarray:
        if not 1 <= step <= self.n_steps:
            raise ArgumentError(f"step {step} outside 1..{self.n_steps}")
        return self.cores[step - 1]

    def diagnostics(self) -> Dict[str, object]:
        return {
            "n_steps": self.n_steps,
            "memory_cutoff": self.memory_cutoff,
            "max_bond": self.max_bond,
            "discarded_weight": self.discarded_weight,
            "eta_checksum": self.eta_checksum,
        }


def _coupling_basis(coupling) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Returns (eigenvalues, eigenvectors, operator) for a matrix or an eigenvalue list."""
    op = np.asarray(coupling, dtype=complex)
    if op.ndim == 1:
        lam = op.real.astype(float)
        return lam, np.eye(lam.size, dtype=complex), np.diag(lam).astype(complex)
    if op.ndim != 2 or op.shape[0] != op.shape[1]:
        raise ShapeError(f"coupling operator must be square, got shape {op.shape}")
    if np.max(np.abs(op - op.conj().T)) > 1e-10:
        raise ArgumentError("coupling operator must be Hermitian")
    lam, vecs = np.linalg.eigh(op)
    return lam, vecs, op


def _compress_row(cores: List[np.ndarray], policy: TruncationPolicy) -> Tuple[List[np.ndarray], float]:
    shapes = [c.shape for c in cores]
    flat = [c.reshape(s[0], -1, s[-1]) for c, s in zip(cores, shapes)]
    out, discarded = compress_train(flat, policy)
    return [c.reshape((c.shape[0],) + s[1:-1] + (c.shape[-1],)) for c, s in zip(out, shapes)], discarded


def _assemble(i0: np.ndarray, lags: List[np.ndarray], n_steps: int, policy: TruncationPolicy):
    """
    Diagonal MPO cores ``(left, s, right)`` in the coupling eigenbasis.

    Column n holds the influence of every pair (n, n - m). Each row m contributes a
    node per column whose lower leg carries s_n and whose upper leg hands s_{n-m} to
    the next row; the delta on that upper leg is copied to the right neighbour
    column where the row above expects it.
    """
    D = i0.size
    K = len(lags)
    eye = np.eye(D, dtype=complex)
    cores = [np.ones((1, D, 1, 1), dtype=complex) for _ in range(n_steps)]
    discarded = 0.0
    for m in range(K, 0, -1):
        row = []
        for n in range(1, n_steps + 1):
            exists = n - m >= 1
            if exists:
                node = lags[m - 1][:, :, None]
                if m < K and n < n_steps:
                    node = node * eye[None, :, :]
            else:
                node = np.ones((D, 1, 1), dtype=complex)
            grown = contract("lxar,xyb->laxyrb", cores[n - 1], node)
            l, a, x, y, r, b = grown.shape
            row.append(grown.reshape(l * a, x, y, r * b))
        cores, dw = _compress_row(row, policy)
        discarded += dw
        logger.debug("process tensor row %d: max bond %d", m, max(c.shape[-1] for c in cores))

    final = []
    for n in range(1, n_steps + 1):
        node = i0[:, None] * eye if (K >= 1 and n < n_steps) else i0[:, None]
        grown = contract("lsar,sb->lasrb", cores[n - 1], node)
        l, a, s, r, b = grown.shape
        final.append(grown.reshape(l * a, s, r * b))
    final, dw = compress_train(final, policy)
    return final, discarded + dw


def build_process_tensor(
    eta: EtaTable,
    n_steps: int,
    coupling,
    policy: TruncationPolicy = TruncationPolicy(),
) -> ProcessTensor:
    """
    ``coupling`` is the system-side coupling operator (matrix) or, when the computational
    basis already diagonalizes it, its eigenvalues.
    """
    if n_steps < 1:
        raise ArgumentError(f"n_steps must be >= 1, got {n_steps}")
    if eta.memory_cutoff > n_steps:
        raise ArgumentError(f"memory cutoff {eta.memory_cutoff} exceeds n_steps={n_steps}")
    lam, vecs, op = _coupling_basis(coupling)
    d = lam.size
    memory = min(eta.memory_cutoff, n_steps - 1)

    i0 = influence_function(eta, 0, lam).matrix
    lags = [influence_function(eta, m, lam).matrix for m in range(1, memory + 1)]
    diag_cores, discarded = _assemble(i0, lags, n_steps, policy)

    w = np.kron(vecs, vecs.conj())
    cores = [contract("os,lsr,is->iolr", w, c, w.conj()) for c in diag_cores]
    pt = ProcessTensor(
        cores=cores, delta_t=eta.delta_t, coupling=op, eta=eta, policy=policy,
        discarded_weight=discarded, eta_checksum=eta.checksum,
    )
    logger.info(
        "process tensor built: steps=%d memory=%d d=%d max bond=%d discarded=%.3e",
        n_steps, memory, d, pt.max_bond, discarded,
    )
    return pt


def restrict(pt: ProcessTensor, k: int) -> ProcessTensor:
    """Trace-cap every step after ``k``; the result is the k-step process tensor."""
    if not 0 < k <= pt.n_steps:
        raise ArgumentError(f"restriction step {k} outside 1..{pt.n_steps}")
    if k == pt.n_steps:
        return pt
    last = contract("iolr,r->iol", pt.cores[k - 1], pt.caps[k])[..., None]
    return ProcessTensor(
        cores=pt.cores[: k - 1] + [last], delta_t=pt.delta_t, coupling=pt.coupling,
        eta=pt.eta, policy=pt.policy, discarded_weight=pt.discarded_weight,
        eta_checksum=pt.eta_checksum,
    )


def rebuild_with_memory(pt: ProcessTensor, memory_cutoff: int) -> ProcessTensor:
    if pt.eta is None:
        raise ArgumentError("process tensor carries no eta table to rebuild from")
    return build_process_tensor(pt.eta.with_memory(memory_cutoff), pt.n_steps, pt.coupling, pt.policy)


# ------------ Cache ------------
class ProcessTensorCache:
    """Build each distinct (bath, length, coupling, policy) once per run."""

    def __init__(self) -> None:
        self._store: Dict[tuple, ProcessTensor] = {}

    def get(self, eta: EtaTable, n_steps: int, coupling, policy: TruncationPolicy) -> ProcessTensor:
        op = np.ascontiguousarray(np.asarray(coupling, dtype=complex))
        key = (eta.checksum, n_steps, op.tobytes(), op.shape, policy)
        if key not in self._store:
            self._store[key] = build_process_tensor(eta, n_steps, op, policy)
        else:
            logger.debug("reusing process tensor %s", eta.checksum[:12])
        return self._store[key]

    def __len__(self) -> int:
        return len(self._store)


# ------------ Binary container ------------
def save(pt: ProcessTensor, path: Union[str, Path]) -> Path:
    """
    Header ``PTEB`` + little-endian uint32 (version, N, phys_dim, bonds...) then each
    core as complex64 in ``(in, out, left, right)`` C order. A JSON sidecar next to the
    file records the bath provenance.
    """
    from .export import atomic_write_bytes, atomic_write_text

    path = Path(path)
    header = MAGIC + struct.pack("<3I", FORMAT_VERSION, pt.n_steps, pt.phys_dim)
    header += struct.pack(f"<{len(pt.bonds)}I", *pt.bonds)
    payload = b"".join(np.ascontiguousarray(c, dtype="<c8").tobytes() for c in pt.cores)
    atomic_write_bytes(path, header + payload)

    sidecar = {
        "delta_t": pt.delta_t,
        "coupling": [[[float(z.real), float(z.imag)] for z in row] for row in pt.coupling],
        "policy": {"epsilon": pt.policy.epsilon, "max_bond": pt.policy.max_bond},
        "discarded_weight": pt.discarded_weight,
        "eta_checksum": pt.eta_checksum,
        "eta": pt.eta.to_dict() if pt.eta is not None else None,
    }
    atomic_write_text(path.with_suffix(".json"), json.dumps(sidecar, indent=2))
    return path


def load(path: Union[str, Path]) -> ProcessTensor:
    path = Path(path)
    blob = path.read_bytes()
    if blob[:4] != MAGIC:
        raise ShapeError(f"{path} is not a process tensor container")
    version, n_steps, phys = struct.unpack_from("<3I", blob, 4)
    if version != FORMAT_VERSION:
        raise ShapeError(f"unsupported container version {version}")
    offset = 16
    bonds = struct.unpack_from(f"<{n_steps + 1}I", blob, offset)
    offset += 4 * (n_steps + 1)
    cores = []
    for n in range(n_steps):
        shape = (phys, phys, bonds[n], bonds[n + 1])
        count = int(np.prod(shape))
        flat = np.frombuffer(blob, dtype="<c8", count=count, offset=offset)
        cores.append(flat.astype(complex).reshape(shape))
        offset += 8 * count

    meta = json.loads(path.with_suffix(".json").read_text(encoding="utf-8"))
    eta = EtaTable.from_dict(meta["eta"]) if meta.get("eta") else None
    coupling = np.array([[complex(*z) for z in row] for row in meta["coupling"]], dtype=complex)
    return ProcessTensor(
        cores=cores, delta_t=float(meta["delta_t"]), coupling=coupling, eta=eta,
        policy=TruncationPolicy(**meta["policy"]), discarded_weight=float(meta["discarded_weight"]),
        eta_checksum=meta["eta_checksum"],
    )
