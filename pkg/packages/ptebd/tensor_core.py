# packages/ptebd/tensor_core.py
"""
Dense complex tensor algebra: contraction, permutation, truncated SVD and
tensor-train compression. Every other module works on plain ``numpy`` arrays
(the ``DenseTensor`` alias below) and routes its low-rank steps through here.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg as sla

from .errors import ArgumentError, CapacityError, NumericError, ShapeError

logger = logging.getLogger(__name__)

DenseTensor = np.ndarray

# singular values below NOISE_FLOOR * s_max are treated as exact zeros
NOISE_FLOOR = 1e-14


@dataclass(frozen=True)
class TruncationPolicy:
    """Relative singular-value cutoff plus an optional hard bond cap."""

    epsilon: float = 0.0
    max_bond: Optional[int] = None

    def __post_init__(self) -> None:
        if not 0.0 <= self.epsilon < 1.0:
            raise ArgumentError(f"epsilon must lie in [0, 1), got {self.epsilon}")
        if self.max_bond is not None and self.max_bond < 1:
            raise ArgumentError(f"max_bond must be a positive integer, got {self.max_bond}")


EXACT = TruncationPolicy()


def as_tensor(a) -> DenseTensor:
    t = np.asarray(a, dtype=complex)
    if not np.all(np.isfinite(t)):
        raise NumericError(f"tensor of shape {t.shape} holds non-finite entries")
    return t


# ------------ Contraction ------------
def contract(a: DenseTensor, b: DenseTensor, pairs: Sequence[Tuple[int, int]]) -> DenseTensor:
    """
    Sum over the paired axes; the result keeps the unpaired axes of ``a`` followed
    by those of ``b``.

    >>> contract(np.eye(2), np.array([1.0, 2.0]), [(1, 0)])
    array([1., 2.])
    """
    a = np.asarray(a)
    b = np.asarray(b)
    axes_a, axes_b = [], []
    for ia, ib in pairs:
        if not (-a.ndim <= ia < a.ndim and -b.ndim <= ib < b.ndim):
            raise ArgumentError(f"axis pair ({ia}, {ib}) out of range for ranks {a.ndim}, {b.ndim}")
        if a.shape[ia] != b.shape[ib]:
            raise ShapeError(
                f"cannot contract axis {ia} (dim {a.shape[ia]}) with axis {ib} (dim {b.shape[ib]})"
            )
        axes_a.append(ia % a.ndim)
        axes_b.append(ib % b.ndim)
    if len(set(axes_a)) != len(axes_a) or len(set(axes_b)) != len(axes_b):
        raise ArgumentError("an axis appears in more than one contraction pair")
    return np.tensordot(a, b, axes=(axes_a, axes_b))


def permute(a: DenseTensor, order: Sequence[int]) -> DenseTensor:
    a = np.asarray(a)
    order = list(order)
    if sorted(order) != list(range(a.ndim)):
        raise ArgumentError(f"{order} is not a permutation of the {a.ndim} axes")
    return np.transpose(a, order)


# ------------ Truncated SVD ------------
def _svd(m: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    try:
        return sla.svd(m, full_matrices=False, lapack_driver="gesdd")
    except (np.linalg.LinAlgError, ValueError):
        logger.debug("gesdd failed on %s matrix, retrying with gesvd", m.shape)
    try:
        return sla.svd(m, full_matrices=False, lapack_driver="gesvd")
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise NumericError(f"SVD did not converge for a {m.shape[0]}x{m.shape[1]} matrix") from exc


def truncated_svd(
    m: DenseTensor, policy: TruncationPolicy = EXACT
) -> Tuple[DenseTensor, np.ndarray, DenseTensor, float]:
    """
    Returns ``(U, S, Vh, discarded_weight)`` with ``U @ diag(S) @ Vh`` the truncated
    reconstruction. Kept values satisfy ``s >= epsilon * s_max``; at least one value is
    always kept. Each column of ``U`` is rotated so its largest-modulus entry is real
    and positive, which makes the factors reproducible.
    """
    m = np.asarray(m)
    if m.ndim != 2:
        raise ShapeError(f"truncated_svd needs a matrix, got rank {m.ndim}")
    if not np.all(np.isfinite(m)):
        raise NumericError(f"non-finite entries in {m.shape[0]}x{m.shape[1]} matrix")
    u, s, vh = _svd(m)
    s_max = s[0] if s.size else 0.0

    keep = int(np.count_nonzero(s > NOISE_FLOOR * s_max)) if s_max > 0 else 0
    if policy.epsilon > 0.0:
        keep = min(keep, int(np.count_nonzero(s >= policy.epsilon * s_max)))
    if policy.max_bond is not None and keep > policy.max_bond:
        if policy.epsilon == 0.0:
            raise CapacityError(
                f"rank {keep} exceeds max_bond={policy.max_bond} with epsilon=0; "
                "raise epsilon or the bond cap"
            )
        keep = policy.max_bond
    keep = max(keep, 1)

    discarded = float(np.sum(s[keep:] ** 2))
    u, s, vh = u[:, :keep], s[:keep], vh[:keep, :]

    pivot = np.argmax(np.abs(u), axis=0)
    phase = u[pivot, np.arange(keep)]
    phase = phase / np.abs(phase)
    u = u * phase.conj()[None, :]
    vh = vh * phase[:, None]
    return u, s, vh, discarded


# ------------ Tensor trains ------------
def _equalize(cores: List[np.ndarray], log_scale: float) -> List[np.ndarray]:
    norms = [float(np.linalg.norm(c)) for c in cores]
    if any(n == 0.0 for n in norms):
        return cores
    log_scale += sum(math.log(n) for n in norms)
    per_core = math.exp(log_scale / len(cores))
    return [c * (per_core / n) for c, n in zip(cores, norms)]


def compress_train(
    cores: Sequence[DenseTensor], policy: TruncationPolicy = EXACT
) -> Tuple[List[DenseTensor], float]:
    """
    Compress a tensor train of ``(left, phys, right)`` cores.

    A left-to-right sweep without truncation moves the norm to the last core, then a
    right-to-left sweep truncates each bond at the orthogonality centre. The running
    scale is carried as a logarithm and spread evenly over the cores at the end, so
    trains of thousands of steps neither overflow nor underflow. The discarded weight
    is measured on the unit-normalized train.
    """
    cores = [np.asarray(c) for c in cores]
    n = len(cores)
    if n == 0:
        return [], 0.0
    log_scale = 0.0
    for i in range(n - 1):
        l, p, r = cores[i].shape
        u, s, vh, _ = truncated_svd(cores[i].reshape(l * p, r), EXACT)
        if s[0] > 0:
            log_scale += math.log(s[0])
            s = s / s[0]
        cores[i] = u.reshape(l, p, -1)
        cores[i + 1] = np.tensordot(s[:, None] * vh, cores[i + 1], axes=(1, 0))

    discarded = 0.0
    for i in range(n - 1, 0, -1):
        l, p, r = cores[i].shape
        u, s, vh, dw = truncated_svd(cores[i].reshape(l, p * r), policy)
        if s[0] > 0:
            log_scale += math.log(s[0])
            dw /= s[0] ** 2
            s = s / s[0]
        discarded += dw
        cores[i] = vh.reshape(-1, p, r)
        cores[i - 1] = np.tensordot(cores[i - 1], u * s[None, :], axes=(2, 0))
    return _equalize(cores, log_scale), discarded


def tensor_train(
    vector: DenseTensor, dims: Sequence[int], policy: TruncationPolicy = EXACT
) -> List[DenseTensor]:
    """TT-SVD of a dense vector into ``(left, dims[i], right)`` cores."""
    vector = np.asarray(vector, dtype=complex).reshape(-1)
    if int(np.prod(dims)) != vector.size:
        raise ShapeError(f"vector of size {vector.size} does not factor into {list(dims)}")
    cores: List[np.ndarray] = []
    rest = vector.reshape(1, -1)
    for d in dims[:-1]:
        left = rest.shape[0]
        u, s, vh, _ = truncated_svd(rest.reshape(left * d, -1), policy)
        cores.append(u.reshape(left, d, -1))
        rest = s[:, None] * vh
    cores.append(rest.reshape(rest.shape[0], dims[-1], 1))
    return cores
