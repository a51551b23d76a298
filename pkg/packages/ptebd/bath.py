# packages/ptebd/bath.py
"""
Bosonic baths: spectral densities, the bath autocorrelation C(t), the lineshape
function g(t) (its double time integral) and the discretized influence
coefficients (EtaTable) derived from g.

Units: hbar = k_B = 1. All frequency integrals run over [0, 40 * omega_c].
"""
from __future__ import annotations

import hashlib
import json
import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Callable, Dict, Literal

import numpy as np
from scipy.integrate import quad, quad_vec

from .errors import ArgumentError, NumericError

logger = logging.getLogger(__name__)

QUAD_EPSREL = 1e-10
QUAD_EPSABS = 1e-13
# accepted when the adaptive scheme runs out of intervals but is still this close
QUAD_FALLBACK_TOL = 1e-7
CUTOFF_MULTIPLE = 40.0

Family = Literal["exponential", "gaussian"]


# ------------ Spectral densities ------------
@dataclass(frozen=True)
class SpectralDensity:
    """
    ``exponential``: J(w) = 2 alpha w^zeta / omega_c^(zeta-1) exp(-w/omega_c)
    ``gaussian``:    J(w) = 2 alpha w exp(-w^2/omega_c^2)
    """

    family: Family = "exponential"
    alpha: float = 0.1
    zeta: float = 1.0
    omega_c: float = 4.0

    def __post_init__(self) -> None:
        if self.family not in ("exponential", "gaussian"):
            raise ArgumentError(f"unknown spectral family {self.family!r}")
        if self.alpha < 0:
            raise ArgumentError(f"alpha must be >= 0, got {self.alpha}")
        if self.omega_c <= 0:
            raise ArgumentError(f"omega_c must be > 0, got {self.omega_c}")
        if self.zeta <= 0:
            raise ArgumentError(f"zeta must be > 0, got {self.zeta}")

    @property
    def upper_limit(self) -> float:
        return CUTOFF_MULTIPLE * self.omega_c

    def shape(self, omega):
        """J(omega) / alpha; the alpha-free profile every integral is taken over."""
        w = np.asarray(omega, dtype=float)
        if self.family == "gaussian":
            return 2.0 * w * np.exp(-((w / self.omega_c) ** 2))
        return 2.0 * w ** self.zeta * self.omega_c ** (1.0 - self.zeta) * np.exp(-w / self.omega_c)

    def __call__(self, omega):
        return self.alpha * self.shape(omega)

    def to_dict(self) -> Dict[str, Any]:
        return {"family": self.family, "alpha": self.alpha, "zeta": self.zeta, "omega_c": self.omega_c}


def spectral_value(J: SpectralDensity, omega: float) -> float:
    if omega < 0:
        raise ArgumentError(f"spectral density is defined for omega >= 0, got {omega}")
    return float(J(omega))


def bose_occupation(omega, T: float):
    if T < 0:
        raise ArgumentError(f"temperature must be >= 0, got {T}")
    w = np.asarray(omega, dtype=float)
    if T == 0:
        return np.zeros_like(w)
    return 1.0 / np.expm1(w / T)


def _coth_half(omega: float, T: float) -> float:
    if T == 0:
        return 1.0
    return 1.0 / math.tanh(omega / (2.0 * T))


def _check_temperature(T: float) -> None:
    if T < 0 or not math.isfinite(T):
        raise ArgumentError(f"temperature must be finite and >= 0, got {T}")


# ------------ Quadrature engine ------------
def _breakpoints(upper: float, t_max: float) -> np.ndarray:
    n_osc = int(min(4000, max(16, math.ceil(upper * max(t_max, 1e-3) / math.pi))))
    uniform = np.linspace(0.0, upper, n_osc + 1)[1:-1]
    low = np.geomspace(upper * 1e-10, upper / n_osc, 16)
    return np.unique(np.concatenate([low, uniform]))


def _frequency_integral(kernel: Callable[[float], np.ndarray], upper: float, t_max: float, label: str) -> np.ndarray:
    points = _breakpoints(upper, t_max)
    res, err, info = quad_vec(
        kernel, 0.0, upper,
        epsabs=QUAD_EPSABS, epsrel=QUAD_EPSREL, norm="max",
        limit=20000 + len(points), points=points, full_output=True,
    )
    scale = max(1.0, float(np.max(np.abs(res), initial=0.0)))
    if not info.success:
        if err <= QUAD_FALLBACK_TOL * scale:
            logger.warning("%s: quadrature stopped at error %.3e (%s)", label, err, info.message)
        else:
            raise NumericError(
                f"{label}: quadrature reached error {err:.3e}, requested relative {QUAD_EPSREL:.0e}"
            )
    return res


def _sin_minus_x(x: np.ndarray) -> np.ndarray:
    small = np.abs(x) < 1e-2
    xs = np.where(small, x, 0.0)
    series = -(xs ** 3) / 6.0 + xs ** 5 / 120.0 - xs ** 7 / 5040.0
    return np.where(small, series, np.sin(x) - x)


def bath_correlation(J: SpectralDensity, T: float, t):
    """
    C(t) = (1/pi) int_0^inf dw J(w) [coth(w/2T) cos(wt) - i sin(wt)].
    ``t`` may be a scalar or an array; the return value matches.
    """
    _check_temperature(T)
    times = np.atleast_1d(np.asarray(t, dtype=float))
    n = times.size
    if J.alpha == 0:
        out = np.zeros(n, dtype=complex)
        return out if np.ndim(t) else complex(out[0])

    def kernel(w: float) -> np.ndarray:
        weight = float(J.shape(w)) / math.pi
        wt = w * times
        return np.concatenate([weight * _coth_half(w, T) * np.cos(wt), -weight * np.sin(wt)])

    res = _frequency_integral(kernel, J.upper_limit, float(np.max(np.abs(times))), "bath correlation")
    out = J.alpha * (res[:n] + 1j * res[n:])
    return out if np.ndim(t) else complex(out[0])


def lineshape(J: SpectralDensity, T: float, times) -> np.ndarray:
    """
    g(t) = int_0^t dt' int_0^t' dt'' C(t''), done analytically in time:
    g(t) = (1/pi) int dw J(w) [coth(w/2T) 2 sin^2(wt/2) + i (sin(wt) - wt)] / w^2
    """
    _check_temperature(T)
    times = np.asarray(times, dtype=float).reshape(-1)
    n = times.size
    if J.alpha == 0 or n == 0:
        return np.zeros(n, dtype=complex)

    def kernel(w: float) -> np.ndarray:
        weight = float(J.shape(w)) / (math.pi * w * w)
        wt = w * times
        return np.concatenate([weight * _coth_half(w, T) * 2.0 * np.sin(0.5 * wt) ** 2,
                               weight * _sin_minus_x(wt)])

    res = _frequency_integral(kernel, J.upper_limit, float(np.max(np.abs(times))), "lineshape")
    return J.alpha * (res[:n] + 1j * res[n:])


def correlation_spectrum(J: SpectralDensity, T: float, nu: float, lamb_shift: bool = True) -> complex:
    """
    Gamma(nu) = int_0^inf C(tau) exp(-i nu tau) dtau.

    The real part is closed form (J n for nu > 0, J (n + 1) for nu < 0); the imaginary
    part is the principal value (1/pi) P int J(w) [nu coth(w/2T) - w] / (w^2 - nu^2) dw.
    """
    _check_temperature(T)
    if J.alpha == 0:
        return 0j
    a = abs(nu)
    if nu > 0:
        real = float(J(a) * bose_occupation(a, T))
    elif nu < 0:
        real = float(J(a) * (bose_occupation(a, T) + 1.0))
    else:
        eps = 1e-10 * J.omega_c
        real = T * float(J(eps)) / eps
    if not lamb_shift:
        return complex(real, 0.0)

    upper = J.upper_limit

    def numerator(w: float) -> float:
        return float(J.shape(w)) * (nu * _coth_half(w, T) - w)

    if a == 0:
        imag, err = quad(lambda w: -float(J.shape(w)) / w, 0.0, upper, limit=500, epsrel=QUAD_EPSREL)
    elif a >= upper:
        imag, err = quad(lambda w: numerator(w) / (w * w - nu * nu), 0.0, upper, limit=500, epsrel=QUAD_EPSREL)
    else:
        near, err1 = quad(lambda w: numerator(w) / (w * w - nu * nu), 0.0, a / 2.0, limit=500, epsrel=QUAD_EPSREL)
        far, err2 = quad(lambda w: numerator(w) / (w + a), a / 2.0, upper,
                         weight="cauchy", wvar=a, limit=500, epsrel=QUAD_EPSREL)
        imag, err = near + far, err1 + err2
    if err > QUAD_FALLBACK_TOL * max(1.0, abs(imag)):
        raise NumericError(f"Lamb-shift integral at nu={nu:g} reached error {err:.3e}")
    return complex(real, J.alpha * imag / math.pi)


# ------------ Influence coefficients ------------
def _pairs(values: np.ndarray) -> list:
    return [[float(v.real), float(v.imag)] for v in values]


def _unpairs(rows) -> np.ndarray:
    return np.array([complex(r[0], r[1]) for r in rows], dtype=complex)


@dataclass(frozen=True, eq=False)
class EtaTable:
    """
    Discretized double integrals of C over step windows, indexed by lag m = k - k'.

    ``interior[m]`` couples two full windows of width delta_t (m = 0 is the self term).
    ``start[m]``, ``end[m]`` and ``end_to_start[m]`` are the half-window boundary classes
    of the endpoint grid (first point, last point, and first-to-last).
    Lags beyond ``memory_cutoff`` carry no influence.
    """

    delta_t: float
    n_steps: int
    memory_cutoff: int
    interior: np.ndarray
    start: np.ndarray
    end: np.ndarray
    end_to_start: np.ndarray
    spectral: SpectralDensity = field(default_factory=SpectralDensity)
    temperature: float = 0.0

    def coefficient(self, m: int, kind: str = "interior") -> complex:
        if m < 0:
            raise ArgumentError(f"lag must be >= 0, got {m}")
        if m > self.memory_cutoff:
            return 0j
        return complex(getattr(self, kind)[m])

    def with_memory(self, memory_cutoff: int) -> "EtaTable":
        """Same bath with a shorter memory; entries are reused, not recomputed."""
        if not 1 <= memory_cutoff <= self.memory_cutoff:
            raise ArgumentError(f"memory cutoff must lie in 1..{self.memory_cutoff}, got {memory_cutoff}")
        k = memory_cutoff + 1
        return EtaTable(
            delta_t=self.delta_t, n_steps=self.n_steps, memory_cutoff=memory_cutoff,
            interior=self.interior[:k].copy(), start=self.start[:k].copy(),
            end=self.end[:k].copy(), end_to_start=self.end_to_start[:k].copy(),
            spectral=self.spectral, temperature=self.temperature,
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "spectral": self.spectral.to_dict(),
            "temperature": self.temperature,
            "delta_t": self.delta_t,
            "n_steps": self.n_steps,
            "memory_cutoff": self.memory_cutoff,
            "entries": {
                "interior": _pairs(self.interior),
                "start": _pairs(self.start),
                "end": _pairs(self.end),
                "end_to_start": _pairs(self.end_to_start),
            },
        }

    def to_json(self) -> str:
        payload = self.to_dict()
        payload["checksum"] = self.checksum
        return json.dumps(payload, indent=2)

    @cached_property
    def checksum(self) -> str:
        canonical = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "EtaTable":
        entries = data["entries"]
        table = cls(
            delta_t=float(data["delta_t"]),
            n_steps=int(data["n_steps"]),
            memory_cutoff=int(data["memory_cutoff"]),
            interior=_unpairs(entries["interior"]),
            start=_unpairs(entries["start"]),
            end=_unpairs(entries["end"]),
            end_to_start=_unpairs(entries["end_to_start"]),
            spectral=SpectralDensity(**data["spectral"]),
            temperature=float(data["temperature"]),
        )
        expected = data.get("checksum")
        if expected and expected != table.checksum:
            raise NumericError("eta table checksum mismatch; the document was altered")
        return table

    @classmethod
    def from_json(cls, text: str) -> "EtaTable":
        return cls.from_dict(json.loads(text))


def eta_coefficients(J: SpectralDensity, T: float, delta_t: float, n_steps: int, memory_cutoff: int) -> EtaTable:
    """
    Every coefficient is a second difference of g sampled on the half-step grid
    G[j] = g(j * delta_t / 2). For windows A = [a0, a1] later than B = [b0, b1]:
    int_A int_B C = g(a1 - b0) - g(a1 - b1) - g(a0 - b0) + g(a0 - b1).
    """
    if delta_t <= 0:
        raise ArgumentError(f"delta_t must be > 0, got {delta_t}")
    if not 1 <= memory_cutoff <= n_steps:
        raise ArgumentError(f"memory_cutoff must lie in 1..n_steps={n_steps}, got {memory_cutoff}")
    _check_temperature(T)

    K = memory_cutoff
    G = lineshape(J, T, 0.5 * delta_t * np.arange(2 * K + 3))
    m = np.arange(1, K + 1)

    interior = np.empty(K + 1, dtype=complex)
    interior[0] = G[2]
    interior[1:] = G[2 * m + 2] - 2.0 * G[2 * m] + G[2 * m - 2]

    # half window at a boundary point against a full window around an interior point;
    # the start and end classes coincide for a stationary bath
    boundary = np.empty(K + 1, dtype=complex)
    boundary[0] = G[1]
    boundary[1:] = G[2 * m + 1] - G[2 * m] - G[2 * m - 1] + G[2 * m - 2]

    end_to_start = np.empty(K + 1, dtype=complex)
    end_to_start[0] = G[1]
    end_to_start[1:] = G[2 * m] - 2.0 * G[2 * m - 1] + G[2 * m - 2]

    logger.info(
        "eta table: %s alpha=%g zeta=%g omega_c=%g T=%g dt=%g memory=%d",
        J.family, J.alpha, J.zeta, J.omega_c, T, delta_t, K,
    )
    return EtaTable(
        delta_t=float(delta_t), n_steps=int(n_steps), memory_cutoff=int(K),
        interior=interior, start=boundary, end=boundary.copy(), end_to_start=end_to_start,
        spectral=J, temperature=float(T),
    )
