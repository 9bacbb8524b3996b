"""Point-particle limit and its comparison with the measured soliton track."""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .errors import AlignmentError, InsufficientDataError, ParameterError
from .model import PotentialSpec

TIME_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class ClassicalTrajectory:
    times: np.ndarray
    q: np.ndarray        # (n, dim)
    p: np.ndarray        # (n, dim)
    energy: np.ndarray   # |p|^2/(2m) + V(q)
    m: float

    def energy_drift(self) -> float:
        e0 = self.energy[0]
        return float(np.max(np.abs(self.energy - e0)) / max(abs(e0), 1e-300))


def particle_momentum(p, m_eps, m: float) -> np.ndarray:
    """m p_s / m_s: the soliton momentum rescaled to the particle mass.

    The soliton carries only the fraction m_s/m of the charge, so its
    momentum is p_s = m_s v; the matching particle momentum is m v.
    """
    p = np.asarray(p, dtype=float)
    m_eps = np.asarray(m_eps, dtype=float)
    if p.ndim > m_eps.ndim:
        m_eps = m_eps.reshape(m_eps.shape + (1,) * (p.ndim - m_eps.ndim))
    return m * p / m_eps


def _force(potential: PotentialSpec, q):
    return -potential.gradient(q.reshape(-1, 1))[:, 0]


def _energy(potential, q, p, m):
    return float(p @ p) / (2 * m) + float(potential.value(q.reshape(-1, 1))[0])


def integrate_classical(q0, p0, potential: PotentialSpec, m: float, T: float,
                        dt: float) -> ClassicalTrajectory:
    """Classical fourth-order Runge-Kutta for q' = p/m, p' = -grad V(q)."""
    if not dt > 0:
        raise ParameterError(f"dt must be positive, got {dt}")
    if not m > 0:
        raise ParameterError(f"mass must be positive, got {m}")
    q = np.atleast_1d(np.asarray(q0, dtype=float)).copy()
    p = np.atleast_1d(np.asarray(p0, dtype=float)).copy()
    n = int(round(T / dt))
    Q = np.empty((n + 1, q.size))
    P = np.empty_like(Q)
    E = np.empty(n + 1)
    Q[0], P[0], E[0] = q, p, _energy(potential, q, p, m)
    for i in range(n):
        k1q, k1p = p / m, _force(potential, q)
        k2q, k2p = (p + 0.5 * dt * k1p) / m, _force(potential, q + 0.5 * dt * k1q)
        k3q, k3p = (p + 0.5 * dt * k2p) / m, _force(potential, q + 0.5 * dt * k2q)
        k4q, k4p = (p + dt * k3p) / m, _force(potential, q + dt * k3q)
        q = q + dt / 6 * (k1q + 2 * k2q + 2 * k3q + k4q)
        p = p + dt / 6 * (k1p + 2 * k2p + 2 * k3p + k4p)
        Q[i + 1], P[i + 1], E[i + 1] = q, p, _energy(potential, q, p, m)
    return ClassicalTrajectory(np.arange(n + 1) * dt, Q, P, E, m)


@dataclass(frozen=True, eq=False)
class ReplayResidual:
    times: np.ndarray    # interior sample times
    rq: np.ndarray       # dq/dt - (p/m_s + K)
    rp: np.ndarray       # dp/dt - (-grad V(q) + F + H)

    @property
    def max_q(self) -> float:
        return float(np.max(np.abs(self.rq))) if self.rq.size else 0.0

    @property
    def max_p(self) -> float:
        return float(np.max(np.abs(self.rp))) if self.rp.size else 0.0


def _as2d(a, n):
    a = np.asarray(a, dtype=float)
    return a.reshape(n, -1)


def _check_uniform(t):
    t = np.asarray(t, dtype=float)
    h = np.diff(t)
    if np.any(h <= 0) or np.max(np.abs(h - h[0])) > TIME_TOL * max(1.0, abs(h[0])):
        raise AlignmentError("series is not uniformly sampled")
    return float(h[0])


def replay_effective(t, q, p, m_eps, K, F, H, potential: PotentialSpec) -> ReplayResidual:
    """Residuals of the soliton equations of motion by centred differences."""
    t = np.asarray(t, dtype=float)
    n = t.size
    if n < 3:
        raise InsufficientDataError(f"need at least 3 samples, got {n}")
    h = _check_uniform(t)
    q, p, K, F, H = (_as2d(a, n) for a in (q, p, K, F, H))
    m_eps = np.asarray(m_eps, dtype=float).reshape(n, 1)
    dq = (q[2:] - q[:-2]) / (2 * h)
    dp = (p[2:] - p[:-2]) / (2 * h)
    grad_V = potential.gradient(q.T).T
    rq = dq - (p / m_eps + K)[1:-1]
    rp = dp - (-grad_V + F + H)[1:-1]
    return ReplayResidual(t[1:-1], rq, rp)


def f_integral_coefficient(t, F) -> float:
    """Smallest c with |int_a^b F dt| <= c (1 + |b - a|) over all sample pairs."""
    t = np.asarray(t, dtype=float)
    F = _as2d(F, t.size)
    if t.size < 2:
        return 0.0
    I = np.vstack([np.zeros((1, F.shape[1])),
                   np.cumsum(0.5 * (F[1:] + F[:-1]) * np.diff(t)[:, None], axis=0)])
    diff = np.linalg.norm(I[:, None, :] - I[None, :, :], axis=-1)
    span = 1 + np.abs(t[:, None] - t[None, :])
    return float(np.max(diff / span))


@dataclass(frozen=True)
class ComparisonReport:
    sup_position_error: float
    sup_momentum_error: float
    max_K: float
    max_H: float
    F_coefficient: float
    eta: float
    eps: float
    R_eps: float

    def as_dict(self) -> dict:
        return asdict(self)


def compare(times, q, p, cls: ClassicalTrajectory, K=None, H=None, F=None,
            eps: float = float("nan"), eta: float = float("nan"),
            R_eps: float = float("nan")) -> ComparisonReport:
    """Sup-norm distance between soliton and particle over the common samples."""
    times = np.asarray(times, dtype=float)
    n = times.size
    if n == 0:
        raise InsufficientDataError("empty series")
    if cls.times.size != n or np.max(np.abs(cls.times - times)) > TIME_TOL * max(1.0, times[-1]):
        # the particle may be sampled more finely: pick matching times
        idx = np.searchsorted(cls.times, times - TIME_TOL)
        if np.any(idx >= cls.times.size) or np.max(np.abs(cls.times[np.minimum(idx, cls.times.size - 1)] - times)) > TIME_TOL * max(1.0, times[-1]):
            raise AlignmentError("soliton and particle series are sampled at different times")
        cq, cp = cls.q[idx], cls.p[idx]
    else:
        cq, cp = cls.q, cls.p
    q = _as2d(q, n)
    p = _as2d(p, n)

    def vmax(a):
        if a is None:
            return float("nan")
        return float(np.max(np.linalg.norm(_as2d(a, n), axis=1)))

    return ComparisonReport(
        sup_position_error=float(np.max(np.linalg.norm(q - cq, axis=1))),
        sup_momentum_error=float(np.max(np.linalg.norm(p - cp, axis=1))),
        max_K=vmax(K), max_H=vmax(H),
        F_coefficient=f_integral_coefficient(times, F) if F is not None else float("nan"),
        eta=float(eta), eps=float(eps), R_eps=float(R_eps),
    )
