"""Recursive least squares and grey-box thrust/yaw coefficient estimation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InsufficientExcitation, NumericalBreakdown
from ..model import QuadParams, body_rates_from_euler
from .dataset import FlightLog

SMOOTH_TAPS = 51
EXCITATION_VAR = 1e-12


@dataclass
class RlsState:
    """Parameter estimate ``theta``, covariance ``P`` and forgetting factor ``lam``."""

    theta: np.ndarray
    P: np.ndarray
    lam: float = 1.0

    def __post_init__(self):
        self.theta = np.asarray(self.theta, dtype=float).reshape(-1)
        self.P = np.atleast_2d(np.asarray(self.P, dtype=float))
        k = self.theta.size
        if self.P.shape != (k, k):
            raise ValueError(f"P has shape {self.P.shape}, expected ({k}, {k})")
        if not 0 < self.lam <= 1:
            raise ValueError("forgetting factor must lie in (0, 1]")

    @classmethod
    def initial(cls, dim: int, p0: float = 1e6, lam: float = 1.0) -> "RlsState":
        return cls(np.zeros(dim), p0 * np.eye(dim), lam)


def rls_update(s: RlsState, regressor, measurement: float) -> RlsState:
    """One exponentially weighted RLS step; returns a new state."""
    phi = np.asarray(regressor, dtype=float).reshape(-1)
    P_phi = s.P @ phi
    denom = s.lam + phi @ P_phi
    if not denom > 0:
        raise NumericalBreakdown(f"RLS denominator lam + phi'P phi = {denom:g} <= 0")
    gain = P_phi / denom
    theta = s.theta + gain * (measurement - phi @ s.theta)
    P = (s.P - np.outer(gain, phi @ s.P)) / s.lam
    return RlsState(theta, 0.5 * (P + P.T), s.lam)


def rls_fit(Phi, z, p0: float = 1e6, lam: float = 1.0) -> RlsState:
    """Run :func:`rls_update` over the rows of ``Phi`` (T, k) and targets ``z`` (T,)."""
    Phi = np.atleast_2d(np.asarray(Phi, dtype=float))
    z = np.asarray(z, dtype=float).reshape(-1)
    s = RlsState.initial(Phi.shape[1], p0, lam)
    theta, P = s.theta, s.P
    # same recursion as rls_update without the per-step state objects
    for phi, zk in zip(Phi, z):
        P_phi = P @ phi
        denom = lam + phi @ P_phi
        if not denom > 0:
            raise NumericalBreakdown(f"RLS denominator lam + phi'P phi = {denom:g} <= 0")
        gain = P_phi / denom
        theta = theta + gain * (zk - phi @ theta)
        P = (P - np.outer(gain, P_phi)) / lam
        P = 0.5 * (P + P.T)
    return RlsState(theta, P, lam)


def moving_average(a, taps: int = SMOOTH_TAPS) -> np.ndarray:
    """Centred ``taps``-point moving average along axis 0 ('valid' part only)."""
    a = np.asarray(a, dtype=float)
    kernel = np.full(taps, 1.0 / taps)
    if a.ndim == 1:
        return np.convolve(a, kernel, mode="valid")
    return np.column_stack([np.convolve(col, kernel, mode="valid") for col in a.T])


def output_derivatives(y, dt: float, taps: int = SMOOTH_TAPS):
    """Smoothed outputs with first and second central differences.

    Returns ``(ys, yd, ydd, index)`` where ``index`` gives the log rows the
    returned samples belong to (both ends are trimmed).
    """
    ys = moving_average(y, taps) if taps > 1 else np.asarray(y, dtype=float)
    half = (taps - 1) // 2
    yd = (ys[2:] - ys[:-2]) / (2.0 * dt)
    ydd = (ys[2:] - 2.0 * ys[1:-1] + ys[:-2]) / dt**2
    index = np.arange(half + 1, half + 1 + len(yd))
    return ys[1:-1], yd, ydd, index


def _hold_average(a):
    """Average of samples ``k-1`` and ``k``: the ZOH weight seen by a second difference at ``k``."""
    return 0.5 * (a[1:] + a[:-1])


def estimate_coefficients(log: FlightLog, params_known: QuadParams, accel_estimates=None,
                          taps: int = SMOOTH_TAPS) -> tuple[float, float]:
    """Estimate ``(K_T, b)`` from a flight log by RLS on the force and yaw balances.

    Vertical force balance::

        K_T cos(phi) cos(theta) sum(w_i^2) = m (g - Zddot) - Kd_z Zdot

    Yaw moment balance::

        b (-w1^2 + w2^2 - w3^2 + w4^2) = Jz rdot - (Jx - Jy) p q

    Output rates and accelerations come from central differences of the
    moving-average-smoothed outputs. Regressors pass through the same
    smoother, so the linear part of the balance is filtered consistently.

    Parameters
    ----------
    log
        Flight log; motor speeds in row ``k`` are held from ``t_k`` to ``t_{k+1}``.
    params_known
        Supplies ``m``, ``g``, ``Kd_z`` and the inertias.
    accel_estimates
        Optional (T, 6) second derivatives of ``[X, Y, Z, phi, theta, psi]``
        aligned with the log rows, e.g. from inertial sensors (see
        :func:`quadsid.sim.imu_accelerations`). When given they pass through
        the same moving average and replace the finite differences for
        ``Zddot`` and ``rdot``; first derivatives are still taken from the
        smoothed log.
    taps
        Moving-average length (odd).

    Raises
    ------
    InsufficientExcitation
        Either regressor has variance below ``1e-12``.
    """
    if taps < 1 or taps % 2 == 0:
        raise ValueError("taps must be a positive odd integer")
    pr = params_known
    dt = log.dt
    if len(log) < taps + 4:
        raise InsufficientExcitation(f"log too short for a {taps}-tap smoother")

    ys, yd, ydd, idx = output_derivatives(log.y, dt, taps)
    if accel_estimates is not None:
        acc = np.asarray(accel_estimates, dtype=float).reshape(len(log), 6)
        # smoothed like the regressors so both sides of each balance see the same filter
        acc_s = moving_average(acc, taps) if taps > 1 else acc
        ydd = acc_s[idx - (taps - 1) // 2]
    phi, theta = ys[:, 3], ys[:, 4]
    euler_rates = yd[:, 3:6]
    rates = np.asarray(body_rates_from_euler(phi, theta, euler_rates.T)).T
    p, q = rates[:, 0], rates[:, 1]
    # rdot from differentiating r = -sin(phi) thetadot + cos(phi) cos(theta) psidot
    phid, thetad, psid = euler_rates.T
    thetadd, psidd = ydd[:, 4], ydd[:, 5]
    cf, sf, ct, st = np.cos(phi), np.sin(phi), np.cos(theta), np.sin(theta)
    rdot = (-cf * phid * thetad - sf * thetadd - sf * ct * phid * psid
            - cf * st * thetad * psid + cf * ct * psidd)

    w2 = np.square(log.w)
    # w rows k-1 and k act over the second-difference window centred on k
    w2_hold = _hold_average(w2)  # row j corresponds to log row j + 1
    w2_s = moving_average(w2_hold, taps) if taps > 1 else w2_hold
    # after smoothing, row j corresponds to log row j + 1 + half; align with idx
    half = (taps - 1) // 2
    rows = idx - (1 + half)
    w2_s = w2_s[rows]

    tilt = np.cos(phi) * np.cos(theta)
    phi_kt = tilt * w2_s.sum(axis=1)
    z_kt = pr.m * (pr.g - ydd[:, 2]) - pr.Kd_z * yd[:, 2]
    phi_b = -w2_s[:, 0] + w2_s[:, 1] - w2_s[:, 2] + w2_s[:, 3]
    z_b = pr.Jz * rdot - (pr.Jx - pr.Jy) * p * q

    for name, reg in (("thrust", phi_kt), ("yaw", phi_b)):
        if np.var(reg) < EXCITATION_VAR:
            raise InsufficientExcitation(f"{name} regressor variance {np.var(reg):.3g} < {EXCITATION_VAR:g}")

    K_T = _rls_scalar(phi_kt, z_kt)
    b = _rls_scalar(phi_b, z_b)
    return K_T, b


def _rls_scalar(phi, z) -> float:
    # column scaling keeps P0 = 1e6 large relative to the parameter magnitude
    scale = float(np.max(np.abs(phi)))
    s = rls_fit((phi / scale)[:, None], z)
    return float(s.theta[0]) / scale
