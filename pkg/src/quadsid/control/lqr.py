"""Discrete output-weighted LQR with a reference feed-forward gain."""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .. import matfile
from ..errors import LogFormatError, NoConvergence, NotStabilizable, SingularClosedLoop
from ..sysid.subspace import StateSpaceModel

DARE_TOL = 1e-12
DARE_MAX_ITER = 10_000
DIVERGENCE_NORM = 1e14


def _as_weight(w, size: int) -> np.ndarray:
    w = np.asarray(w, dtype=float)
    if w.ndim == 0:
        return float(w) * np.eye(size)
    w = np.atleast_2d(w)
    if w.shape != (size, size):
        raise ValueError(f"weight has shape {w.shape}, expected ({size}, {size})")
    return w


@dataclass
class LqrWeights:
    """Output weight ``Q`` (p x p) and input weight ``R`` (m x m); scalars mean ``s * I``."""

    Q: float | np.ndarray = 1.0
    R: float | np.ndarray = 0.001

    def matrices(self, p: int, m: int) -> tuple[np.ndarray, np.ndarray]:
        Q, R = _as_weight(self.Q, p), _as_weight(self.R, m)
        if not np.allclose(Q, Q.T) or np.min(np.linalg.eigvalsh(0.5 * (Q + Q.T))) < -1e-12:
            raise ValueError("Q must be symmetric positive semidefinite")
        if not np.allclose(R, R.T) or np.min(np.linalg.eigvalsh(0.5 * (R + R.T))) <= 0:
            raise ValueError("R must be symmetric positive definite")
        return Q, R


@dataclass
class LqrGains:
    Kf: np.ndarray
    Kr: np.ndarray
    S: np.ndarray

    def to_text(self) -> str:
        return matfile.dumps({}, {"Kf": self.Kf, "Kr": self.Kr, "S": self.S})

    @classmethod
    def from_text(cls, text: str, source="<gains>") -> "LqrGains":
        _, blocks = matfile.loads(text, source)
        matfile.require(blocks, ("Kf", "Kr", "S"), source)
        gains = cls(blocks["Kf"], blocks["Kr"], blocks["S"])
        if gains.Kf.shape[0] != gains.Kr.shape[0] or gains.S.shape != (gains.Kf.shape[1],) * 2:
            raise LogFormatError(f"{source}: inconsistent gain dimensions")
        return gains

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_text(), encoding="utf-8", newline="\n")

    @classmethod
    def load(cls, path: str | Path) -> "LqrGains":
        path = Path(path)
        return cls.from_text(path.read_text(encoding="utf-8"), str(path))


def dare_residual(S, A, B, Qs, R) -> np.ndarray:
    BtSA = B.T @ S @ A
    return S - (Qs + A.T @ S @ A - BtSA.T @ np.linalg.solve(R + B.T @ S @ B, BtSA))


def _riccati_map(S, A, B, Qs, R):
    BtSA = B.T @ S @ A
    out = Qs + A.T @ S @ A - BtSA.T @ np.linalg.solve(R + B.T @ S @ B, BtSA)
    return 0.5 * (out + out.T)


def dare_solve(A, B, Qs, R, method: str = "doubling") -> np.ndarray:
    """Stabilising solution of ``S = Qs + A'SA - A'SB (R + B'SB)^-1 B'SA``.

    ``method="iteration"`` runs the Riccati fixed-point map from ``S0 = Qs``
    (at most 10,000 steps). ``method="doubling"`` evaluates the same sequence
    at steps 1, 2, 4, 8, ... (structure-preserving doubling), which is what
    makes slow closed loops such as 1 kHz quadrotor models tractable. Both stop
    when successive iterates agree to ``1e-12`` relative to ``max(1, |S|)``.

    Raises
    ------
    NoConvergence
        Iteration cap reached.
    NotStabilizable
        Iterates diverge (``|S| > 1e14``).
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    Qs = np.atleast_2d(np.asarray(Qs, dtype=float))
    R = np.atleast_2d(np.asarray(R, dtype=float))
    n = A.shape[0]

    if method == "iteration":
        S = Qs.copy()
        for _ in range(DARE_MAX_ITER):
            S_next = _riccati_map(S, A, B, Qs, R)
            scale = max(1.0, np.max(np.abs(S_next)))
            if not np.all(np.isfinite(S_next)) or scale > DIVERGENCE_NORM:
                raise NotStabilizable("Riccati iterates diverge; (A, B) is not stabilisable")
            if np.max(np.abs(S_next - S)) < DARE_TOL * scale:
                return S_next
            S = S_next
        raise NoConvergence(f"Riccati iteration did not converge in {DARE_MAX_ITER} steps")

    if method != "doubling":
        raise ValueError(f"unknown method {method!r}")
    Ak = A.copy()
    Gk = B @ np.linalg.solve(R, B.T)
    Hk = Qs.copy()
    eye = np.eye(n)
    # 2**60 Riccati steps is far beyond anything that still converges
    for _ in range(60):
        W = eye + Gk @ Hk
        W_A = np.linalg.solve(W, Ak)
        W_G = np.linalg.solve(W, Gk)
        A_next = Ak @ W_A
        G_next = Gk + Ak @ W_G @ Ak.T
        H_next = Hk + Ak.T @ Hk @ W_A
        G_next = 0.5 * (G_next + G_next.T)
        H_next = 0.5 * (H_next + H_next.T)
        scale = max(1.0, np.max(np.abs(H_next)))
        if not np.all(np.isfinite(H_next)) or scale > DIVERGENCE_NORM:
            raise NotStabilizable("Riccati iterates diverge; (A, B) is not stabilisable")
        done = np.max(np.abs(H_next - Hk)) < DARE_TOL * scale
        Ak, Gk, Hk = A_next, G_next, H_next
        if done:
            return Hk
    raise NoConvergence("Riccati doubling did not converge")


def spectral_radius(M) -> float:
    return float(np.max(np.abs(np.linalg.eigvals(M)))) if np.size(M) else 0.0


def lqr_output_weighted(m: StateSpaceModel, w: LqrWeights, method: str = "doubling") -> LqrGains:
    """Feedback gain minimising ``sum y'Qy + u'Ru`` for ``y = Cx + Du``.

    Forms ``Qs = C'QC``, ``N = C'QD``, ``Rs = R + D'QD``, removes the cross term
    and solves the resulting DARE. ``Kr`` is filled by :func:`reference_gain`
    (left at zero when ``Q = 0``, where it vanishes anyway).
    """
    A, B, C, D = m.A, m.B, m.C, m.D
    Q, R = w.matrices(m.n_outputs, m.n_inputs)
    Qs = C.T @ Q @ C
    N = C.T @ Q @ D
    Rs = R + D.T @ Q @ D
    Rs_inv_Nt = np.linalg.solve(Rs, N.T)
    A_bar = A - B @ Rs_inv_Nt
    Q_bar = Qs - N @ Rs_inv_Nt
    S = dare_solve(A_bar, B, 0.5 * (Q_bar + Q_bar.T), Rs, method=method)
    Kf = np.linalg.solve(Rs + B.T @ S @ B, B.T @ S @ A + N.T)
    rho = spectral_radius(A - B @ Kf)
    if not np.any(Q):
        warnings.warn("Q = 0: no output penalty, feedback gain is zero", stacklevel=2)
    elif rho >= 1.0:
        raise NotStabilizable(f"closed-loop spectral radius {rho:.12g} >= 1")
    gains = LqrGains(Kf=Kf, Kr=np.zeros((m.n_inputs, m.n_outputs)), S=S)
    if np.any(Q):
        gains.Kr = reference_gain(m, gains, w)
    return gains


def reference_gain(m: StateSpaceModel, g: LqrGains, w: LqrWeights) -> np.ndarray:
    """``Kr = (B'SB + R)^-1 B' [I - (A - B Kf)']^-1 C'Q``."""
    A, B, C = m.A, m.B, m.C
    Q, R = w.matrices(m.n_outputs, m.n_inputs)
    bracket = np.eye(m.n) - (A - B @ g.Kf).T
    if np.linalg.cond(bracket) > 1e14:
        raise SingularClosedLoop("I - (A - B Kf)' is singular")
    return np.linalg.solve(B.T @ g.S @ B + R, B.T @ np.linalg.solve(bracket, C.T @ Q))


def closed_loop_dc_gain(m: StateSpaceModel, g: LqrGains) -> np.ndarray:
    """Steady-state map from reference to output, ``(C - D Kf)(I - A + B Kf)^-1 B Kr + D Kr``."""
    A_cl = m.A - m.B @ g.Kf
    C_cl = m.C - m.D @ g.Kf
    return C_cl @ np.linalg.solve(np.eye(m.n) - A_cl, m.B @ g.Kr) + m.D @ g.Kr


def lqr_control(g: LqrGains, x_hat, ref) -> np.ndarray:
    """``u = Kr ref - Kf x_hat`` (model input coordinates, no saturation)."""
    return g.Kr @ np.asarray(ref, dtype=float) - g.Kf @ np.asarray(x_hat, dtype=float)


def predictor_gain(A, C, W, V) -> np.ndarray:
    """Steady-state one-step predictor gain ``A P C' (C P C' + V)^-1``.

    ``P`` solves the filter Riccati equation, i.e. the DARE of ``(A', C')``
    with process covariance ``W`` and measurement covariance ``V``.
    """
    A, C = np.atleast_2d(A), np.atleast_2d(C)
    P = dare_solve(A.T, C.T, W, V)
    return A @ P @ C.T @ np.linalg.inv(C @ P @ C.T + V)


def innovation_gain(m: StateSpaceModel, process_weight=1.0, measurement_weight=1.0) -> np.ndarray:
    """Steady-state predictor gain ``K`` for the innovation form of ``m``.

    Process covariance is ``process_weight * B B'`` (plus a tiny diagonal so
    every state is reachable by the noise) and measurement covariance is
    ``measurement_weight * I``.
    """
    A, B, C = m.A, m.B, m.C
    W = process_weight * (B @ B.T) + 1e-12 * np.trace(B @ B.T) * np.eye(m.n)
    V = _as_weight(measurement_weight, m.n_outputs)
    return predictor_gain(A, C, W, V)
