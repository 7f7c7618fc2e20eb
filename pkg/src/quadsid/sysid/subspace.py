"""Discrete state-space models and deterministic subspace identification.

The identifier is a past-output MOESP scheme:

1. block-Hankel matrices of past/future inputs and outputs with ``i`` block rows,
2. an LQ factorisation of ``[U_f; 1; W_p; Y_f]`` (``W_p`` = past data used as
   instrument), which removes the future-input contribution from ``Y_f``,
3. an SVD of the oblique projection of ``Y_f`` onto ``W_p``; its leading ``n``
   left singular vectors span the extended observability matrix,
4. the state sequence ``X = S^(1/2) V'`` from the same SVD,
5. ``A``, ``B``, ``C``, ``D`` and affine offsets in one least-squares fit of
   ``[x(k+1); y(k)]`` on ``[x(k); u(k); 1]``.

Step 5 regresses on estimated states instead of fitting the output
simulation error, which stays well conditioned when ``A`` has eigenvalues
at or just beyond the unit circle (integrator chains, closed-loop data).

References
----------
Verhaegen, M., Verdult, V., Filtering and System Identification, CUP 2007, ch. 9.
Van Overschee, P., De Moor, B., Subspace Identification for Linear Systems, 1996.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.linalg import fractional_matrix_power

from .. import matfile
from ..errors import DegenerateReference, LogFormatError, OrderTooLarge, RankDeficientInputs
from .dataset import Dataset

EXCITATION_RTOL = 1e-8
ORDER_RTOL = 1e-10


@dataclass
class StateSpaceModel:
    """Innovation-form discrete model.

    ``x[k+1] = A x[k] + B (u[k] - u0) + K e[k]``,
    ``y[k] = C x[k] + D (u[k] - u0) + e[k]``.

    ``u0`` is the input operating point removed before identification
    (zeros when inputs were not centred).
    """

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray
    K: np.ndarray | None = None
    dt: float = 1.0
    u0: np.ndarray | None = None
    singular_values: np.ndarray | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        self.A = np.atleast_2d(np.asarray(self.A, dtype=float))
        self.B = np.atleast_2d(np.asarray(self.B, dtype=float))
        self.C = np.atleast_2d(np.asarray(self.C, dtype=float))
        self.D = np.atleast_2d(np.asarray(self.D, dtype=float))
        n, m, p = self.A.shape[0], self.B.shape[1], self.C.shape[0]
        self.K = np.zeros((n, p)) if self.K is None else np.atleast_2d(np.asarray(self.K, dtype=float))
        self.u0 = np.zeros(m) if self.u0 is None else np.asarray(self.u0, dtype=float).reshape(-1)
        shapes = {"A": (n, n), "B": (n, m), "C": (p, n), "D": (p, m), "K": (n, p)}
        for name, shape in shapes.items():
            if getattr(self, name).shape != shape:
                raise ValueError(f"{name} has shape {getattr(self, name).shape}, expected {shape}")
        if self.u0.shape != (m,):
            raise ValueError(f"u0 has shape {self.u0.shape}, expected ({m},)")
        for name in ("A", "B", "C", "D", "K", "u0"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise ValueError(f"{name} has non-finite entries")
        if not self.dt > 0:
            raise ValueError("dt must be positive")

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def n_inputs(self) -> int:
        return self.B.shape[1]

    @property
    def n_outputs(self) -> int:
        return self.C.shape[0]

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvals(self.A)

    def markov_parameters(self, count: int) -> list[np.ndarray]:
        """``[D, C B, C A B, ...]`` (``count`` terms)."""
        out = [self.D.copy()]
        Ak_B = self.B.copy()
        for _ in range(count - 1):
            out.append(self.C @ Ak_B)
            Ak_B = self.A @ Ak_B
        return out

    def to_text(self) -> str:
        blocks = {"A": self.A, "B": self.B, "C": self.C, "D": self.D, "K": self.K, "u0": self.u0[None, :]}
        return matfile.dumps({"n": self.n, "dt": self.dt}, blocks)

    @classmethod
    def from_text(cls, text: str, source="<model>") -> "StateSpaceModel":
        scalars, blocks = matfile.loads(text, source)
        matfile.require(blocks, ("A", "B", "C", "D", "K"), source)
        try:
            n, dt = int(scalars["n"]), float(scalars["dt"])
        except (KeyError, ValueError):
            raise LogFormatError(f"{source}: scalars 'n' and 'dt' are required") from None
        u0 = blocks["u0"].reshape(-1) if "u0" in blocks else None
        model = cls(blocks["A"], blocks["B"], blocks["C"], blocks["D"], blocks["K"], dt, u0)
        if model.n != n:
            raise LogFormatError(f"{source}: n = {n} but A is {model.n}x{model.n}")
        return model

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_text(), encoding="utf-8", newline="\n")

    @classmethod
    def load(cls, path: str | Path) -> "StateSpaceModel":
        path = Path(path)
        return cls.from_text(path.read_text(encoding="utf-8"), str(path))


def simulate_ss(m: StateSpaceModel, U, x0=None, return_states: bool = False):
    """Noise-free response ``y[k] = C x[k] + D u[k]`` of ``m`` to inputs ``U`` (T, m)."""
    U = np.asarray(U, dtype=float)
    if U.ndim == 1:
        U = U[:, None]
    if U.shape[1] != m.n_inputs:
        raise ValueError(f"input has {U.shape[1]} columns, model expects {m.n_inputs}")
    du = U - m.u0
    Bu = du @ m.B.T
    x = np.zeros(m.n) if x0 is None else np.asarray(x0, dtype=float).reshape(m.n).copy()
    X = np.empty((len(U), m.n))
    A = m.A
    for k in range(len(U)):
        X[k] = x
        x = A @ x + Bu[k]
    Y = X @ m.C.T + du @ m.D.T
    if return_states:
        return Y, X
    return Y


def fit_percent(y_true, y_model) -> np.ndarray:
    """Per-channel NRMSE fit ``100 (1 - |y - y_hat| / |y - mean(y)|)``; may be negative."""
    y_true = np.asarray(y_true, dtype=float)
    y_model = np.asarray(y_model, dtype=float)
    if y_true.ndim == 1:
        y_true = y_true[:, None]
    if y_model.ndim == 1:
        y_model = y_model[:, None]
    if y_true.shape != y_model.shape:
        raise ValueError(f"shape mismatch {y_true.shape} vs {y_model.shape}")
    if y_true.shape[0] < 2:
        raise ValueError("need at least two samples")
    spread = np.linalg.norm(y_true - y_true.mean(axis=0), axis=0)
    if np.any(spread == 0):
        bad = [int(c) for c in np.flatnonzero(spread == 0)]
        raise DegenerateReference(f"reference channel(s) {bad} are constant")
    return 100.0 * (1.0 - np.linalg.norm(y_true - y_model, axis=0) / spread)


def block_hankel(data: np.ndarray, rows: int, cols: int) -> np.ndarray:
    """Block-Hankel matrix with ``rows`` block rows from samples ``data`` (T, d)."""
    d = data.shape[1]
    H = np.empty((rows * d, cols))
    for k in range(rows):
        H[k * d:(k + 1) * d] = data[k:k + cols].T
    return H


def _lq_lower(M: np.ndarray) -> np.ndarray:
    """Lower-triangular ``L`` with ``M = L Q^T`` (Q never formed)."""
    r = np.linalg.qr(M.T, mode="r")
    return r.T


def _check_excitation(U: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    mean = U.mean(axis=0)
    std = U.std(axis=0)
    scale = np.maximum(np.abs(mean), 1.0)
    flat = std <= EXCITATION_RTOL * scale
    if np.any(flat):
        raise RankDeficientInputs(f"input channel(s) {np.flatnonzero(flat).tolist()} carry no excitation")
    return mean, std


def block_average(data: np.ndarray, q: int) -> np.ndarray:
    """Means over consecutive blocks of ``q`` rows; a trailing partial block is dropped."""
    T = (data.shape[0] // q) * q
    return data[:T].reshape(T // q, q, data.shape[1]).mean(axis=1)


def resample_model(m: StateSpaceModel, q: int) -> StateSpaceModel:
    """Model at ``dt / q`` whose ``q``-step map matches ``m`` under held inputs.

    ``A1 = A^(1/q)`` (principal root) and ``B1 = (I + A1 + ... + A1^(q-1))^-1 B``.
    """
    if q == 1:
        return m
    A1 = np.real(fractional_matrix_power(m.A, 1.0 / q))
    S = np.eye(m.n)
    Ak = np.eye(m.n)
    for _ in range(q - 1):
        Ak = Ak @ A1
        S = S + Ak
    B1 = np.linalg.solve(S, m.B)
    return StateSpaceModel(A1, B1, m.C, m.D, m.K, m.dt / q, m.u0)


def subspace_identify(est: Dataset, order: int, horizon: int, return_x0: bool = False,
                      decimation: int = 1):
    """Identify an ``order``-state model from ``est`` with ``horizon`` block rows.

    Inputs are standardised (zero mean, unit variance) before the Hankel
    matrices are built. A constant row accompanies the future inputs in the
    projection and a constant column the state regression, so an operating
    point does not add a spurious mode; the input operating point is returned
    as ``model.u0`` with ``B`` and ``D`` acting on unscaled ``u - u0``. ``K``
    is zero. The singular values of the oblique projection are attached as
    ``model.singular_values``.

    With ``decimation = q > 1`` inputs and outputs are first averaged over
    blocks of ``q`` samples, the model is identified at ``q * dt`` (so
    ``horizon`` counts decimated samples) and then resampled back to ``dt``
    with :func:`resample_model`. Slow, lightly damped dynamics sampled fast
    (``A`` close to ``I``) are far better conditioned this way.

    Raises
    ------
    RankDeficientInputs
        Inputs not persistently exciting of order ``2 * horizon``.
    OrderTooLarge
        ``order`` exceeds the numeric rank of the projected data.
    """
    q = int(decimation)
    if q < 1:
        raise ValueError("decimation must be a positive integer")
    U, Y = est.U, est.Y
    if q > 1:
        U, Y = block_average(U, q), block_average(Y, q)
    T, m = U.shape
    p = Y.shape[1]
    i = int(horizon)
    n = int(order)
    if n < 1:
        raise ValueError("order must be positive")
    if i < 2 * n:
        raise ValueError(f"horizon {i} must be at least twice the order {n}")
    if T < 10 * i * (m + p):
        raise ValueError(f"{T} samples are too few for horizon {i}; need {10 * i * (m + p)}")

    mean, std = _check_excitation(U)
    us = (U - mean) / std

    j = T - 2 * i + 1
    Uh = block_hankel(us, 2 * i, j)
    Yh = block_hankel(Y, 2 * i, j)
    Wp = np.vstack([Uh[:i * m], Yh[:i * p]])
    M = np.vstack([Uh[i * m:], np.ones((1, j)), Wp, Yh[i * p:]]) / np.sqrt(j)
    L = _lq_lower(M)
    del M

    r1, r2 = i * m + 1, i * (m + p)
    # [U_f; 1; U_p] lead M, so their LQ block carries the input Hankel spectrum
    su = np.linalg.svd(L[:r1 + i * m, :r1 + i * m], compute_uv=False)
    if su[-1] <= EXCITATION_RTOL * su[0]:
        raise RankDeficientInputs(
            f"input Hankel matrix is rank deficient (sigma_min/sigma_max = {su[-1] / su[0]:.3g})")

    # oblique projection of Y_f along [U_f; 1] onto W_p: O = L32 L22^+ W_p
    L22 = L[r1:r1 + r2, r1:r1 + r2]
    L32 = L[r1 + r2:, r1:r1 + r2]
    Z = np.linalg.lstsq(L22.T, L32.T, rcond=None)[0].T
    O = Z @ Wp
    _, s, Vt = np.linalg.svd(O, full_matrices=False)
    if n > len(s) or s[n - 1] <= ORDER_RTOL * s[0]:
        rank = int(np.sum(s > ORDER_RTOL * s[0]))
        raise OrderTooLarge(f"order {n} exceeds numeric rank {rank} of the projected data")

    # state sequence at times i, i+1, ..., then one least-squares fit of
    # [x(k+1); y(k)] = [A B bc; C D dc] [x(k); u(k); 1]
    X = np.sqrt(s[:n])[:, None] * Vt[:n]
    uk, yk = us[i:i + j].T, Y[i:i + j].T
    regressor = np.vstack([X[:, :-1], uk[:, :-1], np.ones((1, j - 1))])
    target = np.vstack([X[:, 1:], yk[:, :-1]])
    theta = np.linalg.lstsq(regressor.T, target.T, rcond=None)[0].T
    A, Bs, bc = theta[:n, :n], theta[:n, n:n + m], theta[:n, -1]
    C, Ds, dc = theta[n:, :n], theta[n:, n:n + m], theta[n:, -1]

    # (bc, dc) fix the operating point: shift the state by d and the input by
    # v so that bc + (I-A) d = -B v and dc - C d = -D v
    system_at_one = np.block([[np.eye(n) - A, Bs], [-C, Ds]])
    dv = np.linalg.lstsq(system_at_one, -np.concatenate([bc, dc]), rcond=None)[0]
    u0 = mean + std * dv[n:]
    model = StateSpaceModel(A, Bs / std, C, Ds / std, None, est.dt * q, u0)
    model = resample_model(model, q)
    model.singular_values = s
    if return_x0:
        head = min(len(est.U), 2 * i * q)
        return model, estimate_initial_state(model, est.U[:head], est.Y[:head])
    return model


def estimate_initial_state(m: StateSpaceModel, U, Y) -> np.ndarray:
    """Least-squares initial state that best explains ``Y`` under inputs ``U``."""
    Y = np.asarray(Y, dtype=float)
    y_forced = simulate_ss(m, U)
    resid = (Y - y_forced).reshape(-1)
    T, p, n = Y.shape[0], m.n_outputs, m.n
    Obs = np.empty((T * p, n))
    CA = m.C.copy()
    for k in range(T):
        Obs[k * p:(k + 1) * p] = CA
        CA = CA @ m.A
    return np.linalg.lstsq(Obs, resid, rcond=None)[0]
