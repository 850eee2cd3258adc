"""Gain synthesis: LQR, steady-state Kalman, deadbeat observer."""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import ConditioningError, ObservabilityError
from .numerics import (
    as_matrix,
    induced_max_norm,
    pseudo_inverse,
    rank,
    solve_dare,
    spectral_radius,
)
from .plant import observability_matrix

CONDITION_LIMIT = 1e12
NILPOTENCY_TOL = 1e-8


@dataclass(frozen=True)
class GainPair:
    """Feedback gain ``K`` (u = -K xhat) and observer gain ``L``.

    ``R = A_d - L C`` drives the estimation error; ``Rbar = A_d - B_d K`` is
    the state-feedback closed loop.
    """

    K: np.ndarray
    L: np.ndarray
    R: np.ndarray
    Rbar: np.ndarray

    @classmethod
    def from_plant(cls, dp, K, L):
        K = as_matrix(K, "K")
        L = as_matrix(L, "L")
        if K.shape == (dp.n, dp.m) and dp.n != dp.m:
            K = K.T
        if L.shape == (dp.p, dp.n) and dp.n != dp.p:
            L = L.T
        if K.shape != (dp.m, dp.n) or L.shape != (dp.n, dp.p):
            raise ValueError(
                f"K must be {dp.m}x{dp.n} and L {dp.n}x{dp.p}, "
                f"got {K.shape} and {L.shape}"
            )
        return cls(K, L, dp.A_d - L @ dp.C, dp.A_d - dp.B_d @ K)

    @property
    def observer_radius(self):
        return spectral_radius(self.R)

    @property
    def feedback_radius(self):
        return spectral_radius(self.Rbar)


def lqr_gain(dp, Qx, Ru):
    A, B = dp.A_d, dp.B_d
    Qx = as_matrix(Qx, "Qx")
    Ru = as_matrix(Ru, "Ru")
    P = solve_dare(A, B, Qx, Ru)
    return np.linalg.solve(Ru + B.T @ P @ B, B.T @ P @ A)


def lqr_gain_continuous(plant, Qx, Ru):
    """Continuous-time LQR gain ``Ru^{-1} B' P``, applied as a sampled gain."""
    Qx = as_matrix(Qx, "Qx")
    Ru = as_matrix(Ru, "Ru")
    P = scipy.linalg.solve_continuous_are(plant.A, plant.B, Qx, Ru)
    return np.linalg.solve(Ru, plant.B.T @ P)


def kalman_gain(dp, W, V):
    """Steady-state (predictor form) Kalman gain, via the dual Riccati equation."""
    A, C = dp.A_d, dp.C
    W = as_matrix(W, "W")
    V = as_matrix(V, "V")
    P = solve_dare(A.T, C.T, W, V)
    return A @ P @ C.T @ np.linalg.inv(V + C @ P @ C.T)


def observability_index(dp):
    n = dp.n
    for eta in range(1, n + 1):
        if rank(observability_matrix(dp.C, dp.A_d, eta)) == n:
            return eta
    raise ObservabilityError("(C, A_d) is not observable")


def _controllability_indices(A, B):
    """Greedy column selection b_1..b_p, A b_1..A b_p, ...

    Returns the per-column chain lengths ``mu``. A column whose chain stops
    is never revisited, since once ``A^j b_i`` depends on earlier picks, so
    does ``A^{j+1} b_i``.
    """
    n, p = B.shape
    mu = [0] * p
    alive = [True] * p
    chosen = np.zeros((n, 0))
    power = B.copy()
    while chosen.shape[1] < n and any(alive):
        for i in range(p):
            if not alive[i]:
                continue
            trial = np.hstack([chosen, power[:, i : i + 1]])
            if rank(trial) > chosen.shape[1]:
                chosen = trial
                mu[i] += 1
            else:
                alive[i] = False
            if chosen.shape[1] == n:
                break
        power = A @ power
    return mu


def _check_conditioning(M):
    cond = np.linalg.cond(M)
    if not np.isfinite(cond) or cond > CONDITION_LIMIT:
        raise ConditioningError(
            f"observability data too ill-conditioned (cond = {cond:.3e})"
        )


def _ackermann_deadbeat(A, b):
    """Single-input Ackermann gain placing all closed-loop poles at 0."""
    n = A.shape[0]
    ctrb = np.hstack([np.linalg.matrix_power(A, j) @ b for j in range(n)])
    _check_conditioning(ctrb)
    last_row = np.linalg.solve(ctrb.T, np.eye(n)[:, -1]).reshape(1, n)
    return last_row @ np.linalg.matrix_power(A, n)


def _canonical_deadbeat(A, B):
    """Deadbeat state feedback for multi-input ``(A, B)``.

    Uses the Luenberger controllable canonical form: in those coordinates
    ``B`` is nonzero only on the last row of each chain, so a feedback that
    zeroes those rows leaves pure shift chains, which are nilpotent with
    index equal to the longest chain.
    """
    n = A.shape[0]
    mu = _controllability_indices(A, B)
    cols = []
    for i, length in enumerate(mu):
        v = B[:, i]
        for _ in range(length):
            cols.append(v)
            v = A @ v
    Mc = np.column_stack(cols)
    _check_conditioning(Mc)
    Minv = np.linalg.inv(Mc)

    rows, last_rows = [], []
    sigma = 0
    for length in mu:
        if length == 0:
            continue
        sigma += length
        q = Minv[sigma - 1]
        for _ in range(length):
            rows.append(q)
            q = q @ A
        last_rows.append(len(rows) - 1)
    T = np.vstack(rows)
    _check_conditioning(T)
    Tinv = np.linalg.inv(T)
    Ac = T @ A @ Tinv
    Bc = T @ B
    Kc = np.linalg.lstsq(Bc[last_rows], Ac[last_rows], rcond=None)[0]
    return Kc @ T


def _deadbeat_gain(A, B):
    """``K`` placing every eigenvalue of ``A - B K`` at the origin."""
    if B.shape[1] == 1:
        return _ackermann_deadbeat(A, B)
    return _canonical_deadbeat(A, B)


def _check_nilpotent(A, R, index):
    """Reject ``R`` unless ``||R^index|| <= tol * max(1, ||A||)^index``."""
    resid = induced_max_norm(np.linalg.matrix_power(R, index))
    limit = NILPOTENCY_TOL * max(induced_max_norm(A), 1.0) ** index
    if resid > limit:
        raise ConditioningError(
            f"deadbeat construction lost accuracy: ||R^{index}|| = {resid:.3e}"
        )


def deadbeat_observer_gain(dp):
    """Observer gain ``L`` with ``(A_d - L C)^eta = 0``.

    Built on the dual pair ``(A_d', C')``: Ackermann's formula when there is
    a single output, the block canonical construction otherwise.
    """
    eta = observability_index(dp)
    L = _deadbeat_gain(dp.A_d.T, dp.C.T).T
    _check_nilpotent(dp.A_d, dp.A_d - L @ dp.C, eta)
    return L


def deadbeat_feedback_gain(dp):
    """State feedback ``K`` with ``A_d - B_d K`` nilpotent (needs controllability)."""
    A, B = dp.A_d, dp.B_d
    for index in range(1, dp.n + 1):
        if rank(observability_matrix(B.T, A.T, index)) == dp.n:
            K = _deadbeat_gain(A, B)
            _check_nilpotent(A, A - B @ K, index)
            return K
    raise ObservabilityError("(A_d, B_d) is not controllable")


def stacked_observability(dp, eta=None):
    """``[C; C A_d; ...; C A_d^{eta-1}] A_d^{-eta+1}``."""
    if eta is None:
        eta = observability_index(dp)
    O = observability_matrix(dp.C, dp.A_d, eta)
    return O @ np.linalg.matrix_power(np.linalg.inv(dp.A_d), eta - 1)


def pseudo_inverse_observer_norm(dp):
    """``||C A_d Cbf^+||`` for the pseudo-inverse observer baseline."""
    Cbf = stacked_observability(dp)
    return induced_max_norm(dp.C @ dp.A_d @ pseudo_inverse(Cbf))
