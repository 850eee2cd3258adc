"""Small dense-matrix kernel.

Everything here works on plain ``numpy`` arrays. Sizes in this package are
tiny (n <= 10), so clarity wins over speed.
"""

import numpy as np

from .errors import DimensionError, RankError, SolverError

# Taylor order used inside scaling-and-squaring; with ||A||/2^s <= 1/2 the
# truncation error is below 0.5^19/19! ~ 1e-23.
_EXPM_ORDER = 18
_EXPM_SCALE_TARGET = 0.5

DEFAULT_RANK_TOL = 1e-9


def as_matrix(M, name="matrix"):
    """Coerce ``M`` to a finite 2-D float array.

    Scalars become 1x1 and 1-D inputs become a single row.
    """
    arr = np.array(M, dtype=float, ndmin=2)
    if arr.ndim != 2:
        raise DimensionError(f"{name} must be 2-D, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    return arr


def _require_square(M, name="matrix"):
    if M.shape[0] != M.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {M.shape}")


def mat_exp(A, t=1.0):
    """Matrix exponential ``e^{A t}`` by scaling and squaring.

    The scaled matrix ``A t / 2^s`` has induced max norm at most 1/2 and its
    exponential is summed as a Taylor series of fixed order, then squared
    ``s`` times.
    """
    A = as_matrix(A, "A")
    _require_square(A, "A")
    if not np.isfinite(t):
        raise ValueError("t must be finite")
    n = A.shape[0]
    X = A * float(t)
    norm = induced_max_norm(X)
    s = 0
    if norm > _EXPM_SCALE_TARGET:
        s = int(np.ceil(np.log2(norm / _EXPM_SCALE_TARGET)))
    X = X / (2.0**s)

    term = np.eye(n)
    result = np.eye(n)
    for k in range(1, _EXPM_ORDER + 1):
        term = term @ X / k
        result = result + term
    for _ in range(s):
        result = result @ result
    return result


def induced_max_norm(M):
    """Operator norm induced by the vector max norm (max absolute row sum)."""
    M = as_matrix(M)
    if M.size == 0:
        return 0.0
    return float(np.max(np.sum(np.abs(M), axis=1)))


def vec_max_norm(v):
    v = np.asarray(v, dtype=float).ravel()
    return float(np.max(np.abs(v))) if v.size else 0.0


def spectral_radius(M):
    """Largest eigenvalue modulus, via LAPACK's Hessenberg-QR eigensolver."""
    M = as_matrix(M)
    _require_square(M)
    if M.size == 0:
        return 0.0
    return float(np.max(np.abs(np.linalg.eigvals(M))))


def solve_dare(A, B, Q, Rw, tol=1e-12, max_iter=1_000_000):
    """Stabilizing solution of the discrete algebraic Riccati equation.

    Iterates ``P <- A'PA - A'PB (Rw + B'PB)^{-1} B'PA + Q`` from ``P = Q``.
    Convergence is declared once successive iterates differ by at most
    ``tol * max(1, max|P|)`` entrywise.
    """
    A, B, Q, Rw = (as_matrix(M, nm) for M, nm in zip((A, B, Q, Rw), "ABQR"))
    n, m = B.shape
    if A.shape != (n, n) or Q.shape != (n, n) or Rw.shape != (m, m):
        raise DimensionError(
            f"incompatible DARE shapes A{A.shape} B{B.shape} Q{Q.shape} R{Rw.shape}"
        )
    P = 0.5 * (Q + Q.T)
    At = A.T
    for _ in range(max_iter):
        PA = P @ A
        PB = P @ B
        G = Rw + B.T @ PB
        P_next = At @ PA - (At @ PB) @ np.linalg.solve(G, PB.T @ A) + Q
        P_next = 0.5 * (P_next + P_next.T)
        if not np.all(np.isfinite(P_next)):
            raise SolverError("Riccati iteration diverged")
        scale = max(1.0, float(np.max(np.abs(P_next))))
        if np.max(np.abs(P_next - P)) <= tol * scale:
            return P_next
        P = P_next
    raise SolverError(f"Riccati iteration did not converge in {max_iter} steps")


def dare_residual(P, A, B, Q, Rw):
    """Max-abs residual of the Riccati fixed-point equation at ``P``."""
    G = Rw + B.T @ P @ B
    rhs = A.T @ P @ A - A.T @ P @ B @ np.linalg.solve(G, B.T @ P @ A) + Q
    return float(np.max(np.abs(rhs - P)))


def rank(M, tol=DEFAULT_RANK_TOL):
    """Numerical rank: singular values above ``tol`` times the largest entry."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    M = as_matrix(M)
    if M.size == 0:
        return 0
    scale = float(np.max(np.abs(M)))
    if scale == 0.0:
        return 0
    sv = np.linalg.svd(M, compute_uv=False)
    return int(np.sum(sv > tol * scale))


def pseudo_inverse(M):
    """Left inverse ``(M'M)^{-1} M'`` of a full-column-rank matrix."""
    M = as_matrix(M)
    if rank(M) < M.shape[1]:
        raise RankError(f"matrix of shape {M.shape} is not full column rank")
    return np.linalg.solve(M.T @ M, M.T)
