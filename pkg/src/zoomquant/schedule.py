"""Decay certificates, error-bound recursions and data-rate tests.

A decay certificate is a pair ``(M, rho)`` with ``||P R^l S|| <= M rho^l``
for every ``l >= 0``. The bound sequences below turn such pairs into the
synchronized half-widths ``E_k`` (and ``E1_k``, ``E2_k`` when the estimate
and input are quantized too) used by encoder and decoder.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .design import observability_index, pseudo_inverse_observer_norm
from .errors import (
    ConditioningError,
    InfeasibleRateError,
    PreconditionError,
)
from .numerics import induced_max_norm, spectral_radius

POWER_CAP = 10_000
LEVEL_CAP = 2**16
NILPOTENCY_TOL = 1e-8


# --- certificates -----------------------------------------------------------


@dataclass(frozen=True)
class DecayCertificate:
    """``||P R^l S|| <= M rho^l`` for all ``l >= 0``.

    ``horizon`` is the first ``L* >= 1`` with ``||R^{L*}|| <= rho^{L*}``.
    ``tail_start`` is the power from which on the tail bound
    ``||P R^l|| ||S|| K_R / rho^l`` (``K_R`` the certificate constant of
    ``R`` alone) no longer exceeds ``M``; below it every ratio was
    evaluated exactly. ``base`` is ``||P S||``.
    """

    M: float
    rho: float
    horizon: int
    tail_start: int
    base: float


def _row_sum_norms(stack):
    """Induced max norm of each matrix in a ``(k, r, c)`` stack."""
    if stack.shape[1] == 0 or stack.shape[2] == 0:
        return [0.0] * stack.shape[0]
    return np.abs(stack).sum(axis=2).max(axis=1).tolist()


class PowerNorms:
    """Cached norms of ``R^l``, ``P R^l`` and ``P R^l S`` for rate sweeps."""

    def __init__(self, P, R, S, cap=POWER_CAP):
        self.P = np.atleast_2d(np.asarray(P, dtype=float))
        self.R = np.atleast_2d(np.asarray(R, dtype=float))
        self.S = np.atleast_2d(np.asarray(S, dtype=float))
        self.cap = cap
        self.radius = spectral_radius(self.R)
        self.S_norm = induced_max_norm(self.S)
        n = self.R.shape[0]
        self._power = np.eye(n)
        self._r = []
        self._pr = []
        self._prs = []
        self._extend(1)

    def _extend(self, count):
        count = min(count, self.cap + 1)
        if len(self._r) >= count:
            return
        powers = []
        with np.errstate(over="ignore", invalid="ignore"):
            for _ in range(count - len(self._r)):
                powers.append(self._power)
                self._power = self._power @ self.R
            Rl = np.stack(powers)
            PR = self.P @ Rl
            PRS = PR @ self.S
        self._r.extend(_row_sum_norms(Rl))
        self._pr.extend(_row_sum_norms(PR))
        self._prs.extend(_row_sum_norms(PRS))

    def _log_ratio(self, values, rho, start=0):
        ell = np.arange(start, start + len(values))
        with np.errstate(divide="ignore"):
            return np.log(np.asarray(values)) - ell * math.log(rho)

    def certify(self, rho):
        if not 0.0 < rho < 1.0:
            raise InfeasibleRateError(f"rho must lie in (0, 1), got {rho}")
        if rho <= self.radius:
            raise InfeasibleRateError(
                f"rho = {rho:.6g} does not exceed the spectral radius {self.radius:.6g}"
            )

        # horizon L*: first l >= 1 with ||R^l|| <= rho^l
        horizon = None
        checked = 1
        while horizon is None:
            upto = min(max(2 * checked, 64), self.cap + 1)
            self._extend(upto)
            logs = self._log_ratio(self._r[checked:upto], rho, start=checked)
            hit = np.nonzero(logs <= 1e-12)[0]
            if hit.size:
                horizon = checked + int(hit[0])
            elif upto >= self.cap + 1:
                raise ConditioningError(
                    f"no power up to {self.cap} satisfies ||R^l|| <= rho^l (rho={rho})"
                )
            checked = upto
        k_r = float(np.exp(np.max(self._log_ratio(self._r[:horizon], rho))))

        base = self._prs[0]
        if self.S_norm == 0.0:
            return DecayCertificate(0.0, rho, horizon, 0, base)

        # exact ratios until the tail bound drops under the running maximum
        start = 0
        best = -math.inf
        while True:
            upto = min(max(2 * start, 64), self.cap + 1)
            self._extend(upto)
            exact = self._log_ratio(self._prs[start:upto], rho, start=start)
            tail = self._log_ratio(self._pr[start:upto], rho, start=start)
            tail = tail + math.log(self.S_norm * k_r)
            running = np.maximum.accumulate(np.concatenate([[best], exact]))[1:]
            done = np.nonzero(tail <= running)[0]
            if done.size:
                stop = int(done[0])
                best = float(running[stop])
                return DecayCertificate(
                    float(np.exp(best)), rho, horizon, start + stop, base
                )
            best = float(running[-1])
            if upto >= self.cap + 1:
                raise ConditioningError(
                    f"certificate tail did not settle within {self.cap} powers"
                )
            start = upto


def decay_certificate(P, R, S, rho):
    return PowerNorms(P, R, S).certify(rho)


def default_rate(R):
    """Midpoint between the spectral radius of ``R`` and 1."""
    return 0.5 * (1.0 + spectral_radius(R))


def rate_grid(radius, points=24, lo=0.002, hi=0.95):
    """Candidate rates ``radius + t (1 - radius)`` on a geometric grid in t."""
    fracs = np.geomspace(lo, hi, points)
    return [float(radius + t * (1.0 - radius)) for t in fracs]


# --- schedules ---------------------------------------------------------------


@dataclass
class BoundSchedule:
    variant: str
    E: np.ndarray
    N: int
    E_st: float
    constants: dict
    F: np.ndarray
    E1: np.ndarray = None
    E2: np.ndarray = None
    N1: int = None
    N2: int = None
    eta: int = None
    extra: dict = field(default_factory=dict)

    @property
    def rF(self):
        return spectral_radius(self.F)

    @property
    def contractive(self):
        return self.rF < 1.0

    @property
    def mu(self):
        return self.E / self.N

    @property
    def k_max(self):
        return len(self.E) - 1

    def rows(self):
        """``(k, E_k, E1_k, E2_k, mu_k)`` tuples; absent sequences are 0."""
        zeros = np.zeros_like(self.E)
        E1 = self.E1 if self.E1 is not None else zeros
        E2 = self.E2 if self.E2 is not None else zeros
        return [
            (k, float(self.E[k]), float(E1[k]), float(E2[k]), float(self.mu[k]))
            for k in range(len(self.E))
        ]


def _check_levels(**levels):
    for name, value in levels.items():
        if value is None or int(value) != value or value < 2:
            raise ValueError(f"{name} must be an integer >= 2, got {value}")


def bound_sequence_general(cert0, cert, E_st, N, k_max, C_norm=None):
    """Output-only bounds for a general observer.

    ``cert0`` certifies ``||C R^l||`` and ``cert`` certifies ``||C R^l L||``
    with a common rate.
    """
    _check_levels(N=N)
    if not math.isclose(cert0.rho, cert.rho, rel_tol=0, abs_tol=1e-15):
        raise PreconditionError("both certificates must use the same rho")
    rho, M0, M = cert.rho, cert0.M, cert.M
    if C_norm is None:
        C_norm = cert0.base
    E = np.empty(k_max + 1)
    E[0] = C_norm * E_st
    if k_max >= 1:
        E[1] = M0 * E_st * rho + (M / N) * E[0]
    growth = rho + M / N
    for k in range(1, k_max):
        E[k + 1] = growth * E[k]
    return BoundSchedule(
        variant="general",
        E=E,
        N=int(N),
        E_st=float(E_st),
        constants={"rho": rho, "M0": M0, "M": M},
        F=np.array([[growth]]),
    )


def deadbeat_norms(dp, L, eta=None):
    """``(||C R^l L||, ||C R^l||)`` for ``l < eta`` after checking ``R^eta = 0``."""
    if eta is None:
        eta = observability_index(dp)
    R = dp.A_d - L @ dp.C
    resid = induced_max_norm(np.linalg.matrix_power(R, eta))
    if resid > NILPOTENCY_TOL * max(induced_max_norm(dp.A_d), 1.0) ** eta:
        raise PreconditionError(
            f"(A_d - L C)^{eta} is not zero (norm {resid:.3e})"
        )
    crl, cr = [], []
    Rl = np.eye(dp.n)
    for _ in range(eta):
        cr.append(induced_max_norm(dp.C @ Rl))
        crl.append(induced_max_norm(dp.C @ Rl @ L))
        Rl = Rl @ R
    return np.array(crl), np.array(cr), eta


def companion(coeffs):
    """Companion matrix with ``coeffs`` on the first row and a shifted identity."""
    eta = len(coeffs)
    F = np.zeros((eta, eta))
    F[0] = coeffs
    if eta > 1:
        F[1:, :-1] = np.eye(eta - 1)
    return F


def bound_sequence_deadbeat(dp, L, N, E_st, k_max):
    _check_levels(N=N)
    crl, cr, eta = deadbeat_norms(dp, L)
    alpha = crl / N
    E = np.empty(k_max + 1)
    E[0] = cr[0] * E_st
    for k in range(k_max):
        window = min(k, eta - 1)
        acc = sum(alpha[l] * E[k - l] for l in range(window + 1))
        if k <= eta - 2:
            acc += cr[k + 1] * E_st
        E[k + 1] = acc
    return BoundSchedule(
        variant="deadbeat",
        E=E,
        N=int(N),
        E_st=float(E_st),
        constants={"alpha": alpha.tolist(), "CRL": crl.tolist(), "CR": cr.tolist()},
        F=companion(alpha),
        eta=eta,
    )


@dataclass(frozen=True)
class FullCertificates:
    """The five certificates behind the input/output quantized protocol."""

    M0: float
    M1: float
    M2: float
    M3: float
    M4: float
    rho: float
    rhobar: float
    C_norm: float

    def as_dict(self):
        return {
            "M0": self.M0,
            "M1": self.M1,
            "M2": self.M2,
            "M3": self.M3,
            "M4": self.M4,
            "rho": self.rho,
            "rhobar": self.rhobar,
        }


class FullCertifier:
    """Caches the power sequences needed by :class:`FullCertificates`."""

    def __init__(self, dp, gains):
        C, Bd = dp.C, dp.B_d
        eye = np.eye(dp.n)
        self.cr = PowerNorms(C, gains.R, eye)
        self.crbar_l = PowerNorms(C, gains.Rbar, gains.L)
        self.krbar_l = PowerNorms(gains.K, gains.Rbar, gains.L)
        self.cr_b = PowerNorms(C, gains.R, Bd)
        self.cr_l = PowerNorms(C, gains.R, gains.L)
        self.C_norm = induced_max_norm(C)
        self.p, self.m = dp.p, dp.m
        self.radius = self.cr.radius
        self.radius_bar = self.crbar_l.radius

    def certify(self, rho, rhobar):
        if rhobar > rho:
            raise PreconditionError(f"need rhobar <= rho, got {rhobar} > {rho}")
        return FullCertificates(
            M0=self.cr.certify(rho).M,
            M1=self.crbar_l.certify(rhobar).M,
            M2=self.krbar_l.certify(rhobar).M,
            M3=self.cr_b.certify(rho).M,
            M4=self.cr_l.certify(rho).M,
            rho=rho,
            rhobar=rhobar,
            C_norm=self.C_norm,
        )

    def default_rates(self):
        rho = 0.5 * (1.0 + self.radius)
        rhobar = 0.5 * (1.0 + self.radius_bar)
        return max(rho, rhobar), rhobar


def full_constants(certs, N, N1, N2):
    """``M, beta0, beta1, alpha0, alpha1`` of the input/output protocol."""
    rho = certs.rho
    M = (N - 1) * (certs.M1 * certs.M4 / N1 + certs.M2 * certs.M3 / N2)
    beta0 = rho + (N1 * certs.M4 + (N - 1) * certs.M1) / (N * N1)
    beta1 = M / N
    return {
        "M": M,
        "beta0": beta0,
        "beta1": beta1,
        "alpha0": rho + beta0,
        "alpha1": beta1 - rho * beta0,
    }


def full_F(certs, N, N1, N2):
    c = full_constants(certs, N, N1, N2)
    return np.array([[c["alpha0"], c["alpha1"]], [1.0, 0.0]])


def _full_radius(rho, beta0, beta1):
    # roots of (x - rho)(x - beta0) = beta1; beta1 >= 0 keeps them real
    s = rho + beta0
    d = math.sqrt((rho - beta0) ** 2 + 4.0 * beta1)
    return max(abs(0.5 * (s + d)), abs(0.5 * (s - d)))


def full_rF(certs, N, N1, N2):
    c = full_constants(certs, N, N1, N2)
    return _full_radius(certs.rho, c["beta0"], c["beta1"])


def bound_sequence_full(certs, E_st, N, N1, N2, k_max):
    _check_levels(N=N, N1=N1, N2=N2)
    if certs.rhobar > certs.rho:
        raise PreconditionError(
            f"need rhobar <= rho, got {certs.rhobar} > {certs.rho}"
        )
    c = full_constants(certs, N, N1, N2)
    rho, rhobar = certs.rho, certs.rhobar
    E = np.empty(k_max + 1)
    E[0] = certs.C_norm * E_st
    if k_max >= 1:
        E[1] = certs.M0 * E_st * rho + (certs.M4 + (N - 1) * certs.M1 / N1) * E[0] / N
    if k_max >= 2:
        E[2] = c["beta0"] * E[1] + c["beta1"] * E[0]
    for k in range(2, k_max):
        E[k + 1] = c["alpha0"] * E[k] + c["alpha1"] * E[k - 1]

    E1 = np.zeros(k_max + 1)
    E2 = np.zeros(k_max + 1)
    g1 = (N - 1) * certs.M1 / N
    g2 = (N - 1) * certs.M2 / N
    for k in range(k_max):
        E1[k + 1] = rhobar * E1[k] + g1 * E[k]
        E2[k + 1] = rhobar * E2[k] + g2 * E[k]

    constants = dict(certs.as_dict())
    constants.update(c)
    return BoundSchedule(
        variant="full",
        E=E,
        E1=E1,
        E2=E2,
        N=int(N),
        N1=int(N1),
        N2=int(N2),
        E_st=float(E_st),
        constants=constants,
        F=np.array([[c["alpha0"], c["alpha1"]], [1.0, 0.0]]),
    )


# --- minimal levels -----------------------------------------------------------


def _smallest_level_above(value):
    """Smallest integer ``N >= 2`` with ``value < N``."""
    return max(2, math.floor(value) + 1)


def min_levels_general(cert):
    return _smallest_level_above(cert.M / (1.0 - cert.rho))


def min_levels_deadbeat(dp, L):
    """Smallest ``N`` making the deadbeat companion matrix Schur.

    The companion matrix has nonnegative first row ``a / N``, so its
    spectral radius is the positive root of ``x^eta = sum_l (a_l / N)
    x^{eta-1-l}``; that root is below 1 exactly when ``sum(a) < N``. The
    loop confirms the answer numerically.
    """
    crl, _, _ = deadbeat_norms(dp, L)
    N = _smallest_level_above(float(np.sum(crl)))
    while spectral_radius(companion(crl / N)) >= 1.0:
        N += 1
    return N


class InfeasibleLevels(Exception):
    """No level triple within the search box gives ``r(F) < 1``."""


def _min_n2(certs, N, N1, cap):
    """Minimal ``N2`` (or None) for fixed ``N, N1``; vectorized over ``N1``."""
    rho = certs.rho
    N1 = np.asarray(N1, dtype=float)
    beta0 = rho + (N1 * certs.M4 + (N - 1) * certs.M1) / (N * N1)
    # larger root < 1  <=>  beta0 < 1 and (1-rho)(1-beta0) > beta1
    budget = (1.0 - rho) * (1.0 - beta0) * N / (N - 1) - certs.M1 * certs.M4 / N1
    m23 = certs.M2 * certs.M3
    with np.errstate(divide="ignore", invalid="ignore"):
        need = np.where(m23 > 0, np.floor(m23 / budget) + 1.0, 2.0)
    need = np.maximum(need, 2.0)
    ok = (beta0 < 1.0) & (budget > 0) & (need <= cap)
    return np.where(ok, need, np.nan)


def _cost_floor(p, m, c0, c1, m23, N1):
    """Lower bound on ``p log N1 + m log N2`` before integer rounding of ``N2``."""
    N1 = np.asarray(N1, dtype=float)
    budget = c0 - c1 / N1
    with np.errstate(divide="ignore"):
        need = np.where(budget > 0, m23 / budget, np.inf)
    return p * np.log(N1) + m * np.log(np.maximum(2.0, need))


def _first_true(pred, lo, hi):
    """Smallest integer in ``[lo, hi]`` where monotone ``pred`` holds, else ``hi + 1``."""
    while lo <= hi:
        mid = (lo + hi) // 2
        if pred(mid):
            hi = mid - 1
        else:
            lo = mid + 1
    return lo


def _cost_turn(p, m, c0, c1, m23, lo, cap):
    """Real ``N1`` in ``[lo, cap]`` minimizing :func:`_cost_floor` (vectorized)."""
    with np.errstate(divide="ignore", invalid="ignore"):
        turn = np.where(c1 > 0, (p + m) * c1 / (p * c0), lo)
        flat = np.where(m23 < 2.0 * c0, c1 / (c0 - 0.5 * m23), np.inf)
    turn = np.minimum(turn, np.where(c1 > 0, flat, lo))
    return np.clip(turn, lo, cap)


def min_levels_full(certs, p, m, cap=LEVEL_CAP, budget=math.inf):
    """Cheapest ``(N, N1, N2)`` with ``r(F) < 1``.

    Cost is the bits per sample ``p log N + p log N1 + m log N2``; ties go
    to the smaller ``N``, then ``N1``, then ``N2``. Raises
    :class:`InfeasibleLevels` when nothing in ``[2, cap]^3`` works, or
    nothing costs less than ``budget`` (log of the total data size).

    For fixed ``N`` the feasibility budget is ``c0 - c1 / N1``, so the cost
    before rounding ``N2`` up falls in ``N1`` until
    ``N1* = (p + m) c1 / (p c0)`` (or until ``N2`` reaches 2) and rises after.
    That gives a lower bound per ``N``; levels ``N`` are visited in order
    of that bound, and for each only the ``N1`` range whose bound beats the
    incumbent is evaluated exactly.
    """
    rho = certs.rho
    if rho >= 1.0:
        raise InfeasibleLevels("rho must be < 1")
    gap = 1.0 - rho
    n_lo = _smallest_level_above(certs.M4 / gap) if certs.M4 > 0 else 2
    if n_lo > cap:
        raise InfeasibleLevels(f"N must exceed {certs.M4 / gap:.6g} > cap {cap}")
    m23 = certs.M2 * certs.M3
    c1 = certs.M1 * (gap + certs.M4)
    tol = 1e-12

    Ns = np.arange(n_lo, cap + 1, dtype=float)
    c0s = gap * (gap * Ns - certs.M4) / (Ns - 1.0)
    with np.errstate(divide="ignore"):
        los = np.maximum(2.0, np.floor(c1 / c0s) + 1.0)
    # N1 = cap minimizes N2, so N is usable only if that choice is feasible
    with np.errstate(divide="ignore", invalid="ignore"):
        room = c0s - c1 / cap
        need_at_cap = np.where(m23 > 0, np.floor(m23 / room) + 1.0, 2.0)
    usable = (c0s > 0) & (los <= cap) & (room > 0) & (need_at_cap <= cap)
    Ns, c0s, los = Ns[usable], c0s[usable], los[usable]
    turns = _cost_turn(p, m, c0s, c1, m23, los, cap)
    bounds = p * np.log(Ns) + _cost_floor(p, m, c0s, c1, m23, turns)
    order = np.lexsort((Ns, bounds))

    best, best_log = None, budget
    for i in order:
        if bounds[i] > best_log + tol:
            break
        N, c0, lo, turn = int(Ns[i]), float(c0s[i]), int(los[i]), float(turns[i])
        base = p * math.log(N)

        def floor_cost(n1, c0=c0, base=base):
            return base + float(_cost_floor(p, m, c0, c1, m23, float(n1)))

        mid = int(round(turn))
        window = np.arange(max(lo, mid - 3), min(cap, mid + 3) + 1, dtype=float)
        N2w = _min_n2(certs, N, window, cap)
        ok = ~np.isnan(N2w)
        target = best_log
        if ok.any():
            local = base + p * np.log(window[ok]) + m * np.log(N2w[ok])
            target = min(target, float(local.min()))
        if not math.isfinite(target):
            # N2 shrinks as N1 grows, so N1 = cap is the most feasible choice
            N2cap = _min_n2(certs, N, np.array([float(cap)]), cap)[0]
            if np.isnan(N2cap):
                continue
            target = base + p * math.log(cap) + m * math.log(N2cap)
        a = _first_true(lambda n1: floor_cost(n1) <= target + tol, lo, math.floor(turn))
        b = _first_true(lambda n1: floor_cost(n1) > target + tol, math.ceil(turn), cap) - 1
        a, b = min(a, math.ceil(turn)), max(b, math.floor(turn))
        N1 = np.arange(max(a, lo), min(b, cap) + 1, dtype=float)
        N2 = _min_n2(certs, N, N1, cap)
        valid = ~np.isnan(N2)
        if not valid.any():
            continue
        N1, N2 = N1[valid], N2[valid]
        cost = base + p * np.log(N1) + m * np.log(N2)
        j = int(np.nonzero(cost <= cost.min() + tol)[0][0])
        cand = (N, int(N1[j]), int(N2[j]))
        if cost[j] < best_log - tol or (
            best is not None and cost[j] <= best_log + tol and cand < best
        ):
            best_log, best = float(cost[j]), cand
    if best is None:
        raise InfeasibleLevels(f"no (N, N1, N2) in [2, {cap}]^3 gives r(F) < 1")
    # confirm on the exact radius, stepping N2 if rounding put us on the edge
    N, N1, N2 = best
    while full_rF(certs, N, N1, N2) >= 1.0 and N2 < cap:
        N2 += 1
    if full_rF(certs, N, N1, N2) >= 1.0:
        raise InfeasibleLevels("search optimum failed the exact radius check")
    return N, N1, N2


def baseline_pseudo_inverse_min_N(dp):
    """``(N, N^p)`` for the pseudo-inverse observer condition."""
    N = _smallest_level_above(pseudo_inverse_observer_norm(dp))
    return N, N**dp.p


def baseline_state_encoding_min_N(dp):
    """``(N, N^n)`` for direct state encoding, ``||A_d|| < N``."""
    N = _smallest_level_above(induced_max_norm(dp.A_d))
    return N, N**dp.n


# --- rate selection ------------------------------------------------------------


def certify_general(dp, gains, rho=None):
    """Certificates ``(C R^l, C R^l L)`` at ``rho`` (midpoint rule if None)."""
    if rho is None:
        rho = default_rate(gains.R)
    cert0 = decay_certificate(dp.C, gains.R, np.eye(dp.n), rho)
    cert = decay_certificate(dp.C, gains.R, gains.L, rho)
    return cert0, cert


def sweep_rate_general(dp, gains, points=24):
    """Rate minimizing the required level ``N`` (ties: smaller M/(1-rho))."""
    cr = PowerNorms(dp.C, gains.R, np.eye(dp.n))
    crl = PowerNorms(dp.C, gains.R, gains.L)
    best = None
    for rho in rate_grid(cr.radius, points):
        try:
            cert0, cert = cr.certify(rho), crl.certify(rho)
        except (ConditioningError, InfeasibleRateError):
            continue
        key = (min_levels_general(cert), cert.M / (1.0 - rho))
        if best is None or key < best[0]:
            best = (key, cert0, cert)
    if best is None:
        raise InfeasibleRateError("no rate on the sweep grid could be certified")
    return best[1], best[2]


def sweep_rates_full(certifier, levels, points=24):
    """Rates ``(rho, rhobar)`` minimizing ``r(F)`` at fixed levels.

    ``rhobar`` runs over a grid above ``r(Rbar)`` and ``rho`` over a grid
    above ``r(R)``, lifted to ``rhobar`` when smaller.
    """
    N, N1, N2 = levels
    best = None
    rhos = rate_grid(certifier.radius, points)
    for rhobar in rate_grid(certifier.radius_bar, points):
        seen = set()
        for rho in rhos:
            rho = max(rho, rhobar)
            if rho in seen:
                continue
            seen.add(rho)
            try:
                certs = certifier.certify(rho, rhobar)
            except (ConditioningError, InfeasibleRateError):
                continue
            r = full_rF(certs, N, N1, N2)
            if best is None or r < best[0]:
                best = (r, certs)
    if best is None:
        raise InfeasibleRateError("no rate pair on the sweep grid could be certified")
    return best[1]


def sweep_rates_full_levels(certifier, p, m, points=8):
    """Rates and levels minimizing the total bit rate on a coarse rate grid."""
    best = None
    best_cost = math.inf
    rhos = rate_grid(certifier.radius, points, lo=0.01)
    for rhobar in rate_grid(certifier.radius_bar, points, lo=0.01):
        for rho in sorted({max(r, rhobar) for r in rhos}):
            try:
                certs = certifier.certify(rho, rhobar)
                levels = min_levels_full(certs, p, m, budget=best_cost + 1e-9)
            except (ConditioningError, InfeasibleRateError, InfeasibleLevels):
                continue
            N, N1, N2 = levels
            cost = p * math.log(N) + p * math.log(N1) + m * math.log(N2)
            key = (round(cost, 12), levels)
            if best is None or key < best[0]:
                best = (key, certs, levels)
                best_cost = cost
    if best is None:
        raise InfeasibleLevels("no rate pair on the grid admits feasible levels")
    return best[1], best[2]
