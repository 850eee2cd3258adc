"""Closed-loop simulation of the two quantized feedback protocols.

Both protocols run the plant on its exact ZOH discretization. Encoder and
controller are separate state machines that only share transmitted box
indices and the bound schedule, so any desynchronization shows up as a
mismatch between their observer replicas.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import PreconditionError, QuantizerOverflow
from .numerics import vec_max_norm
from .plant import zoh_step_matrices
from .quantizer import HypercubeQuantizer, origin_quantizer

# Relative slack on saturation checks; absorbs rounding when a signal sits
# on the hypercube face (e.g. |C x0| = ||C|| E_st) or when the bounds have
# decayed below the rounding error of the signals themselves.
SATURATION_SLACK = 1e-9


@dataclass
class SimConfig:
    dp: object
    gains: object
    schedule: object
    x0: np.ndarray
    E_st: float
    k_max: int = None
    cp: object = None
    substeps: int = 1
    quantize: bool = True
    slack: float = SATURATION_SLACK

    def __post_init__(self):
        self.x0 = np.asarray(self.x0, dtype=float).ravel()
        if self.x0.size != self.dp.n:
            raise ValueError(f"x0 must have {self.dp.n} entries")
        if self.k_max is None:
            self.k_max = self.schedule.k_max
        if self.k_max > self.schedule.k_max:
            raise ValueError("schedule is shorter than the simulation horizon")
        if vec_max_norm(self.x0) > self.E_st * (1.0 + self.slack):
            # not rejected: running anyway is how a violated bound is exposed
            self.initial_bound_violated = True
        else:
            self.initial_bound_violated = False
        if self.cp is None:
            self.cp = self.dp.source


@dataclass
class TraceRecord:
    k: int
    t: float
    x: np.ndarray
    xhat: np.ndarray
    y: np.ndarray
    yhat: np.ndarray
    q_index: int
    q: np.ndarray
    Q1_yhat: np.ndarray
    Q2_u: np.ndarray
    u: np.ndarray
    u_applied: np.ndarray
    E: float
    E1: float = float("nan")
    E2: float = float("nan")
    q1_index: int = -1
    q2_index: int = -1
    overflow: bool = False


class Trace(list):
    """List of :class:`TraceRecord` plus the run outcome."""

    def __init__(self, records=(), protocol=""):
        super().__init__(records)
        self.protocol = protocol
        self.overflow = False
        self.overflow_step = None
        self.overflow_which = None
        self.diagnostic = ""
        self.replica_mismatch = False

    def column(self, name):
        return np.array([getattr(r, name) for r in self])

    @property
    def errors(self):
        return np.array([r.x - r.xhat for r in self])


@dataclass
class _Observer:
    """One replica of the Luenberger observer ``xhat_{k+1} = A xhat + B u + L(q - c)``."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    K: np.ndarray
    L: np.ndarray
    xhat: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.xhat is None:
            self.xhat = np.zeros(self.A.shape[0])

    @property
    def yhat(self):
        return self.C @ self.xhat

    @property
    def u(self):
        return -self.K @ self.xhat

    def step(self, q, center):
        self.xhat = self.A @ self.xhat + self.B @ self.u + self.L @ (q - center)


def _replicas(cfg):
    dp, g = cfg.dp, cfg.gains
    args = (dp.A_d, dp.B_d, dp.C, g.K, g.L)
    return _Observer(*args), _Observer(*args)


def _overflow_record(k, t, x, xhat, y, E, E1, E2, p, m):
    nan_p = np.full(p, np.nan)
    nan_m = np.full(m, np.nan)
    return TraceRecord(
        k=k,
        t=t,
        x=x.copy(),
        xhat=xhat.copy(),
        y=y,
        yhat=nan_p,
        q_index=-1,
        q=nan_p,
        Q1_yhat=nan_p,
        Q2_u=nan_m,
        u=nan_m,
        u_applied=nan_m,
        E=E,
        E1=E1,
        E2=E2,
        overflow=True,
    )


def simulate_output_quantized(cfg):
    """Output-only protocol: the encoder runs its own observer replica."""
    sched = cfg.schedule
    if sched.variant not in ("general", "deadbeat"):
        raise PreconditionError(
            f"output-only protocol needs a general/deadbeat schedule, got {sched.variant}"
        )
    dp = cfg.dp
    p, m = dp.p, dp.m
    enc, ctrl = _replicas(cfg)
    x = cfg.x0.copy()
    trace = Trace(protocol="output")
    nan_p = np.full(p, np.nan)
    nan_m = np.full(m, np.nan)

    for k in range(cfg.k_max + 1):
        t = k * dp.h
        y = dp.C @ x
        E = float(sched.E[k])
        if cfg.quantize:
            try:
                index = HypercubeQuantizer(
                    enc.yhat, E, sched.N, cfg.slack, "output"
                ).encode(y)
            except QuantizerOverflow as exc:
                trace.append(
                    _overflow_record(k, t, x, ctrl.xhat, y, E, np.nan, np.nan, p, m)
                )
                trace.overflow = True
                trace.overflow_step = k
                trace.overflow_which = exc.which
                trace.diagnostic = f"step {k}: {exc}"
                break
            q = HypercubeQuantizer(ctrl.yhat, E, sched.N, cfg.slack).decode(index)
        else:
            index, q = -1, y.copy()

        u = ctrl.u
        trace.append(
            TraceRecord(
                k=k,
                t=t,
                x=x.copy(),
                xhat=ctrl.xhat.copy(),
                y=y,
                yhat=ctrl.yhat,
                q_index=index,
                q=q,
                Q1_yhat=nan_p,
                Q2_u=nan_m,
                u=u,
                u_applied=u,
                E=E,
            )
        )
        center = ctrl.yhat
        ctrl.step(q, center)
        if cfg.quantize:
            enc_q = HypercubeQuantizer(enc.yhat, E, sched.N, cfg.slack).decode(index)
            enc.step(enc_q, enc.yhat)
        else:
            enc.step(y, enc.yhat)
        if not np.array_equal(enc.xhat, ctrl.xhat):
            trace.replica_mismatch = True
        x = dp.A_d @ x + dp.B_d @ u
    return trace


def simulate_full_quantized(cfg):
    """Input/output protocol with origin-centered estimate and input quantizers.

    The controller quantizes its output estimate and input, the plant side
    decodes them, and the encoder centers the output quantizer on the decoded
    estimate. The observer update uses the unquantized input.
    """
    sched = cfg.schedule
    if sched.variant != "full":
        raise PreconditionError(f"full protocol needs a full schedule, got {sched.variant}")
    dp = cfg.dp
    p, m = dp.p, dp.m
    ctrl, _ = _replicas(cfg)
    x = cfg.x0.copy()
    trace = Trace(protocol="full")
    N, N1, N2 = sched.N, sched.N1, sched.N2

    for k in range(cfg.k_max + 1):
        t = k * dp.h
        y = dp.C @ x
        E, E1, E2 = float(sched.E[k]), float(sched.E1[k]), float(sched.E2[k])
        yhat = ctrl.yhat
        u = ctrl.u
        try:
            # controller side
            Q1 = origin_quantizer(p, E1, N1, cfg.slack, "estimate")
            Q2 = origin_quantizer(m, E2, N2, cfg.slack, "input")
            i1 = Q1.encode(yhat)
            i2 = Q2.encode(u)
            # plant side: decode the estimate and input, then encode y
            center = Q1.decode(i1)
            u_applied = Q2.decode(i2)
            i0 = HypercubeQuantizer(center, E, N, cfg.slack, "output").encode(y)
        except QuantizerOverflow as exc:
            trace.append(_overflow_record(k, t, x, ctrl.xhat, y, E, E1, E2, p, m))
            trace.overflow = True
            trace.overflow_step = k
            trace.overflow_which = exc.which
            trace.diagnostic = f"step {k}: {exc}"
            break
        # controller decodes y around its own copy of Q1(yhat)
        ctrl_center = Q1.decode(i1)
        q = HypercubeQuantizer(ctrl_center, E, N).decode(i0)
        if not np.array_equal(ctrl_center, center):
            trace.replica_mismatch = True

        trace.append(
            TraceRecord(
                k=k,
                t=t,
                x=x.copy(),
                xhat=ctrl.xhat.copy(),
                y=y,
                yhat=yhat,
                q_index=i0,
                q=q,
                Q1_yhat=center,
                Q2_u=u_applied,
                u=u,
                u_applied=u_applied,
                E=E,
                E1=E1,
                E2=E2,
                q1_index=i1,
                q2_index=i2,
            )
        )
        ctrl.step(q, ctrl_center)
        x = dp.A_d @ x + dp.B_d @ u_applied
    return trace


def simulate(cfg):
    if cfg.schedule.variant == "full":
        return simulate_full_quantized(cfg)
    return simulate_output_quantized(cfg)


def intersample_trajectory(cfg, trace, substeps=None):
    """Continuous-time state between samples under the held input.

    Returns ``(t, X)`` with ``substeps`` points per sampling period and the
    final sample appended; ``substeps = 1`` gives back the sampled states.
    """
    if substeps is None:
        substeps = cfg.substeps
    cp = cfg.cp
    if cp is None:
        raise ValueError("intersample evaluation needs the continuous plant")
    h = cfg.dp.h
    steps = [zoh_step_matrices(cp.A, cp.B, s * h / substeps) for s in range(substeps)]
    ts, xs = [], []
    records = [r for r in trace if not r.overflow]
    for rec in records[:-1]:
        for s, (Phi, Gam) in enumerate(steps):
            ts.append(rec.t + s * h / substeps)
            xs.append(Phi @ rec.x + Gam @ rec.u_applied)
    if records:
        ts.append(records[-1].t)
        xs.append(records[-1].x)
    return np.array(ts), np.array(xs)


def period_endpoint_gap(cfg, trace):
    """Largest mismatch between an exact ZOH period end and the next sample."""
    cp, h = cfg.cp, cfg.dp.h
    Phi, Gam = zoh_step_matrices(cp.A, cp.B, h)
    records = [r for r in trace if not r.overflow]
    gap = 0.0
    for a, b in zip(records[:-1], records[1:]):
        end = Phi @ a.x + Gam @ a.u_applied
        gap = max(gap, vec_max_norm(end - b.x) / max(1.0, vec_max_norm(b.x)))
    return gap


def fitted_decay_ratio(values, start=10):
    """Per-step ratio from a least-squares line through ``log(values[start:])``."""
    v = np.asarray(values, dtype=float)[start:]
    keep = v > 0
    if keep.sum() < 2:
        return 0.0
    k = np.arange(start, start + len(v))[keep]
    slope = np.polyfit(k, np.log(v[keep]), 1)[0]
    return float(np.exp(slope))
