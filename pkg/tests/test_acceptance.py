"""End-to-end acceptance checks, each with its runtime budget."""

import dataclasses
import os
import time
from contextlib import contextmanager

import numpy as np
import pytest

from _oracles import (
    certificate_violation,
    deadbeat_sum,
    full_sums,
    general_sum,
    random_full_certs,
)
from _systems import random_case, random_plant
from conftest import ACCEPTANCE, CONFIGS
from zoomquant import schedule as sch
from zoomquant.config import load_config
from zoomquant.design import (
    GainPair,
    _deadbeat_gain,
    deadbeat_observer_gain,
    observability_index,
)
from zoomquant.errors import ConditioningError
from zoomquant.experiment import prepare
from zoomquant.numerics import induced_max_norm, spectral_radius
from zoomquant.plant import DiscretePlant, benchmark, check_assumptions, discretize
from zoomquant.quantizer import saturation_tolerance
from zoomquant.simulator import SATURATION_SLACK, SimConfig, fitted_decay_ratio, simulate

PUBLISHED_RF = 0.8845


@contextmanager
def criterion(number, title, budget):
    """Record PASS/FAIL for one criterion; exceeding ``budget`` seconds fails it."""
    start = time.perf_counter()
    detail = {}
    try:
        yield detail
        elapsed = time.perf_counter() - start
        assert elapsed < budget, f"took {elapsed:.2f} s, budget {budget} s"
    except BaseException as exc:
        elapsed = time.perf_counter() - start
        line = f"criterion {number}: FAIL  {title} ({elapsed:.2f} s) {exc}"
        ACCEPTANCE[number] = line
        print(line)
        raise
    info = " ".join(f"{k}={v}" for k, v in detail.items())
    line = f"criterion {number}: PASS  {title} ({elapsed:.2f} s) {info}".rstrip()
    ACCEPTANCE[number] = line
    print(line)


@pytest.fixture(scope="module")
def pendulum():
    return discretize(benchmark("inverted_pendulum_2out"), 0.03)


def full_config():
    return load_config(os.path.join(CONFIGS, "pendulum_full.ini"))


def test_criterion_1_pseudo_inverse_baseline(pendulum):
    with criterion(1, "pseudo-inverse observer levels", 1.0) as d:
        N, size = sch.baseline_pseudo_inverse_min_N(pendulum)
        d.update(N=N, size=size)
        assert (N, size) == (4, 16)


def test_criterion_2_state_encoding_baseline(pendulum):
    with criterion(2, "state encoding levels", 1.0) as d:
        N, size = sch.baseline_state_encoding_min_N(pendulum)
        d.update(N=N, size=size)
        assert (N, size) == (4, 256)


def test_criterion_3_certification():
    with criterion(3, "input/output quantization at (151, 301, 1601)", 5.0) as d:
        exp = prepare(full_config())
        rF = exp.schedule.rF
        d.update(rF=f"{rF:.4f}", published=PUBLISHED_RF)
        assert exp.levels == (151, 301, 1601)
        assert rF < 1.0
        assert abs(rF - PUBLISHED_RF) <= 0.10


@pytest.mark.xfail(
    strict=True,
    reason="process covariance 1e-3 I on the full state gives r(F) near 1.10 at "
    "these levels under this certificate procedure",
)
def test_criterion_3_state_channel_covariance():
    cfg = dataclasses.replace(full_config(), kalman_W_channel="state")
    assert prepare(cfg).schedule.rF < 1.0


def test_criterion_4_full_simulation():
    with criterion(4, "pendulum run under input/output quantization", 5.0) as d:
        cfg = full_config()
        exp = prepare(cfg)
        sim = SimConfig(exp.dp, exp.gains, exp.schedule, cfg.x0, cfg.E_st, cp=exp.cp)
        trace = simulate(sim)
        t = trace.column("t")
        peak1 = t[np.argmax(trace.column("E1"))]
        peak2 = t[np.argmax(trace.column("E2"))]
        final = abs(trace[-1].x[2])
        d.update(x3=f"{final:.2e}", E1_peak=f"{peak1:.2f}s", E2_peak=f"{peak2:.2f}s")
        assert not trace.overflow
        assert len(trace) == 201 and t[-1] == pytest.approx(6.0)
        assert final < 1e-3
        assert abs(peak1 - 0.45) <= 0.2 and abs(peak2 - 0.45) <= 0.2


def _within(v, center, bound):
    excess = np.max(np.abs(np.asarray(v) - center)) - bound
    return excess <= saturation_tolerance(v, center, bound, SATURATION_SLACK)


def _check_bounds(trace):
    for r in trace:
        if trace.protocol == "full":
            assert _within(r.y, r.Q1_yhat, r.E)
            assert _within(r.yhat, 0.0, r.E1)
            assert _within(r.u, 0.0, r.E2)
        else:
            assert _within(r.y, r.yhat, r.E)


def test_criterion_5_bound_soundness():
    with criterion(5, "random systems under the three schedules", 60.0) as d:
        for variant in ("general", "deadbeat", "full"):
            rng = np.random.default_rng(5)
            worst = -np.inf
            for _ in range(100):
                sim = random_case(rng, variant)
                assert sim.dp.n <= 4
                assert np.max(np.abs(sim.x0)) <= sim.E_st
                trace = simulate(sim)
                assert not trace.overflow, trace.diagnostic
                assert len(trace) == sim.k_max + 1
                _check_bounds(trace)
                # decay of the estimation error through its running envelope
                err = np.max(np.abs(trace.errors), axis=1)
                envelope = np.maximum.accumulate(err[::-1])[::-1]
                excess = fitted_decay_ratio(envelope) - sim.schedule.rF
                worst = max(worst, excess)
                assert excess <= 0.02
            d[variant] = f"{worst:+.4f}"


def test_criterion_6_recursions_match_sums():
    with criterion(6, "recursions against convolution sums", 5.0) as d:
        rng = np.random.default_rng(6)
        worst = 0.0
        for _ in range(50):
            M0, M, rho = rng.exponential(1.0), rng.exponential(1.0), rng.uniform(0.05, 0.95)
            N, Cn = int(rng.integers(2, 100)), rng.uniform(0.1, 3)
            c0 = sch.DecayCertificate(M0, rho, 1, 0, Cn)
            c = sch.DecayCertificate(M, rho, 1, 0, Cn)
            s = sch.bound_sequence_general(c0, c, 1.0, N, 50)
            ref = general_sum(M0, M, rho, 1.0, Cn, N, 50)
            worst = max(worst, np.max(np.abs(s.E - ref) / ref))

            _, dp = random_plant(rng, n=int(rng.integers(1, 5)), p=1, observable=True)
            try:
                L = deadbeat_observer_gain(dp)
            except ConditioningError:
                L = None
            if L is not None:
                s = sch.bound_sequence_deadbeat(dp, L, N, 1.0, 50)
                ref = deadbeat_sum(dp, L, N, 1.0, 50, s.eta)
                nz = ref > 0
                worst = max(worst, np.max(np.abs(s.E[nz] - ref[nz]) / ref[nz]))

            certs = random_full_certs(rng)
            N, N1, N2 = (int(v) for v in rng.integers(2, 2000, size=3))
            s = sch.bound_sequence_full(certs, 1.0, N, N1, N2, 50)
            for got, ref in zip((s.E, s.E1, s.E2), full_sums(certs, 1.0, N, N1, N2, 50)):
                nz = ref > 0
                assert np.array_equal(got[~nz], ref[~nz])
                worst = max(worst, np.max(np.abs(got[nz] - ref[nz]) / ref[nz]))
        d["max_rel"] = f"{worst:.1e}"
        assert worst <= 1e-9


def _random_observable(rng):
    while True:
        n = int(rng.integers(1, 5))
        p = int(rng.integers(1, n + 1))
        m = int(rng.integers(1, 3))
        dp = DiscretePlant(
            rng.normal(size=(n, n)), rng.normal(size=(n, m)), rng.normal(size=(p, n)), 1.0
        )
        if check_assumptions(dp)["observable"]:
            return dp


def test_criterion_7_deadbeat_exactness():
    with criterion(7, "deadbeat observer reconstruction", 10.0) as d:
        rng = np.random.default_rng(7)
        worst_gain = worst_err = 0.0
        for _ in range(50):
            dp = _random_observable(rng)
            L = deadbeat_observer_gain(dp)
            eta = observability_index(dp)
            R = dp.A_d - L @ dp.C
            rel = induced_max_norm(np.linalg.matrix_power(R, eta)) / induced_max_norm(dp.A_d) ** eta
            worst_gain = max(worst_gain, rel)
            assert rel <= 1e-8

            gains = GainPair.from_plant(dp, np.zeros((dp.m, dp.n)), L)
            sched = sch.bound_sequence_deadbeat(dp, L, 2, 1.0, eta + 10)
            x0 = rng.uniform(-1, 1, dp.n)
            trace = simulate(SimConfig(dp, gains, sched, x0, 1.0, quantize=False))
            X = trace.column("x")
            e = np.max(np.abs(trace.errors), axis=1)
            scale = np.maximum(np.max(np.abs(x0)), np.max(np.abs(X), axis=1))
            worst_err = max(worst_err, np.max(e[eta:] / scale[eta:]))
            assert np.all(e[eta:] <= 1e-8 * scale[eta:])
        d.update(gain=f"{worst_gain:.1e}", error=f"{worst_err:.1e}")


@pytest.mark.xfail(
    strict=True,
    reason="single-output plant sampled at h = 0.1 with cond(O) near 2e5: rounding "
    "in the unique deadbeat gain alone exceeds 1e-8 ||A_d||^eta",
)
def test_criterion_7_ill_conditioned_sampled_plant():
    rng = np.random.default_rng(144)
    p = int(rng.integers(1, 4))
    _, dp = random_plant(rng, n=int(rng.integers(p, 5)), p=p, observable=True)
    eta = observability_index(dp)
    L = _deadbeat_gain(dp.A_d.T, dp.C.T).T
    R = dp.A_d - L @ dp.C
    assert induced_max_norm(np.linalg.matrix_power(R, eta)) <= 1e-8 * induced_max_norm(dp.A_d) ** eta


def test_criterion_8_certificate_soundness():
    with criterion(8, "certificate soundness up to three horizons", 10.0) as d:
        rng = np.random.default_rng(8)
        worst = -np.inf
        horizons = []
        for _ in range(100):
            n = int(rng.integers(1, 5))
            R = rng.normal(size=(n, n))
            R *= rng.uniform(0.1, 0.97) / max(spectral_radius(R), 1e-3)
            P = rng.normal(size=(int(rng.integers(1, 3)), n))
            S = rng.normal(size=(n, int(rng.integers(1, 3))))
            r = spectral_radius(R)
            rho = r + rng.uniform(0.02, 0.9) * (1.0 - r)
            cert = sch.decay_certificate(P, R, S, rho)
            horizons.append(cert.horizon)
            worst = max(worst, certificate_violation(P, R, S, cert))
        d.update(max_log_ratio=f"{worst:.2e}", max_horizon=max(horizons))
        assert worst <= 1e-12
