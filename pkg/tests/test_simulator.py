import os

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import CONFIGS
from _systems import deadbeat_gains, random_case, random_plant
from zoomquant import schedule as sch
from zoomquant.config import load_config
from zoomquant.design import GainPair, observability_index
from zoomquant.errors import ConditioningError, PreconditionError
from zoomquant.experiment import prepare
from zoomquant.plant import ContinuousPlant, DiscretePlant, discretize
from zoomquant.simulator import (
    SimConfig,
    intersample_trajectory,
    period_endpoint_gap,
    simulate,
)

seeds = st.integers(0, 100_000)


def pendulum_run(name, **overrides):
    cfg = load_config(os.path.join(CONFIGS, name))
    for key, value in overrides.items():
        setattr(cfg, key, value)
    exp = prepare(cfg)
    sim = SimConfig(exp.dp, exp.gains, exp.schedule, cfg.x0, cfg.E_st, cp=exp.cp, substeps=cfg.substeps)
    return exp, sim, simulate(sim)


@pytest.fixture(scope="module")
def full_run():
    return pendulum_run("pendulum_full.ini")


@pytest.fixture(scope="module")
def output_run():
    return pendulum_run("pendulum_output_only.ini")


class TestHandOracle:
    """Scalar plant ``x+ = u``, ``y = x`` with ``K = 1/2``, ``L = 1/4``, ``N = 3``."""

    @pytest.fixture
    def trace(self):
        dp = DiscretePlant([[0.0]], [[1.0]], [[1.0]], 1.0)
        gains = GainPair.from_plant(dp, [[0.5]], [[0.25]])
        cert0 = sch.decay_certificate(dp.C, gains.R, np.eye(1), 0.5)
        cert = sch.decay_certificate(dp.C, gains.R, gains.L, 0.5)
        assert (cert0.M, cert.M) == (1.0, 0.25)
        sched = sch.bound_sequence_general(cert0, cert, 1.0, 3, 3)
        return simulate(SimConfig(dp, gains, sched, [0.9], 1.0))

    def test_bounds(self, trace):
        np.testing.assert_allclose(trace.column("E")[:3], [1.0, 7 / 12, (7 / 12) ** 2], rtol=1e-15)

    def test_indices_and_values(self, trace):
        assert [r.q_index for r in trace[:3]] == [2, 1, 1]
        np.testing.assert_allclose(trace.column("q")[:3, 0], [2 / 3, 1 / 6, -1 / 12], atol=1e-15)

    def test_states(self, trace):
        np.testing.assert_allclose(trace.column("xhat")[:4, 0], [0, 1 / 6, -1 / 12, 1 / 24], atol=1e-15)
        np.testing.assert_allclose(trace.column("x")[:4, 0], [0.9, 0, -1 / 12, 1 / 24], atol=1e-15)
        np.testing.assert_allclose(trace.column("u")[:3, 0], [0, -1 / 12, 1 / 24], atol=1e-15)


class TestEquilibrium:
    def test_output_only_stays_at_zero(self, output_run):
        exp, sim, _ = output_run
        sim = SimConfig(exp.dp, exp.gains, exp.schedule, np.zeros(4), 0.15)
        trace = simulate(sim)
        assert not trace.overflow
        assert not np.any(trace.column("x")) and not np.any(trace.column("u"))
        assert not np.any(trace.column("q"))

    def test_full_stays_at_zero(self, full_run):
        exp, _, _ = full_run
        trace = simulate(SimConfig(exp.dp, exp.gains, exp.schedule, np.zeros(4), 0.15))
        assert not trace.overflow
        for name in ("x", "xhat", "q", "Q1_yhat", "Q2_u", "u_applied"):
            assert not np.any(trace.column(name)), name


class TestFullProtocol:
    def test_first_step_quantizers_are_zero(self, full_run):
        _, _, trace = full_run
        first = trace[0]
        assert first.E1 == 0.0 and first.E2 == 0.0
        assert not first.Q1_yhat.any() and not first.Q2_u.any()

    def test_runs_clean_and_converges(self, full_run):
        _, sim, trace = full_run
        assert not trace.overflow and not trace.replica_mismatch
        assert len(trace) == sim.k_max + 1
        assert abs(trace[-1].x[2]) < 1e-3

    def test_three_bounds_hold(self, full_run):
        _, _, trace = full_run
        for r in trace:
            assert np.max(np.abs(r.y - r.Q1_yhat)) <= r.E * (1 + 1e-9)
            assert np.max(np.abs(r.yhat)) <= r.E1 * (1 + 1e-9) + 1e-300
            assert np.max(np.abs(r.u)) <= r.E2 * (1 + 1e-9) + 1e-300

    def test_observer_uses_unquantized_input(self, full_run):
        exp, _, trace = full_run
        dp, g = exp.dp, exp.gains
        a, b = trace[5], trace[6]
        want = dp.A_d @ a.xhat + dp.B_d @ a.u + g.L @ (a.q - a.Q1_yhat)
        np.testing.assert_allclose(b.xhat, want, rtol=1e-12, atol=1e-15)
        assert not np.allclose(a.u, a.u_applied, rtol=0, atol=0)

    def test_schedule_mismatch(self, full_run, output_run):
        exp, sim, _ = full_run
        other = SimConfig(exp.dp, exp.gains, output_run[0].schedule, sim.x0, 0.15)
        with pytest.raises(PreconditionError):
            from zoomquant.simulator import simulate_full_quantized

            simulate_full_quantized(other)


class TestOutputOnly:
    def test_pendulum_converges(self, output_run):
        _, _, trace = output_run
        assert not trace.overflow
        assert len(trace) == 201
        assert np.max(np.abs(trace[-1].x)) < 1e-3

    def test_quantization_error(self, output_run):
        exp, _, trace = output_run
        for r in trace:
            assert np.max(np.abs(r.y - r.yhat)) <= r.E * (1 + 1e-9)
            assert np.max(np.abs(r.y - r.q)) <= r.E / exp.schedule.N * (1 + 1e-9)

    def test_wrong_initial_bound_overflows(self, output_run):
        exp, sim, _ = output_run
        bad = SimConfig(exp.dp, exp.gains, exp.schedule, sim.x0, 0.01)
        assert bad.initial_bound_violated
        exp_small = prepare(_with(exp.config, E_st=0.01))
        trace = simulate(SimConfig(exp.dp, exp.gains, exp_small.schedule, sim.x0, 0.01))
        assert trace.overflow
        assert trace.overflow_step == 0 and trace.overflow_which == "output"
        assert "step 0" in trace.diagnostic

    def test_schedule_mismatch(self, full_run):
        exp, sim, _ = full_run
        from zoomquant.simulator import simulate_output_quantized

        with pytest.raises(PreconditionError):
            simulate_output_quantized(sim)


def _with(cfg, **changes):
    import dataclasses

    return dataclasses.replace(cfg, **changes)


@settings(max_examples=15)
@given(seeds, st.sampled_from(["general", "deadbeat", "full"]))
def test_replicas_stay_synchronized(seed, variant):
    sim = random_case(np.random.default_rng(seed), variant, k_max=60)
    trace = simulate(sim)
    assert not trace.overflow
    assert not trace.replica_mismatch


class TestIntersample:
    def test_single_substep_is_the_sampled_trace(self, output_run):
        _, sim, trace = output_run
        t, X = intersample_trajectory(sim, trace, substeps=1)
        np.testing.assert_array_equal(t, trace.column("t"))
        np.testing.assert_allclose(X, trace.column("x"), rtol=0, atol=1e-15)

    def test_period_endpoints(self, full_run):
        _, sim, trace = full_run
        assert period_endpoint_gap(sim, trace) <= 1e-9
        t, X = intersample_trajectory(sim, trace)
        assert len(t) == (len(trace) - 1) * sim.substeps + 1
        assert np.all(np.diff(t) > 0)

    def test_integrator_free_of_input_is_constant(self):
        cp = ContinuousPlant(np.zeros((2, 2)), np.zeros((2, 1)), np.eye(2))
        dp = discretize(cp, 0.5)
        gains = GainPair.from_plant(dp, np.zeros((1, 2)), 0.5 * np.eye(2))
        cert0 = sch.decay_certificate(dp.C, gains.R, np.eye(2), 0.75)
        cert = sch.decay_certificate(dp.C, gains.R, gains.L, 0.75)
        sched = sch.bound_sequence_general(cert0, cert, 1.0, 3, 4)
        sim = SimConfig(dp, gains, sched, [0.3, -0.2], 1.0, cp=cp, substeps=5)
        trace = simulate(sim)
        _, X = intersample_trajectory(sim, trace)
        np.testing.assert_array_equal(X, np.tile([0.3, -0.2], (len(X), 1)))


@settings(max_examples=20)
@given(seeds)
def test_deadbeat_reconstruction_without_quantization(seed):
    rng = np.random.default_rng(seed)
    p = int(rng.integers(1, 3))
    cp, dp = random_plant(rng, n=int(rng.integers(p, 5)), p=p, observable=True)
    try:
        gains = deadbeat_gains(dp)
    except ConditioningError:
        return
    sched = sch.bound_sequence_deadbeat(dp, gains.L, 3, 1.0, 20)
    x0 = rng.uniform(-1, 1, dp.n)
    trace = simulate(SimConfig(dp, gains, sched, x0, 1.0, quantize=False))
    eta = observability_index(dp)
    X = trace.column("x")
    e = np.max(np.abs(trace.errors), axis=1)
    scale = np.maximum(1.0, np.max(np.abs(X), axis=1))
    assert np.all(e[eta:] <= 1e-8 * scale[eta:])
