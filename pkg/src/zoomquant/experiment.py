"""Turn an :class:`ExperimentConfig` into plant, gains, certificates, schedule."""

from dataclasses import dataclass, field

import numpy as np

from . import design, schedule as sch
from .config import square_matrix
from .errors import ConfigError, InfeasibleRateError
from .plant import benchmark, discretize, load_plant_file


@dataclass
class Experiment:
    config: object
    cp: object
    dp: object
    gains: object
    levels: tuple
    certificates: object
    schedule: object = None
    notes: dict = field(default_factory=dict)


def load_plant(cfg):
    if cfg.plant_name is not None:
        try:
            return benchmark(cfg.plant_name)
        except KeyError as exc:
            raise ConfigError(str(exc.args[0])) from None
    return load_plant_file(cfg.plant_file)


def _matrix(values, shape, name):
    vals = np.asarray(values, dtype=float)
    if vals.size != shape[0] * shape[1]:
        raise ConfigError(f"{name} needs {shape[0] * shape[1]} entries, got {vals.size}")
    return vals.reshape(shape)


def build_gains(cfg, cp, dp):
    n, m, p = dp.n, dp.m, dp.p
    if cfg.K_source == "matrix":
        K = _matrix(cfg.K_matrix, (m, n), "K_matrix")
    else:
        Q = square_matrix(cfg.lqr_Q, n, "lqr_Q")
        Ru = square_matrix(cfg.lqr_R, m, "lqr_R")
        if cfg.K_source == "lqr":
            K = design.lqr_gain(dp, Q, Ru)
        else:
            K = design.lqr_gain_continuous(cp, Q, Ru)

    if cfg.L_source == "matrix":
        L = _matrix(cfg.L_matrix, (n, p), "L_matrix")
    elif cfg.L_source == "deadbeat":
        L = design.deadbeat_observer_gain(dp)
    else:
        V = square_matrix(cfg.kalman_V, p, "kalman_V")
        if cfg.kalman_W_channel == "input":
            Wu = square_matrix(cfg.kalman_W, m, "kalman_W")
            W = dp.B_d @ Wu @ dp.B_d.T
        else:
            W = square_matrix(cfg.kalman_W, n, "kalman_W")
        L = design.kalman_gain(dp, W, V)
    return design.GainPair.from_plant(dp, K, L)


def _general_certificates(cfg, dp, gains):
    if cfg.rho == "auto":
        return sch.sweep_rate_general(dp, gains)
    rho = None if cfg.rho == "midpoint" else float(cfg.rho)
    return sch.certify_general(dp, gains, rho)


def _full_certificates(cfg, certifier, levels):
    """Rates for the full protocol; ``levels`` may still be ``"auto"``."""
    if cfg.rho == "auto" and cfg.rhobar == "auto":
        if levels == "auto":
            return sch.sweep_rates_full_levels(certifier, certifier.p, certifier.m)
        return sch.sweep_rates_full(certifier, levels), levels
    if cfg.rho == "midpoint" or (cfg.rho == "auto" and cfg.rhobar == "midpoint"):
        rho, rhobar = certifier.default_rates()
    else:
        rho = float(cfg.rho) if not isinstance(cfg.rho, str) else None
        if isinstance(cfg.rhobar, str):
            rhobar = rho if cfg.rhobar == "auto" else certifier.default_rates()[1]
        else:
            rhobar = float(cfg.rhobar)
        if rho is None:
            rho = max(certifier.default_rates()[0], rhobar)
    certs = certifier.certify(rho, rhobar)
    if levels == "auto":
        levels = sch.min_levels_full(certs, certifier.p, certifier.m)
    return certs, levels


def prepare(cfg, k_max=None):
    """Design gains, certify rates, pick levels and build the bound schedule."""
    cp = load_plant(cfg)
    dp = discretize(cp, cfg.h)
    gains = build_gains(cfg, cp, dp)
    if gains.feedback_radius >= 1.0:
        raise InfeasibleRateError(
            f"feedback loop is not Schur (r(A_d - B_d K) = {gains.feedback_radius:.4g})"
        )
    if cfg.protocol != "output_only_deadbeat" and gains.observer_radius >= 1.0:
        raise InfeasibleRateError(
            f"observer is not Schur (r(A_d - L C) = {gains.observer_radius:.4g})"
        )
    horizon = cfg.k_max if k_max is None else k_max
    E_st = cfg.E_st if cfg.E_st is not None else 1.0
    exp = Experiment(cfg, cp, dp, gains, None, None)

    if cfg.protocol == "output_only_general":
        cert0, cert = _general_certificates(cfg, dp, gains)
        N = sch.min_levels_general(cert) if cfg.levels == "auto" else cfg.levels[0]
        exp.levels = (N,)
        exp.certificates = {"M0": cert0, "M": cert}
        exp.schedule = sch.bound_sequence_general(cert0, cert, E_st, N, horizon)
    elif cfg.protocol == "output_only_deadbeat":
        N = sch.min_levels_deadbeat(dp, gains.L) if cfg.levels == "auto" else cfg.levels[0]
        exp.levels = (N,)
        exp.schedule = sch.bound_sequence_deadbeat(dp, gains.L, N, E_st, horizon)
        exp.certificates = {"alpha": exp.schedule.constants["alpha"]}
    else:
        certifier = sch.FullCertifier(dp, gains)
        levels = cfg.levels if cfg.levels == "auto" else tuple(cfg.levels)
        certs, levels = _full_certificates(cfg, certifier, levels)
        exp.levels = tuple(int(v) for v in levels)
        exp.certificates = certs
        exp.schedule = sch.bound_sequence_full(certs, E_st, *exp.levels, horizon)
    return exp


def level_table(cfg):
    """Minimal levels of the four data-rate conditions for ``cfg``'s plant.

    Rows are ``(method, N, size, exponent)``; the configured observer row is
    skipped when that observer cannot be certified.
    """
    cp = load_plant(cfg)
    dp = discretize(cp, cfg.h)
    rows = []
    gains = build_gains(cfg, cp, dp)
    if cfg.L_source != "deadbeat":
        if cfg.rho == "auto":
            _, cert = sch.sweep_rate_general(dp, gains)
        else:
            rho = None if cfg.rho == "midpoint" else float(cfg.rho)
            _, cert = sch.certify_general(dp, gains, rho)
        N = sch.min_levels_general(cert)
        rows.append(("configured_observer", N, N**dp.p, "p"))
    L_db = design.deadbeat_observer_gain(dp)
    N = sch.min_levels_deadbeat(dp, L_db)
    rows.append(("deadbeat_observer", N, N**dp.p, "p"))
    N, size = sch.baseline_pseudo_inverse_min_N(dp)
    rows.append(("pseudo_inverse_observer", N, size, "p"))
    N, size = sch.baseline_state_encoding_min_N(dp)
    rows.append(("state_encoding", N, size, "n"))
    return dp, rows
