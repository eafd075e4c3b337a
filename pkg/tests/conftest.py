"""Shared scenario builders for the test suite."""

import numpy as np
import pytest

from mmwsn import (WsnConfig, build_measurement_model, generate_channel,
                   precoding)
from mmwsn.config import PerSensor, TotalBudget


def small_cfg(**overrides) -> WsnConfig:
    """Reduced-scale scenario used by the fast deterministic suites."""
    base = dict(
        K=4, N_T=8, N_R=8, N_RF_s=2, N_RF_fc=4, L=4, m=2, q_k=(2, 2, 2, 2),
        sigma_n_sq=0.1, sigma_v_sq=0.1, power_mode=TotalBudget(1.0),
        observation_mode="noisy", seed=0)
    base.update(overrides)
    return WsnConfig(**base)


def paper_cfg(**overrides) -> WsnConfig:
    """Full-scale scenario used by the Monte-Carlo trend suite."""
    base = dict(
        K=20, N_T=10, N_R=16, N_RF_s=3, N_RF_fc=6, L=6, m=3, q_k=(3,) * 20,
        sigma_n_sq=0.1, sigma_v_sq=0.1, power_mode=TotalBudget(1.0),
        observation_mode="noisy", seed=0)
    base.update(overrides)
    return WsnConfig(**base)


def realize(cfg: WsnConfig, seed: int):
    """One measurement model + channel draw + its decomposition."""
    rng = np.random.default_rng(seed)
    model = build_measurement_model(cfg, rng)
    channel = generate_channel(cfg, rng)
    dec = channel.decomposition(model)
    return model, channel, dec


def digital_design(cfg: WsnConfig, dec, model) -> precoding.PrecoderSet:
    """Solve the allocation for cfg's power mode and assemble the precoders."""
    sigma_n = cfg.effective_sigma_n_sq()
    lam = dec.Lambda_Mtilde
    sig = dec.Lambda_g[: model.m]
    if isinstance(cfg.power_mode, TotalBudget):
        P_T = cfg.power_mode.P_T
        if cfg.noiseless:
            alloc = precoding.waterfill_total_noiseless(sig, cfg.sigma_v_sq, P_T)
        else:
            alloc = precoding.waterfill_total_noisy(lam, sig, sigma_n,
                                                    cfg.sigma_v_sq, P_T)
    else:
        P = np.asarray(cfg.power_mode.P_k)
        Phi = precoding.sensor_coupling(dec).diag
        if cfg.noiseless:
            alloc = precoding.solve_per_sensor_noiseless(sig, Phi,
                                                         cfg.sigma_v_sq, P)
        else:
            alloc = precoding.solve_per_sensor_noisy(lam, sig, Phi, sigma_n,
                                                     cfg.sigma_v_sq, P)
    mode = precoding.NOISELESS if cfg.noiseless else precoding.NOISY
    return precoding.assemble_digital_precoders(alloc, dec, model, mode)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# One verdict line per acceptance criterion, echoed after the test summary so
# the outcome is visible regardless of output capturing.
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
