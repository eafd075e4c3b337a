import numpy as np
import pytest

from mmwsn import combining, metrics, precoding
from mmwsn.config import PerSensor, TotalBudget

from conftest import digital_design, realize, small_cfg


def test_error_covariance_dual_forms_agree():
    cfg = small_cfg()
    for seed in range(20):
        model, ch, dec = realize(cfg, 400 + seed)
        pre = digital_design(cfg, dec, model)
        E1 = metrics.error_covariance(ch, pre.F, model, cfg.sigma_n_sq,
                                      cfg.sigma_v_sq, method="direct")
        E2 = metrics.error_covariance(ch, pre.F, model, cfg.sigma_n_sq,
                                      cfg.sigma_v_sq, method="woodbury")
        assert np.linalg.norm(E1 - E2) <= 1e-9 * np.linalg.norm(E1)


def test_woodbury_requires_observation_noise():
    cfg = small_cfg()
    model, ch, dec = realize(cfg, 401)
    pre = digital_design(cfg, dec, model)
    with pytest.raises(ValueError):
        metrics.error_covariance(ch, pre.F, model, 0.0, cfg.sigma_v_sq,
                                 method="woodbury")
    with pytest.raises(ValueError):
        metrics.error_covariance(ch, pre.F, model, 0.1, cfg.sigma_v_sq,
                                 method="nonsense")


def test_lmmse_transceiver_mse_equals_trace_of_error_covariance():
    # For ANY precoder, the LMMSE combiner's MSE is Tr(E).
    cfg = small_cfg()
    for seed in range(10):
        model, ch, dec = realize(cfg, 420 + seed)
        pre = digital_design(cfg, dec, model)
        E = metrics.error_covariance(ch, pre.F, model, cfg.sigma_n_sq,
                                     cfg.sigma_v_sq)
        W = combining.lmmse_combiner(ch, pre.F, model, cfg.sigma_n_sq,
                                     cfg.sigma_v_sq)
        mse = metrics.mse_of_linear_transceiver(
            pre.F, W, ch, model, cfg.sigma_n_sq, cfg.sigma_v_sq)
        assert abs(mse - np.trace(E).real) <= 1e-9 * mse


def test_noiseless_design_diagonalizes_error_covariance():
    cfg = small_cfg(observation_mode="noiseless")
    for seed in range(10):
        model, ch, dec = realize(cfg, 440 + seed)
        pre = digital_design(cfg, dec, model)
        E = metrics.error_covariance(ch, pre.F, model, 0.0, cfg.sigma_v_sq)
        off = E - np.diag(np.diag(E))
        assert np.max(np.abs(off)) <= 1e-8 * np.max(np.abs(np.diag(E)))
        closed = float(np.sum(cfg.sigma_v_sq / (
            cfg.sigma_v_sq + pre.allocation.p * dec.Lambda_g[: cfg.m])))
        assert abs(np.trace(E).real - closed) <= 1e-8 * closed


@pytest.mark.xfail(strict=True, reason=(
    "The per-sensor extraction F_k = V_g1_k diag(sqrt(p)) pinv(U_M_k) is the "
    "unique block-diagonal solution of F U_M = V_g1 Sigma when q_k = m, and "
    "it necessarily carries energy outside the row space of U_M (the "
    "per-sensor blocks of U_M are not orthonormal). That energy re-enters "
    "the error covariance through the observation-noise term, so E is NOT "
    "diagonalized by any feasible block-diagonal design in the noisy regime; "
    "the derivation assumes U_M_k U_M_k^H = I, which only holds at K = 1. "
    "See the decisions ledger."))
def test_noisy_design_diagonalizes_error_covariance_unattainable():
    cfg = small_cfg()
    model, ch, dec = realize(cfg, 460)
    pre = digital_design(cfg, dec, model)
    E = metrics.error_covariance(ch, pre.F, model, cfg.sigma_n_sq,
                                 cfg.sigma_v_sq)
    off = E - np.diag(np.diag(E))
    assert np.max(np.abs(off)) <= 1e-8 * np.max(np.abs(np.diag(E)))


@pytest.mark.xfail(strict=True, reason=(
    "Same root cause as the diagonalization property: the scalarized MSE "
    "assumes the precoder adds no energy outside the row space of U_M, "
    "which no block-diagonal precoder satisfying the structural identity "
    "can achieve for K > 1 in the noisy regime. See the decisions ledger."))
def test_noisy_scalar_mse_matches_trace_unattainable():
    cfg = small_cfg()
    model, ch, dec = realize(cfg, 461)
    pre = digital_design(cfg, dec, model)
    E = metrics.error_covariance(ch, pre.F, model, cfg.sigma_n_sq,
                                 cfg.sigma_v_sq)
    closed = metrics.mse_closed_form(pre.allocation.p, dec.Lambda_Mtilde,
                                     dec.Lambda_g[: cfg.m], cfg.sigma_n_sq,
                                     cfg.sigma_v_sq)
    assert abs(np.trace(E).real - closed) <= 1e-8 * closed


def test_scalar_mse_matches_trace_for_ideal_stacked_precoder():
    # The scalarized MSE is exact for the non-block-diagonal stacked
    # structure F = V_g1 Sigma U_M^H (the relaxed optimum the closed form
    # actually describes).
    cfg = small_cfg()
    for seed in range(10):
        model, ch, dec = realize(cfg, 470 + seed)
        pre = digital_design(cfg, dec, model)
        p = pre.allocation.p
        F_ideal = dec.V_g1 @ np.diag(np.sqrt(p)) @ dec.U_M.conj().T
        E = metrics.error_covariance(ch, F_ideal, model, cfg.sigma_n_sq,
                                     cfg.sigma_v_sq)
        closed = metrics.mse_closed_form(p, dec.Lambda_Mtilde,
                                         dec.Lambda_g[: cfg.m],
                                         cfg.sigma_n_sq, cfg.sigma_v_sq)
        assert abs(np.trace(E).real - closed) <= 1e-8 * closed
        # Its transmit power meets the stream-level budget exactly.
        power = precoding.transmit_power(F_ideal, model, cfg.sigma_n_sq)
        budget = float(p @ (dec.Lambda_Mtilde + cfg.sigma_n_sq))
        assert abs(power - budget) <= 1e-9 * budget
        # And E is diagonal in the right-singular basis of M.
        Et = dec.V_M.conj().T @ E @ dec.V_M
        off = Et - np.diag(np.diag(Et))
        assert np.max(np.abs(off)) <= 1e-8 * np.max(np.abs(np.diag(Et)))


def test_per_stream_mse_sums_to_closed_form():
    p = np.array([0.3, 0.7])
    lam = np.array([4.0, 1.0])
    sig = np.array([9.0, 4.0])
    per = metrics.per_stream_mse(p, lam, sig, 0.5, 1.0)
    total = metrics.mse_closed_form(p, lam, sig, 0.5, 1.0)
    assert np.isclose(per.sum(), total)
    assert np.all(per > 0) and np.all(per <= 1)


def test_noiseless_lmmse_attains_bcrb():
    cfg = small_cfg(observation_mode="noiseless")
    for seed in range(10):
        model, ch, dec = realize(cfg, 480 + seed)
        pre = digital_design(cfg, dec, model)
        E = metrics.error_covariance(ch, pre.F, model, 0.0, cfg.sigma_v_sq)
        bound = metrics.bcrb(ch, pre.F, model, cfg.sigma_v_sq)
        assert abs(np.trace(E).real - bound) <= 1e-9 * bound


def test_centralized_bound_is_a_floor():
    cfg = small_cfg()
    for seed in range(10):
        model, ch, dec = realize(cfg, 500 + seed)
        pre = digital_design(cfg, dec, model)
        E = metrics.error_covariance(ch, pre.F, model, cfg.sigma_n_sq,
                                     cfg.sigma_v_sq)
        assert metrics.centralized_bound(model) <= np.trace(E).real + 1e-12


def test_dominant_directional_power_tight_and_dominated_on_average():
    cfg = small_cfg()
    dom, dig = [], []
    for seed in range(100):
        model, ch, dec = realize(cfg, 520 + seed)
        pre, comb = metrics.dominant_directional_design(ch, cfg, model)
        power = precoding.transmit_power(pre.F, model, cfg.sigma_n_sq)
        assert abs(power - 1.0) <= 1e-9
        dom.append(metrics.mse_of_linear_transceiver(
            pre.F, comb.W_hybrid, ch, model, cfg.sigma_n_sq, cfg.sigma_v_sq))
        design = digital_design(cfg, dec, model)
        E = metrics.error_covariance(ch, design.F, model, cfg.sigma_n_sq,
                                     cfg.sigma_v_sq)
        dig.append(float(np.trace(E).real))
    # Single-beam steering cannot beat the optimized design on average
    # (per-realization ordering is not guaranteed: both are heuristically
    # power-normalized).
    assert np.mean(dom) >= np.mean(dig)


def test_dominant_directional_per_sensor_power():
    cfg = small_cfg(power_mode=PerSensor((0.3, 0.2, 0.25, 0.25)))
    model, ch, dec = realize(cfg, 540)
    pre, comb = metrics.dominant_directional_design(ch, cfg, model)
    for k, P_k in enumerate(cfg.power_mode.P_k):
        power = precoding.transmit_power(pre.F_k[k], model, cfg.sigma_n_sq,
                                         sensor=k)
        assert abs(power - P_k) <= 1e-9 * P_k
