"""Closed-form MSE evaluation, estimation bounds, and the beam-steering baseline."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .channel import ChannelRealization
from .combining import CombinerSet, hybrid_combiner, received_covariance
from .config import PerSensor, WsnConfig
from .measurement import MeasurementModel
from .precoding import transmit_power
from .somp import HybridPrecoderSet


@dataclass(frozen=True)
class MseReport:
    mse_matrix_form: float
    mse_scalar_form: float | None = None
    bcrb: float | None = None
    centralized: float | None = None
    empirical: float | None = None
    per_stream: np.ndarray | None = None


def error_covariance(channel: ChannelRealization, F: np.ndarray,
                     model: MeasurementModel, sigma_n_sq: float,
                     sigma_v_sq: float, method: str = "direct") -> np.ndarray:
    """LMMSE error covariance for precoder F.

    "direct" inverts through the FC-side covariance; "woodbury" pushes the
    inverse to the q-dimensional side (requires sigma_n_sq > 0). Both are kept
    so they can cross-check each other.
    """
    G, M = channel.G, model.M
    m = model.m
    GF = G @ F
    if method == "direct":
        C = sigma_n_sq * (GF @ GF.conj().T) + sigma_v_sq * np.eye(G.shape[0])
        GFM = GF @ M
        inner = GFM.conj().T @ np.linalg.solve(C, GFM)
        return np.linalg.inv(np.eye(m) + inner)
    if method == "woodbury":
        if sigma_n_sq <= 0:
            raise ValueError("woodbury form requires sigma_n_sq > 0")
        q = M.shape[0]
        B = (sigma_n_sq / sigma_v_sq) * (GF.conj().T @ GF) + np.eye(q)
        inner = (M.conj().T @ M - M.conj().T @ np.linalg.solve(B, M)) / sigma_n_sq
        return np.linalg.inv(np.eye(m) + inner)
    raise ValueError(f"unknown method {method!r}")


def mse_of_linear_transceiver(F: np.ndarray, W: np.ndarray,
                              channel: ChannelRealization, model: MeasurementModel,
                              sigma_n_sq: float, sigma_v_sq: float) -> float:
    """MSE of theta_hat = W^H y for an arbitrary linear pair (F, W)."""
    GF = channel.G @ F
    H = W.conj().T @ GF @ model.M - np.eye(model.m)
    noise_cov = sigma_n_sq * (GF @ GF.conj().T) + sigma_v_sq * np.eye(GF.shape[0])
    mse = np.sum(np.abs(H) ** 2) + np.trace(W.conj().T @ noise_cov @ W)
    return float(mse.real)


def mse_closed_form(p: np.ndarray, lambda_M: np.ndarray, sigma_G_sq: np.ndarray,
                    sigma_n_sq: float, sigma_v_sq: float) -> float:
    """Scalarized MSE: sum over streams of the diagonalized error terms."""
    p = np.asarray(p, dtype=float)
    lam = np.asarray(lambda_M, dtype=float)
    sig = np.asarray(sigma_G_sq, dtype=float)[: p.size]
    num = sigma_v_sq + sigma_n_sq * p * sig
    den = sigma_v_sq + (sigma_n_sq + lam) * p * sig
    return float(np.sum(num / den))


def per_stream_mse(p, lambda_M, sigma_G_sq, sigma_n_sq, sigma_v_sq) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    lam = np.asarray(lambda_M, dtype=float)
    sig = np.asarray(sigma_G_sq, dtype=float)[: p.size]
    return (sigma_v_sq + sigma_n_sq * p * sig) / (
        sigma_v_sq + (sigma_n_sq + lam) * p * sig)


def bcrb(channel: ChannelRealization, F: np.ndarray, model: MeasurementModel,
         sigma_v_sq: float) -> float:
    """Bayesian CRB for noiseless observations through the effective channel G F M."""
    GFM = channel.G @ F @ model.M
    fisher = np.eye(model.m) + (GFM.conj().T @ GFM) / sigma_v_sq
    return float(np.trace(np.linalg.inv(fisher)).real)


def centralized_bound(model: MeasurementModel) -> float:
    """MSE floor when all observations reach the FC undistorted."""
    M = model.M
    fisher = np.eye(model.m) + M.conj().T @ np.linalg.solve(model.R_n, M)
    return float(np.trace(np.linalg.inv(fisher)).real)


def dominant_directional_design(channel: ChannelRealization, cfg: WsnConfig,
                                model: MeasurementModel
                                ) -> tuple[HybridPrecoderSet, CombinerSet]:
    """Baseline that beamforms along each sensor's strongest multipath cluster.

    RF stages replicate the dominant steering vector; the baseband transmit
    stage spreads power uniformly over the observation streams before the
    power normalization. The receive baseband is the LMMSE stage for the
    chosen RF columns, so the comparison isolates the RF beam choice.
    """
    sigma_n_sq = cfg.effective_sigma_n_sq()
    F_RF_k, F_BB_k = [], []
    for k in range(cfg.K):
        n_star = int(np.argmax(np.abs(channel.alpha[:, k])))
        beam = channel.A_T_k[k][:, n_star]
        F_RF_k.append(np.tile(beam[:, None], (1, cfg.N_RF_s)))
        F_BB_k.append(np.ones((cfg.N_RF_s, cfg.q_k[k]), dtype=complex))

    if isinstance(cfg.power_mode, PerSensor):
        for k in range(cfg.K):
            power = transmit_power(F_RF_k[k] @ F_BB_k[k], model, sigma_n_sq, sensor=k)
            if power > 0:
                F_BB_k[k] *= np.sqrt(cfg.power_mode.P_k[k] / power)
    else:
        F_hat = scipy.linalg.block_diag(
            *[rf @ bb for rf, bb in zip(F_RF_k, F_BB_k)])
        power = transmit_power(F_hat, model, sigma_n_sq)
        if power > 0:
            scale = np.sqrt(cfg.power_mode.P_T / power)
            F_BB_k = [bb * scale for bb in F_BB_k]

    precoders = HybridPrecoderSet(
        F_RF_k=tuple(F_RF_k), F_BB_k=tuple(F_BB_k),
        F_RF=scipy.linalg.block_diag(*F_RF_k),
        F_BB=scipy.linalg.block_diag(*F_BB_k))

    F = precoders.F
    R_yy = received_covariance(channel, F, model, sigma_n_sq, cfg.sigma_v_sq)
    W = np.linalg.solve(R_yy, channel.G @ F @ model.M)
    # Receive beams: arrival clusters ranked by aggregate gain across sensors.
    order = np.argsort(-np.sum(np.abs(channel.alpha) ** 2, axis=1), kind="stable")
    idx = [int(order[i % cfg.L]) for i in range(cfg.N_RF_fc)]
    W_RF = channel.A_R[:, idx]
    gram = W_RF.conj().T @ R_yy @ W_RF
    W_BB = np.linalg.lstsq(gram, W_RF.conj().T @ R_yy @ W, rcond=None)[0]
    combiners = CombinerSet(W=W, W_RF=W_RF, W_BB=W_BB, R_yy=R_yy)
    return precoders, combiners
