"""LMMSE receive combining at the fusion center, digital and hybrid."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ChannelRealization
from .measurement import MeasurementModel
from .somp import somp_decompose


@dataclass(frozen=True)
class CombinerSet:
    W: np.ndarray        # N_R x m fully-digital LMMSE combiner
    W_RF: np.ndarray     # N_R x N_RF_fc, columns copied from A_R
    W_BB: np.ndarray     # N_RF_fc x m
    R_yy: np.ndarray     # N_R x N_R received covariance

    @property
    def W_hybrid(self) -> np.ndarray:
        return self.W_RF @ self.W_BB


def received_covariance(channel: ChannelRealization, F: np.ndarray,
                        model: MeasurementModel, sigma_n_sq: float,
                        sigma_v_sq: float) -> np.ndarray:
    """R_yy = G F (M M^H + sigma_n_sq I) F^H G^H + sigma_v_sq I, symmetrized."""
    GF = channel.G @ F
    GFM = GF @ model.M
    R = GFM @ GFM.conj().T + sigma_n_sq * (GF @ GF.conj().T)
    R = R + sigma_v_sq * np.eye(channel.cfg.N_R)
    return 0.5 * (R + R.conj().T)


def lmmse_combiner(channel: ChannelRealization, F: np.ndarray,
                   model: MeasurementModel, sigma_n_sq: float,
                   sigma_v_sq: float) -> np.ndarray:
    """W = R_yy^{-1} G F M, computed as a linear solve (R_yy is PD)."""
    R_yy = received_covariance(channel, F, model, sigma_n_sq, sigma_v_sq)
    return np.linalg.solve(R_yy, channel.G @ F @ model.M)


def _sqrtm_psd(R: np.ndarray) -> np.ndarray:
    """Hermitian square root with negative eigenvalues clamped to zero."""
    w, V = np.linalg.eigh(0.5 * (R + R.conj().T))
    return (V * np.sqrt(np.maximum(w, 0.0))) @ V.conj().T


def hybrid_combiner(W: np.ndarray, R_yy: np.ndarray, A_R: np.ndarray,
                    n_rf: int) -> tuple[np.ndarray, np.ndarray]:
    """Weighted-SOMP hybrid combiner.

    Atoms are selected by pursuit on the R_yy^{1/2}-weighted target and
    dictionary; the baseband stage is the exact weighted least-squares
    minimizer for the chosen RF columns.
    """
    R_half = _sqrtm_psd(R_yy)
    res = somp_decompose(R_half @ W, R_half @ A_R, n_rf)
    W_RF = A_R[:, list(res.selected_indices)]
    gram = W_RF.conj().T @ R_yy @ W_RF
    W_BB = np.linalg.solve(gram, W_RF.conj().T @ R_yy @ W)
    return W_RF, W_BB


def design_combiners(channel: ChannelRealization, F: np.ndarray,
                     model: MeasurementModel, sigma_n_sq: float,
                     sigma_v_sq: float) -> CombinerSet:
    """Digital LMMSE combiner plus its hybrid factorization for a given F."""
    R_yy = received_covariance(channel, F, model, sigma_n_sq, sigma_v_sq)
    W = np.linalg.solve(R_yy, channel.G @ F @ model.M)
    W_RF, W_BB = hybrid_combiner(W, R_yy, channel.A_R, channel.cfg.N_RF_fc)
    return CombinerSet(W=W, W_RF=W_RF, W_BB=W_BB, R_yy=R_yy)


def estimate(W: np.ndarray | tuple[np.ndarray, np.ndarray],
             y: np.ndarray) -> np.ndarray:
    """theta_hat = W^H y; pass (W_RF, W_BB) for the hybrid receive chain."""
    if isinstance(W, tuple):
        W_RF, W_BB = W
        return W_BB.conj().T @ (W_RF.conj().T @ y)
    return W.conj().T @ y
