"""Simultaneous orthogonal matching pursuit and hybrid precoder factorization.

The pursuit is generic MMV sparse recovery: greedily pick dictionary atoms by
summed projection energy, refit all coefficients against the original target
by least squares each round. The factorization wrappers turn each sensor's
fully-digital precoder into an RF stage (steering-vector atoms, constant
modulus by construction) and a baseband stage, then rescale the baseband to
make the transmit power constraint exactly tight.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .channel import ChannelRealization
from .config import PerSensor, WsnConfig
from .errors import RankCollapse
from .measurement import MeasurementModel
from .precoding import PrecoderSet, transmit_power

_GRAM_COND_LIMIT = 1e12


@dataclass(frozen=True)
class SompResult:
    selected_indices: tuple[int, ...]
    coefficients: np.ndarray        # count x target-columns, fit to the target
    residual_norms: tuple[float, ...]   # unnormalized ||T - A_sel X||_F history
    approximation: np.ndarray

    @property
    def count(self) -> int:
        return len(self.selected_indices)


def somp_decompose(target: np.ndarray, dictionary: np.ndarray,
                   count: int) -> SompResult:
    """Select `count` atoms greedily and least-squares fit the target.

    The residual fed to the next selection round is normalized to unit
    Frobenius norm; this does not change which atom wins the argmax (positive
    scaling) but mirrors how the selection metric is usually stated. The
    recorded residual history is the unnormalized one.
    """
    target = np.atleast_2d(np.asarray(target))
    A = np.asarray(dictionary)
    if count > A.shape[1]:
        raise ValueError("count exceeds the number of dictionary atoms")

    selected: list[int] = []
    residual = target
    coeffs = np.zeros((0, target.shape[1]), dtype=complex)
    norms: list[float] = []
    for _ in range(count):
        psi = A.conj().T @ residual
        scores = np.sum(np.abs(psi) ** 2, axis=1)
        scores[selected] = -np.inf  # residual is orthogonal to chosen atoms anyway
        selected.append(int(np.argmax(scores)))
        A_sel = A[:, selected]
        gram = A_sel.conj().T @ A_sel
        if np.linalg.cond(gram) > _GRAM_COND_LIMIT:
            partial = _finish(target, A, selected[:-1], coeffs, norms)
            raise RankCollapse(
                f"selected atoms numerically dependent after {len(selected)} picks",
                partial=partial)
        coeffs, *_ = np.linalg.lstsq(A_sel, target, rcond=None)
        approx = A_sel @ coeffs
        diff = target - approx
        diff_norm = np.linalg.norm(diff)
        norms.append(float(diff_norm))
        if diff_norm > 1e-300:
            residual = diff / diff_norm
        else:
            residual = diff  # exact fit; keep the zero residual as-is
    return _finish(target, A, selected, coeffs, norms)


def _finish(target, A, selected, coeffs, norms) -> SompResult:
    approx = A[:, selected] @ coeffs if selected else np.zeros_like(target)
    return SompResult(selected_indices=tuple(selected),
                      coefficients=np.asarray(coeffs),
                      residual_norms=tuple(norms),
                      approximation=approx)


@dataclass(frozen=True)
class HybridPrecoderSet:
    F_RF_k: tuple[np.ndarray, ...]   # N_T x N_RF_s, columns copied from A_T_k
    F_BB_k: tuple[np.ndarray, ...]   # N_RF_s x q_k
    F_RF: np.ndarray
    F_BB: np.ndarray

    @property
    def F(self) -> np.ndarray:
        return self.F_RF @ self.F_BB

    @property
    def F_k(self) -> tuple[np.ndarray, ...]:
        return tuple(rf @ bb for rf, bb in zip(self.F_RF_k, self.F_BB_k))


def factor_precoders(digital: PrecoderSet, channel: ChannelRealization,
                     cfg: WsnConfig, model: MeasurementModel) -> HybridPrecoderSet:
    """Factor each F_k over its steering-vector dictionary, then renormalize.

    Total-budget mode rescales the stacked baseband once so the global power
    is exactly P_T; per-sensor mode rescales each sensor's baseband to its
    digital target's realized power, which the target keeps within the cap.
    Noiseless configurations drop the observation-noise term from the power.
    """
    sigma_n_sq = cfg.effective_sigma_n_sq()
    F_RF_k, F_BB_k = [], []
    for k, Fk in enumerate(digital.F_k):
        if not np.any(Fk):
            # Zero precoder: atom choice is immaterial, emit zero baseband.
            F_RF_k.append(channel.A_T_k[k][:, :cfg.N_RF_s])
            F_BB_k.append(np.zeros((cfg.N_RF_s, Fk.shape[1]), dtype=complex))
            continue
        res = somp_decompose(Fk, channel.A_T_k[k], cfg.N_RF_s)
        F_RF_k.append(channel.A_T_k[k][:, list(res.selected_indices)])
        F_BB_k.append(res.coefficients)

    if isinstance(cfg.power_mode, PerSensor):
        for k in range(cfg.K):
            power = transmit_power(F_RF_k[k] @ F_BB_k[k], model, sigma_n_sq, sensor=k)
            target = transmit_power(digital.F_k[k], model, sigma_n_sq, sensor=k)
            if power > 0:
                F_BB_k[k] = F_BB_k[k] * np.sqrt(target / power)
    else:
        F_hat = scipy.linalg.block_diag(*[rf @ bb for rf, bb in zip(F_RF_k, F_BB_k)])
        power = transmit_power(F_hat, model, sigma_n_sq)
        if power > 0:
            scale = np.sqrt(cfg.power_mode.P_T / power)
            F_BB_k = [bb * scale for bb in F_BB_k]

    return HybridPrecoderSet(
        F_RF_k=tuple(F_RF_k), F_BB_k=tuple(F_BB_k),
        F_RF=scipy.linalg.block_diag(*F_RF_k),
        F_BB=scipy.linalg.block_diag(*F_BB_k))
