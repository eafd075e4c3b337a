"""Statistical signal model: parameter prior, sensing matrices, noise."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import WsnConfig


def complex_gaussian(rng: np.random.Generator, shape) -> np.ndarray:
    """i.i.d. CN(0,1) entries (unit total variance per entry)."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


@dataclass(frozen=True)
class TransmitSignalStats:
    """Realized transmit powers, per sensor and total (watts)."""

    per_sensor_power: tuple[float, ...]

    @property
    def total_power(self) -> float:
        return float(sum(self.per_sensor_power))


@dataclass(frozen=True)
class MeasurementModel:
    """Per-sensor measurement matrices, their row-stack, and noise/prior stats.

    The parameter prior is hard-coded to the identity covariance; every
    error-covariance formula downstream assumes it.
    """

    M_k: tuple[np.ndarray, ...]   # q_k x m each
    M: np.ndarray                 # q x m row-stack
    R_n: np.ndarray               # q x q, sigma_n_sq * I
    sigma_n_sq: float
    noiseless: bool

    @property
    def m(self) -> int:
        return self.M.shape[1]

    @property
    def q(self) -> int:
        return self.M.shape[0]

    @property
    def q_k(self) -> tuple[int, ...]:
        return tuple(Mk.shape[0] for Mk in self.M_k)

    def split_rows(self, stacked: np.ndarray) -> list[np.ndarray]:
        """Split a q-row array into per-sensor blocks in sensor order."""
        out, start = [], 0
        for qk in self.q_k:
            out.append(stacked[start:start + qk])
            start += qk
        return out


def build_measurement_model(cfg: WsnConfig, rng: np.random.Generator) -> MeasurementModel:
    """Draw the measurement matrices M_k with i.i.d. CN(0,1) entries."""
    M_k = tuple(complex_gaussian(rng, (qk, cfg.m)) for qk in cfg.q_k)
    M = np.vstack(M_k)
    R_n = cfg.sigma_n_sq * np.eye(cfg.q)
    return MeasurementModel(M_k=M_k, M=M, R_n=R_n,
                            sigma_n_sq=cfg.sigma_n_sq, noiseless=cfg.noiseless)


def sample_parameter(model: MeasurementModel, rng: np.random.Generator) -> np.ndarray:
    """One draw of the parameter vector, theta ~ CN(0, I_m)."""
    return complex_gaussian(rng, model.m)


def sense(model: MeasurementModel, theta: np.ndarray,
          rng: np.random.Generator) -> list[np.ndarray]:
    """Per-sensor observations x_k = M_k theta + n_k (n_k = 0 when noiseless)."""
    out = []
    for Mk in model.M_k:
        x = Mk @ theta
        if not model.noiseless and model.sigma_n_sq > 0:
            x = x + np.sqrt(model.sigma_n_sq) * complex_gaussian(rng, Mk.shape[0])
        out.append(x)
    return out
