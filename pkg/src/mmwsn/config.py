"""Scenario configuration and SNR/power unit conventions."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, replace

from .errors import ConfigError


@dataclass(frozen=True)
class TotalBudget:
    """Single transmit power budget P_T (watts) shared by all sensors."""

    P_T: float


@dataclass(frozen=True)
class PerSensor:
    """Individual transmit power caps P_k (watts), one per sensor."""

    P_k: tuple[float, ...]


def snr_to_variance(snr_db: float) -> float:
    """Noise variance (linear) for a given SNR in dB, i.e. 10^(-snr_db/10)."""
    return 10.0 ** (-snr_db / 10.0)


def dbw_to_watts(p_dbw: float) -> float:
    return 10.0 ** (p_dbw / 10.0)


@dataclass(frozen=True)
class WsnConfig:
    """All scenario dimensions, noise levels, power budgets and the RNG seed.

    Angles and array geometry follow half-wavelength ULA conventions unless
    ``spacing_ratio`` says otherwise. ``independent_aoa`` exists only for
    sensitivity studies; by default all sensors share the same arrival angles.
    """

    K: int
    N_T: int
    N_R: int
    N_RF_s: int
    N_RF_fc: int
    L: int
    m: int
    q_k: tuple[int, ...]
    sigma_n_sq: float
    sigma_v_sq: float
    power_mode: TotalBudget | PerSensor
    observation_mode: str = "noisy"  # "noisy" | "noiseless"
    spacing_ratio: float = 0.5
    independent_aoa: bool = False
    seed: int = 0

    def __post_init__(self):
        counts = {
            "K": self.K, "N_T": self.N_T, "N_R": self.N_R,
            "N_RF_s": self.N_RF_s, "N_RF_fc": self.N_RF_fc,
            "L": self.L, "m": self.m,
        }
        for name, val in counts.items():
            if not isinstance(val, int) or val < 1:
                raise ConfigError(f"{name} must be an integer >= 1, got {val!r}")
        object.__setattr__(self, "q_k", tuple(int(q) for q in self.q_k))
        if len(self.q_k) != self.K:
            raise ConfigError(f"q_k must have length K={self.K}, got {len(self.q_k)}")
        if any(q < 1 for q in self.q_k):
            raise ConfigError("all q_k must be >= 1")
        if self.N_RF_s > min(self.N_T, self.L):
            raise ConfigError("N_RF_s must not exceed min(N_T, L)")
        if self.N_RF_fc > min(self.N_R, self.L):
            raise ConfigError("N_RF_fc must not exceed min(N_R, L)")
        if self.m > sum(self.q_k):
            raise ConfigError("m must not exceed the total measurement count")
        if self.m > self.L:
            raise ConfigError("m must not exceed L (channel rank limits streams)")
        if not self.sigma_n_sq > 0 or not self.sigma_v_sq > 0:
            raise ConfigError("noise variances must be strictly positive")
        if self.observation_mode not in ("noisy", "noiseless"):
            raise ConfigError(f"unknown observation_mode {self.observation_mode!r}")
        if isinstance(self.power_mode, TotalBudget):
            if not self.power_mode.P_T > 0:
                raise ConfigError("P_T must be strictly positive")
        elif isinstance(self.power_mode, PerSensor):
            object.__setattr__(
                self, "power_mode",
                PerSensor(tuple(float(p) for p in self.power_mode.P_k)))
            if len(self.power_mode.P_k) != self.K:
                raise ConfigError("P_k must have one entry per sensor")
            if any(not p > 0 for p in self.power_mode.P_k):
                raise ConfigError("all P_k must be strictly positive")
        else:
            raise ConfigError("power_mode must be TotalBudget or PerSensor")
        if not self.spacing_ratio > 0:
            raise ConfigError("spacing_ratio must be strictly positive")

    @property
    def q(self) -> int:
        return sum(self.q_k)

    @property
    def noiseless(self) -> bool:
        return self.observation_mode == "noiseless"

    def effective_sigma_n_sq(self) -> float:
        """Observation-noise variance seen by the design math (0 if noiseless)."""
        return 0.0 if self.noiseless else self.sigma_n_sq

    def to_dict(self) -> dict:
        if isinstance(self.power_mode, TotalBudget):
            power_mode = {"type": "total_budget", "P_T": self.power_mode.P_T}
        else:
            power_mode = {"type": "per_sensor", "P_k": list(self.power_mode.P_k)}
        return {
            "K": self.K, "N_T": self.N_T, "N_R": self.N_R,
            "N_RF_s": self.N_RF_s, "N_RF_fc": self.N_RF_fc,
            "L": self.L, "m": self.m, "q_k": list(self.q_k),
            "sigma_n_sq": self.sigma_n_sq, "sigma_v_sq": self.sigma_v_sq,
            "power_mode": power_mode,
            "observation_mode": self.observation_mode,
            "spacing_ratio": self.spacing_ratio,
            "independent_aoa": self.independent_aoa,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "WsnConfig":
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
        known = {
            "K", "N_T", "N_R", "N_RF_s", "N_RF_fc", "L", "m", "q_k",
            "sigma_n_sq", "sigma_v_sq", "power_mode", "observation_mode",
            "spacing_ratio", "independent_aoa", "seed",
        }
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        missing = {
            "K", "N_T", "N_R", "N_RF_s", "N_RF_fc", "L", "m", "q_k",
            "sigma_n_sq", "sigma_v_sq", "power_mode",
        } - set(raw)
        if missing:
            raise ConfigError(f"missing config keys: {sorted(missing)}")
        raw = dict(raw)
        pm = raw.pop("power_mode")
        if not isinstance(pm, dict) or "type" not in pm:
            raise ConfigError("power_mode must be an object with a 'type' key")
        if pm["type"] == "total_budget":
            power_mode = TotalBudget(float(pm["P_T"]))
        elif pm["type"] == "per_sensor":
            power_mode = PerSensor(tuple(float(p) for p in pm["P_k"]))
        else:
            raise ConfigError(f"unknown power_mode type {pm['type']!r}")
        try:
            return cls(power_mode=power_mode, q_k=tuple(raw.pop("q_k")), **raw)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    def digest(self) -> str:
        """Stable hash of the configuration, used to tag channel records."""
        canon = json.dumps(self.to_dict(), sort_keys=True)
        return hashlib.sha256(canon.encode()).hexdigest()

    def patched(self, **kwargs) -> "WsnConfig":
        return replace(self, **kwargs)
