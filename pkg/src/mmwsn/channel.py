"""Clustered mmWave MIMO channel synthesis and its spectral decompositions.

Each sensor-to-FC link is a sum of L planar-wave clusters over uniform linear
arrays. Arrival angles are shared by all sensors (one scattering environment
around the FC) while departure angles and path gains are per-sensor.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .config import WsnConfig
from .errors import ConfigError, DegenerateChannel
from .measurement import MeasurementModel, complex_gaussian

# Singular values below RANK_RTOL * s_max count as zero rank.
RANK_RTOL = 1e-12


def array_response(n_antennas: int, angle: float, spacing_ratio: float) -> np.ndarray:
    """ULA steering vector: entry i = exp(-j*i*2*pi*spacing*cos(angle))/sqrt(n)."""
    phase = 2.0 * np.pi * spacing_ratio * np.cos(angle)
    return np.exp(-1j * phase * np.arange(n_antennas)) / np.sqrt(n_antennas)


def _steering_matrix(n_antennas: int, angles: np.ndarray, spacing_ratio: float) -> np.ndarray:
    return np.column_stack([array_response(n_antennas, a, spacing_ratio) for a in angles])


@dataclass(frozen=True)
class ChannelDecomposition:
    """Cached thin SVD/EVD factors of the concatenated channel and of M."""

    V_g: np.ndarray          # K*N_T x r right singular vectors of G
    Lambda_g: np.ndarray     # eigenvalues of G^H G, descending (len r)
    V_g1: np.ndarray         # first m columns of V_g
    V_g1_k: tuple[np.ndarray, ...]   # per-sensor N_T x m row-blocks
    U_M: np.ndarray          # q x m
    Sigma_M: np.ndarray      # singular values of M, descending (len m)
    V_M: np.ndarray          # m x m
    Lambda_Mtilde: np.ndarray        # eigenvalues of M^H M, descending
    U_M_k: tuple[np.ndarray, ...]    # per-sensor q_k x m row-blocks
    rank_G: int


@dataclass
class ChannelRealization:
    """One draw of the clustered channel with per-sensor and stacked forms."""

    cfg: WsnConfig
    alpha: np.ndarray        # L x K complex path gains
    aoa: np.ndarray          # L x K arrival angles (columns identical unless
                             # independent_aoa)
    aod: np.ndarray          # L x K departure angles
    A_R: np.ndarray          # N_R x L
    A_T_k: tuple[np.ndarray, ...]    # N_T x L per sensor
    D_k: tuple[np.ndarray, ...]      # L x L diagonal gain matrices
    G_k: tuple[np.ndarray, ...]      # N_R x N_T per sensor
    G: np.ndarray            # N_R x K*N_T
    _decomposition: ChannelDecomposition | None = field(default=None, repr=False)

    def decomposition(self, model: MeasurementModel) -> ChannelDecomposition:
        """Decomposition cached on first use (single initialization)."""
        if self._decomposition is None:
            self._decomposition = decompose(self, model)
        return self._decomposition


def generate_channel(cfg: WsnConfig, rng: np.random.Generator) -> ChannelRealization:
    """Draw path gains CN(0,1) and angles uniform on [0, pi], then assemble."""
    alpha = complex_gaussian(rng, (cfg.L, cfg.K))
    if cfg.independent_aoa:
        aoa = rng.uniform(0.0, np.pi, size=(cfg.L, cfg.K))
    else:
        shared = rng.uniform(0.0, np.pi, size=cfg.L)
        aoa = np.repeat(shared[:, None], cfg.K, axis=1)
    aod = rng.uniform(0.0, np.pi, size=(cfg.L, cfg.K))
    return assemble_channel(cfg, alpha, aoa, aod)


def assemble_channel(cfg: WsnConfig, alpha: np.ndarray, aoa: np.ndarray,
                     aod: np.ndarray) -> ChannelRealization:
    """Deterministic construction of G from gains and angles."""
    # AoA may vary per sensor only with the independent_aoa flag; the shared
    # case keeps a single A_R built from column 0.
    A_R = _steering_matrix(cfg.N_R, aoa[:, 0], cfg.spacing_ratio)
    scale = np.sqrt(cfg.N_R * cfg.N_T / cfg.L)
    A_T_k, D_k, G_k = [], [], []
    for k in range(cfg.K):
        At = _steering_matrix(cfg.N_T, aod[:, k], cfg.spacing_ratio)
        Dk = scale * np.diag(alpha[:, k])
        Ar = A_R if not cfg.independent_aoa else _steering_matrix(
            cfg.N_R, aoa[:, k], cfg.spacing_ratio)
        A_T_k.append(At)
        D_k.append(Dk)
        G_k.append(Ar @ Dk @ At.conj().T)
    G = np.hstack(G_k)
    return ChannelRealization(cfg=cfg, alpha=alpha, aoa=aoa, aod=aod, A_R=A_R,
                              A_T_k=tuple(A_T_k), D_k=tuple(D_k),
                              G_k=tuple(G_k), G=G)


def decompose(channel: ChannelRealization, model: MeasurementModel) -> ChannelDecomposition:
    """Thin SVDs of G and M plus the per-sensor row-block slices."""
    cfg = channel.cfg
    m = model.m

    _, s_g, Vh_g = np.linalg.svd(channel.G, full_matrices=False)
    rank_G = int(np.sum(s_g > RANK_RTOL * max(s_g[0], 1.0))) if s_g.size else 0
    if rank_G < m:
        raise DegenerateChannel(
            f"rank(G)={rank_G} < m={m}: fewer usable streams than parameters")
    V_g = Vh_g.conj().T
    Lambda_g = s_g ** 2
    V_g1 = V_g[:, :m]
    V_g1_k = tuple(V_g1[k * cfg.N_T:(k + 1) * cfg.N_T, :] for k in range(cfg.K))

    U_M, s_M, Vh_M = np.linalg.svd(model.M, full_matrices=False)
    U_M_k = tuple(model.split_rows(U_M))
    return ChannelDecomposition(
        V_g=V_g, Lambda_g=Lambda_g, V_g1=V_g1, V_g1_k=V_g1_k,
        U_M=U_M, Sigma_M=s_M, V_M=Vh_M.conj().T,
        Lambda_Mtilde=s_M ** 2, U_M_k=U_M_k, rank_G=rank_G)


def channel_to_record(channel: ChannelRealization) -> str:
    """Self-describing JSON record from which G regenerates bit-identically."""
    rec = {
        "cfg_digest": channel.cfg.digest(),
        "cfg": channel.cfg.to_dict(),
        "alpha_re": channel.alpha.real.tolist(),
        "alpha_im": channel.alpha.imag.tolist(),
        "aoa": channel.aoa.tolist(),
        "aod": channel.aod.tolist(),
    }
    return json.dumps(rec)


def channel_from_record(record: str) -> ChannelRealization:
    rec = json.loads(record)
    cfg = WsnConfig.from_dict(rec["cfg"])
    if cfg.digest() != rec["cfg_digest"]:
        raise ConfigError("channel record digest does not match its config")
    alpha = np.asarray(rec["alpha_re"]) + 1j * np.asarray(rec["alpha_im"])
    return assemble_channel(cfg, alpha, np.asarray(rec["aoa"]), np.asarray(rec["aod"]))
