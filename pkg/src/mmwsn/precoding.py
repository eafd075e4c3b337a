"""Fully-digital precoder design: stream power allocation and assembly.

Four regimes are covered: {noisy, noiseless} observations x {total budget,
per-sensor} power constraints. The total-budget problems have closed-form
KKT (water-filling) solutions; the per-sensor problems are solved by
sequential quadratic programming over the constraint polytope.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.optimize

from .channel import ChannelDecomposition, RANK_RTOL
from .errors import AllStreamsInactive, NonConvergence
from .measurement import MeasurementModel

NOISY = "noisy"
NOISELESS = "noiseless"

_BUDGET_RTOL = 1e-9


@dataclass(frozen=True)
class PowerAllocation:
    """Per-stream powers plus the constraint data that produced them."""

    p: np.ndarray
    mode: str                 # e.g. "total_noisy", "per_sensor_noiseless"
    multiplier: float | None = None  # mu / gamma for the total-budget modes
    budget_total: float | None = None
    budget_per_sensor: tuple[float, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "p", np.asarray(self.p, dtype=float))


@dataclass(frozen=True)
class SensorCoupling:
    """Phi_k = (V_g1_k)^H V_g1_k: how each sensor loads the shared streams."""

    Phi_k: tuple[np.ndarray, ...]

    @property
    def diag(self) -> np.ndarray:
        """K x m real matrix of diagonals Phi_k(l,l)."""
        return np.array([np.diag(P).real for P in self.Phi_k])


def sensor_coupling(dec: ChannelDecomposition) -> SensorCoupling:
    return SensorCoupling(tuple(V.conj().T @ V for V in dec.V_g1_k))


@dataclass(frozen=True)
class PrecoderSet:
    """Fully-digital precoders per sensor plus their block-diagonal stack."""

    F_k: tuple[np.ndarray, ...]
    F: np.ndarray
    Sigma: np.ndarray          # diag(sqrt(p))
    allocation: PowerAllocation
    structure_exact: bool      # False when some q_k < m breaks F U_M = V_g1 Sigma
    sensor_rescale: tuple[float, ...] = ()  # per-sensor power normalization


def waterfill_total_noisy(lambda_M: np.ndarray, sigma_G_sq: np.ndarray,
                          sigma_n_sq: float, sigma_v_sq: float,
                          P_T: float) -> PowerAllocation:
    """Closed-form KKT power allocation, total budget, noisy observations.

    Streams with zero channel gain or zero measurement gain carry nothing and
    are excluded up front. The textbook closed form ignores the nonnegativity
    clipping, so the water level is recomputed on the active set until it is
    stable; this makes the budget exactly tight.
    """
    lam = np.asarray(lambda_M, dtype=float)
    sig = np.asarray(sigma_G_sq, dtype=float)
    m = lam.size
    p = np.zeros(m)
    active = (sig > 0) & (lam > 0)
    mu = None
    while True:
        if not active.any():
            raise AllStreamsInactive(
                "every stream clipped to zero power under the total budget")
        la, sa = lam[active], sig[active]
        mu = (P_T + np.sum(sigma_v_sq / sa)) / np.sum(
            np.sqrt(sigma_v_sq * la / ((sigma_n_sq + la) * sa)))
        p_act = (mu * np.sqrt(sigma_v_sq * la * sa / (sigma_n_sq + la))
                 - sigma_v_sq) / ((sigma_n_sq + la) * sa)
        if (p_act > 0).all():
            p[:] = 0.0
            p[active] = p_act
            break
        keep = np.zeros(m, dtype=bool)
        keep[active] = p_act > 0
        active = keep
    return PowerAllocation(p=p, mode="total_noisy", multiplier=float(mu),
                           budget_total=float(P_T))


def waterfill_total_noiseless(sigma_G_sq: np.ndarray, sigma_v_sq: float,
                              P_T: float) -> PowerAllocation:
    """Closed-form KKT power allocation, total budget, noiseless observations."""
    sig = np.asarray(sigma_G_sq, dtype=float)
    m = sig.size
    p = np.zeros(m)
    active = sig > 0
    gamma = None
    while True:
        if not active.any():
            raise AllStreamsInactive(
                "every stream clipped to zero power under the total budget")
        sa = sig[active]
        gamma = (P_T + np.sum(sigma_v_sq / sa)) / np.sum(np.sqrt(sigma_v_sq / sa))
        p_act = gamma * np.sqrt(sigma_v_sq / sa) - sigma_v_sq / sa
        if (p_act > 0).all():
            p[:] = 0.0
            p[active] = p_act
            break
        keep = np.zeros(m, dtype=bool)
        keep[active] = p_act > 0
        active = keep
    return PowerAllocation(p=p, mode="total_noiseless", multiplier=float(gamma),
                           budget_total=float(P_T))


def _constrained_minimize(objective, grad, A, b, p0):
    """Minimize a smooth convex objective over {p >= 0, A p <= b}.

    Sequential quadratic programming handles the (few streams) x (many
    sensor caps) polytope directly; the best of a few starts is kept to
    guard against a poor initial active set.
    """
    m = A.shape[1]
    # Normalize each variable by the largest value the caps allow it alone;
    # without this the gradient/variable scale mismatch (powers ~1e-3,
    # gradients ~1e4 at mmWave gains) makes the SQP stop at spurious points.
    cap = np.empty(m)
    for j in range(m):
        col = A[:, j]
        cap[j] = np.min(b[col > 0] / col[col > 0]) if (col > 0).any() else np.inf
    finite = np.isfinite(cap)
    cap[~finite] = 1e6 * (np.max(cap[finite]) if finite.any() else 1.0)
    A_u = A * cap[None, :]
    constraints = [{"type": "ineq",
                    "fun": lambda u: b - A_u @ u,
                    "jac": lambda u: -A_u}]
    best = None
    for start in (np.clip(p0 / cap, 0.0, 1.0), np.full(m, 0.5)):
        res = scipy.optimize.minimize(
            lambda u: objective(cap * u), start,
            jac=lambda u: grad(cap * u) * cap, method="SLSQP",
            bounds=[(0.0, None)] * m, constraints=constraints,
            options={"maxiter": 500, "ftol": 1e-14})
        if res.success and (best is None or res.fun < best.fun):
            best = res
    if best is None:
        raise NonConvergence(
            f"constrained allocation solver failed: {res.message}",
            residual=float("nan"))
    p = np.maximum(best.x, 0.0) * cap
    # Clip roundoff-level constraint violations left by the SQP iterate.
    load = A @ p
    over = load > b
    if over.any():
        p = p * float(np.min(b[over] / load[over]))
    return p


def _tighten(p: np.ndarray, A: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Scale p up until the most binding constraint is exactly tight.

    The MSE objective is non-increasing in every p_l, so the optimum sits on
    the boundary; scaling removes the residual slack left by the iterative
    solver without leaving the feasible set.
    """
    load = A @ p
    mask = load > 0
    if not mask.any():
        return p
    return p * float(np.min(b[mask] / load[mask]))


def solve_per_sensor_noisy(lambda_M: np.ndarray, sigma_G_sq: np.ndarray,
                           Phi_diag: np.ndarray, sigma_n_sq: float,
                           sigma_v_sq: float, P: np.ndarray) -> PowerAllocation:
    """Per-sensor-constrained power allocation, noisy observations."""
    lam = np.asarray(lambda_M, dtype=float)
    sig = np.asarray(sigma_G_sq, dtype=float)
    Phi = np.asarray(Phi_diag, dtype=float)
    P = np.asarray(P, dtype=float)
    A = (lam + sigma_n_sq)[None, :] * Phi

    def objective(p):
        num = sigma_v_sq + sigma_n_sq * p * sig
        den = sigma_v_sq + (sigma_n_sq + lam) * p * sig
        return float(np.sum(num / den))

    def grad(p):
        den = sigma_v_sq + (sigma_n_sq + lam) * p * sig
        return -sigma_v_sq * lam * sig / den ** 2

    p0 = _feasible_start(A, P)
    p = _constrained_minimize(objective, grad, A, P, p0)
    p = _tighten(p, A, P)
    return PowerAllocation(p=p, mode="per_sensor_noisy",
                           budget_per_sensor=tuple(float(x) for x in P))


def solve_per_sensor_noiseless(sigma_G_sq: np.ndarray, Phi_diag: np.ndarray,
                               sigma_v_sq: float, P: np.ndarray) -> PowerAllocation:
    """Per-sensor-constrained power allocation, noiseless observations."""
    sig = np.asarray(sigma_G_sq, dtype=float)
    Phi = np.asarray(Phi_diag, dtype=float)
    P = np.asarray(P, dtype=float)
    A = Phi.copy()

    def objective(p):
        return float(np.sum(sigma_v_sq / (sigma_v_sq + p * sig)))

    def grad(p):
        return -sigma_v_sq * sig / (sigma_v_sq + p * sig) ** 2

    p0 = _feasible_start(A, P)
    p = _constrained_minimize(objective, grad, A, P, p0)
    p = _tighten(p, A, P)
    return PowerAllocation(p=p, mode="per_sensor_noiseless",
                           budget_per_sensor=tuple(float(x) for x in P))


def _feasible_start(A: np.ndarray, P: np.ndarray) -> np.ndarray:
    m = A.shape[1]
    loads = A @ np.ones(m)
    mask = loads > 0
    scale = np.min(P[mask] / loads[mask]) if mask.any() else 1.0
    return np.full(m, scale)


def _pinv(X: np.ndarray) -> np.ndarray:
    return np.linalg.pinv(X, rcond=RANK_RTOL)


def assemble_digital_precoders(alloc: PowerAllocation, dec: ChannelDecomposition,
                               model: MeasurementModel, mode: str) -> PrecoderSet:
    """Extract the per-sensor precoders from the stream allocation.

    Noisy modes use F_k = V_g1_k diag(sqrt(p)) pinv(U_M_k); noiseless modes
    replace U_M_k by the raw measurement matrix M_k. When some q_k < m the
    pseudo-inverse is no longer a right identity and the stacked structural
    identity cannot hold; the set is still emitted but flagged.

    In the noisy mode the per-sensor extraction adds energy outside the
    row-space of U_M (the per-sensor blocks of U_M are not orthonormal), so
    each sensor's realized transmit power exceeds its intended stream-level
    share by a sensor-dependent inflation factor. A single shared rescale
    cannot repair this without letting badly-conditioned sensors consume
    the budget of well-conditioned ones, so each sensor is normalized
    individually to its intended stream-level share
    pi_k = sum_l p_l (lambda_l + sigma_n^2) Phi_k(l,l). The shares sum to
    the stream budget, so a tight total budget stays exactly tight, and
    per-sensor caps stay satisfied (the allocation already bounds every
    share by its cap). The factors are recorded in sensor_rescale;
    F_k U_M_k = s_k V_g1_k Sigma holds blockwise. Noiseless extraction is
    lossless and needs no rescale.
    """
    Sigma = np.diag(np.sqrt(alloc.p))
    m = model.m
    F_k = []
    for k, V1k in enumerate(dec.V_g1_k):
        right = dec.U_M_k[k] if mode == NOISY else model.M_k[k]
        F_k.append(V1k @ Sigma @ _pinv(right))
    sigma_n_sq = model.sigma_n_sq if mode == NOISY else 0.0

    scales = tuple(1.0 for _ in F_k)
    if mode == NOISY:
        Phi = np.array([np.sum(np.abs(V1k) ** 2, axis=0)
                        for V1k in dec.V_g1_k])
        targets = Phi @ (alloc.p * (dec.Lambda_Mtilde + sigma_n_sq))
        scales = tuple(_cap_scale(Fk, model, sigma_n_sq, k, t)
                       for k, (Fk, t) in enumerate(zip(F_k, targets)))
        F_k = [Fk * s for Fk, s in zip(F_k, scales)]

    F = scipy.linalg.block_diag(*F_k)
    structure_exact = all(qk >= m for qk in model.q_k)
    return PrecoderSet(F_k=tuple(F_k), F=F, Sigma=Sigma, allocation=alloc,
                       structure_exact=structure_exact, sensor_rescale=scales)


def _cap_scale(Fk: np.ndarray, model: MeasurementModel, sigma_n_sq: float,
               sensor: int, P_k: float) -> float:
    realized = transmit_power(Fk, model, sigma_n_sq, sensor=sensor)
    return float(np.sqrt(P_k / realized)) if realized > 0 else 1.0


def transmit_power(F: np.ndarray, model: MeasurementModel, sigma_n_sq: float,
                   sensor: int | None = None) -> float:
    """Tr(F (M M^H + sigma_n_sq I) F^H), total or for one sensor."""
    M = model.M if sensor is None else model.M_k[sensor]
    FM = F @ M
    power = np.sum(np.abs(FM) ** 2) + sigma_n_sq * np.sum(np.abs(F) ** 2)
    return float(power)
