"""Seeded Monte-Carlo sweeps over the design space, with CSV/JSON emission."""

from __future__ import annotations

import io
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import combining, metrics, precoding, somp
from .channel import generate_channel
from .config import PerSensor, TotalBudget, WsnConfig, snr_to_variance
from .errors import ConfigError, MmwsnError
from .measurement import build_measurement_model, sample_parameter, sense

AXES = ("snr_fc_db", "sensor_count", "rf_chains_s", "snr_n_db")
DESIGNS = ("digital_total", "digital_per_sensor", "hybrid_total",
           "hybrid_per_sensor", "dominant_directional")
BOUNDS = ("bcrb", "centralized")

CSV_HEADER = "axis,axis_value,design,mean_mse,std_error,trials,seed_base"


@dataclass(frozen=True)
class SweepSpec:
    axis: str
    values: tuple
    trials: int = 200
    designs: tuple[str, ...] = ("digital_total", "hybrid_total")
    bounds: tuple[str, ...] = ()
    seed_base: int = 0
    empirical: bool = False
    empirical_draws: int = 500

    def __post_init__(self):
        if self.axis not in AXES:
            raise ConfigError(f"unknown sweep axis {self.axis!r}")
        if not self.values:
            raise ConfigError("sweep values must be nonempty")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        for d in self.designs:
            if d not in DESIGNS:
                raise ConfigError(f"unknown design {d!r}")
        for b in self.bounds:
            if b not in BOUNDS:
                raise ConfigError(f"unknown bound {b!r}")


@dataclass(frozen=True)
class ResultRow:
    axis: str
    axis_value: float
    design: str
    mean_mse: float
    std_error: float
    trials: int
    seed_base: int


def _total_budget(cfg: WsnConfig) -> float:
    if isinstance(cfg.power_mode, TotalBudget):
        return cfg.power_mode.P_T
    return float(sum(cfg.power_mode.P_k))


def _per_sensor_budget(cfg: WsnConfig) -> np.ndarray:
    if isinstance(cfg.power_mode, PerSensor):
        return np.asarray(cfg.power_mode.P_k)
    # Companion budget when only a total is configured: an even split.
    return np.full(cfg.K, cfg.power_mode.P_T / cfg.K)


def _digital_design(cfg, dec, model, total: bool):
    sigma_n = cfg.effective_sigma_n_sq()
    lam = dec.Lambda_Mtilde
    sig = dec.Lambda_g[: model.m]
    if total:
        P_T = _total_budget(cfg)
        if cfg.noiseless:
            alloc = precoding.waterfill_total_noiseless(sig, cfg.sigma_v_sq, P_T)
        else:
            alloc = precoding.waterfill_total_noisy(lam, sig, sigma_n,
                                                    cfg.sigma_v_sq, P_T)
    else:
        P = _per_sensor_budget(cfg)
        Phi = precoding.sensor_coupling(dec).diag
        if cfg.noiseless:
            alloc = precoding.solve_per_sensor_noiseless(sig, Phi, cfg.sigma_v_sq, P)
        else:
            alloc = precoding.solve_per_sensor_noisy(lam, sig, Phi, sigma_n,
                                                     cfg.sigma_v_sq, P)
    mode = precoding.NOISELESS if cfg.noiseless else precoding.NOISY
    return precoding.assemble_digital_precoders(alloc, dec, model, mode)


def _with_power_mode(cfg: WsnConfig, total: bool) -> WsnConfig:
    if total:
        return cfg.patched(power_mode=TotalBudget(_total_budget(cfg)))
    return cfg.patched(power_mode=PerSensor(tuple(_per_sensor_budget(cfg))))


def run_trial(cfg: WsnConfig, trial_seed, designs=DESIGNS, bounds=(),
              empirical: bool = False, empirical_draws: int = 500) -> dict:
    """One channel + measurement realization; analytic MSE per requested design.

    A design that fails numerically leaves a NaN cell instead of aborting.
    """
    seq = trial_seed if isinstance(trial_seed, np.random.SeedSequence) \
        else np.random.SeedSequence(trial_seed)
    rng = np.random.default_rng(seq)
    model = build_measurement_model(cfg, rng)
    channel = generate_channel(cfg, rng)
    dec = channel.decomposition(model)
    sigma_n = cfg.effective_sigma_n_sq()

    record: dict[str, float] = {}
    transceivers: dict[str, tuple[np.ndarray, np.ndarray]] = {}
    digital_cache: dict[bool, precoding.PrecoderSet] = {}

    def digital(total: bool) -> precoding.PrecoderSet:
        if total not in digital_cache:
            digital_cache[total] = _digital_design(
                _with_power_mode(cfg, total), dec, model, total)
        return digital_cache[total]

    for name in designs:
        try:
            if name in ("digital_total", "digital_per_sensor"):
                dig = digital(name == "digital_total")
                E = metrics.error_covariance(channel, dig.F, model, sigma_n,
                                             cfg.sigma_v_sq)
                record[name] = float(np.trace(E).real)
                W = combining.lmmse_combiner(channel, dig.F, model, sigma_n,
                                             cfg.sigma_v_sq)
                transceivers[name] = (dig.F, W)
            elif name in ("hybrid_total", "hybrid_per_sensor"):
                total = name == "hybrid_total"
                sub_cfg = _with_power_mode(cfg, total)
                hyb = somp.factor_precoders(digital(total), channel, sub_cfg, model)
                comb = combining.design_combiners(channel, hyb.F, model, sigma_n,
                                                  cfg.sigma_v_sq)
                record[name] = metrics.mse_of_linear_transceiver(
                    hyb.F, comb.W_hybrid, channel, model, sigma_n, cfg.sigma_v_sq)
                transceivers[name] = (hyb.F, comb.W_hybrid)
            elif name == "dominant_directional":
                pre, comb = metrics.dominant_directional_design(channel, cfg, model)
                record[name] = metrics.mse_of_linear_transceiver(
                    pre.F, comb.W_hybrid, channel, model, sigma_n, cfg.sigma_v_sq)
                transceivers[name] = (pre.F, comb.W_hybrid)
        except MmwsnError:
            record[name] = float("nan")

    if "centralized" in bounds and not cfg.noiseless:
        record["centralized"] = metrics.centralized_bound(model)
    if "bcrb" in bounds and cfg.noiseless:
        # Evaluate at the tightest available precoder (hybrid if built).
        pair = transceivers.get("hybrid_total") or transceivers.get("digital_total")
        if pair is None and transceivers:
            pair = next(iter(transceivers.values()))
        if pair is not None:
            record["bcrb"] = metrics.bcrb(channel, pair[0], model, cfg.sigma_v_sq)

    if empirical:
        emp_rng = np.random.default_rng(seq.spawn(1)[0])
        for name, (F, W) in transceivers.items():
            errs = np.empty(empirical_draws)
            for i in range(empirical_draws):
                theta = sample_parameter(model, emp_rng)
                x = np.concatenate(sense(model, theta, emp_rng))
                v = np.sqrt(cfg.sigma_v_sq / 2) * (
                    emp_rng.standard_normal(cfg.N_R)
                    + 1j * emp_rng.standard_normal(cfg.N_R))
                y = channel.G @ F @ x + v
                errs[i] = np.sum(np.abs(combining.estimate(W, y) - theta) ** 2)
            record[name + "_empirical"] = float(np.mean(errs))
    return record


def _patch_axis(cfg: WsnConfig, axis: str, value) -> WsnConfig:
    if axis == "snr_fc_db":
        return cfg.patched(sigma_v_sq=snr_to_variance(float(value)))
    if axis == "snr_n_db":
        return cfg.patched(sigma_n_sq=snr_to_variance(float(value)))
    if axis == "rf_chains_s":
        return cfg.patched(N_RF_s=int(value))
    if axis == "sensor_count":
        K = int(value)
        kwargs = {"K": K, "q_k": (cfg.q_k[0],) * K}
        if isinstance(cfg.power_mode, PerSensor):
            kwargs["power_mode"] = PerSensor((cfg.power_mode.P_k[0],) * K)
        return cfg.patched(**kwargs)
    raise ConfigError(f"unknown sweep axis {axis!r}")


def run_sweep(cfg: WsnConfig, spec: SweepSpec) -> list[ResultRow]:
    """Seeded trials per axis value, aggregated order-independently."""
    names: list[str] = list(spec.designs)
    if spec.empirical:
        names += [d + "_empirical" for d in spec.designs]
    names += list(spec.bounds)

    workers = max(1, int(os.environ.get("WSN_THREADS", "1")))
    rows: list[ResultRow] = []
    for value in spec.values:
        cfg_v = _patch_axis(cfg, spec.axis, value)
        buffer = np.full((spec.trials, len(names)), np.nan)

        def one(i: int):
            seed = np.random.SeedSequence(entropy=spec.seed_base, spawn_key=(i,))
            rec = run_trial(cfg_v, seed, designs=spec.designs, bounds=spec.bounds,
                            empirical=spec.empirical,
                            empirical_draws=spec.empirical_draws)
            return i, rec

        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                results = list(pool.map(one, range(spec.trials)))
        else:
            results = [one(i) for i in range(spec.trials)]
        for i, rec in results:
            for j, name in enumerate(names):
                if name in rec:
                    buffer[i, j] = rec[name]

        for j, name in enumerate(names):
            col = buffer[:, j]
            ok = ~np.isnan(col)
            n = int(ok.sum())
            if n == 0:
                continue
            mean = float(np.sum(col[ok]) / n)   # pairwise summation inside np.sum
            if n > 1:
                se = float(np.sqrt(np.sum((col[ok] - mean) ** 2) / (n - 1) / n))
            else:
                se = 0.0
            rows.append(ResultRow(axis=spec.axis, axis_value=float(value),
                                  design=name, mean_mse=mean, std_error=se,
                                  trials=n, seed_base=spec.seed_base))
    return rows


def emit(table: list[ResultRow], fmt: str, destination) -> None:
    """Write the result table as CSV or JSON; byte-stable for identical input."""
    if not table:
        raise ConfigError("refusing to emit an empty result table")
    if fmt not in ("csv", "json"):
        raise ConfigError(f"unknown output format {fmt!r}")
    if fmt == "csv":
        lines = [CSV_HEADER]
        for r in table:
            lines.append(f"{r.axis},{r.axis_value!r},{r.design},{r.mean_mse!r},"
                         f"{r.std_error!r},{r.trials},{r.seed_base}")
        text = "\n".join(lines) + "\n"
    else:
        objs = [{"axis": r.axis, "axis_value": r.axis_value, "design": r.design,
                 "mean_mse": r.mean_mse, "std_error": r.std_error,
                 "trials": r.trials, "seed_base": r.seed_base} for r in table]
        text = json.dumps(objs, indent=2) + "\n"
    if isinstance(destination, (str, os.PathLike)):
        try:
            with open(destination, "w") as fh:
                fh.write(text)
        except OSError as exc:
            raise MmwsnError(f"cannot write results to {destination}: {exc}") from exc
    elif isinstance(destination, io.TextIOBase) or hasattr(destination, "write"):
        destination.write(text)
    else:
        raise ConfigError("destination must be a path or a writable stream")
