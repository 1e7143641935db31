"""
Desk-scale replication experiments.

    fig2-left     MvLSW replicates of the builtin c1 spectrum, mean rho at scale 2 with a Wald band
                  against the population curve
    fig2-right    AR(2)-mixture replicates, WaveCanCoh at scale 1 against the LSP baseline on 25-50 Hz
    causal-sweep  AR(2)-mixture surrogates whose Y shared source trails X, lag sweep in both directions

Replicate r always uses ``derive_seed(seed, r)``, so results do not depend on
the worker count.
"""

import logging
import multiprocessing
from dataclasses import replace
from functools import partial
from typing import Any, Callable, Dict, List, Sequence

import numpy as np
import pandas as pd
from tqdm import tqdm

from baseline import lsp_cancoh
from cancoh import CancohConfig, causal_wavecancoh, wavecancoh
from cli.config import ReplicateConfig
from inference import wald_interval
from seeding import derive_seed
from simulate import builtin_spec_appendix_c1, default_ar2_spec, population_curve, simulate_ar2_mixture, simulate_mvlsw
from wavelets import build_system, scale_to_band

logger = logging.getLogger(__name__)

FIG2_LEFT_SCALE = 2
FIG2_RIGHT_SCALE = 1
EARLY, LATE = (0.1, 0.4), (0.6, 0.9)


def fan_out(func: Callable[[int], Any], count: int, workers: int, desc: str, quiet: bool = False) -> List[Any]:
    """Run ``func`` over replicate indices 0..count-1, keeping index order."""
    indices = range(count)
    if workers <= 1:
        return [func(index) for index in tqdm(indices, desc=desc, disable=quiet)]
    with multiprocessing.Pool(workers) as pool:
        return list(tqdm(pool.imap(func, indices), total=count, desc=desc, disable=quiet))


def _interval_mean(values: np.ndarray, u: np.ndarray, interval: Sequence[float]) -> float:
    mask = (u >= interval[0]) & (u <= interval[1])
    return float(np.mean(values[..., mask]))


def fig2_left_replicate(index: int, seed: int, T: int, cancoh: CancohConfig) -> np.ndarray:
    spec = builtin_spec_appendix_c1()
    system = build_system(cancoh.family, spec.num_scales)
    realization = simulate_mvlsw(spec, T, system, derive_seed(seed, index))
    field = wavecancoh(realization.panel.X, realization.panel.Y, replace(cancoh, scales=(FIG2_LEFT_SCALE,)))
    return field.curve(FIG2_LEFT_SCALE)


def run_fig2_left(config: ReplicateConfig, quiet: bool = False) -> Dict[str, Any]:
    T = config.T
    worker = partial(fig2_left_replicate, seed=config.seed, T=T, cancoh=config.cancoh)
    curves = np.stack(fan_out(worker, config.replicates, config.workers, "fig2-left", quiet))

    u = np.arange(T) / T
    truth = population_curve(builtin_spec_appendix_c1(), FIG2_LEFT_SCALE, T)
    mean, lo, hi = wald_interval(curves, config.level)
    early, late = _interval_mean(mean, u, EARLY), _interval_mean(mean, u, LATE)
    truth_early, truth_late = _interval_mean(truth, u, EARLY), _interval_mean(truth, u, LATE)
    summary = {
        "experiment": "fig2-left",
        "scale": FIG2_LEFT_SCALE,
        "replicates": config.replicates,
        "population_low": truth_early,
        "population_high": truth_late,
        "mean_early": early,
        "mean_late": late,
        "max_abs_error_early": float(np.max(np.abs(mean - truth)[(u >= EARLY[0]) & (u <= EARLY[1])])),
        "max_abs_error_late": float(np.max(np.abs(mean - truth)[(u >= LATE[0]) & (u <= LATE[1])])),
        "mean_squared_error": float(np.mean((curves - truth) ** 2)),
        "separation": late - early,
        "half_population_gap": 0.5 * (truth_late - truth_early),
    }
    curve = pd.DataFrame({"k": np.arange(T), "u": u, "mean": mean, "lo": lo, "hi": hi, "truth": truth})
    return {"tables": {"fig2_left_curve": curve}, "summary": summary}


def _half_difference(values: np.ndarray, u: np.ndarray) -> float:
    return float(np.mean(values[..., u < 0.5]) - np.mean(values[..., u >= 0.5]))


def fig2_right_replicate(index: int, config: ReplicateConfig):
    rep_seed = derive_seed(config.seed, index)
    spec = default_ar2_spec(rep_seed, fs=config.stft.fs)
    X, Y = simulate_ar2_mixture(spec, config.T, rep_seed)
    wave = wavecancoh(X, Y, replace(config.cancoh, scales=(FIG2_RIGHT_SCALE,), fs=config.stft.fs))
    lsp = lsp_cancoh(X, Y, config.band, config.stft)
    return wave.curve(FIG2_RIGHT_SCALE), lsp.curve(1), lsp.k


def run_fig2_right(config: ReplicateConfig, quiet: bool = False) -> Dict[str, Any]:
    T, fs = config.T, config.stft.fs
    worker = partial(fig2_right_replicate, config=config)
    results = fan_out(worker, config.replicates, config.workers, "fig2-right", quiet)
    wave = np.stack([result[0] for result in results])
    lsp = np.stack([result[1] for result in results])
    centers = results[0][2]

    u_wave, u_lsp = np.arange(T) / T, centers / T
    wave_mean, wave_lo, wave_hi = wald_interval(wave, config.level)
    lsp_mean, lsp_lo, lsp_hi = wald_interval(lsp, config.level)
    wave_drop, lsp_drop = _half_difference(wave_mean, u_wave), _half_difference(lsp_mean, u_lsp)
    summary = {
        "experiment": "fig2-right",
        "replicates": config.replicates,
        "wavecancoh_scale": FIG2_RIGHT_SCALE,
        "wavecancoh_band_hz": list(scale_to_band(FIG2_RIGHT_SCALE, fs)),
        "lsp_band_hz": list(config.band),
        "wavecancoh_half_difference": wave_drop,
        "lsp_half_difference": lsp_drop,
        "contrast": wave_drop - lsp_drop,
    }
    tables = {
        "fig2_right_wavecancoh": pd.DataFrame(
            {"k": np.arange(T), "u": u_wave, "t": np.arange(T) / fs, "mean": wave_mean, "lo": wave_lo, "hi": wave_hi}
        ),
        "fig2_right_lsp": pd.DataFrame(
            {"k": centers, "u": u_lsp, "t": centers / fs, "mean": lsp_mean, "lo": lsp_lo, "hi": lsp_hi}
        ),
    }
    return {"tables": tables, "summary": summary}


def sweep_scales(config: ReplicateConfig) -> tuple:
    """Scales shared by every lag: resolved on the shortest lagged panel."""
    return config.cancoh.resolve(config.T - max(config.lags)).scales


def causal_replicate(index: int, config: ReplicateConfig) -> np.ndarray:
    """Mean rho per (direction, lag, scale) for one surrogate."""
    rep_seed = derive_seed(config.seed, index)
    spec = default_ar2_spec(rep_seed, fs=config.stft.fs, shared_delay=config.shared_delay)
    X, Y = simulate_ar2_mixture(spec, config.T, rep_seed)
    cancoh = replace(config.cancoh, scales=sweep_scales(config), fs=spec.fs)

    means = np.empty((2, len(config.lags), len(cancoh.scales)))
    for position, h in enumerate(config.lags):
        forward = causal_wavecancoh(X, Y, h, cancoh, direction="xy")
        backward = causal_wavecancoh(Y, X, h, cancoh, direction="yx")
        means[0, position] = forward.rho.mean(axis=1)
        means[1, position] = backward.rho.mean(axis=1)
    return means


def run_causal_sweep(config: ReplicateConfig, quiet: bool = False) -> Dict[str, Any]:
    results = np.stack(
        fan_out(partial(causal_replicate, config=config), config.replicates, config.workers, "causal-sweep", quiet)
    )
    scales = sweep_scales(config)
    rows = []
    for d, direction in enumerate(("xy", "yx")):
        for position, h in enumerate(config.lags):
            mean, lo, hi = wald_interval(results[:, d, position, :], config.level)
            for i, j in enumerate(scales):
                band_lo, band_hi = scale_to_band(j, config.stft.fs)
                rows.append(
                    {
                        "direction": direction,
                        "scale": j,
                        "band_lo_hz": band_lo,
                        "band_hi_hz": band_hi,
                        "lag": h,
                        "mean_rho": mean[i],
                        "lo": lo[i],
                        "hi": hi[i],
                    }
                )
    table = pd.DataFrame(rows)
    best = table.loc[table.groupby(["direction", "scale"])["mean_rho"].idxmax(), ["direction", "scale", "lag"]]
    summary = {
        "experiment": "causal-sweep",
        "replicates": config.replicates,
        "shared_delay": config.shared_delay,
        "lags": list(config.lags),
        "best_lag": {f"{row.direction}/{row.scale}": int(row.lag) for row in best.itertuples()},
    }
    return {"tables": {"causal_sweep": table}, "summary": summary}


RUNNERS = {
    "fig2-left": run_fig2_left,
    "fig2-right": run_fig2_right,
    "causal-sweep": run_causal_sweep,
}


def run_experiment(config: ReplicateConfig, quiet: bool = False) -> Dict[str, Any]:
    config.validate()
    logger.info("Running %s with %d replicates on %d workers", config.experiment, config.replicates, config.workers)
    return RUNNERS[config.experiment](config, quiet)
