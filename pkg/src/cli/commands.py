import argparse
import logging
from dataclasses import replace
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

from baseline import StftConfig, check_band, lsp_cancoh
from cancoh import CancohConfig, causal_wavecancoh, regularized_lws
from cli.config import EstimateConfig, PermTestConfig, ReplicateConfig, SimulateConfig
from cli.experiments import run_experiment
from constants import AR2_ALPHA, AR2_BETA, CHANGE_POINT, DEFAULT_FAMILY, MANIFEST_NAME, OUTPUT_DIR
from errors import ParseError, StorageError
from inference import load_trials, perm_test, summary_table
from lws import lagged_joint
from panel import TimeSeriesPanel
from seeding import derive_seed
from simulate import LwsSpec, builtin_spec_appendix_c1, default_ar2_spec, simulate_ar2_mixture, simulate_mvlsw
from storage import read_json, read_panel, write_cancoh_field, write_json, write_lws_csv, write_panel, write_table
from wavelets import build_system

logger = logging.getLogger(__name__)


def parse_band(text: str) -> Tuple[float, float]:
    """'25:50' -> (25.0, 50.0)"""
    try:
        lo, hi = (float(part) for part in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"band must look like LO:HI, got '{text}'") from None
    return lo, hi


def parse_int_list(text: str) -> Tuple[int, ...]:
    try:
        return tuple(int(part) for part in text.split(",") if part.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got '{text}'") from None


def parse_float_list(text: str) -> Tuple[float, ...]:
    try:
        return tuple(float(part) for part in text.split(",") if part.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got '{text}'") from None


def cancoh_config_from_args(args: argparse.Namespace) -> CancohConfig:
    return CancohConfig(
        family=args.family,
        num_scales=args.J,
        half_width=args.M,
        epsilon=args.epsilon,
        noise_floor=args.noise_floor,
        scales=args.scales,
    )


def _output_dir(explicit: Optional[str], *parts: str) -> Path:
    return Path(explicit) if explicit else Path(OUTPUT_DIR, *parts)


def cmd_simulate(args: argparse.Namespace) -> List[Path]:
    config = SimulateConfig(
        model=args.model,
        T=args.T,
        reps=args.reps,
        seed=args.seed,
        builtin=getattr(args, "builtin", None),
        spec_file=getattr(args, "spec_file", None),
        family=getattr(args, "family", DEFAULT_FAMILY),
        fs=args.fs,
        origin=args.origin,
        alpha=getattr(args, "alpha", AR2_ALPHA),
        beta=getattr(args, "beta", AR2_BETA),
        change_point=getattr(args, "change_point", CHANGE_POINT),
        shared_delay=getattr(args, "shared_delay", 0),
        output=args.output,
    )
    config.validate()
    out_dir = _output_dir(config.output, "simulate", config.model)
    hash_ = config.config_hash()
    fs = config.sampling_rate

    if config.model == "mvlsw":
        spec = LwsSpec.from_dict(read_json(config.spec_file)) if config.spec_file else builtin_spec_appendix_c1()
        system = build_system(config.family, spec.num_scales)
        change_points = sorted({b for s in spec.spectra.values() for b in s.breakpoints if b > 0})
        spec_id = spec.name
    else:
        change_points = [config.change_point]
        spec_id = "ar2mix"

    paths = []
    for r in range(config.reps):
        rep_seed = derive_seed(config.seed, r)
        if config.model == "mvlsw":
            panel = simulate_mvlsw(spec, config.T, system, rep_seed, fs=fs, origin=config.origin).panel
        else:
            mixture = default_ar2_spec(
                rep_seed,
                alpha=config.alpha,
                beta=config.beta,
                change_point=config.change_point,
                fs=fs,
                shared_delay=config.shared_delay,
            )
            X, Y = simulate_ar2_mixture(mixture, config.T, rep_seed)
            panel = TimeSeriesPanel.fuse(X, Y, fs=fs, origin=config.origin)
        metadata = {
            "seed": rep_seed,
            "replicate": r,
            "spec": spec_id,
            "change_points": change_points,
            "config_hash": hash_,
        }
        paths.append(write_panel(out_dir / f"panel_{r:04d}.csv", panel, metadata))

    manifest = {
        "command": "simulate",
        "config": config.to_dict(),
        "config_hash": hash_,
        "P": panel.P,
        "Q": panel.Q,
        "fs": fs,
        "origin": config.origin,
        "spec": spec_id,
        "change_points": change_points,
        "total_files": len(paths),
        "files": [path.name for path in paths],
    }
    write_json(out_dir / MANIFEST_NAME, manifest)
    logger.info("Wrote %d panels to %s", len(paths), out_dir)
    return paths


def _manifest_defaults(path: Path) -> Dict[str, Any]:
    manifest = path.parent / MANIFEST_NAME
    return read_json(manifest) if manifest.exists() else {}


def _load_panel(path: Path, config: EstimateConfig) -> TimeSeriesPanel:
    defaults = _manifest_defaults(path)
    return read_panel(
        path,
        P=config.P if config.P is not None else defaults.get("P"),
        fs=config.fs if config.fs is not None else defaults.get("fs"),
        origin=config.origin if config.origin is not None else defaults.get("origin"),
    )


def estimate_panel(panel: TimeSeriesPanel, config: EstimateConfig, output: Path) -> List[Path]:
    """Estimate one panel and write its coherence field (plus the optional LWS dump)."""
    X, Y = (panel.Y, panel.X) if config.direction == "yx" else (panel.X, panel.Y)
    if config.method == "lsp":
        check_band(config.band, panel.fs)
        stft = replace(config.stft, fs=panel.fs)
        field = lsp_cancoh(X, Y, config.band, stft, origin=panel.origin)
        field.metadata["direction"] = config.direction
    else:
        cancoh = replace(config.cancoh, fs=panel.fs, origin=panel.origin)
        field = causal_wavecancoh(X, Y, config.lag, cancoh, direction=config.direction)

    hash_ = config.config_hash()
    field.metadata["config_hash"] = hash_
    echo = {key: value for key, value in config.to_dict().items() if key != "output"}
    extra = {"config": echo, "config_hash": hash_}
    paths = [write_cancoh_field(output, field, extra)]

    if config.dump_lws and config.method == "wavecancoh":
        joint = lagged_joint(X, Y, config.lag, fs=panel.fs, origin=panel.origin)
        estimate, resolved = regularized_lws(joint, cancoh)
        paths.append(write_lws_csv(output.with_name(f"{output.stem}_lws.csv"), estimate, resolved.scales))
    return paths


def cmd_estimate(args: argparse.Namespace) -> List[Path]:
    config = EstimateConfig(
        input=args.input,
        output=args.output,
        P=args.P,
        method=args.method,
        cancoh=cancoh_config_from_args(args),
        lag=args.lag,
        direction=args.direction,
        band=args.band,
        stft=StftConfig(window_len=args.window, hop=args.hop, gaussian_sigma=args.sigma),
        fs=args.fs,
        origin=args.origin,
        dump_lws=args.dump_lws,
    )
    config.validate()
    source = Path(config.input)
    if not source.exists():
        raise StorageError(f"Input {source} does not exist")

    paths = []
    if source.is_dir():
        out_dir = _output_dir(config.output, "estimate", source.name)
        inputs = sorted(path for path in source.glob("*.csv") if not path.stem.endswith("_lws"))
        if not inputs:
            raise ParseError("directory holds no panel CSV files", path=source)
        logger.info("Found %d panels in %s", len(inputs), source)
        for path in inputs:
            paths.extend(estimate_panel(_load_panel(path, config), config, out_dir / path.name))
        manifest = {
            "command": "estimate",
            "config": {key: value for key, value in config.to_dict().items() if key != "output"},
            "config_hash": config.config_hash(),
            "source_directory": str(source),
            "total_files": len(paths),
            "files": [path.name for path in paths],
        }
        write_json(out_dir / MANIFEST_NAME, manifest)
    else:
        default = Path(OUTPUT_DIR, "estimate", f"{source.stem}_{config.method}.csv")
        output = Path(config.output) if config.output else default
        paths.extend(estimate_panel(_load_panel(source, config), config, output))

    for path in paths:
        logger.info("Output written to: %s", path)
    return paths


def cmd_permtest(args: argparse.Namespace) -> List[Path]:
    config = PermTestConfig(
        dir_a=args.dir_a,
        dir_b=args.dir_b,
        scales=args.scales,
        times=args.times,
        w=args.window,
        n_perm=args.n_perm,
        seed=args.seed,
        corrected=args.corrected,
        include_distribution=args.distribution,
        open_coarsest=args.open_coarsest,
        output=args.output,
    )
    config.validate()
    group_a = load_trials(config.dir_a, label=args.label_a)
    group_b = load_trials(config.dir_b, label=args.label_b)
    group_a.check_compatible(group_b)
    out_dir = _output_dir(config.output, "permtest")
    hash_ = config.config_hash()

    reports, paths = [], []
    for j in config.scales:
        for t_star in config.times:
            report = perm_test(group_a, group_b, j, t_star, config.w, config.n_perm, config.seed, config.corrected)
            reports.append(report)
            data = report.to_dict(include_distribution=config.include_distribution)
            data["config_hash"] = hash_
            paths.append(write_json(out_dir / f"perm_scale{j}_t{t_star:g}.json", data))

    table = summary_table(reports, open_coarsest=config.open_coarsest)
    paths.append(write_table(out_dir / "summary.csv", table, index=True))
    paths.append(
        write_json(
            out_dir / "summary.json",
            {
                "command": "permtest",
                "config": config.to_dict(),
                "config_hash": hash_,
                "groups": {group_a.label: len(group_a), group_b.label: len(group_b)},
                "total_reports": len(reports),
            },
        )
    )
    logger.info("Wrote %d permutation reports and the summary table to %s", len(reports), out_dir)
    return paths


def cmd_replicate(args: argparse.Namespace) -> List[Path]:
    config = ReplicateConfig(
        experiment=args.experiment,
        reps=args.reps,
        seed=args.seed,
        T=args.T,
        lags=args.lags,
        shared_delay=args.shared_delay,
        cancoh=CancohConfig(
            family=args.family, half_width=args.M, epsilon=args.epsilon, noise_floor=args.noise_floor
        ),
        stft=StftConfig(window_len=args.window, hop=args.hop, gaussian_sigma=args.sigma, fs=args.fs),
        band=args.band,
        level=args.level,
        workers=args.workers,
        output=args.output,
    )
    config.validate()
    result = run_experiment(config, quiet=args.quiet)
    out_dir = _output_dir(config.output, "replicate", config.experiment)
    hash_ = config.config_hash()

    paths = []
    for name, table in result["tables"].items():
        path = write_table(out_dir / f"{name}.csv", table)
        write_json(path.with_suffix(".json"), {"config": config.to_dict(), "config_hash": hash_})
        paths.append(path)
    summary = {**result["summary"], "config": config.to_dict(), "config_hash": hash_}
    paths.append(write_json(out_dir / f"{config.experiment.replace('-', '_')}_summary.json", summary))
    for path in paths:
        logger.info("Output written to: %s", path)
    return paths
