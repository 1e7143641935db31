#!/usr/bin/env python3
"""
Convert a directory of per-trial arrays into wavecancoh panel CSVs.

Each input is a T x D array, either a .npy file or a headerless numeric .csv.
Every trial becomes <stem>.csv with header t,ch_1..ch_D plus a JSON sidecar,
and the output directory gets a manifest.json declaring P, fs and origin.
Channels can be reordered so that the X group comes first.
"""

import argparse
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

sys.path.insert(0, str(Path(__file__).resolve().parents[2] / "src"))

from constants import MANIFEST_NAME  # noqa: E402
from errors import ParseError, ValidationError, WaveCanCohError  # noqa: E402
from panel import TimeSeriesPanel  # noqa: E402
from storage import config_hash, write_json, write_panel  # noqa: E402

SUFFIXES = (".npy", ".csv")


def load_trial(path: Path) -> np.ndarray:
    """Load one T x D trial array."""
    if path.suffix == ".npy":
        values = np.load(path, allow_pickle=False)
    else:
        frame = pd.read_csv(path, header=None)
        numeric = frame.apply(pd.to_numeric, errors="coerce")
        if numeric.isna().any().any():
            row = int(np.flatnonzero(numeric.isna().any(axis=1).to_numpy())[0])
            raise ParseError("non-numeric or missing value", path=path, line=row + 1)
        values = numeric.to_numpy(dtype=float)
    values = np.asarray(values, dtype=float)
    if values.ndim != 2:
        raise ParseError(f"expected a 2-d array, got shape {values.shape}", path=path)
    return values


def select_channels(values: np.ndarray, channels: Optional[Sequence[int]]) -> np.ndarray:
    """Pick (and reorder) 1-based channel columns."""
    if channels is None:
        return values
    if min(channels) < 1 or max(channels) > values.shape[1]:
        raise ValidationError(f"Channels {list(channels)} out of range for D={values.shape[1]}")
    return values[:, [c - 1 for c in channels]]


def process_directory(
    directory: str,
    output_dir: str,
    P: int,
    fs: float,
    origin: float = 0.0,
    channels: Optional[Sequence[int]] = None,
) -> Dict[str, Any]:
    """Convert every trial file in directory (recursively) and write the manifest."""
    directory_path = Path(directory)
    if not directory_path.is_dir():
        raise ValidationError(f"Path is not a directory: {directory}")

    trial_files = sorted(path for path in directory_path.rglob("*") if path.suffix in SUFFIXES)
    print(f"Found {len(trial_files)} trial files")

    settings = {"P": P, "fs": fs, "origin": origin, "channels": list(channels) if channels else None}
    hash_ = config_hash({"command": "convert_trials", **settings})
    files: List[str] = []
    lengths = set()
    for trial_file in trial_files:
        print(f"Processing: {trial_file}")
        values = select_channels(load_trial(trial_file), channels)
        panel = TimeSeriesPanel(values, P, fs=fs, origin=origin)
        target = Path(output_dir) / f"{trial_file.stem}.csv"
        write_panel(target, panel, {"source": str(trial_file), "config_hash": hash_})
        files.append(target.name)
        lengths.add(panel.T)

    if len(lengths) > 1:
        print(f"Warning: trials have different lengths {sorted(lengths)}", file=sys.stderr)

    manifest = {
        "command": "convert_trials",
        "total_files": len(files),
        "source_directory": str(directory_path.absolute()),
        "config_hash": hash_,
        "files": files,
        **settings,
    }
    write_json(Path(output_dir) / MANIFEST_NAME, manifest)
    return manifest


def parse_channels(text: Optional[str]) -> Optional[List[int]]:
    if not text:
        return None
    return [int(part) for part in text.split(",")]


def main(argv: Optional[List[str]] = None) -> int:
    parser = argparse.ArgumentParser(description="Convert per-trial .npy or headerless .csv arrays into panel CSVs")
    parser.add_argument("directory", help="Directory to scan for trial arrays")
    parser.add_argument("output", help="Output directory for panel CSVs and the manifest")
    parser.add_argument("--P", type=int, required=True, help="Number of X channels (first P after reordering)")
    parser.add_argument("--fs", type=float, required=True, help="Sampling rate in Hz")
    parser.add_argument("--origin", type=float, default=0.0, help="Time of the first sample in seconds")
    parser.add_argument("--channels", default=None, help="Comma-separated 1-based channels, X group first")

    args = parser.parse_args(argv)

    try:
        manifest = process_directory(
            args.directory, args.output, args.P, args.fs, args.origin, parse_channels(args.channels)
        )
    except WaveCanCohError as e:
        print(f"Error: {e}", file=sys.stderr)
        return e.exit_code

    print(f"\nConverted {manifest['total_files']} trials")
    print(f"Output written to: {args.output}")
    return 0


if __name__ == "__main__":
    exit(main())
