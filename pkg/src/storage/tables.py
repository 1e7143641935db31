"""
CSV schemas.

    panel          t,ch_1,...,ch_D
    coherence      scale,k,u,rho,rho_raw,degenerate,a_1..a_P,b_1..b_Q
    band coherence band_lo_hz,band_hi_hz,k,u,rho,rho_raw,degenerate,a_1..a_P,b_1..b_Q
    LWS dump       scale,k,s_1_1,s_1_2,...,s_D_D  (row-major upper triangle)

Floats are written with %.17g and read back with round-trip parsing, so a
written coherence file re-serializes byte for byte. Metadata lives in a
same-stem JSON sidecar.
"""

import logging
import re
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional

import numpy as np
import pandas as pd

from cancoh import CancohField
from constants import FLOAT_FORMAT
from errors import GroupSplitError, ParseError, StorageError
from lws import LwsEstimate
from panel import TimeSeriesPanel
from storage.files import PathLike, atomic_write_text, read_json, sidecar_path, write_json

logger = logging.getLogger(__name__)

FIELD_COLUMNS = ["k", "u", "rho", "rho_raw", "degenerate"]
BAND_COLUMNS = ["band_lo_hz", "band_hi_hz"]


def _to_csv(frame: pd.DataFrame, index: bool = False) -> str:
    return frame.to_csv(index=index, float_format=FLOAT_FORMAT, lineterminator="\n")


def _read_csv(path: Path, **kwargs) -> pd.DataFrame:
    try:
        return pd.read_csv(path, **kwargs)
    except pd.errors.EmptyDataError:
        raise ParseError("file is empty", path=path, line=1) from None
    except pd.errors.ParserError as e:
        match = re.search(r"line (\d+)", str(e))
        raise ParseError(str(e).strip(), path=path, line=int(match.group(1)) if match else None) from None
    except OSError as e:
        raise StorageError(f"Cannot read {path}: {e}") from e


def _numeric(frame: pd.DataFrame, path: Path) -> np.ndarray:
    """Numeric matrix of a string-typed frame; the first bad cell raises with its file line."""
    values = frame.apply(pd.to_numeric, errors="coerce").to_numpy(dtype=float)
    bad = ~np.isfinite(values)
    if bad.any():
        row, column = np.argwhere(bad)[0]
        cell = frame.iat[row, column]
        raise ParseError(
            f"non-numeric or missing value {cell!r} in column '{frame.columns[column]}'",
            path=path,
            line=int(row) + 2,
        )
    return values


def write_panel(path: PathLike, panel: TimeSeriesPanel, metadata: Optional[Dict[str, Any]] = None) -> Path:
    frame = pd.DataFrame(panel.values + 0.0, columns=[f"ch_{i}" for i in range(1, panel.D + 1)])
    frame.insert(0, "t", np.arange(panel.T))
    path = atomic_write_text(path, _to_csv(frame))
    sidecar = {"P": panel.P, "Q": panel.Q, "fs": panel.fs, "origin": panel.origin, **(metadata or {})}
    write_json(sidecar_path(path), sidecar)
    return path


def read_panel(
    path: PathLike, P: Optional[int] = None, fs: Optional[float] = None, origin: Optional[float] = None
) -> TimeSeriesPanel:
    """Read a panel CSV; P, fs and origin come from the arguments, else from the sidecar."""
    path = Path(path)
    sidecar = read_json(sidecar_path(path)) if sidecar_path(path).exists() else {}
    P = P if P is not None else sidecar.get("P")
    if P is None:
        raise GroupSplitError(f"Group split P for {path} must be given by flag or sidecar manifest")
    fs = fs if fs is not None else sidecar.get("fs", 1.0)
    origin = origin if origin is not None else sidecar.get("origin", 0.0)

    frame = _read_csv(path, dtype=str, keep_default_na=False)
    D = len(frame.columns) - 1
    expected = ["t"] + [f"ch_{i}" for i in range(1, D + 1)]
    if D < 2 or list(frame.columns) != expected:
        raise ParseError(
            f"header must be t,ch_1,...,ch_D with D >= 2, got {','.join(frame.columns)}", path=path, line=1
        )
    if frame.empty:
        raise ParseError("panel has no samples", path=path, line=2)
    values = _numeric(frame, path)
    return TimeSeriesPanel(values[:, 1:], int(P), fs=float(fs), origin=float(origin))


def field_frame(field: CancohField) -> pd.DataFrame:
    n_rows, n_k = len(field.scales), len(field.k)
    data: Dict[str, Any] = {}
    if field.bands is not None:
        data["band_lo_hz"] = np.repeat([band[0] for band in field.bands], n_k).astype(float)
        data["band_hi_hz"] = np.repeat([band[1] for band in field.bands], n_k).astype(float)
    else:
        data["scale"] = np.repeat(field.scales, n_k)
    data["k"] = np.tile(field.k, n_rows)
    data["u"] = np.tile(field.k / field.T, n_rows)
    data["rho"] = field.rho.reshape(-1) + 0.0
    data["rho_raw"] = field.rho_raw.reshape(-1) + 0.0
    data["degenerate"] = field.degenerate.reshape(-1).astype(int)
    for i in range(field.P):
        data[f"a_{i + 1}"] = field.a[..., i].reshape(-1) + 0.0
    for i in range(field.Q):
        data[f"b_{i + 1}"] = field.b[..., i].reshape(-1) + 0.0
    return pd.DataFrame(data)


def write_cancoh_field(path: PathLike, field: CancohField, extra: Optional[Dict[str, Any]] = None) -> Path:
    path = atomic_write_text(path, _to_csv(field_frame(field)))
    sidecar = {
        "kind": "band_coherence" if field.bands is not None else "coherence",
        "T": field.T,
        "P": field.P,
        "Q": field.Q,
        "scales": list(field.scales),
        "bands": [list(band) for band in field.bands] if field.bands is not None else None,
        "metadata": field.metadata,
        **(extra or {}),
    }
    write_json(sidecar_path(path), sidecar)
    return path


def read_cancoh_field(path: PathLike) -> CancohField:
    path = Path(path)
    if not sidecar_path(path).exists():
        raise StorageError(f"Metadata sidecar {sidecar_path(path)} is missing")
    sidecar = read_json(sidecar_path(path))
    try:
        T, P, Q = int(sidecar["T"]), int(sidecar["P"]), int(sidecar["Q"])
    except (KeyError, TypeError, ValueError):
        raise ParseError("sidecar must declare T, P and Q", path=sidecar_path(path)) from None

    frame = _read_csv(path, float_precision="round_trip")
    band_schema = list(frame.columns[:2]) == BAND_COLUMNS
    lead = BAND_COLUMNS if band_schema else ["scale"]
    expected = lead + FIELD_COLUMNS + [f"a_{i}" for i in range(1, P + 1)] + [f"b_{i}" for i in range(1, Q + 1)]
    if list(frame.columns) != expected:
        raise ParseError(f"expected columns {','.join(expected)}", path=path, line=1)
    if frame.empty:
        raise ParseError("coherence file has no rows", path=path, line=2)
    if frame.isna().any().any():
        row = int(np.flatnonzero(frame.isna().any(axis=1).to_numpy())[0])
        raise ParseError("missing value", path=path, line=row + 2)

    if band_schema:
        keys = list(zip(frame["band_lo_hz"].astype(float), frame["band_hi_hz"].astype(float)))
    else:
        keys = list(frame["scale"].astype(int))
    order: List[Any] = list(dict.fromkeys(keys))
    n_rows = len(order)
    if len(frame) % n_rows:
        raise ParseError("rows do not form a complete scale x time grid", path=path)
    n_k = len(frame) // n_rows
    if keys != [key for key in order for _ in range(n_k)]:
        raise ParseError("rows must be grouped by scale", path=path)

    k = frame["k"].to_numpy(dtype=np.int64).reshape(n_rows, n_k)
    if not (k == k[0]).all():
        raise ParseError("scales are on different time grids", path=path)

    def grid(columns: Iterable[str]) -> np.ndarray:
        return frame[list(columns)].to_numpy(dtype=float).reshape(n_rows, n_k, -1)

    return CancohField(
        scales=tuple(range(1, n_rows + 1)) if band_schema else tuple(int(j) for j in order),
        k=k[0],
        T=T,
        P=P,
        Q=Q,
        rho=frame["rho"].to_numpy(dtype=float).reshape(n_rows, n_k),
        rho_raw=frame["rho_raw"].to_numpy(dtype=float).reshape(n_rows, n_k),
        degenerate=frame["degenerate"].to_numpy(dtype=int).reshape(n_rows, n_k).astype(bool),
        a=grid(f"a_{i}" for i in range(1, P + 1)),
        b=grid(f"b_{i}" for i in range(1, Q + 1)),
        metadata=dict(sidecar.get("metadata") or {}),
        bands=tuple(order) if band_schema else None,
    )


def write_lws_csv(path: PathLike, estimate: LwsEstimate, scales: Optional[Iterable[int]] = None) -> Path:
    """Dump S^ for the given 1-based scales, one row per (scale, k)."""
    scales = list(scales) if scales is not None else list(range(1, estimate.J + 1))
    iu, ju = np.triu_indices(estimate.D)
    columns = [f"s_{i + 1}_{j + 1}" for i, j in zip(iu, ju)]
    frames = []
    for j in scales:
        frame = pd.DataFrame(estimate.values[j - 1] + 0.0, columns=columns)
        frame.insert(0, "k", np.arange(estimate.T))
        frame.insert(0, "scale", j)
        frames.append(frame)
    return atomic_write_text(path, _to_csv(pd.concat(frames, ignore_index=True)))


def write_table(path: PathLike, frame: pd.DataFrame, index: bool = False) -> Path:
    return atomic_write_text(path, _to_csv(frame, index=index))


def read_table(path: PathLike) -> pd.DataFrame:
    return _read_csv(Path(path), float_precision="round_trip")
