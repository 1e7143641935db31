"""Tests for CSV/JSON persistence: schemas, sidecars, hashing and parse diagnostics."""

import json

import numpy as np
import pandas as pd
import pytest

from baseline import StftConfig, lsp_cancoh
from cancoh import CancohConfig, regularized_lws, wavecancoh
from errors import GroupSplitError, ParseError, StorageError
from inference import load_trials
from panel import TimeSeriesPanel
from storage import (
    atomic_write_text,
    canonical_json,
    config_hash,
    read_cancoh_field,
    read_json,
    read_panel,
    read_table,
    sidecar_path,
    write_cancoh_field,
    write_json,
    write_lws_csv,
    write_panel,
    write_table,
)


@pytest.fixture
def field(rng):
    X = rng.standard_normal((64, 2))
    Y = X @ rng.standard_normal((2, 2)) + rng.standard_normal((64, 2))
    return wavecancoh(X, Y, CancohConfig(scales=(1, 2), fs=10.0, origin=-1.0))


class TestConfigHash:
    def test_stable_and_short(self):
        first = config_hash({"b": 1, "a": [1, 2], "c": {"y": 2.5, "x": None}})
        second = config_hash({"c": {"x": None, "y": 2.5}, "a": [1, 2], "b": 1})
        assert first == second
        assert len(first) == 16
        int(first, 16)

    def test_sensitive_to_values(self):
        assert config_hash({"M": 64}) != config_hash({"M": 65})

    def test_numpy_values_serialize(self):
        assert canonical_json({"x": np.int64(3), "y": np.arange(2)}) == '{"x":3,"y":[0,1]}'


class TestFiles:
    def test_atomic_write_replaces_and_leaves_no_temp(self, tmp_path):
        target = tmp_path / "nested" / "out.txt"
        atomic_write_text(target, "first")
        atomic_write_text(target, "second")
        assert target.read_text() == "second"
        assert [path.name for path in target.parent.iterdir()] == ["out.txt"]

    def test_json_round_trip(self, tmp_path):
        path = write_json(tmp_path / "data.json", {"scales": (1, 2), "fs": np.float64(100.0)})
        assert read_json(path) == {"scales": [1, 2], "fs": 100.0}

    def test_malformed_json_reports_line(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text('{\n  "P": 2,\n  "fs": \n}\n')
        with pytest.raises(ParseError) as info:
            read_json(path)
        assert info.value.line == 4
        assert str(info.value).startswith(f"{path}:4: ")

    def test_missing_file(self, tmp_path):
        with pytest.raises(StorageError):
            read_json(tmp_path / "absent.json")

    def test_sidecar_path(self, tmp_path):
        assert sidecar_path(tmp_path / "trial_01.csv") == tmp_path / "trial_01.json"


class TestPanelFiles:
    def test_round_trip(self, tmp_path, rng):
        panel = TimeSeriesPanel(rng.standard_normal((32, 3)), 1, fs=250.0, origin=-0.5)
        path = write_panel(tmp_path / "panel.csv", panel, {"seed": 4})
        assert path.read_text().splitlines()[0] == "t,ch_1,ch_2,ch_3"
        restored = read_panel(path)
        np.testing.assert_allclose(restored.values, panel.values, rtol=1e-13, atol=0)
        assert (restored.P, restored.fs, restored.origin) == (1, 250.0, -0.5)
        assert read_json(sidecar_path(path))["seed"] == 4

    def test_flags_override_sidecar(self, tmp_path, rng):
        path = write_panel(tmp_path / "panel.csv", TimeSeriesPanel(rng.standard_normal((8, 3)), 1))
        assert read_panel(path, P=2, fs=5.0).P == 2

    def test_missing_group_split(self, tmp_path):
        path = tmp_path / "panel.csv"
        path.write_text("t,ch_1,ch_2\n0,1,2\n1,3,4\n")
        with pytest.raises(GroupSplitError):
            read_panel(path)

    def test_bad_cell_reports_line(self, tmp_path):
        path = tmp_path / "panel.csv"
        path.write_text("t,ch_1,ch_2\n0,1,2\n1,x,3\n2,4,5\n")
        with pytest.raises(ParseError) as info:
            read_panel(path, P=1)
        assert info.value.line == 3
        assert "ch_1" in str(info.value)

    def test_empty_cell_reports_line(self, tmp_path):
        path = tmp_path / "panel.csv"
        path.write_text("t,ch_1,ch_2\n0,1,2\n1,2,3\n2,,5\n")
        with pytest.raises(ParseError) as info:
            read_panel(path, P=1)
        assert info.value.line == 4

    def test_bad_header(self, tmp_path):
        path = tmp_path / "panel.csv"
        path.write_text("time,a,b\n0,1,2\n")
        with pytest.raises(ParseError) as info:
            read_panel(path, P=1)
        assert info.value.line == 1


class TestFieldFiles:
    def test_rewrite_is_byte_identical(self, tmp_path, field):
        first = write_cancoh_field(tmp_path / "first.csv", field)
        restored = read_cancoh_field(first)
        second = write_cancoh_field(tmp_path / "second.csv", restored)
        assert first.read_bytes() == second.read_bytes()
        np.testing.assert_array_equal(restored.rho, field.rho)
        np.testing.assert_array_equal(restored.a, field.a)
        assert restored.scales == (1, 2)
        assert restored.fs == 10.0
        assert restored.times()[0] == -1.0

    def test_schema(self, tmp_path, field):
        path = write_cancoh_field(tmp_path / "field.csv", field)
        frame = pd.read_csv(path)
        assert list(frame.columns) == ["scale", "k", "u", "rho", "rho_raw", "degenerate", "a_1", "a_2", "b_1", "b_2"]
        assert len(frame) == 2 * 64
        assert set(frame["degenerate"]) <= {0, 1}
        assert read_json(sidecar_path(path))["kind"] == "coherence"
        assert "-0," not in path.read_text()

    def test_band_schema(self, tmp_path, rng):
        X, Y = rng.standard_normal((512, 2)), rng.standard_normal((512, 2))
        band_field = lsp_cancoh(X, Y, (10.0, 20.0), StftConfig(window_len=64, hop=16, fs=50.0))
        path = write_cancoh_field(tmp_path / "lsp.csv", band_field)
        assert path.read_text().startswith("band_lo_hz,band_hi_hz,k,u,rho,")
        restored = read_cancoh_field(path)
        assert restored.bands == ((10.0, 20.0),)
        np.testing.assert_array_equal(restored.k, band_field.k)
        np.testing.assert_array_equal(restored.rho, band_field.rho)

    def test_missing_sidecar(self, tmp_path, field):
        path = write_cancoh_field(tmp_path / "field.csv", field)
        sidecar_path(path).unlink()
        with pytest.raises(StorageError):
            read_cancoh_field(path)

    def test_wrong_columns(self, tmp_path, field):
        path = write_cancoh_field(tmp_path / "field.csv", field)
        lines = path.read_text().splitlines()
        lines[0] = lines[0].replace("rho_raw", "raw")
        path.write_text("\n".join(lines) + "\n")
        with pytest.raises(ParseError):
            read_cancoh_field(path)

    def test_load_trials_in_name_order(self, tmp_path, field):
        for name in ("trial_02", "trial_01"):
            write_cancoh_field(tmp_path / f"{name}.csv", field)
        (tmp_path / "notes.csv").write_text("unrelated\n")
        trials = load_trials(tmp_path, label="A")
        assert len(trials) == 2
        assert trials.label == "A"

    def test_load_trials_missing_directory(self, tmp_path):
        with pytest.raises(StorageError):
            load_trials(tmp_path / "absent")


class TestLwsDump:
    def test_columns(self, tmp_path, rng):
        panel = TimeSeriesPanel(rng.standard_normal((64, 3)), 1)
        estimate, resolved = regularized_lws(panel, CancohConfig(scales=(1, 2)))
        path = write_lws_csv(tmp_path / "lws.csv", estimate, resolved.scales)
        frame = pd.read_csv(path)
        assert list(frame.columns) == ["scale", "k", "s_1_1", "s_1_2", "s_1_3", "s_2_2", "s_2_3", "s_3_3"]
        assert len(frame) == 2 * 64
        np.testing.assert_allclose(frame.loc[64, "s_1_2"], estimate.matrices(2)[0, 0, 1])


class TestTables:
    def test_round_trip(self, tmp_path):
        frame = pd.DataFrame({"lag": [0, 10], "mean_rho": [0.1, 1.0 / 3.0]})
        path = write_table(tmp_path / "table.csv", frame)
        restored = read_table(path)
        assert restored["mean_rho"].iloc[1] == 1.0 / 3.0
        assert json.loads(json.dumps(restored["lag"].tolist())) == [0, 10]
