import csv
import json
import math

import numpy as np
import pytest

from fbscatter import cli, config, pipeline
from fbscatter.config import ConfigError

SMALL = {
    "name": "small",
    "k": 1.25,
    "incidence": {"type": "cylindrical", "source": [1.2, 0.1]},
    "geometry": {
        "periodic": {"curve": "disk", "radius": 1.0},
        "perturbed": {"curve": "drop", "scale": 0.6, "offset": -0.6},
        "artificial": {"curve": "disk", "radius": 1.5},
    },
    "H": "pi", "M": 64, "N": 256, "N_p": 64, "n": 8, "J_trunc": 15,
    "cells": [-1, 1], "grid": {"per_cell": [8, 8]}, "probes": 300,
}


def write_config(tmp_path, **overrides):
    d = json.loads(json.dumps(SMALL))
    for key, value in overrides.items():
        d[key] = value
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(d))
    return path


def read_csv(path):
    with open(path) as fh:
        rows = list(csv.reader(fh))
    return rows[0], np.array([[float(v) for v in r] for r in rows[1:]])


# -- configuration ---------------------------------------------------------

def test_load_example_configs():
    from conftest import CONFIGS
    for name in ("example1", "example2", "example3"):
        cfg = config.load(CONFIGS / f"{name}.json")
        assert cfg.H == math.pi
    assert config.load(CONFIGS / "example3.json").M == 600


@pytest.mark.parametrize("change, field", [
    ({"H": 1.5}, "H"),
    ({"N": 258}, "N"),
    ({"n": 7}, "n"),
    ({"J_trunc": 2}, "J_trunc"),
    ({"k": -1}, "k"),
    ({"bogus": 1}, "bogus"),
    ({"incidence": {"type": "plane", "theta": 4.0}}, "incidence.theta"),
    ({"incidence": {"type": "cylindrical", "source": [0.0, 0.0]}}, "incidence.source"),
    ({"incidence": {"type": "cylindrical", "source": [1.5, 0.0]}}, "incidence.source"),
    ({"incidence": {"type": "spherical"}}, "incidence.type"),
    ({"geometry": {"periodic": {"curve": "disk", "radius": 1.0},
                   "perturbed": {"curve": "disk", "radius": 1.2},
                   "artificial": {"curve": "disk", "radius": 1.1}}}, "geometry.artificial"),
    ({"geometry": {"periodic": {"curve": "disk", "radius": 3.5},
                   "perturbed": {"curve": "disk", "radius": 1.0},
                   "artificial": {"curve": "disk", "radius": 3.6}}}, "H"),
    ({"cells": [1, 2]}, "cells"),
])
def test_validation_names_the_failing_field(change, field):
    d = json.loads(json.dumps(SMALL))
    d.update(change)
    with pytest.raises(ConfigError) as exc:
        config.from_dict(d)
    assert exc.value.field == field


def test_missing_required_entry():
    d = dict(SMALL)
    del d["geometry"]
    with pytest.raises(ConfigError) as exc:
        config.from_dict(d)
    assert exc.value.field == "geometry"


def test_parse_sweep():
    assert config.parse_sweep("n=8,12, 16") == ("n", [8, 12, 16])
    for bad in ("k=1,2", "n", "n=a,b", "n="):
        with pytest.raises(ConfigError):
            config.parse_sweep(bad)


def test_with_value_revalidates():
    cfg = config.from_dict(SMALL)
    assert cfg.with_value("n", 12).n == 12
    with pytest.raises(ConfigError):
        cfg.with_value("N_p", 63)


def test_trig_interp_exact_for_band_limited_data():
    t = 2 * np.pi * np.arange(64) / 64
    f = np.cos(3 * t) + 0.5j * np.sin(17 * t)
    tn = pipeline.probe_parameters(300)
    assert np.abs(pipeline.trig_interp(f, tn) - (np.cos(3 * tn) + 0.5j * np.sin(17 * tn))).max() < 1e-13


def test_e_rel_of_reference_with_itself_is_zero():
    u = np.array([1 + 2j, 3.0, -1j])
    assert pipeline.e_rel(u, u) == 0.0


def test_converge_excludes_reference_and_checks_order(tmp_path):
    cfg = config.from_dict(SMALL)
    rec = pipeline.converge(cfg, "n", [4, 8], 8)
    assert rec.values == [4] and len(rec.e_rel) == 1 and rec.e_rel[0] >= 0
    with pytest.raises(ValueError):
        pipeline.converge(cfg, "n", [4, 10], 8)


# -- command line ------------------------------------------------------------

def test_run_writes_artifacts(tmp_path, capsys):
    path = write_config(tmp_path)
    out = tmp_path / "out"
    assert cli.main(["run", "--config", str(path), "--out", str(out)]) == 0
    header, field = read_csv(out / "field.csv")
    assert header == ["x1 (length)", "x2 (length)", "Re u (dimensionless)", "Im u (dimensionless)"]
    assert field.shape == (3 * 64, 4)
    header, trace = read_csv(out / "trace.csv")
    assert header[0] == "t (rad)" and trace.shape == (300, 5)
    m = json.loads((out / "manifest.json").read_text())
    for key in ("T_nq", "T_q", "T_nq_over_T_q"):
        assert m["timings_s"][key] > 0
    assert m["kappa"] == 0.25 and m["quadrature_branch"] == "split"
    assert m["route"] == "cylindrical" and m["config"]["n"] == 8
    assert "ratio=" in capsys.readouterr().out


def test_export_grid_rows_nan_and_determinism(tmp_path):
    path = write_config(tmp_path, cells=[-2, 2], grid={"per_cell": [50, 50]})
    a, b = tmp_path / "a", tmp_path / "b"
    assert cli.main(["export", "--config", str(path), "--out", str(a)]) == 0
    assert cli.main(["export", "--config", str(path), "--out", str(b)]) == 0
    raw = (a / "field.csv").read_bytes()
    assert raw == (b / "field.csv").read_bytes()
    _, field = read_csv(a / "field.csv")
    assert len(field) == 12500
    from fbscatter.geometry import contains
    cfg = config.load(path)
    in_drop = contains(cfg.curve("perturbed"), field[:, :2])
    assert in_drop.any() and np.all(np.isnan(field[in_drop, 2]))
    disk = cfg.curve("periodic")
    solid = in_drop.copy()
    for j in (-2, -1, 1, 2):
        solid |= contains(disk, field[:, :2] - [2 * np.pi * j, 0.0])
    assert np.all(np.isnan(field[solid, 2]))
    assert np.all(np.isfinite(field[~solid, 2]))


def test_thread_count_does_not_change_results(tmp_path):
    path = write_config(tmp_path)
    for t in ("1", "2"):
        assert cli.main(["export", "--config", str(path), "--out", str(tmp_path / t),
                         "--threads", t]) == 0
    _, a = read_csv(tmp_path / "1" / "field.csv")
    _, b = read_csv(tmp_path / "2" / "field.csv")
    ok = np.isfinite(a[:, 2])
    assert np.abs(a[ok, 2:] - b[ok, 2:]).max() <= 1e-12


def test_converge_command(tmp_path, capsys):
    path = write_config(tmp_path)
    out = tmp_path / "conv"
    assert cli.main(["converge", "--config", str(path), "--out", str(out),
                     "--sweep", "n=4,6,8", "--reference", "8"]) == 0
    header, table = read_csv(out / "convergence.csv")
    assert header == ["n (count)", "E_rel (dimensionless)", "wall (s)"]
    assert table[:, 0].tolist() == [4, 6]
    assert table[1, 1] < table[0, 1]
    m = json.loads((out / "manifest.json").read_text())
    assert m["convergence"]["reference"]["n"] == 8 and m["convergence"]["probes"] == 300


@pytest.mark.parametrize("argv", [
    ["converge", "--sweep", "n=4,6"],
    ["converge", "--sweep", "q=4", "--reference", "8"],
    ["converge", "--sweep", "n=4,10", "--reference", "8"],
    ["converge", "--sweep", "n=4", "--reference", "8.5"],
    ["run", "--threads", "0"],
])
def test_cli_argument_errors(tmp_path, argv):
    path = write_config(tmp_path)
    assert cli.main(argv[:1] + ["--config", str(path), "--out", str(tmp_path)] + argv[1:]) == 2


def test_cli_validation_error_exit_code(tmp_path, capsys):
    path = write_config(tmp_path, H=1.0)
    assert cli.main(["run", "--config", str(path), "--out", str(tmp_path)]) == 2
    assert "H:" in capsys.readouterr().err
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert cli.main(["run", "--config", str(bad)]) == 2
    assert cli.main(["run"]) == 2
    assert cli.main(["frobnicate"]) == 2


def test_cli_numerical_failure_exit_code(tmp_path, monkeypatch, capsys):
    def boom(*a, **k):
        raise pipeline.NumericalFailure("non-finite boundary data")
    monkeypatch.setattr(pipeline, "solve", boom)
    path = write_config(tmp_path)
    assert cli.main(["export", "--config", str(path), "--out", str(tmp_path)]) == 3
    assert "numerical failure" in capsys.readouterr().err


def test_selftest_command(capsys):
    assert cli.main(["selftest"]) == 0
    out = capsys.readouterr().out
    assert "FAIL" not in out and out.count("PASS") == 5
