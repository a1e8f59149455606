import csv
import io
import json

import numpy as np
import pytest

from conftest import drifting_blob_spec
from radhar import cli, config, render
from radhar.formats import read_pgm, read_tensor, write_tensor
from radhar.quality import lumps_from_frame


def _write(tmp_path, doc, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return str(p)


def _rows(path):
    return list(csv.DictReader(io.StringIO(path.read_text())))


def _blob_doc(dropout=(), **extra):
    spec = drifting_blob_spec(dropout)
    return {
        "pipeline": "static",
        "source": {
            "kind": "blobs",
            "frame_shape": list(spec.frame_shape),
            "blobs": [{"centroid": list(b.centroid), "sigma_px": b.sigma_px, "amplitude": b.amplitude} for b in spec.blobs],
            "clutter_lumps": [{"centroid": list(b.centroid), "sigma_px": b.sigma_px, "amplitude": b.amplitude}
                              for b in spec.clutter_lumps],
            "frames": spec.frames,
            "velocity_px": list(spec.velocity_px),
            "dropout_frames": sorted(spec.dropout_frames),
        },
        "write_images": False,
        **extra,
    }


@pytest.fixture(scope="module")
def sweep_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("sweep")
    cfg = _write(out, {"pipeline": "dynamic", "snr_db": [10, -5]})
    assert cli.main(["dynamic-eval", "--config", cfg, "--seed", "7", "--out", str(out / "run")]) == 0
    return out / "run"


def test_sweep_cardinality_and_columns(sweep_dir):
    rows = _rows(sweep_dir / "metrics.csv")
    assert len(rows) == 2 * 5
    assert list(rows[0]) == ["snr_db", "method", "mse", "mae", "rmse", "psnr_db", "pearson", "ssim", "identical"]
    assert [r["method"] for r in rows[:5]] == ["NS", "EBD", "ATh", "APr", "APr + ATh"]
    assert {r["snr_db"] for r in rows} == {"10.000000", "-5.000000"}


def test_sweep_outputs(sweep_dir):
    manifest = json.loads((sweep_dir / "MANIFEST.json").read_text())
    assert manifest["complete"] is True
    assert "noise-denoise-evaluate" in manifest["stages"]
    table = (sweep_dir / "table.txt").read_text()
    assert "SNR = 10 dB" in table and "SNR = -5 dB" in table
    assert table.splitlines()[1].split()[:2] == ["METRICS", "NS"]
    ref = read_pgm(sweep_dir / "reference.pgm")
    panel = read_pgm(sweep_dir / "panels" / "snr_+10dB.pgm")
    assert panel.shape == (2 * ref.shape[0] + 2, 3 * ref.shape[1] + 4)
    run = json.loads((sweep_dir / "run.json").read_text())
    assert run["schema_version"] == 1 and len(run["parameters"]["levels"]) == 2


def test_static_blob_dropout_rows(tmp_path):
    cfg = _write(tmp_path, _blob_doc(dropout=[10, 11, 12]))
    assert cli.main(["static-eval", "--config", cfg, "--out", str(tmp_path / "o")]) == 0
    rows = _rows(tmp_path / "o" / "track.csv")
    coasting = [int(r["frame"]) for r in rows if r["mode"] == "coasting"]
    assert coasting == [10, 11, 12]
    assert len(_rows(tmp_path / "o" / "truth.csv")) == 40
    soft = read_tensor(tmp_path / "o" / "soft_masks.rdt")
    assert soft.shape == (40, 96, 128)


def test_tau_zero_accepts_every_frame(tmp_path):
    cfg = _write(tmp_path, _blob_doc(tracker={"tau": 0.0}))
    assert cli.main(["static-eval", "--config", cfg, "--out", str(tmp_path / "o")]) == 0
    assert {r["mode"] for r in _rows(tmp_path / "o" / "track.csv")} == {"accepted"}


def test_tau_above_one_rejected(tmp_path, capsys):
    cfg = _write(tmp_path, _blob_doc(tracker={"tau": 1.0001}))
    assert cli.main(["static-eval", "--config", cfg, "--out", str(tmp_path / "o")]) == 2
    assert "tracker/tau" in capsys.readouterr().err


def test_unknown_key_rejected(tmp_path):
    cfg = _write(tmp_path, {"pipeline": "dynamic", "snr": [1]})
    assert cli.main(["dynamic-eval", "--config", cfg, "--out", str(tmp_path / "o")]) == 2


def test_missing_config_file(tmp_path):
    assert cli.main(["dynamic-eval", "--config", str(tmp_path / "nope.json"), "--out", str(tmp_path / "o")]) == 2


def test_numerical_failure_exit_code(tmp_path, capsys):
    doc = {"pipeline": "static", "source": {"kind": "radar", "frames": 1, "loading_factor": 0.0,
                                             "scene": {"preset": "static-sit", "noise_power": 0.0}}}
    cfg = _write(tmp_path, doc)
    assert cli.main(["static-eval", "--config", cfg, "--out", str(tmp_path / "o")]) == 3
    assert "stage 'frames'" in capsys.readouterr().err
    assert json.loads((tmp_path / "o" / "MANIFEST.json").read_text())["complete"] is False


def test_env_overrides(tmp_path, monkeypatch):
    monkeypatch.setenv("RADHAR_CONFIG", _write(tmp_path, _blob_doc()))
    monkeypatch.setenv("RADHAR_OUT", str(tmp_path / "env_out"))
    monkeypatch.setenv("RADHAR_SEED", "3")
    assert cli.main(["static-eval"]) == 0
    assert (tmp_path / "env_out" / "track.csv").exists()
    assert cli.main(["static-eval", "--out", str(tmp_path / "flag_out")]) == 0
    assert (tmp_path / "flag_out" / "track.csv").exists()
    monkeypatch.setenv("RADHAR_SEED", "abc")
    assert cli.main(["static-eval"]) == 2


def test_synth_then_score_track_render(tmp_path):
    cfg = _write(tmp_path, _blob_doc(dropout=[5]))
    assert cli.main(["synth", "--config", cfg, "--out", str(tmp_path / "s")]) == 0
    frames = tmp_path / "s" / "frames.rdt"
    assert read_tensor(frames).shape == (40, 96, 128)
    assert cli.main(["score", "--input", str(frames), "--out", str(tmp_path / "sc")]) == 0
    assert len(_rows(tmp_path / "sc" / "scores.csv")) == 40
    assert cli.main(["track", "--input", str(frames), "--out", str(tmp_path / "tr")]) == 0
    assert _rows(tmp_path / "tr" / "track.csv")[5]["mode"] == "coasting"
    assert cli.main(["render", "--input", str(frames), "--frame", "2", "--out", str(tmp_path / "r")]) == 0
    assert read_pgm(tmp_path / "r" / "frame_0002.pgm").shape == (96, 128)
    assert cli.main(["render", "--input", str(frames), "--frame", "99", "--out", str(tmp_path / "r")]) == 2


def test_synth_dynamic_and_radar(tmp_path):
    assert cli.main(["synth", "--out", str(tmp_path / "d")]) == 0
    assert read_tensor(tmp_path / "d" / "iq_cube.rdt").shape == (1, 4000, 64)
    cfg = _write(tmp_path, {"pipeline": "static", "source": {"kind": "radar", "frames": 2}})
    assert cli.main(["synth", "--config", cfg, "--out", str(tmp_path / "r")]) == 0
    assert read_tensor(tmp_path / "r" / "iq_cubes.rdt").shape == (2, 3, 64, 128)


def test_score_accepts_single_2d_frame(tmp_path):
    x = np.zeros((20, 20), dtype=np.float32)
    x[5, 5] = 1.0
    write_tensor(tmp_path / "one.rdt", x)
    assert cli.main(["score", "--input", str(tmp_path / "one.rdt"), "--out", str(tmp_path / "o")]) == 0
    assert len(_rows(tmp_path / "o" / "scores.csv")) == 1


def test_static_radar_jobs_match_serial(tmp_path):
    doc = {"pipeline": "static", "source": {"kind": "radar", "frames": 4}, "write_images": False}
    cfg = _write(tmp_path, doc)
    assert cli.main(["static-eval", "--config", cfg, "--out", str(tmp_path / "a")]) == 0
    assert cli.main(["static-eval", "--config", cfg, "--jobs", "3", "--out", str(tmp_path / "b")]) == 0
    for name in ("scores.csv", "track.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


# config helpers

def test_angle_grid():
    np.testing.assert_array_equal(config.angle_grid_from(None), np.arange(-60.0, 61.0))
    assert config.angle_grid_from({"start": -10, "stop": 10, "step": 5}).tolist() == [-10, -5, 0, 5, 10]
    with pytest.raises(config.ConfigError):
        config.angle_grid_from({"start": 5, "stop": 0})


def test_scene_builders():
    doc = {"scatterers": [{"amplitude": 2.0, "base_range_m": 1.5}], "chirps": 100}
    spec = config.dynamic_scene_from(config.validate(doc, config.DYNAMIC_SCENE_SCHEMA), seed=4)
    assert spec.chirps == 100 and spec.rng_seed == 4 and spec.scatterers[0].amplitude == 2.0
    st = config.static_scene_from({"preset": "static-sit", "noise_power": 0.5}, seed=1)
    assert st.noise_power == 0.5 and len(st.targets) == 2
    with pytest.raises(config.ConfigError):
        config.validate({"scatterers": []}, config.DYNAMIC_SCENE_SCHEMA)


# rendering helpers

def test_grid_layout():
    tiles = [np.full((2, 3), v, dtype=np.uint8) for v in (1, 2, 3)]
    g = render.grid(tiles, cols=2, gap=1, fill=9)
    assert g.shape == (5, 7)
    assert g[0, 0] == 1 and g[0, 4] == 2 and g[3, 0] == 3 and g[2, 0] == 9 and g[4, 6] == 9


def test_overlay_marks_chosen_lump_red():
    x = np.zeros((20, 30))
    x[3:7, 3:7] = 2.0
    x[12:15, 20:25] = 1.0
    lumps = lumps_from_frame(x)
    rgb = render.overlay_lumps(x, lumps, lumps[0])
    assert tuple(rgb[3, 3]) == render.RED
    assert tuple(rgb[12, 20]) == render.BLUE
    assert tuple(rgb[5, 5]) == (255, 255, 255)  # interior keeps its gray level
    assert render.to_u8(np.zeros((2, 2))).max() == 0
