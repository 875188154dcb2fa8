import json
from pathlib import Path

import numpy as np
import pytest
from PIL import Image

from dfbg import io
from dfbg.cli import main
from dfbg.config import ConfigError, PipelineConfig, dump_config, load_config, parse_config_text

DEFAULT_FINGERPRINT = "df47a1366b01a67f"


# ---- config ---------------------------------------------------------------

def test_default_fingerprint_is_stable():
    assert PipelineConfig().fingerprint() == DEFAULT_FINGERPRINT


def test_fingerprint_ignores_paths_and_workers():
    cfg = PipelineConfig(input="a", output="b", workers=4)
    assert cfg.fingerprint() == DEFAULT_FINGERPRINT
    assert PipelineConfig(history=5).fingerprint() != DEFAULT_FINGERPRINT


def test_fractions_tuples_and_comments(tmp_path):
    path = tmp_path / "c.cfg"
    path.write_text("# comment\nbg_color_var = 45/4, 45/4, 135/4\nspatial_candidates = 1,1; 2,2\n"
                    "adaptive = yes  # inline\n")
    cfg = load_config(path, {"history": "7"})
    assert cfg.kernel.bg_color_var == (11.25, 11.25, 33.75)
    assert cfg.candidates.spatial == ((1.0, 1.0), (2.0, 2.0))
    assert cfg.adaptive and cfg.history == 7


def test_dump_round_trips():
    cfg = PipelineConfig(model="jkde", adaptive=True, confidence_band=(0.1, 0.9))
    assert load_config(None, parse_config_text(dump_config(cfg))) == cfg


@pytest.mark.parametrize("values", [
    {"nonsense": "1"}, {"history": "0"}, {"model": "gmm"}, {"adaptive": "maybe"},
    {"bg_color_var": "1,2"}, {"bg_stay": "x"}, {"model": "pixelwise-kde", "adaptive": "true"},
    {"confidence_band": "0.2,1.5"},
])
def test_bad_config_values(values):
    with pytest.raises(ConfigError):
        load_config(None, values)


def test_bad_config_line():
    with pytest.raises(ConfigError):
        parse_config_text("history 10")


# ---- io -------------------------------------------------------------------

def test_sequence_round_trip_and_ids(tmp_path, rng):
    frames = [rng.integers(0, 256, (6, 7, 3)).astype(float) for _ in range(3)]
    truth = [rng.random((6, 7)) > 0.5 for _ in range(3)]
    io.write_sequence(tmp_path, frames, truth, start=4)
    loaded = io.load_sequence(tmp_path / "input", with_ids=True)
    assert [fid for fid, _ in loaded] == [4, 5, 6]
    assert all(np.array_equal(f, g) for (_, f), g in zip(loaded, frames))
    t = io.load_truth(tmp_path / "truth")
    assert all(np.array_equal(t[i + 4], truth[i]) for i in range(3))


def test_ppm_and_grayscale_input(tmp_path):
    Image.fromarray(np.full((3, 4, 3), 9, np.uint8)).save(tmp_path / "f001.ppm")
    Image.fromarray(np.full((3, 4), 7, np.uint8)).save(tmp_path / "f002.pgm")
    a, b = io.load_sequence(tmp_path)
    assert a.shape == b.shape == (3, 4, 3) and b.max() == 7


def test_empty_directory_is_a_data_error(tmp_path):
    with pytest.raises(io.DataError):
        io.load_sequence(tmp_path)
    with pytest.raises(io.DataError):
        io.load_sequence(tmp_path / "missing")


def test_mixed_sizes_are_rejected(tmp_path):
    Image.fromarray(np.zeros((3, 4, 3), np.uint8)).save(tmp_path / "a1.png")
    Image.fromarray(np.zeros((4, 4, 3), np.uint8)).save(tmp_path / "a2.png")
    with pytest.raises(io.DataError, match="expected"):
        io.load_sequence(tmp_path)


def test_truth_with_gray_values_is_rejected(tmp_path):
    Image.fromarray(np.array([[0, 127]], np.uint8)).save(tmp_path / "t1.png")
    with pytest.raises(io.DataError):
        io.load_truth(tmp_path)


def test_posterior_is_stored_with_16_bits(tmp_path, rng):
    p = rng.random((5, 5))
    io.write_posterior(tmp_path / "p.png", p)
    back = io.read_posterior(tmp_path / "p.png")
    assert np.max(np.abs(back - p)) <= 0.5 / 65535 + 1e-15
    with Image.open(tmp_path / "p.png") as im:
        assert np.asarray(im).dtype == np.uint16 or im.mode.startswith("I")


def test_frames_must_be_8_bit(tmp_path):
    with pytest.raises(ValueError):
        io.write_frame(tmp_path / "x.png", np.full((2, 2, 3), 300.0))


# ---- cli ------------------------------------------------------------------

@pytest.fixture(scope="module")
def small_video(tmp_path_factory):
    root = tmp_path_factory.mktemp("video")
    assert main(["synth", "--kind", "movingSquare", "--size", "32x32", "--frames", "30",
                 "--magnitude", "2", "--square-size", "8", "--seed", "4", "--out", str(root)]) == 0
    return root


def test_run_writes_outputs_and_report(small_video, tmp_path, capsys):
    out = tmp_path / "out"
    assert main(["run", "--in", str(small_video / "input"), "--truth", str(small_video / "truth"),
                 "--out", str(out)]) == 0
    report = json.loads((out / "report.json").read_text())
    assert report["pooled_f"] == 1.0 and report["mean_f"] == 1.0
    assert report["config_fingerprint"] == DEFAULT_FINGERPRINT
    assert len(list((out / "posterior").glob("*.png"))) == 30
    assert len(list((out / "masks").glob("*.png"))) == 30
    assert json.loads((out / "manifest.json").read_text())["complete"] is True
    assert "per frame" in capsys.readouterr().out

    # masks scored offline give the same numbers
    assert main(["eval", "--masks", str(out / "masks"), "--truth", str(small_video / "truth"),
                 "--report", str(tmp_path / "r.json")]) == 0
    assert json.loads((tmp_path / "r.json").read_text())["pooled_f"] == report["pooled_f"]


def _tree_bytes(root: Path) -> dict:
    return {p.relative_to(root).as_posix(): p.read_bytes()
            for p in sorted(root.rglob("*.png"))}


def test_output_bytes_do_not_depend_on_worker_count(small_video, tmp_path):
    outs = []
    for w in ("1", "3"):
        out = tmp_path / f"w{w}"
        assert main(["run", "--in", str(small_video / "input"), "--out", str(out),
                     "--workers", w, "--adaptive"]) == 0
        outs.append(_tree_bytes(out))
    assert outs[0] == outs[1] and len(outs[0]) == 60


def test_env_var_sets_default_workers(monkeypatch):
    from dfbg.likelihood import default_workers
    monkeypatch.setenv("DFBG_WORKERS", "3")
    assert default_workers() == 3


@pytest.mark.parametrize("argv, code", [
    (["run", "--in", "x"], 1),                                  # no output dir
    (["run", "--model", "gmm"], 1),                             # argparse choice
    (["run", "--set", "history=zero"], 1),
    (["run", "--config", "/nonexistent.cfg"], 1),
    (["synth", "--kind", "movingSquare", "--size", "4x4", "--out", "/tmp/x"], 1),
])
def test_config_errors_exit_1(argv, code):
    assert main(argv) == code


def test_data_errors_exit_2(tmp_path):
    (tmp_path / "empty").mkdir()
    assert main(["run", "--in", str(tmp_path / "empty"), "--out", str(tmp_path / "o")]) == 2
    assert main(["eval", "--masks", str(tmp_path / "empty"), "--truth", str(tmp_path / "empty")]) == 2


def test_missing_mask_in_eval_exits_2(small_video, tmp_path):
    masks = tmp_path / "m"
    masks.mkdir()
    io.write_mask(masks / "frame_000000.png", np.zeros((32, 32), bool))
    assert main(["eval", "--masks", str(masks), "--truth", str(small_video / "truth")]) == 2


def test_oracle_subcommand(capsys):
    assert main(["oracle", "--instances", "2", "--sizes", "6"]) == 0
    assert json.loads(capsys.readouterr().out)["max_relative_error"] < 1e-10
