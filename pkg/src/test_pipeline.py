#!/usr/bin/env python3
"""
End-to-end tests for the lumedepth command line
===============================================

Each test drives main() with argv, the same way the console does, and checks
exit codes, written files and the JSON error line on stderr.
"""
import json
import logging

import numpy as np
import pytest

from conftest import plane_scene, tube_scene
from src.bundle import read_bundle, read_json, read_ppm
from src.config import get_config
from src.pipeline import HISTORY_FILE, PLY_FILE, main
from src.utils import LossHistory


def _write(path, data):
    path.write_text(json.dumps(data), encoding="utf-8")
    return path


def _gen(tmp_path, scene, name="gt"):
    scene_path = _write(tmp_path / f"{name}_scene.json", scene.to_dict())
    out = tmp_path / name
    assert main(["--quiet", "gen", str(scene_path), "-o", str(out)]) == 0
    return out


def _error_line(capsys):
    lines = [line for line in capsys.readouterr().err.splitlines() if line.strip()]
    return json.loads(lines[-1])


def test_gen_writes_a_complete_bundle(tmp_path):
    scene = plane_scene()
    out = _gen(tmp_path, scene)
    for name in ("image.ppm", "depth.pfm", "normals.pfm", "albedo.pfm", "meta.json"):
        assert (out / name).exists()
    meta = read_json(out / "meta.json")
    assert meta["spec_hash"] == scene.spec_hash()
    assert read_bundle(out).depth[8, 8] == 2.0


def test_eval_against_itself_is_perfect(tmp_path):
    gt = _gen(tmp_path, plane_scene())
    report_path = tmp_path / "report.json"
    assert main(["--quiet", "eval", str(gt), str(gt), "-o", str(report_path)]) == 0

    report = read_json(report_path)
    assert report["mae"] == 0.0
    assert report["rmse"] == 0.0
    assert report["delta1"] == 1.0
    assert report["image_mae"] == 0.0
    assert report["ssim"] == pytest.approx(1.0, abs=1e-12)
    assert report["normal_mae_deg"] == pytest.approx(0.0, abs=1e-4)
    assert "MAE" in report_path.with_suffix(".txt").read_text()


def test_render_reproduces_the_bundle_image(tmp_path):
    gt = _gen(tmp_path, tube_scene(size=16))
    out = tmp_path / "rendered.ppm"
    assert main(["--quiet", "render", str(gt), "-o", str(out)]) == 0
    assert np.max(np.abs(read_ppm(out) - read_ppm(gt / "image.ppm"))) <= 1.0 / 255 + 1e-12


def test_recover_writes_prediction_history_and_ply(tmp_path):
    scene = plane_scene()
    gt = _gen(tmp_path, scene)
    camera = _write(tmp_path / "camera.json", scene.camera.to_dict())
    light = _write(tmp_path / "light.json", scene.light.to_dict())
    config = _write(tmp_path / "recovery.json", {"steps": 3, "step_size": 1e-3})
    out = tmp_path / "pred"

    code = main(["--quiet", "recover", str(gt / "image.ppm"), "--camera", str(camera),
                 "--light", str(light), "--config", str(config), "--ply", "-o", str(out)])
    assert code == 0

    pred = read_bundle(out)
    assert pred.depth.shape == scene.camera.shape
    assert np.all(pred.depth > 0)
    assert len(LossHistory.read_csv(out / HISTORY_FILE)) == 3
    assert (out / PLY_FILE).read_text().startswith("ply\n")


def test_recover_missing_image_reports_path(tmp_path, capsys):
    scene = plane_scene()
    camera = _write(tmp_path / "camera.json", scene.camera.to_dict())
    light = _write(tmp_path / "light.json", scene.light.to_dict())
    missing = tmp_path / "nowhere.ppm"

    code = main(["--quiet", "recover", str(missing), "--camera", str(camera),
                 "--light", str(light), "-o", str(tmp_path / "pred")])
    assert code == 1
    error = _error_line(capsys)
    assert error["error"] == "FileNotFoundError"
    assert error["path"] == str(missing)
    assert not (tmp_path / "pred").exists()


def test_recover_shape_mismatch_is_a_domain_failure(tmp_path, capsys):
    gt = _gen(tmp_path, plane_scene())
    camera = _write(tmp_path / "camera.json", plane_scene(size=15).camera.to_dict())
    light = _write(tmp_path / "light.json", plane_scene().light.to_dict())

    code = main(["--quiet", "recover", str(gt / "image.ppm"), "--camera", str(camera),
                 "--light", str(light), "-o", str(tmp_path / "pred")])
    assert code == 1
    error = _error_line(capsys)
    assert error["error"] == "ShapeError"
    assert error["shapes"] == {"image": [17, 17], "camera": [15, 15]}


def test_invalid_light_json_is_a_config_error(tmp_path, capsys):
    gt = _gen(tmp_path, plane_scene())
    camera = _write(tmp_path / "camera.json", plane_scene().camera.to_dict())
    light = _write(tmp_path / "light.json", {"position": [0, 0, 0], "colour": 1})

    code = main(["--quiet", "recover", str(gt / "image.ppm"), "--camera", str(camera),
                 "--light", str(light), "-o", str(tmp_path / "pred")])
    assert code == 1
    assert _error_line(capsys)["error"] == "ConfigError"


def test_calib_writes_light_and_report(tmp_path):
    obs = tmp_path / "obs"
    obs.mkdir()
    for depth in (1.5, 3.0):
        _gen(obs, plane_scene(depth=depth), name=f"plane_{depth}")
    init = _write(tmp_path / "init.json", plane_scene().light.to_dict())
    out = tmp_path / "light_fit.json"

    assert main(["--quiet", "calib", str(obs), "--init", str(init), "-o", str(out)]) == 0
    fitted = read_json(out)
    assert fitted["gamma"] == plane_scene().light.gamma
    assert fitted["mu"] >= 0.0
    report = read_json(tmp_path / "light_fit_report.json")
    assert report["final_loss"] <= report["initial_loss"]
    assert len(report["rms_gray_levels"]) == 2


@pytest.mark.parametrize("argv", [
    ["gen", "scene.json", "-o", "out", "--bogus"],
    ["recover", "image.ppm", "-o", "out"],
    ["teleport"],
    [],
])
def test_usage_errors_exit_with_code_two(argv):
    with pytest.raises(SystemExit) as info:
        main(argv)
    assert info.value.code == 2


def test_bad_thread_count_is_a_config_error(capsys):
    assert main(["--quiet", "--threads", "0", "gen", "scene.json", "-o", "out"]) == 1
    assert _error_line(capsys)["error"] == "ConfigError"


@pytest.mark.slow
def test_runs_are_bitwise_reproducible(tmp_path):
    scene = tube_scene(size=32, seed=9)
    first = _gen(tmp_path, scene, name="first")
    second = _gen(tmp_path, scene, name="second")
    camera = _write(tmp_path / "camera.json", scene.camera.to_dict())
    light = _write(tmp_path / "light.json", scene.light.to_dict())
    config = _write(tmp_path / "recovery.json", {"steps": 50, "ablation": "photometric_only",
                                                 "init": {"jitter": 0.01}, "seed": 3})

    outputs = []
    for name in ("run_a", "run_b"):
        out = tmp_path / name
        assert main(["--quiet", "recover", str(first / "image.ppm"), "--camera", str(camera),
                     "--light", str(light), "--config", str(config), "-o", str(out)]) == 0
        assert main(["--quiet", "eval", str(out), str(first), "-o", str(out / "report.json")]) == 0
        outputs.append(out)

    for name in ("image.ppm", "depth.pfm", "normals.pfm", "albedo.pfm", "meta.json"):
        assert (first / name).read_bytes() == (second / name).read_bytes()
    for name in ("image.ppm", "depth.pfm", "normals.pfm", "albedo.pfm", HISTORY_FILE, "report.json"):
        assert (outputs[0] / name).read_bytes() == (outputs[1] / name).read_bytes()


def _console_level():
    handlers = [h for h in logging.getLogger("src").handlers
                if isinstance(h, logging.StreamHandler) and not isinstance(h, logging.FileHandler)]
    return handlers[0].level


def test_quiet_flag_reaches_config_and_console(tmp_path):
    scene_path = _write(tmp_path / "scene.json", plane_scene().to_dict())

    assert main(["--quiet", "gen", str(scene_path), "-o", str(tmp_path / "a")]) == 0
    assert get_config().processing.quiet is True
    assert _console_level() == logging.WARNING

    assert main(["gen", str(scene_path), "-o", str(tmp_path / "b")]) == 0
    assert get_config().processing.quiet is False
    assert _console_level() == logging.INFO
