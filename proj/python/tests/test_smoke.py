import json
import os
import subprocess

import numpy as np
import pytest

import cbtomo


def test_ground_state_is_normalized_and_symmetric():
    model = cbtomo.TargetModel(ec=1.0, ej=50.0)
    c = cbtomo.ground_state(model, 7)
    assert c.shape == (15,)
    assert abs(np.vdot(c, c) - 1) < 1e-12
    p = np.abs(c) ** 2
    assert np.allclose(p, p[::-1], atol=1e-12)


def test_analytic_state_overlap():
    model = cbtomo.TargetModel(ec=1.0, ej=50.0)
    a = cbtomo.analytic_state(0, model, 7)
    c = cbtomo.ground_state(model, 7)
    assert abs(np.vdot(a, c)) > 0.999


def test_project_physical_clips_negative_eigenvalue():
    rho = np.diag([1.2, -0.2, 0.0]).astype(complex)
    out = cbtomo.project_physical(rho)
    assert abs(np.trace(out) - 1) < 1e-12
    assert np.linalg.eigvalsh(out).min() > -1e-12


def test_bad_model_rejected():
    with pytest.raises(ValueError):
        cbtomo.TargetModel(ec=-1.0)


def test_presets_listed():
    assert cbtomo.presets() == ["fig3", "fig4b", "fig5", "fig6", "fig7", "fig8"]
    assert "delta_p_ghz: 3.0" in cbtomo.preset_yaml("fig6")


def test_config_error_names_key(tmp_path):
    with pytest.raises(ValueError, match="target.bogus"):
        cbtomo.run_config("kind: spectrum\ntarget: {bogus: 1}\n", str(tmp_path))


def test_run_preset_writes_manifest(tmp_path):
    manifest = cbtomo.run_preset("fig3", tmp_path)
    names = {f["name"] for f in manifest["outputs"]}
    assert {"ground_state.csv", "levels.csv", "config.yaml"} <= names
    on_disk = json.loads((tmp_path / "manifest.json").read_text())
    assert on_disk["outputs"] == manifest["outputs"]
    overlaps = {g["ej"]: g["analytic_overlap"] for g in manifest["summary"]["ground_states"]}
    assert overlaps[50.0] == pytest.approx(0.99980, abs=1e-5)
    assert overlaps[10.0] == pytest.approx(0.99855, abs=1e-5)


@pytest.mark.skipif("CBTOMO_CLI" not in os.environ, reason="CLI path not provided")
def test_cli_seed_override_is_echoed(tmp_path):
    cli = os.environ["CBTOMO_CLI"]
    subprocess.run([cli, "--seed", "11", "preset", "fig3", "--out", str(tmp_path)], check=True,
                   capture_output=True)
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["seed"] == 11
    assert "seed: 11" in (tmp_path / "config.yaml").read_text()
