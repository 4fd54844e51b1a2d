import json
import math

import numpy as np
import pytest

import simcav


def test_closed_forms():
    p = simcav.SystemParams(1.0, 0.4, coupling=0.3, photon_n=2)
    r = simcav.rabi_radical(p)
    assert r == pytest.approx(math.hypot(0.2, 0.3 * math.sqrt(3)), rel=1e-15)
    plus, minus = simcav.eigenvalues(p)
    assert plus - minus == pytest.approx(2 * r, rel=1e-15)
    v = simcav.potential_matrix(p, simcav.ModeProfile.mesa())
    assert np.allclose(np.sort(np.linalg.eigvalsh(v)), [minus, plus], atol=1e-14)
    a, b = simcav.identity_tan_forms(p)
    assert a == pytest.approx(b, rel=1e-14)
    assert a == pytest.approx(math.tan(simcav.mixing_angle(p)), rel=1e-14)


def test_degenerate_frame_raises():
    p = simcav.SystemParams(1.0, 0.0, coupling=1.0)
    frame = simcav.DressedFrame(p, simcav.ModeProfile.sine_squared(-3.0, 3.0))
    with pytest.raises(simcav.DegenerateFrame):
        frame.theta(-5.0)
    with pytest.raises(simcav.SimcavError):
        frame.theta(-5.0)


def test_coherent_weights_sum_to_one():
    w = simcav.coherent_sector_weights(4.0, 24)
    assert len(w) == 24
    assert sum(x for _, x in w) == pytest.approx(1.0, abs=1e-12)


def test_frozen_rabi_series():
    p = simcav.SystemParams(1e6, 1.0, coupling=1.0, photon_n=3)
    g = simcav.Grid(-20.0, 20.0, 128, 0.001, 1000)
    s = simcav.simulate(simcav.InitialCondition(), p, simcav.ModeProfile.mesa(), g, stride=100)
    assert s["t"].shape == (11,)
    r = math.sqrt(0.25 + 4.0)
    expected = 1 - 2 * 4.0 / r**2 * np.sin(r * s["t"]) ** 2
    assert np.max(np.abs(s["W"] - expected)) < 1e-8
    assert np.max(np.abs(s["norm"] - 1.0)) < 1e-12


def test_dressed_and_bare_agree_on_a_mesa():
    p = simcav.SystemParams(100.0, 0.4, coupling=1.0)
    g = simcav.Grid(-40.0, 40.0, 256, 0.01, 200)
    ic = simcav.InitialCondition(sigma_z=1.5, p0=2.0, preparation="dressed-plus")
    prof = simcav.ModeProfile.mesa()
    a_bare, b_bare = simcav.final_state(ic, p, prof, g, "bare")
    a_dr, b_dr = simcav.final_state(ic, p, prof, g, "dressed")
    dz = g.dz
    dist = math.sqrt(dz * (np.sum(np.abs(a_bare - a_dr) ** 2) + np.sum(np.abs(b_bare - b_dr) ** 2)))
    assert dist < 1e-3


def test_grid_errors():
    with pytest.raises(simcav.InvalidArgument):
        simcav.Grid(-1.0, 1.0, 100, 0.01, 1)
    g = simcav.Grid(-20.0, 20.0, 128, 0.01, 1)
    ic = simcav.InitialCondition(sigma_z=1.5, p0=40.0)
    with pytest.raises(simcav.GridTooCoarse):
        simcav.simulate(ic, simcav.SystemParams(1.0, 0.0), simcav.ModeProfile.mesa(), g)


def test_run_config(tmp_path):
    names = [n for n, _ in simcav.scenarios()]
    assert "basis-equivalence" in names
    cfg = {"scenario": "identities", "mass": 1.0, "detuning": 1.0, "coupling": 1.0}
    status, _ = simcav.run_config(json.dumps(cfg), str(tmp_path / "out"))
    assert status == 0
    manifest = json.loads((tmp_path / "out" / "manifest.json").read_text())
    assert manifest["assertion"]["passed"] is True
    assert manifest["code-version"] == simcav.__version__

    with pytest.raises(simcav.InvalidArgument, match="mass"):
        simcav.run_config(json.dumps({"scenario": "rabi"}), str(tmp_path / "bad"))
