import json
import math
import os

import pytest

import membrane as mb


def test_sphere_measures():
    c = mb.sphere(1024)
    w = mb.measures(c)
    assert abs(w["area"] - 4 * math.pi) < 4e-3 * math.pi
    assert abs(w["volume"] - 4 * math.pi / 3) < 0.02


def test_sigma_constants():
    sigma, sigma_hat = mb.sigma_constants()
    assert abs(sigma - 8 / 3) < 1e-8
    assert abs(sigma_hat - 2) < 1e-8


def test_energy_variants_and_gradient():
    c, u = mb.capped_cylinder(129)
    f = mb.energy(c, u, 0.05, mb.Variant.F_eps)
    e = mb.energy(c, u, 0.05, mb.Variant.E_eps)
    assert abs(f["area"] - 4 * math.pi) < 1e-2
    assert f["total"] != e["total"]
    g = mb.gradient(c, u, 0.05)
    assert len(g["dx"]) == len(c)
    assert g["energy"]["total"] == pytest.approx(f["total"], rel=1e-12)


def test_errors_are_translated():
    with pytest.raises(mb.MembraneError, match="InvalidArgument"):
        mb.sphere(2)
    with pytest.raises(mb.MembraneError, match="UnknownScenario"):
        mb.scenario_json("no_such_scenario")


def test_custom_material():
    mat = mb.Material()
    mat.Hs = mb.Law(2.0, 2.0)
    c = mb.sphere(513)
    g = mb.gradient(c, [1.0] * len(c), 0.05, mb.Variant.E_eps, mat)
    assert max(math.hypot(a, b) for a, b in zip(g["dx"], g["dy"])) < 1e-3


def test_recovery_gap_positive():
    r = mb.recovery("sphere_with_interface", 0.1)
    assert r["gap"] > 0
    assert r["limit"]["total"] == pytest.approx(10 * math.pi / 3, rel=1e-3)


def test_short_flow_is_monotone():
    c, u = mb.capped_cylinder(65)
    res = mb.evolve(c, u, mb.Variant.E_eps, 0.05, max_steps=30)
    es = res["energies"]
    assert all(b <= a for a, b in zip(es, es[1:]))
    assert res["max_constraint_drift"] < 1e-6


def test_scenario_roundtrip_and_run(tmp_path):
    names = mb.builtin_scenarios()
    assert "paper_fig_kink" in names
    s = json.loads(mb.scenario_json("paper_fig_kink"))
    s["geometry"]["nodes"] = 65
    s["flow"]["max_steps"] = 5
    s["output"]["plots"] = False
    out = mb.run_scenario(json.dumps(s), str(tmp_path))
    assert len(out["runs"]) == 2
    for run in out["runs"]:
        assert os.path.isfile(os.path.join(run["dir"], "trajectory.csv"))
    report = mb.compare_runs([r["dir"] for r in out["runs"]])
    assert "E_eps" in report and "F_eps" in report


def test_validate():
    assert all(ok for _, ok, _ in mb.validate())
