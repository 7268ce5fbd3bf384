import math

import numpy as np
import pytest

import pslab


def test_flux_params_and_kernel():
    fp = pslab.FluxParams()
    assert fp.Phi == pytest.approx(math.pi)
    assert fp.alpha == pytest.approx(0.625)
    # unit mass of the heat kernel, radial quadrature
    r = np.linspace(0.0, 6.0, 60001)
    f = np.array([pslab.fundamental_solution(x, 2.0, 0.1) for x in r]) * 2 * np.pi * r
    assert np.trapezoid(f, r) == pytest.approx(1.0, rel=1e-6)


def test_flux_at_zero_constraint():
    fp = pslab.FluxParams()
    for t0 in (0.5, 2.0, 8.0):
        p0 = pslab.p0_from_t0(t0, fp)
        assert pslab.phi_sum(0.0, fp, p0, t0) == pytest.approx(1.0, abs=1e-12)


def test_optimizer_reproduces_constrained_options():
    r = pslab.optimize_ic("4")
    assert r["converged"]
    assert r["p0"] == pytest.approx(21.737, rel=2e-3)
    assert r["t0"] == pytest.approx(1.737, rel=2e-3)
    c = pslab.optimize_ic("continuity:10")
    assert c["t0"] == pytest.approx(3.568, rel=0.05)


def test_classification_settles():
    fp = pslab.FluxParams()
    p0 = pslab.p0_from_t0(2.0, fp)
    short = pslab.classify_phi_sum(fp, p0, 2.0, settle=False)
    full = pslab.classify_phi_sum(fp, p0, 2.0)
    assert not full["truncated"]
    assert full["label"] in {"i", "ii", "iii", "iv"}
    assert len(full["critical_points"]) >= len(short["critical_points"])


def test_mesh_generation():
    m = pslab.generate_mesh([(-3.5, -4.0, 0.5, 1.0)], h=0.4)
    assert m["valid"]
    full, excl = m["full"], m["exclusion"]
    assert full["nodes"].shape[1] == 2
    assert excl["triangles"].max() < excl["nodes"].shape[0]
    assert set(np.unique(full["tags"])) == {0, 1}
    assert np.all(excl["tags"] == 0)
    assert len(m["node_map"]) == excl["nodes"].shape[0]
    with pytest.raises(pslab.InvalidInput):
        pslab.generate_mesh([(0.0, 0.0, -1.0, 1.0)])


def test_scenarios_listed():
    names = [n for n, _ in pslab.scenarios()]
    assert names == ["single", "two-near", "two-far", "ten", "d-sweep", "nonzero-C"]
    with pytest.raises(pslab.InvalidInput):
        pslab.run_scenario("bogus")


def test_short_run_and_replay():
    out = pslab.run_scenario("single", {"h": "0.4", "dt": "0.08", "T": "2"})
    t = out["t"]
    assert len(t) == 26 and t[-1] == pytest.approx(2.0)
    assert out["max_mass_drift"] < 1e-8
    assert np.all(np.diff(out["c_star"]) >= 0)
    assert out["csv"].splitlines()[0] == "t,l2,h1,gradl2,c_star,rel_err,mass_s,mass_p,identity_residual"
    again = pslab.run_config(out["meta"])
    assert again["csv"] == out["csv"]
