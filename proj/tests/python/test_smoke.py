import math

import pytest

import pxpscar


def test_version_and_backend():
    assert pxpscar.__version__ == "0.3.0"
    assert pxpscar.dense_backend_ok()


def test_constraint_constants():
    k = pxpscar.solve_constraint()
    assert abs(k["h0"] - 0.0506656) < 1e-6
    assert abs(k["tau"] - 2 * math.pi / k["level_spacing"]) < 1e-12
    assert abs(pxpscar.optimal_h2_analytic() - (0.5 - 1 / math.sqrt(5))) < 1e-15


def test_ansatz_is_positive_and_decreasing():
    h = pxpscar.ansatz_couplings(6)
    assert len(h) == 5
    assert all(a > b > 0 for a, b in zip(h, h[1:]))


def test_basis_dimensions():
    assert pxpscar.basis_summary(12)["dim"] == 322
    assert pxpscar.basis_summary(8, "open")["dim"] == 55
    states = pxpscar.basis_states(6)
    assert len(states) == 18
    assert all(s & ((s << 1) | (s >> 5)) & 0b111111 == 0 for s in states)


def test_odd_size_is_a_value_error():
    with pytest.raises(ValueError, match="even"):
        pxpscar.basis_summary(7)


def test_quench_first_revival():
    r = pxpscar.quench(14, "ansatz", t_max=6.0, dt=0.1)
    assert len(r["t"]) == len(r["g"]) == len(r["entropy"]) == 61
    assert r["g"][0] == pytest.approx(1.0)
    peak = r["peaks"][0]
    assert abs(peak["t"] - pxpscar.solve_constraint()["tau"]) < 0.05
    assert peak["g"] > 0.999


def test_deformation_beats_bare_chain():
    deformed = pxpscar.revival_peaks(16, "ansatz")[0]["g"]
    bare = pxpscar.revival_peaks(16, None)[0]["g"]
    assert deformed > bare


def test_spectrum_band_and_levels():
    s = pxpscar.spectrum(16, "k0,I+", couplings="ansatz", entropy=True)
    assert len(s["energies"]) == len(s["overlaps"]) == len(s["entropies"])
    assert sum(s["overlaps"]) == pytest.approx(1.0)
    assert len(s["band"]["members"]) == 17
    with pytest.raises(pxpscar.NumericError, match="insufficient-data"):
        pxpscar.r_statistic(list(s["energies"]), positive_only=True)
    values = pxpscar.spectrum(20, "k0,I+", step=1, vectors=False)
    assert "overlaps" not in values
    stats = pxpscar.r_statistic(list(values["energies"]), positive_only=True)
    assert 0.386 < stats["mean_r"] < 0.53


def test_su2_report_improves_on_bare_chain():
    deformed = pxpscar.su2_report(16)
    bare = pxpscar.su2_report(16, None)
    assert deformed["r_spread"] < bare["r_spread"]


def test_costs_and_optimizer():
    h2 = [0.05]
    assert pxpscar.cost("fsa", 12, h2) >= 0.0
    assert math.isinf(pxpscar.cost("fsa", 12, [0.5]))
    r = pxpscar.optimize("fsa", 12, 2, max_iterations=20)
    assert r["trace"]["best_cost"] <= pxpscar.cost("fsa", 12, pxpscar.ansatz_couplings(2))
    with pytest.raises(ValueError):
        pxpscar.optimize("nope", 12, 2)


def test_toy_tower():
    d = pxpscar.toy(8, seed=3, revivals=5)
    assert max(d["tower_residuals"]) < 1e-10
    assert d["support_count"] == 9
    assert d["max_revival_deviation"] < 1e-10


def test_dense_cap_maps_to_too_large():
    with pytest.raises(MemoryError):
        pxpscar.spectrum(28, "k0,I+", vectors=False)
