from dataclasses import replace

import numpy as np
import pytest

from qdcascade.entanglement import analyze
from qdcascade.explorer import (Axis, SweepSpec, apply_parameter, filter_sweep, local_maxima,
                                optimize_gamma, sweep)
from qdcascade.model import SystemParams, derived_detunings


def test_axis_validation():
    with pytest.raises(ValueError):
        Axis("delta_cx", 0, 1, 3)
    with pytest.raises(ValueError):
        Axis("delta_CX", 0, 1, 1)
    with pytest.raises(ValueError):
        Axis("delta_CX", 1, 0, 3)
    with pytest.raises(ValueError):
        SweepSpec(Axis("delta_C", 0, 1, 2), Axis("delta_C", 0, 1, 2))
    with pytest.raises(ValueError):
        SweepSpec(Axis("delta_C", 0, 1, 2), objective="max")


def test_sweep_semantics(symmetric):
    p, _ = apply_parameter(symmetric, 0.1, "delta_CX", 0.2)
    assert p.E_C_H - symmetric.E_C_H == pytest.approx(0.2)
    assert p.E_C_V - symmetric.E_C_V == pytest.approx(0.2)
    q, _ = apply_parameter(symmetric, 0.1, "delta_C", 0.45)
    assert q.E_C_H - symmetric.E_C_H == pytest.approx(0.1)
    assert q.E_C_V - symmetric.E_C_V == pytest.approx(-0.1)
    assert apply_parameter(symmetric, 0.1, "window_width", 0.3) == (symmetric, 0.3)
    assert apply_parameter(symmetric, 0.1, "Omega_V", 0.02)[0].Omega_V == 0.02


def test_sweep_layout_and_library_equality(asymmetric):
    spec = SweepSpec(Axis("delta_C", 0.0, 0.4, 3), Axis("delta_CX", -0.2, 0.2, 4), fixed=asymmetric)
    res = sweep(spec)
    assert len(res.records) == 12 and res.shape == (3, 4)
    assert [r.values for r in res.records[:5]] == [
        (0.0, -0.2), (0.0, pytest.approx(-0.2 / 3)), (0.0, pytest.approx(0.2 / 3)), (0.0, 0.2),
        (0.2, -0.2)]
    r = res.records[6]
    q, _ = apply_parameter(asymmetric, 0.1, "delta_C", r.values[0])
    q, _ = apply_parameter(q, 0.1, "delta_CX", r.values[1])
    direct = analyze(q, 0.1)
    assert r.gamma_abs == direct.gamma_abs and r.pair == direct.pair.label


def test_sweep_determinism_and_parallel_equality(symmetric):
    spec = SweepSpec(Axis("delta_CX", -0.3, 0.3, 9), Axis("window_width", 0.02, 0.2, 3),
                     fixed=symmetric)
    a, b = sweep(spec), sweep(spec)
    c = sweep(spec, threads=3)
    assert a.records == b.records == c.records


def test_failed_cells_are_recorded():
    fixed = SystemParams(Omega_V=0.0)
    spec = SweepSpec(Axis("Omega_H", 0.0, 0.1, 3), fixed=fixed)
    res = sweep(spec)
    bad = res.records[0]
    assert not bad.converged and "no radiative channel" in bad.error
    assert np.isnan(bad.gamma_abs)
    assert res.records[1].converged


def test_symmetric_profile_peaks_at_zero(symmetric):
    spec = SweepSpec(Axis("delta_CX", -0.5, 0.5, 41), fixed=symmetric)
    res = sweep(spec)
    step = 1.0 / 40
    assert abs(res.best().values[0]) <= step
    # doubling the resolution moves the located optimum by less than one coarse step
    fine = sweep(replace(spec, axis1=Axis("delta_CX", -0.5, 0.5, 81)))
    assert abs(fine.best().values[0] - res.best().values[0]) < step


def test_equal_splittings_line_is_high(symmetric):
    spec = SweepSpec(Axis("Omega_H", 0.03, 0.19, 9), Axis("delta_CX", -0.3, 0.3, 13),
                     fixed=symmetric)
    g = sweep(spec).grid()
    i = int(np.argmin(np.abs(spec.axis1.values - 0.11)))
    assert spec.axis1.values[i] == pytest.approx(0.11)
    assert np.nanmax(g[i]) >= 0.45


def test_local_maxima():
    assert local_maxima([0, 1, 0, 2, 0, 3, 0]) == [1, 3, 5]
    assert local_maxima([0, 1, 1, 0]) == []
    assert local_maxima([0, np.nan, 1, 0, 2, 1]) == [4]


def test_objective_variants(symmetric):
    spec = SweepSpec(Axis("window_width", 0.01, 1.0, 4), fixed=symmetric, objective="qe")
    assert sweep(spec).best().values[0] == 1.0


def test_optimizer_symmetric(symmetric):
    r = optimize_gamma(symmetric, free=("delta_CX",), grid=21)
    assert abs(r.delta_CX) <= 1.0 / 20
    assert r.gamma_abs == pytest.approx(0.49, abs=0.01)
    assert r.gamma_abs >= r.grid_gamma_abs
    assert derived_detunings(r.params).delta_C == pytest.approx(0.25)


def test_optimizer_not_worse_than_grid_and_deterministic(asymmetric):
    a = optimize_gamma(asymmetric, grid=9)
    b = optimize_gamma(asymmetric, grid=9)
    assert a == b
    assert a.gamma_abs >= a.grid_gamma_abs
    assert 0.0 <= a.delta_C <= 0.6 and -0.5 <= a.delta_CX <= 0.5


def test_optimizer_tie_goes_to_smallest_delta_c():
    # fully H/V-degenerate system: gamma' is insensitive to the sign of delta_C
    p = SystemParams(E_X_H=0, E_X_V=0, E_C_H=0, E_C_V=0)
    r = optimize_gamma(p, free=("delta_C",), bounds={"delta_C": (-0.2, 0.2)}, grid=5)
    assert r.grid_gamma_abs == pytest.approx(analyze(p.with_detunings(delta_C=0.0)).gamma_abs)


def test_optimizer_errors(symmetric):
    with pytest.raises(ValueError):
        optimize_gamma(symmetric, free=("Omega_H",))
    with pytest.raises(ValueError):
        optimize_gamma(symmetric, free=("delta_C",), bounds={"delta_C": (0.0, np.inf)})
    # constructible, but every cell raises: both couplings vanish
    dark = SystemParams(Omega_H=0.0, Omega_V=0.0)
    with pytest.raises(RuntimeError, match="every grid cell"):
        optimize_gamma(dark, free=("delta_C",), grid=3)


def test_filter_sweep(asymmetric):
    widths = [0.005, 0.02, 0.1, 0.5]
    recs = filter_sweep(asymmetric, widths)
    assert [r.width for r in recs] == widths
    qe = [r.qe for r in recs]
    assert qe == sorted(qe)
    with pytest.raises(ValueError):
        filter_sweep(asymmetric, [0.1, 0.01])
    with pytest.raises(ValueError):
        filter_sweep(asymmetric, [0.0, 0.1])
