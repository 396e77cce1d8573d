"""Error quantities and CSV output."""

import csv

import numpy as np
import pytest

from msbiot.grid import build_hierarchy
from msbiot.medium import build_medium
from msbiot import fine_fem as ff
from msbiot import time_integrator as ti
from msbiot import diagnostics as dg


def _setup(n=8):
    grid = build_hierarchy(2, n)
    rng = np.random.default_rng(5)
    med = build_medium(np.exp(rng.uniform(0, 2, n * n)))
    spaces = ff.build_spaces(grid, ff.BoundarySpec.model1())
    ops = ff.assemble_operators(spaces, med)
    ref = ti.SystemState(rng.standard_normal(spaces.ndof_u),
                         rng.standard_normal(spaces.ndof_g),
                         rng.standard_normal(spaces.ndof_p), 1.0)
    cand = ti.SystemState(ref.u + 0.1 * rng.standard_normal(spaces.ndof_u),
                          ref.g + 0.1 * rng.standard_normal(spaces.ndof_g),
                          ref.p + 0.1 * rng.standard_normal(spaces.ndof_p),
                          1.0)
    return grid, med, ops, ref, cand


def test_identical_states_zero_errors():
    grid, med, ops, ref, _ = _setup()
    r = dg.compute_errors(ref, ref, ops, grid, med)
    assert r.values() == (0.0, 0.0, 0.0, 0.0)


def test_errors_positive_and_scale_invariant():
    grid, med, ops, ref, cand = _setup()
    r = dg.compute_errors(cand, ref, ops, grid, med)
    assert all(v > 0 for v in r.values())
    scaled = dg.compute_errors(
        ti.SystemState(2 * cand.u, 2 * cand.g, 2 * cand.p, 1.0),
        ti.SystemState(2 * ref.u, 2 * ref.g, 2 * ref.p, 1.0),
        ops, grid, med)
    assert np.allclose(scaled.values(), r.values())


def test_pressure_error_against_hand_computation():
    grid, med, ops, ref, cand = _setup()
    r = dg.compute_errors(cand, ref, ops, grid, med)
    # P0 mass norm is h * euclidean norm, so h cancels in the ratio
    expect = np.linalg.norm(cand.p - ref.p) / np.linalg.norm(ref.p)
    assert np.isclose(r.e_l2_p, expect)


def test_velocity_weight_modes_differ():
    grid, med, ops, ref, cand = _setup()
    paper = dg.compute_errors(cand, ref, ops, grid, med, "paper")
    energy = dg.compute_errors(cand, ref, ops, grid, med, "energy")
    assert not np.isclose(paper.e_l2_g, energy.e_l2_g)
    with pytest.raises(ValueError):
        dg.compute_errors(cand, ref, ops, grid, med, "bogus")


def test_zero_reference_raises():
    grid, med, ops, ref, cand = _setup()
    zero = ti.SystemState(np.zeros_like(ref.u), np.zeros_like(ref.g),
                          np.zeros_like(ref.p), 1.0)
    with pytest.raises(ZeroDivisionError):
        dg.compute_errors(cand, zero, ops, grid, med)


def test_triangle_inequality_on_differences():
    grid, med, ops, ref, cand = _setup()
    mid = ti.SystemState(0.5 * (ref.u + cand.u), 0.5 * (ref.g + cand.g),
                         0.5 * (ref.p + cand.p), 1.0)
    r_full = dg.compute_errors(cand, ref, ops, grid, med)
    r_half = dg.compute_errors(mid, ref, ops, grid, med)
    for half, full in zip(r_half.values(), r_full.values()):
        assert half <= 0.5 * full + 1e-12


def test_zero_report_and_csv(tmp_path):
    meta = {"N": 4, "n": 16, "Ju": 6, "Jg": 2, "Jt": 10,
            "scheme": "fixed_stress", "field": "blobs:10000:0"}
    rows = [dg.zero_report(meta),
            dg.ErrorReport(0.123456789, 0.2, 0.3, 0.4, **meta)]
    path = tmp_path / "errors.csv"
    dg.write_csv(path, rows)
    with open(path) as fh:
        data = list(csv.reader(fh))
    assert data[0] == dg.CSV_HEADER
    assert data[1][7:] == ["0", "0", "0", "0"]
    assert data[2][0] == "4" and data[2][5] == "fixed_stress"
    assert data[2][7] == "0.123457"  # 6 significant digits
