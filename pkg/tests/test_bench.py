"""Tests for the benchmark driver: configs, grids, sweeps, and CSV output.

The numerical heart is covered by the kernel/prony/fode suites; here the
focus is the glue -- RunConfig validation, grid construction, the EOC table
builder, thread-count handling, and byte-exact CSV emission.
"""

from __future__ import annotations

import dataclasses
import math
import os

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import golden
from fracsum.bench import (
    DEFAULT_SWEEP,
    EocRow,
    RunConfig,
    _cell,
    _max_workers,
    _meta_line,
    build_kernel,
    emit_csv,
    eoc,
    kelvin_voigt_l_sweep,
    make_grid,
    raw_kernel,
    reduction_row,
    resolve_T,
    run_example,
    solve_once,
    trajectory_rows,
)
from fracsum.errors import ShapeError
from fracsum.examples import KV_FIRST_STEP, KV_RATIO, KV_STEPS, make_example
from fracsum.expsum import KernelSpec, build_trapezoidal_expsum, rescale
from fracsum.fode import TimeGrid
from fracsum.prony import ReductionReport, reduce_with_rescaling

# ---------------------------------------------------------------------------
# RunConfig


def test_default_config_validates():
    RunConfig().validate()


def test_default_sweep_is_halving_ladder():
    assert DEFAULT_SWEEP == tuple(2.0**-e for e in range(2, 11))
    ratios = [b / a for a, b in zip(DEFAULT_SWEEP, DEFAULT_SWEEP[1:])]
    assert all(r == 0.5 for r in ratios)


@pytest.mark.parametrize(
    ("overrides", "fragment"),
    [
        ({"command": "plot"}, "command"),
        ({"alpha": 0.0}, "alpha"),
        ({"alpha": 1.0}, "alpha"),
        ({"delta": 0.0}, "delta"),
        ({"T": 1e-6}, "T must exceed"),
        ({"L": 1}, "L must be"),
        ({"epsilon": 0.0}, "epsilon"),
        ({"example_id": 4}, "example_id"),
        ({"scheme": "RK4"}, "scheme"),
        ({"grid_kind": "log"}, "grid_kind"),
        ({"h": 0.1, "n_steps": 10}, "not both"),
        ({"h": -0.5}, "h must be positive"),
        ({"n_steps": 0}, "n_steps"),
        ({"implicit": "secant"}, "implicit"),
        ({"tol": 0.0}, "tol"),
    ],
)
def test_config_rejects_bad_values(overrides, fragment):
    cfg = RunConfig(**overrides)
    with pytest.raises(ValueError, match=fragment):
        cfg.validate()


def test_eoc_row_is_frozen():
    row = EocRow(h=0.25, error=1e-3)
    with pytest.raises(dataclasses.FrozenInstanceError):
        row.error = 0.0


# ---------------------------------------------------------------------------
# resolve_T


def test_resolve_T_example_defaults():
    assert resolve_T(RunConfig(example_id=1)) == 1.0
    assert resolve_T(RunConfig(example_id=2)) == 10.0


def test_resolve_T_explicit_wins_over_example_default():
    assert resolve_T(RunConfig(example_id=2, T=3.5)) == 3.5


def test_resolve_T_kelvin_voigt_mesh_end():
    # end of the benchmark mesh: first_step * (r^n - 1) / (r - 1)
    end = KV_FIRST_STEP * (KV_RATIO**KV_STEPS - 1.0) / (KV_RATIO - 1.0)
    got = resolve_T(RunConfig(example_id=3, grid_kind="kelvin_voigt"))
    assert got == pytest.approx(end, rel=1e-12)
    # the fixed mesh ignores an explicit T: the grid defines the window
    assert resolve_T(RunConfig(example_id=3, grid_kind="kelvin_voigt", T=5.0)) == got
    # example 3 on any grid kind defaults to the same final time
    assert resolve_T(RunConfig(example_id=3)) == got


# ---------------------------------------------------------------------------
# make_grid


def test_uniform_grid_construction():
    grid = make_grid(RunConfig(), 0.25, 1.0)
    np.testing.assert_allclose(grid.t, [0.0, 0.25, 0.5, 0.75, 1.0], rtol=0, atol=0)


def test_uniform_grid_tolerates_float_noise_in_division():
    # 1.0 / 0.1 is 10.000000000000002 in floats; still a valid 10-step grid
    grid = make_grid(RunConfig(), 0.1, 1.0)
    assert grid.N == 10


def test_uniform_grid_rejects_non_divisor_step():
    with pytest.raises(ValueError, match="does not divide"):
        make_grid(RunConfig(), 0.3, 1.0)


def test_uniform_grid_needs_step():
    with pytest.raises(ValueError, match="needs a step size"):
        make_grid(RunConfig(), None, 1.0)


def test_geometric_grid_ends_at_T_with_fixed_ratio():
    cfg = RunConfig(grid_kind="geometric", n_steps=16)
    grid = make_grid(cfg, None, 2.0)
    assert grid.N == 16
    assert grid.t[-1] == pytest.approx(2.0, rel=1e-12)
    ratios = grid.h[1:] / grid.h[:-1]
    np.testing.assert_allclose(ratios, 1.005, rtol=1e-12)
    first = 2.0 * 0.005 / (1.005**16 - 1.0)
    assert grid.h[0] == pytest.approx(first, rel=1e-12)


def test_geometric_grid_needs_n_steps():
    with pytest.raises(ValueError, match="needs n_steps"):
        make_grid(RunConfig(grid_kind="geometric"), None, 1.0)


def test_kelvin_voigt_grid_is_fixed_mesh():
    cfg = RunConfig(grid_kind="kelvin_voigt", h=0.125)
    grid = make_grid(cfg, 0.125, 7.0)  # h and T are ignored by design
    assert grid.N == KV_STEPS
    assert grid.h[0] == pytest.approx(KV_FIRST_STEP, rel=1e-15)
    np.testing.assert_allclose(grid.h[1:] / grid.h[:-1], KV_RATIO, rtol=1e-12)


# ---------------------------------------------------------------------------
# worker cap / FRACSUM_THREADS


def test_worker_cap_defaults_to_cpu_count(monkeypatch):
    monkeypatch.delenv("FRACSUM_THREADS", raising=False)
    cap = os.cpu_count() or 1
    assert _max_workers(1) == 1
    assert _max_workers(10**6) == cap


def test_worker_cap_env_override(monkeypatch):
    monkeypatch.setenv("FRACSUM_THREADS", "4")
    assert _max_workers(9) == 4
    assert _max_workers(2) == 2
    monkeypatch.setenv("FRACSUM_THREADS", " 8 ")  # whitespace is tolerated
    assert _max_workers(100) == 8


@pytest.mark.parametrize("bad", ["abc", "0", "-3", "1.5"])
def test_worker_cap_rejects_bad_env(monkeypatch, bad):
    monkeypatch.setenv("FRACSUM_THREADS", bad)
    with pytest.raises(ValueError, match="FRACSUM_THREADS"):
        _max_workers(4)


def test_worker_cap_empty_env_means_unset(monkeypatch):
    monkeypatch.setenv("FRACSUM_THREADS", "")
    assert _max_workers(1) == 1


# ---------------------------------------------------------------------------
# kernel assembly helpers


def test_raw_kernel_unit_window_is_plain_build():
    spec = KernelSpec(0.5, 1e-2, 1.0, 32, 1e-10)
    direct = build_trapezoidal_expsum(spec)
    via_bench = raw_kernel(spec)
    np.testing.assert_array_equal(via_bench.weights, direct.weights)
    np.testing.assert_array_equal(via_bench.exponents, direct.exponents)


def test_raw_kernel_wide_window_matches_rescaled_build():
    spec = KernelSpec(0.5, 1e-2, 10.0, 32, 1e-10)
    norm = KernelSpec(0.5, 1e-3, 1.0, 32, 1e-10)
    expected = rescale(build_trapezoidal_expsum(norm), 10.0)
    got = raw_kernel(spec)
    np.testing.assert_array_equal(got.weights, expected.weights)
    np.testing.assert_array_equal(got.exponents, expected.exponents)


def test_build_kernel_unreduced_has_no_report():
    cfg = RunConfig(L=32, delta=1e-2, unreduced=True)
    es, report = build_kernel(cfg, 1.0)
    assert report is None
    assert es.L == 32


def test_build_kernel_reduced_returns_report_pair():
    cfg = RunConfig(L=64, delta=1e-2)
    es, report = build_kernel(cfg, 1.0)
    assert isinstance(report, ReductionReport)
    assert es is report.reduced
    assert report.accepted
    assert es.L == report.L_f < 64


# ---------------------------------------------------------------------------
# EOC tables


def test_eoc_orders_for_clean_second_order_data():
    rows = eoc([(0.5, 1e-2), (0.25, 2.5e-3), (0.125, 6.25e-4)])
    assert [r.eoc for r in rows] == [None, 2.0, 2.0]
    assert [r.h for r in rows] == [0.5, 0.25, 0.125]
    assert [r.error for r in rows] == [1e-2, 2.5e-3, 6.25e-4]


def test_eoc_marks_non_decreasing_error():
    rows = eoc([(0.5, 1e-3), (0.25, 1e-3)])
    assert rows[1].eoc == "***"
    rows = eoc([(0.5, 1e-3), (0.25, 2e-3)])
    assert rows[1].eoc == "***"


def test_eoc_skips_failed_rows_on_both_sides():
    rows = eoc([(0.5, 1e-2), (0.25, math.nan), (0.125, 1e-3)])
    assert rows[0].eoc is None
    assert rows[1].eoc is None
    assert rows[2].eoc is None


def test_eoc_requires_halving_steps():
    with pytest.raises(ShapeError, match="halve"):
        eoc([(0.5, 1e-2), (0.3, 1e-3)])


def test_eoc_edge_rows():
    assert eoc([]) == []
    assert eoc([(0.25, 1e-4)]) == [EocRow(h=0.25, error=1e-4, eoc=None)]
    # an exactly-zero previous error admits no order estimate
    rows = eoc([(0.5, 0.0), (0.25, 1e-3)])
    assert rows[1].eoc is None


@given(
    p=st.floats(min_value=0.25, max_value=3.0),
    c=st.floats(min_value=1e-8, max_value=10.0),
)
@settings(max_examples=50, deadline=None)
def test_eoc_recovers_exact_power_law_order(p, c):
    hs = [2.0**-e for e in range(2, 7)]
    rows = eoc([(h, c * h**p) for h in hs])
    for row in rows[1:]:
        assert row.eoc == pytest.approx(p, rel=1e-9)


# ---------------------------------------------------------------------------
# cell / meta rendering


@pytest.mark.parametrize(
    ("name", "value", "expected"),
    [
        ("anything", None, ""),
        ("eoc", "***", "***"),
        ("accepted", True, "true"),
        ("accepted", False, "false"),
        ("L", 42, "42"),
        ("L", np.int64(7), "7"),
        ("error", math.nan, "failed"),
        ("eoc", 2.0349, "2.03"),
        ("h", 0.0078125, "0.0078125"),
        ("alpha", 0.1, "0.1"),
        ("error", 3.34e-2, "3.340000e-02"),
        ("error", np.float64(1.0), "1.000000e+00"),
    ],
)
def test_cell_rendering(name, value, expected):
    assert _cell(name, value) == expected


def test_meta_line_forms():
    assert _meta_line("free text") == "free text"

    @dataclasses.dataclass
    class Meta:
        a: int = 1
        b: str = "x"

    assert _meta_line(Meta()) == "a=1 b='x'"
    assert _meta_line({"a": 1}) == "{'a': 1}"


# ---------------------------------------------------------------------------
# emit_csv


def test_emit_csv_exact_bytes(tmp_path):
    path = tmp_path / "rows.csv"
    emit_csv([EocRow(h=0.25, error=3.34e-2)], path, fieldnames=["h", "error", "eoc"])
    assert path.read_bytes() == b"h,error,eoc\n0.25,3.340000e-02,\n"


def test_emit_csv_mapping_rows_and_type_rendering(tmp_path):
    path = tmp_path / "mixed.csv"
    row = {
        "L": np.int64(7),
        "accepted": False,
        "eoc": 1.987,
        "err": math.nan,
        "h": 2.0**-6,
        "note": "***",
    }
    emit_csv([row], path)
    assert path.read_text() == (
        "L,accepted,eoc,err,h,note\n7,false,1.99,failed,0.015625,***\n"
    )


def test_emit_csv_field_order_from_first_row(tmp_path):
    path = tmp_path / "order.csv"
    emit_csv([{"b": 2, "a": 1}], path)
    assert path.read_text().splitlines()[0] == "b,a"


def test_emit_csv_missing_key_renders_empty(tmp_path):
    path = tmp_path / "gap.csv"
    emit_csv([{"a": 1}], path, fieldnames=["a", "b"])
    assert path.read_text() == "a,b\n1,\n"


def test_emit_csv_empty_rows_header_only(tmp_path):
    path = tmp_path / "empty.csv"
    emit_csv([], path, fieldnames=["h", "error", "eoc"])
    assert path.read_text() == "h,error,eoc\n"


def test_emit_csv_empty_rows_need_fieldnames(tmp_path):
    with pytest.raises(ValueError, match="fieldnames is required"):
        emit_csv([], tmp_path / "no.csv")


def test_emit_csv_meta_sidecar(tmp_path):
    path = tmp_path / "run.csv"
    emit_csv([{"a": 1}], path, meta="alpha=0.5 L=64")
    assert (tmp_path / "run.csv.meta").read_text() == "alpha=0.5 L=64\n"


def test_emit_csv_wraps_os_errors(tmp_path):
    target = tmp_path / "no-such-dir" / "rows.csv"
    with pytest.raises(OSError, match="cannot write"):
        emit_csv([{"a": 1}], target)


# ---------------------------------------------------------------------------
# solve_once / trajectory and reduction rows


@pytest.fixture(scope="module")
def unit_kernel():
    return build_trapezoidal_expsum(KernelSpec(0.5, 1e-2, 1.0, 64, 1e-10))


def test_solve_once_scheme_dispatch(unit_kernel):
    bp = make_example(1, 0.5)
    grid = TimeGrid.uniform(1.0, 16)
    y_tr = solve_once(bp.problem, grid, unit_kernel, RunConfig(scheme="TR")).y
    y_be = solve_once(bp.problem, grid, unit_kernel, RunConfig(scheme="BE")).y
    y_ci = solve_once(bp.problem, grid, unit_kernel, RunConfig(scheme="CI")).y
    assert np.all(np.isfinite(y_tr))
    # the three schemes are genuinely different discretizations
    assert abs(y_tr[-1] - y_be[-1]) > 1e-6
    assert abs(y_tr[-1] - y_ci[-1]) > 1e-6


def test_power_law_rhs_never_clamps_on_healthy_runs(unit_kernel):
    # the y^(3/2) clamp in example 1 exists for safety; a resolved run
    # (h <= 2^-4) must never trigger it
    bp = make_example(1, 0.5)
    grid = TimeGrid.uniform(1.0, 16)
    solve_once(bp.problem, grid, unit_kernel, RunConfig(scheme="TR"))
    assert bp.clamp_count == 0


def test_trajectory_rows_schema(unit_kernel):
    bp = make_example(1, 0.5)
    grid = TimeGrid.uniform(1.0, 8)
    sol = solve_once(bp.problem, grid, unit_kernel, RunConfig(scheme="TR"))
    rows = trajectory_rows(sol)
    assert len(rows) == 9
    assert list(rows[0]) == ["t", "y"]
    assert [r["t"] for r in rows] == pytest.approx(list(grid.t))

    with_err = trajectory_rows(sol, reference=bp.reference)
    assert list(with_err[0]) == ["t", "y", "abs_error"]
    assert with_err[0]["abs_error"] == 0.0  # y(0) = 0 exactly
    assert all(r["abs_error"] >= 0.0 for r in with_err)


def test_reduction_row_mirrors_report():
    report = reduce_with_rescaling(KernelSpec(0.5, 1e-2, 1.0, 64, 1e-10))
    row = reduction_row(report, 0.5)
    assert list(row) == ["alpha", "L", "M", "L_p", "K", "L_f",
                         "err_before", "err_after"]
    assert row["alpha"] == 0.5
    assert row["L"] == 64
    assert row["M"] == report.M
    assert row["L_p"] == report.L_p
    assert row["K"] == report.K
    assert row["L_f"] == report.L_f == report.reduced.L
    assert row["err_before"] == report.eps_prime
    assert row["err_after"] == report.max_err_after


# ---------------------------------------------------------------------------
# run_example


def test_run_example_validates_config():
    with pytest.raises(ValueError, match="alpha"):
        run_example(RunConfig(alpha=2.0))


def test_run_example_single_row_with_explicit_h():
    cfg = RunConfig(alpha=0.5, T=1.0, L=32, example_id=2, scheme="TR", h=0.125)
    rows = run_example(cfg)
    assert len(rows) == 1
    assert rows[0].h == 0.125
    assert rows[0].eoc is None
    assert math.isfinite(rows[0].error) and rows[0].error > 0.0


def test_run_example_n_steps_sets_single_step(monkeypatch):
    monkeypatch.setenv("FRACSUM_THREADS", "1")
    cfg = RunConfig(alpha=0.5, T=1.0, L=32, example_id=2, n_steps=8)
    rows = run_example(cfg)
    assert len(rows) == 1
    assert rows[0].h == 0.125


def test_run_example_geometric_yields_one_row():
    cfg = RunConfig(alpha=0.5, T=1.0, L=32, example_id=2,
                    grid_kind="geometric", n_steps=32)
    rows = run_example(cfg)
    assert len(rows) == 1
    first = 1.0 * 0.005 / (1.005**32 - 1.0)
    assert rows[0].h == pytest.approx(first, rel=1e-12)
    assert rows[0].eoc is None
    assert math.isfinite(rows[0].error)


def test_run_example_sweep_is_thread_count_invariant(monkeypatch):
    cfg = RunConfig(alpha=0.5, T=1.0, L=32, example_id=2, scheme="TR")
    monkeypatch.setenv("FRACSUM_THREADS", "1")
    serial = run_example(cfg)
    monkeypatch.setenv("FRACSUM_THREADS", "4")
    pooled = run_example(RunConfig(alpha=0.5, T=1.0, L=32, example_id=2, scheme="TR"))
    assert len(serial) == len(DEFAULT_SWEEP)
    for a, b in zip(serial, pooled):
        assert a.h == b.h
        assert a.error == b.error  # bitwise: scheduling must not leak in
        assert a.eoc == b.eoc


def test_run_example_matches_frozen_relaxation_spot():
    # linear relaxation, alpha = 1/2, default window [1e-5, 10], L = 128
    cfg = RunConfig(alpha=0.5, L=128, example_id=2, scheme="TR", h=0.25)
    rows = run_example(cfg)
    assert rows[0].error == pytest.approx(golden.EX2_TR_L128_H025, rel=1e-4)


# ---------------------------------------------------------------------------
# Kelvin-Voigt L sweep


def test_kelvin_voigt_l_sweep_rows():
    rows = kelvin_voigt_l_sweep(0.3, (8, 16))
    assert [r["L"] for r in rows] == [8, 16]
    for r in rows:
        assert list(r) == ["L", "L_f", "max_abs_err", "final_err"]
        assert 1 <= r["L_f"] <= r["L"]
        assert math.isfinite(r["max_abs_err"])
        assert 0.0 <= r["final_err"] <= r["max_abs_err"]
    # the richer kernel cannot do worse on the same mesh
    assert rows[1]["max_abs_err"] <= rows[0]["max_abs_err"]
