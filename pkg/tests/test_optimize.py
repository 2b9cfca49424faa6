import math

import numpy as np
import pytest

from sdirand._kernels import BACKEND, get_backend
from sdirand.optimize import (
    CURVE_COLUMNS,
    CurvePoint,
    InfeasibleError,
    OptimizationSettings,
    _penalty_stages,
    default_curve_grid,
    device_to_params,
    grid_oracle_max_guessing,
    grid_oracle_search,
    maximize_guessing_at_t,
    maximize_witness,
    monotonize_curve,
    params_to_device,
    random_start,
    read_curve,
    sweep_curve,
    write_curve,
)
from sdirand.qubit import BinaryMeasurement, Device, PureQubit, behavior_table
from sdirand.witness import guessing_probability, min_entropy, quantum_bound, witness_value

QB = quantum_bound()

# Exhaustive-grid maxima at resolution 9, band 0.05, frozen from the
# kernels (verified against an independent split-enumeration check).
ORACLE_REFERENCE = {
    2.0: 1.0,
    2.2: 1.0,
    2.4: 1.0,
    2.6: 1.0,
    2.7: 0.961939766255643,
    QB: 0.8535533905932737,
}


# --- settings and parameter plumbing ---------------------------------------


def test_settings_defaults_are_valid():
    s = OptimizationSettings()
    assert s.starts >= 1
    assert all(b > a for a, b in zip(s.penalty_weight_schedule, s.penalty_weight_schedule[1:]))
    assert 0 < s.constraint_tolerance < 1


@pytest.mark.parametrize(
    "kwargs",
    [
        {"starts": 0},
        {"penalty_weight_schedule": ()},
        {"penalty_weight_schedule": (10.0, 10.0)},
        {"penalty_weight_schedule": (100.0, 10.0)},
        {"constraint_tolerance": 0.0},
        {"convergence_tolerance": -1e-9},
        {"max_iterations": 0},
        {"rng_seed": -1},
        {"rng_seed": 2**64},
    ],
)
def test_settings_validation(kwargs):
    with pytest.raises(ValueError):
        OptimizationSettings(**kwargs)


def test_random_start_is_pure_and_in_box():
    a = random_start(12345, 0)
    b = random_start(12345, 0)
    np.testing.assert_array_equal(a, b)
    c = random_start(12345, 1)
    assert not np.array_equal(a, c)
    assert a.shape == (10,)
    assert np.all(a[0::2] >= 0) and np.all(a[0::2] <= math.pi)
    assert np.all(a[1::2] >= 0) and np.all(a[1::2] < 2 * math.pi)


def test_params_device_round_trip():
    params = random_start(7, 3)
    device = params_to_device(params)
    assert isinstance(device, Device)
    assert device.measurements[0].fixed_computational
    back = device_to_params(device)
    np.testing.assert_allclose(back, params, atol=1e-15)


def test_device_to_params_requires_pinned_first_measurement():
    device = Device(
        tuple(PureQubit(0.1 * k, 0.2 * k) for k in range(4)),
        (BinaryMeasurement(0.3, 0.4), BinaryMeasurement(0.5, 0.6)),
    )
    with pytest.raises(ValueError):
        device_to_params(device)


# --- witness extremum -------------------------------------------------------


def test_maximize_witness_reaches_qubit_maximum():
    t_val, params = maximize_witness()
    assert t_val == pytest.approx(QB, abs=1e-3)
    table = behavior_table(params_to_device(np.asarray(params)))
    assert witness_value(table) == pytest.approx(t_val, abs=1e-12)


def test_maximize_witness_negated():
    t_val, _ = maximize_witness(negate=True)
    assert t_val == pytest.approx(-QB, abs=1e-3)


# --- constrained maximization -----------------------------------------------


def test_guessing_at_classical_bound_is_deterministic():
    pt = maximize_guessing_at_t(2.0)
    assert pt.p_guess == pytest.approx(1.0, abs=1e-9)
    assert pt.h_min == pytest.approx(0.0, abs=1e-9)
    assert abs(pt.achieved_t - 2.0) <= OptimizationSettings().constraint_tolerance


def test_guessing_away_from_boundary():
    pt = maximize_guessing_at_t(0.0)
    assert pt.p_guess == pytest.approx(1.0, abs=1e-9)


def test_point_is_reverified_through_matrix_route():
    pt = maximize_guessing_at_t(2.2)
    device = params_to_device(np.asarray(pt.argmax_params))
    table = behavior_table(device)
    assert witness_value(table) == pytest.approx(pt.achieved_t, abs=1e-12)
    assert guessing_probability(table) == pytest.approx(pt.p_guess, abs=1e-12)
    assert pt.h_min == pytest.approx(min_entropy(pt.p_guess), abs=1e-12)


def test_deterministic_given_identical_settings():
    a = maximize_guessing_at_t(2.2)
    b = maximize_guessing_at_t(2.2)
    assert a == b  # bit-identical, including the parameter tuple


@pytest.mark.parametrize("target", [2.9, -2.9, QB + 1e-3])
def test_out_of_range_target_is_infeasible(target):
    with pytest.raises(InfeasibleError):
        maximize_guessing_at_t(target)


def test_penalty_residual_history_is_monotone():
    kernel = get_backend(None)
    settings = OptimizationSettings(starts=8)
    x0 = np.stack([random_start(settings.rng_seed, k) for k in range(8)])
    _, history = _penalty_stages(x0, QB, settings, kernel)
    assert history.shape[0] == len(settings.penalty_weight_schedule) + 1
    assert np.all(np.diff(history, axis=0) <= 0.0)


def test_knee_regression_at_2_70():
    # measured with default settings; the curve rises like
    # 1.85*(t - 2.6403)^2 just past its positivity threshold
    pt = maximize_guessing_at_t(2.7)
    assert pt.h_min > 0.0
    assert pt.h_min == pytest.approx(0.00655, abs=2e-3)


# --- exhaustive-grid oracle -------------------------------------------------


def test_oracle_argument_validation():
    with pytest.raises(ValueError):
        grid_oracle_max_guessing(2.0, 4, 0.05)
    with pytest.raises(ValueError):
        grid_oracle_max_guessing(2.0, 9, 0.0)


def test_oracle_no_reachable_point():
    with pytest.raises(InfeasibleError):
        grid_oracle_max_guessing(2.82, 5, 1e-4)


def test_oracle_reference_values():
    for t_target in (2.0, 2.7):
        p = grid_oracle_max_guessing(t_target, 9, 0.05)
        assert p == pytest.approx(ORACLE_REFERENCE[t_target], abs=1e-12)
    p = grid_oracle_max_guessing(QB, 9, 0.05)
    assert p == pytest.approx(math.cos(math.pi / 8) ** 2, abs=1e-9)


def test_oracle_params_reproduce_reported_maximum():
    p, params = grid_oracle_search(2.7, 9, 0.05)
    prep_meas = params[:10].copy()
    table = behavior_table(params_to_device(prep_meas))
    assert guessing_probability(table) == pytest.approx(p, abs=1e-12)
    assert abs(witness_value(table) - 2.7) <= 0.05 + 1e-12


@pytest.mark.skipif(BACKEND != "cython", reason="fine grid needs the compiled lane")
def test_oracle_fine_grid_near_maximum():
    p = grid_oracle_max_guessing(QB, 17, 0.02)
    assert 0.84 <= p <= 0.87


def test_oracle_pinned_first_measurement_loses_nothing():
    # freeing the first measurement's axis onto the grid must not beat
    # the pinned scan (computational basis is general up to relabeling)
    pinned = grid_oracle_max_guessing(2.5, 5, 0.1)
    free = grid_oracle_max_guessing(2.5, 5, 0.1, free_y0=True)
    assert free <= pinned + 1e-3


# --- curve sweeps and files -------------------------------------------------


def test_default_grid_shape():
    grid = default_curve_grid()
    assert len(grid) == 43
    assert grid[0] == 2.0
    assert grid[-1] == QB
    assert grid[1] - grid[0] == pytest.approx(0.02)


def test_sweep_validates_grid():
    with pytest.raises(ValueError):
        sweep_curve([])
    with pytest.raises(ValueError):
        sweep_curve([2.2, 2.1])
    with pytest.raises(ValueError):
        sweep_curve([1.9])
    with pytest.raises(ValueError):
        sweep_curve([2.0, QB + 1e-3])


def test_sweep_flat_region():
    (pt,) = sweep_curve([2.6])
    assert pt.h_min <= 5e-3


def test_sweep_small_grid_is_monotone():
    points = sweep_curve([2.0, 2.1])
    assert len(points) == 2
    assert points[0].p_guess >= points[1].p_guess
    assert points[0].h_min <= points[1].h_min


def test_monotonize_raises_dips():
    def cp(t, p):
        return CurvePoint(t, p, min_entropy(p), (0.0,) * 10, t)

    fixed = monotonize_curve([cp(2.0, 1.0), cp(2.2, 0.93), cp(2.4, 0.95), cp(2.6, 0.9)])
    ps = [pt.p_guess for pt in fixed]
    assert ps == [1.0, 0.95, 0.95, 0.9]
    assert fixed[1].h_min == pytest.approx(min_entropy(0.95))
    # untouched points keep their identity
    assert fixed[0].argmax_params == (0.0,) * 10


def test_curve_file_round_trip(tmp_path):
    points = [
        maximize_guessing_at_t(2.0),
        CurvePoint(2.5, 0.9876543210123456, min_entropy(0.9876543210123456),
                   tuple(np.linspace(0.1, 5.9, 10)), 2.4999999),
    ]
    path = tmp_path / "curve.csv"
    write_curve(path, points)
    header = path.read_text().splitlines()[0]
    assert header == ",".join(CURVE_COLUMNS)
    back = read_curve(path)
    assert back == points  # 17 significant digits round-trip doubles exactly


def test_read_curve_rejects_malformed(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("nope\n")
    with pytest.raises(ValueError, match="header"):
        read_curve(path)

    good_header = ",".join(CURVE_COLUMNS)
    path.write_text(good_header + "\n1,2,3\n")
    with pytest.raises(ValueError, match=":2:"):
        read_curve(path)

    row = [2.0, 2.0, 0.9, 0.2] + [0.0] * 10  # h inconsistent with p
    path.write_text(good_header + "\n" + ",".join(map(str, row)) + "\n")
    with pytest.raises(ValueError, match="inconsistent"):
        read_curve(path)

    row = [2.0, 2.0, 1.2, 0.0] + [0.0] * 10
    path.write_text(good_header + "\n" + ",".join(map(str, row)) + "\n")
    with pytest.raises(ValueError, match="outside"):
        read_curve(path)
