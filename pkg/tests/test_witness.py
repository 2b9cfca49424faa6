import math

import numpy as np
import pytest

from sdirand.witness import (
    WITNESS_SIGNS,
    BehaviorTable,
    CertificationResult,
    classical_bound,
    deterministic_strategy_tables,
    guessing_probability,
    min_entropy,
    quantum_bound,
    witness_value,
)

C2 = math.cos(math.pi / 8) ** 2
S2 = math.sin(math.pi / 8) ** 2

QRAC_TABLE = np.array([[C2, C2], [C2, S2], [S2, C2], [S2, S2]])
BB84_TABLE = np.array([[1.0, 0.5], [0.5, 0.0], [0.5, 1.0], [0.0, 0.5]])


def test_sign_pattern():
    assert WITNESS_SIGNS.shape == (4, 2)
    assert WITNESS_SIGNS.tolist() == [[1, 1], [1, -1], [-1, 1], [-1, -1]]
    with pytest.raises(ValueError):
        WITNESS_SIGNS[0, 0] = 5.0


def test_witness_value_reference_tables():
    assert witness_value(QRAC_TABLE) == pytest.approx(quantum_bound(), abs=1e-12)
    assert witness_value(BB84_TABLE) == pytest.approx(2.0, abs=1e-15)
    assert witness_value(np.ones((4, 2))) == 0.0
    assert witness_value(np.full((4, 2), 0.5)) == 0.0


def test_witness_value_is_linear_and_bounded():
    rng = np.random.default_rng(7)
    for _ in range(200):
        e1 = rng.random((4, 2))
        e2 = rng.random((4, 2))
        alpha = float(rng.random())
        mix = alpha * e1 + (1 - alpha) * e2
        expected = alpha * witness_value(e1) + (1 - alpha) * witness_value(e2)
        assert witness_value(mix) == pytest.approx(expected, abs=1e-12)
        assert abs(witness_value(e1)) <= 4.0 + 1e-12


def test_guessing_probability():
    assert guessing_probability(np.ones((4, 2))) == 1.0
    assert guessing_probability(np.full((4, 2), 0.5)) == 0.5
    assert guessing_probability(np.full((4, 2), 0.3)) == pytest.approx(0.7, abs=1e-15)
    assert guessing_probability(QRAC_TABLE) == pytest.approx(C2, abs=1e-12)


def test_min_entropy_values_and_domain():
    assert min_entropy(0.5) == 1.0
    assert min_entropy(1.0) == 0.0
    # the zero must be the positive one, not -0.0
    assert math.copysign(1.0, min_entropy(1.0)) == 1.0
    assert min_entropy(C2) == pytest.approx(-math.log2(C2), abs=1e-15)
    for bad in (0.49, 1.01, float("nan")):
        with pytest.raises(ValueError):
            min_entropy(bad)


def test_bounds():
    assert classical_bound() == 2.0
    assert quantum_bound() == 2.0 * math.sqrt(2.0)


def test_behavior_table_validation():
    with pytest.raises(ValueError):
        BehaviorTable(np.ones((4, 3)))
    with pytest.raises(ValueError):
        BehaviorTable(np.full((4, 2), np.nan))
    with pytest.raises(ValueError):
        BehaviorTable(np.full((4, 2), 1.1))
    with pytest.raises(ValueError):
        BehaviorTable(np.full((4, 2), -0.1))


def test_behavior_table_clips_rounding_fuzz():
    e = np.full((4, 2), 0.5)
    e[0, 0] = 1.0 + 1e-12
    e[3, 1] = -1e-12
    table = BehaviorTable(e)
    assert table.cell(0, 0) == 1.0
    assert table.cell(3, 1) == 0.0


def test_behavior_table_is_read_only():
    table = BehaviorTable(QRAC_TABLE)
    with pytest.raises(ValueError):
        table.e[0, 0] = 0.0
    copy = table.as_array()
    copy[0, 0] = 0.0
    assert table.cell(0, 0) == pytest.approx(C2)


def test_deterministic_strategies_enumeration():
    tables = deterministic_strategy_tables()
    assert tables.shape == (256, 4, 2)
    assert set(np.unique(tables)) == {0.0, 1.0}
    values = np.array([witness_value(t) for t in tables])
    assert values.max() == 2.0
    assert values.min() == -2.0
    assert np.all(values <= 2.0)
    # distinct encode/decode pairs overlap in the tables they induce
    # (constant decodings ignore the message): 88 distinct tables
    assert len({t.tobytes() for t in tables}) == 88


def test_certification_result_from_table():
    res = CertificationResult.from_table(QRAC_TABLE)
    assert res.t_value == pytest.approx(quantum_bound(), abs=1e-12)
    assert res.p_guess == pytest.approx(C2, abs=1e-12)
    assert res.h_min == pytest.approx(-math.log2(C2), abs=1e-12)

    flat = CertificationResult.from_table(BB84_TABLE)
    assert flat.t_value == pytest.approx(2.0)
    assert flat.p_guess == 1.0
    assert flat.h_min == 0.0
