import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mmpu.device import (DEFAULT_PARAMS, CellState, DeviceParams, VariationSpec,
                         sample_params, step_state)
from mmpu.errors import SampledParamsInvalid

P = DEFAULT_PARAMS
ON, OFF = CellState.from_bit(1, P), CellState.from_bit(0, P)


def test_defaults():
    assert (P.r_on, P.r_off, P.v_set, P.v_reset) == (1e3, 1e6, 1.3, -0.3)


@pytest.mark.parametrize("kw", [dict(r_on=0.0), dict(r_off=500.0), dict(v_set=0.0),
                                dict(v_reset=0.1), dict(r_on=float("inf"))])
def test_invalid_params_rejected(kw):
    with pytest.raises(ValueError):
        DeviceParams(**kw)


def test_cell_state_outside_binary_set():
    with pytest.raises(ValueError):
        CellState(5e3).bit(P)


def test_reset_on_nor_11_voltage():
    # the (1,1) NOR case: output cell sees minus 2/3 V
    new, switched = step_state(ON, P, -0.667)
    assert switched and new.bit(P) == 0


def test_hold_on_nor_00_voltage():
    new, switched = step_state(ON, P, -0.002)
    assert not switched and new == ON


def test_zero_voltage_keeps_zero():
    assert step_state(OFF, P, 0.0) == (OFF, False)


def test_set_at_threshold():
    new, switched = step_state(OFF, P, 1.3)
    assert switched and new == ON


def test_zero_variation_is_identity():
    assert sample_params(P, VariationSpec(0, 0, 9), (3, 4)) == P


def test_sample_params_deterministic():
    v = VariationSpec(0.1, 0.05, 42)
    assert sample_params(P, v, (1, 2)) == sample_params(P, v, (1, 2))
    assert sample_params(P, v, (1, 2)) != sample_params(P, v, (1, 3))


def test_sample_params_vset_spread():
    v = VariationSpec(0.0, 0.05, 7)
    ratios = np.array([sample_params(P, v, (i // 100, i % 100)).v_set for i in range(10_000)]) / P.v_set
    assert 0.045 <= ratios.std() <= 0.055
    assert abs(ratios.mean() - 1) < 0.003


def test_resistance_factor_is_mean_one():
    v = VariationSpec(0.2, 0.0, 3)
    ratios = np.array([sample_params(P, v, (0, i)).r_on for i in range(10_000)]) / P.r_on
    assert abs(ratios.mean() - 1) < 0.01
    assert 0.18 <= ratios.std() <= 0.22


def test_invalid_draws_exhaust_retries(monkeypatch):
    import mmpu.device as device
    # with sigma_v = 10 a single draw keeps both thresholds' signs only ~1/4 of the time
    monkeypatch.setattr(device, "MAX_RESAMPLES", 1)
    with pytest.raises(SampledParamsInvalid):
        for i in range(200):
            sample_params(P, VariationSpec(0.0, 10.0, 1), (0, i))


volts = st.floats(-3, 3, allow_nan=False)


@given(bit=st.integers(0, 1), v=volts)
def test_step_state_idempotent_and_binary(bit, v):
    s = CellState.from_bit(bit, P)
    once, _ = step_state(s, P, v)
    twice, switched = step_state(once, P, v)
    assert twice == once and not switched
    assert once.resistance in (P.r_on, P.r_off)


@given(seed=st.integers(0, 2**32), r=st.integers(0, 1000), c=st.integers(0, 1000))
def test_sample_params_reproducible(seed, r, c):
    v = VariationSpec(0.1, 0.1, seed)
    assert sample_params(P, v, (r, c)) == sample_params(P, v, (r, c))
