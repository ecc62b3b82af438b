"""Binary-state memristor with threshold switching and per-cell parameter variation.

Logical 1 is the low-resistance state (``r_on``), logical 0 the high one
(``r_off``). The voltage ``v_dev`` seen by a device is measured from its
wordline terminal to its bitline terminal: SET needs ``v_dev >= v_set > 0``
and RESET needs ``v_dev <= v_reset < 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import SampledParamsInvalid

MAX_RESAMPLES = 100


@dataclass(frozen=True)
class DeviceParams:
    r_on: float = 1e3
    r_off: float = 1e6
    v_set: float = 1.3
    v_reset: float = -0.3

    def __post_init__(self):
        if not self.is_valid():
            raise ValueError(f"invalid device parameters: {self}")

    def is_valid(self) -> bool:
        return (
            math.isfinite(self.r_on)
            and math.isfinite(self.r_off)
            and self.r_off > self.r_on > 0
            and self.v_set > 0
            and self.v_reset < 0
        )

    def resistance(self, bit: int) -> float:
        return self.r_on if bit else self.r_off


DEFAULT_PARAMS = DeviceParams()


@dataclass(frozen=True)
class CellState:
    resistance: float

    @classmethod
    def from_bit(cls, bit: int, params: DeviceParams) -> "CellState":
        return cls(params.resistance(bit))

    def bit(self, params: DeviceParams) -> int:
        if self.resistance == params.r_on:
            return 1
        if self.resistance == params.r_off:
            return 0
        raise ValueError(f"resistance {self.resistance} is neither r_on nor r_off")


@dataclass(frozen=True)
class VariationSpec:
    sigma_r: float = 0.0
    sigma_v: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.sigma_r < 0 or self.sigma_v < 0:
            raise ValueError("variation sigmas must be non-negative")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    @property
    def is_zero(self) -> bool:
        return self.sigma_r == 0 and self.sigma_v == 0


def cell_rng(seed: int, row: int, col: int) -> np.random.Generator:
    """Independent stream for one cell, keyed by ``(seed, row, col)``."""
    return np.random.default_rng([seed, row, col])


def lognormal_factor(z, rel_sigma):
    # Mean-one lognormal whose standard deviation is rel_sigma.
    s2 = math.log1p(rel_sigma * rel_sigma)
    return np.exp(math.sqrt(s2) * z - 0.5 * s2)


def sample_params(
    nominal: DeviceParams, variation: VariationSpec, cell_index: tuple[int, int]
) -> DeviceParams:
    """Perturbed copy of ``nominal`` for the cell at ``cell_index``.

    Resistances get independent mean-one lognormal factors with relative
    spread ``sigma_r``; thresholds are scaled by ``1 + N(0, sigma_v)``.
    Invalid draws are rejected and redrawn from the same stream.
    """
    if variation.is_zero:
        return nominal
    row, col = cell_index
    rng = cell_rng(variation.seed, row, col)
    for _ in range(MAX_RESAMPLES):
        z = rng.standard_normal(4)
        r_on = nominal.r_on * float(lognormal_factor(z[0], variation.sigma_r))
        r_off = nominal.r_off * float(lognormal_factor(z[1], variation.sigma_r))
        v_set = nominal.v_set * (1.0 + variation.sigma_v * float(z[2]))
        v_reset = nominal.v_reset * (1.0 + variation.sigma_v * float(z[3]))
        if r_off > r_on > 0 and v_set > 0 and v_reset < 0:
            return DeviceParams(r_on, r_off, v_set, v_reset)
    raise SampledParamsInvalid(
        f"cell {cell_index}: no valid parameters after {MAX_RESAMPLES} draws "
        f"(sigma_r={variation.sigma_r}, sigma_v={variation.sigma_v})"
    )


def step_state(
    state: CellState, params: DeviceParams, v_dev: float
) -> tuple[CellState, bool]:
    bit = state.bit(params)
    if bit == 0 and v_dev >= params.v_set:
        return replace(state, resistance=params.r_on), True
    if bit == 1 and v_dev <= params.v_reset:
        return replace(state, resistance=params.r_off), True
    return state, False
