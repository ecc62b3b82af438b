"""Margin analysis, fault injection, and Monte Carlo failure estimation for MAGIC NOR.

A k-input NOR with its output pre-set to ``r_on`` works iff three
inequalities hold, where ``V(m)`` is the divider node voltage when ``m``
inputs are at ``r_on`` and ``k - m`` at ``r_off``:

* hold:    ``V(0) < |v_reset|``        all-zero inputs must not reset the output
* switch:  ``V(1) >= |v_reset|``       a single 1 must reset it (weakest case)
* disturb: ``v_g - V(0) < v_set``      a 0 input must not be SET
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from .crossbar import STUCK_OFF, STUCK_ON, Crossbar, GateEval, Orientation, divider_voltage, eval_gate
from .device import DEFAULT_PARAMS, DeviceParams, VariationSpec, sample_params
from .errors import ConfigError
from .executor import load_inputs, read_outputs, run
from .mapper import compile_dag
from .netlist import GateDag, eval_dag, parse_netlist

Z95 = 1.959963984540054


@dataclass(frozen=True)
class Condition:
    name: str
    stress: float  # volts
    threshold: float  # volts, as a magnitude
    margin: float  # signed, positive means pass
    passed: bool


@dataclass(frozen=True)
class MarginReport:
    k: int
    v_g: float
    hold: Condition
    switch: Condition
    disturb: Condition

    @property
    def passed(self) -> bool:
        return self.hold.passed and self.switch.passed and self.disturb.passed

    @property
    def failing(self) -> list[str]:
        return [c.name for c in (self.hold, self.switch, self.disturb) if not c.passed]

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "v_g": self.v_g,
            "pass": self.passed,
            "conditions": [asdict(c) for c in (self.hold, self.switch, self.disturb)],
        }

    def to_table(self) -> str:
        lines = [f"MAGIC NOR margins  k={self.k}  v_g={self.v_g:g} V",
                 f"{'condition':<10}{'stress V':>12}{'threshold V':>13}{'margin V':>12}  result"]
        for c in (self.hold, self.switch, self.disturb):
            lines.append(f"{c.name:<10}{c.stress:>12.6f}{c.threshold:>13.6f}{c.margin:>12.6f}  "
                         f"{'pass' if c.passed else 'FAIL'}")
        lines.append(f"overall: {'PASS' if self.passed else 'FAIL'}")
        return "\n".join(lines) + "\n"


def node_voltage(params: DeviceParams, v_g: float, k: int, m: int) -> float:
    """Divider node voltage with m of k inputs at r_on and the output at r_on."""
    r_in = [params.r_on] * m + [params.r_off] * (k - m)
    return divider_voltage(r_in, params.r_on, v_g)


def check_margins(params: DeviceParams, v_g: float, k: int) -> MarginReport:
    if k < 1:
        raise ValueError("fan-in must be at least 1")
    v0 = node_voltage(params, v_g, k, 0)
    v1 = node_voltage(params, v_g, k, 1)
    reset = abs(params.v_reset)
    hold = Condition("hold", v0, reset, reset - v0, v0 < reset)
    switch = Condition("switch", v1, reset, v1 - reset, v1 >= reset)
    stress = v_g - v0
    disturb = Condition("disturb", stress, params.v_set, params.v_set - stress, stress < params.v_set)
    return MarginReport(k, v_g, hold, switch, disturb)


def simulate_nor(params: DeviceParams, v_g: float, k: int):
    """Run a k-input NOR on all 2^k patterns at once (one column per pattern).

    Returns ``(outputs, expected, disturb_events)`` with outputs ordered by
    pattern index (first input is the MSB).
    """
    n = 1 << k
    arr = Crossbar(k + 1, n, params, v_g=v_g)
    idx = np.arange(n)
    for i in range(k):
        arr.bits[i] = (idx >> (k - 1 - i)) & 1
    arr.bits[k] = True
    ev = eval_gate(arr, GateEval(Orientation.COLUMN_PARALLEL, range(k), k, range(n)))
    out = arr.bits[k].astype(np.uint8)
    expected = (idx == 0).astype(np.uint8)
    return out, expected, ev.n_disturb


# --- faults -----------------------------------------------------------------

@dataclass(frozen=True)
class FaultSpec:
    stuck_at_on_prob: float = 0.0
    stuck_at_off_prob: float = 0.0
    seed: int = 0

    def __post_init__(self):
        p, q = self.stuck_at_on_prob, self.stuck_at_off_prob
        if not (0 <= p <= 1 and 0 <= q <= 1 and p + q <= 1):
            raise ValueError("fault probabilities must lie in [0, 1] and sum to at most 1")

    @property
    def is_zero(self) -> bool:
        return self.stuck_at_on_prob == 0 and self.stuck_at_off_prob == 0


@dataclass(frozen=True)
class FaultMap:
    grid: np.ndarray  # HEALTHY / STUCK_ON / STUCK_OFF per cell

    @property
    def n_stuck_on(self) -> int:
        return int(np.count_nonzero(self.grid == STUCK_ON))

    @property
    def n_stuck_off(self) -> int:
        return int(np.count_nonzero(self.grid == STUCK_OFF))

    @property
    def n_faults(self) -> int:
        return self.n_stuck_on + self.n_stuck_off


def fault_grid(shape, spec: FaultSpec, rng: np.random.Generator) -> np.ndarray:
    u = rng.random(shape)
    grid = np.zeros(shape, dtype=np.int8)
    grid[u < spec.stuck_at_on_prob] = STUCK_ON
    grid[(u >= spec.stuck_at_on_prob) & (u < spec.stuck_at_on_prob + spec.stuck_at_off_prob)] = STUCK_OFF
    return grid


def inject_faults(array: Crossbar, spec: FaultSpec) -> FaultMap:
    """Mark cells stuck-at-on / stuck-at-off independently and pin their state."""
    grid = fault_grid(array.shape, spec, np.random.default_rng(spec.seed))
    array.apply_faults(grid)
    return FaultMap(grid)


# --- statistics -------------------------------------------------------------

def wilson_interval(failures: int, trials: int, z: float = Z95) -> tuple[float, float]:
    if trials == 0:
        return (0.0, 1.0)
    p = failures / trials
    z2 = z * z
    denom = 1 + z2 / trials
    centre = (p + z2 / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z2 / (4 * trials * trials)) / denom
    # the exact endpoints at 0 and n failures are 0 and 1; avoid rounding residue
    lo = 0.0 if failures == 0 else max(0.0, centre - half)
    hi = 1.0 if failures == trials else min(1.0, centre + half)
    return (lo, hi)


@dataclass(frozen=True)
class FailureStats:
    trials: int = 0
    failures: int = 0

    def __post_init__(self):
        if not 0 <= self.failures <= self.trials:
            raise ValueError("failures must lie in [0, trials]")

    @property
    def failure_rate(self) -> float:
        return self.failures / self.trials if self.trials else 0.0

    @property
    def wilson_ci95(self) -> tuple[float, float]:
        return wilson_interval(self.failures, self.trials)

    def __add__(self, other: "FailureStats") -> "FailureStats":
        return FailureStats(self.trials + other.trials, self.failures + other.failures)

    def to_dict(self) -> dict:
        lo, hi = self.wilson_ci95
        return {"trials": self.trials, "failures": self.failures,
                "failure_rate": self.failure_rate, "ci_lo": lo, "ci_hi": hi}


def monotone_within_ci(stats: list[FailureStats]) -> bool:
    """True unless some later interval lies entirely below an earlier one."""
    for a, b in zip(stats, stats[1:]):
        if b.wilson_ci95[1] < a.wilson_ci95[0]:
            return False
    return True


# --- Monte Carlo --------------------------------------------------------------

def derive_seed(*keys: int) -> int:
    return int(np.random.SeedSequence([int(k) for k in keys]).generate_state(1, np.uint64)[0])


_INPUT_STREAM, _FAULT_STREAM, _PARAM_STREAM = 1, 2, 3


def trial_params(nominal: DeviceParams, variation: VariationSpec, seed: int, trial: int, row_size: int):
    """Per-cell parameter grids (4 arrays of length row_size) for one trial's row."""
    if variation.is_zero:
        return [np.full(row_size, getattr(nominal, f)) for f in ("r_on", "r_off", "v_set", "v_reset")]
    vs = VariationSpec(variation.sigma_r, variation.sigma_v,
                       derive_seed(seed, _PARAM_STREAM, variation.seed, trial))
    cells = [sample_params(nominal, vs, (0, c)) for c in range(row_size)]
    return [np.array([getattr(p, f) for p in cells]) for f in ("r_on", "r_off", "v_set", "v_reset")]


def run_trials(
    nor_dag: GateDag, trace, mapping, trials, variation: VariationSpec, faults: FaultSpec,
    v_g: float, seed: int, nominal: DeviceParams = DEFAULT_PARAMS,
) -> FailureStats:
    """Evaluate the given trial indices as rows of one array; order of indices is irrelevant."""
    trials = sorted(int(t) for t in trials)
    n = len(trials)
    if n == 0:
        return FailureStats()
    row_size = mapping.row_size
    arr = Crossbar(n, row_size, nominal, v_g=v_g)
    n_in = len(mapping.input_cells)
    vecs = np.empty((n, n_in), dtype=np.uint8)
    fgrid = np.zeros((n, row_size), dtype=np.int8)
    for j, t in enumerate(trials):
        if not variation.is_zero:
            arr.r_on[j], arr.r_off[j], arr.v_set[j], arr.v_reset[j] = trial_params(
                nominal, variation, seed, t, row_size)
        if not faults.is_zero:
            rng = np.random.default_rng(derive_seed(seed, _FAULT_STREAM, faults.seed, t))
            fgrid[j] = fault_grid(row_size, faults, rng)
        vecs[j] = np.random.default_rng(derive_seed(seed, _INPUT_STREAM, t)).integers(0, 2, n_in)
    if not faults.is_zero:
        arr.apply_faults(fgrid)
    rows = range(n)
    load_inputs(arr, mapping, rows, vecs)
    run(trace, arr, rows=rows, strict=False)
    got = read_outputs(arr, mapping, rows)
    expected = eval_dag(nor_dag, {name: vecs[:, i] for i, name in enumerate(mapping.input_cells)})
    exp = np.stack([np.broadcast_to(np.asarray(expected[name], dtype=np.uint8), (n,))
                    for name in mapping.output_cells], axis=1)
    failures = int(np.count_nonzero((got != exp).any(axis=1)))
    return FailureStats(n, failures)


def monte_carlo(
    dag: GateDag,
    row_size: int,
    variation: VariationSpec,
    faults: FaultSpec,
    v_g: float,
    trials: int,
    seed: int,
    nominal: DeviceParams = DEFAULT_PARAMS,
    k_max: int = 4,
    chunk: int = 4096,
) -> FailureStats:
    """Failure rate of the compiled ``dag`` under variation and stuck-at faults.

    Each trial gets its own varied parameters, faults and random input
    vector, all derived from ``(seed, trial)``; a trial fails when any
    primary output differs from the reference evaluation.
    """
    nor_dag, trace, mapping = compile_dag(dag, row_size, k_max=k_max)
    total = FailureStats()
    for start in range(0, trials, chunk):
        total += run_trials(nor_dag, trace, mapping, range(start, min(trials, start + chunk)),
                            variation, faults, v_g, seed, nominal)
    return total


# --- campaigns ----------------------------------------------------------------

@dataclass
class Campaign:
    dag: str
    row_size: int
    trials: int
    seed: int
    format: str = "structural"
    sigma_r: list = field(default_factory=lambda: [0.0])
    sigma_v: list = field(default_factory=lambda: [0.0])
    stuck_at_on_prob: float = 0.0
    stuck_at_off_prob: float = 0.0
    v_g: float = 1.0
    k_max: int = 4
    device: dict = field(default_factory=dict)
    base_dir: str = "."

    @classmethod
    def from_json(cls, text: str, base_dir=".") -> "Campaign":
        doc = json.loads(text)
        if not isinstance(doc, dict):
            raise ConfigError("campaign must be a JSON object")
        known = {f.name for f in fields(cls)} - {"base_dir"}
        unknown = set(doc) - known
        if unknown:
            raise ConfigError(f"unknown campaign key(s): {sorted(unknown)}")
        missing = {"dag", "row_size", "trials", "seed"} - doc.keys()
        if missing:
            raise ConfigError(f"campaign missing key(s): {sorted(missing)}")
        for key in ("sigma_r", "sigma_v"):
            if key in doc and not isinstance(doc[key], list):
                doc[key] = [doc[key]]
        unknown_dev = set(doc.get("device", {})) - {"r_on", "r_off", "v_set", "v_reset"}
        if unknown_dev:
            raise ConfigError(f"unknown device key(s): {sorted(unknown_dev)}")
        return cls(base_dir=str(base_dir), **doc)

    @property
    def nominal(self) -> DeviceParams:
        return DeviceParams(**{**asdict(DEFAULT_PARAMS), **self.device})

    def load_dag(self) -> GateDag:
        path = Path(self.base_dir) / self.dag
        return parse_netlist(path.read_text(), self.format)


@dataclass(frozen=True)
class SweepPoint:
    sigma_r: float
    sigma_v: float
    stats: FailureStats

    def to_dict(self) -> dict:
        return {"sigma_r": self.sigma_r, "sigma_v": self.sigma_v, **self.stats.to_dict()}


def run_campaign(c: Campaign, dag: GateDag | None = None) -> list[SweepPoint]:
    dag = dag if dag is not None else c.load_dag()
    faults = FaultSpec(c.stuck_at_on_prob, c.stuck_at_off_prob, seed=c.seed)
    points = []
    for sr, sv in itertools.product(c.sigma_r, c.sigma_v):
        stats = monte_carlo(dag, c.row_size, VariationSpec(sr, sv, c.seed), faults,
                            c.v_g, c.trials, c.seed, nominal=c.nominal, k_max=c.k_max)
        points.append(SweepPoint(sr, sv, stats))
    return points


def sweep_csv(points: list[SweepPoint]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["sigma_r", "sigma_v", "trials", "failures", "rate", "ci_lo", "ci_hi"])
    for p in points:
        lo, hi = p.stats.wilson_ci95
        w.writerow([repr(p.sigma_r), repr(p.sigma_v), p.stats.trials, p.stats.failures,
                    repr(p.stats.failure_rate), repr(lo), repr(hi)])
    return buf.getvalue()
