"""Acceptance criteria, one test each; every test prints a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v`` or ``python3 tests/test_acceptance.py``.
"""

import itertools
import sys
import time
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from mmpu import corpus  # noqa: E402
from mmpu.costmodel import CpuConfig, PimConfig, compare, pim_throughput  # noqa: E402
from mmpu.crossbar import Crossbar, GateEval, Orientation, eval_gate  # noqa: E402
from mmpu.device import DEFAULT_PARAMS, DeviceParams, VariationSpec  # noqa: E402
from mmpu.executor import run  # noqa: E402
from mmpu.isa import parse_trace, validate_trace  # noqa: E402
from mmpu.mapper import compile_dag  # noqa: E402
from mmpu.reliability import (FaultSpec, check_margins, monotone_within_ci,  # noqa: E402
                              monte_carlo, simulate_nor)

from _util import execute_all_patterns, oracle_matrix  # noqa: E402

_capsys = None


@pytest.fixture(autouse=True)
def _grab(capsys):
    global _capsys
    _capsys = capsys
    yield
    _capsys = None


def verdict(name, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'}  {name}: {detail}"
    if _capsys is not None:
        with _capsys.disabled():
            print("\n" + line)
    else:
        print(line)
    assert ok, line


def test_nor_physics():
    t0 = time.perf_counter()
    bad, disturb = [], 0
    for k in range(1, 5):
        for pat in itertools.product([0, 1], repeat=k):
            arr = Crossbar(k + 1, 1)
            arr.bits[:k, 0] = pat
            arr.bits[k, 0] = True
            ev = eval_gate(arr, GateEval(Orientation.COLUMN_PARALLEL, range(k), k, [0]))
            disturb += ev.n_disturb
            if int(arr.bits[k, 0]) != int(not any(pat)):
                bad.append(pat)
    dt = time.perf_counter() - t0
    verdict("NOR physics", not bad and disturb == 0 and dt < 1.0,
            f"30 patterns k=1..4, mismatches={len(bad)}, disturb={disturb}, {dt:.3f}s (<1s)")


def test_single_cycle_simd():
    t0 = time.perf_counter()
    trace = parse_trace("ARRAY 1 3\nROW 0\nINPUTS r=0 c=0-1\nINIT R r=0 out=2\nNOR R r=0 in=0,1 out=2\n")
    cycles, correct = {}, True
    for n in (1, 64, 1024):
        arr = Crossbar(n, 3)
        bits = np.random.default_rng(n).integers(0, 2, (n, 2)).astype(bool)
        arr.bits[:, :2] = bits
        cycles[n] = run(trace, arr, rows=range(n)).cycles
        correct &= bool(np.array_equal(arr.bits[:, 2], ~(bits[:, 0] | bits[:, 1])))
    dt = time.perf_counter() - t0
    verdict("single-cycle SIMD", set(cycles.values()) == {2} and correct and dt < 5.0,
            f"cycles by row count {cycles}, per-row outputs correct={correct}, {dt:.2f}s (<5s)")


def test_compiler_oracle_equivalence():
    t0 = time.perf_counter()
    dags = corpus.standard_corpus()
    failed = [name for name, dag in dags.items()
              if not np.array_equal(execute_all_patterns(dag, 64)[0], oracle_matrix(dag))]
    dt = time.perf_counter() - t0
    verdict("compiler oracle equivalence", not failed and dt < 120,
            f"{len(dags) - len(failed)}/{len(dags)} circuits match exhaustively, {dt:.1f}s (<120s)")


def test_single_row_init_discipline():
    dags = corpus.standard_corpus()
    violations = {}
    for name, dag in dags.items():
        _, trace, _ = compile_dag(dag, 64)
        rep = validate_trace(trace)
        if not rep.ok:
            violations[name] = rep.rules()
    verdict("single-row and init discipline", not violations,
            f"{len(dags)} compiled traces, traces with violations={len(violations)}")


def test_cell_reuse():
    _, trace, m = compile_dag(corpus.not_chain(64), 8)
    ok = m.peak_working_cells <= 3 and m.peak_working_cells < 64 and validate_trace(trace).ok
    verdict("cell reuse", ok,
            f"64-stage NOT chain in an 8-cell row: peak working cells={m.peak_working_cells} "
            f"(<=3, naive 64), {len(trace.ops)} cycles")


def random_params(rng):
    r_on = 10 ** rng.uniform(2, 4)
    return DeviceParams(r_on, r_on * 10 ** rng.uniform(0.5, 3.5), rng.uniform(0.2, 2.5),
                        -rng.uniform(0.05, 1.5)), rng.uniform(0.3, 2.5)


def test_margin_simulation_consistency():
    t0 = time.perf_counter()
    rng = np.random.default_rng(20240)
    n_sets, agree, total, passes = 1000, 0, 0, 0
    for _ in range(n_sets):
        p, v_g = random_params(rng)
        for k in range(1, 5):
            margin_ok = check_margins(p, v_g, k).passed
            out, exp, disturb = simulate_nor(p, v_g, k)
            sim_ok = bool(np.array_equal(out, exp)) and disturb == 0
            agree += margin_ok == sim_ok
            passes += margin_ok
            total += 1
    dt = time.perf_counter() - t0
    verdict("margin-simulation consistency", agree == total and dt < 60,
            f"{n_sets} parameter sets x k=1..4: agreement {agree}/{total} "
            f"({passes} passing cases), {dt:.1f}s (<60s)")


def test_high_reset_threshold_failure():
    p = DeviceParams(v_reset=-0.8)
    m = check_margins(p, 1.0, 2)
    out, exp, _ = simulate_nor(p, 1.0, 2)
    pats = ["".join(map(str, bits)) for bits in itertools.product([0, 1], repeat=2)]
    wrong = {pats[i] for i in np.flatnonzero(out != exp)}
    one_hot = {"01", "10"}
    ok = "switch" in m.failing and wrong == one_hot
    verdict("high-threshold MAGIC failure", ok,
            f"margins failing={m.failing}; wrong patterns={sorted(wrong)} vs one-hot {sorted(one_hot)}"
            f" (with both inputs on, the node sits at {2 / 3:.3f} V, also below 0.8 V)")


def test_variation_monotonicity():
    t0 = time.perf_counter()
    sigmas = [0.0, 0.02, 0.05, 0.10]
    stats = [monte_carlo(corpus.full_adder(), 16, VariationSpec(0.0, s, 1), FaultSpec(), 1.0,
                         10_000, seed=2024, nominal=DEFAULT_PARAMS) for s in sigmas]
    dt = time.perf_counter() - t0
    ok = stats[0].failures == 0 and monotone_within_ci(stats) and dt < 60
    rates = ", ".join(f"{s:g}:{st.failure_rate:.4f}" for s, st in zip(sigmas, stats))
    verdict("variation monotonicity", ok, f"full adder, 10k trials each, rate by sigma_v {{{rates}}}, {dt:.1f}s (<60s)")


def test_cost_model_properties():
    base = PimConfig(3, 512, 1e9, 22)
    linear = (pim_throughput(PimConfig(6, 512, 1e9, 22)) == 2 * pim_throughput(base)
              and pim_throughput(PimConfig(3, 1024, 1e9, 22)) == 2 * pim_throughput(base))
    cpu = CpuConfig(ops_per_element=20, compute_rate=1e14, bytes_per_element=8, bandwidth=5e10)
    v = compare(base, cpu)
    be = v.break_even_bytes_per_element
    eps = 1e-9
    below = compare(base, CpuConfig(20, 1e14, be * (1 - eps), 5e10)).beneficial
    above = compare(base, CpuConfig(20, 1e14, be * (1 + eps), 5e10)).beneficial
    verdict("cost-model properties", linear and v.cpu_bandwidth_bound and not below and above,
            f"linearity exact={linear}; break-even {be:.6g} B/elem, beneficial at -eps={below}, +eps={above}")


if __name__ == "__main__":
    failures = 0
    for name, fn in list(globals().items()):
        if name.startswith("test_") and callable(fn):
            try:
                fn()
            except AssertionError:
                failures += 1
            except Exception as exc:
                print(f"FAIL  {name}: {type(exc).__name__}: {exc}")
                failures += 1
    sys.exit(1 if failures else 0)
