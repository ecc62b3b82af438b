import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from mmpu import corpus
from mmpu.costmodel import (CpuConfig, PimConfig, compare, configs_from_json, cpu_throughput,
                            pim_throughput, sweep, sweep_csv)
from mmpu.errors import ConfigError
from mmpu.isa import cycle_count
from mmpu.mapper import compile_dag

CPU_BW = CpuConfig(ops_per_element=10, compute_rate=1e11, bytes_per_element=8, bandwidth=1e10)


def test_unit_case():
    assert pim_throughput(PimConfig(1, 1, 1, 1)) == 1.0


def test_linearity_exact():
    base = pim_throughput(PimConfig(3, 5, 7e8, 11))
    assert pim_throughput(PimConfig(6, 5, 7e8, 11)) == 2 * base
    assert pim_throughput(PimConfig(3, 10, 7e8, 11)) == 2 * base
    assert pim_throughput(PimConfig(3, 5, 7e8, 22)) == base / 2


def test_full_adder_throughput():
    _, trace, _ = compile_dag(corpus.full_adder(), 16)
    c = cycle_count(trace)
    assert c == 22
    assert pim_throughput(PimConfig(1024, 512, 1e9, c)) == pytest.approx(524288e9 / 22, rel=1e-15)


def test_transfer_cycles_additive():
    assert pim_throughput(PimConfig(1, 1, 100, 6, transfer_cycles=4)) == 10.0


def test_cpu_bounds():
    assert cpu_throughput(CpuConfig(4, 1e9, 8, 1e30)) == 2.5e8
    assert cpu_throughput(CpuConfig(4, 1e30, 8, 1e9)) == 1.25e8
    assert cpu_throughput(CpuConfig(4, 1e9, 4, 1e9)) == 2.5e8


def test_equal_throughput_not_beneficial():
    v = compare(PimConfig(1, 1, 1e6, 1), CpuConfig(1, 1e6, 1, 1e12))
    assert v.speedup == 1.0 and not v.beneficial


def test_break_even_flip():
    pim = PimConfig(1, 100, 1e7, 10)  # 1e8 elem/s
    v = compare(pim, CPU_BW)
    be = v.break_even_bytes_per_element
    assert v.cpu_bandwidth_bound and be == pytest.approx(100.0)
    eps = 1e-9
    lo = compare(pim, CpuConfig(10, 1e11, be * (1 - eps), 1e10))
    hi = compare(pim, CpuConfig(10, 1e11, be * (1 + eps), 1e10))
    assert not lo.beneficial and hi.beneficial


def test_no_break_even_when_pim_beats_compute_bound():
    v = compare(PimConfig(1, 1e3, 1e9, 1), CpuConfig(10, 1e9, 1, 1e30))
    assert v.beneficial and v.break_even_bytes_per_element is None


def test_break_even_from_compute_bound_side():
    pim = PimConfig(1, 100, 1e7, 10)  # 1e8 elem/s
    cpu = CpuConfig(10, 1e11, 1, 1e10)  # compute-bound at 1e10 elem/s
    v = compare(pim, cpu)
    assert not v.cpu_bandwidth_bound and v.break_even_bytes_per_element == pytest.approx(100.0)
    assert compare(pim, CpuConfig(10, 1e11, 100 * (1 + 1e-9), 1e10)).beneficial


def test_huge_cycles_limit():
    v = compare(PimConfig(1, 1, 1e9, 1e300), CPU_BW)
    assert v.speedup < 1e-280 and not v.beneficial


def test_rescaling_invariance_exact_power_of_two():
    pim, cpu = PimConfig(7, 3, 1.3e9, 41), CpuConfig(9, 3.7e10, 13, 2.9e10)
    s = 2.0 ** 10
    scaled = compare(PimConfig(7, 3, 1.3e9 * s, 41), CpuConfig(9, 3.7e10 * s, 13, 2.9e10 * s))
    assert scaled.speedup == compare(pim, cpu).speedup


pos = st.floats(1e-3, 1e12, allow_nan=False, allow_infinity=False)


@given(a=pos, r=pos, f=pos, c=pos, o=pos, cr=pos, b=pos, bw=pos, s=st.floats(1e-6, 1e6))
def test_rescaling_invariance(a, r, f, c, o, cr, b, bw, s):
    base = compare(PimConfig(a, r, f, c), CpuConfig(o, cr, b, bw)).speedup
    scaled = compare(PimConfig(a, r, f * s, c), CpuConfig(o, cr * s, b, bw * s)).speedup
    assert scaled == pytest.approx(base, rel=1e-12)


def test_validation_and_json():
    with pytest.raises(ValueError):
        PimConfig(0, 1, 1, 1)
    with pytest.raises(ValueError):
        CpuConfig(1, 1, 1, -1)
    pim, cpu = configs_from_json(json.dumps({"pim": {"arrays": 1, "rows_per_array": 2, "frequency": 3,
                                                     "cycles_per_element": 4}, "cpu": CPU_BW.__dict__}))
    assert pim.rows_per_array == 2 and cpu == CPU_BW
    for bad in ['{"pim": {}, "cpu": {}, "gpu": {}}', '{"pim": {"arrays": 1, "x": 2}, "cpu": {}}',
                '{"pim": {"arrays": -1}, "cpu": {}}']:
        with pytest.raises(ConfigError):
            configs_from_json(bad)


def test_sweep_csv():
    rows = sweep(PimConfig(1, 100, 1e7, 10), CPU_BW, "bytes_per_element", [50.0, 150.0])
    assert [r["beneficial"] for r in rows] == [False, True]
    lines = sweep_csv(rows).splitlines()
    assert lines[0].startswith("bytes_per_element,pim_tput") and len(lines) == 3
    with pytest.raises(ValueError):
        sweep(PimConfig(1, 1, 1, 1), CPU_BW, "nonsense", [1])


def test_verdict_table():
    t = compare(PimConfig(1, 100, 1e7, 10), CPU_BW).to_table()
    assert "break-even bytes/element  100" in t
