import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mmpu import corpus
from mmpu.crossbar import Crossbar, Orientation, force_write
from mmpu.errors import ArityMismatch, UninitializedOutput
from mmpu.executor import load_inputs, read_outputs, run
from mmpu.isa import Init, Nor, Trace, parse_trace
from mmpu.mapper import compile_dag

from _util import pattern_matrix

R = Orientation.ROW_LOCAL
NOR2 = parse_trace("ARRAY 1 3\nROW 0\nINPUTS r=0 c=0-1\nINIT R r=0 out=2\nNOR R r=0 in=0,1 out=2\n")


@pytest.mark.parametrize("n", [1, 64, 1024])
def test_single_cycle_simd(n):
    arr = Crossbar(n, 3)
    rng = np.random.default_rng(n)
    bits = rng.integers(0, 2, (n, 2)).astype(bool)
    arr.bits[:, :2] = bits
    stats = run(NOR2, arr, rows=range(n))
    assert stats.cycles == 2 and stats.rows == n
    assert np.array_equal(arr.bits[:, 2], ~(bits[:, 0] | bits[:, 1]))


def test_full_adder_row0():
    _, trace, m = compile_dag(corpus.full_adder(), 16)
    arr = Crossbar(1, 16)
    load_inputs(arr, m, [0], [[1, 1, 0]])
    run(trace, arr)
    assert read_outputs(arr, m, [0]).tolist() == [[0, 1]]


def test_empty_trace():
    arr = Crossbar(2, 2)
    arr.bits[0, 1] = True
    before = arr.copy()
    assert run(Trace(2, 2), arr).cycles == 0
    assert arr.state_equal(before)


def test_load_inputs_cases():
    _, _, m = compile_dag(corpus.xor2(), 8)
    arr = Crossbar(2, 8)
    load_inputs(arr, m, [0, 1], [(0, 1), (1, 1)])
    assert arr.bits[:, :2].astype(int).tolist() == [[0, 1], [1, 1]]
    load_inputs(arr, m, [], [])
    with pytest.raises(ArityMismatch):
        load_inputs(arr, m, [0], [(0, 1, 1)])


def test_xor_outputs():
    _, trace, m = compile_dag(corpus.xor2(), 8)
    arr = Crossbar(2, 8)
    load_inputs(arr, m, [0, 1], [(1, 0), (0, 0)])
    run(trace, arr, rows=[0, 1])
    assert read_outputs(arr, m, [0, 1])[:, 0].tolist() == [1, 0]


def test_read_before_run():
    _, _, m = compile_dag(corpus.xor2(), 8)
    arr = Crossbar(3, 8)
    for c in m.output_cells.values():
        for r in range(3):
            force_write(arr, r, c, 0)
    assert not read_outputs(arr, m, range(3)).any()


def test_strict_uninitialized():
    t = Trace(1, 3, (Nor(R, (0, 1), 2, frozenset([0])),), 0)
    with pytest.raises(UninitializedOutput) as exc:
        run(t, Crossbar(1, 3))
    assert exc.value.op_index == 0
    stats = run(t, Crossbar(1, 3), strict=False)
    assert stats.nor_ops == 1


def test_stats_accounting():
    arr = Crossbar(4, 3)
    arr.bits[:, 0] = [0, 1, 0, 1]
    s = run(NOR2, arr, rows=range(4), energy_per_event=2e-12)
    # INIT sets 4 cells, the NOR then resets the two rows whose input is 1
    assert (s.init_ops, s.nor_ops, s.set_events, s.reset_events) == (1, 1, 4, 2)
    assert s.energy_proxy == 6 and s.energy_joules == pytest.approx(12e-12)
    assert s.cycles_without_init == 1
    assert "energy_joules" in s.to_dict()
    assert s.to_table().splitlines()[0].startswith("cycles")


def test_reads_recorded_per_row():
    t = parse_trace("ARRAY 1 2\nROW 0\nWRITE r=0 c=1 v=1\nREAD r=0 c=0,1\n")
    arr = Crossbar(3, 2)
    s = run(t, arr, rows=[0, 2])
    assert s.reads == [(1, 0, [0, 1]), (1, 2, [0, 1])]


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**31), rows=st.lists(st.integers(0, 31), min_size=1, max_size=8, unique=True))
def test_simd_equivalence(seed, rows):
    dag = corpus.random_nor_dag(seed, n_inputs=4, n_gates=12)
    _, trace, m = compile_dag(dag, 32)
    vecs = pattern_matrix(4)[np.random.default_rng(seed).integers(0, 16, len(rows))]
    together = Crossbar(32, 32)
    load_inputs(together, m, rows, vecs)
    s_all = run(trace, together, rows=rows)
    alone = Crossbar(32, 32)
    load_inputs(alone, m, rows, vecs)
    for r in rows:
        s_one = run(trace, alone, rows=[r])
        assert s_one.cycles == s_all.cycles
    assert together.state_equal(alone)


def test_deterministic_runs():
    _, trace, m = compile_dag(corpus.ripple_adder(4), 32)
    outs = []
    for _ in range(2):
        arr = Crossbar(512, 32)
        load_inputs(arr, m, range(512), pattern_matrix(9))
        outs.append((run(trace, arr, rows=range(512)).to_dict(), arr.bits.copy()))
    assert outs[0][0] == outs[1][0] and np.array_equal(outs[0][1], outs[1][1])


def test_multi_row_init_c_orientation():
    t = Trace(4, 4, (Init(Orientation.COLUMN_PARALLEL, (3,), frozenset(range(4))),))
    arr = Crossbar(4, 4)
    assert run(t, arr).set_events == 4 and arr.bits[3].all()
