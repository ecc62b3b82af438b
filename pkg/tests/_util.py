"""Shared helpers: run a compiled trace on every input pattern at once."""

import numpy as np

from mmpu.crossbar import Crossbar
from mmpu.executor import load_inputs, read_outputs, run
from mmpu.mapper import compile_dag
from mmpu.netlist import all_patterns


def pattern_matrix(n_inputs):
    """All 2^n input vectors, one per row, first input as the MSB."""
    idx = np.arange(1 << n_inputs)
    return ((idx[:, None] >> np.arange(n_inputs - 1, -1, -1)) & 1).astype(np.uint8)


def execute_all_patterns(dag, row_size=64, k_max=4, params=None):
    """Compile ``dag`` and execute it with pattern p placed in row p.

    Returns (got, nor_dag, trace, mapping, stats) with ``got`` shaped
    (2^n, n_outputs) in mapping output order.
    """
    nor_dag, trace, mapping = compile_dag(dag, row_size, k_max=k_max)
    vecs = pattern_matrix(len(dag.inputs))
    arr = Crossbar(len(vecs), row_size, params)
    rows = range(len(vecs))
    load_inputs(arr, mapping, rows, vecs)
    stats = run(trace, arr, rows=rows)
    return read_outputs(arr, mapping, rows), nor_dag, trace, mapping, stats


def expected_outputs(dag, reference):
    """Expected matrix built by calling ``reference(**inputs) -> dict`` row by row."""
    names = dag.input_names
    rows = []
    for vec in pattern_matrix(len(names)):
        out = reference(**dict(zip(names, map(int, vec))))
        rows.append([out[o] for o in dag.output_names])
    return np.array(rows, dtype=np.uint8)


def oracle_matrix(dag):
    from mmpu.netlist import eval_dag
    out = eval_dag(dag, all_patterns(dag.input_names))
    n = 1 << len(dag.inputs)
    return np.stack([np.broadcast_to(np.asarray(out[o], dtype=np.uint8), (n,))
                     for o in dag.output_names], axis=1)
