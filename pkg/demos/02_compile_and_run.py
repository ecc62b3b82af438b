# %% [markdown]
# Compile a full adder into one crossbar row, then run that same trace on
# every row at once. The cycle count does not depend on how many rows run.

# %%
import numpy as np

from mmpu import corpus
from mmpu.crossbar import Crossbar
from mmpu.executor import load_inputs, read_outputs, run
from mmpu.isa import emit_trace, validate_trace
from mmpu.mapper import compile_dag

dag = corpus.full_adder()
nor_dag, trace, mapping = compile_dag(dag, row_size=16)
print(f"{dag.gate_count} gates lower to {nor_dag.gate_count} NORs")
print(f"peak cells {mapping.peak_cells} of {mapping.row_size}")
print(emit_trace(trace))
print("validation:", validate_trace(trace))

# %%
# Eight rows, one per input pattern (a, b, cin)
patterns = np.array([[(i >> 2) & 1, (i >> 1) & 1, i & 1] for i in range(8)])
arr = Crossbar(8, 16)
load_inputs(arr, mapping, range(8), patterns)
stats = run(trace, arr, rows=range(8))
out = read_outputs(arr, mapping, range(8))
for p, (s, c) in zip(patterns, out):
    print(p, "->", "sum", s, "cout", c, "| expected", p.sum() & 1, p.sum() >> 1)
print(stats.to_table())

# %%
# Same trace over 1024 rows: same cycle count
big = Crossbar(1024, 16)
load_inputs(big, mapping, range(1024), patterns[np.arange(1024) % 8])
print("cycles for 8 rows:", stats.cycles, " for 1024 rows:", run(trace, big, rows=range(1024)).cycles)
