# %% [markdown]
# Is the mMPU worth it for a given workload? A trace costs its cycle count
# once for every row of every array; the CPU is capped by compute or by
# memory bandwidth, whichever binds first.

# %%
import numpy as np

from mmpu import corpus
from mmpu.costmodel import CpuConfig, PimConfig, compare, sweep
from mmpu.isa import cycle_count
from mmpu.mapper import compile_dag

_, trace, _ = compile_dag(corpus.ripple_adder(4), 32)
cycles = cycle_count(trace)
pim = PimConfig(arrays=16, rows_per_array=512, frequency=1e8, cycles_per_element=cycles)
cpu = CpuConfig(ops_per_element=8, compute_rate=1e11, bytes_per_element=2, bandwidth=1e11)
print(f"4-bit adder: {cycles} cycles per element")
print(compare(pim, cpu).to_table())

# %%
# The verdict flips where the CPU's bandwidth bound meets the PIM rate
for row in sweep(pim, cpu, "bytes_per_element", np.geomspace(0.5, 64, 8)):
    print(f"{row['bytes_per_element']:7.2f} B/elem  speedup {row['speedup']:8.3f}  "
          f"{'PIM' if row['beneficial'] else 'CPU'}")
