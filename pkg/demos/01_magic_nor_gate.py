# %% [markdown]
# A single MAGIC NOR gate, from the voltage divider up.
#
# The inputs sit in parallel, in series with the output cell, across the gate
# voltage. The output starts at logical 1 (r_on). It resets to 0 only when
# the divider pushes more than |v_reset| across it.

# %%
import itertools

import numpy as np

from mmpu.crossbar import Crossbar, GateEval, Orientation, divider_voltage, eval_gate
from mmpu.device import DEFAULT_PARAMS as P

print(P)

# %%
# Node voltage for every count of "on" inputs of a 2-input gate
for m in range(3):
    r_in = [P.r_on] * m + [P.r_off] * (2 - m)
    v = divider_voltage(r_in, P.r_on, 1.0)
    print(f"{m} inputs on: node {v:.6f} V, output cell sees {-v:+.4f} V, "
          f"reset threshold {P.v_reset} V")

# %%
# Evaluate all four patterns at once, one column per pattern
arr = Crossbar(3, 4)
pats = np.array(list(itertools.product([0, 1], repeat=2)))
arr.bits[0], arr.bits[1] = pats[:, 0], pats[:, 1]
arr.bits[2] = True  # INIT the output row
events = eval_gate(arr, GateEval(Orientation.COLUMN_PARALLEL, [0, 1], 2, range(4)))

print("patterns:", ["".join(map(str, p)) for p in pats])
print("outputs: ", arr.bits[2].astype(int).tolist())
for e in events:
    print("event", e)
