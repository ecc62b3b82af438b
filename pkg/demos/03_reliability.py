# %% [markdown]
# When does MAGIC stop working? First the closed-form margins, then Monte
# Carlo runs of the compiled full adder under threshold variation.

# %%
import numpy as np

from mmpu import corpus
from mmpu.device import DeviceParams, VariationSpec
from mmpu.reliability import FaultSpec, check_margins, monte_carlo, simulate_nor

print(check_margins(DeviceParams(), 1.0, 2).to_table())

# %%
# Raising |v_reset| past the one-input node voltage breaks the gate
for v_reset in (-0.3, -0.5, -0.6, -0.8):
    p = DeviceParams(v_reset=v_reset)
    out, expected, _ = simulate_nor(p, 1.0, 2)
    print(f"v_reset {v_reset:+.1f} V: margins {'pass' if check_margins(p, 1.0, 2).passed else 'FAIL'}, "
          f"NOR outputs {out.tolist()} (want {expected.tolist()})")

# %%
# Threshold spread, 5000 trials per point, fixed seed
for sigma_v in (0.0, 0.05, 0.1, 0.15):
    s = monte_carlo(corpus.full_adder(), 16, VariationSpec(0.0, sigma_v, 1), FaultSpec(),
                    1.0, 5000, seed=11)
    lo, hi = s.wilson_ci95
    print(f"sigma_v {sigma_v:<5} failure rate {s.failure_rate:.4f}  95% CI [{lo:.4f}, {hi:.4f}]")

# %%
# Stuck-at faults on top of nominal devices
for p_fault in (1e-3, 1e-2):
    s = monte_carlo(corpus.full_adder(), 16, VariationSpec(), FaultSpec(p_fault, p_fault, 3),
                    1.0, 5000, seed=11)
    print(f"stuck-at prob {p_fault:g} each: failure rate {s.failure_rate:.4f}")
