"""Counterfactuals under curved untreated trends.

Both groups follow a quadratic path and nothing happens at t0 = 6, so every
non-zero "effect" below is bias. The four designs extrapolate the pre-period in
different ways and miss by different amounts.
"""

from didcits import ALL_DESIGNS, DesignSpec, estimate
from didcits.simulation import DgpSpec, generate_panel

panel = generate_panel(DgpSpec("quadratic"))

print("time  observed  " + "  ".join(f"{d.value:>14}" for d in ALL_DESIGNS))
results = {d: estimate(panel, DesignSpec(d, t0=6)) for d in ALL_DESIGNS}
first = results[ALL_DESIGNS[0]]
for t in first.post_times:
    cf = "  ".join(f"{results[d].counterfactual[t]:14.4f}" for d in ALL_DESIGNS)
    print(f"{t:>4}  {first.observed_treated[t]:8.4f}  {cf}")

print("\nbias (estimated ATT, truth is 0)")
for d, res in results.items():
    print(f"{d.value:>14}: " + " ".join(f"{v:8.4f}" for v in res.att_points()))
