#!/usr/bin/env python3
"""
Split of the double-scattering signal into elastic and inelastic parts.

The elastic ladder intensity has a closed form, 24 pi s / ((1+delta)(1+s)^4)
in units of the mean |g|^2, which the numerical average reproduces. The
total ladder intensity peaks near s ~ 0.7 and falls off like 1/s, the elastic
one peaks at s = 1/3 and falls like 1/s^3.
"""
import numpy as np

from twoatom_cbs import AverageSpec, cbs_at, elastic_analytic

spec = AverageSpec(n_orient=64)

print(f"{'s':>8} {'L_tot':>10} {'L_el':>10} {'closed form':>12} {'C_tot':>10} {'C_el':>10}")
for s in np.geomspace(0.01, 100, 9):
    p = cbs_at(s, spec=spec)
    print(f"{s:8.3g} {p.L_tot:10.5f} {p.L_el:10.5f} {float(elastic_analytic(p.s)):12.5f} "
          f"{p.C_tot:10.5f} {p.C_el:10.5f}")

# %%
"""
Log-log slopes between s = 100 and s = 1000.
"""
lo, hi = cbs_at(100.0, spec=spec), cbs_at(1000.0, spec=spec)
print("L_tot slope:", np.log(hi.L_tot / lo.L_tot) / np.log(10))
print("L_el  slope:", np.log(hi.L_el / lo.L_el) / np.log(10))
