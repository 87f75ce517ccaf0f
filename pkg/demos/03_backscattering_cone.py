#!/usr/bin/env python3
"""
Angular profile of the crossed intensity around exact backscattering.

The two-atom interference term carries the phase exp(i k.(r1 - r2)); away
from the backward direction it dephases over the configuration average, on
an angular scale of about 1/(k0 r_mean).

With the pair distance confined to one wavelength around r_mean, the
orientation average of the phase behaves like sin(x)/x with x = theta k0 r,
so the profile is a damped oscillation rather than a smooth cone.
"""
import numpy as np

from twoatom_cbs import AverageSpec, DriveParams, theta_profile

params = DriveParams.from_saturation(1.0)
# the cone wings need a finer orientation lattice than the cone top
spec = AverageSpec(n_orient=512)
thetas = np.linspace(0.0, 0.02, 11)

crossed, err, ladder = theta_profile(params, thetas, spec)
print(f"ladder L_tot = {ladder:.4f}")
print(f"{'theta':>8} {'theta k0 r':>10} {'C_tot':>10} {'err':>9}")
for t, c, e in zip(thetas, crossed, err):
    print(f"{t:8.4f} {t * spec.r_mean:10.1f} {c:10.4f} {e:9.2e}")
