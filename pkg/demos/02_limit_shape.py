# Limit shape and arctic curve
# ============================
#
# Scale the hexagon by 1/n and let q = q0^(1/n).  The particle density on a
# vertical line converges to an explicit arccos formula, and the region where
# it is strictly between 0 and 1 is bounded by the arctic curve.

import sys

import numpy as np

from qracah_tilings.arctic_geometry import tangency_points, trace_curve
from qracah_tilings.cli_io import density_svg
from qracah_tilings.limit_shape import ScaledParams, density_profile, density_quadrature, limit_height

sp = ScaledParams(1, 1, 0.5, 2.9j)

# Density on the middle line.  Each row carries its phase tag.

prof = density_profile(sp, 1.0, 9)
for t, x, rho, *_, phase in prof.rows():
    print(f"x={x:.3f} rho={rho:.6f} {phase}")

# The closed form against direct quadrature of the equilibrium measure.

lc = sp.coefficients(1.0)
print("closed vs quadrature at x=1:", lc.density(1.0) - density_quadrature(lc, 1.0))

# Six points where the curve touches the sides of the hexagon.

for edge, (t, x) in tangency_points(sp).items():
    print(f"{edge:>6}: t={t:.6f} x={x:.6f}")

# Height at the center.  kappa = i is symmetric and gives exactly 1/2.

print("h(1,1) =", limit_height(sp, 1.0, 1.0), limit_height(ScaledParams(1, 1, 0.5, 1j), 1.0, 1.0))

# A heatmap, written next to this script if a path is given.

if len(sys.argv) > 1:
    ts = np.linspace(0, 2, 62)[1:-1]
    xs = np.linspace(0, 2, 62)[1:-1]
    rho = np.full((len(ts), len(xs)), np.nan)
    for i, t in enumerate(ts):
        c = sp.coefficients(float(t))
        for j, x in enumerate(xs):
            if sp.lower(t) < x < sp.upper(t):
                rho[i, j] = c.density(float(x))
    with open(sys.argv[1], "w") as f:
        f.write(density_svg(sp, ts, xs, rho, trace_curve(sp).samples))
