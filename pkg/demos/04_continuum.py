# Complex structure, Burgers, energy
# ==================================
#
# Inside the liquid region the map F = tau + i theta sends the region onto a
# strip, and the complex slope Omega satisfies a Burgers type equation.
# The limit height also minimizes a local energy.

from qracah_tilings.cli_io import energy_perturbation_test, interior_liquid_grid
from qracah_tilings.continuum_analysis import (
    burgers_residual,
    complex_structure_residual,
    lobachevsky,
    lozenge_angles,
    omega_at,
    strip_map,
)
from qracah_tilings.limit_shape import ScaledParams

sp = ScaledParams(1, 1, 0.5, 2.9j)
sm = strip_map(sp)

# Round trip through the strip.

tau, theta = sm.forward(1.0, 1.0)
print("F(1,1) =", tau, theta, "back:", sm.inverse(tau, theta))

# Lozenge angles sum to pi and are the angles of the triangle (0, 1, Omega).

print(lozenge_angles(sp, 1.0, 1.0), omega_at(sp, 1.0, 1.0))

# Residuals on a coarse grid, by central differences.

pts = interior_liquid_grid(sp, 10, 10)
print("complex structure", max(complex_structure_residual(sm, t, x) for t, x in pts))
print("Burgers", max(burgers_residual(sp, t, x) for t, x in pts))

# The energy goes up under every small bump we try.

res = energy_perturbation_test(sp, 1 / 24, 10, seed=1)
print("energy", res["energy"], "smallest increase", res["min_increase"])
print("L(pi/6) =", lobachevsky(3.141592653589793 / 6))
