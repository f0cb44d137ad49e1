# Fluctuations
# ============
#
# Linear statistics X(f) = sum_j f(y_j) have cumulants given by traces of
# banded matrices built from the Jacobi matrix of the slice ensemble.  In the
# limit the variance is a Gaussian free field quantity on a strip.

import numpy as np

from qracah_tilings.cli_io import chebyshev_test_function
from qracah_tilings.fluctuation_lab import (
    GFFVarianceSpec,
    JacobiMatrix,
    cumulant_trace,
    gff_variance,
    mc_fluctuation,
    tau_of_t,
)
from qracah_tilings.hexagon_tilings import HexagonSpec
from qracah_tilings.limit_shape import ScaledParams

# Exact variance of sum x^2 over slice 30 of a 20 x 30 x 30 hexagon.

h = HexagonSpec(20, 30, 30, 0.5 ** (1 / 20), 2.9j)
J = JacobiMatrix.from_slice(h, 30)
print("mean", cumulant_trace(J, [0, 0, 1], 1), "variance", cumulant_trace(J, [0, 0, 1], 2))

# The variance only sees a band of width 2 deg p around the edge of the
# particle block, so a window gives the same number.

print("windowed", cumulant_trace(J, [0, 0, 1], 2, window=4))

# Limiting variance for f whose angular profile is cos th + cos 2th / 2 + cos 3th / 4.

sp = ScaledParams(1, 1, 0.5, 2.9j)
f = chebyshev_test_function(sp, [1.0, 0.5, 0.25])
pred = gff_variance(GFFVarianceSpec.from_scaled(sp, [1.0], f))
print("GFF variance", pred, "= (1 + 1/4 * 2 + 1/16 * 3) / 4")

# Monte Carlo with exact samples at n = 30.  Expect agreement within a few
# standard errors; the finite-n bias is small already here.

n = 30
hn = HexagonSpec(n, n, n, 0.5 ** (1 / n), 2.9j)
mean, var, se = mc_fluctuation(hn, f, [1.0], 128, seed=3)
print(f"MC variance {var:.4f} +- {se:.4f}")

# The strip time tau(t) blows up at both ends of the hexagon.

print([round(tau_of_t(sp, t), 4) for t in np.linspace(0.1, 1.9, 7)])
