"""
The Hardy-Rellich constant of the half-space
============================================

On the whole space the best constant in the second-order Hardy inequality
is N^2 (N-4)^2 / 16. Restricting to the half-space and to functions of the
form x1 f(|x|) raises it to (N^2 - 4)^2 / 16. This script checks that value
two ways: from the spherical spectrum, and by watching a cut-off power law
push the bending/Hardy ratio down to it.
"""

import math

from rellich_lab.constants import cone_hardy_constant, hardy_constants, sphere_moment, sphere_spectrum
from rellich_lab.testfuncs import extrapolated_ratio, hardy_sequence_table, log_slopes

N = 8

# The closed forms, and the same value as a minimum over the odd spherical
# harmonics (k >= 1) of the half-sphere.
hc = hardy_constants(N)
print(f"N = {N}: whole space {hc.interior:g}, half-space {hc.half_space:g}")
print(f"minimum over the half-sphere spectrum: {cone_hardy_constant(N, sphere_spectrum(N, 1)):g}")

# The power r^-(N-2)/2 sits exactly at the edge of the inequality. Cutting it
# off inside r ~ eps and outside r ~ 1/eps gives a sequence whose energies
# both grow like ln(1/eps); their ratio creeps down towards the constant.
rows = hardy_sequence_table(N, [1e-2, 1e-3, 1e-4, 1e-5, 1e-6])
print("\n    eps      bending         hardy      ratio")
for row in rows:
    print(f"{row.epsilon:8.0e} {row.bending:13.4f} {row.hardy:13.6f} {row.ratio:10.3f}")

# The O(1) parts fade like 1/ln(1/eps), which is slow. Removing that term
# from two neighbouring rows lands almost on the constant.
print(f"\nextrapolated ratio from the last two rows: {extrapolated_ratio(rows[-2], rows[-1]):.3f}")

# The slopes in ln(1/eps) are predicted by the half-sphere moment w(2).
w2 = sphere_moment(N, 2)
slope_b, slope_h = log_slopes(rows)
print(f"w(2) = {w2:.10f}  (pi^4/48 = {math.pi**4 / 48:.10f})")
print(f"bending slope {slope_b:.4f}  vs 2 w(2) {hc.half_space:g} = {2 * w2 * hc.half_space:.4f}")
print(f"hardy slope   {slope_h:.6f}  vs 2 w(2)     = {2 * w2:.6f}")
