# Disk orbits of a weighted backward shift.
#
# The disk orbit of x under T is {a T^n x : |a| <= 1, n >= 0}.  For each
# iterate the closest point of a T^n x to a target y has a closed form:
# project y onto the line through T^n x, then pull the scalar back to the
# unit circle if it lands outside.

import numpy as np

from disklab import (backward_shift, best_disk_coefficient, best_scaled_coefficient, make_operator,
                     orbit, orbit_distance)

# %% the closed form on a toy pair
v = np.array([2.0, 0.0])
y = np.array([1.0, 0.0])
print("disk scalar  ", best_disk_coefficient(v, y))    # a = 1/2, exact hit
print("disk scalar  ", best_disk_coefficient(v / 4, y))  # a clipped to 1, distance 1/2
print("scaled scalar", best_scaled_coefficient(v / 4, y))  # unconstrained a = 2

# %% orbit of e_3 under 2B: norms double until the vector falls off the left end
T = make_operator(backward_shift(8, 2.0))
x = np.zeros(8)
x[2] = 1
orb = orbit(T, x, 4)
for rec in orb:
    print(rec.n, rec.norm)

# %% best hit of each mode against y = 2 e_1
y = np.zeros(8)
y[0] = 2
for mode in ("plain", "disk", "scaled"):
    hit = orbit_distance(orb, y, mode)
    print(f"{mode:6s} n={hit.best_n} a={hit.best_alpha:.3g} distance={hit.distance:.3g}")
