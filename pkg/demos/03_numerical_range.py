# Numerical ranges and the union of D with w(T^n).
#
# The boundary of w(T) is traced by the top eigenvector of
# H(theta) = (e^{i theta} T + e^{-i theta} T*) / 2 over a grid of angles.

import numpy as np

from disklab import (backward_shift, dense_matrix, diagonal, disk_range_coverage, make_operator,
                     numerical_range_boundary, square_grid)

jordan = make_operator(dense_matrix([[0, 1], [0, 0]]))
s = numerical_range_boundary(jordan, 1024)
print("w(Jordan block): disk of radius", s.max_modulus)

s = numerical_range_boundary(make_operator(diagonal([0, 2j, 1 + 1j])), 256)
print("normal matrix: w is the triangle on its eigenvalues, max modulus", s.max_modulus)

# %% w(2^n B^n) is a disk whose radius grows geometrically, so a fixed grid fills up quickly
T = make_operator(backward_shift(32, 2.0))
grid = square_grid(3.0, 0.25)
cov = disk_range_coverage(T, 30, grid)
print("radii for n = 0..6:", np.round(cov.radii[:7], 3))
print("uncovered grid points:", int(np.sum(cov.per_point_distance > 0)))

# %% the identity never leaves the closed unit disk
cov = disk_range_coverage(make_operator(diagonal([1] * 32)), 30, grid)
print("identity, largest gap:", cov.per_point_distance.max(), "= 3 sqrt(2) - 1")
