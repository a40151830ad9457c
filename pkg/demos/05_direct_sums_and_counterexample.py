# T (+) alpha I with T = 4B and alpha = 2.
#
# The scalar block grows like 2^n, and the scalars lambda 2^{-n} bring it
# back to lambda.  The same operator shows that the difference of two
# diskcyclic vectors need not be diskcyclic.

import numpy as np

from disklab import (DenseSetEnumerator, adjoint_point_spectrum, backward_shift, certified_transfer,
                     counterexample_vector, direct_sum_with_scalar, make_operator)

T = backward_shift(256, 4.0)
enum = DenseSetEnumerator(4)
targets = []
for p, w in enumerate(enum.take(1, 6)):
    pad = np.zeros(256, dtype=complex)
    pad[:4] = w
    targets.append((pad, [1, 2j, 0][p % 3]))

z, cert, schedules = certified_transfer(T, 2.0, targets, budget=2e-4, k_start=2001)
for (w, lam), sched in zip(targets, schedules):
    print(f"lambda={lam!s:4s} n={sched.n_ks[-1]:4d} |scalar|={abs(sched.scalars[-1]):.2e} "
          f"distance={sched.distances[-1]:.2e}")

# %% (x - Tx) (+) 0 stays at distance >= 1 from 0 (+) 1 along its whole disk orbit
S = make_operator(direct_sum_with_scalar(backward_shift(32, 4.0), 2.0))
x = np.random.default_rng(5).standard_normal(32)
v, floor = counterexample_vector(S, x, horizon=200)
print("last coordinate", v[-1], " certificate", floor)

# %% point spectrum of the adjoint: only 2, outside the closed unit disk
print(adjoint_point_spectrum(direct_sum_with_scalar(T, 2.0)).to_json())
