# Building a vector whose disk orbit passes near a list of targets.
#
# x = sum_j S^{m_j} y_j with S the forward shift (1/2)F.  With the gaps
# m_{j+1} - m_j wide enough, T^{m_j} x = y_j + (tail of later terms), and
# the certificate bounds that tail.

import numpy as np

from disklab import (backward_shift, build_diskcyclic_vector, default_targets, density_report,
                     make_operator, right_inverse_map)

T = make_operator(backward_shift(256, 2.0))
S = make_operator(right_inverse_map(T.spec))
targets = default_targets(256)[:20]

x, cert = build_diskcyclic_vector(T, S, targets)
print("gaps            ", cert.gaps)
print("certified bounds", np.array2string(cert.residual_bounds, precision=2))
print("measured        ", np.array2string(cert.achieved_residuals, precision=2))
print("sound:", cert.sound)

# %% the same x, judged only through its disk orbit
rep = density_report(T, x, targets, max(cert.gaps), 1e-3, "disk")
print("covered fraction at eps = 1e-3:", rep.covered_fraction)

# %% the 10 random unit targets were never aimed at; see how close they get anyway
rest = default_targets(256)[20:]
rep = density_report(T, x, rest, max(cert.gaps), 1e-3, "disk")
print("random targets, worst distance:", max(h.distance for h in rep.hits))
