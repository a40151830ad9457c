# The Diskcyclic Criterion in plain and lambda form on T = 2B, S = (1/2)F.

import numpy as np

from disklab import (DenseSetEnumerator, backward_shift, criterion_residuals, equivalence_sequence,
                     lambda_criterion_residuals, make_operator, reduce_to_plain, right_inverse_map)

T = make_operator(backward_shift(256, 2.0))
S = make_operator(right_inverse_map(T.spec))
enum = DenseSetEnumerator(4)
n_ks = list(range(1, 201))

plain = criterion_residuals(T, S, enum, enum, n_ks, 50)
print("plain verdict:", plain.verdict)
print("cond2 at k = 1, 10, 100:", plain.cond2_residuals[[0, 9, 99]])

# %% lambda form: lambda_k = sqrt(||S^{n_k} y||) sits inside the disk and still drives cond2 to 0
y = np.zeros(256, dtype=complex)
y[:4] = enum[7]
lam = equivalence_sequence(T, S, y, n_ks)
rep = lambda_criterion_residuals(T, S, lam, enum, [y], n_ks, 50)
print("max |lambda|:", max(abs(z) for z in lam), " lambda verdict:", rep.verdict)

# %% lambda = 1 gives back the plain report bit for bit
red = reduce_to_plain(lambda_criterion_residuals(T, S, [1] * 200, enum, enum, n_ks, 50))
print("reduction exact:", np.array_equal(red.cond2_residuals, plain.cond2_residuals))
