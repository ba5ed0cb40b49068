"""
Mode spectra and the three damping regimes
==========================================

Each eigenmode of the operator contributes a 3x3 block. Here we look at the
closed-form eigenvalues of those blocks and at how the damping parameter eta
sorts the problem into ill-posed, boundary and parabolic cases.
"""

import numpy as np

from mgt_spectral import (BlockKind, classify, closed_form_spectrum, dirichlet_eigs,
                          mode_block, multipliers)

# 16 Dirichlet modes on (0, pi): mu_n = n^2
eigs = dirichlet_eigs(16)
print("first eigenvalues:", eigs.values[:5])

# the multipliers z, c, d only depend on eta
for eta in (0.5, 1.0, 2.0, 3.0, 5.0):
    m = multipliers(eta)
    print(f"eta={eta:4}  z={m.z:.4f}  c={m.c:.4f}  d={m.d:.4f}")

###############################################################################
# Closed form against a dense eigensolver, one mode at a time

eta = 2.0
closed = closed_form_spectrum(BlockKind.NATURAL_A, eta, eigs).reshape(-1, 3)
for n in (0, 7, 15):
    dense = np.linalg.eigvals(-mode_block(BlockKind.NATURAL_A, eta, eigs.values[n]).matrix)
    print(n + 1, np.sort_complex(closed[n]), np.sort_complex(dense))

###############################################################################
# Regimes. Below eta = 1 the largest real part grows with the mode index,
# which the truncated spectrum flags as unbounded growth.

for eta in (0.5, 1.0, 2.0):
    rep = classify(eta, dirichlet_eigs(64))
    print(rep.to_json())
