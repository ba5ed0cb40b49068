"""
Inverses, resolvents and the sector scan
========================================

In the parabolic regime the resolvent of the reduced block obeys a uniform
bound |lam| ||R(lam)|| <= M away from a sector around the positive axis.
We check the closed-form inverse first and then sample M along two rays.
"""

import numpy as np

from mgt_spectral import (BlockKind, closed_form_inverse, dirichlet_eigs, mode_block,
                          resolvent_reduced, scan_resolvent)

eta, mu = 2.0, 27.0
B = mode_block(BlockKind.REDUCED_B, eta, mu).matrix
Binv = closed_form_inverse(BlockKind.REDUCED_B, eta, mu).matrix
print("||B B^-1 - I|| =", np.abs(B @ Binv - np.eye(3)).max())

# resolvent at a point off the spectrum
lam = 3.0 + 4.0j
R = resolvent_reduced(lam, eta, mu)
print("||(lam - B) R - I|| =", np.abs((lam * np.eye(3) - B) @ R - np.eye(3)).max())

###############################################################################
# Rays at +-3pi/4, radii from 1 to 10^4

eigs = dirichlet_eigs(32)
radii = np.logspace(0, 4, 17)
scan = scan_resolvent(eta, eigs, [3 * np.pi / 4, -3 * np.pi / 4], radii)
for r, m in zip(radii, scan.m_local[0]):
    print(f"r={r:10.3f}  M_local={m:.6f}")
print("M estimate:", scan.m_estimate, " worst residual:", scan.max_residual)
