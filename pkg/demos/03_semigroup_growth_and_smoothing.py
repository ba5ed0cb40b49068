"""
Growth rates and smoothing of the linear flow
=============================================

The per-mode propagators exp(-t M) are computed in weighted coordinates.
For eta < 1 the high modes grow like exp(t (1-eta)/2 mu^{1/3}); for eta > 1
the flow smooths, with mu^{alpha/3} ||P(t)|| behaving like t^{-alpha}.
"""

import numpy as np

from mgt_spectral import dirichlet_eigs, rate_scan, smoothing_constant
from mgt_spectral.semigroup import decay_rate, mode_growth_profile, predicted_rate

# measured vs predicted growth, one mode
eta, mu = 0.5, 1000.0
print("predicted", predicted_rate(eta, mu), " measured", -decay_rate(eta, mu))

eigs = dirichlet_eigs(16)
for row in rate_scan(0.5, eigs, modes=[0, 3, 7, 15]):
    print(row.mode_index, row.re_rate_predicted, row.re_rate_measured)

###############################################################################
# ||P_n(1)|| over the modes: increasing for eta < 1, bounded otherwise

eigs = dirichlet_eigs(64)
for eta in (0.5, 1.0, 2.0):
    prof = mode_growth_profile(eta, eigs, t=1.0)
    print(f"eta={eta}: first {prof[0]:.3g}  last {prof[-1]:.3g}")

###############################################################################
# Smoothing: t^alpha * sup_n mu_n^{alpha/3} ||P_n(t)|| stays bounded as t -> 0

alpha = 0.5
for t in np.logspace(-3, 0, 7):
    s = smoothing_constant(2.0, alpha, t, eigs)
    print(f"t={t:.4g}  sup={s:.4g}  t^alpha*sup={t**alpha * s:.4g}")
