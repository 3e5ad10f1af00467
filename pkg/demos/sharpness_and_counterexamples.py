# ====================================================
# Where the inequalities are sharp and where they fail
# ====================================================
#
# The critical inequality K^n int |V|^{n/2} >= 1 has no extremal on a bounded
# domain, but it is approached by cutting the Talenti bubble off at larger
# and larger radii R.  Below the critical exponent the picture is the
# opposite: there are potentials of arbitrarily small norm with small
# support.  This demo follows both families and ends with the one dimensional
# case, where a point mass achieves equality.
#
# Run with ``python3 demos/sharpness_and_counterexamples.py``.

import math

import numpy as np

from minsupport.constructions import hat_1d, mollified_hat, small_support_counterexample, truncated_bubble
from minsupport.verify import check_certificate

# Truncated bubbles in three dimensions.  The certificate value stays above 1
# and the excess decays roughly like 1/R.

print("     R    critical lhs     (lhs - 1) * R")
for R in (10.0, 30.0, 100.0, 300.0, 1000.0):
    lhs = check_certificate("critical", truncated_bubble(3, R)).lhs
    print(f"{R:6.0f}   {lhs:.10f}   {(lhs - 1) * R:.4f}")

# The counterexample family.  In three dimensions the critical-power integral
# of V shrinks like eps^(1/5); a least-squares fit over four decades lands near
# 0.2, with the coarsest point still pre-asymptotic.

eps = 10.0 ** -np.arange(1, 5)
powers = np.array([small_support_counterexample(3, e, r=1.4).quantities["norm_power"] for e in eps])
slopes = np.diff(np.log(powers)) / np.diff(np.log(eps))
print("n=3 per-decade slopes:", np.round(slopes, 4), " fitted:", round(float(np.polyfit(np.log(eps), np.log(powers), 1)[0]), 4))

# In two dimensions the L1 norm decays only logarithmically, and the product
# ||V||_1 log(1/eps) stays below 2 pi.

for e in eps:
    q = small_support_counterexample(2, e).quantities
    print(f"n=2 eps={e:.0e}: ||V||_1 log(1/eps) = {q['norm'] * math.log(1 / e):.4f}   (2 pi = {2 * math.pi:.4f})")

# One dimension: V = (2/b) delta_0 with the hat function u = b - |x| gives
# b ||V||_M = 2 exactly.  Smoothing the point mass over a width w breaks the
# equality, and the value returns toward 2 as w shrinks.

print("hat:", check_certificate("one_d_measure", hat_1d(1.0)).lhs)
for w in (0.3, 0.1, 0.03, 0.01):
    print(f"mollified hat, width {w}: {check_certificate('one_d_measure', mollified_hat(1.0, w)).lhs:.6f}")
