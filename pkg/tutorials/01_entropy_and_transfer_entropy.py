"""
Entropy, mutual information and transfer entropy
================================================

A short tour of the estimators on small symbolic series.
"""

import numpy as np

from tenet import DiscreteSeries, build_counts, mutual_information, plugin_entropy, sg_entropy, transfer_entropy

rng = np.random.default_rng(0)

##############################################################################
# Entropy of a uniform 4-symbol source
# ------------------------------------
# The Bayesian estimator and the plug-in estimator both approach 2 bits, but
# on short samples the plug-in value sits noticeably lower.

for m in (20, 200, 20_000):
    x = DiscreteSeries(rng.integers(0, 4, m), 4)
    ct = build_counts(x)
    print(f"m={m:6d}  SG={sg_entropy(ct):.4f}  plug-in={plugin_entropy(ct):.4f}")

##############################################################################
# Mutual information of dependent series
# --------------------------------------

x = rng.integers(0, 4, 5000)
noisy = np.where(rng.random(5000) < 0.3, rng.integers(0, 4, 5000), x)
print("I(x; noisy copy) =", mutual_information(DiscreteSeries(x, 4), DiscreteSeries(noisy, 4)))
print("I(x; independent) =", mutual_information(DiscreteSeries(x, 4), DiscreteSeries(rng.integers(0, 4, 5000), 4)))

##############################################################################
# Transfer entropy is directional
# -------------------------------
# ``b`` copies ``a`` one step later, so a's past tells us about b's future
# beyond what b's own past does. The reverse direction carries nothing.

a = rng.integers(0, 4, 5001)
b = np.roll(a, 1)
b[0] = 0
a_past, b_future, b_past = a[:-1], b[1:], b[:-1]
S = lambda v: DiscreteSeries(v, 4)  # noqa: E731
print("TE a -> b:", transfer_entropy(S(a_past), S(b_future), S(b_past)))
print("TE b -> a:", transfer_entropy(S(b[:-1]), S(a[1:]), S(a[:-1])))
