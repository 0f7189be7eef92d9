"""
Recovering a planted network from synthetic returns
===================================================

Builds a small market with known lead-lag couplings and checks which links
the pipeline finds at several lags.
"""

from tenet import (
    Coupling,
    SynthSpec,
    build_network,
    discretize_returns,
    gamma_model,
    gen_returns,
    link_count_sweep,
    magnitude_summary,
    split_lagged,
    te_matrix,
    validate_matrix,
)

spec = SynthSpec(
    n_series=8,
    length=3000,
    seed=4,
    couplings=[Coupling(0, 1, 1), Coupling(2, 3, 1, kind="quadratic"), Coupling(4, 5, 5, kind="threshold")],
    noise_std=0.5,
)
symbols = discretize_returns(gen_returns(spec), n_bins=4)

##############################################################################
# Links at lag 1
# --------------

lp = split_lagged(symbols, 1)
C = te_matrix(lp)
mask = validate_matrix(C, gamma_model(4, lp.n_samples, spec.n_series))
net = build_network(C, mask, spec.sector_map())
for s, t, w in net.edges:
    print(f"{s} -> {t}: {w:.4f} bits")

##############################################################################
# Validated links carry the largest values
# ----------------------------------------

summary = magnitude_summary(C, mask)
print("mean TE all pairs:", summary["full"][0], " validated:", summary["validated"][0])

##############################################################################
# How the count changes with the lag
# ----------------------------------
# The slow coupling only shows up at lag 5.

for row in link_count_sweep(symbols, [1, 2, 5, 10]):
    print(f"lag {row['lag']:2d}: {row['links']} of {row['pairs']} pairs")
