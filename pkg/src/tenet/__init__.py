"""Directed transfer-entropy networks for financial time series.

Pipeline: prices -> log returns -> quantile symbols -> lagged transfer
entropy matrix -> Gamma (or shuffle) validation -> causal network and
network statistics.
"""

__version__ = "0.1.0"

from .errors import *  # noqa: F401,F403
from .infocore import (
    CountTable,
    TEMatrix,
    build_counts,
    conditional_mutual_information,
    entropy,
    mutual_information,
    plugin_entropy,
    sg_entropy,
    te_matrix,
    transfer_entropy,
    transfer_entropy_conditional_form,
)
from .ingest import (
    DiscreteSeries,
    LaggedPair,
    PriceMatrix,
    ReturnMatrix,
    SymbolMatrix,
    compute_log_returns,
    discretize_quantiles,
    discretize_returns,
    load_price_matrix,
    load_sector_map,
    split_lagged,
)
from .netstats import (
    CausalNetwork,
    DistributionFit,
    build_network,
    cross_lag_correlation,
    cross_lag_matrix,
    degree_distributions,
    export_network,
    fit_distributions,
    import_network_json,
    link_count_sweep,
    magnitude_summary,
    sector_stats,
    te_histogram,
)
from .significance import (
    SignificanceModel,
    bonferroni,
    calibration_report,
    dof,
    gamma_model,
    gamma_null_mean,
    gamma_threshold,
    moment_matched_dof,
    permutation_model,
    permutation_pvalue,
    permutation_pvalue_matrix,
    validate_matrix,
)
from .synth import Coupling, SynthSpec, gen_prices, gen_returns, ground_truth_csv
