import numpy as np
import pytest
from scipy.stats import pearsonr

from tenet.errors import InvalidSpec
from tenet.infocore import mutual_information, te_matrix
from tenet.ingest import compute_log_returns, discretize_returns, split_lagged
from tenet.significance import gamma_model, validate_matrix
from tenet.synth import Coupling, SynthSpec, gen_prices, gen_returns, ground_truth_csv


def pipeline(spec, lag, **kw):
    rm = gen_returns(spec)
    lp = split_lagged(discretize_returns(rm, 4), lag)
    C = te_matrix(lp)
    mask = validate_matrix(C, gamma_model(4, lp.n_samples, spec.n_series, **kw))
    return rm, C, mask


def test_zero_couplings_independent():
    rm = gen_returns(SynthSpec(4, 100_000, seed=1))
    sm = discretize_returns(rm, 4)
    for i in range(4):
        for j in range(i + 1, 4):
            assert abs(mutual_information(sm.column(i), sm.column(j))) < 0.005


def test_linear_recovery():
    fwd = rev = 0
    for seed in range(100):
        spec = SynthSpec(2, 2000, seed, [Coupling(0, 1, 3, 1.0, "linear")], noise_std=0.1)
        _, _, mask = pipeline(spec, 3, correction="none")
        fwd += mask[0, 1]
        rev += mask[1, 0]
    assert fwd >= 95 and rev <= 5


def test_quadratic_invisible_to_correlation():
    spec = SynthSpec(2, 20000, 5, [Coupling(0, 1, 2, 1.0, "quadratic")], noise_std=3.0)
    rm, C, mask = pipeline(spec, 2, correction="none")
    r, _ = pearsonr(rm.returns[:-2, 0], rm.returns[2:, 1])
    assert abs(r) < 0.05
    assert mask[0, 1]


def test_threshold_coupling_detected():
    spec = SynthSpec(3, 2000, 2, [Coupling(2, 0, 1, 1.0, "threshold")], noise_std=0.5)
    _, _, mask = pipeline(spec, 1)
    assert mask[2, 0] and mask.sum() == 1


def test_prices_roundtrip_positive_deterministic():
    spec = SynthSpec(5, 3000, 9, [Coupling(0, 1, 1), Coupling(1, 2, 2, 0.7, "quadratic")])
    pm = gen_prices(spec)
    assert (pm.prices > 0).all() and pm.prices[0, 0] == 100.0
    np.testing.assert_allclose(compute_log_returns(pm, 1).returns, gen_returns(spec).returns, rtol=0, atol=1e-12)
    assert np.array_equal(gen_prices(spec).prices, pm.prices)


def test_cyclic_couplings_use_time_stepping():
    spec = SynthSpec(3, 500, 4, [Coupling(0, 1, 1, 0.5), Coupling(1, 0, 2, 0.3)])
    a = gen_returns(spec).returns
    assert np.isfinite(a).all() and np.array_equal(a, gen_returns(spec).returns)


def test_acyclic_and_stepping_agree():
    from tenet import synth

    spec = SynthSpec(4, 300, 8, [Coupling(0, 1, 1, 0.8), Coupling(1, 2, 3, 0.5, "threshold")])
    fast = gen_returns(spec).returns
    orig = synth._topological_order
    synth._topological_order = lambda n, c: None
    try:
        slow = gen_returns(spec).returns
    finally:
        synth._topological_order = orig
    np.testing.assert_allclose(fast, slow, rtol=0, atol=1e-15)


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(couplings=[Coupling(0, 5, 1)]),
        dict(couplings=[Coupling(0, 1, 0)]),
        dict(couplings=[Coupling(0, 0, 1)]),
        dict(couplings=[Coupling(0, 1, 1, float("inf"))]),
        dict(couplings=[Coupling(0, 1, 1, 1.0, "cubic")]),
        dict(seed=None),
        dict(noise_std=-1.0),
    ],
)
def test_invalid_spec(kwargs):
    base = dict(n_series=3, length=100, seed=1)
    base.update(kwargs)
    with pytest.raises(InvalidSpec):
        SynthSpec(**base)


def test_spec_json_roundtrip_and_ground_truth():
    spec = SynthSpec(3, 100, 1, [Coupling(0, 2, 4, 0.5, "threshold")], n_sectors=2)
    back = SynthSpec.from_json(spec.to_json())
    assert back == spec
    assert ground_truth_csv(spec) == "source,target,lag,strength,kind\nS0,S2,4,0.5,threshold\n"
    assert spec.sector_map() == {"S0": "sector0", "S1": "sector1", "S2": "sector0"}
    with pytest.raises(InvalidSpec):
        SynthSpec.from_json('{"n_series": 3, "length": 10}')
