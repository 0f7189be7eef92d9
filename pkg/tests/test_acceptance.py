"""Acceptance suite: one test per criterion, each reporting a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v``; the summary block at the end
lists every criterion.
"""

import json
import time
from dataclasses import replace
from functools import lru_cache
from pathlib import Path

import numpy as np
import pytest
from scipy.stats import pearsonr

from tenet.cli import RunConfig, cmd_analyze
from tenet.infocore import build_counts, sg_entropy, te_matrix, transfer_entropy, transfer_entropy_conditional_form
from tenet.ingest import DiscreteSeries, compute_log_returns, discretize_returns, split_lagged
from tenet.netstats import fit_distributions, link_count_sweep, magnitude_summary
from tenet.significance import bonferroni, calibration_report, gamma_model, permutation_pvalue_matrix, validate_matrix
from tenet.synth import Coupling, SynthSpec, gen_prices, gen_returns

K = 4


def analyse(spec: SynthSpec, lag: int, **model_kw):
    rm = gen_returns(spec)
    lp = split_lagged(discretize_returns(rm, K), lag)
    C = te_matrix(lp)
    mask = validate_matrix(C, gamma_model(K, lp.n_samples, spec.n_series, **model_kw))
    return rm, lp, C, mask


# scenarios shared between criteria; cached so criterion 8 reuses them


@lru_cache(maxsize=None)
def linear_runs():
    out = []
    for seed in range(100):
        spec = SynthSpec(5, 2000, seed, [Coupling(0, 1, 3, 1.0, "linear")], noise_std=0.1)
        out.append(analyse(spec, 3)[2:])
    return out


@lru_cache(maxsize=None)
def quadratic_runs():
    out = []
    for seed in range(100):
        spec = SynthSpec(2, 2000, seed, [Coupling(0, 1, 1, 1.0, "quadratic")], noise_std=3.0)
        rm, _, C, mask = analyse(spec, 1)
        _, p = pearsonr(rm.returns[:-1, 0], rm.returns[1:, 1])
        out.append((C, mask, p))
    return out


DECAY_LAGS = (1, 5, 10, 20, 30)


def market_spec(seed: int) -> SynthSpec:
    couplings = [Coupling(s, s + 1, 1) for s in range(0, 12, 2)]
    couplings += [Coupling(12, 13, 2), Coupling(14, 15, 5), Coupling(16, 17, 5), Coupling(18, 19, 3)]
    return SynthSpec(20, 3000, seed, couplings, noise_std=0.5)


@lru_cache(maxsize=None)
def decay_runs():
    out = []
    for seed in range(20):
        sm = discretize_returns(gen_returns(market_spec(seed)), K)
        out.append([r["links"] for r in link_count_sweep(sm, DECAY_LAGS)])
    return out


def test_c01_estimator_identity(report):
    rng = np.random.default_rng(101)
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(1000):
        n = int(np.exp(rng.uniform(np.log(10), np.log(10_000))))
        k = int(rng.integers(2, 5))
        x, y, z = (DiscreteSeries(rng.integers(0, k, n), k) for _ in range(3))
        te = transfer_entropy(x, y, z)
        h = lambda *v: sg_entropy(build_counts(*v))  # noqa: E731
        eq3 = (h(y, z) - h(z)) - (h(x, y, z) - h(x, z))
        worst = max(worst, abs(te - eq3), abs(te - transfer_entropy_conditional_form(x, y, z)))
    dt = time.perf_counter() - t0
    ok = worst <= 1e-12 and dt < 60
    assert report(1, ok, f"max |Eq3 - Eq4| = {worst:.2e} bits over 1000 inputs, {dt:.1f} s")


def test_c02_sg_sanity(report):
    rng = np.random.default_rng(202)
    h = sg_entropy(build_counts(DiscreteSeries(rng.integers(0, 4, 100_000), 4)))
    h1 = sg_entropy(build_counts(DiscreteSeries(np.zeros(50, int), 1)))
    ok = abs(h - 2.0) <= 0.01 and h1 == 0.0
    assert report(2, ok, f"uniform H = {h:.5f} bits, single-symbol H = {h1!r}")


def test_c03_gamma_calibration(report):
    t0 = time.perf_counter()
    rep = calibration_report(4, 2000, (0.01,), trials=10_000, seed=303)
    dt = time.perf_counter() - t0
    e = {x["statistic"]: x for x in rep["entries"]}
    mi, cmi = e["mi"]["empirical_rejection_rate"], e["cmi"]["empirical_rejection_rate"]
    ok = 0.005 <= mi <= 0.02 and 0.003 <= cmi <= 0.03 and dt < 300
    detail = (
        f"MI rate {mi:.4f} (D={e['mi']['D']}), CMI rate {cmi:.4f} (D={e['cmi']['D']}), "
        f"raw-quantile rates {e['mi']['unshifted_rejection_rate']:.4f}/{e['cmi']['unshifted_rejection_rate']:.4f}, "
        f"bias shift {e['cmi']['bias_shift_bits']:.2e} bits, {dt:.0f} s"
    )
    assert report(3, ok, detail)


def test_c04_bonferroni(report):
    a = bonferroni(0.01, 100)
    assert report(4, a == 1e-6, f"0.01 / 100^2 = {a!r}")


def test_c05_directed_recovery(report):
    t0 = time.perf_counter()
    runs = linear_runs()
    fwd = sum(bool(m[0, 1]) for _, m in runs)
    rev = sum(not m[1, 0] for _, m in runs)
    dt = time.perf_counter() - t0
    ok = fwd >= 95 and rev >= 95 and dt < 300
    assert report(5, ok, f"planted edge {fwd}/100, reverse absent {rev}/100, {dt:.1f} s")


def test_c06_nonlinearity(report):
    runs = quadratic_runs()
    hits = sum(p > 0.01 and bool(m[0, 1]) for _, m, p in runs)
    te_hits = sum(bool(m[0, 1]) for _, m, _ in runs)
    assert report(6, hits >= 90, f"Pearson n.s. and TE validated in {hits}/100 seeds (TE alone {te_hits}/100)")


def test_c07_decay_shape(report):
    rows = decay_runs()
    strict = sum(r[-1] < r[0] for r in rows)
    mono = sum(all(a >= b for a, b in zip(r, r[1:])) for r in rows)
    ok = strict == 20 and mono >= 18
    assert report(7, ok, f"lambda=30 < lambda=1 in {strict}/20, monotone in {mono}/20, seed 0 counts {rows[0]}")


def test_c08_truncation(report):
    pairs = [(C, m) for C, m in linear_runs()] + [(C, m) for C, m, _ in quadratic_runs()]
    for seed in range(20):
        for lag in (1, 5):
            pairs.append(analyse(market_spec(seed), lag)[2:])
    checked = bad = 0
    for C, m in pairs:
        s = magnitude_summary(C, m)
        if s["validated"] is None:
            continue
        checked += 1
        bad += s["validated"][0] < s["full"][0]
    assert report(8, bad == 0 and checked > 0, f"{checked} nonempty masks, {bad} violations")


def test_c09_null_false_positives(report):
    t0 = time.perf_counter()
    total = 0
    for seed in range(1000, 1020):
        spec = SynthSpec(98, 5850, seed)
        _, _, _, mask = analyse(spec, 1, base_p=1e-6, correction="none")
        total += int(mask.sum())
    dt = time.perf_counter() - t0
    assert report(9, total <= 2, f"{total} validated links across 20 null runs at alpha=1e-6, {dt:.0f} s")


def test_c10_powerlaw_mle(report):
    rng = np.random.default_rng(1010)
    x_min = 0.01
    x = x_min * (1 - rng.random(10_000)) ** (-1 / 1.5)
    pl, _ = fit_distributions(x, x_min)
    y = rng.lognormal(-1.0, 0.8, 10_000)
    _, ln = fit_distributions(y, y.min())
    mu_ok = abs(ln.params["mu"] - (-1.0)) <= 0.02
    sig_ok = abs(ln.params["sigma"] - 0.8) <= 0.02 * 0.8
    ok = 2.45 <= pl.params["alpha"] <= 2.55 and mu_ok and sig_ok
    detail = f"alpha_hat = {pl.params['alpha']:.4f}, mu_hat = {ln.params['mu']:.4f}, sigma_hat = {ln.params['sigma']:.4f}"
    assert report(10, ok, detail)


def test_c11_permutation_agreement(report):
    t0 = time.perf_counter()
    spec = SynthSpec(
        10,
        1500,
        3,
        [
            Coupling(0, 1, 1, 1.0, "linear"),
            Coupling(2, 3, 1, 1.0, "quadratic"),
            Coupling(4, 5, 1, 1.0, "threshold"),
            Coupling(6, 7, 1, 0.5, "linear"),
        ],
        noise_std=1.0,
    )
    _, lp, C, gmask = analyse(spec, 1)
    P = permutation_pvalue_matrix(lp, 9999, seed=5)
    pmask = P <= bonferroni(0.01, 10)
    np.fill_diagonal(pmask, False)
    diff = int((gmask != pmask).sum())
    dt = time.perf_counter() - t0
    ok = diff <= 0.02 * 90
    assert report(11, ok, f"{diff}/90 pairs differ (gamma {gmask.sum()} links, permutation {pmask.sum()}), {dt:.0f} s")


def _write_prices(spec: SynthSpec, path: Path):
    pm = gen_prices(spec)
    rows = ["timestamp," + ",".join(pm.tickers)]
    rows += [f"{t:g}," + ",".join(repr(float(v)) for v in r) for t, r in zip(pm.timestamps, pm.prices)]
    path.write_text("\n".join(rows) + "\n")
    (path.parent / "sectors.csv").write_text("ticker,sector\n" + "".join(f"{k},{v}\n" for k, v in spec.sector_map().items()))


def test_c12_reproducibility(tmp_path, report):
    spec = market_spec(7)
    _write_prices(spec, tmp_path / "prices.csv")
    base = RunConfig(prices=str(tmp_path / "prices.csv"), sectors=str(tmp_path / "sectors.csv"), lags=[1, 5, 10], seed=12)
    m1 = cmd_analyze(replace(base, out=str(tmp_path / "a")))
    m2 = cmd_analyze(replace(base, out=str(tmp_path / "b")))
    files1 = {e["path"]: e["sha256"] for e in m1["files"]}
    files2 = {e["path"]: e["sha256"] for e in m2["files"]}
    same_bytes = all(
        (tmp_path / "a" / p).read_bytes() == (tmp_path / "b" / p).read_bytes() for p in files1
    )
    perm = replace(base, lags=[1], validator="permutation", surrogates=199, correction="none")
    p1 = cmd_analyze(replace(perm, out=str(tmp_path / "pa")))
    p2 = cmd_analyze(replace(perm, out=str(tmp_path / "pb")))
    perm_same = [e["sha256"] for e in p1["files"]] == [e["sha256"] for e in p2["files"]]
    ok = files1 == files2 and same_bytes and perm_same and len(files1) > 0
    assert report(12, ok, f"{len(files1)} gamma and {len(p1['files'])} permutation output files byte-identical across runs")


@pytest.mark.slow
def test_c13_performance(tmp_path, report):
    rng_spec = SynthSpec(
        98, 5850, 1313, [Coupling(int(s), int(s) + 1, int(l)) for s, l in zip(range(0, 40, 2), [1, 2, 3, 5] * 5)], noise_std=1.0
    )
    _write_prices(rng_spec, tmp_path / "prices.csv")
    cfg = RunConfig(prices=str(tmp_path / "prices.csv"), sectors=str(tmp_path / "sectors.csv"), out=str(tmp_path / "out"))
    t0 = time.perf_counter()
    m = cmd_analyze(cfg)
    dt = time.perf_counter() - t0
    links = [r["link_count"] for r in m["lags"]]
    ok = dt < 600 and len(m["lags"]) == 8 and m["n_tickers"] == 98
    assert report(13, ok, f"98 nodes x 8 lags ({9506 * 8} TE values) in {dt:.1f} s, link counts {links}")
