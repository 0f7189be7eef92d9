"""Command line entry point: ``tenet analyze | calibrate | synth``.

Every flag can also be given in a JSON file passed with ``--config``; flags
on the command line override the file. Exit status is 0 on success, 1 for
input/configuration errors and 2 for numerical failures.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
import time
import warnings
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ConfigError, CostWarning, InputError, InsufficientData, NumericError, TenetError
from .infocore import te_matrix
from .ingest import compute_log_returns, discretize_returns, load_price_matrix, split_lagged
from .netstats import (
    build_network,
    cross_lag_matrix,
    degree_distributions,
    export_network,
    fit_distributions,
    magnitude_summary,
    sector_stats,
    te_histogram,
)
from .significance import (
    bonferroni,
    calibration_report,
    gamma_model,
    permutation_model,
    permutation_pvalue_matrix,
    validate_matrix,
)
from .synth import SynthSpec, gen_prices, ground_truth_csv

log = logging.getLogger("tenet")

DEFAULT_LAGS = (1, 5, 10, 20, 30, 40, 50, 60)
# surrogate evaluations above this need --force
MAX_SURROGATE_WORK = 10**9
NETWORK_FILES = (
    ("dot", "network.dot"),
    ("graphml", "network.graphml"),
    ("json", "network.json"),
    ("edge-csv", "network_edges.csv"),
)


@dataclass
class RunConfig:
    prices: str | None = None
    sectors: str | None = None
    tau: int = 1
    lags: list[int] = field(default_factory=lambda: list(DEFAULT_LAGS))
    bins: int = 4
    pvalue: float = 0.01
    correction: str = "bonferroni"
    validator: str = "gamma"
    surrogates: int = 999
    seed: int = 0
    out: str = "tenet_out"
    hist_bins: int = 50
    workers: int = 1
    force: bool = False

    def check(self) -> None:
        if not self.prices:
            raise ConfigError("--prices is required")
        if not self.lags:
            raise ConfigError("lag list is empty")
        if int(self.tau) != self.tau or self.tau < 1:
            raise ConfigError("tau must be a positive integer number of minutes")
        for lag in self.lags:
            if int(lag) != lag or lag < 0:
                raise ConfigError(f"lag {lag} must be a non-negative integer")
            if lag % self.tau:
                raise ConfigError(f"lag {lag} min is not a multiple of tau={self.tau} min")
        if self.bins < 2:
            raise ConfigError("alphabet size (--bins) must be at least 2")
        if not 0 < self.pvalue < 1:
            raise ConfigError("p-value must lie in (0, 1)")
        if self.correction not in ("bonferroni", "none"):
            raise ConfigError(f"unknown correction {self.correction!r}")
        if self.validator not in ("gamma", "permutation"):
            raise ConfigError(f"unknown validator {self.validator!r}")
        if self.validator == "permutation" and self.surrogates < 99:
            raise ConfigError("at least 99 surrogates are required")
        if self.hist_bins < 2:
            raise ConfigError("hist_bins must be at least 2")


@dataclass
class CalibrateConfig:
    bins: int = 4
    length: int = 2000
    trials: int = 10_000
    pvalues: list[float] = field(default_factory=lambda: [0.01, 0.1])
    seed: int = 0
    out: str = "calibration.json"
    raw: bool = False

    def check(self) -> None:
        if self.trials < 1:
            raise ConfigError("trials must be positive")
        if self.length < 2:
            raise ConfigError("length must be at least 2")
        if self.bins < 2:
            raise ConfigError("alphabet size must be at least 2")
        if not self.pvalues or not all(0 < p < 0.5 for p in self.pvalues):
            raise ConfigError("p-values must lie in (0, 0.5)")


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


class _Writer:
    """Writes output files and remembers them for the manifest."""

    def __init__(self, root: Path):
        self.root = root
        self.files: list[str] = []

    def write(self, rel: str, data: bytes | str) -> Path:
        path = self.root / rel
        path.parent.mkdir(parents=True, exist_ok=True)
        if isinstance(data, str):
            data = data.encode()
        path.write_bytes(data)
        self.files.append(rel)
        return path

    def manifest_entries(self) -> list[dict]:
        return [{"path": f, "sha256": _sha256(self.root / f)} for f in self.files]


def _csv(header: list[str], rows) -> str:
    def fmt(v):
        if v is None:
            return ""
        if isinstance(v, float):
            return repr(v)
        return str(v)

    return "\n".join([",".join(header)] + [",".join(fmt(v) for v in r) for r in rows]) + "\n"


def _mask_csv(tickers, mask) -> str:
    rows = [[t] + [int(v) for v in row] for t, row in zip(tickers, mask)]
    return _csv(["source"] + list(tickers), rows)


def cmd_analyze(cfg: RunConfig) -> dict:
    """Run the full pipeline and write per-lag and figure-data outputs.

    Returns the manifest dict (also written to ``manifest.json``).
    """
    cfg.check()
    t0 = time.perf_counter()
    pm = load_price_matrix(cfg.prices, cfg.sectors)
    rm = compute_log_returns(pm, cfg.tau)
    sm = discretize_returns(rm, cfg.bins)
    n = len(sm.tickers)
    T = sm.symbols.shape[0]
    periods = [lag // cfg.tau for lag in cfg.lags]
    for lag, per in zip(cfg.lags, periods):
        if per >= T:
            raise ConfigError(f"lag {lag} min leaves no samples ({T} returns)")

    if cfg.validator == "permutation":
        alpha = bonferroni(cfg.pvalue, n) if cfg.correction == "bonferroni" else cfg.pvalue
        work = cfg.surrogates * n * (n - 1) * len(cfg.lags)
        if cfg.surrogates + 1 < 1 / alpha:
            msg = f"{cfg.surrogates} surrogates cannot resolve alpha={alpha:g}"
            warnings.warn(msg, CostWarning, stacklevel=2)
            if not cfg.force:
                raise ConfigError(msg + "; raise --surrogates or pass --force")
        if work > MAX_SURROGATE_WORK:
            msg = f"permutation validation needs {work:.3g} surrogate TE evaluations"
            warnings.warn(msg, CostWarning, stacklevel=2)
            if not cfg.force:
                raise ConfigError(msg + "; pass --force to run anyway")

    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    w = _Writer(out)
    tickers = sm.tickers
    sectors = dict(pm.sectors)
    have_sectors = bool(sectors) and all(t in sectors for t in tickers)

    matrices, per_lag = [], []
    link_rows, mag_rows, hist_rows, deg_rows, fit_rows, sec_rows = [], [], [], [], [], []
    for lag, per in zip(cfg.lags, periods):
        lt = time.perf_counter()
        lp = split_lagged(sm, per)
        C = te_matrix(lp, workers=cfg.workers)
        N_s = lp.n_samples
        pvals = None
        if cfg.validator == "gamma":
            model = gamma_model(cfg.bins, N_s, n, cfg.pvalue, cfg.correction)
            threshold = model.threshold_bits
        else:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", CostWarning)
                model = permutation_model(cfg.bins, N_s, n, cfg.surrogates, cfg.pvalue, cfg.correction)
            ss = np.random.SeedSequence(cfg.seed, spawn_key=(per,))
            pvals = permutation_pvalue_matrix(lp, cfg.surrogates, ss, cfg.workers)
            # reference Gamma threshold for plotting only
            threshold = gamma_model(cfg.bins, N_s, n, cfg.pvalue, cfg.correction).threshold_bits
        mask = validate_matrix(C, model, pvals)
        net = build_network(
            C, mask, sectors, threshold_bits=threshold, validator=model.validator, alpha=model.alpha
        )
        d = f"lag_{lag:03d}"
        w.write(f"{d}/te_matrix.csv", C.to_csv())
        w.write(f"{d}/te_matrix.json", C.to_json())
        w.write(f"{d}/mask.csv", _mask_csv(tickers, mask))
        if pvals is not None:
            prow = [[t] + [float(v) for v in r] for t, r in zip(tickers, pvals)]
            w.write(f"{d}/pvalues.csv", _csv(["source"] + list(tickers), prow))
        for fmt, name in NETWORK_FILES:
            w.write(f"{d}/{name}", export_network(net, fmt))

        links = int(mask.sum())
        link_rows.append([lag, per, N_s, links, n * (n - 1), float(threshold), float(model.alpha)])
        mag = magnitude_summary(C, mask)
        v = mag["validated"] or (None, None)
        mag_rows.append([lag, *mag["full"], *v, mag["n_validated"]])
        try:
            h = te_histogram(C, cfg.hist_bins, threshold)
            for lo, hi, c in zip(h.edges[:-1], h.edges[1:], h.counts):
                hist_rows.append([lag, float(lo), float(hi), int(c), float(threshold)])
        except NumericError as exc:
            log.warning("lag %s: histogram skipped (%s)", lag, exc)
        dd = degree_distributions(net)
        for direction in ("in", "out"):
            for deg, cnt in dd[direction].items():
                deg_rows.append([lag, direction, deg, cnt])
        try:
            pl, ln = fit_distributions([e[2] for e in net.edges], threshold)
            fit_rows.append([lag, pl.family, pl.n, pl.params["alpha"], pl.params["x_min"], None, None, pl.loglik])
            fit_rows.append([lag, ln.family, ln.n, None, None, ln.params["mu"], ln.params["sigma"], ln.loglik])
        except InsufficientData:
            fit_rows.append([lag, "none", len(net.edges), None, None, None, None, None])
        if have_sectors:
            s = sector_stats(C, mask, sectors)
            intra = s["intra"] or (None, None)
            inter = s["inter"] or (None, None)
            sec_rows.append([lag, s["intra_fraction_full"], s["intra_fraction_validated"], *intra, *inter])
        matrices.append(C)
        per_lag.append(
            {
                "lag_minutes": lag,
                "lag_periods": per,
                "sample_size": N_s,
                "threshold_bits": float(threshold),
                "alpha": float(model.alpha),
                "dof": model.dof,
                "link_count": links,
                "wall_time_s": round(time.perf_counter() - lt, 3),
            }
        )
        log.info("lag %d min: %d links", lag, links)

    w.write(
        "link_counts.csv",
        _csv(["lag_minutes", "lag_periods", "sample_size", "links", "pairs", "threshold_bits", "alpha"], link_rows),
    )
    w.write(
        "magnitudes.csv",
        _csv(["lag_minutes", "full_mean", "full_std", "validated_mean", "validated_std", "n_validated"], mag_rows),
    )
    w.write("te_histograms.csv", _csv(["lag_minutes", "bin_left", "bin_right", "count", "threshold_bits"], hist_rows))
    if len(matrices) >= 2:
        try:
            R = cross_lag_matrix(matrices)
            w.write(
                "cross_lag_correlation.csv",
                _csv(["lag_minutes"] + [str(x) for x in cfg.lags], [[lag] + [float(x) for x in r] for lag, r in zip(cfg.lags, R)]),
            )
        except NumericError as exc:
            log.warning("cross-lag correlation skipped (%s)", exc)
    w.write("degree_distributions.csv", _csv(["lag_minutes", "direction", "degree", "count"], deg_rows))
    w.write("te_fits.csv", _csv(["lag_minutes", "family", "n", "alpha", "x_min", "mu", "sigma", "loglik"], fit_rows))
    if have_sectors:
        w.write(
            "sector_stats.csv",
            _csv(
                [
                    "lag_minutes",
                    "intra_fraction_full",
                    "intra_fraction_validated",
                    "intra_mean",
                    "intra_std",
                    "inter_mean",
                    "inter_std",
                ],
                sec_rows,
            ),
        )

    manifest = {
        "tool": "tenet",
        "version": __version__,
        "config": asdict(cfg),
        "n_tickers": n,
        "n_returns": T,
        "lags": per_lag,
        "wall_time_s": round(time.perf_counter() - t0, 3),
        "files": w.manifest_entries(),
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=1) + "\n")
    return manifest


def cmd_calibrate(cfg: CalibrateConfig) -> dict:
    """Monte Carlo check of the Gamma null for MI and CMI; writes a JSON report."""
    cfg.check()
    report = calibration_report(cfg.bins, cfg.length, tuple(cfg.pvalues), cfg.trials, cfg.seed, not cfg.raw)
    path = Path(cfg.out)
    if path.parent:
        path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(report, indent=1) + "\n")
    return report


def cmd_synth(spec_path: str, out: str) -> dict:
    """Write prices.csv, sectors.csv and ground_truth.csv for a synthetic spec."""
    try:
        text = Path(spec_path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read spec: {exc}") from None
    spec = SynthSpec.from_json(text)
    pm = gen_prices(spec)
    root = Path(out)
    root.mkdir(parents=True, exist_ok=True)
    header = ["timestamp"] + list(pm.tickers)
    rows = [[int(t)] + [repr(float(v)) for v in row] for t, row in zip(pm.timestamps, pm.prices)]
    (root / "prices.csv").write_text(_csv(header, rows))
    (root / "sectors.csv").write_text(_csv(["ticker", "sector"], [[t, pm.sectors[t]] for t in pm.tickers]))
    (root / "ground_truth.csv").write_text(ground_truth_csv(spec))
    return {"prices": str(root / "prices.csv"), "sectors": str(root / "sectors.csv"), "ground_truth": str(root / "ground_truth.csv")}


def _int_list(s: str) -> list[int]:
    try:
        return [int(x) for x in s.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {s!r}") from None


def _float_list(s: str) -> list[float]:
    try:
        return [float(x) for x in s.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {s!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tenet", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)
    S = argparse.SUPPRESS

    a = sub.add_parser("analyze", help="transfer-entropy networks for a price file", argument_default=S)
    a.add_argument("--config", help="JSON file with any of the options below")
    a.add_argument("--prices", help="price CSV: timestamp,TICK1,TICK2,...")
    a.add_argument("--sectors", help="sector CSV: ticker,sector")
    a.add_argument("--tau", type=int, help="return sampling period in minutes (default 1)")
    a.add_argument("--lags", type=_int_list, help="lags in minutes, e.g. 1,5,10 (default 1,5,10,20,30,40,50,60)")
    a.add_argument("--bins", type=int, help="number of quantile states (default 4)")
    a.add_argument("--pvalue", type=float, help="base p-value (default 0.01)")
    a.add_argument("--correction", choices=["bonferroni", "none"])
    a.add_argument("--validator", choices=["gamma", "permutation"])
    a.add_argument("--surrogates", type=int, help="shuffle surrogates per pair (permutation validator)")
    a.add_argument("--seed", type=int)
    a.add_argument("--out", help="output directory")
    a.add_argument("--hist-bins", dest="hist_bins", type=int)
    a.add_argument("--workers", type=int)
    a.add_argument("--force", action="store_true", help="run expensive permutation settings anyway")

    c = sub.add_parser("calibrate", help="Monte Carlo check of the Gamma null", argument_default=S)
    c.add_argument("--config")
    c.add_argument("--bins", type=int)
    c.add_argument("--length", type=int)
    c.add_argument("--trials", type=int)
    c.add_argument("--pvalues", type=_float_list)
    c.add_argument("--seed", type=int)
    c.add_argument("--out", help="report path (JSON)")
    c.add_argument("--raw", action="store_true", help="compare against the unshifted Gamma quantile")

    s = sub.add_parser("synth", help="generate a synthetic dataset from a JSON spec")
    s.add_argument("--spec", required=True)
    s.add_argument("--out", required=True)
    return p


def _merge(cls, ns: argparse.Namespace, skip=("command", "verbose", "config", "func")):
    values = {}
    cfg_path = getattr(ns, "config", None)
    if cfg_path:
        try:
            values.update(json.loads(Path(cfg_path).read_text()))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"{cfg_path}: {exc}") from None
    values.update({k: v for k, v in vars(ns).items() if k not in skip})
    known = set(cls.__dataclass_fields__)
    unknown = set(values) - known
    if unknown:
        raise ConfigError(f"unknown configuration keys: {sorted(unknown)}")
    return cls(**values)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        if args.command == "analyze":
            m = cmd_analyze(_merge(RunConfig, args))
            for row in m["lags"]:
                print(f"lag {row['lag_minutes']:>4} min  links {row['link_count']:>6}  threshold {row['threshold_bits']:.6g} bits")
        elif args.command == "calibrate":
            rep = cmd_calibrate(_merge(CalibrateConfig, args))
            for e in rep["entries"]:
                print(f"{e['statistic']:>3} D={e['D']:<3} p={e['p']:<6g} rejection={e['empirical_rejection_rate']:.4f}")
        else:
            paths = cmd_synth(args.spec, args.out)
            print("\n".join(paths.values()))
    except (InputError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (NumericError, TenetError, FloatingPointError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
