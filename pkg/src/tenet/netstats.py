"""Validated causal networks and the statistics computed on them."""

from __future__ import annotations

import io
import json
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import networkx as nx
import numpy as np

from .errors import (
    DegenerateRange,
    InputError,
    InsufficientData,
    MissingSectorLabel,
    ShapeMismatch,
    UnsupportedFormat,
    ZeroVariance,
)
from .infocore import TEMatrix, te_matrix
from .ingest import SymbolMatrix, split_lagged
from .significance import gamma_model, validate_matrix


@dataclass
class CausalNetwork:
    """Directed graph of validated links, row source to column target."""

    tickers: tuple[str, ...]
    edges: list[tuple[str, str, float]]
    lag: int
    threshold_bits: float | None = None
    validator: str = "gamma"
    alpha: float | None = None
    sectors: dict[str, str] = field(default_factory=dict)

    @property
    def n_nodes(self) -> int:
        return len(self.tickers)

    def to_networkx(self) -> nx.DiGraph:
        g = nx.DiGraph(lag=self.lag, validator=self.validator)
        if self.threshold_bits is not None:
            g.graph["threshold_bits"] = float(self.threshold_bits)
        if self.alpha is not None:
            g.graph["alpha"] = float(self.alpha)
        for t in self.tickers:
            g.add_node(t, sector=self.sectors.get(t, ""))
        for s, t, w in self.edges:
            g.add_edge(s, t, te_bits=float(w))
        return g

    def as_dict(self) -> dict:
        return {
            "tickers": list(self.tickers),
            "sectors": {t: self.sectors[t] for t in self.tickers if t in self.sectors},
            "edges": [[s, t, float(w)] for s, t, w in self.edges],
            "lag": self.lag,
            "threshold_bits": self.threshold_bits,
            "validator": self.validator,
            "alpha": self.alpha,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "CausalNetwork":
        return cls(
            tickers=tuple(d["tickers"]),
            edges=[(s, t, float(w)) for s, t, w in d["edges"]],
            lag=d["lag"],
            threshold_bits=d.get("threshold_bits"),
            validator=d.get("validator", "gamma"),
            alpha=d.get("alpha"),
            sectors=dict(d.get("sectors", {})),
        )


def build_network(
    C: TEMatrix,
    mask: np.ndarray,
    sectors: Mapping[str, str] | None = None,
    *,
    threshold_bits: float | None = None,
    validator: str = "gamma",
    alpha: float | None = None,
) -> CausalNetwork:
    """Keep edge (m, n) iff ``mask[m, n]``, weighted by ``C[m, n]``."""
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != C.values.shape:
        raise ShapeMismatch(f"mask shape {mask.shape} != matrix shape {C.values.shape}")
    tickers = C.tickers or tuple(str(i) for i in range(C.n))
    edges = [
        (tickers[m], tickers[n], float(C.values[m, n]))
        for m, n in zip(*np.nonzero(mask))
        if m != n
    ]
    return CausalNetwork(
        tickers=tuple(tickers),
        edges=edges,
        lag=C.lag,
        threshold_bits=threshold_bits,
        validator=validator,
        alpha=alpha,
        sectors=dict(sectors or {}),
    )


def link_count_sweep(
    symbols: SymbolMatrix,
    lags: Sequence[int],
    base_p: float = 0.01,
    correction: str = "bonferroni",
    workers: int = 1,
) -> list[dict]:
    """Number of gamma-validated links for each lag.

    Each row holds ``lag``, ``links``, ``pairs`` (= n(n-1)), ``threshold_bits``
    and ``alpha``.
    """
    if not len(lags):
        raise InputError("lags must not be empty")
    n = symbols.symbols.shape[1]
    rows = []
    for lag in lags:
        lp = split_lagged(symbols, lag)
        C = te_matrix(lp, workers=workers)
        model = gamma_model(symbols.alphabet_size, lp.n_samples, n, base_p, correction)
        mask = validate_matrix(C, model)
        rows.append(
            {
                "lag": int(lag),
                "links": int(mask.sum()),
                "pairs": n * (n - 1),
                "threshold_bits": model.threshold_bits,
                "alpha": model.alpha,
            }
        )
    return rows


def _mean_std(x: np.ndarray) -> tuple[float, float]:
    return float(np.mean(x)), float(np.std(x))


def magnitude_summary(C: TEMatrix, mask: np.ndarray) -> dict:
    """Mean and standard deviation of TE over all pairs and over validated ones.

    ``validated`` is ``None`` when the mask selects nothing.
    """
    off = ~np.eye(C.n, dtype=bool)
    full = C.values[off]
    sel = C.values[np.asarray(mask, dtype=bool) & off]
    return {
        "full": _mean_std(full),
        "validated": _mean_std(sel) if sel.size else None,
        "n_full": int(full.size),
        "n_validated": int(sel.size),
    }


@dataclass(frozen=True)
class Histogram:
    edges: np.ndarray
    counts: np.ndarray
    threshold_bits: float | None

    def right_of_threshold(self) -> int:
        """Count of values in bins whose left edge is at or above the threshold."""
        if self.threshold_bits is None:
            return 0
        return int(self.counts[self.edges[:-1] >= self.threshold_bits].sum())


def te_histogram(C: TEMatrix, bins: int = 50, threshold_bits: float | None = None) -> Histogram:
    """Equal-width histogram of off-diagonal TE over [min, max]."""
    if bins < 2:
        raise InputError("need at least 2 bins")
    vals = C.off_diagonal()
    lo, hi = float(vals.min()), float(vals.max())
    if lo == hi:
        raise DegenerateRange("all transfer entropy values are equal")
    counts, edges = np.histogram(vals, bins=bins, range=(lo, hi))
    return Histogram(edges, counts, threshold_bits)


def cross_lag_correlation(C1: TEMatrix, C2: TEMatrix) -> float:
    """Pearson correlation of off-diagonal TE values of two matrices."""
    if C1.values.shape != C2.values.shape:
        raise ShapeMismatch("matrices differ in shape")
    if C1.tickers and C2.tickers and C1.tickers != C2.tickers:
        raise ShapeMismatch("matrices differ in node order")
    a, b = C1.off_diagonal(), C2.off_diagonal()
    a = a - a.mean()
    b = b - b.mean()
    den = math.sqrt(float(np.dot(a, a)) * float(np.dot(b, b)))
    if den == 0:
        raise ZeroVariance("constant transfer entropy values")
    return max(-1.0, min(1.0, float(np.dot(a, b)) / den))


def cross_lag_matrix(matrices: Sequence[TEMatrix]) -> np.ndarray:
    k = len(matrices)
    R = np.eye(k)
    for i in range(k):
        for j in range(i + 1, k):
            R[i, j] = R[j, i] = cross_lag_correlation(matrices[i], matrices[j])
    return R


def degree_distributions(net: CausalNetwork) -> dict:
    """Histograms ``degree -> number of nodes`` for in- and out-degree.

    Also returns the per-node degrees under ``in_degree``/``out_degree``.
    """
    indeg = dict.fromkeys(net.tickers, 0)
    outdeg = dict.fromkeys(net.tickers, 0)
    for s, t, _ in net.edges:
        outdeg[s] += 1
        indeg[t] += 1
    return {
        "in": dict(sorted(Counter(indeg.values()).items())),
        "out": dict(sorted(Counter(outdeg.values()).items())),
        "in_degree": indeg,
        "out_degree": outdeg,
    }


@dataclass(frozen=True)
class DistributionFit:
    family: str
    params: dict
    n: int
    loglik: float


def powerlaw_loglik(x: np.ndarray, alpha: float, x_min: float) -> float:
    x = np.asarray(x, dtype=float)
    return float(x.size * math.log((alpha - 1) / x_min) - alpha * np.log(x / x_min).sum())


def fit_distributions(values: Iterable[float], x_min: float) -> tuple[DistributionFit, DistributionFit]:
    """Maximum-likelihood power-law and log-normal fits to the values >= x_min.

    Power law: continuous, alpha = 1 + k / sum(ln(x / x_min)).
    Log-normal: mean and (ML) standard deviation of ln x, untruncated.
    """
    x = np.asarray(list(values), dtype=float)
    if x_min <= 0:
        raise InputError("x_min must be positive")
    x = x[x >= x_min]
    if x.size < 10:
        raise InsufficientData(f"only {x.size} values at or above x_min")
    logs = np.log(x)
    s = float(np.log(x / x_min).sum())
    sigma = float(logs.std())
    if s <= 0 or sigma == 0:
        raise InsufficientData("values have zero spread above x_min")
    k = x.size
    alpha = 1.0 + k / s
    mu = float(logs.mean())
    ll_ln = float(
        -k * math.log(sigma * math.sqrt(2 * math.pi)) - logs.sum() - ((logs - mu) ** 2).sum() / (2 * sigma**2)
    )
    pl = DistributionFit("power-law", {"alpha": alpha, "x_min": float(x_min)}, k, powerlaw_loglik(x, alpha, x_min))
    ln = DistributionFit("log-normal", {"mu": mu, "sigma": sigma}, k, ll_ln)
    return pl, ln


def sector_stats(C: TEMatrix, mask: np.ndarray, sectors: Mapping[str, str]) -> dict:
    """Intrasector link fractions and intra/inter-sector TE statistics.

    ``intra_fraction_full`` is over all ordered pairs; ``intra_fraction_validated``
    is over validated links (``None`` when there are none).
    """
    tickers = C.tickers
    missing = [t for t in tickers if t not in sectors]
    if not tickers or missing:
        raise MissingSectorLabel(f"no sector label for {missing or 'unnamed nodes'}")
    lab = np.array([sectors[t] for t in tickers], dtype=object)
    same = lab[:, None] == lab[None, :]
    off = ~np.eye(C.n, dtype=bool)
    intra = same & off
    inter = ~same & off
    mask = np.asarray(mask, dtype=bool) & off
    n_valid = int(mask.sum())
    out = {
        "pairs_intra": int(intra.sum()),
        "pairs_inter": int(inter.sum()),
        "intra_fraction_full": float(intra.sum() / off.sum()),
        "intra_fraction_validated": float((mask & intra).sum() / n_valid) if n_valid else None,
        "links_validated": n_valid,
        "intra": _mean_std(C.values[intra]) if intra.any() else None,
        "inter": _mean_std(C.values[inter]) if inter.any() else None,
    }
    return out


def _dot_id(s: str) -> str:
    return '"' + str(s).replace("\\", "\\\\").replace('"', '\\"') + '"'


def export_network(net: CausalNetwork, fmt: str) -> bytes:
    """Serialise to ``dot``, ``graphml``, ``json`` or ``edge-csv`` bytes."""
    if fmt == "dot":
        lines = ["digraph causal {"]
        for t in net.tickers:
            lines.append(f"  {_dot_id(t)} [sector={_dot_id(net.sectors.get(t, ''))}];")
        for s, t, w in net.edges:
            lines.append(f"  {_dot_id(s)} -> {_dot_id(t)} [weight={float(w)!r}];")
        lines.append("}")
        return ("\n".join(lines) + "\n").encode()
    if fmt == "graphml":
        buf = io.BytesIO()
        nx.write_graphml(net.to_networkx(), buf)
        return buf.getvalue()
    if fmt == "json":
        return (json.dumps(net.as_dict(), indent=1) + "\n").encode()
    if fmt == "edge-csv":
        lines = ["source,target,te_bits"] + [f"{s},{t},{float(w)!r}" for s, t, w in net.edges]
        return ("\n".join(lines) + "\n").encode()
    raise UnsupportedFormat(f"unsupported network format {fmt!r}")


def import_network_json(data: bytes | str) -> CausalNetwork:
    if isinstance(data, bytes):
        data = data.decode()
    return CausalNetwork.from_dict(json.loads(data))
