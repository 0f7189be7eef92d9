"""Count tables, Schurmann-Grassberger entropy and transfer entropy.

All information quantities are in bits. Joint entropies apply the estimator
to the full product alphabet, with the prior pseudo-count ``1/|chi|`` per
cell so that the total prior mass is one.
"""

from __future__ import annotations

import json
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.special import digamma

from .errors import (
    EmptyInput,
    EmptySample,
    InputError,
    LengthMismatch,
    SampleSizeWarning,
)
from .ingest import DiscreteSeries, LaggedPair

LN2 = math.log(2.0)


@dataclass(frozen=True)
class CountTable:
    """Dense joint counts over the product of per-variable alphabets."""

    dims: tuple[int, ...]
    counts: np.ndarray

    @property
    def sample_size(self) -> int:
        return int(self.counts.sum())

    @property
    def n_cells(self) -> int:
        return int(np.prod(self.dims))


def _as_series(x) -> DiscreteSeries:
    if isinstance(x, DiscreteSeries):
        return x
    raise InputError("expected a DiscreteSeries")


def build_counts(*variables: DiscreteSeries) -> CountTable:
    """Joint counts of 1-3 discrete series; zero cells are kept."""
    if not variables:
        raise EmptyInput("no variables given")
    if len(variables) > 3:
        raise InputError("at most three variables are supported")
    vs = [_as_series(v) for v in variables]
    L = len(vs[0])
    if any(len(v) != L for v in vs):
        raise LengthMismatch(f"series lengths differ: {[len(v) for v in vs]}")
    if L == 0:
        raise EmptyInput("series are empty")
    dims = tuple(v.alphabet_size for v in vs)
    code = np.zeros(L, dtype=np.int64)
    for v in vs:
        code = code * v.alphabet_size + v.symbols
    counts = np.bincount(code, minlength=int(np.prod(dims))).reshape(dims)
    return CountTable(dims, counts)


def sg_entropy_rows(counts: np.ndarray) -> np.ndarray:
    """Schurmann-Grassberger entropy (bits) of each row of a count array.

    ``counts`` has shape ``(..., K)``; each row is one table over a
    ``K``-symbol alphabet. Cells are sorted before summation so the result
    depends only on the multiset of counts.
    """
    c = np.sort(np.asarray(counts, dtype=float), axis=-1)
    K = c.shape[-1]
    m = c.sum(axis=-1)
    if np.any(m <= 0):
        raise EmptySample("entropy of an empty sample")
    if K == 1:
        return np.zeros(m.shape)
    a = 1.0 / K
    # |chi| * a == 1 by construction of the prior
    terms = (c + a) * (digamma(m + 2.0)[..., None] - digamma(c + a + 1.0))
    return terms.sum(axis=-1) / (m + 1.0) / LN2


def sg_entropy(ct: CountTable | np.ndarray) -> float:
    """Bayesian (Dirichlet prior, pseudo-count ``1/|chi|``) entropy in bits."""
    counts = ct.counts if isinstance(ct, CountTable) else np.asarray(ct)
    if counts.size == 0:
        raise EmptySample("empty count table")
    return float(sg_entropy_rows(counts.reshape(1, -1))[0])


def plugin_entropy(ct: CountTable | np.ndarray) -> float:
    """Maximum-likelihood (relative frequency) entropy in bits."""
    counts = np.asarray(ct.counts if isinstance(ct, CountTable) else ct, dtype=float).ravel()
    m = counts.sum()
    if m <= 0:
        raise EmptySample("entropy of an empty sample")
    p = counts[counts > 0] / m
    return float(-(p * np.log2(p)).sum())


def entropy(X: DiscreteSeries) -> float:
    return sg_entropy(build_counts(X))


def mutual_information(X: DiscreteSeries, Y: DiscreteSeries) -> float:
    """I(X;Y) = H(X) + H(Y) - H(X,Y). Not clamped; may be slightly negative."""
    joint = build_counts(X, Y)
    hx = sg_entropy(joint.counts.sum(axis=1))
    hy = sg_entropy(joint.counts.sum(axis=0))
    return (hx + hy) - sg_entropy(joint)


def _cmi_terms(X, Y, Z) -> tuple[float, float, float, float]:
    """H(X,Z), H(Y,Z), H(Z), H(X,Y,Z) from a single joint table."""
    xyz = build_counts(X, Y, Z).counts
    hxz = sg_entropy(xyz.sum(axis=1))
    hyz = sg_entropy(xyz.sum(axis=0))
    hz = sg_entropy(xyz.sum(axis=(0, 1)))
    hxyz = sg_entropy(xyz)
    return hxz, hyz, hz, hxyz


def conditional_mutual_information(X: DiscreteSeries, Y: DiscreteSeries, Z: DiscreteSeries) -> float:
    """I(X;Y|Z) = H(X,Z) + H(Y,Z) - H(Z) - H(X,Y,Z), in bits."""
    hxz, hyz, hz, hxyz = _cmi_terms(X, Y, Z)
    return ((hxz + hyz) - hz) - hxyz


def transfer_entropy(
    source: DiscreteSeries, target_future: DiscreteSeries, target_past: DiscreteSeries
) -> float:
    """Transfer entropy source -> target as I(source; target_future | target_past)."""
    return conditional_mutual_information(source, target_future, target_past)


def transfer_entropy_conditional_form(
    source: DiscreteSeries, target_future: DiscreteSeries, target_past: DiscreteSeries
) -> float:
    """Same quantity written as H(B|A_n) - H(B|A_n, A_m).

    Kept as an independent arithmetic route for cross-checking
    :func:`transfer_entropy`.
    """
    hxz, hyz, hz, hxyz = _cmi_terms(source, target_future, target_past)
    h_b_given_past = hyz - hz
    h_b_given_both = hxyz - hxz
    return h_b_given_past - h_b_given_both


@dataclass(frozen=True)
class TEMatrix:
    """Transfer entropy in bits; row = source, column = target."""

    values: np.ndarray
    lag: int
    alphabet_size: int
    sample_size: int
    tickers: tuple[str, ...] = ()

    @property
    def n(self) -> int:
        return self.values.shape[0]

    def off_diagonal(self) -> np.ndarray:
        return self.values[~np.eye(self.n, dtype=bool)]

    def to_json(self) -> str:
        return json.dumps(
            {
                "tickers": list(self.tickers),
                "lag": self.lag,
                "alphabet_size": self.alphabet_size,
                "sample_size": self.sample_size,
                "values": [float(v) for v in self.values.ravel()],
            },
            indent=1,
        )

    @classmethod
    def from_json(cls, text: str) -> "TEMatrix":
        d = json.loads(text)
        n = len(d["tickers"])
        values = np.array(d["values"], dtype=float).reshape(n, n)
        return cls(values, d["lag"], d["alphabet_size"], d["sample_size"], tuple(d["tickers"]))

    def to_csv(self) -> str:
        tickers = self.tickers or tuple(str(i) for i in range(self.n))
        lines = [",".join(["source"] + list(tickers))]
        for t, row in zip(tickers, self.values):
            lines.append(",".join([t] + [repr(float(v)) for v in row]))
        return "\n".join(lines) + "\n"


def _te_column(A: np.ndarray, B: np.ndarray, n: int, K: int) -> np.ndarray:
    """TE from every source column of A into target column n."""
    T, n_src = A.shape
    yz = B[:, n] * K + A[:, n]
    yz_counts = np.bincount(yz, minlength=K * K)
    z_counts = np.bincount(A[:, n], minlength=K)
    hyz = sg_entropy_rows(yz_counts.reshape(1, -1))[0]
    hz = sg_entropy_rows(z_counts.reshape(1, -1))[0]

    offs = np.arange(n_src, dtype=np.int64)[None, :]
    xyz = np.bincount(
        ((A * (K * K) + yz[:, None]) + offs * K**3).ravel(), minlength=n_src * K**3
    ).reshape(n_src, K**3)
    xz = xyz.reshape(n_src, K, K, K).sum(axis=2).reshape(n_src, K * K)
    hxz = sg_entropy_rows(xz)
    hxyz = sg_entropy_rows(xyz)
    col = ((hxz + hyz) - hz) - hxyz
    col[n] = 0.0
    return col


def te_matrix(lp: LaggedPair, workers: int = 1) -> TEMatrix:
    """All pairwise transfer entropies C[m, n] = I(A_m; B_n | A_n).

    Targets are independent, so ``workers > 1`` evaluates them on a thread
    pool; the result is bit-identical to the serial run.
    """
    A = np.ascontiguousarray(lp.A, dtype=np.int64)
    B = np.ascontiguousarray(lp.B, dtype=np.int64)
    T, n = A.shape
    K = lp.alphabet_size
    if T == 0:
        raise EmptyInput("lagged pair has no rows")
    if T < K**3:
        warnings.warn(
            f"{T} samples for a {K**3}-cell joint alphabet; estimates will be noisy",
            SampleSizeWarning,
            stacklevel=2,
        )
    C = np.zeros((n, n))
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            cols = list(pool.map(lambda j: _te_column(A, B, j, K), range(n)))
    else:
        cols = [_te_column(A, B, j, K) for j in range(n)]
    for j, col in enumerate(cols):
        C[:, j] = col
    np.fill_diagonal(C, 0.0)
    return TEMatrix(C, lp.lag, K, T, tuple(lp.tickers))
