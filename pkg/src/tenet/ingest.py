"""Price loading, log returns, quantile discretisation and lag splitting."""

from __future__ import annotations

import csv
import io
import math
import os
from dataclasses import dataclass, field
from typing import IO, Mapping, Sequence, Union

import numpy as np

from .errors import (
    DegenerateSeries,
    DuplicateTicker,
    InputError,
    LagTooLarge,
    MissingData,
    NonMonotoneTimestamps,
    NonPositivePrice,
    SeriesTooShort,
    UnknownTickerInSectorMap,
)

Source = Union[str, os.PathLike, IO[str], IO[bytes], bytes]


@dataclass(frozen=True)
class PriceMatrix:
    """Prices on a uniform time grid, one column per instrument.

    ``timestamps`` is a 1-D array (numeric or ``datetime64``), ``prices`` is
    ``T x n`` and ``sectors`` maps ticker to sector label (may be empty).
    """

    timestamps: np.ndarray
    prices: np.ndarray
    tickers: tuple[str, ...]
    sectors: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        prices = np.asarray(self.prices, dtype=float)
        object.__setattr__(self, "prices", prices)
        object.__setattr__(self, "timestamps", np.asarray(self.timestamps))
        object.__setattr__(self, "tickers", tuple(self.tickers))
        object.__setattr__(self, "sectors", dict(self.sectors))
        if prices.ndim != 2:
            raise InputError("prices must be a 2-D array")
        T, n = prices.shape
        if T < 2 or n < 2:
            raise InputError(f"need at least 2 rows and 2 tickers, got {T}x{n}")
        if len(self.tickers) != n:
            raise InputError("ticker count does not match price columns")
        if len(self.timestamps) != T:
            raise InputError("timestamp count does not match price rows")
        seen = set()
        for t in self.tickers:
            if t in seen:
                raise DuplicateTicker(f"duplicate ticker {t!r}")
            seen.add(t)
        if np.isnan(prices).any():
            raise MissingData("prices contain missing values")
        if not (prices > 0).all():
            r, c = np.argwhere(~(prices > 0))[0]
            raise NonPositivePrice(
                f"non-positive price {prices[r, c]!r} at row {r}, ticker {self.tickers[c]!r}"
            )
        ts = self.timestamps
        if not (ts[1:] > ts[:-1]).all():
            raise NonMonotoneTimestamps("timestamps are not strictly increasing")
        unknown = set(self.sectors) - seen
        if unknown:
            raise UnknownTickerInSectorMap(f"sector map has unknown tickers: {sorted(unknown)}")

    @property
    def shape(self) -> tuple[int, int]:
        return self.prices.shape


@dataclass(frozen=True)
class ReturnMatrix:
    """Log returns sampled every ``tau`` grid rows."""

    returns: np.ndarray
    tau: int
    tickers: tuple[str, ...]
    sectors: Mapping[str, str] = field(default_factory=dict)


@dataclass(frozen=True)
class DiscreteSeries:
    """Integer symbols drawn from ``range(alphabet_size)``."""

    symbols: np.ndarray
    alphabet_size: int

    def __post_init__(self):
        sym = np.asarray(self.symbols)
        if sym.ndim != 1:
            raise InputError("symbols must be one-dimensional")
        if sym.size and not np.issubdtype(sym.dtype, np.integer):
            if not np.all(np.mod(sym, 1) == 0):
                raise InputError("symbols must be integers")
        sym = sym.astype(np.int64)
        if self.alphabet_size < 1:
            raise InputError("alphabet_size must be positive")
        if sym.size and (sym.min() < 0 or sym.max() >= self.alphabet_size):
            raise InputError(f"symbols outside [0, {self.alphabet_size - 1}]")
        object.__setattr__(self, "symbols", sym)

    def __len__(self) -> int:
        return len(self.symbols)


@dataclass(frozen=True)
class SymbolMatrix:
    """Column-wise discretised returns (``T' x n`` integer matrix)."""

    symbols: np.ndarray
    alphabet_size: int
    tickers: tuple[str, ...]
    sectors: Mapping[str, str] = field(default_factory=dict)

    def column(self, i: int) -> DiscreteSeries:
        return DiscreteSeries(self.symbols[:, i], self.alphabet_size)


@dataclass(frozen=True)
class LaggedPair:
    """Source rows ``A`` and target rows ``B`` offset by ``lag`` periods."""

    A: np.ndarray
    B: np.ndarray
    lag: int
    alphabet_size: int
    tickers: tuple[str, ...] = ()
    sectors: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if self.A.shape != self.B.shape:
            raise InputError("A and B must have identical shape")

    @property
    def n_samples(self) -> int:
        return self.A.shape[0]


def _read_text(source: Source) -> tuple[str, str]:
    """Return (text, display name) for a path, bytes or open stream."""
    if isinstance(source, (str, os.PathLike)):
        with open(source, encoding="utf-8", newline="") as fh:
            return fh.read(), os.fspath(source)
    if isinstance(source, bytes):
        return source.decode("utf-8"), "<bytes>"
    data = source.read()
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    return data, getattr(source, "name", "<stream>")


def _parse_timestamps(raw: list[str]) -> np.ndarray:
    try:
        return np.array([float(v) for v in raw])
    except ValueError:
        pass
    try:
        return np.array(raw, dtype="datetime64[ns]")
    except ValueError as exc:
        raise InputError(f"unparseable timestamp column: {exc}") from None


def load_sector_map(source: Source) -> dict[str, str]:
    """Read a ``ticker,sector`` CSV into a dict."""
    text, name = _read_text(source)
    rows = list(csv.reader(io.StringIO(text)))
    if not rows:
        raise MissingData(f"{name}: empty sector file")
    sectors: dict[str, str] = {}
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) < 2 or not row[0].strip() or not row[1].strip():
            raise MissingData(f"{name}:{lineno}: expected 'ticker,sector'")
        ticker = row[0].strip()
        if ticker in sectors:
            raise DuplicateTicker(f"{name}:{lineno}: ticker {ticker!r} listed twice")
        sectors[ticker] = row[1].strip()
    return sectors


def load_price_matrix(
    source: Source,
    sectors: Source | Mapping[str, str] | None = None,
    *,
    delimiter: str = ",",
) -> PriceMatrix:
    """Load a price CSV (``timestamp,TICK1,TICK2,...``) into a PriceMatrix.

    Empty cells are errors; nothing is imputed. ``sectors`` may be a
    ``ticker,sector`` CSV source or an already-built mapping.
    """
    text, name = _read_text(source)
    reader = csv.reader(io.StringIO(text), delimiter=delimiter)
    try:
        header = next(reader)
    except StopIteration:
        raise MissingData(f"{name}: empty price file") from None
    tickers = [h.strip() for h in header[1:]]
    seen = set()
    for t in tickers:
        if not t:
            raise MissingData(f"{name}:1: empty ticker name in header")
        if t in seen:
            raise DuplicateTicker(f"{name}:1: duplicate ticker {t!r}")
        seen.add(t)

    stamps: list[str] = []
    rows: list[list[float]] = []
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != len(header):
            raise MissingData(f"{name}:{lineno}: expected {len(header)} fields, got {len(row)}")
        values = []
        for col, cell in enumerate(row[1:]):
            cell = cell.strip()
            if not cell:
                raise MissingData(f"{name}:{lineno}: empty cell for {tickers[col]!r}")
            try:
                v = float(cell)
            except ValueError:
                raise InputError(f"{name}:{lineno}: bad number {cell!r}") from None
            if not math.isfinite(v):
                raise MissingData(f"{name}:{lineno}: non-finite value for {tickers[col]!r}")
            if v <= 0:
                raise NonPositivePrice(f"{name}:{lineno}: price {cell} for {tickers[col]!r}")
            values.append(v)
        stamps.append(row[0].strip())
        rows.append(values)

    timestamps = _parse_timestamps(stamps)
    bad = np.flatnonzero(~(timestamps[1:] > timestamps[:-1]))
    if bad.size:
        raise NonMonotoneTimestamps(
            f"{name}:{bad[0] + 3}: timestamp not after the previous row"
        )
    if isinstance(sectors, Mapping):
        sector_map = dict(sectors)
    elif sectors is not None:
        sector_map = load_sector_map(sectors)
    else:
        sector_map = {}
    prices = np.array(rows, dtype=float).reshape(len(rows), len(tickers))
    return PriceMatrix(timestamps, prices, tuple(tickers), sector_map)


def compute_log_returns(pm: PriceMatrix, tau: int = 1) -> ReturnMatrix:
    """Non-overlapping log returns ``log p(t) - log p(t - tau)`` at t = tau, 2 tau, ..."""
    if int(tau) != tau or tau < 1:
        raise InputError("tau must be a positive integer")
    tau = int(tau)
    T = pm.prices.shape[0]
    if T <= tau:
        raise SeriesTooShort(f"{T} price rows cannot give a return at tau={tau}")
    idx = np.arange(tau, T, tau)
    logp = np.log(pm.prices)
    returns = logp[idx] - logp[idx - tau]
    return ReturnMatrix(returns, tau, pm.tickers, pm.sectors)


def quantile_boundaries(series: Sequence[float], n_bins: int) -> np.ndarray:
    """Nearest-rank empirical quantiles at levels k/n_bins, k = 1..n_bins-1."""
    x = np.sort(np.asarray(series, dtype=float))
    L = x.size
    ranks = np.array([math.ceil(k * L / n_bins) for k in range(1, n_bins)], dtype=int)
    return x[np.maximum(ranks, 1) - 1]


def discretize_quantiles(series: Sequence[float], n_bins: int = 4) -> DiscreteSeries:
    """Map each value to its empirical-quantile bin.

    A value goes to the smallest bin ``k`` with ``v <= boundary_k``, so ties
    at a boundary fall into the lower bin.

    Examples
    --------
    >>> discretize_quantiles([1, 2, 3, 4, 5, 6, 7, 8], 4).symbols.tolist()
    [0, 0, 1, 1, 2, 2, 3, 3]
    """
    x = np.asarray(series, dtype=float)
    if x.ndim != 1:
        raise InputError("series must be one-dimensional")
    if n_bins < 1:
        raise InputError("n_bins must be positive")
    if x.size < n_bins:
        raise SeriesTooShort(f"series of length {x.size} shorter than {n_bins} bins")
    if not np.isfinite(x).all():
        raise MissingData("series contains non-finite values")
    if n_bins == 1:
        return DiscreteSeries(np.zeros(x.size, dtype=np.int64), 1)
    bounds = quantile_boundaries(x, n_bins)
    if x.min() == x.max() or (n_bins > 2 and bounds[0] == bounds[-1]):
        raise DegenerateSeries("quantile boundaries coincide; series is (near) constant")
    symbols = np.searchsorted(bounds, x, side="left")
    if symbols.min() == symbols.max():
        raise DegenerateSeries("all values fall into one quantile bin")
    return DiscreteSeries(symbols, n_bins)


def discretize_returns(rm: ReturnMatrix, n_bins: int = 4) -> SymbolMatrix:
    """Discretise every return column independently."""
    R = np.asarray(rm.returns, dtype=float)
    cols = []
    for j in range(R.shape[1]):
        try:
            cols.append(discretize_quantiles(R[:, j], n_bins).symbols)
        except DegenerateSeries as exc:
            raise DegenerateSeries(f"ticker {rm.tickers[j]!r}: {exc}") from None
    symbols = np.column_stack(cols).astype(np.int64)
    return SymbolMatrix(symbols, n_bins, rm.tickers, rm.sectors)


def split_lagged(sm: SymbolMatrix, lag: int) -> LaggedPair:
    """Drop the last ``lag`` rows for A and the first ``lag`` rows for B."""
    if int(lag) != lag or lag < 0:
        raise InputError("lag must be a non-negative integer")
    lag = int(lag)
    T = sm.symbols.shape[0]
    if lag >= T:
        raise LagTooLarge(f"lag {lag} >= series length {T}")
    A = sm.symbols[: T - lag]
    B = sm.symbols[lag:]
    return LaggedPair(A, B, lag, sm.alphabet_size, sm.tickers, sm.sectors)
