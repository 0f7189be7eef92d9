"""Seeded synthetic returns with planted lagged couplings.

A coupled target follows ``y_t = sum_c strength_c * f_c(x_{t - lag_c}) +
noise_std * e_t``; uncoupled columns are i.i.d. standard normal. ``f`` is
the identity (``linear``), ``x**2 - 1`` (``quadratic``, zero linear
correlation for a standard normal source) or ``sign(x)`` (``threshold``).
Returns are finally multiplied by ``volatility`` so that integrated prices
stay in a realistic range.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import InvalidSpec
from .ingest import PriceMatrix, ReturnMatrix

KINDS = ("linear", "quadratic", "threshold")


@dataclass(frozen=True)
class Coupling:
    source: int
    target: int
    lag: int
    strength: float = 1.0
    kind: str = "linear"


@dataclass(frozen=True)
class SynthSpec:
    n_series: int
    length: int
    seed: int
    couplings: tuple[Coupling, ...] = ()
    noise_std: float = 0.1
    volatility: float = 1e-3
    n_sectors: int = 4
    tickers: tuple[str, ...] | None = None
    sectors: dict[str, str] | None = field(default=None)

    def __post_init__(self):
        object.__setattr__(
            self, "couplings", tuple(c if isinstance(c, Coupling) else Coupling(**c) for c in self.couplings)
        )
        if self.tickers is not None:
            object.__setattr__(self, "tickers", tuple(self.tickers))
        validate_spec(self)

    def ticker_names(self) -> tuple[str, ...]:
        if self.tickers is not None:
            return self.tickers
        width = len(str(self.n_series - 1))
        return tuple(f"S{i:0{width}d}" for i in range(self.n_series))

    def sector_map(self) -> dict[str, str]:
        """Explicit sectors if given, else round-robin over ``n_sectors``."""
        names = self.ticker_names()
        if self.sectors:
            return {t: self.sectors[t] for t in names}
        return {t: f"sector{i % self.n_sectors}" for i, t in enumerate(names)}

    def to_json(self) -> str:
        d = asdict(self)
        d["tickers"] = list(self.tickers) if self.tickers is not None else None
        return json.dumps(d, indent=1)

    @classmethod
    def from_json(cls, text: str) -> "SynthSpec":
        try:
            d = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InvalidSpec(f"spec is not valid JSON: {exc}") from None
        if not isinstance(d, dict):
            raise InvalidSpec("spec must be a JSON object")
        try:
            return cls(**d)
        except TypeError as exc:
            raise InvalidSpec(str(exc)) from None


def validate_spec(spec: SynthSpec) -> None:
    if not isinstance(spec.seed, int) or isinstance(spec.seed, bool):
        raise InvalidSpec("seed is mandatory and must be an integer")
    if spec.n_series < 2:
        raise InvalidSpec("need at least two series")
    if spec.length < 2:
        raise InvalidSpec("length must be at least 2")
    if not (math.isfinite(spec.noise_std) and spec.noise_std >= 0):
        raise InvalidSpec("noise_std must be finite and non-negative")
    if not (math.isfinite(spec.volatility) and spec.volatility > 0):
        raise InvalidSpec("volatility must be positive")
    if spec.n_sectors < 1:
        raise InvalidSpec("n_sectors must be positive")
    if spec.tickers is not None and len(set(spec.tickers)) != spec.n_series:
        raise InvalidSpec("tickers must be n_series unique names")
    if spec.sectors:
        missing = set(spec.ticker_names()) - set(spec.sectors)
        if missing:
            raise InvalidSpec(f"no sector for {sorted(missing)}")
    for c in spec.couplings:
        if not (0 <= c.source < spec.n_series and 0 <= c.target < spec.n_series):
            raise InvalidSpec(f"coupling index out of range: {c}")
        if c.source == c.target:
            raise InvalidSpec(f"self-coupling not allowed: {c}")
        if int(c.lag) != c.lag or c.lag < 1:
            raise InvalidSpec(f"lag must be an integer >= 1: {c}")
        if not math.isfinite(c.strength):
            raise InvalidSpec(f"strength must be finite: {c}")
        if c.kind not in KINDS:
            raise InvalidSpec(f"unknown coupling kind {c.kind!r}")


def _f(kind: str, x: np.ndarray) -> np.ndarray:
    if kind == "linear":
        return x
    if kind == "quadratic":
        return x * x - 1.0
    return np.sign(x)


def _topological_order(n: int, couplings) -> list[int] | None:
    parents = {i: set() for i in range(n)}
    for c in couplings:
        parents[c.target].add(c.source)
    order, done = [], set()
    while len(order) < n:
        ready = [i for i in range(n) if i not in done and parents[i] <= done]
        if not ready:
            return None
        for i in ready:
            order.append(i)
            done.add(i)
    return order


def _burn_in(spec: SynthSpec) -> int:
    if not spec.couplings:
        return 0
    return max(c.lag for c in spec.couplings) * (len(spec.couplings) + 1)


def gen_returns(spec: SynthSpec) -> ReturnMatrix:
    """Simulate the spec; identical spec gives bit-identical output."""
    validate_spec(spec)
    n = spec.n_series
    burn = _burn_in(spec)
    L = spec.length + burn
    # one sub-stream per column keeps columns reproducible independently
    children = np.random.SeedSequence(spec.seed).spawn(n)
    noise = np.column_stack([np.random.default_rng(ss).standard_normal(L) for ss in children])

    incoming = {i: [c for c in spec.couplings if c.target == i] for i in range(n)}
    X = np.empty((L, n))
    for i in range(n):
        if not incoming[i]:
            X[:, i] = noise[:, i]
    order = _topological_order(n, spec.couplings)
    if order is not None:
        for i in order:
            if not incoming[i]:
                continue
            drive = np.zeros(L)
            for c in incoming[i]:
                drive[c.lag :] += c.strength * _f(c.kind, X[: L - c.lag, c.source])
            X[:, i] = drive + spec.noise_std * noise[:, i]
    else:
        coupled = [i for i in range(n) if incoming[i]]
        X[:, coupled] = 0.0
        for t in range(L):
            for i in coupled:
                v = 0.0
                for c in incoming[i]:
                    if t >= c.lag:
                        v += c.strength * float(_f(c.kind, X[t - c.lag, c.source]))
                X[t, i] = v + spec.noise_std * noise[t, i]
    returns = X[burn:] * spec.volatility
    return ReturnMatrix(returns, 1, spec.ticker_names(), spec.sector_map())


def gen_prices(spec: SynthSpec, start_price: float = 100.0) -> PriceMatrix:
    """Integrate :func:`gen_returns` into prices starting at ``start_price``.

    The first row is the start price, so ``length + 1`` rows are produced and
    one-period log returns reproduce the simulated returns.
    """
    rm = gen_returns(spec)
    logp = np.vstack([np.zeros((1, spec.n_series)), np.cumsum(rm.returns, axis=0)])
    prices = start_price * np.exp(logp)
    timestamps = np.arange(spec.length + 1, dtype=float)
    return PriceMatrix(timestamps, prices, rm.tickers, rm.sectors)


def ground_truth_csv(spec: SynthSpec) -> str:
    names = spec.ticker_names()
    lines = ["source,target,lag,strength,kind"]
    for c in spec.couplings:
        lines.append(f"{names[c.source]},{names[c.target]},{c.lag},{c.strength!r},{c.kind}")
    return "\n".join(lines) + "\n"
