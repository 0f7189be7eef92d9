"""Statistical validation of transfer-entropy links.

Two validators are provided. The analytic one compares each value with the
upper quantile of the Gamma null ``Gamma(D/2, 1/(N ln 2))`` (bits); the
permutation one shuffles the source column and counts surrogate exceedances.

The Gamma null describes relative-frequency (plug-in) estimates. The
Dirichlet-prior entropy estimator used here shifts every independent-pair
MI/CMI upwards by ``D / (2 N ln 2)`` bits to leading order, which is exactly
the mean of that Gamma law. :func:`gamma_model` therefore places the
threshold at ``quantile + shift`` by default (``align_bias=True``); the raw
quantile stays available as ``SignificanceModel.quantile_bits``.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np
from scipy.special import gammainc, gammaincc, gammaln, ndtri

from .errors import (
    ConvergenceFailure,
    CostWarning,
    InputError,
    InvalidAlphabet,
    InvalidP,
    LengthMismatch,
    ModelMismatch,
)
from .infocore import LN2, TEMatrix, sg_entropy_rows
from .ingest import DiscreteSeries, LaggedPair

SURROGATE_CHUNK = 512


def dof(kx: int, ky: int, kz: int | None = None) -> int:
    """Degrees of freedom of the independence null.

    ``(kx-1)(ky-1)`` for MI, ``kz (kx-1)(ky-1)`` when conditioning on a
    variable with ``kz`` symbols.
    """
    if kx < 2 or ky < 2:
        raise InvalidAlphabet("alphabet sizes must be at least 2")
    if kz is None:
        return (kx - 1) * (ky - 1)
    if kz < 1:
        raise InvalidAlphabet("conditioning alphabet must be at least 1")
    return kz * (kx - 1) * (ky - 1)


def bonferroni(base_p: float, n_nodes: int) -> float:
    """Correct ``base_p`` for the ``n_nodes**2`` ordered pairs."""
    if not 0 < base_p < 1:
        raise InvalidP(f"p must lie in (0, 1), got {base_p}")
    if n_nodes < 1:
        raise InputError("n_nodes must be positive")
    return base_p / n_nodes**2


def _gamma_upper_inverse(a: float, p: float, rtol: float = 1e-13, max_iter: int = 200) -> float:
    """Solve Q(a, x) = p for x, Q the regularized upper incomplete gamma.

    Newton iterations on ``log Q`` kept inside a bisection bracket.
    """
    z = ndtri(1.0 - p)
    x = a * (1.0 - 1.0 / (9 * a) + z * math.sqrt(1.0 / (9 * a))) ** 3
    if not np.isfinite(x) or x <= 0:
        x = a
    lo, hi = 0.0, max(x, 1.0)
    while gammaincc(a, hi) > p:
        lo, hi = hi, 2 * hi
        if hi > 1e300:
            raise ConvergenceFailure("could not bracket the Gamma quantile")
    x = min(max(x, lo), hi)
    log_p = math.log(p)
    lgam = gammaln(a)
    for _ in range(max_iter):
        # lower tail is better conditioned when Q is close to one
        if p > 0.5:
            f = gammainc(a, x) - (1.0 - p)
        else:
            q = gammaincc(a, x)
            if q <= 0:
                hi = x
                x = 0.5 * (lo + hi)
                continue
            f = log_p - math.log(q)
        if f < 0:
            lo = x  # Q(x) still above p
        else:
            hi = x
        log_pdf = (a - 1) * math.log(x) - x - lgam if x > 0 else -math.inf
        if p > 0.5:
            deriv = math.exp(log_pdf)
        else:
            deriv = math.exp(log_pdf - math.log(q))
        step = f / deriv if deriv > 0 else math.inf
        x_new = x - step
        if not (lo < x_new < hi) or not np.isfinite(x_new):
            x_new = 0.5 * (lo + hi)
        if abs(x_new - x) <= rtol * x_new or hi - lo <= rtol * hi:
            return x_new
        x = x_new
    raise ConvergenceFailure(f"Gamma quantile did not converge (a={a}, p={p})")


def gamma_threshold(D: int, n_samples: int, p: float) -> float:
    """(1-p)-quantile of Gamma(D/2, scale=1/(N ln 2)), in bits.

    Equivalent to ``chi2.ppf(1-p, D) / (2 N ln 2)``.
    """
    if not 0 < p < 0.5:
        raise InvalidP(f"p must lie in (0, 0.5), got {p}")
    if D < 1:
        raise InvalidAlphabet("degrees of freedom must be positive")
    if n_samples < 2:
        raise InputError("sample size must be at least 2")
    return _gamma_upper_inverse(D / 2.0, p) / (n_samples * LN2)


def gamma_null_mean(D: int, n_samples: int) -> float:
    """Mean of the Gamma null, D / (2 N ln 2) bits."""
    return D / (2.0 * n_samples * LN2)


@dataclass(frozen=True)
class SignificanceModel:
    base_p: float
    alpha: float
    dof: int
    sample_size: int
    alphabet_size: int
    n_nodes: int
    validator: str = "gamma"
    correction: str = "bonferroni"
    threshold_bits: float | None = None
    quantile_bits: float | None = None
    bias_shift_bits: float = 0.0
    n_surrogates: int | None = None

    def as_dict(self) -> dict:
        return asdict(self)


def _corrected(base_p: float, n_nodes: int, correction: str) -> float:
    if correction == "bonferroni":
        return bonferroni(base_p, n_nodes)
    if correction == "none":
        if not 0 < base_p < 1:
            raise InvalidP(f"p must lie in (0, 1), got {base_p}")
        return base_p
    raise InputError(f"unknown correction {correction!r}")


def gamma_model(
    alphabet_size: int,
    sample_size: int,
    n_nodes: int,
    base_p: float = 0.01,
    correction: str = "bonferroni",
    conditional: bool = True,
    align_bias: bool = True,
) -> SignificanceModel:
    """Analytic Gamma validator for TE (``conditional=True``) or lagged MI."""
    alpha = _corrected(base_p, n_nodes, correction)
    K = alphabet_size
    D = dof(K, K, K if conditional else None)
    q = gamma_threshold(D, sample_size, alpha)
    shift = gamma_null_mean(D, sample_size) if align_bias else 0.0
    return SignificanceModel(
        base_p=base_p,
        alpha=alpha,
        dof=D,
        sample_size=sample_size,
        alphabet_size=K,
        n_nodes=n_nodes,
        validator="gamma",
        correction=correction,
        threshold_bits=q + shift,
        quantile_bits=q,
        bias_shift_bits=shift,
    )


def permutation_model(
    alphabet_size: int,
    sample_size: int,
    n_nodes: int,
    n_surrogates: int,
    base_p: float = 0.01,
    correction: str = "bonferroni",
) -> SignificanceModel:
    alpha = _corrected(base_p, n_nodes, correction)
    if n_surrogates < 99:
        raise InputError("at least 99 surrogates are required")
    if n_surrogates + 1 < 1.0 / alpha:
        warnings.warn(
            f"{n_surrogates} surrogates cannot resolve alpha={alpha:g}; "
            f"need at least {math.ceil(1 / alpha) - 1}",
            CostWarning,
            stacklevel=2,
        )
    K = alphabet_size
    return SignificanceModel(
        base_p=base_p,
        alpha=alpha,
        dof=dof(K, K, K),
        sample_size=sample_size,
        alphabet_size=K,
        n_nodes=n_nodes,
        validator="permutation",
        correction=correction,
        n_surrogates=n_surrogates,
    )


def _te_batch(x_rows: np.ndarray, yz: np.ndarray, hyz: float, hz: float, K: int) -> np.ndarray:
    """TE for many source rows against one fixed (future, past) pair."""
    c, T = x_rows.shape
    offs = (np.arange(c, dtype=np.int64) * K**3)[:, None]
    xyz = np.bincount((x_rows * (K * K) + yz[None, :] + offs).ravel(), minlength=c * K**3)
    xyz = xyz.reshape(c, K**3)
    xz = xyz.reshape(c, K, K, K).sum(axis=2).reshape(c, K * K)
    return ((sg_entropy_rows(xz) + hyz) - hz) - sg_entropy_rows(xyz)


def _seed_sequence(seed) -> np.random.SeedSequence:
    if isinstance(seed, np.random.SeedSequence):
        return seed
    return np.random.SeedSequence(seed)


def permutation_pvalue(
    source: DiscreteSeries,
    target_future: DiscreteSeries,
    target_past: DiscreteSeries,
    n_surrogates: int = 999,
    seed=0,
    workers: int = 1,
) -> float:
    """Shuffle-surrogate p-value of TE(source -> target).

    Only the source is shuffled, so the target's own dynamics are preserved.
    Returns ``(1 + #{surrogate >= observed}) / (n_surrogates + 1)``.
    Surrogates are drawn in fixed-size chunks with generators spawned from
    ``seed``, so the value does not depend on ``workers``.
    """
    K = source.alphabet_size
    if target_future.alphabet_size != K or target_past.alphabet_size != K:
        raise InvalidAlphabet("all three series must share one alphabet")
    x, y, z = source.symbols, target_future.symbols, target_past.symbols
    if not len(x) == len(y) == len(z):
        raise LengthMismatch("series lengths differ")
    if n_surrogates < 1:
        raise InputError("n_surrogates must be positive")
    yz = y * K + z
    hyz = sg_entropy_rows(np.bincount(yz, minlength=K * K)[None, :])[0]
    hz = sg_entropy_rows(np.bincount(z, minlength=K)[None, :])[0]
    observed = _te_batch(x[None, :], yz, hyz, hz, K)[0]

    n_chunks = -(-n_surrogates // SURROGATE_CHUNK)
    children = _seed_sequence(seed).spawn(n_chunks)

    def run(i: int) -> int:
        size = min(SURROGATE_CHUNK, n_surrogates - i * SURROGATE_CHUNK)
        rng = np.random.default_rng(children[i])
        rows = rng.permuted(np.broadcast_to(x, (size, len(x))), axis=1)
        return int(np.count_nonzero(_te_batch(rows, yz, hyz, hz, K) >= observed))

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            exceed = sum(pool.map(run, range(n_chunks)))
    else:
        exceed = sum(run(i) for i in range(n_chunks))
    return (1 + exceed) / (n_surrogates + 1)


def permutation_pvalue_matrix(lp: LaggedPair, n_surrogates: int = 999, seed=0, workers: int = 1) -> np.ndarray:
    """Permutation p-values for every ordered pair; diagonal set to 1.

    Each pair gets its own seed sequence keyed by ``(m, n)``.
    """
    n = lp.A.shape[1]
    K = lp.alphabet_size
    root = _seed_sequence(seed)
    P = np.ones((n, n))
    for m in range(n):
        for t in range(n):
            if m == t:
                continue
            ss = np.random.SeedSequence(root.entropy, spawn_key=root.spawn_key + (m, t))
            P[m, t] = permutation_pvalue(
                DiscreteSeries(lp.A[:, m], K),
                DiscreteSeries(lp.B[:, t], K),
                DiscreteSeries(lp.A[:, t], K),
                n_surrogates,
                ss,
                workers,
            )
    return P


def validate_matrix(C: TEMatrix, model: SignificanceModel, pvalues: np.ndarray | None = None) -> np.ndarray:
    """Boolean mask of validated links; the diagonal is always False."""
    if C.sample_size != model.sample_size:
        raise ModelMismatch(f"matrix sample size {C.sample_size} != model {model.sample_size}")
    if C.alphabet_size != model.alphabet_size:
        raise ModelMismatch(f"matrix alphabet {C.alphabet_size} != model {model.alphabet_size}")
    if model.validator == "gamma":
        mask = C.values >= model.threshold_bits
    elif model.validator == "permutation":
        if pvalues is None:
            raise ModelMismatch("permutation validation needs the p-value matrix")
        pvalues = np.asarray(pvalues)
        if pvalues.shape != C.values.shape:
            raise ModelMismatch("p-value matrix shape differs from TE matrix")
        mask = pvalues <= model.alpha
    else:
        raise ModelMismatch(f"unknown validator {model.validator!r}")
    mask = np.array(mask, dtype=bool)
    np.fill_diagonal(mask, False)
    return mask


# --------------------------------------------------------------------------
# null calibration


def null_statistics(
    alphabet_size: int,
    length: int,
    trials: int,
    seed=0,
    conditional: bool = False,
    chunk: int = 500,
) -> np.ndarray:
    """MI (or CMI) of independent uniform series, one value per trial."""
    if trials < 1:
        raise InputError("trials must be positive")
    K = alphabet_size
    k_vars = 3 if conditional else 2
    cells = K**k_vars
    out = np.empty(trials)
    children = _seed_sequence(seed).spawn(-(-trials // chunk))
    for i, ss in enumerate(children):
        rng = np.random.default_rng(ss)
        c = min(chunk, trials - i * chunk)
        codes = np.zeros((c, length), dtype=np.int64)
        for _ in range(k_vars):
            codes = codes * K + rng.integers(0, K, size=(c, length))
        counts = np.bincount(
            (codes + (np.arange(c, dtype=np.int64) * cells)[:, None]).ravel(), minlength=c * cells
        ).reshape((c,) + (K,) * k_vars)
        if conditional:
            hxz = sg_entropy_rows(counts.sum(axis=2).reshape(c, -1))
            hyz = sg_entropy_rows(counts.sum(axis=1).reshape(c, -1))
            hz = sg_entropy_rows(counts.sum(axis=(1, 2)))
            hxyz = sg_entropy_rows(counts.reshape(c, -1))
            vals = ((hxz + hyz) - hz) - hxyz
        else:
            hx = sg_entropy_rows(counts.sum(axis=2))
            hy = sg_entropy_rows(counts.sum(axis=1))
            vals = (hx + hy) - sg_entropy_rows(counts.reshape(c, -1))
        out[i * chunk : i * chunk + c] = vals
    return out


def moment_matched_dof(null_values: np.ndarray, n_samples: int) -> float:
    """Degrees of freedom implied by the variance of null values.

    Uses var = (D/2) * scale**2 with scale = 1/(N ln 2). The variance is
    unaffected by a constant estimator shift, unlike the mean.
    """
    scale = 1.0 / (n_samples * LN2)
    return 2.0 * float(np.var(null_values, ddof=1)) / scale**2


def calibration_report(
    alphabet_size: int = 4,
    length: int = 2000,
    p_values=(0.01,),
    trials: int = 10_000,
    seed=0,
    align_bias: bool = True,
) -> dict:
    """Empirical vs analytic null rejection rates for MI and CMI.

    Returns a JSON-ready dict with one entry per (statistic, p) cell.
    """
    if trials < 1:
        raise InputError("trials must be positive")
    K = alphabet_size
    entries = []
    root = _seed_sequence(seed)
    for kind, conditional, ss in zip(("mi", "cmi"), (False, True), root.spawn(2)):
        vals = null_statistics(K, length, trials, ss, conditional)
        D = dof(K, K, K if conditional else None)
        shift = gamma_null_mean(D, length)
        for p in p_values:
            q = gamma_threshold(D, length, p)
            thr = q + (shift if align_bias else 0.0)
            entries.append(
                {
                    "statistic": kind,
                    "D": D,
                    "N_s": length,
                    "p": p,
                    "trials": trials,
                    "threshold_bits": thr,
                    "gamma_quantile_bits": q,
                    "bias_shift_bits": shift if align_bias else 0.0,
                    "empirical_rejection_rate": float(np.mean(vals >= thr)),
                    "unshifted_rejection_rate": float(np.mean(vals >= q)),
                    "null_mean_bits": float(vals.mean()),
                    "analytic_mean_bits": shift,
                    "moment_matched_D": moment_matched_dof(vals, length),
                    "surrogate_percentiles": {
                        str(level): float(np.quantile(vals, level)) for level in (0.9, 0.99, 0.999)
                    },
                }
            )
    return {"alphabet_size": K, "align_bias": align_bias, "seed": _seed_repr(seed), "entries": entries}


def _seed_repr(seed):
    return seed if isinstance(seed, (int, type(None))) else str(seed)
