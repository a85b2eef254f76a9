"""System-level measurements over simulation output.

All functions are pure and operate on plain arrays, so they can be applied
to live run results or to previously persisted CSV columns.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import ConfigError, FitUnavailableError, InputError, UndefinedCorrelationError


# --------------------------------------------------------------------------
# Rank correlation
# --------------------------------------------------------------------------

def _tie_pair_count(sorted_vals) -> int:
    """Number of pairs tied in a sorted 1-d array, as an exact integer."""
    total = 0
    run = 1
    for i in range(1, len(sorted_vals)):
        if sorted_vals[i] == sorted_vals[i - 1]:
            run += 1
        else:
            total += run * (run - 1) // 2
            run = 1
    total += run * (run - 1) // 2
    return total


def _count_inversions(a: list) -> int:
    """Strict inversions (i < j with a[i] > a[j]) by bottom-up merge sort."""
    n = len(a)
    buf = [0] * n
    inv = 0
    width = 1
    while width < n:
        for lo in range(0, n - width, 2 * width):
            mid = lo + width
            hi = min(lo + 2 * width, n)
            i, j, k = lo, mid, lo
            while i < mid and j < hi:
                if a[j] < a[i]:
                    inv += mid - i
                    buf[k] = a[j]
                    j += 1
                else:
                    buf[k] = a[i]
                    i += 1
                k += 1
            while i < mid:
                buf[k] = a[i]
                i += 1
                k += 1
            while j < hi:
                buf[k] = a[j]
                j += 1
                k += 1
            a[lo:hi] = buf[lo:hi]
        width *= 2
    return inv


def kendall_tau_b(x, y) -> float:
    """Tie-corrected Kendall rank correlation between two sequences.

    Implements the O(n log n) scheme: sort by (x, y), count tie pairs for
    each variable and jointly, then count discordant pairs as strict
    inversions of the y sequence with a merge sort. All pair counts are
    exact integers, so the result matches a brute-force O(n^2) pair scan
    bit for bit.

    Raises :class:`UndefinedCorrelationError` when either variable is
    entirely tied (zero denominator).
    """
    x = np.asarray(x)
    y = np.asarray(y)
    n = len(x)
    if n != len(y):
        raise InputError(f"length mismatch: {n} vs {len(y)}")
    if n < 2:
        raise UndefinedCorrelationError("need at least two pairs")

    order = np.lexsort((y, x))
    xs = x[order]
    ys = y[order]

    n0 = n * (n - 1) // 2
    n1 = _tie_pair_count(xs)
    n2 = _tie_pair_count(np.sort(y))
    if n1 == n0 or n2 == n0:
        raise UndefinedCorrelationError("one variable is entirely tied")

    # joint ties: runs of identical (x, y)
    joint = 0
    run = 1
    for i in range(1, n):
        if xs[i] == xs[i - 1] and ys[i] == ys[i - 1]:
            run += 1
        else:
            joint += run * (run - 1) // 2
            run = 1
    joint += run * (run - 1) // 2

    discordant = _count_inversions(ys.tolist())
    numerator = n0 - n1 - n2 + joint - 2 * discordant
    return numerator / math.sqrt((n0 - n1) * (n0 - n2))


# --------------------------------------------------------------------------
# Entropy-based diversity
# --------------------------------------------------------------------------

def diversity_entropy(counts) -> float:
    """Shannon entropy (natural log) of a meme -> message-count snapshot.

    ``counts`` may be a mapping from meme id to count or a bare sequence of
    counts; zero counts are ignored.
    """
    if hasattr(counts, "values"):
        arr = np.fromiter(counts.values(), dtype=float)
    else:
        arr = np.asarray(counts, dtype=float)
    arr = arr[arr > 0]
    total = arr.sum()
    if total <= 0:
        raise InputError("empty feed snapshot has no entropy")
    p = arr / total
    return float(-(p * np.log(p)).sum())


def normalized_diversity(run, baseline) -> float:
    """Time-averaged entropy of ``run`` divided by that of ``baseline``.

    The baseline must come from a maximum-injection run (every activation
    posts a new meme) on the same network spec and attention mode; a
    mismatch raises :class:`ConfigError`.
    """
    if run.alpha_key != baseline.alpha_key:
        raise ConfigError(
            f"attention mode mismatch: {run.alpha_key} vs {baseline.alpha_key}"
        )
    if run.net_key != baseline.net_key:
        raise ConfigError(f"network mismatch: {run.net_key} vs {baseline.net_key}")
    denom = baseline.mean_entropy()
    if denom <= 0:
        raise ConfigError("baseline run has zero mean entropy")
    return run.mean_entropy() / denom


# --------------------------------------------------------------------------
# Discrete power-law fit (MLE with KS-optimal lower cutoff)
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class PowerLawFit:
    exponent: float
    x_min: int
    ks_distance: float
    n_tail: int


def hurwitz_zeta(s: float, q, terms: int = 64):
    """Hurwitz zeta sum_{k>=0} (q+k)^-s for s > 1, vectorized over q.

    Direct summation of the first ``terms`` terms plus an Euler-Maclaurin
    tail; relative error is far below 1e-8 over the exponent range used by
    the fitter.
    """
    q = np.asarray(q, dtype=float)
    k = np.arange(terms, dtype=float)
    direct = np.power(q[..., None] + k, -s).sum(axis=-1)
    qk = q + terms
    tail = (
        np.power(qk, 1.0 - s) / (s - 1.0)
        + 0.5 * np.power(qk, -s)
        + s * np.power(qk, -s - 1.0) / 12.0
        - s * (s + 1.0) * (s + 2.0) * np.power(qk, -s - 3.0) / 720.0
    )
    out = direct + tail
    return float(out) if out.ndim == 0 else out


def _mle_exponent(x_min, n_tail, sum_log_tail, bounds):
    def negloglik(beta):
        return n_tail * math.log(hurwitz_zeta(beta, x_min)) + beta * sum_log_tail

    res = minimize_scalar(negloglik, bounds=bounds, method="bounded",
                          options={"xatol": 1e-7})
    return float(res.x)


def fit_power_law(samples, min_tail: int = 50, x_min_quantile: float = 0.9,
                  beta_bounds=(1.000001, 8.0)) -> PowerLawFit:
    """Fit P(x) ~ x^-beta to positive integer samples.

    For each candidate lower cutoff (every distinct sample value up to the
    ``x_min_quantile`` percentile) the exponent is estimated by discrete
    maximum likelihood with Hurwitz-zeta normalization, and the cutoff
    minimizing the KS distance between the empirical and fitted tails is
    kept. Candidates with fewer than ``min_tail`` tail samples are skipped;
    if none qualifies, :class:`FitUnavailableError` is raised.
    """
    xs = np.sort(np.asarray(samples, dtype=np.int64))
    if len(xs) == 0 or xs[0] < 1:
        raise InputError("samples must be positive integers")
    uniq = np.unique(xs)
    if len(uniq) < 2:
        raise FitUnavailableError("all samples equal; no tail to fit")

    cap = np.quantile(xs, x_min_quantile)
    candidates = uniq[uniq <= cap]
    if len(candidates) == 0:
        candidates = uniq[:1]

    log_xs = np.log(xs.astype(float))
    suffix_log = np.concatenate([np.cumsum(log_xs[::-1])[::-1], [0.0]])
    n = len(xs)

    best = None
    for u in candidates:
        i0 = int(np.searchsorted(xs, u, side="left"))
        n_tail = n - i0
        if n_tail < min_tail:
            continue
        tail_uniq = uniq[uniq >= u]
        if len(tail_uniq) < 2:
            continue
        beta = _mle_exponent(float(u), n_tail, suffix_log[i0], beta_bounds)
        # model and empirical CDF over the observed tail support
        z_all = hurwitz_zeta(beta, float(u))
        model_cdf = 1.0 - hurwitz_zeta(beta, tail_uniq + 1.0) / z_all
        emp_cdf = (np.searchsorted(xs, tail_uniq, side="right") - i0) / n_tail
        ks = float(np.max(np.abs(model_cdf - emp_cdf)))
        if best is None or ks < best.ks_distance:
            best = PowerLawFit(exponent=beta, x_min=int(u),
                               ks_distance=ks, n_tail=n_tail)

    if best is None:
        raise FitUnavailableError(
            f"no candidate cutoff leaves at least {min_tail} tail samples"
        )
    return best


# --------------------------------------------------------------------------
# Popularity summaries
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class QualityBin:
    quality_mid: float
    mean_popularity: float
    std_error: float
    count: int


def mean_popularity_by_quality(quality, popularity, bins: int = 20):
    """Mean popularity inside equal-width quality bins over (0, 1].

    Returns a list of :class:`QualityBin`; empty bins are absent. The
    standard error is NaN for single-record bins.
    """
    q = np.asarray(quality, dtype=float)
    p = np.asarray(popularity, dtype=float)
    idx = np.ceil(q * bins).astype(int) - 1
    idx = np.clip(idx, 0, bins - 1)
    out = []
    for k in range(bins):
        sel = p[idx == k]
        if len(sel) == 0:
            continue
        se = float(sel.std(ddof=1) / math.sqrt(len(sel))) if len(sel) > 1 else float("nan")
        out.append(QualityBin(
            quality_mid=(k + 0.5) / bins,
            mean_popularity=float(sel.mean()),
            std_error=se,
            count=int(len(sel)),
        ))
    return out


def ccdf(samples):
    """Complementary CDF P(X >= v) at each distinct sample value.

    Returns (values, probabilities), both ascending in value.
    """
    xs = np.sort(np.asarray(samples))
    n = len(xs)
    if n == 0:
        return np.array([]), np.array([])
    vals = np.unique(xs)
    below = np.searchsorted(xs, vals, side="left")
    return vals, (n - below) / n


@dataclass(frozen=True)
class QualityGroupSplit:
    threshold: float
    high_values: np.ndarray
    high_ccdf: np.ndarray
    low_values: np.ndarray
    low_ccdf: np.ndarray
    high_count: int
    low_count: int

    @property
    def high_empty(self) -> bool:
        return self.high_count == 0

    @property
    def low_empty(self) -> bool:
        return self.low_count == 0


def popularity_by_quality_group(quality, popularity, threshold: float) -> QualityGroupSplit:
    """Split popularity samples at quality ``threshold`` and return both CCDFs.

    An empty group is flagged on the result rather than raised.
    """
    if not (0.0 < threshold < 1.0):
        raise InputError(f"threshold must be inside (0, 1), got {threshold}")
    q = np.asarray(quality, dtype=float)
    p = np.asarray(popularity)
    hi = p[q >= threshold]
    lo = p[q < threshold]
    hv, hc = ccdf(hi)
    lv, lc = ccdf(lo)
    return QualityGroupSplit(
        threshold=threshold,
        high_values=hv, high_ccdf=hc,
        low_values=lv, low_ccdf=lc,
        high_count=int(len(hi)), low_count=int(len(lo)),
    )


def ks_two_sample(a, b) -> float:
    """Two-sample Kolmogorov-Smirnov statistic (handles ties exactly)."""
    a = np.sort(np.asarray(a, dtype=float))
    b = np.sort(np.asarray(b, dtype=float))
    if len(a) == 0 or len(b) == 0:
        raise InputError("both samples must be non-empty")
    grid = np.union1d(a, b)
    fa = np.searchsorted(a, grid, side="right") / len(a)
    fb = np.searchsorted(b, grid, side="right") / len(b)
    return float(np.max(np.abs(fa - fb)))


# --------------------------------------------------------------------------
# Mutual information
# --------------------------------------------------------------------------

def mutual_information_from_joint(joint) -> float:
    """Plugin MI (nats) from a 2-d contingency table of counts."""
    j = np.asarray(joint, dtype=float)
    total = j.sum()
    if total <= 0:
        raise InputError("empty joint histogram")
    pij = j / total
    pi = pij.sum(axis=1, keepdims=True)
    pj = pij.sum(axis=0, keepdims=True)
    mask = pij > 0
    ratio = np.divide(pij, pi * pj, out=np.ones_like(pij), where=mask)
    return float((pij[mask] * np.log(ratio[mask])).sum())


def mutual_information(quality, popularity, q_bins: int = 10,
                       log_factor: float = 2.0) -> float:
    """MI between quality decile and log-binned popularity, in nats.

    Quality bins are quantile-based (deciles by default); popularity bins
    are logarithmic with the given factor. A joint table with a single
    occupied cell yields 0.
    """
    q = np.asarray(quality, dtype=float)
    p = np.asarray(popularity, dtype=float)
    if len(q) == 0:
        raise InputError("no samples")
    edges = np.unique(np.quantile(q, np.linspace(0.0, 1.0, q_bins + 1)))
    qi = np.clip(np.searchsorted(edges, q, side="left") - 1, 0, len(edges) - 2)
    pi = np.floor(np.log(p) / math.log(log_factor)).astype(int)
    pi -= pi.min()
    joint = np.zeros((qi.max() + 1, pi.max() + 1))
    np.add.at(joint, (qi, pi), 1.0)
    return mutual_information_from_joint(joint)


# --------------------------------------------------------------------------
# Log-binned density
# --------------------------------------------------------------------------

def log_binned_pdf(samples, factor: float = 2.0):
    """Histogram positive integer samples into log-spaced bins.

    Returns a list of (bin_center, density) rows where the center is the
    geometric midpoint and the density is normalized by bin width and by
    the number of samples; empty bins are omitted.
    """
    xs = np.asarray(samples, dtype=float)
    if len(xs) == 0:
        return []
    if xs.min() < 1:
        raise InputError("samples must be >= 1")
    k = np.floor(np.log(xs) / math.log(factor)).astype(int)
    n = len(xs)
    rows = []
    for kk in np.unique(k):
        lo = factor ** kk
        hi = factor ** (kk + 1)
        count = int((k == kk).sum())
        rows.append((math.sqrt(lo * hi), count / (n * (hi - lo))))
    return rows
