"""Heterogeneous scrolling-session model of posting and attention.

A user session either posts one brand-new meme (probability ``rho``) or is
a scrolling run: a per-session stop probability ``q`` is drawn uniformly
from ``[q_mean - sigma, q_mean + sigma]`` and the user reshares messages
until the first stop, giving a geometric run length. Mixing over ``q``
interpolates between a pure geometric session-length law (``sigma = 0``)
and a heavy power-law-like tail (``sigma -> q_mean``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import ConfigError, InputError


class SessionKind(Enum):
    NEW_POST = "new_post"
    RESHARE_RUN = "reshare_run"


@dataclass(frozen=True)
class SessionOutcome:
    kind: SessionKind
    length: int = 1  # number of reshares for a run; a new post is one event


@dataclass(frozen=True)
class ScrollParams:
    """Parameters of the session model.

    ``rho`` is the probability that a session is a single new post;
    ``q_mean`` the mean per-session stop probability; ``sigma`` the
    half-width of the uniform interval the stop probability is drawn from.
    """

    rho: float
    q_mean: float
    sigma: float

    def validate(self):
        if not (0.0 <= self.rho <= 1.0):
            raise ConfigError(f"rho must be in [0, 1], got {self.rho}")
        if not (0.0 < self.q_mean < 1.0):
            raise ConfigError(f"q_mean must be inside (0, 1), got {self.q_mean}")
        lim = min(self.q_mean, 1.0 - self.q_mean)
        if not (0.0 <= self.sigma <= lim + 1e-12):
            raise ConfigError(
                f"sigma must be in [0, min(q_mean, 1-q_mean)] = [0, {lim}], got {self.sigma}"
            )

    @property
    def q_lo(self) -> float:
        return self.q_mean - self.sigma

    @property
    def q_hi(self) -> float:
        return self.q_mean + self.sigma


_MIN_Q = 1e-12


def draw_run_length(q: float, u: float) -> int:
    """Geometric run length (support >= 1) by inverse transform.

    ``u`` must lie in (0, 1]; ``q`` is the per-reshare stop probability.
    """
    q = max(q, _MIN_Q)
    if q >= 1.0:
        return 1
    return int(math.log(u) / math.log1p(-q)) + 1


def sample_session(params: ScrollParams, rng) -> SessionOutcome:
    """Draw one session outcome."""
    params.validate()
    if rng.random() < params.rho:
        return SessionOutcome(SessionKind.NEW_POST, 1)
    q = rng.uniform(params.q_lo, params.q_hi) if params.sigma > 0 else params.q_mean
    length = draw_run_length(q, 1.0 - rng.random())
    return SessionOutcome(SessionKind.RESHARE_RUN, length)


def session_pmf(params: ScrollParams, alpha) -> float:
    """Probability that a scrolling run has length ``alpha`` (>= 1).

    Uses the closed-form average of the geometric pmf over the uniform
    stop-probability interval,

        P(a) = (1/2 sigma) * [G(q_hi) - G(q_lo)],
        G(q) = (1-q)^(a+1)/(a+1) - (1-q)^a/a,

    which reduces exactly to ``q (1-q)^(a-1)`` at sigma = 0. ``alpha`` may
    be an array.
    """
    params.validate()
    a = np.asarray(alpha, dtype=float)
    if np.any(a < 1) or np.any(a != np.floor(a)):
        raise InputError("run length must be an integer >= 1")
    if params.sigma == 0.0:
        q = params.q_mean
        out = q * np.power(1.0 - q, a - 1.0)
    else:
        def g(q):
            one = 1.0 - q
            return np.power(one, a + 1.0) / (a + 1.0) - np.power(one, a) / a

        out = (g(params.q_hi) - g(params.q_lo)) / (2.0 * params.sigma)
    return float(out) if out.ndim == 0 else out


def session_survival(params: ScrollParams, alpha) -> float:
    """P(run length > alpha); closed form, exact for any alpha >= 0."""
    params.validate()
    a = np.asarray(alpha, dtype=float)
    if params.sigma == 0.0:
        out = np.power(1.0 - params.q_mean, a)
    else:
        lo, hi = 1.0 - params.q_hi, 1.0 - params.q_lo
        out = (np.power(hi, a + 1.0) - np.power(lo, a + 1.0)) / (2.0 * params.sigma * (a + 1.0))
    return float(out) if out.ndim == 0 else out


def simulate_user_counts(params: ScrollParams, sessions_per_user: int,
                         users: int, rng):
    """Per-user (posts, reshares) totals from repeated sessions."""
    params.validate()
    if sessions_per_user < 1:
        raise InputError("sessions_per_user must be >= 1")
    if users < 1:
        raise InputError("users must be >= 1")
    n_t = np.zeros(users, dtype=np.int64)
    n_r = np.zeros(users, dtype=np.int64)
    # chunk the (users x sessions) table to bound memory
    chunk = max(1, int(2_000_000 // max(sessions_per_user, 1)))
    for start in range(0, users, chunk):
        stop = min(start + chunk, users)
        shape = (stop - start, sessions_per_user)
        is_post = rng.random(shape) < params.rho
        q = rng.uniform(params.q_lo, params.q_hi, size=shape)
        q = np.maximum(q, _MIN_Q)
        u = 1.0 - rng.random(shape)
        length = np.floor(np.log(u) / np.log1p(-q)).astype(np.int64) + 1
        n_t[start:stop] = is_post.sum(axis=1)
        n_r[start:stop] = np.where(is_post, 0, length).sum(axis=1)
    return n_t, n_r


def simulate_user_mu(params: ScrollParams, sessions_per_user: int, users: int,
                     rng) -> np.ndarray:
    """Per-user posting rate from repeated sessions.

    Each user runs ``sessions_per_user`` sessions; posting rate is
    n_posts / (n_posts + n_reshares). Every session contributes at least
    one event, so the ratio is always defined.
    """
    n_t, n_r = simulate_user_counts(params, sessions_per_user, users, rng)
    return n_t / (n_t + n_r)


def sample_run_lengths(params: ScrollParams, count: int, rng) -> np.ndarray:
    """Draw ``count`` scrolling-run lengths (ignores the new-post branch)."""
    params.validate()
    q = rng.uniform(params.q_lo, params.q_hi, size=count)
    q = np.maximum(q, _MIN_Q)
    u = 1.0 - rng.random(count)
    return np.floor(np.log(u) / np.log1p(-q)).astype(np.int64) + 1


# --------------------------------------------------------------------------
# Fitting the session model to empirical histograms
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class FitGrid:
    """Search grid; any axis may be a single value to pin that parameter."""

    rho: tuple = (0.05,)
    q_mean: tuple = tuple(np.round(np.arange(0.02, 0.31, 0.005), 4))
    sigma: tuple = tuple(np.round(np.arange(0.0, 0.21, 0.005), 4))
    polish: bool = True


@dataclass(frozen=True)
class FitResult:
    params: ScrollParams
    discrepancy: float
    target: str
    evaluations: int
    trace: tuple  # ((rho, q_mean, sigma, score), ...) in evaluation order


def _alpha_ks(params, values, weights):
    """Weighted KS distance between an alpha histogram and the model CDF."""
    total = weights.sum()
    ecdf = np.cumsum(weights) / total
    model_cdf = 1.0 - session_survival(params, values)
    return float(np.max(np.abs(ecdf - model_cdf)))


def _mu_chi2(params, values, weights, bins, sessions_per_user, sim_users, seed):
    """Binned chi-square between an observed mu histogram and a simulated one."""
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    sim = simulate_user_mu(params, sessions_per_user, sim_users, rng)
    edges = np.linspace(0.0, 1.0, bins + 1)
    obs, _ = np.histogram(values, bins=edges, weights=weights)
    model, _ = np.histogram(sim, bins=edges)
    total_obs = obs.sum()
    # light smoothing keeps empty model bins from blowing up the statistic
    model_frac = (model + 0.5) / (model.sum() + 0.5 * bins)
    expected = model_frac * total_obs
    return float(((obs - expected) ** 2 / expected).sum())


def fit(values, weights, target: str, grid: FitGrid = FitGrid(),
        mu_bins: int = 20, sessions_per_user: int = 200,
        sim_users: int = 10000, seed: int = 1234) -> FitResult:
    """Search for session-model parameters matching an empirical histogram.

    ``target`` is ``"alpha"`` (session lengths; KS discrepancy; rho is not
    identifiable and stays pinned to the first grid value) or ``"mu"``
    (per-user posting rates; binned chi-square against a simulated
    histogram with common random numbers). Grid search first, then an
    optional Nelder-Mead polish from the best cell.
    """
    values = np.asarray(values, dtype=float)
    weights = np.asarray(weights, dtype=float)
    if len(values) == 0 or weights.sum() <= 0:
        raise InputError("empty histogram")
    if target not in ("alpha", "mu"):
        raise InputError(f"unknown fit target {target!r}")
    if target == "alpha":
        # collapse duplicate support values so the ECDF is well defined
        uniq, inverse = np.unique(values, return_inverse=True)
        agg = np.zeros(len(uniq))
        np.add.at(agg, inverse, weights)
        values, weights = uniq, agg

    def score(rho, qm, sg):
        lim = min(qm, 1.0 - qm)
        if not (0 <= rho <= 1 and 0 < qm < 1 and 0 <= sg <= lim):
            return float("inf")
        p = ScrollParams(rho=rho, q_mean=qm, sigma=sg)
        if target == "alpha":
            return _alpha_ks(p, values, weights)
        return _mu_chi2(p, values, weights, mu_bins, sessions_per_user,
                        sim_users, seed)

    trace = []
    best = None
    rhos = grid.rho if target == "mu" else grid.rho[:1]
    for rho in rhos:
        for qm in grid.q_mean:
            for sg in grid.sigma:
                if sg > min(qm, 1.0 - qm):
                    continue
                s = score(rho, qm, sg)
                trace.append((float(rho), float(qm), float(sg), s))
                if best is None or s < best[3]:
                    best = trace[-1]
    if best is None:
        raise InputError("search grid is empty or entirely infeasible")

    rho, qm, sg, disc = best
    if grid.polish:
        from scipy.optimize import minimize

        if target == "alpha":
            x0 = [qm, sg]
            fun = lambda x: score(rho, x[0], x[1])
        else:
            x0 = [rho, qm, sg]
            fun = lambda x: score(x[0], x[1], x[2])
        res = minimize(fun, x0, method="Nelder-Mead",
                       options={"xatol": 1e-4, "fatol": 1e-10, "maxiter": 200})
        if np.isfinite(res.fun) and res.fun <= disc:
            if target == "alpha":
                qm, sg = float(res.x[0]), float(res.x[1])
            else:
                rho, qm, sg = (float(v) for v in res.x)
            disc = float(res.fun)
            trace.append((rho, qm, sg, disc))

    params = ScrollParams(rho=rho, q_mean=qm, sigma=max(sg, 0.0))
    params.validate()
    return FitResult(params=params, discrepancy=disc, target=target,
                     evaluations=len(trace), trace=tuple(trace))
