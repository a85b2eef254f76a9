"""Ingestion of empirical information-load and attention data.

CSV formats (UTF-8, comma separated, one header row):

* per-user posting counts:   ``user_id,n_t,n_r``
* per-session scroll depths: ``session_id,stops``
* share counts:              ``item,count``

Rows that violate a precondition are skipped and counted on the resulting
distribution rather than raised.
"""

from __future__ import annotations

import csv
import hashlib
from dataclasses import dataclass

import numpy as np

from .errors import InputError


@dataclass(frozen=True)
class EmpiricalDist:
    """Weighted support of an empirical distribution.

    ``kind`` is one of ``"mu_per_user"``, ``"alpha_per_session"`` or
    ``"popularity_counts"``. ``skipped_rows`` counts input rows dropped
    during ingestion.
    """

    kind: str
    values: np.ndarray
    weights: np.ndarray
    sample_count: int
    skipped_rows: int = 0

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        w = np.asarray(self.weights, dtype=float)
        if len(v) == 0 or len(v) != len(w):
            raise InputError("distribution needs matching non-empty values/weights")
        if np.any(w < 0) or w.sum() <= 0:
            raise InputError("weights must be non-negative with positive total")
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "weights", w)
        if self.kind == "mu_per_user" and (v.min() < 0 or v.max() > 1):
            raise InputError("posting rates must lie in [0, 1]")
        if self.kind == "alpha_per_session":
            if v.min() < 1 or np.any(v != np.floor(v)):
                raise InputError("attention values must be integers >= 1")

    def mean(self) -> float:
        return float(np.average(self.values, weights=self.weights))

    def max_value(self) -> float:
        return float(self.values.max())

    def digest(self) -> str:
        """Short stable content hash, used in provenance keys."""
        h = hashlib.sha256()
        h.update(np.ascontiguousarray(self.values).tobytes())
        h.update(np.ascontiguousarray(self.weights).tobytes())
        return h.hexdigest()[:12]


def _read_rows(path, expected_header):
    with open(path, "r", encoding="utf-8", newline="") as f:
        reader = csv.reader(f)
        try:
            header = next(reader)
        except StopIteration:
            raise InputError(f"{path}: empty file") from None
        if [c.strip().lower() for c in header] != expected_header:
            raise InputError(
                f"{path}: expected header {','.join(expected_header)}, "
                f"got {','.join(header)}"
            )
        return list(reader)


def ingest_mu(path) -> EmpiricalDist:
    """Load per-user posting rates from a ``user_id,n_t,n_r`` CSV.

    Each valid row yields mu = n_t / (n_t + n_r) with unit weight; rows
    with n_t + n_r < 1, negative counts, or unparsable fields are skipped.
    """
    rows = _read_rows(path, ["user_id", "n_t", "n_r"])
    mus = []
    skipped = 0
    for row in rows:
        if len(row) != 3:
            skipped += 1
            continue
        try:
            n_t = int(row[1])
            n_r = int(row[2])
        except ValueError:
            skipped += 1
            continue
        if n_t < 0 or n_r < 0 or n_t + n_r < 1:
            skipped += 1
            continue
        mus.append(n_t / (n_t + n_r))
    if not mus:
        raise InputError(f"{path}: no valid rows")
    values = np.array(mus)
    return EmpiricalDist(kind="mu_per_user", values=values,
                         weights=np.ones(len(values)),
                         sample_count=len(values), skipped_rows=skipped)


def ingest_alpha(path) -> EmpiricalDist:
    """Load per-session attention depths from a ``session_id,stops`` CSV.

    Zero or negative stop counts are dropped (and counted); remaining
    values are positive integers with unit weights.
    """
    rows = _read_rows(path, ["session_id", "stops"])
    alphas = []
    skipped = 0
    for row in rows:
        if len(row) != 2:
            skipped += 1
            continue
        try:
            stops = int(row[1])
        except ValueError:
            skipped += 1
            continue
        if stops < 1:
            skipped += 1
            continue
        alphas.append(stops)
    if not alphas:
        raise InputError(f"{path}: no valid rows")
    values = np.array(alphas, dtype=float)
    return EmpiricalDist(kind="alpha_per_session", values=values,
                         weights=np.ones(len(values)),
                         sample_count=len(values), skipped_rows=skipped)


def ingest_share_counts(path) -> EmpiricalDist:
    """Load generic per-item share counts from an ``item,count`` CSV."""
    rows = _read_rows(path, ["item", "count"])
    counts = []
    skipped = 0
    for row in rows:
        if len(row) != 2:
            skipped += 1
            continue
        try:
            c = int(row[1])
        except ValueError:
            skipped += 1
            continue
        if c < 1:
            skipped += 1
            continue
        counts.append(c)
    if not counts:
        raise InputError(f"{path}: no valid rows")
    values = np.array(counts, dtype=float)
    return EmpiricalDist(kind="popularity_counts", values=values,
                         weights=np.ones(len(values)),
                         sample_count=len(values), skipped_rows=skipped)


class Sampler:
    """I.i.d. draws from a weighted support by inverse-CDF lookup."""

    def __init__(self, dist: EmpiricalDist, rng):
        self._values = dist.values
        self._cum = np.cumsum(dist.weights)
        self._total = self._cum[-1]
        self._rng = rng

    def draw(self, count: int) -> np.ndarray:
        u = self._rng.random(count) * self._total
        idx = np.searchsorted(self._cum, u, side="right")
        return self._values[idx]

    def draw_one(self) -> float:
        return float(self.draw(1)[0])


def naive_params(mu_dist: EmpiricalDist, alpha_dist: EmpiricalDist):
    """Mean-based calibration: (mean mu, mean alpha rounded to an int >= 1)."""
    mu_bar = mu_dist.mean()
    alpha_bar = max(1, int(np.floor(alpha_dist.mean() + 0.5)))
    return mu_bar, alpha_bar
