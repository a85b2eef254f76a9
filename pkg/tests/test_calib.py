import numpy as np
import pytest

from memesim import EmpiricalDist, InputError, Sampler, ingest_alpha, ingest_mu, naive_params
from memesim.calib import ingest_share_counts
from memesim.scrolling import ScrollParams, sample_run_lengths, simulate_user_counts

from conftest import repo_path


def _write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return p


def test_ingest_mu_basic(tmp_path):
    p = _write(tmp_path, "mu.csv",
               "user_id,n_t,n_r\na,3,1\nb,0,5\nc,0,0\nd,oops,1\n")
    dist = ingest_mu(p)
    assert dist.sample_count == 2
    assert dist.skipped_rows == 2
    assert sorted(dist.values.tolist()) == [0.0, 0.75]


def test_ingest_mu_rejects_empty_and_bad_header(tmp_path):
    with pytest.raises(InputError):
        ingest_mu(_write(tmp_path, "bad.csv", "user_id,n_t,n_r\nx,0,0\n"))
    with pytest.raises(InputError):
        ingest_mu(_write(tmp_path, "hdr.csv", "who,posts,reposts\nx,1,1\n"))


def test_ingest_alpha_basic(tmp_path):
    p = _write(tmp_path, "a.csv",
               "session_id,stops\n1,5\n2,5\n3,5\n4,0\n5,-2\n")
    dist = ingest_alpha(p)
    assert dist.sample_count == 3
    assert dist.skipped_rows == 2
    assert dist.mean() == 5.0


def test_ingest_share_counts(tmp_path):
    p = _write(tmp_path, "s.csv", "item,count\nx,10\ny,1\nz,bad\n")
    dist = ingest_share_counts(p)
    assert dist.sample_count == 2
    assert dist.skipped_rows == 1


def test_ingestion_is_lossless(tmp_path):
    rows = ["session_id,stops"] + [f"s{i},{1 + i % 7}" for i in range(500)]
    p = _write(tmp_path, "l.csv", "\n".join(rows) + "\n")
    dist = ingest_alpha(p)
    vals, counts = np.unique(dist.values, return_counts=True)
    expected = {float(1 + k): len([i for i in range(500) if i % 7 == k])
                for k in range(7)}
    assert dict(zip(vals.tolist(), counts.tolist())) == expected


def test_dist_validation():
    with pytest.raises(InputError):
        EmpiricalDist("mu_per_user", np.array([1.5]), np.array([1.0]), 1)
    with pytest.raises(InputError):
        EmpiricalDist("alpha_per_session", np.array([0.0]), np.array([1.0]), 1)
    with pytest.raises(InputError):
        EmpiricalDist("mu_per_user", np.array([]), np.array([]), 0)


def test_sampler_point_mass_and_support():
    dist = EmpiricalDist("alpha_per_session", np.array([7.0]), np.array([3.0]), 1)
    s = Sampler(dist, np.random.default_rng(0))
    assert np.all(s.draw(1000) == 7.0)


def test_sampler_two_point_mean():
    dist = EmpiricalDist("alpha_per_session", np.array([1.0, 9.0]),
                         np.array([0.5, 0.5]), 2)
    s = Sampler(dist, np.random.default_rng(1))
    draws = s.draw(1_000_000)
    assert set(np.unique(draws)) <= {1.0, 9.0}
    assert abs(draws.mean() - 5.0) < 0.05


def test_sampler_histogram_matches_source():
    rng = np.random.default_rng(5)
    values = np.arange(1.0, 21.0)
    weights = rng.random(20) + 0.1
    dist = EmpiricalDist("alpha_per_session", values, weights, 20)
    draws = Sampler(dist, np.random.default_rng(6)).draw(500_000)
    probs = weights / weights.sum()
    counts = np.array([(draws == v).sum() for v in values])
    expected = probs * len(draws)
    bands = 3.0 * np.sqrt(len(draws) * probs * (1 - probs))
    assert np.all(np.abs(counts - expected) <= bands)


def test_naive_params_rounding_and_duplication():
    mu = EmpiricalDist("mu_per_user", np.array([0.5, 1.0]), np.array([1.0, 1.0]), 2)
    al = EmpiricalDist("alpha_per_session", np.array([14.0, 15.0]),
                       np.array([4.0, 1.0]), 5)  # mean 14.2
    assert naive_params(mu, al) == (0.75, 14)
    dup = EmpiricalDist("alpha_per_session", np.tile(al.values, 3),
                        np.tile(al.weights, 3), 15)
    assert naive_params(mu, dup) == (0.75, 14)
    low = EmpiricalDist("alpha_per_session", np.array([1.0, 2.0]),
                        np.array([3.0, 1.0]), 2)  # mean 1.25
    assert naive_params(mu, low)[1] == 1
    point = EmpiricalDist("alpha_per_session", np.array([10.0]), np.array([1.0]), 1)
    pmu = EmpiricalDist("mu_per_user", np.array([0.5]), np.array([1.0]), 1)
    assert naive_params(pmu, point) == (0.5, 10)


def test_shipped_standins_ingest_and_match_fit():
    mu_dist = ingest_mu(repo_path("data", "standins", "mu_users.csv"))
    assert abs(mu_dist.mean() - 0.75) < 0.05
    al_dist = ingest_alpha(repo_path("data", "standins",
                                     "alpha_sessions_sigma009.csv"))
    assert al_dist.values.min() >= 1
    # heavy right skew: mean well above median, monotone-decreasing histogram
    med = np.median(al_dist.values)
    assert al_dist.mean() > 1.3 * med
    vals, counts = np.unique(al_dist.values, return_counts=True)
    head = counts[:8]
    assert np.all(np.diff(head) <= 0)


def test_synthetic_corpus_round_trip(tmp_path):
    rng = np.random.default_rng(9)
    n_t, n_r = simulate_user_counts(ScrollParams(0.978, 0.1, 0.09), 200, 5000, rng)
    lines = ["user_id,n_t,n_r"] + [f"u{i},{n_t[i]},{n_r[i]}" for i in range(5000)]
    p = _write(tmp_path, "mu.csv", "\n".join(lines) + "\n")
    dist = ingest_mu(p)
    assert abs(dist.mean() - 0.75) < 0.06


def test_alpha_corpus_shape(tmp_path):
    rng = np.random.default_rng(10)
    lengths = sample_run_lengths(ScrollParams(0.05, 0.1, 0.09), 40000, rng)
    lines = ["session_id,stops"] + [f"s{i},{v}" for i, v in enumerate(lengths)]
    dist = ingest_alpha(_write(tmp_path, "a.csv", "\n".join(lines) + "\n"))
    vals, counts = np.unique(dist.values, return_counts=True)
    assert vals[0] == 1.0
    assert np.all(np.diff(counts[:10]) <= 0)  # monotone-decreasing head
