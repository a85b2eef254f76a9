#!/usr/bin/env python3
"""Regenerate the shipped stand-in calibration datasets.

The raw platform data behind the empirical posting-rate and attention
distributions is proprietary, so the repository ships synthetic stand-ins
drawn from the fitted session model instead. Running this script rewrites
data/standins/ deterministically.
"""

import os
import sys

import numpy as np

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from memesim.experiments import (  # noqa: E402
    STANDIN_ALPHA_PARAMS,
    STANDIN_ALPHA_PARAMS_NARROW,
    STANDIN_ALPHA_SEED,
    STANDIN_ALPHA_SESSIONS,
    STANDIN_MU_PARAMS,
    STANDIN_MU_SEED,
    STANDIN_MU_SESSIONS,
    STANDIN_MU_USERS,
)
from memesim.scrolling import sample_run_lengths, simulate_user_counts  # noqa: E402


def write_mu(path):
    rng = np.random.default_rng(np.random.SeedSequence(STANDIN_MU_SEED))
    n_t, n_r = simulate_user_counts(STANDIN_MU_PARAMS, STANDIN_MU_SESSIONS,
                                    STANDIN_MU_USERS, rng)
    with open(path, "w", encoding="utf-8") as f:
        f.write("user_id,n_t,n_r\n")
        for i in range(len(n_t)):
            f.write(f"u{i},{n_t[i]},{n_r[i]}\n")
    mu = n_t / (n_t + n_r)
    print(f"{path}: {len(n_t)} users, mean mu {mu.mean():.4f}")


def write_alpha(path, params, seed):
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    lengths = sample_run_lengths(params, STANDIN_ALPHA_SESSIONS, rng)
    with open(path, "w", encoding="utf-8") as f:
        f.write("session_id,stops\n")
        for i, v in enumerate(lengths):
            f.write(f"s{i},{v}\n")
    print(f"{path}: {len(lengths)} sessions, mean alpha {lengths.mean():.3f}, "
          f"max {lengths.max()}")


def main():
    out_dir = os.path.join(os.path.dirname(__file__), "..", "data", "standins")
    os.makedirs(out_dir, exist_ok=True)
    write_mu(os.path.join(out_dir, "mu_users.csv"))
    write_alpha(os.path.join(out_dir, "alpha_sessions_sigma009.csv"),
                STANDIN_ALPHA_PARAMS, STANDIN_ALPHA_SEED)
    write_alpha(os.path.join(out_dir, "alpha_sessions_sigma002.csv"),
                STANDIN_ALPHA_PARAMS_NARROW, STANDIN_ALPHA_SEED + 1)


if __name__ == "__main__":
    main()
