from collections import Counter
from dataclasses import replace

import numpy as np
import pytest

from memesim import (
    ConfigError,
    EmpiricalAlpha,
    EmpiricalDist,
    FixedAlpha,
    FixedMu,
    ModelConfig,
    NetSpec,
    ScrollingAlpha,
    SteadyStatePolicy,
    SteadyStateError,
    WorldState,
    diversity_entropy,
    generate,
    run,
)
from memesim.diffusion import alpha_key, mu_key, net_key
from memesim.netgen import Graph
from memesim.scrolling import ScrollParams


def edgeless_graph(n):
    return Graph(node_count=n,
                 adjacency=tuple(np.array([], dtype=np.int64) for _ in range(n)),
                 edge_count=0)


def complete_graph(n):
    adj = tuple(np.array([j for j in range(n) if j != i], dtype=np.int64)
                for i in range(n))
    return Graph(node_count=n, adjacency=adj, edge_count=n * (n - 1) // 2)


def tiny_config(**overrides):
    base = dict(net=NetSpec(n=2, m=1, seed=0), mu_mode=FixedMu(0.5),
                alpha_mode=FixedAlpha(3), tracked_memes=10, replicas=1, seed=1,
                steady_state=SteadyStatePolicy(sample_interval=10, min_burn_in=5,
                                               window=2, max_samples=5000))
    base.update(overrides)
    return ModelConfig(**base)


# --------------------------------------------------------------------------
# step semantics
# --------------------------------------------------------------------------

def test_mu_one_every_step_injects():
    g = complete_graph(4)
    state = WorldState(g, tiny_config(net=NetSpec(n=4, m=1, seed=0),
                                      mu_mode=FixedMu(1.0)), seed=3)
    for _ in range(500):
        out = state.step()
        assert out.injected
    assert state.meme_count == 500
    # with mu=1 no resharing ever happens, so every popularity stays 1
    assert all(state.meme(m).popularity == 1 for m in range(500))


def test_empty_feed_falls_back_to_injection():
    g = complete_graph(2)
    state = WorldState(g, tiny_config(mu_mode=FixedMu(0.0),
                                      tracked_memes=0, diversity_samples=1), seed=5)
    out = state.step()
    assert out.injected  # reshare branch chosen but the feed was empty


def test_selection_probability_proportional_to_quality():
    g = edgeless_graph(2)
    cfg = tiny_config(mu_mode=FixedMu(0.0), tracked_memes=0, diversity_samples=1)
    state = WorldState(g, cfg, seed=11)
    a = state.create_meme(0.9)
    b = state.create_meme(0.1)
    state.seed_feed(0, [a, b])
    n_steps = 200_000
    for _ in range(n_steps):
        state.step()
    pop_a = state.meme(a).popularity
    pop_b = state.meme(b).popularity
    draws = pop_a + pop_b
    p_hat = pop_a / draws
    se = (0.9 * 0.1 / draws) ** 0.5
    assert abs(p_hat - 0.9) <= 3 * se


def test_selection_counts_duplicate_copies():
    # feed [a, a, b] with equal qualities: meme a is picked 2/3 of the time
    g = edgeless_graph(2)
    cfg = tiny_config(mu_mode=FixedMu(0.0), tracked_memes=0, diversity_samples=1)
    state = WorldState(g, cfg, seed=12)
    a = state.create_meme(0.5)
    b = state.create_meme(0.5)
    state.seed_feed(0, [a, a, b])
    for _ in range(150_000):
        state.step()
    pop_a = state.meme(a).popularity
    pop_b = state.meme(b).popularity
    draws = pop_a + pop_b
    p_hat = pop_a / draws
    se = ((2 / 3) * (1 / 3) / draws) ** 0.5
    assert abs(p_hat - 2 / 3) <= 3 * se


def test_feed_capacity_and_newest_first_order():
    g = complete_graph(3)
    cfg = tiny_config(net=NetSpec(n=3, m=1, seed=0), alpha_mode=FixedAlpha(2),
                      mu_mode=FixedMu(0.7))
    state = WorldState(g, cfg, seed=9)
    for _ in range(400):
        state.step()
        for node in range(3):
            feed = state.feed_view(node)
            assert len(feed) <= 2
            steps = [m.created_step for m in feed]
            assert steps == sorted(steps, reverse=True)
            assert len(set(steps)) == len(steps)  # strictly descending


def test_eviction_removes_oldest_only():
    g = Graph(node_count=2,
              adjacency=(np.array([1], dtype=np.int64), np.array([0], dtype=np.int64)),
              edge_count=1)
    cfg = tiny_config(alpha_mode=FixedAlpha(2), mu_mode=FixedMu(1.0))
    state = WorldState(g, cfg, seed=2)
    out1 = state.step()
    out2 = state.step()
    out3 = state.step()
    # whichever agent acted, its neighbor's feed holds the two newest messages
    for node in range(2):
        ids = [m.meme_id for m in state.feed_view(node)]
        assert out1.meme_id not in ids or len(ids) <= 2


def test_popularity_conservation_against_event_log():
    spec = NetSpec(n=50, m=3, seed=1)
    g = generate(spec)
    cfg = ModelConfig(net=spec, mu_mode=FixedMu(0.2), alpha_mode=FixedAlpha(4),
                      tracked_memes=0, diversity_samples=1, replicas=1, seed=4,
                      debug_event_log=True,
                      steady_state=SteadyStatePolicy(sample_interval=50,
                                                     min_burn_in=4, window=2))
    state = WorldState(g, cfg, seed=4)
    for _ in range(20000):
        state.step()
    log_counts = Counter(state.event_log)
    for mid in range(state.meme_count):
        assert state.meme(mid).popularity == log_counts[mid]


def test_popularity_conservation_in_scrolling_mode():
    spec = NetSpec(n=40, m=3, seed=2)
    g = generate(spec)
    cfg = ModelConfig(net=spec, mu_mode=FixedMu(0.5),
                      alpha_mode=ScrollingAlpha(ScrollParams(0.5, 0.2, 0.1)),
                      tracked_memes=0, diversity_samples=1, replicas=1, seed=6,
                      debug_event_log=True)
    state = WorldState(g, cfg, seed=6)
    shares = 0
    for _ in range(5000):
        shares += state.step().n_shares
    log_counts = Counter(state.event_log)
    assert shares == len(state.event_log)
    for mid in range(state.meme_count):
        assert state.meme(mid).popularity == log_counts[mid]


def test_live_count_tracks_feed_copies():
    spec = NetSpec(n=30, m=2, seed=3)
    g = generate(spec)
    cfg = tiny_config(net=spec, mu_mode=FixedMu(0.3), alpha_mode=FixedAlpha(3))
    state = WorldState(g, cfg, seed=8)
    for _ in range(5000):
        state.step()
    copies = Counter()
    for node in range(30):
        for msg in state.feed_view(node):
            copies[msg.meme_id] += 1
    assert dict(copies) == {m: state._live[m] for m in copies}
    assert state.distinct_live == len(copies)


# --------------------------------------------------------------------------
# full runs
# --------------------------------------------------------------------------

def test_minimal_two_agent_run_terminates():
    g = complete_graph(2)
    cfg = tiny_config(alpha_mode=FixedAlpha(1), mu_mode=FixedMu(0.5),
                      tracked_memes=100)
    res = run(cfg, g)
    assert len(res.popularities) == 100
    assert res.popularities.min() >= 1
    assert (res.death_steps >= res.birth_steps).all()


def test_run_is_deterministic():
    spec = NetSpec(n=100, m=4, seed=5)
    g = generate(spec)
    cfg = ModelConfig(net=spec, mu_mode=FixedMu(0.2), alpha_mode=FixedAlpha(5),
                      tracked_memes=300, replicas=1, seed=77)
    r1 = run(cfg, g)
    r2 = run(cfg, g)
    assert (r1.popularities == r2.popularities).all()
    assert (r1.qualities == r2.qualities).all()
    assert (r1.div_entropy == r2.div_entropy).all()
    r3 = run(cfg, g, seed=78)
    assert (r1.popularities != r3.popularities).any()


def test_record_count_matches_quota():
    spec = NetSpec(n=100, m=4, seed=5)
    g = generate(spec)
    cfg = ModelConfig(net=spec, mu_mode=FixedMu(0.3), alpha_mode=FixedAlpha(5),
                      tracked_memes=500, replicas=1, seed=1)
    res = run(cfg, g)
    assert len(res.popularities) == 500
    assert (res.death_steps >= 0).all()
    assert res.meme_ids.min() > 0  # born strictly after the burn-in cohort


def test_full_scale_defaults_match_reported_protocol():
    from memesim.config import DEFAULTS, FULL_SCALE, load_config
    cfg = load_config(full_scale=True)
    assert cfg["run"]["tracked_memes"] == 100000
    assert cfg["run"]["replicas"] == 20
    assert DEFAULTS["net"]["n"] == 1000
    assert DEFAULTS["net"]["m"] == 10


def test_mu_zero_coalesces_to_single_meme():
    spec = NetSpec(n=60, m=3, seed=7)
    g = generate(spec)
    cfg = ModelConfig(net=spec, mu_mode=FixedMu(0.0), alpha_mode=FixedAlpha(4),
                      tracked_memes=0, diversity_samples=10, replicas=1, seed=2)
    res = run(cfg, g)
    assert (res.div_distinct == 1).all()
    assert (res.div_entropy == 0.0).all()
    assert res.mean_entropy() == 0.0


def test_snapshot_node_states():
    spec = NetSpec(n=128, m=5, seed=9)
    g = generate(spec)
    cfg = ModelConfig(net=spec, mu_mode=FixedMu(0.1), alpha_mode=FixedAlpha(10),
                      tracked_memes=0, diversity_samples=5, replicas=1, seed=3)
    state = WorldState(g, cfg, seed=3)
    assert state.snapshot_node_states() == []  # nothing shared yet
    for _ in range(30 * 128):
        state.step()
    rows = state.snapshot_node_states()
    assert len(rows) == 128
    assert all(len(r) == 3 for r in rows)


def test_snapshot_mu_zero_all_same_meme():
    spec = NetSpec(n=50, m=3, seed=4)
    g = generate(spec)
    cfg = ModelConfig(net=spec, mu_mode=FixedMu(0.0), alpha_mode=FixedAlpha(4),
                      tracked_memes=0, diversity_samples=1, replicas=1, seed=5)
    state = WorldState(g, cfg, seed=5)
    # run well past coalescence plus a coupon-collector sweep of activations
    for _ in range(120_000):
        state.step()
    rows = state.snapshot_node_states()
    assert len(rows) == 50
    assert len({meme_id for _, meme_id, _ in rows}) == 1


def test_entropy_snapshot_matches_metric():
    spec = NetSpec(n=40, m=3, seed=6)
    g = generate(spec)
    state = WorldState(g, tiny_config(net=spec, mu_mode=FixedMu(0.4)), seed=7)
    for _ in range(3000):
        state.step()
    h, distinct, total = state.entropy_snapshot()
    counts = Counter()
    for node in range(40):
        for msg in state.feed_view(node):
            counts[msg.meme_id] += 1
    assert distinct == len(counts)
    assert total == sum(counts.values())
    assert abs(h - diversity_entropy(counts)) < 1e-12


def test_steady_state_cap_raises_named_error():
    spec = NetSpec(n=30, m=2, seed=8)
    g = generate(spec)
    cfg = ModelConfig(net=spec, mu_mode=FixedMu(0.5), alpha_mode=FixedAlpha(3),
                      tracked_memes=10, replicas=1, seed=1,
                      steady_state=SteadyStatePolicy(min_burn_in=100, window=40,
                                                     max_samples=50,
                                                     tolerance=1e-9,
                                                     noise_factor=0.0))
    with pytest.raises(SteadyStateError, match="max_samples"):
        run(cfg, g)


def test_measurement_cap_raises():
    spec = NetSpec(n=30, m=2, seed=8)
    g = generate(spec)
    cfg = ModelConfig(net=spec, mu_mode=FixedMu(0.01), alpha_mode=FixedAlpha(3),
                      tracked_memes=100000, replicas=1, seed=1, max_run_steps=500)
    with pytest.raises(SteadyStateError, match="max_run_steps"):
        run(cfg, g)


# --------------------------------------------------------------------------
# config validation and parameter modes
# --------------------------------------------------------------------------

def test_config_validation_errors():
    spec = NetSpec(n=10, m=2, seed=0)
    with pytest.raises(ConfigError):
        ModelConfig(net=spec, mu_mode=FixedMu(1.5)).validate()
    with pytest.raises(ConfigError):
        ModelConfig(net=spec, alpha_mode=FixedAlpha(0)).validate()
    with pytest.raises(ConfigError):
        ModelConfig(net=spec, tracked_memes=0).validate()
    with pytest.raises(ConfigError):
        ModelConfig(net=spec, mu_mode=FixedMu(0.0), tracked_memes=5).validate()
    with pytest.raises(ConfigError):
        ModelConfig(net=spec, replicas=0).validate()


def test_heterogeneous_alpha_sets_per_agent_capacity():
    dist = EmpiricalDist("alpha_per_session", np.array([2.0, 6.0]),
                         np.array([0.5, 0.5]), 2)
    spec = NetSpec(n=40, m=2, seed=1)
    g = generate(spec)
    cfg = tiny_config(net=spec, alpha_mode=EmpiricalAlpha(dist))
    state = WorldState(g, cfg, seed=3)
    caps = {state.feed_capacity(i) for i in range(40)}
    assert caps == {2, 6}
    for _ in range(4000):
        state.step()
    for node in range(40):
        assert len(state.feed_view(node)) <= state.feed_capacity(node)


def test_per_activation_alpha_uses_retention_cap():
    dist = EmpiricalDist("alpha_per_session", np.array([1.0, 8.0]),
                         np.array([0.5, 0.5]), 2)
    spec = NetSpec(n=20, m=2, seed=2)
    g = generate(spec)
    cfg = tiny_config(net=spec, alpha_mode=EmpiricalAlpha(dist, per_activation=True))
    state = WorldState(g, cfg, seed=4)
    assert state.feed_capacity(0) == 8  # retention defaults to the max draw
    for _ in range(2000):
        state.step()


def test_mode_keys_distinguish_configs():
    spec = NetSpec(n=10, m=2, seed=0)
    assert mu_key(FixedMu(0.1)) != mu_key(FixedMu(0.2))
    assert alpha_key(FixedAlpha(3)) != alpha_key(FixedAlpha(4))
    assert net_key(spec) != net_key(replace(spec, seed=1))
    sc1 = ScrollingAlpha(ScrollParams(0.5, 0.1, 0.0))
    sc2 = ScrollingAlpha(ScrollParams(0.5, 0.1, 0.05))
    assert alpha_key(sc1) != alpha_key(sc2)


def test_scrolling_mode_uses_rho_as_posting_rate():
    spec = NetSpec(n=30, m=2, seed=3)
    g = generate(spec)
    cfg = tiny_config(net=spec,
                      mu_mode=FixedMu(0.9),  # ignored in scrolling mode
                      alpha_mode=ScrollingAlpha(ScrollParams(1.0, 0.1, 0.0)))
    state = WorldState(g, cfg, seed=5)
    for _ in range(200):
        assert state.step().injected  # rho = 1 always posts
