"""Configuration loading for the experiment harness.

Settings come from three layers with increasing precedence: built-in
defaults, a TOML config file, and ``--set dotted.key=value`` command-line
overrides. The resolved dictionary is then turned into a
:class:`~memesim.diffusion.ModelConfig`.
"""

from __future__ import annotations

import copy
import sys

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from . import calib
from .diffusion import (
    EmpiricalAlpha,
    EmpiricalMu,
    FixedAlpha,
    FixedMu,
    ModelConfig,
    ScrollingAlpha,
    SteadyStatePolicy,
)
from .errors import ConfigError
from .netgen import Generator, NetSpec
from .scrolling import ScrollParams

_SEED_GRAPH = 0
_SEED_RUN = 1

DEFAULTS = {
    "net": {
        "generator": "ba",
        "n": 1000,
        "m": 10,
        "triad_prob": 0.0,
        # seed: derived from the master seed unless set explicitly
    },
    "run": {
        "mu": 0.1,
        "alpha": 10,
        "tracked_memes": 10000,
        "replicas": 5,
        "diversity_samples": 0,
        "max_run_steps": 0,
        "alpha_per_activation": False,
    },
    "steady_state": {
        "window": 20,
        "tolerance": 0.02,
        "min_burn_in": 50,
        "max_samples": 4000,
        "noise_factor": 1.5,
    },
}

FULL_SCALE = {"run": {"tracked_memes": 100000, "replicas": 20}}


def derive_seed(master_seed: int, *key) -> int:
    """Scheduling-independent seed for a namespaced sub-stream."""
    ss = np.random.SeedSequence(entropy=int(master_seed), spawn_key=tuple(int(k) for k in key))
    return int(ss.generate_state(1, np.uint64)[0])


def graph_seed(master_seed: int) -> int:
    return derive_seed(master_seed, _SEED_GRAPH)


def replica_seed(master_seed: int, cell_index: int, replica: int) -> int:
    return derive_seed(master_seed, _SEED_RUN, cell_index, replica)


def _deep_update(base: dict, extra: dict) -> dict:
    for k, v in extra.items():
        if isinstance(v, dict) and isinstance(base.get(k), dict):
            _deep_update(base[k], v)
        else:
            base[k] = v
    return base


def load_config(path=None, overrides=(), full_scale=False, preset=None) -> dict:
    """Resolve the configuration dictionary for one invocation.

    Precedence, lowest to highest: built-in defaults, experiment preset,
    full-scale preset, config file, ``--set`` overrides. ``overrides`` are
    ``dotted.key=value`` strings whose values are parsed as TOML literals
    (so ``run.mu=0.25``, ``sweep.alpha=[2,8]``, and
    ``net.generator="holme_kim"`` all work).
    """
    cfg = copy.deepcopy(DEFAULTS)
    if preset:
        _deep_update(cfg, copy.deepcopy(preset))
    if full_scale:
        _deep_update(cfg, copy.deepcopy(FULL_SCALE))
    if path is not None:
        with open(path, "rb") as f:
            _deep_update(cfg, tomllib.load(f))
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override must look like key.path=value, got {item!r}")
        key, raw = item.split("=", 1)
        try:
            value = tomllib.loads(f"v = {raw}")["v"]
        except tomllib.TOMLDecodeError:
            value = raw
        node = cfg
        parts = key.strip().split(".")
        for part in parts[:-1]:
            node = node.setdefault(part, {})
            if not isinstance(node, dict):
                raise ConfigError(f"cannot override below scalar key {part!r}")
        node[parts[-1]] = value
    return cfg


def build_net_spec(cfg: dict, master_seed: int) -> NetSpec:
    net = cfg["net"]
    gen_name = str(net.get("generator", "ba")).lower()
    try:
        gen = Generator(gen_name)
    except ValueError:
        raise ConfigError(
            f"unknown generator {gen_name!r} (choose 'ba' or 'holme_kim')"
        ) from None
    return NetSpec(
        generator=gen,
        n=int(net["n"]),
        m=int(net["m"]),
        triad_prob=float(net.get("triad_prob", 0.0)),
        seed=int(net.get("seed", graph_seed(master_seed))),
    )


def build_mu_mode(run_cfg: dict):
    if "mu_csv" in run_cfg:
        return EmpiricalMu(calib.ingest_mu(run_cfg["mu_csv"]))
    return FixedMu(float(run_cfg["mu"]))


def build_alpha_mode(run_cfg: dict):
    if "scrolling" in run_cfg:
        sc = run_cfg["scrolling"]
        params = ScrollParams(rho=float(sc["rho"]), q_mean=float(sc["q_mean"]),
                              sigma=float(sc["sigma"]))
        return ScrollingAlpha(params=params,
                              retention_cap=int(sc.get("retention_cap", 128)),
                              session_cap=int(sc.get("session_cap", 10000)))
    if "alpha_csv" in run_cfg:
        dist = calib.ingest_alpha(run_cfg["alpha_csv"])
        return EmpiricalAlpha(dist=dist,
                              per_activation=bool(run_cfg.get("alpha_per_activation", False)),
                              retention_cap=int(run_cfg.get("alpha_retention_cap", 0)))
    return FixedAlpha(int(run_cfg["alpha"]))


def build_model_config(cfg: dict, master_seed: int) -> ModelConfig:
    run_cfg = cfg["run"]
    ss = cfg["steady_state"]
    policy = SteadyStatePolicy(
        sample_interval=ss.get("sample_interval"),
        window=int(ss["window"]),
        tolerance=float(ss["tolerance"]),
        min_burn_in=int(ss["min_burn_in"]),
        max_samples=int(ss["max_samples"]),
        noise_factor=float(ss.get("noise_factor", 1.5)),
    )
    config = ModelConfig(
        net=build_net_spec(cfg, master_seed),
        mu_mode=build_mu_mode(run_cfg),
        alpha_mode=build_alpha_mode(run_cfg),
        steady_state=policy,
        tracked_memes=int(run_cfg["tracked_memes"]),
        replicas=int(run_cfg["replicas"]),
        seed=int(master_seed),
        diversity_samples=int(run_cfg.get("diversity_samples", 0)),
        max_run_steps=int(run_cfg.get("max_run_steps", 0)),
        snapshot_nodes=bool(run_cfg.get("snapshot_nodes", False)),
    )
    config.validate()
    return config
