import csv
import json
import os
import subprocess
import sys

import numpy as np
import pytest

from memesim import FixedAlpha, FixedMu, ModelConfig, NetSpec, generate
from memesim.cli import main as cli_main
from memesim.config import (
    build_model_config,
    derive_seed,
    graph_seed,
    load_config,
    replica_seed,
)
from memesim.errors import ConfigError
from memesim.ioutil import sha256_file
from memesim.metrics import kendall_tau_b
from memesim.sweep import Cell, aggregate, make_cells, run_cells


def test_config_precedence(tmp_path):
    cfg_file = tmp_path / "c.toml"
    cfg_file.write_text("[run]\nalpha = 7\nreplicas = 2\n", encoding="utf-8")
    cfg = load_config(cfg_file, overrides=["run.alpha=9"],
                      preset={"run": {"alpha": 5, "tracked_memes": 123}})
    assert cfg["run"]["alpha"] == 9           # --set beats file
    assert cfg["run"]["replicas"] == 2        # file beats preset
    assert cfg["run"]["tracked_memes"] == 123  # preset beats defaults
    assert cfg["net"]["n"] == 1000            # default survives


def test_override_parsing_types():
    cfg = load_config(overrides=["sweep.mu=[0.1,0.5]", "run.alpha=16",
                                 'net.generator="holme_kim"',
                                 "steady_state.tolerance=0.05"])
    assert cfg["sweep"]["mu"] == [0.1, 0.5]
    assert cfg["run"]["alpha"] == 16
    assert cfg["net"]["generator"] == "holme_kim"
    assert cfg["steady_state"]["tolerance"] == 0.05
    with pytest.raises(ConfigError):
        load_config(overrides=["no_equals_sign"])


def test_seed_derivation_is_stable_and_distinct():
    assert derive_seed(42, 1, 0, 0) == derive_seed(42, 1, 0, 0)
    seeds = {replica_seed(42, c, r) for c in range(5) for r in range(5)}
    assert len(seeds) == 25
    assert graph_seed(42) != graph_seed(43)


def test_build_model_config_from_dict():
    cfg = load_config(overrides=["run.mu=0.25", "run.alpha=4",
                                 "run.tracked_memes=50", "run.replicas=2"])
    mc = build_model_config(cfg, master_seed=7)
    assert isinstance(mc.mu_mode, FixedMu) and mc.mu_mode.value == 0.25
    assert isinstance(mc.alpha_mode, FixedAlpha) and mc.alpha_mode.value == 4
    assert mc.net.seed == graph_seed(7)
    cfg2 = load_config(overrides=["net.seed=99"])
    assert build_model_config(cfg2, master_seed=7).net.seed == 99


def _small_cells():
    spec = NetSpec(n=120, m=4, seed=2)
    base = ModelConfig(net=spec, mu_mode=FixedMu(0.3), alpha_mode=FixedAlpha(4),
                       tracked_memes=200, replicas=2, seed=0)
    cells = make_cells(base, [
        ({"mu": 0.3, "alpha": 4}, {}),
        ({"mu": 0.6, "alpha": 4}, {"mu_mode": FixedMu(0.6)}),
    ])
    return spec, base, cells


def test_parallel_equals_serial():
    spec, base, cells = _small_cells()
    graph = generate(spec)
    serial = run_cells(cells, graph, master_seed=5, jobs=1)
    parallel = run_cells(cells, graph, master_seed=5, jobs=4)
    assert len(serial) == len(parallel) == 4
    for a, b in zip(serial, parallel):
        assert a.seed == b.seed
        assert (a.result.popularities == b.result.popularities).all()


def test_aggregate_matches_recomputation():
    spec, base, cells = _small_cells()
    graph = generate(spec)
    outcomes = run_cells(cells, graph, master_seed=5, jobs=2)
    stats = aggregate(cells, outcomes)
    for cell, st in zip(cells, stats):
        outs = [o for o in outcomes if o.cell_index == cell.index]
        taus = [kendall_tau_b(o.result.qualities, o.result.popularities)
                for o in outs]
        assert st.taus == taus
        assert st.tau_mean == pytest.approx(np.mean(taus))
        assert st.n_tracked == sum(len(o.result.qualities) for o in outs)


# --------------------------------------------------------------------------
# CLI
# --------------------------------------------------------------------------

def _cli(tmp_path, *argv):
    return cli_main(list(argv))


def test_cli_net_generate_and_inspect(tmp_path, capsys):
    out = tmp_path / "g.edges"
    assert _cli(tmp_path, "net", "generate", "--n", "80", "--m", "3",
                "--seed", "4", "--out", str(out)) == 0
    assert _cli(tmp_path, "net", "inspect", "--in", str(out)) == 0
    text = capsys.readouterr().out
    assert "nodes: 80" in text
    assert "connected: True" in text


def test_cli_single_run_writes_outputs(tmp_path):
    out = tmp_path / "run"
    code = _cli(tmp_path, "run", "--out", str(out), "--seed", "3",
                "--set", "net.n=100", "--set", "net.m=3",
                "--set", "run.tracked_memes=100", "--set", "run.replicas=2")
    assert code == 0
    for name in ("memes.csv", "diversity.csv", "tau_matrix.csv",
                 "manifest.json", "summary.txt"):
        assert (out / name).exists()
    manifest = json.loads((out / "manifest.json").read_text())
    for name, digest in manifest["files"].items():
        assert sha256_file(out / name) == digest
    with open(out / "memes.csv") as f:
        rows = list(csv.DictReader(f))
    assert len(rows) == 200  # 2 replicas x 100 tracked
    assert {r["replica"] for r in rows} == {"0", "1"}


def test_cli_config_error_exit_code(tmp_path, capsys):
    assert _cli(tmp_path, "run", "--out", str(tmp_path / "x"),
                "--set", "run.alpha=0") == 1
    assert _cli(tmp_path, "experiment", "fig1b", "--out", str(tmp_path / "y"),
                "--set", "net.m=2000") == 1


def test_cli_fit_unavailable_exit_code(tmp_path):
    memes = tmp_path / "memes.csv"
    with open(memes, "w") as f:
        f.write("meme_id,quality,popularity\n")
        for i in range(100):
            f.write(f"{i},{0.5 + i * 0.001},3\n")
    # constant popularity: tau is undefined -> runtime error (2)
    assert _cli(tmp_path, "metrics", "--memes-csv", str(memes),
                "--out", str(tmp_path / "m")) == 2
    with open(memes, "w") as f:
        f.write("meme_id,quality,popularity\n")
        for i in range(30):
            f.write(f"{i},{0.5 + i * 0.001},{1 + i % 3}\n")
    # too few samples for a power-law tail: flagged inside the report,
    # the other requested metrics still succeed
    assert _cli(tmp_path, "metrics", "--memes-csv", str(memes),
                "--out", str(tmp_path / "m2")) == 0
    payload = json.loads((tmp_path / "m2" / "metrics.json").read_text())
    assert "error" in payload["powerlaw"]
    # an experiment whose deliverable IS the fit propagates exit code 3
    assert _cli(tmp_path, "experiment", "fig1b", "--out", str(tmp_path / "f"),
                "--seed", "1", "--set", "net.n=60", "--set", "net.m=3",
                "--set", "run.tracked_memes=20",
                "--set", "run.replicas=1") == 3


def test_cli_scrollfit_smoke(tmp_path):
    rng = np.random.default_rng(2)
    lengths = rng.geometric(0.2, size=20000)
    path = tmp_path / "alpha.csv"
    with open(path, "w") as f:
        f.write("session_id,stops\n")
        for i, v in enumerate(lengths):
            f.write(f"s{i},{v}\n")
    assert _cli(tmp_path, "scrollfit", "--target", "alpha", "--csv", str(path),
                "--out", str(tmp_path / "fit")) == 0
    payload = json.loads((tmp_path / "fit" / "scrollfit.json").read_text())
    assert abs(payload["params"]["q_mean"] - 0.2) < 0.03


def test_cli_metrics_on_run_output(tmp_path):
    out = tmp_path / "run"
    _cli(tmp_path, "run", "--out", str(out), "--seed", "5",
         "--set", "net.n=150", "--set", "net.m=4",
         "--set", "run.tracked_memes=400", "--set", "run.replicas=1")
    code = _cli(tmp_path, "metrics", "--memes-csv", str(out / "memes.csv"),
                "--out", str(tmp_path / "metrics"))
    assert code == 0
    payload = json.loads((tmp_path / "metrics" / "metrics.json").read_text())
    assert -1.0 <= payload["tau"] <= 1.0
    assert payload["quality_groups"]["high_count"] > 0


def test_experiment_rejects_unknown_name(tmp_path):
    from memesim.experiments import run_experiment
    with pytest.raises(ConfigError):
        run_experiment("fig9z", tmp_path)


def test_experiment_reproducibility_across_jobs(tmp_path):
    env = dict(os.environ, PYTHONPATH=os.pathsep.join(sys.path))
    common = ["--seed", "11", "--set", "net.n=150", "--set", "net.m=4",
              "--set", "sweep.mu=[0.3,0.7]", "--set", "sweep.alpha=[2,4]",
              "--set", "run.tracked_memes=120", "--set", "run.replicas=2"]
    d1, d2 = str(tmp_path / "a"), str(tmp_path / "b")
    assert cli_main(["experiment", "fig3a", "--out", d1, "--jobs", "1"] + common) == 0
    assert cli_main(["experiment", "fig3a", "--out", d2, "--jobs", "4"] + common) == 0
    for name in ("tau_matrix.csv", "tau_replicas.csv", "summary.txt"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
