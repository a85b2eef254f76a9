"""Named experiment presets and the calibration comparison.

Each experiment reproduces the data behind one figure of the study as CSV
files plus a JSON manifest. Desk-scale defaults finish on a laptop; pass
``full_scale=True`` (CLI ``--full-scale``) for publication-scale runs.
"""

from __future__ import annotations

import os
import time
from dataclasses import dataclass, replace

import numpy as np

from . import calib, ioutil, metrics, netgen, scrolling
from .config import build_model_config, load_config
from .diffusion import (
    EmpiricalAlpha,
    EmpiricalMu,
    FixedAlpha,
    FixedMu,
    ModelConfig,
    ScrollingAlpha,
)
from .errors import ConfigError
from .scrolling import ScrollParams
from .sweep import Cell, CellStats, aggregate, make_cells, run_cells

# parameters of the fitted session model used for the shipped stand-in data
STANDIN_MU_PARAMS = ScrollParams(rho=0.978, q_mean=0.1, sigma=0.09)
STANDIN_ALPHA_PARAMS = ScrollParams(rho=0.05, q_mean=0.1, sigma=0.09)
STANDIN_ALPHA_PARAMS_NARROW = ScrollParams(rho=0.05, q_mean=0.1, sigma=0.02)
STANDIN_MU_SEED = 71001
STANDIN_ALPHA_SEED = 71002
STANDIN_MU_USERS = 20000
STANDIN_MU_SESSIONS = 200
STANDIN_ALPHA_SESSIONS = 60000

REFERENCE_CORNER = (0.05, 64)  # low-load, high-attention benchmark cell


def standin_mu_dist(path=None) -> calib.EmpiricalDist:
    """The mu stand-in: ingest the CSV when present, else synthesize it."""
    if path:
        return calib.ingest_mu(path)
    default = os.path.join("data", "standins", "mu_users.csv")
    if os.path.exists(default):
        return calib.ingest_mu(default)
    rng = np.random.default_rng(np.random.SeedSequence(STANDIN_MU_SEED))
    values = scrolling.simulate_user_mu(STANDIN_MU_PARAMS, STANDIN_MU_SESSIONS,
                                        STANDIN_MU_USERS, rng)
    return calib.EmpiricalDist(kind="mu_per_user", values=values,
                               weights=np.ones(len(values)),
                               sample_count=len(values))


def standin_alpha_dist(path=None, narrow=False) -> calib.EmpiricalDist:
    """The attention stand-in: ingest the CSV when present, else synthesize."""
    if path:
        return calib.ingest_alpha(path)
    name = "alpha_sessions_sigma002.csv" if narrow else "alpha_sessions_sigma009.csv"
    default = os.path.join("data", "standins", name)
    if os.path.exists(default):
        return calib.ingest_alpha(default)
    params = STANDIN_ALPHA_PARAMS_NARROW if narrow else STANDIN_ALPHA_PARAMS
    rng = np.random.default_rng(np.random.SeedSequence(STANDIN_ALPHA_SEED + int(narrow)))
    values = scrolling.sample_run_lengths(params, STANDIN_ALPHA_SESSIONS, rng)
    return calib.EmpiricalDist(kind="alpha_per_session",
                               values=values.astype(float),
                               weights=np.ones(len(values)),
                               sample_count=len(values))


# --------------------------------------------------------------------------
# Output writers shared by several experiments
# --------------------------------------------------------------------------

def _write_memes_csv(path, outcomes):
    rows = []
    for o in outcomes:
        r = o.result
        for i in range(len(r.meme_ids)):
            rows.append((int(r.meme_ids[i]), float(r.qualities[i]),
                         int(r.popularities[i]), int(r.birth_steps[i]),
                         int(r.death_steps[i]), o.replica))
    return ioutil.write_csv(path,
                            ["meme_id", "quality", "popularity",
                             "birth_step", "death_step", "replica"], rows)


def _write_diversity_csv(path, outcomes):
    rows = []
    for o in outcomes:
        r = o.result
        for i in range(len(r.div_steps)):
            rows.append((int(r.div_steps[i]), float(r.div_entropy[i]),
                         int(r.div_distinct[i]), o.replica))
    return ioutil.write_csv(path,
                            ["sample_step", "entropy", "distinct_memes",
                             "replica"], rows)


def _write_tau_matrix(path, stats, keys):
    header = keys + ["tau_mean", "tau_std", "tau_pooled", "n_memes", "replicas"]
    rows = []
    for st in stats:
        rows.append(tuple(st.label[k] for k in keys)
                    + (st.tau_mean, st.tau_std, st.tau_pooled,
                       st.n_tracked, st.replicas))
    return ioutil.write_csv(path, header, rows)


def _write_tau_replicas(path, cells, outcomes, keys):
    label_by_index = {c.index: c.label for c in cells}
    rows = []
    for o in outcomes:
        label = label_by_index[o.cell_index]
        r = o.result
        try:
            tau = metrics.kendall_tau_b(r.qualities, r.popularities)
        except Exception:
            tau = float("nan")
        rows.append(tuple(label[k] for k in keys)
                    + (o.replica, o.seed, tau, len(r.qualities)))
    header = keys + ["replica", "seed", "tau", "n_memes"]
    return ioutil.write_csv(path, header, rows)


def _pooled_records(outcomes, cell_index=None):
    qs, ps = [], []
    for o in outcomes:
        if cell_index is None or o.cell_index == cell_index:
            qs.append(o.result.qualities)
            ps.append(o.result.popularities)
    return np.concatenate(qs), np.concatenate(ps)


# --------------------------------------------------------------------------
# Figure experiments
# --------------------------------------------------------------------------

def _exp_fig1b(cfg, out_dir, master_seed, jobs):
    base = build_model_config(cfg, master_seed)
    base = replace(base, mu_mode=FixedMu(0.1), alpha_mode=FixedAlpha(10))
    graph = netgen.generate(base.net)
    cells = [Cell(index=0, label={"mu": 0.1, "alpha": 10}, config=base)]
    outcomes = run_cells(cells, graph, master_seed, jobs)
    stats = aggregate(cells, outcomes)[0]

    q, p = _pooled_records(outcomes)
    fit = metrics.fit_power_law(p)
    pdf_rows = metrics.log_binned_pdf(p)

    files = [
        _write_memes_csv(os.path.join(out_dir, "memes.csv"), outcomes),
        _write_diversity_csv(os.path.join(out_dir, "diversity.csv"), outcomes),
        ioutil.write_csv(os.path.join(out_dir, "popularity_pdf.csv"),
                         ["bin_center", "density"], pdf_rows),
        ioutil.write_json(os.path.join(out_dir, "powerlaw_fit.json"), {
            "beta": fit.exponent, "x_min": fit.x_min,
            "ks_distance": fit.ks_distance, "n_tail": fit.n_tail,
            "n_samples": len(p),
        }),
    ]
    summary = [
        f"fig1b: popularity distribution at mu=0.1, alpha=10",
        f"  memes pooled: {len(p)}  max popularity: {int(p.max())}",
        f"  power-law fit: beta={fit.exponent:.4f} x_min={fit.x_min} "
        f"ks={fit.ks_distance:.4f} n_tail={fit.n_tail}",
        f"  tau (replica mean): {stats.tau_mean:.4f} +- {stats.tau_std:.4f}",
    ]
    return files, summary


def _quality_curve_experiment(cfg, out_dir, master_seed, jobs, labels):
    base = build_model_config(cfg, master_seed)
    graph = netgen.generate(base.net)
    cells = make_cells(base, labels)
    outcomes = run_cells(cells, graph, master_seed, jobs)
    rows = []
    for cell in cells:
        q, p = _pooled_records(outcomes, cell.index)
        for b in metrics.mean_popularity_by_quality(q, p, bins=20):
            rows.append((cell.label["mu"], cell.label["alpha"], b.quality_mid,
                         b.mean_popularity, b.std_error, b.count))
    path = ioutil.write_csv(
        os.path.join(out_dir, "quality_popularity.csv"),
        ["mu", "alpha", "quality_mid", "mean_popularity", "std_error", "count"],
        rows)
    stats = aggregate(cells, outcomes)
    summary = ["mean popularity by quality bin"]
    for st in stats:
        summary.append(f"  mu={st.label['mu']} alpha={st.label['alpha']}: "
                       f"tau={st.tau_mean:.4f} n={st.n_tracked}")
    return [path], summary


def _exp_fig2a(cfg, out_dir, master_seed, jobs):
    labels = [({"mu": mu, "alpha": 10},
               {"mu_mode": FixedMu(mu), "alpha_mode": FixedAlpha(10)})
              for mu in (0.1, 0.25, 0.5, 0.75, 0.9)]
    return _quality_curve_experiment(cfg, out_dir, master_seed, jobs, labels)


def _exp_fig2b(cfg, out_dir, master_seed, jobs):
    labels = [({"mu": 0.1, "alpha": a},
               {"mu_mode": FixedMu(0.1), "alpha_mode": FixedAlpha(a)})
              for a in (2, 8, 64)]
    return _quality_curve_experiment(cfg, out_dir, master_seed, jobs, labels)


def _sweep_grid(cfg):
    sweep_cfg = cfg.get("sweep", {})
    mus = sweep_cfg.get("mu", [round(0.05 + 0.1 * i, 2) for i in range(10)])
    alphas = sweep_cfg.get("alpha", [1, 2, 4, 8, 16, 32, 64])
    return list(mus), list(alphas)


def _exp_fig3a(cfg, out_dir, master_seed, jobs):
    base = build_model_config(cfg, master_seed)
    graph = netgen.generate(base.net)
    mus, alphas = _sweep_grid(cfg)
    labels = [({"mu": mu, "alpha": a},
               {"mu_mode": FixedMu(mu), "alpha_mode": FixedAlpha(a)})
              for mu in mus for a in alphas]
    cells = make_cells(base, labels)
    outcomes = run_cells(cells, graph, master_seed, jobs)
    stats = aggregate(cells, outcomes)
    files = [
        _write_tau_matrix(os.path.join(out_dir, "tau_matrix.csv"), stats,
                          ["mu", "alpha"]),
        _write_tau_replicas(os.path.join(out_dir, "tau_replicas.csv"),
                            cells, outcomes, ["mu", "alpha"]),
    ]
    summary = [f"fig3a: discriminative power over {len(mus)}x{len(alphas)} grid"]
    for st in stats:
        summary.append(f"  mu={st.label['mu']} alpha={st.label['alpha']}: "
                       f"tau={st.tau_mean:.4f}")
    return files, summary


def _exp_fig3b(cfg, out_dir, master_seed, jobs):
    base = build_model_config(cfg, master_seed)
    base = replace(base, tracked_memes=0,
                   diversity_samples=max(base.diversity_samples, 50))
    graph = netgen.generate(base.net)
    mus, alphas = _sweep_grid(cfg)
    if 1.0 not in mus:
        mus = mus + [1.0]
    labels = [({"mu": mu, "alpha": a},
               {"mu_mode": FixedMu(mu), "alpha_mode": FixedAlpha(a)})
              for mu in mus for a in alphas]
    cells = make_cells(base, labels)
    outcomes = run_cells(cells, graph, master_seed, jobs)
    stats = aggregate(cells, outcomes)
    baseline = {st.label["alpha"]: st.entropy_mean
                for st in stats if st.label["mu"] == 1.0}
    rows = []
    for st in stats:
        h0 = baseline.get(st.label["alpha"], float("nan"))
        norm = st.entropy_mean / h0 if h0 and h0 > 0 else float("nan")
        rows.append((st.label["mu"], st.label["alpha"], st.entropy_mean,
                     norm, st.replicas))
    path = ioutil.write_csv(
        os.path.join(out_dir, "diversity_matrix.csv"),
        ["mu", "alpha", "entropy_mean", "normalized_diversity", "replicas"],
        rows)
    summary = ["fig3b: normalized diversity H / H(mu=1)"]
    for r in rows:
        summary.append(f"  mu={r[0]} alpha={r[1]}: H={r[2]:.4f} norm={r[3]:.4f}")
    return [path], summary


def _exp_fig4a(cfg, out_dir, master_seed, jobs):
    base = build_model_config(cfg, master_seed)
    base = replace(base, diversity_samples=max(base.diversity_samples, 50))
    graph = netgen.generate(base.net)
    sweep_cfg = cfg.get("sweep", {})
    alphas = sweep_cfg.get("alpha", [2, 8, 32, 64])
    mus = sweep_cfg.get("mu", [0.05, 0.1, 0.2, 0.35, 0.5, 0.65, 0.8, 0.9, 1.0])
    labels = []
    for a in alphas:
        for mu in mus:
            updates = {"mu_mode": FixedMu(mu), "alpha_mode": FixedAlpha(a)}
            if mu in (0.0, 1.0):
                # popularity is degenerate at the endpoints; diversity only
                updates["tracked_memes"] = 0
            labels.append(({"mu": mu, "alpha": a}, updates))
    cells = make_cells(base, labels)
    outcomes = run_cells(cells, graph, master_seed, jobs)
    stats = aggregate(cells, outcomes)
    baseline = {st.label["alpha"]: st.entropy_mean
                for st in stats if st.label["mu"] == 1.0}
    rows = []
    for st in stats:
        h0 = baseline.get(st.label["alpha"], float("nan"))
        norm = st.entropy_mean / h0 if h0 and h0 > 0 else float("nan")
        rows.append((st.label["alpha"], st.label["mu"], st.tau_mean,
                     st.tau_std, st.entropy_mean, norm))
    path = ioutil.write_csv(
        os.path.join(out_dir, "tradeoff.csv"),
        ["alpha", "mu", "tau_mean", "tau_std", "entropy_mean",
         "normalized_diversity"], rows)
    summary = ["fig4a: discriminative power vs diversity tradeoff curves"]
    return [path], summary


def _exp_fig4b(cfg, out_dir, master_seed, jobs):
    cal = cfg.get("calibration", {})
    dist = standin_mu_dist(cal.get("mu_csv"))
    rng = np.random.default_rng(np.random.SeedSequence(master_seed))
    model = scrolling.simulate_user_mu(STANDIN_MU_PARAMS, STANDIN_MU_SESSIONS,
                                       100000, rng)
    edges = np.linspace(0.0, 1.0, 51)
    model_hist, _ = np.histogram(model, bins=edges, density=True)
    emp_hist, _ = np.histogram(dist.values, bins=edges,
                               weights=dist.weights, density=True)
    rows = [(edges[i], edges[i + 1], model_hist[i], emp_hist[i])
            for i in range(len(model_hist))]
    path = ioutil.write_csv(
        os.path.join(out_dir, "mu_distribution.csv"),
        ["bin_lo", "bin_hi", "model_density", "empirical_density"], rows)
    p = STANDIN_MU_PARAMS
    summary = [
        "fig4b: posting-rate distribution, session model vs stand-in data",
        f"  session model rho={p.rho} q_mean={p.q_mean} sigma={p.sigma}",
        f"  model mean mu: {model.mean():.4f}  stand-in mean mu: {dist.mean():.4f}",
    ]
    return [path], summary


def _exp_fig4c(cfg, out_dir, master_seed, jobs):
    cal = cfg.get("calibration", {})
    dist = standin_alpha_dist(cal.get("alpha_csv"))
    max_alpha = int(min(dist.max_value() * 2, 5000))
    alphas = np.arange(1, max_alpha + 1)
    rows = []
    for params in (STANDIN_ALPHA_PARAMS_NARROW, STANDIN_ALPHA_PARAMS):
        pmf = scrolling.session_pmf(params, alphas)
        for a, v in zip(alphas, pmf):
            rows.append((int(a), params.sigma, float(v)))
    pmf_path = ioutil.write_csv(os.path.join(out_dir, "alpha_pmf.csv"),
                                ["alpha", "sigma", "pmf"], rows)
    vals, counts = np.unique(dist.values.astype(int), return_counts=True)
    hist_rows = [(int(v), int(c), c / counts.sum())
                 for v, c in zip(vals, counts)]
    hist_path = ioutil.write_csv(os.path.join(out_dir, "alpha_hist.csv"),
                                 ["alpha", "count", "frequency"], hist_rows)
    summary = [
        "fig4c: session-length distribution, model pmf vs stand-in data",
        f"  stand-in mean alpha: {dist.mean():.3f} over {dist.sample_count} sessions",
    ]
    return [pmf_path, hist_path], summary


@dataclass
class CalibrationReport:
    mu_bar: float
    alpha_bar: int
    naive: CellStats
    distributional: CellStats
    reference: CellStats

    @property
    def ratio_naive_to_reference(self) -> float:
        return self.naive.tau_mean / self.reference.tau_mean


def calibration_report(mu_dist, alpha_dist, base: ModelConfig, graph=None,
                       master_seed: int = 0, jobs: int = 1,
                       reference=REFERENCE_CORNER,
                       include_outcomes: bool = False):
    """Run the naive, distributional, and reference-corner conditions.

    Returns a :class:`CalibrationReport` (optionally with the raw replica
    outcomes attached for downstream record-level analysis).
    """
    mu_bar, alpha_bar = calib.naive_params(mu_dist, alpha_dist)
    if graph is None:
        graph = netgen.generate(base.net)
    labels = [
        ({"condition": "naive"},
         {"mu_mode": FixedMu(mu_bar), "alpha_mode": FixedAlpha(alpha_bar)}),
        ({"condition": "distributional"},
         {"mu_mode": EmpiricalMu(mu_dist), "alpha_mode": EmpiricalAlpha(alpha_dist)}),
        ({"condition": "reference"},
         {"mu_mode": FixedMu(reference[0]), "alpha_mode": FixedAlpha(reference[1])}),
    ]
    cells = make_cells(base, labels)
    outcomes = run_cells(cells, graph, master_seed, jobs)
    stats = aggregate(cells, outcomes)
    report = CalibrationReport(mu_bar=mu_bar, alpha_bar=alpha_bar,
                               naive=stats[0], distributional=stats[1],
                               reference=stats[2])
    if include_outcomes:
        return report, cells, outcomes
    return report


def _exp_fig4d(cfg, out_dir, master_seed, jobs):
    cal = cfg.get("calibration", {})
    mu_dist = standin_mu_dist(cal.get("mu_csv"))
    alpha_dist = standin_alpha_dist(cal.get("alpha_csv"))
    base = build_model_config(cfg, master_seed)
    report, cells, outcomes = calibration_report(
        mu_dist, alpha_dist, base, master_seed=master_seed, jobs=jobs,
        include_outcomes=True)
    files = [
        _write_tau_replicas(os.path.join(out_dir, "calibration_replicas.csv"),
                            cells, outcomes, ["condition"]),
        ioutil.write_json(os.path.join(out_dir, "calibration.json"), {
            "naive_mu": report.mu_bar,
            "naive_alpha": report.alpha_bar,
            "tau_naive": report.naive.tau_mean,
            "tau_naive_std": report.naive.tau_std,
            "tau_distributional": report.distributional.tau_mean,
            "tau_distributional_std": report.distributional.tau_std,
            "tau_reference": report.reference.tau_mean,
            "tau_reference_std": report.reference.tau_std,
            "ratio_naive_to_reference": report.ratio_naive_to_reference,
            "reference_cell": {"mu": REFERENCE_CORNER[0],
                               "alpha": REFERENCE_CORNER[1]},
        }),
    ]
    summary = [
        "fig4d: discriminative power under empirical calibration",
        f"  naive (mu={report.mu_bar:.3f}, alpha={report.alpha_bar}): "
        f"tau={report.naive.tau_mean:.4f}",
        f"  distributional: tau={report.distributional.tau_mean:.4f}",
        f"  reference corner {REFERENCE_CORNER}: tau={report.reference.tau_mean:.4f}",
        f"  naive/reference ratio: {report.ratio_naive_to_reference:.3f}",
    ]
    return files, summary


def _exp_fig5(cfg, out_dir, master_seed, jobs):
    cal = cfg.get("calibration", {})
    threshold = float(cal.get("quality_threshold", 0.34))
    mu_dist = standin_mu_dist(cal.get("mu_csv"))
    alpha_dist = standin_alpha_dist(cal.get("alpha_csv"))
    base = build_model_config(cfg, master_seed)
    graph = netgen.generate(base.net)
    labels = [
        ({"condition": "distributional"},
         {"mu_mode": EmpiricalMu(mu_dist), "alpha_mode": EmpiricalAlpha(alpha_dist)}),
        ({"condition": "reference"},
         {"mu_mode": FixedMu(REFERENCE_CORNER[0]),
          "alpha_mode": FixedAlpha(REFERENCE_CORNER[1])}),
    ]
    cells = make_cells(base, labels)
    outcomes = run_cells(cells, graph, master_seed, jobs)

    rows = []
    stats_payload = {"threshold": threshold}
    for cell in cells:
        q, p = _pooled_records(outcomes, cell.index)
        split = metrics.popularity_by_quality_group(q, p, threshold)
        cond = cell.label["condition"]
        for v, c in zip(split.high_values, split.high_ccdf):
            rows.append((cond, "high", int(v), float(c)))
        for v, c in zip(split.low_values, split.low_ccdf):
            rows.append((cond, "low", int(v), float(c)))
        ks = metrics.ks_two_sample(p[q >= threshold], p[q < threshold])
        stats_payload[cond] = {
            "ks_distance": ks,
            "high_count": split.high_count,
            "low_count": split.low_count,
            "high_max": int(split.high_values.max()) if split.high_count else None,
            "low_max": int(split.low_values.max()) if split.low_count else None,
            "high_empty": split.high_empty,
            "low_empty": split.low_empty,
        }
    files = [
        ioutil.write_csv(os.path.join(out_dir, "group_ccdf.csv"),
                         ["condition", "group", "popularity", "ccdf"], rows),
        ioutil.write_json(os.path.join(out_dir, "group_stats.json"),
                          stats_payload),
    ]
    summary = ["fig5: popularity distributions by quality group "
               f"(threshold {threshold})"]
    for cond in ("distributional", "reference"):
        s = stats_payload[cond]
        summary.append(f"  {cond}: KS={s['ks_distance']:.4f} "
                       f"high_max={s['high_max']} low_max={s['low_max']}")
    return files, summary


def scrolling_dynamics_experiment(sigmas, base: ModelConfig, rho: float,
                                  q_mean: float, graph=None,
                                  master_seed: int = 0, jobs: int = 1):
    """Discriminative power across session heterogeneity values.

    Runs the diffusion with scrolling-driven attention for each sigma at
    fixed (rho, q_mean); returns (cells, outcomes, stats) with one cell
    per sigma.
    """
    if len(sigmas) == 0:
        raise ConfigError("sigma grid must be non-empty")
    if graph is None:
        graph = netgen.generate(base.net)
    labels = [({"sigma": s},
               {"alpha_mode": ScrollingAlpha(ScrollParams(rho=rho, q_mean=q_mean,
                                                          sigma=float(s)))})
              for s in sigmas]
    cells = make_cells(base, labels)
    outcomes = run_cells(cells, graph, master_seed, jobs)
    return cells, outcomes, aggregate(cells, outcomes)


def _exp_scrollsigma(cfg, out_dir, master_seed, jobs):
    sc = cfg.get("scroll_experiment", {})
    rho = float(sc.get("rho", 0.5))
    q_mean = float(sc.get("q_mean", 0.1))
    sigmas = list(sc.get("sigma", [0.0, 0.05, 0.1]))
    base = build_model_config(cfg, master_seed)
    cells, outcomes, stats = scrolling_dynamics_experiment(
        sigmas, base, rho, q_mean, master_seed=master_seed, jobs=jobs)
    rows = [(st.label["sigma"], st.tau_mean, st.tau_std, st.replicas)
            for st in stats]
    files = [
        ioutil.write_csv(os.path.join(out_dir, "sigma_tau.csv"),
                         ["sigma", "tau_mean", "tau_std", "replicas"], rows),
        _write_tau_replicas(os.path.join(out_dir, "sigma_tau_replicas.csv"),
                            cells, outcomes, ["sigma"]),
    ]
    summary = [f"scrollsigma: tau vs session heterogeneity at rho={rho}, "
               f"q_mean={q_mean}"]
    for st in stats:
        summary.append(f"  sigma={st.label['sigma']}: tau={st.tau_mean:.4f} "
                       f"+- {st.tau_std:.4f}")
    return files, summary


def _exp_custom(cfg, out_dir, master_seed, jobs):
    base = build_model_config(cfg, master_seed)
    graph = netgen.generate(base.net)
    sweep_cfg = cfg.get("sweep", {})
    mus = sweep_cfg.get("mu")
    alphas = sweep_cfg.get("alpha")
    if mus or alphas:
        mus = list(mus) if mus else [None]
        alphas = list(alphas) if alphas else [None]
        labels = []
        for mu in mus:
            for a in alphas:
                label = {}
                updates = {}
                if mu is not None:
                    label["mu"] = mu
                    updates["mu_mode"] = FixedMu(float(mu))
                    if mu in (0.0, 1.0):
                        updates["tracked_memes"] = 0
                        updates["diversity_samples"] = max(base.diversity_samples, 50)
                if a is not None:
                    label["alpha"] = a
                    updates["alpha_mode"] = FixedAlpha(int(a))
                label.setdefault("mu", "-")
                label.setdefault("alpha", "-")
                labels.append((label, updates))
        cells = make_cells(base, labels)
    else:
        label = {"mu": getattr(base.mu_mode, "value", "empirical"),
                 "alpha": getattr(base.alpha_mode, "value", "custom")}
        cells = [Cell(index=0, label=label, config=base)]
    outcomes = run_cells(cells, graph, master_seed, jobs)
    stats = aggregate(cells, outcomes)
    files = [
        _write_tau_matrix(os.path.join(out_dir, "tau_matrix.csv"), stats,
                          ["mu", "alpha"]),
        _write_tau_replicas(os.path.join(out_dir, "tau_replicas.csv"),
                            cells, outcomes, ["mu", "alpha"]),
    ]
    if len(cells) == 1:
        files.append(_write_memes_csv(os.path.join(out_dir, "memes.csv"),
                                      outcomes))
        files.append(_write_diversity_csv(os.path.join(out_dir, "diversity.csv"),
                                          outcomes))
        if any(o.result.node_states for o in outcomes):
            rows = [(node, mid, q, o.replica)
                    for o in outcomes for node, mid, q in o.result.node_states]
            files.append(ioutil.write_csv(
                os.path.join(out_dir, "node_states.csv"),
                ["node_id", "meme_id", "quality", "replica"], rows))
    summary = [f"custom sweep over {len(cells)} cell(s)"]
    for st in stats:
        summary.append(f"  {st.label}: tau={st.tau_mean:.4f} "
                       f"H={st.entropy_mean:.4f}")
    return files, summary


EXPERIMENTS = {
    "fig1b": _exp_fig1b,
    "fig2a": _exp_fig2a,
    "fig2b": _exp_fig2b,
    "fig3a": _exp_fig3a,
    "fig3b": _exp_fig3b,
    "fig4a": _exp_fig4a,
    "fig4b": _exp_fig4b,
    "fig4c": _exp_fig4c,
    "fig4d": _exp_fig4d,
    "fig5": _exp_fig5,
    "scrollsigma": _exp_scrollsigma,
    "custom": _exp_custom,
}

# desk-scale preset tweaks applied before user config and CLI overrides
_PRESETS = {
    "fig4d": {"run": {"tracked_memes": 5000}},
    "fig5": {"run": {"tracked_memes": 5000}},
    "fig3b": {"run": {"replicas": 3}},
    "scrollsigma": {"net": {"n": 500},
                    "run": {"tracked_memes": 3000, "replicas": 10}},
}


def run_experiment(name: str, out_dir, master_seed: int = 0, jobs: int = 1,
                   full_scale: bool = False, config_path=None,
                   overrides=()) -> str:
    """Execute a named experiment; returns the manifest path.

    Re-running with the same seed reproduces every CSV byte for byte (the
    manifest records wall time and therefore differs).
    """
    if name not in EXPERIMENTS:
        raise ConfigError(
            f"unknown experiment {name!r}; choose from {sorted(EXPERIMENTS)}")
    cfg = load_config(config_path, overrides, full_scale,
                      preset=_PRESETS.get(name))
    os.makedirs(out_dir, exist_ok=True)
    t0 = time.perf_counter()
    files, summary = EXPERIMENTS[name](cfg, out_dir, master_seed, jobs)
    wall = time.perf_counter() - t0
    files.append(ioutil.write_summary(out_dir, summary))
    manifest = ioutil.write_manifest(out_dir, name, master_seed, cfg,
                                     files, wall)
    return manifest
