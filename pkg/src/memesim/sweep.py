"""Parallel execution of sweep cells and replicas.

Every (cell, replica) pair gets a seed derived from the master seed and
its indices, so results are byte-identical no matter how many workers run
them or in which order they finish.
"""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .config import replica_seed
from .diffusion import ModelConfig, RunResult, run
from .errors import MemesimError, UndefinedCorrelationError
from .metrics import kendall_tau_b
from .netgen import Graph


@dataclass(frozen=True)
class Cell:
    """One sweep cell: a label for output rows plus its model config."""

    index: int
    label: dict
    config: ModelConfig


@dataclass
class ReplicaOutcome:
    cell_index: int
    replica: int
    seed: int
    result: RunResult
    wall_time_s: float


def _run_task(args):
    graph, config, cell_index, rep, seed = args
    t0 = time.perf_counter()
    result = run(config, graph, seed=seed)
    return ReplicaOutcome(cell_index=cell_index, replica=rep, seed=seed,
                          result=result, wall_time_s=time.perf_counter() - t0)


def run_cells(cells, graph: Graph, master_seed: int, jobs: int = 1):
    """Execute all cells x replicas; returns outcomes sorted by (cell, replica)."""
    tasks = []
    for cell in cells:
        for rep in range(cell.config.replicas):
            seed = replica_seed(master_seed, cell.index, rep)
            tasks.append((graph, cell.config, cell.index, rep, seed))
    if jobs <= 1 or len(tasks) <= 1:
        outcomes = [_run_task(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(_run_task, tasks, chunksize=1))
    outcomes.sort(key=lambda o: (o.cell_index, o.replica))
    return outcomes


@dataclass
class CellStats:
    """Per-cell aggregate of replica measurements."""

    label: dict
    replicas: int
    taus: list = field(default_factory=list)
    tau_mean: float = float("nan")
    tau_std: float = float("nan")
    tau_pooled: float = float("nan")
    mean_entropies: list = field(default_factory=list)
    entropy_mean: float = float("nan")
    n_tracked: int = 0
    seeds: list = field(default_factory=list)


def _tau_or_nan(qualities, popularities) -> float:
    try:
        return kendall_tau_b(qualities, popularities)
    except UndefinedCorrelationError:
        return float("nan")


def aggregate(cells, outcomes):
    """Fold replica outcomes into one :class:`CellStats` per cell."""
    by_cell = {}
    for o in outcomes:
        by_cell.setdefault(o.cell_index, []).append(o)
    stats = []
    for cell in cells:
        outs = by_cell.get(cell.index, [])
        st = CellStats(label=dict(cell.label), replicas=len(outs))
        all_q = []
        all_p = []
        for o in outs:
            res = o.result
            if len(res.qualities) >= 2:
                st.taus.append(_tau_or_nan(res.qualities, res.popularities))
            else:
                st.taus.append(float("nan"))
            st.mean_entropies.append(res.mean_entropy())
            st.n_tracked += len(res.qualities)
            st.seeds.append(o.seed)
            all_q.append(res.qualities)
            all_p.append(res.popularities)
        finite = [t for t in st.taus if not np.isnan(t)]
        if finite:
            st.tau_mean = float(np.mean(finite))
            st.tau_std = float(np.std(finite))
        if st.n_tracked >= 2:
            st.tau_pooled = _tau_or_nan(np.concatenate(all_q), np.concatenate(all_p))
        if st.mean_entropies:
            st.entropy_mean = float(np.mean(st.mean_entropies))
        stats.append(st)
    return stats


def make_cells(base: ModelConfig, labels_and_overrides) -> list:
    """Build cells by applying (label, config-updates) pairs to a base config."""
    cells = []
    for idx, (label, updates) in enumerate(labels_and_overrides):
        cells.append(Cell(index=idx, label=label, config=replace(base, **updates)))
    return cells
