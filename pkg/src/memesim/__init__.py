"""memesim: agent-based meme diffusion with finite attention.

A library for simulating quality-driven information spreading on social
networks under information overload, measuring the resulting quality vs.
popularity relationship, and calibrating the dynamics against empirical
posting-rate and attention data. See the README for the experiment CLI.
"""

from .calib import EmpiricalDist, Sampler, ingest_alpha, ingest_mu, naive_params
from .diffusion import (
    EmpiricalAlpha,
    EmpiricalMu,
    FixedAlpha,
    FixedMu,
    Meme,
    MemeRecord,
    Message,
    ModelConfig,
    RunResult,
    ScrollingAlpha,
    SteadyStatePolicy,
    StepOutcome,
    WorldState,
    run,
)
from .errors import (
    ConfigError,
    FitUnavailableError,
    InputError,
    MemesimError,
    SteadyStateError,
    UndefinedCorrelationError,
)
from .metrics import (
    PowerLawFit,
    diversity_entropy,
    fit_power_law,
    kendall_tau_b,
    ks_two_sample,
    log_binned_pdf,
    mean_popularity_by_quality,
    mutual_information,
    normalized_diversity,
    popularity_by_quality_group,
)
from .netgen import Generator, Graph, NetSpec, clustering_coefficient, generate
from .scrolling import (
    FitGrid,
    FitResult,
    ScrollParams,
    SessionKind,
    SessionOutcome,
    sample_session,
    session_pmf,
    simulate_user_mu,
)

__version__ = "0.1.0"
