"""Meme-sharing dynamics on a static social network.

One simulation step activates a uniformly random agent. With probability
mu the agent posts a message carrying a brand-new meme whose quality is
uniform on (0, 1]; otherwise it picks one message from its feed with
probability proportional to the carried meme's quality (duplicate copies
of a meme each count) and reshares it. Either way the message lands on top
of every neighbor's feed, evicting the oldest entry of a full feed, and
the meme's popularity grows by one. A meme is extinct once no feed holds a
copy of it.

Runs first iterate to a steady state (the number of distinct memes alive
across feeds stabilizes), then follow a fixed number of newly born memes
from injection to extinction while sampling feed-level diversity.
"""

from __future__ import annotations

import math
from bisect import bisect_left
from dataclasses import dataclass
from typing import NamedTuple, Optional, Union

import numpy as np

from .calib import EmpiricalDist, Sampler
from .errors import ConfigError, SteadyStateError
from .netgen import Graph, NetSpec
from .scrolling import ScrollParams

_BLOCK = 1 << 14


# --------------------------------------------------------------------------
# Parameter modes
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class FixedMu:
    value: float


@dataclass(frozen=True)
class EmpiricalMu:
    """Per-agent posting rate drawn once at initialization."""

    dist: EmpiricalDist


@dataclass(frozen=True)
class FixedAlpha:
    value: int


@dataclass(frozen=True)
class EmpiricalAlpha:
    """Per-agent feed capacity (default) or per-activation attention draw.

    With ``per_activation`` set, feeds retain up to ``retention_cap``
    messages (0 means the distribution's maximum) and each reshare only
    considers the newest drawn-alpha entries.
    """

    dist: EmpiricalDist
    per_activation: bool = False
    retention_cap: int = 0


@dataclass(frozen=True)
class ScrollingAlpha:
    """Attention driven by the scrolling-session model.

    Each activation is one session: with probability ``params.rho`` the
    agent posts a single new meme; otherwise it scrolls, resharing one
    quality-weighted pick from its feed per scroll stop and continuing
    with the session's survival probability, so the geometric run length
    sets how many messages the agent shares. The retained feed stands in
    for the platform's effectively endless stream, so a long session may
    revisit it; ``session_cap`` bounds pathological runs. Feeds retain up
    to ``retention_cap`` messages. The configured mu mode is not used in
    this mode (``params.rho`` plays the posting-rate role).
    """

    params: ScrollParams
    retention_cap: int = 128
    session_cap: int = 10000


MuMode = Union[FixedMu, EmpiricalMu]
AlphaMode = Union[FixedAlpha, EmpiricalAlpha, ScrollingAlpha]


@dataclass(frozen=True)
class SteadyStatePolicy:
    """Detector settings for the distinct-meme count plateau.

    The count is sampled every ``sample_interval`` steps (default: one
    sweep of N activations); steady state is declared when the means of
    the last two windows of ``window`` samples differ by less than
    ``tolerance`` relative to the larger of the two, but never before
    ``min_burn_in`` samples. When the count is small its relative
    fluctuations can exceed any fixed tolerance even at stationarity, so
    the comparison also accepts a difference within ``noise_factor``
    standard errors of the window means (set 0 to disable). Exceeding
    ``max_samples`` raises :class:`SteadyStateError`.
    """

    sample_interval: Optional[int] = None
    window: int = 20
    tolerance: float = 0.02
    min_burn_in: int = 50
    max_samples: int = 4000
    noise_factor: float = 1.5

    def validate(self):
        if self.window < 2:
            raise ConfigError("steady-state window must be >= 2")
        if self.tolerance <= 0:
            raise ConfigError("steady-state tolerance must be > 0")
        if self.noise_factor < 0:
            raise ConfigError("noise_factor must be >= 0")
        if self.sample_interval is not None and self.sample_interval < 1:
            raise ConfigError("sample_interval must be >= 1")


@dataclass(frozen=True)
class ModelConfig:
    net: NetSpec = NetSpec()
    mu_mode: MuMode = FixedMu(0.1)
    alpha_mode: AlphaMode = FixedAlpha(10)
    steady_state: SteadyStatePolicy = SteadyStatePolicy()
    tracked_memes: int = 10000
    replicas: int = 5
    seed: int = 0
    diversity_samples: int = 0
    max_run_steps: int = 0
    debug_event_log: bool = False
    snapshot_nodes: bool = False  # capture per-node last-shared state at the end

    def validate(self):
        self.net.validate()
        self.steady_state.validate()
        if self.replicas < 1:
            raise ConfigError("replicas must be >= 1")
        if self.tracked_memes < 0:
            raise ConfigError("tracked_memes must be >= 0")
        if self.tracked_memes == 0 and self.diversity_samples < 1:
            raise ConfigError(
                "tracked_memes may only be 0 for diversity-only runs "
                "(set diversity_samples >= 1)"
            )
        if isinstance(self.mu_mode, FixedMu):
            if not (0.0 <= self.mu_mode.value <= 1.0):
                raise ConfigError(f"mu must be in [0, 1], got {self.mu_mode.value}")
            if self.mu_mode.value == 0.0 and self.tracked_memes > 0:
                raise ConfigError(
                    "no meme is ever born after steady state at mu=0; "
                    "use a diversity-only run (tracked_memes=0)"
                )
        if isinstance(self.alpha_mode, FixedAlpha) and self.alpha_mode.value < 1:
            raise ConfigError(f"alpha must be >= 1, got {self.alpha_mode.value}")
        if isinstance(self.alpha_mode, ScrollingAlpha):
            self.alpha_mode.params.validate()
            if self.alpha_mode.retention_cap < 1:
                raise ConfigError("scrolling retention_cap must be >= 1")
            if self.alpha_mode.session_cap < 1:
                raise ConfigError("scrolling session_cap must be >= 1")


def mu_key(mode: MuMode) -> str:
    if isinstance(mode, FixedMu):
        return f"fixed:{mode.value!r}"
    return f"empirical:{mode.dist.digest()}"


def alpha_key(mode: AlphaMode) -> str:
    if isinstance(mode, FixedAlpha):
        return f"fixed:{mode.value}"
    if isinstance(mode, EmpiricalAlpha):
        scope = "per_activation" if mode.per_activation else "per_agent"
        return f"empirical:{mode.dist.digest()}:{scope}"
    p = mode.params
    return f"scrolling:q{p.q_mean!r}:s{p.sigma!r}:r{p.rho!r}:cap{mode.retention_cap}"


def net_key(spec: NetSpec) -> str:
    return (f"{spec.generator.value}:n{spec.n}:m{spec.m}"
            f":t{spec.triad_prob!r}:seed{spec.seed}")


# --------------------------------------------------------------------------
# Read-only record views
# --------------------------------------------------------------------------

class Meme(NamedTuple):
    id: int
    quality: float


class Message(NamedTuple):
    meme_id: int
    created_step: int


class StepOutcome(NamedTuple):
    agent: int
    meme_id: int  # last shared meme of the activation
    injected: bool
    n_shares: int = 1


@dataclass(frozen=True)
class MemeRecord:
    meme: Meme
    popularity: int
    birth_step: int
    death_step: int  # -1 while alive
    tracked: bool


# --------------------------------------------------------------------------
# World state and step dynamics
# --------------------------------------------------------------------------

_ATT_WHOLE = 0
_ATT_EMPIRICAL = 1
_ATT_SCROLL = 2


class WorldState:
    """Mutable state of one simulation replica (confined to one worker)."""

    def __init__(self, graph: Graph, config: ModelConfig, seed=None):
        config.validate()
        self.graph = graph
        self.config = config
        n = graph.node_count
        self.n = n
        if seed is None:
            seed = config.seed
        self.seed = int(seed)
        self._rng = np.random.default_rng(np.random.SeedSequence(self.seed))
        self._adj = graph.neighbor_lists()

        # resolve per-agent posting probability
        mu_mode = config.mu_mode
        alpha_mode = config.alpha_mode
        if isinstance(alpha_mode, ScrollingAlpha):
            self._mu = [alpha_mode.params.rho] * n
        elif isinstance(mu_mode, FixedMu):
            self._mu = [mu_mode.value] * n
        else:
            self._mu = Sampler(mu_mode.dist, self._rng).draw(n).tolist()
        self.mu_max = max(self._mu)

        # resolve attention mode and per-agent feed retention capacity
        self._alpha_sampler = None
        self._scroll_qlo = self._scroll_qspan = 0.0
        self._session_cap = 0
        if isinstance(alpha_mode, FixedAlpha):
            self._att_mode = _ATT_WHOLE
            caps = [alpha_mode.value] * n
        elif isinstance(alpha_mode, EmpiricalAlpha):
            self._alpha_sampler = Sampler(alpha_mode.dist, self._rng)
            if alpha_mode.per_activation:
                self._att_mode = _ATT_EMPIRICAL
                cap = alpha_mode.retention_cap or int(alpha_mode.dist.max_value())
                caps = [cap] * n
            else:
                self._att_mode = _ATT_WHOLE
                caps = [int(v) for v in self._alpha_sampler.draw(n)]
        else:
            self._att_mode = _ATT_SCROLL
            p = alpha_mode.params
            self._scroll_qlo = p.q_lo
            self._scroll_qspan = p.q_hi - p.q_lo
            self._session_cap = alpha_mode.session_cap
            caps = [alpha_mode.retention_cap] * n
        self._caps = caps

        # feeds as fixed-size ring buffers, newest entry at _feed_head
        self._feed_m = [[0] * c for c in caps]
        self._feed_q = [[0.0] * c for c in caps]
        self._feed_t = [[0] * c for c in caps]
        self._feed_head = [0] * n
        self._feed_len = [0] * n

        # per-meme records, indexed by meme id
        self._quality: list = []
        self._popularity: list = []
        self._live: list = []
        self._birth: list = []
        self._death: list = []

        # live-set bookkeeping for diversity snapshots
        self._live_ids: list = []
        self._live_pos: dict = {}

        self.step_count = 0
        self.last_shared = [-1] * n

        # tracking window (meme ids are sequential, so a range suffices)
        self._tracked_lo = -1
        self._tracked_hi = -1
        self._tracked_alive = 0

        self.event_log = [] if config.debug_event_log else None

        # batched uniform draws; .tolist() yields plain floats, which are
        # noticeably faster than numpy scalars in the step loop
        self._upool = self._rng.random(_BLOCK).tolist()
        self._ui = 0
        self._apool = self._rng.integers(0, n, _BLOCK).tolist()
        self._ai = 0
        self._alpha_pool: list = []
        self._alpha_i = 0

    # -- randomness ---------------------------------------------------------

    def _next_u(self) -> float:
        i = self._ui
        if i == _BLOCK:
            self._upool = self._rng.random(_BLOCK).tolist()
            i = 0
        self._ui = i + 1
        return self._upool[i]

    def _next_agent(self) -> int:
        i = self._ai
        if i == _BLOCK:
            self._apool = self._rng.integers(0, self.n, _BLOCK).tolist()
            i = 0
        self._ai = i + 1
        return self._apool[i]

    def _next_alpha_draw(self) -> int:
        i = self._alpha_i
        if i >= len(self._alpha_pool):
            self._alpha_pool = self._alpha_sampler.draw(_BLOCK).astype(int).tolist()
            i = 0
        self._alpha_i = i + 1
        return self._alpha_pool[i]

    # -- meme registry ------------------------------------------------------

    @property
    def meme_count(self) -> int:
        return len(self._quality)

    @property
    def distinct_live(self) -> int:
        return len(self._live_ids)

    def meme(self, meme_id: int) -> MemeRecord:
        tracked = self._tracked_lo <= meme_id < self._tracked_hi
        return MemeRecord(
            meme=Meme(meme_id, self._quality[meme_id]),
            popularity=self._popularity[meme_id],
            birth_step=self._birth[meme_id],
            death_step=self._death[meme_id],
            tracked=tracked,
        )

    def create_meme(self, quality: float) -> int:
        """Register a meme without sharing it (test/demo seam)."""
        mid = len(self._quality)
        self._quality.append(quality)
        self._popularity.append(0)
        self._live.append(0)
        self._birth.append(self.step_count)
        self._death.append(-1)
        return mid

    def _kill(self, mid: int):
        self._death[mid] = self.step_count
        pos = self._live_pos.pop(mid)
        last = self._live_ids.pop()
        if last != mid:
            self._live_ids[pos] = last
            self._live_pos[last] = pos
        if self._tracked_lo <= mid < self._tracked_hi:
            self._tracked_alive -= 1

    def _make_live(self, mid: int):
        self._live_pos[mid] = len(self._live_ids)
        self._live_ids.append(mid)

    # -- feeds --------------------------------------------------------------

    def seed_feed(self, node: int, meme_ids):
        """Place copies of existing memes in a node's feed, newest first.

        Intended for controlled experiments; bypasses popularity counting.
        """
        for mid in reversed(list(meme_ids)):
            self._push(node, mid, self._quality[mid])

    def feed_view(self, node: int):
        """Messages in a node's feed, newest first."""
        head = self._feed_head[node]
        cap = self._caps[node]
        out = []
        k = head
        for _ in range(self._feed_len[node]):
            out.append(Message(self._feed_m[node][k], self._feed_t[node][k]))
            k += 1
            if k == cap:
                k = 0
        return out

    def feed_capacity(self, node: int) -> int:
        return self._caps[node]

    def _push(self, node: int, mid: int, q: float):
        """Prepend one message, evicting the oldest if the feed is full."""
        cap = self._caps[node]
        h = self._feed_head[node] - 1
        if h < 0:
            h = cap - 1
        fm = self._feed_m[node]
        if self._feed_len[node] == cap:
            ev = fm[h]
            if ev != mid:
                self._live[ev] -= 1
                if self._live[ev] == 0:
                    self._kill(ev)
                self._live[mid] += 1
                if self._live[mid] == 1:
                    self._make_live(mid)
        else:
            self._feed_len[node] += 1
            self._live[mid] += 1
            if self._live[mid] == 1:
                self._make_live(mid)
        fm[h] = mid
        self._feed_q[node][h] = q
        self._feed_t[node][h] = self.step_count
        self._feed_head[node] = h

    # -- dynamics -----------------------------------------------------------

    def _propagate(self, i: int, mid: int, quality: float, t: int):
        """Deliver one shared message to all neighbor feeds."""
        caps = self._caps
        feed_m = self._feed_m
        feed_q = self._feed_q
        feed_t = self._feed_t
        heads = self._feed_head
        lens = self._feed_len
        live = self._live
        gained = 0
        for nb in self._adj[i]:
            cap = caps[nb]
            h = heads[nb] - 1
            if h < 0:
                h = cap - 1
            fm = feed_m[nb]
            if lens[nb] == cap:
                ev = fm[h]
                if ev != mid:
                    lv = live[ev] - 1
                    live[ev] = lv
                    if lv == 0:
                        self._kill(ev)
                    gained += 1
            else:
                lens[nb] += 1
                gained += 1
            fm[h] = mid
            feed_q[nb][h] = quality
            feed_t[nb][h] = t
            heads[nb] = h
        if gained:
            old = live[mid]
            live[mid] = old + gained
            if old == 0:
                self._make_live(mid)

    def _inject(self, t: int) -> int:
        quality = 1.0 - self._next_u()  # uniform on (0, 1]
        mid = len(self._quality)
        self._quality.append(quality)
        self._popularity.append(1)
        self._live.append(0)
        self._birth.append(t)
        self._death.append(-1)
        if self._tracked_lo <= mid < self._tracked_hi:
            self._tracked_alive += 1
        return mid

    def step(self) -> StepOutcome:
        """Advance the dynamics by one agent activation.

        In the fixed and empirical attention modes one activation shares
        exactly one message; in scrolling mode a reshare activation is a
        whole session and may share several.
        """
        t = self.step_count + 1
        self.step_count = t
        i = self._next_agent()
        flen = self._feed_len[i]

        if self._next_u() < self._mu[i] or flen == 0:
            mid = self._inject(t)
            quality = self._quality[mid]
            self.last_shared[i] = mid
            if self.event_log is not None:
                self.event_log.append(mid)
            self._propagate(i, mid, quality, t)
            if self._live[mid] == 0:
                # isolated poster: the meme never reached any feed
                self._death[mid] = t
                if self._tracked_lo <= mid < self._tracked_hi:
                    self._tracked_alive -= 1
            return StepOutcome(agent=i, meme_id=mid, injected=True, n_shares=1)

        if self._att_mode == _ATT_SCROLL:
            return self._scroll_session(i, t, flen)

        att = flen
        if self._att_mode == _ATT_EMPIRICAL:
            draw = self._next_alpha_draw()
            if draw < att:
                att = draw
        fq = self._feed_q[i]
        cap = self._caps[i]
        k = self._feed_head[i]
        total = 0.0
        for _ in range(att):
            total += fq[k]
            k += 1
            if k == cap:
                k = 0
        r = self._next_u() * total
        k = self._feed_head[i]
        acc = 0.0
        last = k
        for _ in range(att):
            last = k
            acc += fq[k]
            if acc >= r:
                break
            k += 1
            if k == cap:
                k = 0
        mid = self._feed_m[i][last]
        quality = self._quality[mid]
        self._popularity[mid] += 1
        self.last_shared[i] = mid
        if self.event_log is not None:
            self.event_log.append(mid)
        self._propagate(i, mid, quality, t)
        return StepOutcome(agent=i, meme_id=mid, injected=False, n_shares=1)

    def _scroll_session(self, i: int, t: int, flen: int) -> StepOutcome:
        """One scrolling session: a geometric-length run of reshares.

        The stop probability is drawn once per session; each scroll stop
        reshares one quality-weighted pick from the current feed.
        """
        q = self._scroll_qlo + self._scroll_qspan * self._next_u()
        if q < 1e-12:
            q = 1e-12
        length = int(math.log(1.0 - self._next_u()) / math.log1p(-q)) + 1
        n_shares = length if length < self._session_cap else self._session_cap

        # cumulative feed qualities, newest first
        prefix = [0.0] * flen
        fq = self._feed_q[i]
        fm = self._feed_m[i]
        cap = self._caps[i]
        k = self._feed_head[i]
        acc = 0.0
        slots = [0] * flen
        for idx in range(flen):
            acc += fq[k]
            prefix[idx] = acc
            slots[idx] = k
            k += 1
            if k == cap:
                k = 0

        mid = -1
        for _ in range(n_shares):
            r = self._next_u() * acc
            j = bisect_left(prefix, r)
            if j >= flen:
                j = flen - 1
            mid = fm[slots[j]]
            quality = self._quality[mid]
            self._popularity[mid] += 1
            self.last_shared[i] = mid
            if self.event_log is not None:
                self.event_log.append(mid)
            self._propagate(i, mid, quality, t)
        return StepOutcome(agent=i, meme_id=mid, injected=False, n_shares=n_shares)

    # -- tracking and snapshots ----------------------------------------------

    def begin_tracking(self, quota: int):
        """Mark the next ``quota`` memes born as the tracked cohort."""
        self._tracked_lo = len(self._quality)
        self._tracked_hi = self._tracked_lo + quota
        self._tracked_alive = 0

    def _tracking_done(self) -> bool:
        if self._tracked_hi < 0:
            return True
        if len(self._quality) < self._tracked_hi:
            return False
        return self._tracked_alive == 0

    def entropy_snapshot(self):
        """(entropy, distinct, total_messages) over all feed copies."""
        counts = np.fromiter(
            (self._live[m] for m in self._live_ids),
            dtype=float, count=len(self._live_ids),
        )
        total = counts.sum()
        if total <= 0:
            return 0.0, 0, 0
        p = counts / total
        h = float(-(p * np.log(p)).sum())
        return h, len(counts), int(total)

    def snapshot_node_states(self):
        """Rows of (node_id, last shared meme id, its quality)."""
        rows = []
        for node in range(self.n):
            mid = self.last_shared[node]
            if mid >= 0:
                rows.append((node, mid, self._quality[mid]))
        return rows


# --------------------------------------------------------------------------
# Full runs
# --------------------------------------------------------------------------

@dataclass
class RunResult:
    """Tracked meme records plus diversity samples for one replica."""

    meme_ids: np.ndarray
    qualities: np.ndarray
    popularities: np.ndarray
    birth_steps: np.ndarray
    death_steps: np.ndarray
    div_steps: np.ndarray
    div_entropy: np.ndarray
    div_distinct: np.ndarray
    steady_state_step: int
    total_steps: int
    seed: int
    mu_key: str
    alpha_key: str
    net_key: str
    node_states: tuple = ()  # (node_id, meme_id, quality) rows when requested

    def mean_entropy(self) -> float:
        if len(self.div_entropy) == 0:
            return 0.0
        return float(self.div_entropy.mean())

    def records(self):
        return [
            MemeRecord(meme=Meme(int(i), float(q)), popularity=int(p),
                       birth_step=int(b), death_step=int(d), tracked=True)
            for i, q, p, b, d in zip(self.meme_ids, self.qualities,
                                     self.popularities, self.birth_steps,
                                     self.death_steps)
        ]


def _windows_flat(samples, policy: SteadyStatePolicy) -> bool:
    w = policy.window
    if len(samples) < max(policy.min_burn_in, 2 * w):
        return False
    win1 = np.asarray(samples[-2 * w:-w], dtype=float)
    win2 = np.asarray(samples[-w:], dtype=float)
    m1 = win1.mean()
    m2 = win2.mean()
    ref = max(m1, m2)
    if ref == 0:
        return True
    gap = abs(m1 - m2)
    if gap < policy.tolerance * ref:
        return True
    if policy.noise_factor > 0:
        se = math.sqrt((win1.var(ddof=1) + win2.var(ddof=1)) / w)
        if gap < policy.noise_factor * se:
            return True
    return False


def run(config: ModelConfig, graph: Graph, seed=None) -> RunResult:
    """Simulate one replica to completion.

    Steps until the steady-state detector fires, then tracks
    ``config.tracked_memes`` newly born memes until all are extinct while
    collecting diversity samples (at least ``config.diversity_samples`` of
    them). Deterministic given (config, graph, seed).
    """
    config.validate()
    state = WorldState(graph, config, seed=seed)
    policy = config.steady_state
    interval = policy.sample_interval or graph.node_count

    samples: list = []
    mu_zero = state.mu_max == 0.0
    while True:
        for _ in range(interval):
            state.step()
        samples.append(state.distinct_live)
        if mu_zero:
            # no meme can be born after the feeds fill, so steady state is
            # the fully coalesced absorbing configuration
            if samples[-1] == 1:
                break
        elif _windows_flat(samples, policy):
            break
        if len(samples) >= policy.max_samples:
            raise SteadyStateError(
                f"steady state not reached within max_samples="
                f"{policy.max_samples} samples of {interval} steps "
                f"({policy.max_samples * interval} activations)"
            )

    steady_step = state.step_count
    state.begin_tracking(config.tracked_memes)

    div_steps: list = []
    div_entropy: list = []
    div_distinct: list = []
    quota_done = config.tracked_memes == 0
    while True:
        h, distinct, _ = state.entropy_snapshot()
        div_steps.append(state.step_count)
        div_entropy.append(h)
        div_distinct.append(distinct)
        if not quota_done:
            quota_done = state._tracking_done()
        if quota_done and len(div_entropy) >= config.diversity_samples:
            break
        if config.max_run_steps and state.step_count - steady_step >= config.max_run_steps:
            raise SteadyStateError(
                f"measurement phase exceeded max_run_steps={config.max_run_steps}"
            )
        for _ in range(interval):
            state.step()

    lo, hi = state._tracked_lo, state._tracked_hi
    ids = np.arange(lo, hi, dtype=np.int64)
    node_states = tuple(state.snapshot_node_states()) if config.snapshot_nodes else ()
    return RunResult(
        meme_ids=ids,
        qualities=np.array(state._quality[lo:hi]),
        popularities=np.array(state._popularity[lo:hi], dtype=np.int64),
        birth_steps=np.array(state._birth[lo:hi], dtype=np.int64),
        death_steps=np.array(state._death[lo:hi], dtype=np.int64),
        div_steps=np.array(div_steps, dtype=np.int64),
        div_entropy=np.array(div_entropy),
        div_distinct=np.array(div_distinct, dtype=np.int64),
        steady_state_step=steady_step,
        total_steps=state.step_count,
        seed=state.seed,
        mu_key=mu_key(config.mu_mode),
        alpha_key=alpha_key(config.alpha_mode),
        net_key=net_key(config.net),
        node_states=node_states,
    )
