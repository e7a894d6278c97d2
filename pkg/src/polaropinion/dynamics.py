"""Epoch solvers for the polarization dynamics.

One epoch freezes the positions, picks a friend l(k) for every agent, then
moves everybody at once:

    z_k <- z_k + dt * (z_{l(k)} - z_k)

The deterministic solver averages the metric gradient over all N agents. The
stochastic solver shuffles the agents into consecutive batches of S and
estimates the steering vector from an S-element sample, either the agent's own
batch (``shared_batch``) or an independent draw per agent (``per_agent``).
"""

import logging
from dataclasses import asdict, dataclass

import numpy as np

from . import _kernels
from .geometry import convex_hull, diameter
from .model import Ensemble, MetricFamily

log = logging.getLogger(__name__)

FRIEND_SEARCH = ("hull", "full")
SAMPLING = ("shared_batch", "per_agent")


@dataclass(frozen=True)
class RunConfig:
    n_agents: int
    dim: int = 2
    p: float = 2.0
    dt: float = 0.02
    sample_size: int | None = None  # None means S = N
    epochs: int = 600
    seed: int = 0
    friend_search: str = "hull"
    sampling: str = "shared_batch"
    # relative to the initial diameter
    convergence_tol: float = 1e-6
    stop_at_convergence: bool = False

    def __post_init__(self):
        if self.sample_size is None:
            object.__setattr__(self, "sample_size", self.n_agents)
        if self.n_agents < 1 or self.dim < 1:
            raise ValueError("n_agents and dim must be positive")
        if not 0.0 < self.dt < 1.0:
            raise ValueError(f"dt must lie in (0, 1), got {self.dt}")
        if not 1 <= self.sample_size <= self.n_agents:
            raise ValueError(f"sample_size must lie in [1, {self.n_agents}], got {self.sample_size}")
        if self.epochs < 0:
            raise ValueError("epochs must be nonnegative")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        if self.friend_search not in FRIEND_SEARCH:
            raise ValueError(f"friend_search must be one of {FRIEND_SEARCH}")
        if self.sampling not in SAMPLING:
            raise ValueError(f"sampling must be one of {SAMPLING}")
        if self.convergence_tol < 0:
            raise ValueError("convergence_tol must be nonnegative")
        MetricFamily(self.p)

    @property
    def metric(self):
        return MetricFamily(self.p)

    @property
    def stochastic(self):
        return self.sample_size < self.n_agents

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class CommunicationRecord:
    """Friend map of one epoch: agent k moved toward friends[k]."""

    epoch: int
    friends: np.ndarray

    def matrix(self):
        """Dense 0/1 communication matrix C with C[k, friends[k]] = 1."""
        n = len(self.friends)
        c = np.zeros((n, n), dtype=np.int8)
        c[np.arange(n), self.friends] = 1
        return c


class CounterRNG:
    """Independent random streams keyed by (epoch,) and (epoch, batch).

    Streams are derived from the master seed alone, so a draw never depends
    on how many numbers were consumed elsewhere.
    """

    def __init__(self, seed):
        self.seed = int(seed)

    def stream(self, *key):
        ss = np.random.SeedSequence(self.seed, spawn_key=tuple(int(k) for k in key))
        return np.random.Generator(np.random.PCG64(ss))


def _check(e, cfg):
    if e.positions.shape != (cfg.n_agents, cfg.dim):
        raise ValueError(
            f"ensemble shape {e.positions.shape} does not match config ({cfg.n_agents}, {cfg.dim})"
        )


def _candidates(z, cfg):
    if cfg.friend_search == "full":
        return np.arange(len(z), dtype=np.int64)
    return np.asarray(convex_hull(z), dtype=np.int64)


def _advance(e, friends, dt):
    z = e.positions
    new = z + dt * (z[friends] - z)
    return Ensemble(new, e.time + dt)


def deterministic_friends(z, p, cand):
    rows = np.arange(len(z), dtype=np.int64)
    thetas = _kernels.theta_rows(z, rows, rows, float(p))
    return _kernels.friends_rows(z, rows, thetas, cand)


def step_deterministic(e, cfg, m=None, epoch=0):
    """One full-information epoch; returns the new ensemble and the friend map."""
    _check(e, cfg)
    m = m or cfg.metric
    z = e.positions
    friends = deterministic_friends(z, m.p, _candidates(z, cfg))
    return _advance(e, friends, cfg.dt), CommunicationRecord(epoch, friends)


def epoch_batches(n, s, rng, epoch):
    """Shuffle 0..n-1 and cut into consecutive batches of s (last may be short)."""
    order = rng.stream(epoch).permutation(n)
    return [order[i : i + s] for i in range(0, n, s)]


def batch_samples(batches, n, s, sampling, rng, epoch):
    """Sorted sample indices used by each member of each batch.

    shared_batch: one (s,) array per batch, shared by its members.
    per_agent: one (len(batch), s) array per batch, a row per member.
    """
    if sampling == "shared_batch":
        return [np.sort(b) for b in batches]
    out = []
    for b, members in enumerate(batches):
        gen = rng.stream(epoch, b)
        rows = np.empty((len(members), s), dtype=np.int64)
        for r in range(len(members)):
            rows[r] = np.sort(gen.choice(n, size=s, replace=False))
        out.append(rows)
    return out


def stochastic_friends(z, p, cand, batches, samples, order=None):
    """Friends from sampled steering vectors, read against the frozen ``z``.

    ``order`` only changes the sequence in which batches are processed; the
    result must not depend on it.
    """
    friends = np.empty(len(z), dtype=np.int64)
    for b in range(len(batches)) if order is None else order:
        rows = np.asarray(batches[b], dtype=np.int64)
        sample = samples[b]
        if sample.ndim == 1:
            thetas = _kernels.theta_rows(z, rows, sample, float(p))
        else:
            thetas = _kernels.theta_rows_own_sample(z, rows, sample, float(p))
        friends[rows] = _kernels.friends_rows(z, rows, thetas, cand)
    return friends


def step_stochastic(e, cfg, m=None, rng=None, epoch=0):
    """One epoch of the subsampled solver."""
    _check(e, cfg)
    m = m or cfg.metric
    rng = rng or CounterRNG(cfg.seed)
    z = e.positions
    n, s = cfg.n_agents, cfg.sample_size
    cand = _candidates(z, cfg)
    batches = epoch_batches(n, s, rng, epoch)
    samples = batch_samples(batches, n, s, cfg.sampling, rng, epoch)
    friends = stochastic_friends(z, m.p, cand, batches, samples)
    return _advance(e, friends, cfg.dt), CommunicationRecord(epoch, friends)


def loss(e, m):
    """Polarization of ``e``. Uses 2 * mean |z_k - c|^2 when p == 2."""
    z = e.positions
    if m.p == 2.0:
        centered = z - z.mean(axis=0)
        return float(2.0 * np.mean(np.sum(centered * centered, axis=1)))
    rows = np.arange(len(z), dtype=np.int64)
    return float(np.mean(_kernels.agent_loss(z, rows, float(m.p))))


def detect_convergence(e, rec, tol):
    """True iff every agent is within ``tol`` of its recorded friend."""
    z = e.positions
    gap = np.linalg.norm(z - z[rec.friends], axis=1)
    return bool(gap.max() <= tol)


def run(cfg, init, keep_records=True, progress=None):
    """Apply ``cfg.epochs`` epochs to ``init``.

    Returns (final ensemble, loss trace, list of CommunicationRecord). The
    trace holds L before the first epoch and after each one. With
    ``cfg.stop_at_convergence`` the loop ends after the first epoch whose
    friend map was already converged to ``convergence_tol * diameter(init)``.
    """
    _check(init, cfg)
    m = cfg.metric
    rng = CounterRNG(cfg.seed)
    tol = cfg.convergence_tol * diameter(init.positions)
    e = init
    trace = [loss(e, m)]
    records = []
    for epoch in range(cfg.epochs):
        if cfg.stochastic:
            nxt, rec = step_stochastic(e, cfg, m, rng, epoch)
        else:
            nxt, rec = step_deterministic(e, cfg, m, epoch)
        if keep_records:
            records.append(CommunicationRecord(epoch, rec.friends.astype(np.int32)))
        converged = cfg.stop_at_convergence and detect_convergence(e, rec, tol)
        e = nxt
        trace.append(loss(e, m))
        if progress is not None:
            progress(epoch, trace[-1])
        if converged:
            log.info("converged after %d epochs", epoch + 1)
            break
    return e, np.asarray(trace), records
