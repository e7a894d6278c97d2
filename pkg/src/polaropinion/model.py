"""Polarization functional, steering vectors and greedy friend selection.

Agents sit at positions z_k in R^D and interact through the radial metric
g(w) = |w|**p. The group objective is the mean of g over all ordered pairs;
each agent moves toward the single "friend" whose position maximizes the
first-order gain theta_k . (z_j - z_k), where theta_k is the average gradient
of g over the differences z_k - z_m.
"""

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .geometry import as_points


@dataclass(frozen=True)
class MetricFamily:
    """Pairwise metric g(w) = |w|**p."""

    p: float = 2.0

    def __post_init__(self):
        if not (np.isfinite(self.p) and self.p > 0):
            raise ValueError(f"metric exponent must be positive and finite, got {self.p}")

    def g(self, w):
        w = np.asarray(w, dtype=np.float64)
        return _kernels.g_of_r2_vec(np.sum(w * w, axis=-1), float(self.p))

    def grad(self, w):
        return grad_g(w, self)


@dataclass(frozen=True)
class Ensemble:
    """Agent positions (N, D) at simulation time ``time``."""

    positions: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        pts = as_points(self.positions)
        pts.setflags(write=False)
        object.__setattr__(self, "positions", pts)
        if not (np.isfinite(self.time) and self.time >= 0):
            raise ValueError(f"time must be a nonnegative scalar, got {self.time}")

    @property
    def n_agents(self):
        return self.positions.shape[0]

    @property
    def dim(self):
        return self.positions.shape[1]


@dataclass(frozen=True)
class Theta:
    vector: np.ndarray
    sample_size: int


def _check_index(e, k):
    if not 0 <= k < e.n_agents:
        raise IndexError(f"agent index {k} out of range for {e.n_agents} agents")


def grad_g(w, m):
    """p |w|^(p-2) w, with zero returned for |w| <= 1e-12.

    Works on a single vector or on a stack of vectors along the last axis.
    """
    w = np.asarray(w, dtype=np.float64)
    if not np.all(np.isfinite(w)):
        raise ValueError("gradient argument must be finite")
    r2 = np.sum(w * w, axis=-1, keepdims=True)
    return _kernels.grad_factor_vec(r2, float(m.p)) * w


def agent_polarizations(e, m):
    """L^k for every agent, as an (N,) array."""
    return _kernels.agent_loss(e.positions, np.arange(e.n_agents), float(m.p))


def agent_polarization(e, k, m):
    """L^k = (1/N) sum_l g(z_k - z_l)."""
    _check_index(e, k)
    return float(_kernels.agent_loss(e.positions, np.array([k]), float(m.p))[0])


def polarization(e, m):
    """L = (1/N^2) sum_{k,l} g(z_k - z_l), over all ordered pairs."""
    return float(np.mean(agent_polarizations(e, m)))


def mass_center(e):
    return e.positions.mean(axis=0)


def theta_sampled(e, k, sample, m):
    """Average of grad g(z_k - z_m) over the agents in ``sample``.

    The sample is summed in ascending index order, so a sample covering every
    agent reproduces :func:`theta_exact` bit for bit.
    """
    _check_index(e, k)
    idx = np.sort(np.asarray(sample, dtype=np.int64).ravel())
    if idx.size == 0:
        raise ValueError("sample must be nonempty")
    if idx[0] < 0 or idx[-1] >= e.n_agents:
        raise IndexError("sample index out of range")
    vec = _kernels.theta_rows(e.positions, np.array([k], dtype=np.int64), idx, float(m.p))[0]
    return Theta(vec, int(idx.size))


def theta_exact(e, k, m):
    return theta_sampled(e, k, np.arange(e.n_agents), m)


def friend_objectives(e, k, th, candidates):
    """theta . (z_j - z_k) for each candidate j, summed over coordinates in order."""
    z = e.positions
    cand = np.asarray(candidates, dtype=np.int64)
    vec = th.vector if isinstance(th, Theta) else np.asarray(th, dtype=np.float64)
    out = np.zeros(len(cand))
    for d in range(e.dim):
        out += vec[d] * (z[cand, d] - z[k, d])
    return out


def select_friend(e, k, th, candidates=None):
    """arg*max_j theta . (z_j - z_k) over ``candidates`` plus k itself.

    Ties (exact float equality) go to the smallest index. Because k always
    competes with objective 0, the chosen friend never has negative gain.
    ``candidates=None`` means every agent.
    """
    _check_index(e, k)
    if candidates is None:
        cand = np.arange(e.n_agents, dtype=np.int64)
    else:
        cand = np.unique(np.asarray(candidates, dtype=np.int64))
        if cand.size == 0:
            raise ValueError("candidate set must be nonempty")
        if cand[0] < 0 or cand[-1] >= e.n_agents:
            raise IndexError("candidate index out of range")
    vec = th.vector if isinstance(th, Theta) else np.asarray(th, dtype=np.float64)
    return int(_kernels.friend_of(e.positions, k, np.ascontiguousarray(vec), cand))
