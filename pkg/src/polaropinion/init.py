"""Seeded initial conditions: Gaussian mixtures and uniform balls."""

from dataclasses import asdict, dataclass

import numpy as np

from .model import Ensemble

KINDS = ("gaussian_mixture", "ball")


@dataclass(frozen=True)
class InitSpec:
    kind: str = "ball"
    n_agents: int = 100
    dim: int = 2
    n_components: int = 1
    component_std: float = 1.0
    mean_box_halfwidth: float = 10.0
    radius: float = 10.0
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if self.n_agents < 1 or self.dim < 1 or self.n_components < 1:
            raise ValueError("n_agents, dim and n_components must be positive")
        for name in ("component_std", "mean_box_halfwidth", "radius"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be positive, got {value}")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")

    def to_dict(self):
        return asdict(self)


def component_counts(n, n_components):
    """Split n as evenly as possible; the remainder goes to the first components."""
    base, extra = divmod(n, n_components)
    return np.array([base + (c < extra) for c in range(n_components)])


def uniform_ball(rng, n, dim, radius):
    direction = rng.standard_normal((n, dim))
    norms = np.linalg.norm(direction, axis=1, keepdims=True)
    # a zero draw has probability zero, but keep it on the axis rather than NaN
    norms[norms == 0] = 1.0
    r = radius * rng.random((n, 1)) ** (1.0 / dim)
    return direction / norms * r


def generate(spec):
    """Draw the initial ensemble described by ``spec``.

    Mixture agents are laid out component by component, component 0 first.
    """
    rng = np.random.default_rng(spec.seed)
    if spec.kind == "ball":
        return Ensemble(uniform_ball(rng, spec.n_agents, spec.dim, spec.radius))
    h = spec.mean_box_halfwidth
    means = rng.uniform(-h, h, size=(spec.n_components, spec.dim))
    counts = component_counts(spec.n_agents, spec.n_components)
    centers = np.repeat(means, counts, axis=0)
    noise = rng.standard_normal((spec.n_agents, spec.dim)) * spec.component_std
    return Ensemble(centers + noise)
