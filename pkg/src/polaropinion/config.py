"""INI-style run configuration with strict key checking.

Example::

    [model]
    p = 2

    [init]
    kind = gaussian_mixture
    n_agents = 100000
    n_components = 5
    seed = 7

    [solver]
    dt = 0.02
    sample_size = 1000
    epochs = 600

    [output]
    dir = runs/fig1-mixture
"""

import configparser
from dataclasses import dataclass, field

from .dynamics import RunConfig
from .init import InitSpec


class ConfigError(ValueError):
    pass


def _as_bool(text):
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _int_list(text):
    return [int(v) for v in text.replace(",", " ").split()]


def _float_list(text):
    return [float(v) for v in text.replace(",", " ").split()]


def _opt_int(text):
    return None if text.strip().lower() in ("", "none", "n") else int(text)


@dataclass
class OutputSpec:
    dir: str = "run-output"
    # absolute merge radius; None means 1e-3 of the initial diameter
    merge_radius: float | None = None
    histogram_grid: int = 0


@dataclass
class SweepSpec:
    sample_sizes: list = field(default_factory=lambda: [50, 250, 1000, 2500])
    dts: list = field(default_factory=lambda: [0.02, 0.01])
    seeds: list = field(default_factory=lambda: [0, 1, 2])


@dataclass
class BenchSpec:
    sample_sizes: list = field(default_factory=lambda: [500, 1000, 2000])
    n_agents: list = field(default_factory=lambda: [100_000])
    epochs: int = 150


@dataclass
class DatasetSpec:
    count: int = 100
    split: float = 0.025
    seed: int = 0
    n_agents: int = 100
    radius: float = 10.0
    epochs: int = 200
    dt: float = 0.05
    p: float = 2.0
    grid_sizes: list = field(default_factory=lambda: [64, 32])
    histograms: bool = False


# section -> key -> parser; everything else is rejected
SCHEMA = {
    "model": {"p": float},
    "init": {
        "kind": str,
        "n_agents": int,
        "dim": int,
        "n_components": int,
        "component_std": float,
        "mean_box_halfwidth": float,
        "radius": float,
        "seed": int,
    },
    "solver": {
        "dt": float,
        "sample_size": _opt_int,
        "epochs": int,
        "seed": int,
        "friend_search": str,
        "sampling": str,
        "convergence_tol": float,
        "stop_at_convergence": _as_bool,
    },
    "output": {
        "dir": str,
        "merge_radius": lambda t: None if t.strip().lower() in ("", "none") else float(t),
        "histogram_grid": int,
    },
    "sweep": {"sample_sizes": _int_list, "dts": _float_list, "seeds": _int_list},
    "bench": {"sample_sizes": _int_list, "n_agents": _int_list, "epochs": int},
    "dataset": {
        "count": int,
        "split": float,
        "seed": int,
        "n_agents": int,
        "radius": float,
        "epochs": int,
        "dt": float,
        "p": float,
        "grid_sizes": _int_list,
        "histograms": _as_bool,
    },
}


@dataclass
class Config:
    init: InitSpec
    run: RunConfig
    output: OutputSpec
    sweep: SweepSpec
    bench: BenchSpec
    dataset: DatasetSpec

    def to_sections(self):
        """Plain nested dict that :func:`from_sections` turns back into this config."""
        solver = {k: v for k, v in self.run.to_dict().items() if k in SCHEMA["solver"]}
        return {
            "model": {"p": self.run.p},
            "init": self.init.to_dict(),
            "solver": solver,
            "output": dict(vars(self.output)),
            "sweep": dict(vars(self.sweep)),
            "bench": dict(vars(self.bench)),
            "dataset": dict(vars(self.dataset)),
        }


def parse_sections(parser):
    out = {}
    for section in parser.sections():
        if section not in SCHEMA:
            raise ConfigError(f"unknown section [{section}]")
        out[section] = {}
        for key, raw in parser.items(section):
            if key not in SCHEMA[section]:
                raise ConfigError(f"unknown key {key!r} in [{section}]")
            try:
                out[section][key] = SCHEMA[section][key](raw)
            except ValueError as exc:
                raise ConfigError(f"bad value for {section}.{key}: {exc}") from None
    return out


def from_sections(sections, seed=None):
    """Build a validated Config; ``seed`` overrides both init and solver seeds."""
    for section, values in sections.items():
        if section not in SCHEMA:
            raise ConfigError(f"unknown section [{section}]")
        unknown = set(values) - set(SCHEMA[section])
        if unknown:
            raise ConfigError(f"unknown keys {sorted(unknown)} in [{section}]")
    init_kw = dict(sections.get("init", {}))
    solver_kw = dict(sections.get("solver", {}))
    if seed is not None:
        init_kw["seed"] = seed
        solver_kw["seed"] = seed
    try:
        init = InitSpec(**init_kw)
        run = RunConfig(
            n_agents=init.n_agents,
            dim=init.dim,
            p=sections.get("model", {}).get("p", 2.0),
            **solver_kw,
        )
        output = OutputSpec(**sections.get("output", {}))
        sweep = SweepSpec(**sections.get("sweep", {}))
        bench = BenchSpec(**sections.get("bench", {}))
        dataset = DatasetSpec(**sections.get("dataset", {}))
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
    return Config(init, run, output, sweep, bench, dataset)


def load(path, seed=None):
    parser = configparser.ConfigParser(interpolation=None, default_section="__none__")
    parser.optionxform = str
    try:
        with open(path, encoding="utf-8") as fh:
            parser.read_file(fh)
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return from_sections(parse_sections(parser), seed=seed)

