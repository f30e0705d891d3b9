"""Experiment configuration: sectioned key-value files, env overrides, validation.

The format is INI-style with sections [model], [grid], [solver], [run],
[output], [tolerances]; every key has a documented default, unknown keys and
sections are rejected, and validation reports ALL violations with
field-qualified names.  Environment variables override file values using the
prefix LRK_ plus the uppercased dotted key (LRK_MODEL_ALPHA, LRK_RUN_N_PATHS).
"""

from __future__ import annotations

import configparser
import os
from dataclasses import dataclass, field, fields
from pathlib import Path

from .phasespace import PhaseSpaceGrid
from .spectrum import ModelValidationError, SpectrumModel

SOLVER_KINDS = ("fourier", "mc", "series", "fractional", "schrodinger")


class ConfigError(ValueError):
    """Carries every violation found, not just the first."""

    def __init__(self, violations: list[str]):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


@dataclass(frozen=True)
class ModelBlock:
    d: int = 1
    alpha: float = 0.75
    beta: float = 0.5
    nu: float = 1.0
    a0: float = 1.0
    p_max: float = 1.0


@dataclass(frozen=True)
class GridBlock:
    n_x: int = 256
    n_k: int = 256
    l_x: float = 25.132741228718345  # 8*pi
    l_k: float = 25.132741228718345


@dataclass(frozen=True)
class RunBlock:
    t: float = 1.0
    seed: int = 7
    n_paths: int = 100000
    delta: float = 0.01
    etas: tuple = (1.0, 0.5, 0.25, 0.125)
    epsilons: tuple = (0.5, 0.25, 0.125)
    gamma: float = 0.5
    cutoff_n: int = 10
    n_max: int = 3
    n_potential: int = 64
    n_mixture: int = 32
    input_field: str = ""


@dataclass(frozen=True)
class OutputBlock:
    dir: str = "out"


@dataclass(frozen=True)
class ToleranceBlock:
    """Budgets for the cross-validation pass/fail lines (single source of truth)."""

    mc_rmse_rel: float = 0.015      # RMSE(mc, fourier) vs sup|W0|
    mc_point_rel: float = 0.01     # pointwise floor vs sup|W0|
    stderr_mult: float = 3.0       # statistical tolerance multiplier
    l2_tol: float = 1e-8           # non-expansion slack
    free_transport_tol: float = 1e-6


@dataclass(frozen=True)
class ExperimentConfig:
    model: ModelBlock = field(default_factory=ModelBlock)
    grid: GridBlock = field(default_factory=GridBlock)
    solver: str = "fourier"
    run: RunBlock = field(default_factory=RunBlock)
    output: OutputBlock = field(default_factory=OutputBlock)
    tolerances: ToleranceBlock = field(default_factory=ToleranceBlock)

    def spectrum_model(self) -> SpectrumModel:
        m = self.model
        return SpectrumModel(
            dimension=m.d, a0=m.a0, alpha=m.alpha, beta=m.beta, nu=m.nu, p_max=m.p_max
        )

    def phase_grid(self) -> PhaseSpaceGrid:
        g = self.grid
        return PhaseSpaceGrid(n_x=g.n_x, n_k=g.n_k, L_x=g.l_x, L_k=g.l_k)


_BLOCKS = {
    "model": ModelBlock,
    "grid": GridBlock,
    "run": RunBlock,
    "output": OutputBlock,
    "tolerances": ToleranceBlock,
}


def _convert(raw: str, like, name: str, problems: list[str]):
    try:
        if isinstance(like, bool):
            return raw.lower() in ("1", "true", "yes")
        if isinstance(like, int):
            return int(raw)
        if isinstance(like, float):
            return float(raw)
        if isinstance(like, tuple):
            return tuple(float(tok) for tok in raw.replace(",", " ").split())
        return raw
    except ValueError:
        problems.append(f"{name}: cannot parse {raw!r}")
        return like


def _env_overrides(environ) -> dict[tuple[str, str], str]:
    found = {}
    for key, value in environ.items():
        if not key.startswith("LRK_"):
            continue
        rest = key[4:].lower()
        for section in (*_BLOCKS, "solver"):
            if rest == section and section == "solver":
                found[("solver", "kind")] = value
            elif rest.startswith(section + "_"):
                found[(section, rest[len(section) + 1 :])] = value
    return found


def _validate(cfg: ExperimentConfig, problems: list[str]) -> None:
    m = cfg.model
    if not 0.5 < m.alpha < 1.0:
        problems.append(f"model.alpha: {m.alpha} outside the open interval (1/2, 1)")
    if not 0.0 < m.beta <= 0.5:
        problems.append(f"model.beta: {m.beta} outside (0, 1/2]")
    if m.nu <= 0:
        problems.append("model.nu: must be positive")
    if m.a0 < 0:
        problems.append("model.a0: must be nonnegative")
    if m.p_max <= 0:
        problems.append("model.p_max: must be positive")
    if m.d < 1:
        problems.append("model.d: must be a positive integer")
    if 0.5 < m.alpha < 1.0 and 0.0 < m.beta <= 0.5 and not 1.0 < m.alpha + m.beta < 1.5:
        problems.append(
            f"model.alpha+model.beta: {m.alpha + m.beta} must lie in (1, 3/2)"
        )
    g = cfg.grid
    for nm, n in (("grid.n_x", g.n_x), ("grid.n_k", g.n_k)):
        if n < 2 or n & (n - 1):
            problems.append(f"{nm}: must be a power of two, got {n}")
    if g.l_x <= 0 or g.l_k <= 0:
        problems.append("grid.l_x/grid.l_k: must be positive")
    if cfg.solver not in SOLVER_KINDS:
        problems.append(f"solver.kind: {cfg.solver!r} not one of {SOLVER_KINDS}")
    r = cfg.run
    if r.t < 0:
        problems.append("run.t: must be nonnegative")
    if not 0.0 < r.gamma < 1.0:
        problems.append(f"run.gamma: {r.gamma} outside the open interval (0, 1)")
    if r.seed < 0:
        problems.append("run.seed: must be a nonnegative integer")
    if r.n_paths < 2:
        problems.append("run.n_paths: must be at least 2")
    if r.delta <= 0:
        problems.append("run.delta: must be positive")
    if any(b >= a for a, b in zip(r.etas, r.etas[1:])) or not r.etas:
        problems.append("run.etas: must be a strictly decreasing list")
    if any(b >= a for a, b in zip(r.epsilons, r.epsilons[1:])) or not r.epsilons:
        problems.append("run.epsilons: must be a strictly decreasing list")
    if r.cutoff_n < 1:
        problems.append("run.cutoff_n: must be a positive integer")
    if not 0 <= r.n_max <= 3:
        problems.append("run.n_max: must lie in 0..3")
    if r.n_potential < 2:
        problems.append("run.n_potential: must be at least 2")
    if r.n_mixture < 1:
        problems.append("run.n_mixture: must be at least 1")


def parse_config(path=None, environ=None) -> ExperimentConfig:
    """Load, override from the environment, and validate; raise with all violations."""
    environ = os.environ if environ is None else environ
    problems: list[str] = []
    raw: dict[tuple[str, str], str] = {}
    if path is not None:
        p = Path(path)
        if not p.exists():
            raise ConfigError([f"config file not found: {p}"])
        parser = configparser.ConfigParser()
        parser.optionxform = str.lower
        parser.read(p)
        for section in parser.sections():
            if section == "solver":
                for key, value in parser.items(section):
                    if key != "kind":
                        problems.append(f"solver.{key}: unknown key")
                    else:
                        raw[("solver", "kind")] = value
                continue
            if section not in _BLOCKS:
                problems.append(f"[{section}]: unknown section")
                continue
            known = {f.name for f in fields(_BLOCKS[section])}
            for key, value in parser.items(section):
                if key not in known:
                    problems.append(f"{section}.{key}: unknown key")
                else:
                    raw[(section, key)] = value
    raw.update(_env_overrides(environ))

    blocks = {}
    for section, cls in _BLOCKS.items():
        defaults = cls()
        kwargs = {}
        for f in fields(cls):
            if (section, f.name) in raw:
                kwargs[f.name] = _convert(
                    raw[(section, f.name)], getattr(defaults, f.name), f"{section}.{f.name}", problems
                )
        blocks[section] = cls(**kwargs)
    solver = raw.get(("solver", "kind"), "fourier")
    cfg = ExperimentConfig(
        model=blocks["model"],
        grid=blocks["grid"],
        solver=solver,
        run=blocks["run"],
        output=blocks["output"],
        tolerances=blocks["tolerances"],
    )
    _validate(cfg, problems)
    if not problems:
        try:
            cfg.spectrum_model()
        except ModelValidationError as exc:
            problems.append(f"model: {exc}")
    if problems:
        raise ConfigError(problems)
    return cfg


def config_echo(cfg: ExperimentConfig) -> str:
    """Resolved configuration in the same sectioned format (for the manifest)."""
    lines = []
    for section, cls in _BLOCKS.items():
        lines.append(f"[{section}]")
        block = getattr(cfg, section)
        for f in fields(cls):
            val = getattr(block, f.name)
            if isinstance(val, tuple):
                val = " ".join(repr(v) for v in val)
            lines.append(f"{f.name} = {val}")
        if section == "grid":
            lines.append("[solver]")
            lines.append(f"kind = {cfg.solver}")
        lines.append("")
    return "\n".join(lines)
