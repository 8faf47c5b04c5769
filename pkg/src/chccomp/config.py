"""Pipeline configuration: one YAML document, every field optional."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

import yaml

from .runner import PRESETS, ResourceLimits, SolverConfig
from .selection import SelectionPolicy

_UNITS = {"": 1, "B": 1, "K": 1 << 10, "KIB": 1 << 10, "M": 1 << 20, "MIB": 1 << 20,
          "G": 1 << 30, "GIB": 1 << 30, "KB": 10**3, "MB": 10**6, "GB": 10**9}


class ConfigError(ValueError):
    pass


def parse_memory(value) -> int:
    """Bytes from an integer or a string such as ``64GiB`` or ``512M``."""
    if isinstance(value, int):
        return value
    m = re.fullmatch(r"\s*(\d+(?:\.\d+)?)\s*([A-Za-z]*)\s*", str(value))
    if not m or m.group(2).upper() not in _UNITS:
        raise ConfigError(f"cannot read memory size {value!r}")
    return int(float(m.group(1)) * _UNITS[m.group(2).upper()])


@dataclass
class PipelineConfig:
    benchmark_roots: list[str] = field(default_factory=list)
    out_dir: Optional[str] = None
    solver_registry: Optional[str] = None
    solvers: list[SolverConfig] = field(default_factory=list)
    policy: SelectionPolicy = field(default_factory=SelectionPolicy)
    presets: dict[str, ResourceLimits] = field(default_factory=lambda: dict(PRESETS))
    parallelism: int = 1
    seed: int = 0
    # per-subcommand option defaults, e.g. {"format": {"merge_queries": False}}
    command_defaults: dict[str, dict[str, Any]] = field(default_factory=dict)

    def preset(self, name: str) -> ResourceLimits:
        try:
            return self.presets[name]
        except KeyError:
            raise ConfigError(f"unknown preset {name!r}; known: {', '.join(sorted(self.presets))}") from None


def _solver(entry: dict) -> SolverConfig:
    try:
        command = entry["command"]
        if isinstance(command, str):
            command = command.split()
        return SolverConfig(str(entry["solver"]), str(entry.get("configuration", "default")),
                            tuple(str(a) for a in command), bool(entry.get("hors_concours", False)))
    except KeyError as exc:
        raise ConfigError(f"solver entry lacks {exc}") from None
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def load_solvers(path) -> list[SolverConfig]:
    data = yaml.safe_load(Path(path).read_text(encoding="utf-8")) or []
    if isinstance(data, dict):
        data = data.get("solvers", [])
    return [_solver(e) for e in data]


def _policy(section: dict[str, Any], seed: int) -> SelectionPolicy:
    fr = section.get("fractions", {})
    single = section.get("single_fractions", {})
    caps = {}
    for track, repos in (section.get("caps") or {}).items():
        for repo, cap in (repos or {}).items():
            caps[(str(track), str(repo))] = int(cap)
    defaults = SelectionPolicy()
    return SelectionPolicy(
        caps=caps,
        f_a=fr.get("A", defaults.f_a),
        f_bw=fr.get("Bw", defaults.f_bw),
        f_br=fr.get("Br", defaults.f_br),
        f_c=fr.get("C", defaults.f_c),
        f_solved=single.get("solved", defaults.f_solved),
        f_unsolved=single.get("unsolved", defaults.f_unsolved),
        seed=int(section.get("seed", seed)),
        rating_timeout=float(section.get("rating_timeout", defaults.rating_timeout)),
        take_all=frozenset(section.get("take_all", defaults.take_all)),
        single_solver=frozenset(section.get("single_solver", defaults.single_solver)),
    )


def _command_defaults(section) -> dict[str, dict[str, Any]]:
    if not section:
        return {}
    if not isinstance(section, dict) or not all(isinstance(v, dict) for v in section.values()):
        raise ConfigError("defaults must map subcommand names to option mappings")
    return {str(cmd): {str(k).replace("-", "_"): v for k, v in opts.items()}
            for cmd, opts in section.items()}


def config_from_dict(data: dict[str, Any], base_dir=None) -> PipelineConfig:
    data = data or {}
    seed = int(data.get("seed", 0))
    paths = data.get("paths", {}) or {}
    presets = dict(PRESETS)
    for name, p in (data.get("presets") or {}).items():
        if name in PRESETS:
            raise ConfigError(f"preset {name!r} is fixed and cannot be redefined")
        try:
            presets[name] = ResourceLimits(float(p["cpu"]), float(p["wall"]), parse_memory(p["memory"]))
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"preset {name!r}: {exc}") from None
    registry = paths.get("solvers")
    if registry and base_dir is not None:
        registry = str(Path(base_dir, registry))
    solvers = [_solver(e) for e in data.get("solvers", [])]
    if registry:
        solvers += load_solvers(registry)
    try:
        cfg = PipelineConfig(
            benchmark_roots=[str(p) for p in paths.get("benchmarks", [])],
            out_dir=paths.get("out_dir"),
            solver_registry=registry,
            solvers=solvers,
            policy=_policy(data.get("selection", {}) or {}, seed),
            presets=presets,
            parallelism=int(data.get("parallelism", 1)),
            seed=seed,
            command_defaults=_command_defaults(data.get("defaults")),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    if cfg.parallelism < 1:
        raise ConfigError("parallelism must be at least 1")
    return cfg


def load_config(path=None) -> PipelineConfig:
    if path is None:
        return PipelineConfig()
    p = Path(path)
    try:
        data = yaml.safe_load(p.read_text(encoding="utf-8"))
    except yaml.YAMLError as exc:
        raise ConfigError(f"{p}: {exc}") from exc
    if data is not None and not isinstance(data, dict):
        raise ConfigError(f"{p}: top level must be a mapping")
    return config_from_dict(data or {}, base_dir=p.parent)
