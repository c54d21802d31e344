"""Project files tying models, simulation configs, requirements and obligations together."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import VoveError
from ..model.machine import load_machine
from ..sim.config import load_sim_config
from ..space import DEFAULT_LIMIT
from .checker import LENIENT, STRICT, semantic_check
from .document import parse_vo_file
from .evaluate import Env, Evaluator
from .report import EvalReport
from .requirements import parse_requirements

_KEYS = {"models", "sim_configs", "requirements", "obligations", "limits", "seed", "mode",
         "output"}


class ProjectError(VoveError):
    pass


@dataclass
class ProjectConfig:
    root: Path
    models: list
    sim_configs: list = field(default_factory=list)
    requirements: str | None = None
    obligations: str | None = None
    max_states: int = DEFAULT_LIMIT
    sim_runs: int = 1000
    seed: int = 0
    mode: str = STRICT
    output: str = "out"

    def path(self, rel: str) -> Path:
        return self.root / rel


def parse_project(text: str, root: Path) -> ProjectConfig:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ProjectError(f"project file is not valid JSON: {e}") from None
    unknown = set(data) - _KEYS
    if unknown:
        raise ProjectError(f"unknown project keys: {', '.join(sorted(unknown))}")
    limits = data.get("limits", {})
    cfg = ProjectConfig(
        root=root,
        models=list(data.get("models", [])),
        sim_configs=list(data.get("sim_configs", [])),
        requirements=data.get("requirements"),
        obligations=data.get("obligations"),
        max_states=int(limits.get("max_states", DEFAULT_LIMIT)),
        sim_runs=int(limits.get("sim_runs", 1000)),
        seed=int(data.get("seed", 0)),
        mode=data.get("mode", STRICT),
        output=data.get("output", "out"),
    )
    if cfg.max_states <= 0 or cfg.sim_runs <= 0:
        raise ProjectError("limits must be positive")
    if cfg.mode not in (STRICT, LENIENT):
        raise ProjectError(f"mode must be {STRICT} or {LENIENT}")
    for rel in cfg.models + cfg.sim_configs + [cfg.requirements, cfg.obligations]:
        if rel is not None and not cfg.path(rel).is_file():
            raise ProjectError(f"missing file: {rel}")
    return cfg


def load_project_config(path) -> ProjectConfig:
    path = Path(path)
    return parse_project(path.read_text(encoding="utf-8"), path.parent)


@dataclass
class Project:
    config: ProjectConfig
    env: Env
    vts: dict
    vos: list
    requirements: list | None

    def check(self) -> list:
        return semantic_check(self.vos, self.vts, self.env.mode, self.requirements)

    def evaluate(self, only=None) -> EvalReport:
        ev = Evaluator(self.env, self.vts, self.requirements, self.vos)
        results = [ev.evaluate(vo) for vo in self.vos if only is None or vo.id in only]
        settings = {"mode": self.env.mode, "seed": self.env.seed, "max_states": self.env.limit,
                    "sim_runs": self.env.runs}
        return EvalReport(results, self.check(), settings)


def load_project(cfg: ProjectConfig, seed: int | None = None, mode: str | None = None,
                 limit: int | None = None, runs: int | None = None) -> Project:
    """Load every artifact; keyword arguments override the file's settings."""
    machines = {}
    for rel in cfg.models:
        m = load_machine(cfg.path(rel))
        machines[m.name] = m
    sims = {Path(rel).stem: load_sim_config(cfg.path(rel)) for rel in cfg.sim_configs}
    artifacts = {**{n: "machine" for n in machines}, **{n: "sim" for n in sims}}
    reqs = None
    if cfg.requirements:
        reqs = parse_requirements(cfg.path(cfg.requirements).read_text(encoding="utf-8"))
    vts, vos = {}, []
    if cfg.obligations:
        doc = parse_vo_file(cfg.path(cfg.obligations).read_text(encoding="utf-8"), artifacts)
        vts, vos = doc.vts, doc.vos
    env = Env(machines, sims,
              limit=cfg.max_states if limit is None else limit,
              runs=cfg.sim_runs if runs is None else runs,
              seed=cfg.seed if seed is None else seed,
              mode=cfg.mode if mode is None else mode)
    return Project(cfg, env, vts, vos, reqs)
