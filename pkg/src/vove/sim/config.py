"""Simulation configuration: timed, probabilistic activation chains."""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction

from ..errors import BadProbabilitySum, SimConfigError, SyntaxError_, UnknownActivation

INIT_ACTIVATION = "$initialise_machine"
_DIRECT_KEYS = {"id", "execute", "after", "activating"}
_CHOICE_KEYS = {"id", "chooseActivation"}


@dataclass(frozen=True)
class DirectActivation:
    id: str
    execute: str
    after: int = 0
    activating: tuple[str, ...] = ()


@dataclass(frozen=True)
class ChoiceActivation:
    id: str
    choices: tuple[tuple[str, Fraction], ...]


@dataclass(frozen=True)
class SimConfig:
    activations: tuple

    def get(self, aid: str):
        for a in self.activations:
            if a.id == aid:
                return a
        raise UnknownActivation(f"unknown activation {aid}")

    @property
    def by_id(self) -> dict:
        return {a.id: a for a in self.activations}


def _prob(text, aid: str) -> Fraction:
    try:
        if isinstance(text, float):
            text = repr(text)
        p = Fraction(str(text))
    except (ValueError, ZeroDivisionError):
        raise SimConfigError(f"{aid}: bad probability {text!r}") from None
    if p < 0 or p > 1:
        raise SimConfigError(f"{aid}: probability {text} outside [0, 1]")
    return p


def parse_sim_config(text: str) -> SimConfig:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise SyntaxError_(f"invalid JSON: {e.msg}", e.lineno, e.colno) from None
    if not isinstance(data, dict) or set(data) != {"activations"}:
        raise SimConfigError(
            "the configuration must be an object with exactly the key 'activations'")
    acts = []
    seen = set()
    for raw in data["activations"]:
        if not isinstance(raw, dict) or "id" not in raw:
            raise SimConfigError("every activation needs an 'id'")
        aid = raw["id"]
        if aid in seen:
            raise SimConfigError(f"duplicate activation id {aid}")
        seen.add(aid)
        keys = set(raw)
        if "chooseActivation" in raw:
            if keys - _CHOICE_KEYS:
                raise SimConfigError(f"{aid}: unknown key(s) {sorted(keys - _CHOICE_KEYS)}")
            choices = tuple((t, _prob(p, aid)) for t, p in raw["chooseActivation"].items())
            total = sum(p for _, p in choices)
            if abs(total - 1) > Fraction(1, 10**9):
                raise BadProbabilitySum(f"{aid}: probabilities sum to {float(total)}")
            acts.append(ChoiceActivation(aid, choices))
        else:
            if keys - _DIRECT_KEYS:
                raise SimConfigError(f"{aid}: unknown key(s) {sorted(keys - _DIRECT_KEYS)}")
            if "execute" not in raw:
                raise SimConfigError(f"{aid}: needs 'execute' or 'chooseActivation'")
            after = raw.get("after", 0)
            if isinstance(after, bool) or not isinstance(after, int) or after < 0:
                raise SimConfigError(f"{aid}: 'after' must be a non-negative integer")
            act = raw.get("activating", [])
            act = (act,) if isinstance(act, str) else tuple(act)
            acts.append(DirectActivation(aid, raw["execute"], after, act))
    cfg = SimConfig(tuple(acts))
    ids = cfg.by_id
    if INIT_ACTIVATION not in ids:
        raise UnknownActivation(f"missing activation {INIT_ACTIVATION}")
    for a in acts:
        refs = a.activating if isinstance(a, DirectActivation) else tuple(t for t, _ in a.choices)
        for r in refs:
            if r not in ids:
                raise UnknownActivation(f"{a.id} refers to unknown activation {r}")
    return cfg


def load_sim_config(path) -> SimConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_sim_config(fh.read())
