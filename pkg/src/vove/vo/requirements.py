"""Requirements files: one ``ID: prose`` entry per line."""

from __future__ import annotations

import re
from dataclasses import dataclass

from ..errors import DuplicateName, SyntaxError_

_LINE = re.compile(r"^(?P<id>[A-Za-z][\w.\-]*)\s*:\s*(?P<prose>.*)$")


@dataclass(frozen=True)
class Requirement:
    id: str
    kind: str
    prose: str


def requirement_kind(rid: str) -> str:
    """Tag derived from the id: ``FUN5`` -> FUN, ``PROB-TIM1`` -> PROB-TIM, ``COV-LIFT`` -> COV."""
    stem = re.sub(r"[\d.]+$", "", rid)
    if stem == rid and "-" in rid:
        stem = rid.split("-", 1)[0]
    return stem or rid


def parse_requirements(text: str) -> list[Requirement]:
    """Indented lines continue the previous entry; ``#`` starts a comment line."""
    entries: list[list] = []
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        if line[0].isspace():
            if not entries:
                raise SyntaxError_("continuation line before the first requirement", lineno, 1)
            entries[-1][2] += " " + line.strip()
            continue
        m = _LINE.match(line.rstrip())
        if not m:
            raise SyntaxError_("expected 'ID: text'", lineno, 1)
        entries.append([m.group("id"), lineno, m.group("prose")])
    seen: dict = {}
    out = []
    for rid, lineno, prose in entries:
        if rid in seen:
            raise DuplicateName(f"requirement {rid} already defined on line {seen[rid]}", lineno, 1)
        seen[rid] = lineno
        out.append(Requirement(rid, requirement_kind(rid), prose))
    return out
