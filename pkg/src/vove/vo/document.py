"""``.vo`` files: task declarations and obligations, one per line.

Lines starting with whitespace continue the previous declaration, and
``#`` at the start of a line marks a comment. A line is a task when its
header has the ``ID/Context/TECHNIQUE:`` shape, otherwise an obligation.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from ..errors import DuplicateName, SyntaxError_
from .expr import VoDecl, parse_vo
from .tasks import VtDecl, parse_vt

_VT_HEAD = re.compile(r"^\s*[A-Za-z][\w.\-]*\s*/[^:]*/\s*[A-Za-z]+\s*:")


@dataclass
class VoDocument:
    vts: dict = field(default_factory=dict)  # id -> VtDecl, declaration order
    vos: list = field(default_factory=list)


def _entries(text: str) -> list[tuple[int, str]]:
    out: list[list] = []
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        if line[0].isspace() and out:
            out[-1][1] += "\n" + line
        else:
            out.append([lineno, line])
    return [(n, s) for n, s in out]


def parse_vo_file(text: str, artifacts: dict | None = None) -> VoDocument:
    doc = VoDocument()
    vo_ids: dict = {}
    for lineno, entry in _entries(text):
        if _VT_HEAD.match(entry):
            vt: VtDecl = parse_vt(entry, artifacts, lineno)
            if vt.id in doc.vts:
                raise DuplicateName(f"task {vt.id} already declared on line {doc.vts[vt.id].line}",
                                    lineno, 1)
            doc.vts[vt.id] = vt
        else:
            try:
                vo: VoDecl = parse_vo(entry, lineno)
            except SyntaxError_ as e:
                raise SyntaxError_(e.diagnostics[0].message, lineno, e.column) from None
            if vo.id in vo_ids:
                raise DuplicateName(f"obligation {vo.id} already declared on line {vo_ids[vo.id]}",
                                    lineno, 1)
            vo_ids[vo.id] = lineno
            doc.vos.append(vo)
    return doc
