"""Command-line front end: ``vove check|explore|sim|animate|report``."""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .check.replay import format_trace
from .check.verdict import SUCCESS
from .errors import VoveError
from .lexer import TokenStream
from .model.ast import show_pred
from .model.machine import INIT, ROOT, compile_pred, initial_states, load_machine, successors
from .model.parser import parse_pred
from .sim.config import load_sim_config
from .sim.engine import Condition, monte_carlo
from .sim.stats import simulation_statistics, success_count
from .space import DEFAULT_LIMIT, StateSpace, TraceStep, statistics, table_csv, to_dot
from .vo.checker import LENIENT, STRICT
from .vo.project import load_project, load_project_config
from .vo.report import to_json, to_text
from .vo.tasks import ParamParser

SEED_ENV = "VOVE_SEED"


def _seed(args, default: int) -> int:
    """--seed wins over VOVE_SEED, which wins over the project file."""
    if args.seed is not None:
        return args.seed
    env = os.environ.get(SEED_ENV)
    if env:
        try:
            return int(env)
        except ValueError:
            raise VoveError(f"{SEED_ENV} must be an integer, got {env!r}") from None
    return default


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(text)


# ---------------------------------------------------------------------- check

def cmd_check(args, out=None, err=None) -> int:
    out, err = out or sys.stdout, err or sys.stderr
    cfg = load_project_config(args.project)
    project = load_project(cfg, seed=_seed(args, cfg.seed), mode=args.mode,
                           limit=args.limit, runs=args.runs)
    for d in project.check():
        print(str(d), file=err)
    report = project.evaluate(only=set(args.only) if args.only else None)
    text = to_json(report, project.vts)
    out_dir = Path(args.out) if args.out else cfg.path(cfg.output)
    _write(out_dir / "report.json", text)
    if args.format == "json":
        out.write(text)
    else:
        out.write(to_text(report))
    return 0 if report.ok else 1


# -------------------------------------------------------------------- explore

def explore_stats(space: StateSpace) -> dict:
    st = statistics(space)
    table = {"States": st["Number of States"], "Transitions": st["Number of Transitions"],
             "Deadlocked": st["Deadlocked States"], "Unexplored": st["Unexplored States"]}
    table.update((k, v) for k, v in st.items() if k not in (
        "Number of States", "Number of Transitions", "Deadlocked States", "Unexplored States"))
    return table


def cmd_explore(args, out=None, err=None) -> int:
    out, err = out or sys.stdout, err or sys.stderr
    m = load_machine(args.model)
    space = StateSpace(m)
    status = 0
    try:
        space.explore(args.limit or DEFAULT_LIMIT)
    except VoveError as e:
        print(f"warning: {e}", file=err)
        status = 1
    table = explore_stats(space)
    out_dir = Path(args.out or ".")
    dot = Path(args.dot) if args.dot else out_dir / f"{m.name}.dot"
    stats = Path(args.stats) if args.stats else out_dir / f"{m.name}_stats.csv"
    _write(dot, to_dot(space, m.name))
    csv = table_csv(table)
    _write(stats, csv)
    if args.format == "json":
        out.write(json.dumps(table, indent=2) + "\n")
    else:
        out.write(csv)
    return status


# ------------------------------------------------------------------------ sim

def _parse_condition(text: str) -> Condition:
    p = ParamParser("sim", text, 0)
    c = p.condition()
    p.done()
    return c


def _parse_property(text: str) -> tuple:
    p = ParamParser("sim", text, 0)
    prop = p.prop()
    p.done()
    return prop


def cmd_sim(args, out=None, err=None) -> int:
    out, err = out or sys.stdout, err or sys.stderr
    m = load_machine(args.model)
    cfg = load_sim_config(args.simcfg)
    runs = 1000 if args.runs is None else args.runs
    if runs < 0:
        raise VoveError("--runs must not be negative")
    start = _parse_condition(args.start)
    end = _parse_condition(args.end)
    rs = monte_carlo(m, cfg, runs, start, end, _seed(args, 0))
    table = {f"{kind}:{op}": n for (kind, op), n in simulation_statistics(rs).items()}
    summary = {"runs": runs, "digest": rs.digest()}
    if args.property:
        prop = _parse_property(args.property)
        k = success_count(rs, prop)
        summary["successes"] = k
        summary["success_fraction"] = round(k / runs, 6) if runs else None
    summary.update(table)
    out_dir = Path(args.out or ".")
    _write(out_dir / "runs.csv", rs.to_csv())
    _write(out_dir / "sim_stats.csv", table_csv(summary))
    if args.format == "json":
        out.write(json.dumps(summary, indent=2) + "\n")
    else:
        out.write(table_csv(summary))
    return 0


# -------------------------------------------------------------------- animate

class Animator:
    """Interactive walk through a machine's transitions.

    The history is a list of (label, state) steps starting at the root; a
    step can carry a postcondition recorded with ``assert``.
    """

    def __init__(self, m):
        self.m = m
        self.steps: list = []  # [label, state, post]
        inits = initial_states(m)
        if len(inits) == 1:
            self.steps.append([INIT, inits[0], None])

    @property
    def current(self):
        return self.steps[-1][1] if self.steps else ROOT

    def options(self) -> list:
        if self.current is ROOT:
            return [(INIT, s) for s in initial_states(self.m)]
        return successors(self.m, self.current)

    def fire(self, n: int):
        opts = self.options()
        if not 1 <= n <= len(opts):
            raise VoveError(f"no event number {n}; choose 1..{len(opts)}")
        label, dst = opts[n - 1]
        self.steps.append([label, dst, None])
        return label

    def back(self) -> bool:
        if len(self.steps) <= 1:
            return False
        self.steps.pop()
        return True

    def record_assert(self, text: str) -> None:
        if not self.steps:
            raise VoveError("nothing fired yet")
        pred = parse_pred(TokenStream.of(text))
        fn = compile_pred(self.m, pred, {})
        if not fn(self.current.values, ()):
            raise VoveError(f"{show_pred(pred)} does not hold in the current state")
        self.steps[-1][2] = pred

    def trace_text(self) -> str:
        out = []
        for label, _, post in self.steps:
            if label.op == INIT.op:
                continue
            out.append(TraceStep(label.op, tuple(label.args), post))
        return format_trace(out)


_HELP = """commands:
  fire N | N         fire event number N from the menu
  back               undo the last step
  assert PRED        record PRED as postcondition of the last step
  save-trace PATH    write the trace (one step per line)
  state | help | quit"""


def _menu(an: Animator, out) -> None:
    cur = an.current
    print(f"state: {cur.show() if cur is not ROOT else '<root>'}", file=out)
    opts = an.options()
    if not opts:
        print("  (deadlock: no enabled events)", file=out)
    for i, (label, _) in enumerate(opts, 1):
        print(f"  {i}: {label}", file=out)


def cmd_animate(args, inp=None, out=None, err=None) -> int:
    inp, out = inp or sys.stdin, out or sys.stdout
    an = Animator(load_machine(args.model))
    _menu(an, out)
    for line in inp:
        cmd, _, rest = line.strip().partition(" ")
        rest = rest.strip()
        try:
            if not cmd:
                continue
            if cmd in ("quit", "exit"):
                break
            if cmd == "help":
                print(_HELP, file=out)
            elif cmd == "state":
                _menu(an, out)
            elif cmd == "fire" or cmd.isdigit():
                n = rest if cmd == "fire" else cmd
                if not n.isdigit():
                    raise VoveError("usage: fire N")
                print(f"fired {an.fire(int(n))}", file=out)
                _menu(an, out)
            elif cmd == "back":
                if an.back():
                    _menu(an, out)
                else:
                    print("warning: already at the initial state", file=out)
            elif cmd == "assert":
                an.record_assert(rest)
                print("recorded", file=out)
            elif cmd == "save-trace":
                if not rest:
                    raise VoveError("usage: save-trace PATH")
                _write(Path(rest), an.trace_text())
                print(f"saved {rest}", file=out)
            else:
                print(f"unknown command {cmd!r}; type help", file=out)
        except VoveError as e:
            print(f"error: {e}", file=out)
    return 0


# --------------------------------------------------------------------- report

def traceability(data: dict) -> dict:
    """Requirement id -> [(obligation id, status)] from a JSON report."""
    out: dict = {}
    for ob in data["obligations"]:
        for r in ob["validates"]:
            out.setdefault(r, []).append((ob["id"], ob["status"]))
    return dict(sorted(out.items()))


def cmd_report(args, out=None, err=None) -> int:
    out, err = out or sys.stdout, err or sys.stderr
    data = json.loads(Path(args.report).read_text(encoding="utf-8"))
    if data.get("schema") != 1:
        raise VoveError(f"unsupported report schema {data.get('schema')!r}")
    matrix = traceability(data)
    ok = all(ob["status"] == SUCCESS for ob in data["obligations"])
    if args.format == "json":
        out.write(json.dumps({r: [list(x) for x in v] for r, v in matrix.items()},
                             indent=2) + "\n")
    else:
        width = max((len(r) for r in matrix), default=11)
        for r, obs in matrix.items():
            validated = all(s == SUCCESS for _, s in obs)
            detail = ", ".join(f"{i}={s}" for i, s in obs)
            print(f"{r.ljust(width)}  {'validated' if validated else 'OPEN':9}  {detail}",
                  file=out)
        for ob in data["obligations"]:
            if not ob["validates"]:
                print(f"{ob['id']} validates no requirement", file=out)
    return 0 if ok else 1


# ----------------------------------------------------------------------- main

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--limit", type=int, help="maximum number of states")
    common.add_argument("--seed", type=int, help=f"master seed (overrides {SEED_ENV})")
    common.add_argument("--runs", type=int, help="number of simulation runs")
    mode = common.add_mutually_exclusive_group()
    mode.add_argument("--strict", dest="mode", action="store_const", const=STRICT)
    mode.add_argument("--lenient", dest="mode", action="store_const", const=LENIENT)
    common.add_argument("--out", help="output directory")
    common.add_argument("--format", choices=("text", "json"), default="text")

    ap = argparse.ArgumentParser(prog="vove", description="Validation obligation engine")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", parents=[common], help="evaluate all obligations of a project")
    p.add_argument("project", help="project JSON file")
    p.add_argument("--only", nargs="+", metavar="VO", help="evaluate only these obligations")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("explore", parents=[common], help="explore a machine's state space")
    p.add_argument("model")
    p.add_argument("--dot", help="DOT output file")
    p.add_argument("--stats", help="statistics CSV file")
    p.set_defaults(func=cmd_explore)

    p = sub.add_parser("sim", parents=[common], help="Monte Carlo simulation")
    p.add_argument("model")
    p.add_argument("simcfg")
    p.add_argument("--start", default="<STEPS, 0>", help="start condition, e.g. '<PRED, x = 1>'")
    p.add_argument("--end", default="<STEPS, 100>", help="end condition, e.g. '<TIME, 30000>'")
    p.add_argument("--property", help="e.g. '<EVENTUALLY, tl_cars = green>'")
    p.set_defaults(func=cmd_sim)

    p = sub.add_parser("animate", parents=[common], help="interactive animator")
    p.add_argument("model")
    p.set_defaults(func=cmd_animate)

    p = sub.add_parser("report", parents=[common], help="traceability view of a JSON report")
    p.add_argument("report")
    p.set_defaults(func=cmd_report)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (VoveError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
