"""Command line interface.

    fluidity run --scenario PATH [--seed N] [--out PATH]
    fluidity score LOG [LOG ...] [--format table|csv|json]
    fluidity agents

``run`` exits 0 on a complete episode, 1 when the episode truncated, 2 on a
configuration problem. ``score`` verifies every log by replay before
reporting and exits 3 on an integrity failure, 2 on usage errors. Scores are
ranked by mean responsiveness (ties: smaller absolute index value, then agent
name, then input order); the report also carries a per-run series of
(snapshot index, prefix index, reserve) ready for plotting.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, replace

from .agents import AGENT_KINDS, AgentDescriptor
from .economy import FluidityOrder, FluidityRegime
from .errors import FluidityError, IntegrityError
from .fixedpoint import micro_str
from .harness import RunLog, replay, run_episode
from .runlog import load_run_log, load_scenario, write_run_log


@dataclass(frozen=True, slots=True)
class ReportRow:
    """One scored run, as the report prints it."""

    agent_name: str
    fi_value: float
    mean_responsiveness: float
    order: FluidityOrder
    regime: FluidityRegime
    i1: float
    i2: float
    i3: float
    nc: int
    truncated: bool


def describe_agent(descriptor: AgentDescriptor) -> str:
    """Deterministic display name: kind plus its sorted parameters."""
    if not descriptor.parameters:
        return descriptor.kind
    rendered = ",".join(f"{k}={descriptor.parameters[k]!r}" for k in sorted(descriptor.parameters))
    return f"{descriptor.kind}({rendered})"


def report_row(log: RunLog) -> ReportRow:
    return ReportRow(
        agent_name=describe_agent(log.config.agent),
        fi_value=log.summary.fi_value,
        mean_responsiveness=log.summary.mean_responsiveness,
        order=log.order,
        regime=log.regime,
        i1=log.integrals.i1,
        i2=log.integrals.i2,
        i3=log.integrals.i3,
        nc=log.summary.nc,
        truncated=log.truncated,
    )


def rank_rows(rows: list[tuple[ReportRow, str]]) -> list[tuple[ReportRow, str]]:
    """Total order: responsiveness desc, |fi| asc, agent name, input position."""
    order = sorted(
        range(len(rows)),
        key=lambda i: (
            -rows[i][0].mean_responsiveness,
            abs(rows[i][0].fi_value),
            rows[i][0].agent_name,
            i,
        ),
    )
    return [rows[i] for i in order]


_COLUMNS = (
    "agent",
    "fi_value",
    "mean_responsiveness",
    "order",
    "regime",
    "i1",
    "i2",
    "i3",
    "nc",
    "truncated",
)


def _row_cells(row: ReportRow) -> list[str]:
    return [
        row.agent_name,
        repr(row.fi_value),
        repr(row.mean_responsiveness),
        row.order.value,
        row.regime.kind.value,
        repr(row.i1),
        repr(row.i2),
        repr(row.i3),
        str(row.nc),
        "true" if row.truncated else "false",
    ]


def _series(log: RunLog) -> list[tuple[int, float, str]]:
    return [(s.index, s.prefix_fi, micro_str(s.ledger.reserve)) for s in log.snapshots]


def _emit_table(ranked: list[tuple[ReportRow, str]], logs: dict[str, RunLog], out) -> None:
    cells = [list(_COLUMNS)] + [_row_cells(row) for row, _ in ranked]
    widths = [max(len(r[c]) for r in cells) for c in range(len(_COLUMNS))]
    for line in cells:
        out.write("  ".join(cell.ljust(w) for cell, w in zip(line, widths)).rstrip() + "\n")
    for row, path in ranked:
        out.write(f"\nseries {path}\n")
        out.write("snapshot\tprefix_fi\treserve\n")
        for index, fi, reserve in _series(logs[path]):
            out.write(f"{index}\t{fi!r}\t{reserve}\n")


def _emit_csv(ranked: list[tuple[ReportRow, str]], logs: dict[str, RunLog], out) -> None:
    out.write(",".join(("log",) + _COLUMNS) + "\n")
    for row, path in ranked:
        out.write(",".join([path] + _row_cells(row)) + "\n")
    out.write("\nlog,snapshot,prefix_fi,reserve\n")
    for _, path in ranked:
        for index, fi, reserve in _series(logs[path]):
            out.write(f"{path},{index},{fi!r},{reserve}\n")


def _emit_json(ranked: list[tuple[ReportRow, str]], logs: dict[str, RunLog], out) -> None:
    doc = {
        "rows": [
            {
                "log": path,
                "agent": row.agent_name,
                "fi_value": row.fi_value,
                "mean_responsiveness": row.mean_responsiveness,
                "order": row.order.value,
                "regime": row.regime.kind.value,
                "i1": row.i1,
                "i2": row.i2,
                "i3": row.i3,
                "nc": row.nc,
                "truncated": row.truncated,
            }
            for row, path in ranked
        ],
        "series": {
            path: [
                {"snapshot": index, "prefix_fi": fi, "reserve": reserve}
                for index, fi, reserve in _series(logs[path])
            ]
            for _, path in ranked
        },
    }
    out.write(json.dumps(doc, sort_keys=True, indent=2) + "\n")


def cmd_run(args: argparse.Namespace) -> int:
    try:
        config = load_scenario(args.scenario)
        if args.seed is not None:
            config = replace(config, seed=args.seed)
        log = run_episode(config)
    except FluidityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    write_run_log(log, args.out)
    status = "truncated" if log.truncated else "complete"
    print(
        f"{status}: fi={log.summary.fi_value!r} responsiveness="
        f"{log.summary.mean_responsiveness!r} order={log.order.value} "
        f"regime={log.regime.kind.value} log={args.out}"
    )
    return 1 if log.truncated else 0


def cmd_score(args: argparse.Namespace) -> int:
    rows: list[tuple[ReportRow, str]] = []
    logs: dict[str, RunLog] = {}
    for path in args.logs:
        try:
            log = load_run_log(path)
            replay(log)
        except IntegrityError as exc:
            print(f"integrity failure in {path} at {exc.location}: {exc}", file=sys.stderr)
            return 3
        except FluidityError as exc:
            print(f"error: cannot score {path}: {exc}", file=sys.stderr)
            return 3
        logs[path] = log
        rows.append((report_row(log), path))
    ranked = rank_rows(rows)
    emit = {"table": _emit_table, "csv": _emit_csv, "json": _emit_json}[args.format]
    emit(ranked, logs, sys.stdout)
    return 0


def cmd_agents(_: argparse.Namespace) -> int:
    for kind in sorted(AGENT_KINDS):
        params = AGENT_KINDS[kind]
        rendered = ", ".join(f"{name}={default!r}" for name, default in sorted(params.items()))
        print(f"{kind}: {rendered}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fluidity",
        description="Run and score closed-loop adaptability episodes.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run one scenario and write its run log")
    run_p.add_argument("--scenario", required=True, help="path to a scenario JSON file")
    run_p.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    run_p.add_argument("--out", default="runlog.json", help="where to write the run log")
    run_p.set_defaults(handler=cmd_run)

    score_p = sub.add_parser("score", help="verify and rank run logs")
    score_p.add_argument("logs", nargs="*", help="run log files to score")
    score_p.add_argument(
        "--format", choices=("table", "csv", "json"), default="table", help="report format"
    )
    score_p.set_defaults(handler=cmd_score)

    agents_p = sub.add_parser("agents", help="list built-in agent kinds")
    agents_p.set_defaults(handler=cmd_agents)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "score" and not args.logs:
        print("usage: fluidity score LOG [LOG ...] [--format table|csv|json]", file=sys.stderr)
        print("error: no run logs given", file=sys.stderr)
        return 2
    return args.handler(args)


if __name__ == "__main__":
    sys.exit(main())
