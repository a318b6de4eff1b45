"""Command line front end.

Verbs: ``run`` one scenario, ``compare`` two, ``derive`` a tunnel address
from an IPv4 address, ``decode`` a frame from hex. Scenario arguments name a
built-in (``6to4`` or ``dualstack``) or a scenario file path.

Exit codes: 0 success, 1 usage error, 2 scenario or input validation error,
3 unexpected runtime failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Optional, Sequence

from .addressing import (
    derive_6to4_prefix,
    derive_isatap_address,
    make_ipv4_compatible,
)
from .codec import (
    FrameKind,
    Ipv4Address,
    parse_frame,
    serialize_ipv4_header,
    verify_ipv4_checksum,
)
from .metrics import FlowSummary, compare_scenarios, summarize
from .scenario_io import load_text
from .scenarios import SCENARIO_TEXTS
from .simcore import Scenario, run_simulation

FORMATS = ("table", "csv", "json-lines")


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        raise _UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="transit6",
        description="Simulate IPv6 traffic crossing IPv4 infrastructure.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--format", "-f", choices=FORMATS, default="table")
        p.add_argument("--trace", metavar="PATH", help="write per-frame hex log to PATH")
        p.add_argument("--horizon", type=float, help="stop the simulation at this time (seconds)")
        p.add_argument("--seed", type=int, default=0, help="RNG seed, used only by flows with jitter")
        p.add_argument(
            "--override",
            action="append",
            default=[],
            metavar="KEY=VALUE",
            help="override a scenario value, e.g. flow.h1-to-h2.payload_bytes=64",
        )

    p_run = sub.add_parser("run", help="run one scenario and summarize its flows")
    p_run.add_argument("scenario", help="built-in name (6to4, dualstack) or file path")
    add_common(p_run)

    p_cmp = sub.add_parser("compare", help="run two scenarios and compare matching flows")
    p_cmp.add_argument("scenario_a")
    p_cmp.add_argument("scenario_b")
    add_common(p_cmp)

    p_derive = sub.add_parser("derive", help="derive a transition address from an IPv4 address")
    p_derive.add_argument("kind", choices=("6to4", "isatap", "compatible"))
    p_derive.add_argument("address", help="IPv4 address, dotted decimal")

    p_decode = sub.add_parser("decode", help="decode a frame from hex and dump its fields")
    p_decode.add_argument("hex", help="frame bytes as hex (whitespace allowed)")
    return parser


def _load_scenario(source: str, overrides: Sequence[str]) -> Scenario:
    if source in SCENARIO_TEXTS:
        return load_text(SCENARIO_TEXTS[source], default_name=source, overrides=overrides)
    if not os.path.exists(source):
        builtins = ", ".join(sorted(SCENARIO_TEXTS))
        raise FileNotFoundError(
            f"{source!r} is neither a built-in scenario ({builtins}) nor a file"
        )
    with open(source, "r", encoding="utf-8") as fh:
        text = fh.read()
    return load_text(text, default_name=os.path.basename(source), overrides=overrides)


def _fmt_cell(value) -> str:
    if value is None:
        return "-"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _emit_rows(rows: list[dict], fmt: str, out) -> None:
    if not rows:
        return
    columns = list(rows[0])
    if fmt == "json-lines":
        for row in rows:
            out.write(json.dumps(row) + "\n")
    elif fmt == "csv":
        out.write(",".join(columns) + "\n")
        for row in rows:
            out.write(",".join("" if row[c] is None else _fmt_cell(row[c]) for c in columns) + "\n")
    else:
        cells = [columns] + [[_fmt_cell(row[c]) for c in columns] for row in rows]
        widths = [max(len(r[i]) for r in cells) for i in range(len(columns))]
        for r in cells:
            out.write("  ".join(cell.ljust(w) for cell, w in zip(r, widths)).rstrip() + "\n")


def _summary_rows(summaries: Sequence[FlowSummary]) -> list[dict]:
    return [
        {
            "flow": s.flow_id,
            "injected": s.injected,
            "delivered": s.delivered_count,
            "dropped": s.dropped_count,
            "mean_delay_s": s.mean_delay,
            "min_delay_s": s.min_delay,
            "max_delay_s": s.max_delay,
            "jitter_s": s.jitter,
            "goodput_bps": s.goodput_bps,
            "wire_throughput_bps": s.wire_throughput_bps,
            "overhead_ratio": s.overhead_ratio,
        }
        for s in summaries
    ]


def _run_scenario(scenario: Scenario, args) -> tuple[list, list[str]]:
    trace: list[str] = []
    horizon = args.horizon if args.horizon is not None else scenario.horizon
    records = run_simulation(
        scenario.topology,
        scenario.traffic,
        horizon,
        seed=args.seed,
        trace=trace if args.trace else None,
    )
    return records, trace


def _cmd_run(args) -> int:
    scenario = _load_scenario(args.scenario, args.override)
    records, trace = _run_scenario(scenario, args)
    if args.trace:
        with open(args.trace, "w", encoding="utf-8") as fh:
            fh.writelines(line + "\n" for line in trace)
    _emit_rows(_summary_rows(summarize(records)), args.format, sys.stdout)
    return 0


def _cmd_compare(args) -> int:
    scenario_a = _load_scenario(args.scenario_a, args.override)
    scenario_b = _load_scenario(args.scenario_b, args.override)
    records_a, trace_a = _run_scenario(scenario_a, args)
    records_b, trace_b = _run_scenario(scenario_b, args)
    if args.trace:
        with open(args.trace, "w", encoding="utf-8") as fh:
            fh.writelines(f"a {line}\n" for line in trace_a)
            fh.writelines(f"b {line}\n" for line in trace_b)
    report = compare_scenarios(summarize(records_a), summarize(records_b))
    rows = [
        {
            "flow": r.flow_id,
            "mean_delay_a_s": r.mean_delay_a,
            "mean_delay_b_s": r.mean_delay_b,
            "delay_delta_s": r.delay_delta,
            "goodput_ratio": r.goodput_ratio,
            "overhead_ratio": r.overhead_ratio,
        }
        for r in report.rows
    ]
    _emit_rows(rows, args.format, sys.stdout)
    return 0


def _cmd_derive(args) -> int:
    v4 = Ipv4Address.parse(args.address)
    if args.kind == "6to4":
        print(derive_6to4_prefix(v4))
    elif args.kind == "isatap":
        print(derive_isatap_address(v4))
    else:
        print(make_ipv4_compatible(v4))
    return 0


def _cmd_decode(args) -> int:
    try:
        data = bytes.fromhex("".join(args.hex.split()))
    except ValueError:
        raise ValueError(f"not a hex string: {args.hex!r}") from None
    p = parse_frame(data)
    print(f"frame: {p.frame_kind.value}")
    if p.outer_v4 is not None:
        h = p.outer_v4
        valid = "valid" if verify_ipv4_checksum(serialize_ipv4_header(h)) else "BAD"
        print(
            f"outer: version={h.version} ihl={h.ihl} dscp_ecn={h.dscp_ecn} "
            f"total_length={h.total_length} identification={h.identification} "
            f"flags={h.flags} fragment_offset={h.fragment_offset} ttl={h.ttl} "
            f"protocol={h.protocol} checksum=0x{h.checksum:04x} ({valid}) "
            f"src={h.src} dst={h.dst}"
        )
    if p.v6 is not None:
        h6 = p.v6
        label = "inner" if p.frame_kind is FrameKind.V6_IN_V4 else "ipv6"
        print(
            f"{label}: version={h6.version} traffic_class={h6.traffic_class} "
            f"flow_label={h6.flow_label} payload_length={h6.payload_length} "
            f"next_header={h6.next_header} hop_limit={h6.hop_limit} "
            f"src={h6.src} dst={h6.dst}"
        )
    print(f"payload: {len(p.payload)} bytes")
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "compare":
            return _cmd_compare(args)
        if args.command == "derive":
            return _cmd_derive(args)
        return _cmd_decode(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # pragma: no cover - unexpected failures
        print(f"internal error: {exc}", file=sys.stderr)
        return 3


def entrypoint() -> None:
    sys.exit(main(sys.argv[1:]))
