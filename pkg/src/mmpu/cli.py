"""``mmpu`` command-line frontend.

Exit codes: 0 success, 1 usage, 2 parse/validation, 3 row capacity, 4 I/O.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from . import costmodel, reliability
from .crossbar import Crossbar, dump_snapshot, load_snapshot
from .device import DEFAULT_PARAMS, DeviceParams
from .errors import ConfigError, MMPUError, RowCapacityExceeded
from .executor import load_inputs, read_outputs, run
from .isa import emit_trace, parse_trace, validate_trace
from .mapper import Mapping, compile_dag, mapping_report
from .netlist import parse_netlist

EXIT_OK, EXIT_USAGE, EXIT_INVALID, EXIT_CAPACITY, EXIT_IO = 0, 1, 2, 3, 4


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    device: DeviceParams = field(default_factory=lambda: DEFAULT_PARAMS)
    v_g: float = 1.0
    v_iso: float | None = None
    rows: int = 1
    cols: int | None = None
    row_size: int = 64
    k_max: int = 4
    strict: bool = True
    seed: int | None = None
    energy_per_event: float | None = None

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        doc = json.loads(text)
        if not isinstance(doc, dict):
            raise ConfigError("config must be a JSON object")
        known = {f.name for f in fields(cls)}
        unknown = set(doc) - known
        if unknown:
            raise ConfigError(f"unknown config key(s): {sorted(unknown)}")
        dev = doc.pop("device", {})
        bad = set(dev) - {"r_on", "r_off", "v_set", "v_reset"}
        if bad:
            raise ConfigError(f"unknown device key(s): {sorted(bad)}")
        try:
            cfg = cls(device=DeviceParams(**{**asdict(DEFAULT_PARAMS), **dev}), **doc)
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from None
        cfg.check()
        return cfg

    def check(self):
        if not self.v_g > 0:
            raise ConfigError("v_g must be positive")
        if self.v_iso is not None and not 0 <= self.v_iso <= self.v_g:
            raise ConfigError("v_iso must lie in [0, v_g]")
        if self.rows < 1 or self.row_size < 1 or self.k_max < 2:
            raise ConfigError("rows and row_size must be positive, k_max at least 2")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _read(path) -> str:
    return Path(path).read_text()


def _write(path, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _config(args) -> RunConfig:
    cfg = RunConfig.from_json(_read(args.config)) if args.config else RunConfig()
    dev = {k: getattr(args, k) for k in ("r_on", "r_off", "v_set", "v_reset")
           if getattr(args, k, None) is not None}
    if dev:
        try:
            cfg.device = DeviceParams(**{**asdict(cfg.device), **dev})
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
    for name in ("v_g", "v_iso", "rows", "row_size", "k_max", "seed", "energy_per_event"):
        val = getattr(args, name, None)
        if val is not None:
            setattr(cfg, name, val)
    if getattr(args, "no_strict", False):
        cfg.strict = False
    cfg.check()
    return cfg


def _parse_bits(text: str, width: int, what: str) -> list[list[int]]:
    vecs = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].replace(",", " ").replace(" ", "").strip()
        if not line:
            continue
        if set(line) - {"0", "1"} or len(line) != width:
            raise ConfigError(f"{what}: line {lineno}: expected {width} bits, got {raw.strip()!r}")
        vecs.append([int(c) for c in line])
    return vecs


def _bits_text(rows) -> str:
    return "".join("".join(str(int(b)) for b in r) + "\n" for r in rows)


# --- subcommands --------------------------------------------------------------

def cmd_compile(args) -> int:
    cfg = _config(args)
    dag = parse_netlist(_read(args.netlist), args.format)
    nor_dag, trace, mapping = compile_dag(dag, cfg.row_size, k_max=cfg.k_max)
    _write(args.output, emit_trace(trace))
    if args.mapping:
        Path(args.mapping).write_text(mapping_report(mapping, trace))
    print(f"{args.netlist}: {nor_dag.gate_count} NOR gates, {len(trace.ops)} cycles, "
          f"peak {mapping.peak_cells}/{cfg.row_size} cells", file=sys.stderr)
    return EXIT_OK


def _load_mapping(path) -> Mapping | None:
    return Mapping.from_dict(json.loads(_read(path))) if path else None


def _validate(trace, mapping, label) -> bool:
    cells = [(mapping.row, c) for c in mapping.input_cells.values()] if mapping else []
    report = validate_trace(trace, cells)
    if not report.ok:
        for v in report.violations:
            print(f"{label}: {v}", file=sys.stderr)
    return report.ok


def _prepare(args, cfg, trace, mapping):
    """Fresh (or snapshot-loaded) array with inputs written; returns (array, rows)."""
    if getattr(args, "from_snapshot", None):
        array = load_snapshot(_read(args.from_snapshot))
    else:
        rows = max(cfg.rows, trace.rows)
        cols = max(cfg.cols or 0, trace.cols)
        array = Crossbar(rows, cols, cfg.device, v_g=cfg.v_g, v_iso=cfg.v_iso)
    row_set = list(range(cfg.rows)) if trace.declared_row is not None else []
    if getattr(args, "inputs", None):
        if mapping is None:
            raise UsageError("--inputs needs --mapping to locate the input cells")
        vecs = _parse_bits(_read(args.inputs), len(mapping.input_cells), args.inputs)
        if len(vecs) == 1:
            vecs = vecs * len(row_set)
        load_inputs(array, mapping, row_set, vecs)
    return array, row_set


def cmd_run(args) -> int:
    cfg = _config(args)
    trace = parse_trace(_read(args.trace))
    mapping = _load_mapping(args.mapping)
    if cfg.strict and not _validate(trace, mapping, args.trace):
        return EXIT_INVALID
    array, row_set = _prepare(args, cfg, trace, mapping)
    stats = run(trace, array, rows=row_set or None, strict=cfg.strict,
                energy_per_event=cfg.energy_per_event)
    if mapping is not None and mapping.output_cells:
        _write(args.outputs, _bits_text(read_outputs(array, mapping, row_set)))
    else:
        _write(args.outputs, "".join(f"{i} {r} {''.join(map(str, b))}\n" for i, r, b in stats.reads))
    if args.stats:
        Path(args.stats).write_text(stats.to_json())
    sys.stderr.write(stats.to_table())
    return EXIT_OK


def cmd_validate(args) -> int:
    trace = parse_trace(_read(args.trace))
    ok = _validate(trace, _load_mapping(args.mapping), args.trace)
    print("valid" if ok else "invalid")
    return EXIT_OK if ok else EXIT_INVALID


def cmd_margins(args) -> int:
    cfg = _config(args)
    report = reliability.check_margins(cfg.device, cfg.v_g, args.k)
    if args.json:
        _write(args.json, json.dumps(report.to_dict(), indent=2) + "\n")
    if args.json != "-":
        sys.stdout.write(report.to_table())
    return EXIT_OK


def cmd_montecarlo(args) -> int:
    path = Path(args.campaign)
    camp = reliability.Campaign.from_json(path.read_text(), base_dir=path.parent)
    if args.seed is not None:
        camp.seed = args.seed
    if args.trials is not None:
        camp.trials = args.trials
    points = reliability.run_campaign(camp)
    _write(args.csv, reliability.sweep_csv(points))
    if args.json:
        Path(args.json).write_text(json.dumps([p.to_dict() for p in points], indent=2) + "\n")
    for p in points:
        lo, hi = p.stats.wilson_ci95
        print(f"sigma_r={p.sigma_r:<6g} sigma_v={p.sigma_v:<6g} rate={p.stats.failure_rate:.6f} "
              f"ci95=[{lo:.6f}, {hi:.6f}] ({p.stats.failures}/{p.stats.trials})", file=sys.stderr)
    return EXIT_OK


_PIM_FLAGS = {"arrays": "arrays", "rows": "rows_per_array", "frequency": "frequency",
              "cycles": "cycles_per_element", "transfer_cycles": "transfer_cycles"}
_CPU_FLAGS = {"ops_per_element": "ops_per_element", "compute_rate": "compute_rate",
              "bytes_per_element": "bytes_per_element", "bandwidth": "bandwidth"}


def cmd_compare(args) -> int:
    pim_doc, cpu_doc = {}, {}
    if args.config:
        pim, cpu = costmodel.configs_from_json(_read(args.config))
        pim_doc, cpu_doc = asdict(pim), asdict(cpu)
    for flag, key in _PIM_FLAGS.items():
        if getattr(args, flag) is not None:
            pim_doc[key] = getattr(args, flag)
    for flag, key in _CPU_FLAGS.items():
        if getattr(args, flag) is not None:
            cpu_doc[key] = getattr(args, flag)
    try:
        pim = costmodel.PimConfig(**pim_doc)
        cpu = costmodel.CpuConfig(**cpu_doc)
    except TypeError as exc:
        raise UsageError(f"incomplete configuration: {exc}") from None
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    verdict = costmodel.compare(pim, cpu)
    if args.json:
        _write(args.json, verdict.to_json())
    if args.json != "-":
        sys.stdout.write(verdict.to_table())
    if args.sweep:
        name, _, spec = args.sweep.partition("=")
        try:
            lo, hi, num = spec.split(":")
            values = np.linspace(float(lo), float(hi), int(num)).tolist()
        except ValueError:
            raise UsageError("--sweep expects PARAM=start:stop:count") from None
        rows = costmodel.sweep(pim, cpu, _PIM_FLAGS.get(name, _CPU_FLAGS.get(name, name)), values)
        _write(args.csv, costmodel.sweep_csv(rows))
    return EXIT_OK


def cmd_dump(args) -> int:
    cfg = _config(args)
    if args.trace:
        trace = parse_trace(_read(args.trace))
        mapping = _load_mapping(args.mapping)
        if cfg.strict and not _validate(trace, mapping, args.trace):
            return EXIT_INVALID
        array, row_set = _prepare(args, cfg, trace, mapping)
        run(trace, array, rows=row_set or None, strict=cfg.strict)
    elif args.from_snapshot:
        array = load_snapshot(_read(args.from_snapshot))
    else:
        array = Crossbar(cfg.rows, cfg.cols or cfg.row_size, cfg.device, v_g=cfg.v_g, v_iso=cfg.v_iso)
    _write(args.output, dump_snapshot(array))
    return EXIT_OK


# --- argument parsing ---------------------------------------------------------

def _device_flags(p):
    g = p.add_argument_group("device and drive")
    g.add_argument("--ron", dest="r_on", type=float, help="ON resistance in ohms (default 1e3)")
    g.add_argument("--roff", dest="r_off", type=float, help="OFF resistance in ohms (default 1e6)")
    g.add_argument("--vset", dest="v_set", type=float, help="SET threshold in volts, > 0 (default 1.3)")
    g.add_argument("--vreset", dest="v_reset", type=float, help="RESET threshold in volts, < 0 (default -0.3)")
    g.add_argument("--vg", dest="v_g", type=float, help="gate voltage V_G in volts (default 1.0)")
    g.add_argument("--viso", dest="v_iso", type=float, help="isolation voltage (default V_G/2)")


def _common(p):
    p.add_argument("--config", help="RunConfig JSON file; flags override its values")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="mmpu", description="MAGIC crossbar simulator and single-row compiler")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("compile", help="compile a netlist into a single-row trace")
    p.add_argument("netlist", help="netlist file")
    p.add_argument("--format", choices=["structural", "blif"], default="structural",
                   help="netlist grammar (default structural)")
    p.add_argument("--row-size", dest="row_size", type=int, help="cells available in the row (default 64)")
    p.add_argument("--k-max", dest="k_max", type=int, help="maximum NOR fan-in (default 4)")
    p.add_argument("-o", "--output", help="trace output file (default stdout)")
    p.add_argument("--mapping", help="write the mapping report (JSON) here")
    _common(p)
    p.set_defaults(func=cmd_compile)

    p = sub.add_parser("run", help="execute a trace over many rows")
    p.add_argument("trace", help="trace file")
    p.add_argument("--mapping", help="mapping report from compile (locates inputs/outputs)")
    p.add_argument("--inputs", help="one bit vector per row (a single line is broadcast)")
    p.add_argument("--rows", type=int, help="number of rows to execute on (default 1)")
    p.add_argument("--outputs", help="per-row output bits (default stdout)")
    p.add_argument("--stats", help="write StatsReport JSON here")
    p.add_argument("--from", dest="from_snapshot", help="start from an array snapshot")
    p.add_argument("--no-strict", action="store_true", help="skip validation and allow uninitialized outputs")
    p.add_argument("--energy-per-event", dest="energy_per_event", type=float,
                   help="joules per switching event for reporting")
    _device_flags(p)
    _common(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("validate", help="statically check a trace")
    p.add_argument("trace")
    p.add_argument("--mapping", help="mapping report declaring primary-input cells")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("margins", help="MAGIC NOR correctness margins")
    p.add_argument("--k", type=int, default=2, help="NOR fan-in (default 2)")
    p.add_argument("--json", help="write JSON here ('-' for stdout only)")
    _device_flags(p)
    _common(p)
    p.set_defaults(func=cmd_margins)

    p = sub.add_parser("montecarlo", help="Monte Carlo failure-rate campaign")
    p.add_argument("campaign", help="campaign JSON file")
    p.add_argument("--seed", type=int, help="override the campaign seed")
    p.add_argument("--trials", type=int, help="override the trial count")
    p.add_argument("--csv", help="sweep CSV output (default stdout)")
    p.add_argument("--json", help="write per-point JSON results here")
    p.set_defaults(func=cmd_montecarlo)

    p = sub.add_parser("compare", help="PIM vs CPU throughput verdict")
    p.add_argument("--config", help="JSON with 'pim' and 'cpu' sections; flags override")
    p.add_argument("--arrays", type=float)
    p.add_argument("--rows", type=float, help="rows per array")
    p.add_argument("--frequency", type=float, help="PIM clock in Hz")
    p.add_argument("--cycles", type=float, help="trace cycles per element")
    p.add_argument("--transfer-cycles", dest="transfer_cycles", type=float)
    p.add_argument("--ops-per-element", dest="ops_per_element", type=float)
    p.add_argument("--compute-rate", dest="compute_rate", type=float, help="CPU ops/s")
    p.add_argument("--bytes-per-element", dest="bytes_per_element", type=float)
    p.add_argument("--bandwidth", type=float, help="CPU memory bandwidth in bytes/s")
    p.add_argument("--json", help="write verdict JSON here ('-' for stdout only)")
    p.add_argument("--sweep", help="PARAM=start:stop:count sweep of one parameter")
    p.add_argument("--csv", help="sweep CSV output (default stdout)")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("dump", help="write an array snapshot, optionally after running a trace")
    p.add_argument("trace", nargs="?", help="trace to execute first")
    p.add_argument("--mapping")
    p.add_argument("--inputs")
    p.add_argument("--rows", type=int)
    p.add_argument("--from", dest="from_snapshot", help="start from an existing snapshot")
    p.add_argument("--no-strict", action="store_true")
    p.add_argument("-o", "--output", help="snapshot file (default stdout)")
    _device_flags(p)
    _common(p)
    p.set_defaults(func=cmd_dump)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"mmpu {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except RowCapacityExceeded as exc:
        print(f"mmpu {args.command}: {exc} (needed={exc.needed}, available={exc.available})",
              file=sys.stderr)
        return EXIT_CAPACITY
    except OSError as exc:
        name = getattr(exc, "filename", None)
        print(f"mmpu {args.command}: {name or ''}: {exc.strerror or exc}", file=sys.stderr)
        return EXIT_IO
    except (MMPUError, json.JSONDecodeError) as exc:
        print(f"mmpu {args.command}: {_where(args)}{exc}", file=sys.stderr)
        return EXIT_INVALID


def _where(args) -> str:
    for attr in ("netlist", "trace", "campaign", "config"):
        val = getattr(args, attr, None)
        if val:
            return f"{val}: "
    return ""


if __name__ == "__main__":
    sys.exit(main())
