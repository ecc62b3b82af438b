"""Controller micro-ops, the line-oriented trace format, and static validation.

Canonical text form (one statement per line, single spaces, no comments)::

    ARRAY <rows> <cols>
    ROW <r>                                   # optional single-row declaration
    INPUTS r=<row> c=<ranges>                 # optional primary-input cells
    INIT <R|C> r=<lane> out=<l1>[,<l2>...]
    INIT <R|C> lanes=<ranges> out=<l1>[,...]
    NOR <R|C> r=<lane> in=<l1>,<l2>,... out=<l>
    NOR <R|C> lanes=<ranges> in=<l1>,... out=<l>
    WRITE r=<row> c=<col> v=<0|1>
    READ r=<row> c=<c1>,<c2>,...

For ``R`` (row-local) ops, lines are columns and lanes are rows; for ``C``
(column-parallel) ops, lines are rows and lanes are columns. ``r=<n>`` is
shorthand for a single row lane and is only legal on ``R`` ops; the emitter
uses it whenever an ``R`` op has exactly one lane. ``<ranges>`` is a comma
list of ``a`` or ``a-b`` items, emitted sorted with maximal runs merged.
On input, keys may appear in any order and ``#`` starts a comment.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Union

from .crossbar import Orientation
from .errors import DimensionError, TraceSyntaxError

R, C = Orientation.ROW_LOCAL, Orientation.COLUMN_PARALLEL


@dataclass(frozen=True)
class Init:
    orientation: Orientation
    output_lines: tuple[int, ...]
    lanes: frozenset[int]

    def __post_init__(self):
        if not self.output_lines:
            raise ValueError("INIT needs at least one output line")
        if len(set(self.output_lines)) != len(self.output_lines):
            raise ValueError("INIT output lines must be distinct")
        if not self.lanes:
            raise ValueError("INIT needs at least one lane")


@dataclass(frozen=True)
class Nor:
    orientation: Orientation
    input_lines: tuple[int, ...]
    output_line: int
    lanes: frozenset[int]

    def __post_init__(self):
        if not self.input_lines:
            raise ValueError("NOR needs at least one input line")
        if len(set(self.input_lines)) != len(self.input_lines):
            raise ValueError("NOR input lines must be distinct")
        if self.output_line in self.input_lines:
            raise ValueError("NOR output line must differ from its inputs")
        if not self.lanes:
            raise ValueError("NOR needs at least one lane")


@dataclass(frozen=True)
class Write:
    row: int
    col: int
    bit: int


@dataclass(frozen=True)
class Read:
    row: int
    cols: tuple[int, ...]


MicroOp = Union[Init, Nor, Write, Read]


@dataclass(frozen=True)
class Trace:
    rows: int
    cols: int
    ops: tuple = ()
    declared_row: int | None = None
    input_cells: frozenset = frozenset()

    @property
    def array_dims(self):
        return (self.rows, self.cols)


def cycle_count(trace: Trace) -> int:
    """One controller cycle per op, however many lanes it touches."""
    return len(trace.ops)


def op_cells(op: MicroOp):
    """(reads, writes) as lists of (row, col) for any op."""
    if isinstance(op, Write):
        return [], [(op.row, op.col)]
    if isinstance(op, Read):
        return [(op.row, c) for c in op.cols], []
    if isinstance(op, Init):
        return [], [_cell(op.orientation, line, lane) for line in op.output_lines for lane in sorted(op.lanes)]
    lanes = sorted(op.lanes)
    reads = [_cell(op.orientation, line, lane) for line in op.input_lines for lane in lanes]
    writes = [_cell(op.orientation, op.output_line, lane) for lane in lanes]
    return reads, writes


def _cell(orientation, line, lane):
    return (lane, line) if orientation is R else (line, lane)


# --- ranges -----------------------------------------------------------------

def format_ranges(values: Iterable[int]) -> str:
    vals = sorted(set(values))
    if not vals:
        raise ValueError("empty lane set has no range syntax")
    parts = []
    start = prev = vals[0]
    for v in vals[1:]:
        if v == prev + 1:
            prev = v
            continue
        parts.append(f"{start}" if start == prev else f"{start}-{prev}")
        start = prev = v
    parts.append(f"{start}" if start == prev else f"{start}-{prev}")
    return ",".join(parts)


def parse_ranges(text: str) -> frozenset[int]:
    out = set()
    for item in text.split(","):
        lo, sep, hi = item.partition("-")
        a = _uint(lo)
        b = _uint(hi) if sep else a
        if b < a:
            raise ValueError(f"descending range {item!r}")
        out.update(range(a, b + 1))
    return frozenset(out)


def _uint(tok: str) -> int:
    if not tok.isdigit():
        raise ValueError(f"expected a non-negative integer, got {tok!r}")
    return int(tok)


def _uint_list(tok: str) -> tuple[int, ...]:
    return tuple(_uint(t) for t in tok.split(","))


# --- emit -------------------------------------------------------------------

def _lanes_field(op) -> str:
    if op.orientation is R and len(op.lanes) == 1:
        return f"r={next(iter(op.lanes))}"
    return f"lanes={format_ranges(op.lanes)}"


def emit_op(op: MicroOp) -> str:
    if isinstance(op, Init):
        outs = ",".join(map(str, op.output_lines))
        return f"INIT {op.orientation.value} {_lanes_field(op)} out={outs}"
    if isinstance(op, Nor):
        ins = ",".join(map(str, op.input_lines))
        return f"NOR {op.orientation.value} {_lanes_field(op)} in={ins} out={op.output_line}"
    if isinstance(op, Write):
        return f"WRITE r={op.row} c={op.col} v={op.bit}"
    if isinstance(op, Read):
        return f"READ r={op.row} c={','.join(map(str, op.cols))}"
    raise TypeError(f"not a micro-op: {op!r}")


def emit_trace(trace: Trace) -> str:
    lines = [f"ARRAY {trace.rows} {trace.cols}"]
    if trace.declared_row is not None:
        lines.append(f"ROW {trace.declared_row}")
    by_row: dict[int, set] = {}
    for r, c in trace.input_cells:
        by_row.setdefault(r, set()).add(c)
    for r in sorted(by_row):
        lines.append(f"INPUTS r={r} c={format_ranges(by_row[r])}")
    lines.extend(emit_op(op) for op in trace.ops)
    return "\n".join(lines) + "\n"


# --- parse ------------------------------------------------------------------

_FIELDS = {
    "INIT": ({"out"}, {"r", "lanes"}),
    "NOR": ({"in", "out"}, {"r", "lanes"}),
    "WRITE": ({"r", "c", "v"}, set()),
    "READ": ({"r", "c"}, set()),
    "INPUTS": ({"r", "c"}, set()),
}


def _kv(tokens, keyword, lineno):
    required, optional = _FIELDS[keyword]
    kv = {}
    for tok in tokens:
        key, eq, val = tok.partition("=")
        if not eq or not val:
            raise TraceSyntaxError(f"expected key=value, got {tok!r}", lineno)
        if key not in required | optional:
            raise TraceSyntaxError(f"unknown field {key!r} for {keyword}", lineno)
        if key in kv:
            raise TraceSyntaxError(f"duplicate field {key!r}", lineno)
        kv[key] = val
    missing = required - kv.keys()
    if missing:
        raise TraceSyntaxError(f"{keyword} missing field(s) {sorted(missing)}", lineno)
    return kv


def _lanes(kv, orientation, lineno):
    if ("r" in kv) == ("lanes" in kv):
        raise TraceSyntaxError("give exactly one of r= or lanes=", lineno)
    if "r" in kv:
        if orientation is not R:
            raise TraceSyntaxError("r= lane shorthand is only valid on R ops", lineno)
        return frozenset([_uint(kv["r"])])
    return parse_ranges(kv["lanes"])


def _parse_op(keyword, tokens, lineno):
    if keyword in ("INIT", "NOR"):
        if not tokens or tokens[0] not in ("R", "C"):
            raise TraceSyntaxError(f"{keyword} needs orientation R or C", lineno)
        orientation = Orientation(tokens[0])
        kv = _kv(tokens[1:], keyword, lineno)
        lanes = _lanes(kv, orientation, lineno)
        if keyword == "INIT":
            return Init(orientation, _uint_list(kv["out"]), lanes)
        return Nor(orientation, _uint_list(kv["in"]), _uint(kv["out"]), lanes)
    kv = _kv(tokens, keyword, lineno)
    if keyword == "WRITE":
        if kv["v"] not in ("0", "1"):
            raise TraceSyntaxError("WRITE v= must be 0 or 1", lineno)
        return Write(_uint(kv["r"]), _uint(kv["c"]), int(kv["v"]))
    return Read(_uint(kv["r"]), _uint_list(kv["c"]))


def _check_dims(op, rows, cols, lineno):
    if isinstance(op, (Write, Read)):
        bad = op.row >= rows or any(c >= cols for c in (op.cols if isinstance(op, Read) else (op.col,)))
    else:
        lines = op.output_lines if isinstance(op, Init) else op.input_lines + (op.output_line,)
        n_lines, n_lanes = (cols, rows) if op.orientation is R else (rows, cols)
        bad = max(lines) >= n_lines or (op.lanes and max(op.lanes) >= n_lanes)
    if bad:
        raise DimensionError(f"op exceeds array dimensions {rows}x{cols}", lineno)


def parse_trace(text: str) -> Trace:
    rows = cols = None
    declared_row = None
    inputs = set()
    ops = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        keyword, *tokens = line.split()
        try:
            if keyword == "ARRAY":
                if rows is not None:
                    raise TraceSyntaxError("duplicate ARRAY header", lineno)
                if len(tokens) != 2:
                    raise TraceSyntaxError("ARRAY takes <rows> <cols>", lineno)
                rows, cols = _uint(tokens[0]), _uint(tokens[1])
                if rows < 1 or cols < 1:
                    raise TraceSyntaxError("array dimensions must be positive", lineno)
                continue
            if rows is None:
                raise TraceSyntaxError("trace must start with an ARRAY header", lineno)
            if keyword == "ROW":
                if declared_row is not None or ops or len(tokens) != 1:
                    raise TraceSyntaxError("ROW takes one index and must precede all ops", lineno)
                declared_row = _uint(tokens[0])
                if declared_row >= rows:
                    raise DimensionError(f"declared row {declared_row} outside {rows} rows", lineno)
            elif keyword == "INPUTS":
                kv = _kv(tokens, keyword, lineno)
                r = _uint(kv["r"])
                cs = parse_ranges(kv["c"])
                if r >= rows or max(cs) >= cols:
                    raise DimensionError("INPUTS cell outside the array", lineno)
                inputs.update((r, c) for c in cs)
            elif keyword in _FIELDS:
                op = _parse_op(keyword, tokens, lineno)
                _check_dims(op, rows, cols, lineno)
                ops.append(op)
            else:
                raise TraceSyntaxError(f"unknown statement {keyword!r}", lineno)
        except TraceSyntaxError:
            raise
        except ValueError as exc:
            raise TraceSyntaxError(str(exc), lineno) from None
    if rows is None:
        raise TraceSyntaxError("missing ARRAY header")
    return Trace(rows, cols, tuple(ops), declared_row, frozenset(inputs))


# --- validation -------------------------------------------------------------

@dataclass(frozen=True)
class Violation:
    op_index: int
    rule: str  # "a" init-before-write, "b" undefined read, "c" single-row
    message: str

    def __str__(self):
        return f"op {self.op_index}: ({self.rule}) {self.message}"


@dataclass
class ValidationReport:
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def rules(self):
        return [(v.op_index, v.rule) for v in self.violations]

    def __str__(self):
        if self.ok:
            return "valid"
        return "\n".join(str(v) for v in self.violations)


def validate_trace(trace: Trace, input_cells=()) -> ValidationReport:
    """Check init-before-write (a), reads of undefined cells (b) and single-row conformance (c).

    Primary-input cells come from the trace's INPUTS statements plus
    ``input_cells``; both count as defined from the start.
    """
    defined = set(trace.input_cells) | {tuple(c) for c in input_cells}
    fresh = set()  # INIT'd and untouched since
    report = ValidationReport()
    row = trace.declared_row
    for i, op in enumerate(trace.ops):
        if row is not None:
            if isinstance(op, (Init, Nor)):
                if op.orientation is not R or op.lanes != {row}:
                    report.violations.append(Violation(i, "c", f"op leaves declared row {row}"))
            elif op.row != row:
                report.violations.append(Violation(i, "c", f"op addresses row {op.row}, not declared row {row}"))
        reads, writes = op_cells(op)
        undefined = [c for c in reads if c not in defined]
        if undefined:
            report.violations.append(Violation(i, "b", f"reads undefined cell(s) {undefined[:4]}"))
        if isinstance(op, Nor):
            fresh.difference_update(reads)
            stale = [c for c in writes if c not in fresh]
            if stale:
                report.violations.append(Violation(i, "a", f"NOR output cell(s) {stale[:4]} not INIT'd since last use"))
            fresh.difference_update(writes)
        elif isinstance(op, Init):
            fresh.update(writes)
        elif isinstance(op, Write):
            fresh.difference_update(writes)
        defined.update(writes)
    return report
