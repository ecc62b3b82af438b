"""Memristive crossbar with MAGIC NOR evaluation at the voltage-divider level.

A MAGIC NOR drives ``v_g`` onto the input lines and grounds the output line;
the shared conductor between them floats to the divider node voltage. The
output device sees ``-v_node`` and each input device sees ``v_g - v_node``.

Two orientations are supported. ``COLUMN_PARALLEL`` is the textbook picture:
inputs and output are wordlines (rows) and every selected column is a lane.
``ROW_LOCAL`` is its transpose: inputs and output are bitlines (columns) of
one row, and every selected row is a lane. Both use the same arithmetic.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .device import DEFAULT_PARAMS, CellState, DeviceParams
from .errors import EmptyInputs, IndexOutOfBounds

HEALTHY, STUCK_ON, STUCK_OFF = 0, 1, 2

SNAPSHOT_FORMAT = "mmpu-crossbar/1"


class Orientation(enum.Enum):
    ROW_LOCAL = "R"
    COLUMN_PARALLEL = "C"


class Crossbar:
    """``rows x cols`` grid of binary memristors with per-cell parameters.

    State is stored as a bit matrix (1 = ``r_on``); the per-cell resistance
    is derived from it, so the binary invariant holds by construction.
    ``faults`` pins cells to ``STUCK_ON`` / ``STUCK_OFF``.
    """

    def __init__(
        self,
        rows: int,
        cols: int,
        params: DeviceParams | None = None,
        v_g: float = 1.0,
        v_iso: float | None = None,
        unselected_wordlines: str = "iso",
    ):
        if rows < 1 or cols < 1:
            raise ValueError("crossbar needs at least one row and one column")
        if not v_g > 0:
            raise ValueError("v_g must be positive")
        v_iso = v_g / 2 if v_iso is None else v_iso
        if not 0 <= v_iso <= v_g:
            raise ValueError("v_iso must lie in [0, v_g]")
        if unselected_wordlines not in ("iso", "float"):
            raise ValueError("unselected_wordlines must be 'iso' or 'float'")
        p = params or DEFAULT_PARAMS
        shape = (rows, cols)
        self.rows = rows
        self.cols = cols
        self.v_g = float(v_g)
        self.v_iso = float(v_iso)
        # Both settings are modelled as perfect isolation.
        self.unselected_wordlines = unselected_wordlines
        self.bits = np.zeros(shape, dtype=bool)
        self.r_on = np.full(shape, p.r_on)
        self.r_off = np.full(shape, p.r_off)
        self.v_set = np.full(shape, p.v_set)
        self.v_reset = np.full(shape, p.v_reset)
        self.faults = np.zeros(shape, dtype=np.int8)

    @property
    def shape(self):
        return (self.rows, self.cols)

    def params_at(self, row: int, col: int) -> DeviceParams:
        check_cell(self, row, col)
        return DeviceParams(
            float(self.r_on[row, col]),
            float(self.r_off[row, col]),
            float(self.v_set[row, col]),
            float(self.v_reset[row, col]),
        )

    def set_params(self, row: int, col: int, params: DeviceParams) -> None:
        check_cell(self, row, col)
        self.r_on[row, col] = params.r_on
        self.r_off[row, col] = params.r_off
        self.v_set[row, col] = params.v_set
        self.v_reset[row, col] = params.v_reset

    def cell(self, row: int, col: int) -> CellState:
        p = self.params_at(row, col)
        return CellState.from_bit(int(self.bits[row, col]), p)

    def resistances(self) -> np.ndarray:
        return np.where(self.bits, self.r_on, self.r_off)

    def apply_faults(self, fault_grid: np.ndarray) -> None:
        fault_grid = np.asarray(fault_grid, dtype=np.int8)
        if fault_grid.shape != self.shape:
            raise ValueError("fault grid shape does not match the array")
        self.faults = fault_grid.copy()
        self.bits[self.faults == STUCK_ON] = True
        self.bits[self.faults == STUCK_OFF] = False

    def copy(self) -> "Crossbar":
        other = Crossbar.__new__(Crossbar)
        other.__dict__.update(
            {k: (v.copy() if isinstance(v, np.ndarray) else v) for k, v in self.__dict__.items()}
        )
        return other

    def state_equal(self, other: "Crossbar") -> bool:
        return self.shape == other.shape and bool(np.array_equal(self.bits, other.bits))


@dataclass(frozen=True)
class GateEval:
    orientation: Orientation
    input_lines: tuple[int, ...]
    output_line: int
    lane_mask: frozenset[int]

    def __init__(self, orientation, input_lines, output_line, lane_mask):
        object.__setattr__(self, "orientation", Orientation(orientation))
        object.__setattr__(self, "input_lines", tuple(int(x) for x in input_lines))
        object.__setattr__(self, "output_line", int(output_line))
        object.__setattr__(self, "lane_mask", frozenset(int(x) for x in lane_mask))
        if not self.input_lines:
            raise EmptyInputs("gate needs at least one input line")
        if len(set(self.input_lines)) != len(self.input_lines):
            raise ValueError("input lines must be pairwise distinct")
        if self.output_line in self.input_lines:
            raise ValueError("output line must differ from every input line")


class SwitchEvents:
    """Switch events from one gate evaluation, stored column-wise.

    ``is_output`` separates the intended output switch from input disturb.
    """

    __slots__ = ("lane", "row", "col", "old", "new", "is_output")

    def __init__(self, lane=(), row=(), col=(), old=(), new=(), is_output=()):
        self.lane = np.asarray(lane, dtype=np.int64)
        self.row = np.asarray(row, dtype=np.int64)
        self.col = np.asarray(col, dtype=np.int64)
        self.old = np.asarray(old, dtype=np.int8)
        self.new = np.asarray(new, dtype=np.int8)
        self.is_output = np.asarray(is_output, dtype=bool)

    @classmethod
    def concat(cls, parts: Sequence["SwitchEvents"]) -> "SwitchEvents":
        if not parts:
            return cls()
        return cls(*(np.concatenate([getattr(p, f) for p in parts]) for f in cls.__slots__))

    def __len__(self):
        return len(self.lane)

    def __iter__(self):
        for i in range(len(self)):
            yield (
                int(self.lane[i]),
                (int(self.row[i]), int(self.col[i])),
                int(self.old[i]),
                int(self.new[i]),
                "output" if self.is_output[i] else "disturb",
            )

    @property
    def n_set(self) -> int:
        return int(np.count_nonzero(self.new > self.old))

    @property
    def n_reset(self) -> int:
        return int(np.count_nonzero(self.new < self.old))

    @property
    def n_output(self) -> int:
        return int(np.count_nonzero(self.is_output))

    @property
    def n_disturb(self) -> int:
        return int(np.count_nonzero(~self.is_output))


def divider_voltage(input_resistances, r_out, v_g):
    """Node voltage of the MAGIC divider: ``v_g * r_out / (R_eq + r_out)``.

    ``R_eq`` is the parallel combination of the inputs (reduced along axis 0,
    so stacked per-lane resistances evaluate elementwise).
    """
    r_in = np.asarray(input_resistances, dtype=float)
    if r_in.ndim == 0 or r_in.shape[0] == 0:
        raise EmptyInputs("divider needs at least one input resistance")
    if np.any(r_in <= 0) or np.any(np.asarray(r_out) <= 0) or not np.all(np.asarray(v_g) > 0):
        raise ValueError("resistances and v_g must be positive")
    r_eq = 1.0 / np.sum(1.0 / r_in, axis=0)
    v = v_g * r_out / (r_eq + r_out)
    return float(v) if np.ndim(v) == 0 else v


def check_cell(array: Crossbar, row, col) -> None:
    r = np.asarray(row)
    c = np.asarray(col)
    if r.size and (r.min() < 0 or r.max() >= array.rows):
        raise IndexOutOfBounds(f"row index out of range [0, {array.rows})")
    if c.size and (c.min() < 0 or c.max() >= array.cols):
        raise IndexOutOfBounds(f"column index out of range [0, {array.cols})")


def gate_cells(gate: GateEval, lanes: np.ndarray):
    """Row/col index arrays: inputs shaped (k, n_lanes), output shaped (n_lanes,)."""
    lines = np.asarray(gate.input_lines)[:, None]
    if gate.orientation is Orientation.ROW_LOCAL:
        in_rows = np.broadcast_to(lanes, (len(gate.input_lines), len(lanes)))
        in_cols = np.broadcast_to(lines, in_rows.shape)
        out_rows, out_cols = lanes, np.full(len(lanes), gate.output_line)
    else:
        in_cols = np.broadcast_to(lanes, (len(gate.input_lines), len(lanes)))
        in_rows = np.broadcast_to(lines, in_cols.shape)
        out_rows, out_cols = np.full(len(lanes), gate.output_line), lanes
    return (in_rows, in_cols), (out_rows, out_cols)


def eval_gate(array: Crossbar, gate: GateEval) -> SwitchEvents:
    """Apply one MAGIC NOR on every lane of ``gate.lane_mask``.

    All devices whose threshold is crossed switch in the same pass; passes
    repeat until nothing switches. Lanes outside the mask are untouched.
    """
    lanes = np.array(sorted(gate.lane_mask), dtype=np.int64)
    if gate.orientation is Orientation.ROW_LOCAL:
        check_cell(array, lanes, list(gate.input_lines) + [gate.output_line])
    else:
        check_cell(array, list(gate.input_lines) + [gate.output_line], lanes)
    if lanes.size == 0:
        return SwitchEvents()

    (ir, ic), (orr, oc) = gate_cells(gate, lanes)
    bits_in = array.bits[ir, ic].copy()
    bit_out = array.bits[orr, oc].copy()
    ron_in, roff_in = array.r_on[ir, ic], array.r_off[ir, ic]
    vset_in, vreset_in = array.v_set[ir, ic], array.v_reset[ir, ic]
    ron_out, roff_out = array.r_on[orr, oc], array.r_off[orr, oc]
    vset_out, vreset_out = array.v_set[orr, oc], array.v_reset[orr, oc]
    free_in = array.faults[ir, ic] == HEALTHY
    free_out = array.faults[orr, oc] == HEALTHY
    lane_idx_in = np.broadcast_to(lanes, bits_in.shape)

    events = []
    for _ in range(bits_in.size + bit_out.size + 1):
        r_in = np.where(bits_in, ron_in, roff_in)
        r_out = np.where(bit_out, ron_out, roff_out)
        v_node = divider_voltage(r_in, r_out, array.v_g)
        v_out = -v_node
        v_in = array.v_g - v_node
        sw_out = free_out & np.where(bit_out, v_out <= vreset_out, v_out >= vset_out)
        sw_in = free_in & np.where(bits_in, v_in <= vreset_in, v_in >= vset_in)
        if not (sw_out.any() or sw_in.any()):
            break
        if sw_out.any():
            events.append(SwitchEvents(
                lanes[sw_out], orr[sw_out], oc[sw_out],
                bit_out[sw_out], ~bit_out[sw_out], np.ones(int(sw_out.sum()), bool),
            ))
        if sw_in.any():
            events.append(SwitchEvents(
                lane_idx_in[sw_in], ir[sw_in], ic[sw_in],
                bits_in[sw_in], ~bits_in[sw_in], np.zeros(int(sw_in.sum()), bool),
            ))
        bit_out = bit_out ^ sw_out
        bits_in = bits_in ^ sw_in
    else:  # pragma: no cover - each device switches at most once per direction
        raise RuntimeError("gate evaluation did not converge")

    array.bits[ir, ic] = bits_in
    array.bits[orr, oc] = bit_out
    return SwitchEvents.concat(events)


def write_cells(array: Crossbar, rows, cols, bit: int) -> int:
    """Force-write ``bit`` to every (rows[i], cols[i]); stuck cells keep their value.

    Returns the number of cells whose state changed.
    """
    rows = np.asarray(rows, dtype=np.int64)
    cols = np.asarray(cols, dtype=np.int64)
    check_cell(array, rows, cols)
    free = array.faults[rows, cols] == HEALTHY
    rows, cols = rows[free], cols[free]
    changed = int(np.count_nonzero(array.bits[rows, cols] != bool(bit)))
    array.bits[rows, cols] = bool(bit)
    return changed


def force_write(array: Crossbar, row: int, col: int, bit: int) -> None:
    write_cells(array, [row], [col], bit)


def read_bits(array: Crossbar, row: int, cols: Iterable[int]) -> list[int]:
    cols = list(cols)
    check_cell(array, row, cols)
    return [int(b) for b in array.bits[row, cols]]


def dump_snapshot(array: Crossbar) -> str:
    """Serialize the array as JSON: bit rows as ``"0101"`` strings plus parameter grids."""
    doc = {
        "format": SNAPSHOT_FORMAT,
        "rows": array.rows,
        "cols": array.cols,
        "v_g": array.v_g,
        "v_iso": array.v_iso,
        "unselected_wordlines": array.unselected_wordlines,
        "bits": ["".join("1" if b else "0" for b in row) for row in array.bits],
        "faults": ["".join(str(int(f)) for f in row) for row in array.faults],
        "r_on": array.r_on.tolist(),
        "r_off": array.r_off.tolist(),
        "v_set": array.v_set.tolist(),
        "v_reset": array.v_reset.tolist(),
    }
    return json.dumps(doc, indent=1) + "\n"


def load_snapshot(text: str) -> Crossbar:
    doc = json.loads(text)
    if doc.get("format") != SNAPSHOT_FORMAT:
        raise ValueError(f"not a crossbar snapshot (expected format {SNAPSHOT_FORMAT!r})")
    array = Crossbar(
        doc["rows"], doc["cols"], v_g=doc["v_g"], v_iso=doc["v_iso"],
        unselected_wordlines=doc.get("unselected_wordlines", "iso"),
    )
    for name in ("r_on", "r_off", "v_set", "v_reset"):
        grid = np.asarray(doc[name], dtype=float)
        if grid.shape != array.shape:
            raise ValueError(f"{name} grid has shape {grid.shape}, expected {array.shape}")
        setattr(array, name, grid)
    if not (np.all(array.r_off > array.r_on) and np.all(array.r_on > 0)
            and np.all(array.v_set > 0) and np.all(array.v_reset < 0)):
        raise ValueError("snapshot holds invalid device parameters")
    bits = np.array([[c == "1" for c in row] for row in doc["bits"]], dtype=bool)
    faults = np.array([[int(c) for c in row] for row in doc["faults"]], dtype=np.int8)
    if bits.shape != array.shape or faults.shape != array.shape:
        raise ValueError("bit or fault matrix does not match the declared dimensions")
    array.bits = bits
    array.faults = faults
    return array
