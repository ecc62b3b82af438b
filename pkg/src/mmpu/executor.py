"""Controller runtime: run a trace against a crossbar across many rows at once.

A single-row trace (one with ``ROW r``) is re-based onto every requested
row: each op's references to row ``r`` are replaced by the whole row set,
and the op still costs one cycle.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import numpy as np

from .crossbar import Crossbar, GateEval, Orientation, eval_gate, read_bits, write_cells
from .errors import ArityMismatch, DimensionError, IndexOutOfBounds, UninitializedOutput
from .isa import Init, Nor, Read, Trace, Write
from .mapper import Mapping

R = Orientation.ROW_LOCAL


@dataclass
class StatsReport:
    cycles: int = 0
    nor_ops: int = 0
    init_ops: int = 0
    write_ops: int = 0
    read_ops: int = 0
    set_events: int = 0
    reset_events: int = 0
    input_disturb_events: int = 0
    rows: int = 0
    energy_per_event: float | None = None
    reads: list = field(default_factory=list, repr=False, compare=False)

    @property
    def energy_proxy(self) -> int:
        return self.set_events + self.reset_events

    @property
    def cycles_without_init(self) -> int:
        return self.cycles - self.init_ops

    @property
    def energy_joules(self) -> float | None:
        if self.energy_per_event is None:
            return None
        return self.energy_proxy * self.energy_per_event

    def to_dict(self) -> dict:
        doc = asdict(self)
        doc.pop("reads")
        doc.pop("energy_per_event")
        doc["cycles_without_init"] = self.cycles_without_init
        doc["energy_proxy"] = self.energy_proxy
        if self.energy_per_event is not None:
            doc["energy_joules"] = self.energy_joules
        return doc

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def to_table(self) -> str:
        doc = self.to_dict()
        width = max(len(k) for k in doc)
        return "\n".join(f"{k:<{width}}  {v:>12}" for k, v in doc.items()) + "\n"


def _rebase(lanes, declared_row, rows):
    if declared_row is None or declared_row not in lanes:
        return np.array(sorted(lanes), dtype=np.int64)
    others = [x for x in lanes if x != declared_row]
    return np.array(sorted(set(others) | set(rows.tolist())), dtype=np.int64)


def _target_rows(row, declared_row, rows):
    return rows if declared_row is not None and row == declared_row else np.array([row])


def run(
    trace: Trace,
    array: Crossbar,
    rows=None,
    strict: bool = True,
    energy_per_event: float | None = None,
) -> StatsReport:
    """Execute ``trace`` in order; every op costs one cycle regardless of width."""
    if trace.cols > array.cols or (trace.declared_row is None and trace.rows > array.rows):
        raise DimensionError(
            f"trace needs a {trace.rows}x{trace.cols} array, got {array.rows}x{array.cols}"
        )
    dr = trace.declared_row
    if dr is not None:
        rows = np.array(sorted(set(rows)) if rows is not None else [dr], dtype=np.int64)
        if rows.size and (rows.min() < 0 or rows.max() >= array.rows):
            raise IndexOutOfBounds(f"row set exceeds the array's {array.rows} rows")
    else:
        rows = np.array([], dtype=np.int64)

    st = StatsReport(rows=int(rows.size) if dr is not None else trace.rows,
                     energy_per_event=energy_per_event)
    for i, op in enumerate(trace.ops):
        st.cycles += 1
        if isinstance(op, Init):
            st.init_ops += 1
            lanes = _rebase(op.lanes, dr, rows)
            for line in op.output_lines:
                if op.orientation is R:
                    st.set_events += write_cells(array, lanes, np.full(lanes.size, line), 1)
                else:
                    st.set_events += write_cells(array, np.full(lanes.size, line), lanes, 1)
        elif isinstance(op, Nor):
            st.nor_ops += 1
            lanes = _rebase(op.lanes, dr, rows)
            if op.orientation is R:
                out_r, out_c = lanes, np.full(lanes.size, op.output_line)
            else:
                out_r, out_c = np.full(lanes.size, op.output_line), lanes
            if strict and lanes.size:
                if (out_r.max() >= array.rows) or (out_c.max() >= array.cols):
                    raise IndexOutOfBounds(f"op {i}: output outside the array")
                bad = ~array.bits[out_r, out_c]
                if bad.any():
                    raise UninitializedOutput(i, zip(out_r[bad].tolist(), out_c[bad].tolist()))
            ev = eval_gate(array, GateEval(op.orientation, op.input_lines, op.output_line, lanes.tolist()))
            st.set_events += ev.n_set
            st.reset_events += ev.n_reset
            st.input_disturb_events += ev.n_disturb
        elif isinstance(op, Write):
            st.write_ops += 1
            target = _target_rows(op.row, dr, rows)
            changed = write_cells(array, target, np.full(target.size, op.col), op.bit)
            if op.bit:
                st.set_events += changed
            else:
                st.reset_events += changed
        elif isinstance(op, Read):
            st.read_ops += 1
            for r in _target_rows(op.row, dr, rows).tolist():
                st.reads.append((i, r, read_bits(array, r, op.cols)))
        else:
            raise TypeError(f"unknown op {op!r}")
    return st


def load_inputs(array: Crossbar, mapping: Mapping, rows, vectors) -> None:
    """Force-write one input vector per row into the mapped input columns."""
    rows = np.asarray(list(rows), dtype=np.int64)
    vecs = np.asarray(vectors, dtype=np.uint8)
    if rows.size == 0:
        if vecs.size:
            raise ArityMismatch("vectors given for an empty row set")
        return
    n_in = len(mapping.input_cells)
    if vecs.ndim != 2 or vecs.shape[0] != rows.size or vecs.shape[1] != n_in:
        raise ArityMismatch(
            f"expected {rows.size} vectors of {n_in} bits, got shape {vecs.shape}"
        )
    for j, col in enumerate(mapping.input_cells.values()):
        ones = vecs[:, j].astype(bool)
        cols = np.full(rows.size, col)
        write_cells(array, rows[ones], cols[ones], 1)
        write_cells(array, rows[~ones], cols[~ones], 0)


def read_outputs(array: Crossbar, mapping: Mapping, rows) -> np.ndarray:
    """Output bits, shape ``(len(rows), n_outputs)``, columns in mapping order."""
    if not mapping.output_cells:
        raise ValueError("mapping has no outputs")
    rows = np.asarray(list(rows), dtype=np.int64)
    cols = np.array(list(mapping.output_cells.values()), dtype=np.int64)
    if rows.size and (rows.min() < 0 or rows.max() >= array.rows):
        raise IndexOutOfBounds("row outside the array")
    if cols.max() >= array.cols:
        raise IndexOutOfBounds("output column outside the array")
    return array.bits[np.ix_(rows, cols)].astype(np.uint8)
