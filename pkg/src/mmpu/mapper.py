"""Single-row compilation of NOR-only DAGs.

Every gate of the function executes inside one crossbar row, so the same
instruction stream can drive any number of rows at once. Primary inputs sit
in dedicated columns ``0..n_inputs-1``; the remaining columns are working
cells reused once their last reader has executed.

Gate order comes from a Sethi-Ullman style demand estimate. Cell reuse
prefers an already re-initialized free cell, then a freed (dirty) cell, then
a never-used one. Whenever an INIT has to be issued, every other dirty free
cell is initialized in the same op so later gates can skip theirs.
"""

from __future__ import annotations

import heapq
import json
from dataclasses import dataclass

from .crossbar import Orientation
from .errors import CycleDetected, RowCapacityExceeded
from .isa import Init, Nor, Trace, Write
from .netlist import GateDag, Kind

R = Orientation.ROW_LOCAL


@dataclass(frozen=True)
class ScheduleEntry:
    node: int
    column: int
    init_op: int | None  # index of the INIT that prepared this column, None if none was needed


@dataclass
class Mapping:
    row: int
    input_cells: dict[str, int]
    output_cells: dict[str, int]
    schedule: list[ScheduleEntry]
    peak_cells: int
    row_size: int

    @property
    def n_inputs(self) -> int:
        return len(self.input_cells)

    @property
    def peak_working_cells(self) -> int:
        return self.peak_cells - self.n_inputs

    def to_dict(self, trace: Trace | None = None) -> dict:
        doc = {
            "row": self.row,
            "row_size": self.row_size,
            "peak_cells": self.peak_cells,
            "peak_working_cells": self.peak_working_cells,
            "input_cells": dict(self.input_cells),
            "output_cells": dict(self.output_cells),
            "schedule": [
                {"node": e.node, "column": e.column, "init_op": e.init_op} for e in self.schedule
            ],
        }
        if trace is not None:
            n_init = sum(isinstance(op, Init) for op in trace.ops)
            doc["cycles"] = len(trace.ops)
            doc["cycles_without_init"] = len(trace.ops) - n_init
            doc["init_ops"] = n_init
            doc["nor_ops"] = sum(isinstance(op, Nor) for op in trace.ops)
        return doc

    @classmethod
    def from_dict(cls, doc: dict) -> "Mapping":
        return cls(
            row=doc["row"],
            input_cells=dict(doc["input_cells"]),
            output_cells=dict(doc["output_cells"]),
            schedule=[ScheduleEntry(e["node"], e["column"], e["init_op"]) for e in doc.get("schedule", [])],
            peak_cells=doc["peak_cells"],
            row_size=doc["row_size"],
        )


def mapping_report(mapping: Mapping, trace: Trace) -> str:
    return json.dumps(mapping.to_dict(trace), indent=2) + "\n"


def demands(dag: GateDag) -> list[int]:
    """Estimated working cells needed to evaluate each node (inputs cost nothing)."""
    d = [0] * len(dag.nodes)
    for n in dag.nodes:
        if n.kind is Kind.INPUT:
            continue
        kids = sorted((-d[o], o) for o in n.operands)
        d[n.id] = max([1] + [-neg + rank for rank, (neg, _) in enumerate(kids)])
    return d


def topo_order(dag: GateDag) -> list[int]:
    """Post-order over the outputs, heaviest subtree first, ties by ascending id.

    Returns every non-input node some output depends on.
    """
    for n in dag.nodes:
        if any(o >= n.id for o in n.operands):
            raise CycleDetected(f"node {n.id} reads a node that does not precede it")
    d = demands(dag)
    key = lambda i: (-d[i], i)  # noqa: E731
    roots = sorted({i for _, i in dag.outputs}, key=key)
    order: list[int] = []
    done = set()
    on_path = set()
    for root in roots:
        stack = [(root, False)]
        while stack:
            i, expanded = stack.pop()
            if i in done or dag.nodes[i].kind is Kind.INPUT:
                continue
            if expanded:
                on_path.discard(i)
                done.add(i)
                order.append(i)
                continue
            if i in on_path:
                raise CycleDetected(f"cycle through node {i}")
            on_path.add(i)
            stack.append((i, True))
            for o in sorted(dag.nodes[i].operands, key=key, reverse=True):
                stack.append((o, False))
    return order


class _CellPool:
    def __init__(self, first_free: int):
        self.next_fresh = first_free
        self.clean: list[int] = []
        self.dirty: list[int] = []

    def take(self):
        """(column, state) with state one of 'clean', 'dirty', 'fresh'."""
        if self.clean:
            return heapq.heappop(self.clean), "clean"
        if self.dirty:
            return heapq.heappop(self.dirty), "dirty"
        col = self.next_fresh
        self.next_fresh += 1
        return col, "fresh"

    def release(self, col: int):
        heapq.heappush(self.dirty, col)

    def drain_dirty(self) -> list[int]:
        cols = sorted(self.dirty)
        self.dirty.clear()
        for c in cols:
            heapq.heappush(self.clean, c)
        return cols


def schedule(dag: GateDag, row_size: int, row: int = 0, array_rows: int | None = None):
    """Compile a NOR-only DAG into a single-row trace.

    Returns ``(trace, mapping)``. Raises RowCapacityExceeded when the chosen
    order needs more cells than ``row_size``.
    """
    if not dag.is_nor_only():
        raise ValueError("schedule expects a NOR-only DAG; run lower_to_nor first")
    order = topo_order(dag)
    pos = {i: k for k, i in enumerate(order)}
    last_use: dict[int, int] = {}
    for i in order:
        for o in dag.nodes[i].operands:
            last_use[o] = max(last_use.get(o, -1), pos[i])
    outputs = {i for _, i in dag.outputs}

    col_of = {i: c for c, (_, i) in enumerate(dag.inputs)}
    n_in = len(dag.inputs)
    pool = _CellPool(n_in)
    ops: list = []
    entries: list[ScheduleEntry] = []
    working = peak_working = 0

    for k, i in enumerate(order):
        node = dag.nodes[i]
        col, state = pool.take()
        working += 1
        peak_working = max(peak_working, working)
        init_op = None
        if node.kind is Kind.CONST0:
            ops.append(Write(row, col, 0))
        elif state != "clean":
            batch = [col] + pool.drain_dirty()
            init_op = len(ops)
            ops.append(Init(R, tuple(batch), frozenset([row])))
        if node.kind is Kind.NOR or node.kind is Kind.NOT:
            ins = tuple(col_of[o] for o in node.operands)
            ops.append(Nor(R, ins, col, frozenset([row])))
        col_of[i] = col
        entries.append(ScheduleEntry(i, col, init_op))
        for o in set(node.operands):
            if last_use.get(o) == k and o not in outputs and dag.nodes[o].kind is not Kind.INPUT:
                pool.release(col_of[o])
                working -= 1

    peak = n_in + peak_working
    if peak > row_size:
        raise RowCapacityExceeded(needed=peak, available=row_size)
    rows = array_rows if array_rows is not None else row + 1
    trace = Trace(
        rows=rows,
        cols=row_size,
        ops=tuple(ops),
        declared_row=row,
        input_cells=frozenset((row, c) for c in range(n_in)),
    )
    mapping = Mapping(
        row=row,
        input_cells={name: col_of[i] for name, i in dag.inputs},
        output_cells={name: col_of[i] for name, i in dag.outputs},
        schedule=entries,
        peak_cells=peak,
        row_size=row_size,
    )
    return trace, mapping


def compile_dag(dag: GateDag, row_size: int, k_max: int = 4, **kwargs):
    """Lower to NOR when needed, then schedule.

    An already NOR-only DAG within the fan-in cap is scheduled as given, so
    deliberate structures such as inverter chains survive.
    """
    from .netlist import lower_to_nor

    too_wide = any(len(n.operands) > k_max for n in dag.nodes if n.kind is Kind.NOR)
    nor_dag = dag if dag.is_nor_only() and not too_wide else lower_to_nor(dag, k_max=k_max)
    trace, mapping = schedule(nor_dag, row_size, **kwargs)
    return nor_dag, trace, mapping
