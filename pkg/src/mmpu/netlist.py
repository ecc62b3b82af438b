"""Gate-level netlists: parsing, NOR lowering, and the reference Boolean evaluator.

Two input grammars are accepted.

Structural (``.nl``)::

    # comment
    INPUT a b cin
    OUTPUT sum cout
    t = XOR(a, b)
    sum = XOR(t, cin)
    cout = OR(AND_ab, p)        # definitions may appear in any order
    k = CONST1()
    y = t                        # plain alias, no gate

A BLIF subset: ``.model``, ``.inputs``, ``.outputs``, ``.names`` with
single-output covers of at most four inputs, and ``.end``. Anything else
(latches, subcircuits, PLA files) is rejected with UnsupportedBlifFeature.
"""

from __future__ import annotations

import enum
import itertools
import re
from dataclasses import dataclass

import numpy as np

from .errors import CycleDetected, MissingInput, NetlistSyntaxError, UnsupportedBlifFeature

BLIF_MAX_INPUTS = 4
DEFAULT_K_MAX = 4


class Kind(enum.Enum):
    INPUT = "INPUT"
    NOR = "NOR"
    NOT = "NOT"
    AND = "AND"
    OR = "OR"
    XOR = "XOR"
    CONST0 = "CONST0"
    CONST1 = "CONST1"


GATE_KINDS = {Kind.NOR, Kind.NOT, Kind.AND, Kind.OR, Kind.XOR}
NOR_KINDS = {Kind.INPUT, Kind.NOR, Kind.NOT, Kind.CONST0, Kind.CONST1}


class NetlistFormat(enum.Enum):
    STRUCTURAL = "structural"
    BLIF = "blif"


@dataclass(frozen=True)
class Node:
    id: int
    kind: Kind
    operands: tuple[int, ...] = ()

    @property
    def is_gate(self) -> bool:
        return self.kind in GATE_KINDS


@dataclass(frozen=True)
class GateDag:
    nodes: tuple[Node, ...]
    inputs: tuple[tuple[str, int], ...]
    outputs: tuple[tuple[str, int], ...]

    def __post_init__(self):
        for i, n in enumerate(self.nodes):
            if n.id != i:
                raise ValueError(f"node at position {i} has id {n.id}")
            if any(not 0 <= op < i for op in n.operands):
                raise CycleDetected(f"node {i} has an operand that does not precede it")
            arity = len(n.operands)
            if n.kind is Kind.NOT and arity != 1:
                raise ValueError(f"NOT node {i} needs exactly one operand")
            if n.kind in (Kind.INPUT, Kind.CONST0, Kind.CONST1) and arity:
                raise ValueError(f"{n.kind.value} node {i} takes no operands")
            if n.kind in (Kind.NOR, Kind.AND, Kind.OR, Kind.XOR) and arity < 1:
                raise ValueError(f"{n.kind.value} node {i} needs operands")
        named = {i for _, i in self.inputs}
        for n in self.nodes:
            if n.kind is Kind.INPUT and n.id not in named:
                raise ValueError(f"INPUT node {n.id} has no name")
        for name, i in self.inputs:
            if self.nodes[i].kind is not Kind.INPUT:
                raise ValueError(f"input {name!r} does not refer to an INPUT node")
        if len({n for n, _ in self.inputs}) != len(self.inputs):
            raise ValueError("duplicate input names")
        if len({n for n, _ in self.outputs}) != len(self.outputs):
            raise ValueError("duplicate output names")
        for name, i in self.outputs:
            if not 0 <= i < len(self.nodes):
                raise ValueError(f"output {name!r} refers to missing node {i}")

    @property
    def input_names(self) -> list[str]:
        return [n for n, _ in self.inputs]

    @property
    def output_names(self) -> list[str]:
        return [n for n, _ in self.outputs]

    @property
    def gates(self) -> list[Node]:
        return [n for n in self.nodes if n.is_gate]

    @property
    def gate_count(self) -> int:
        return len(self.gates)

    def is_nor_only(self) -> bool:
        return all(n.kind in NOR_KINDS for n in self.nodes)

    def fanout(self) -> list[int]:
        counts = [0] * len(self.nodes)
        for n in self.nodes:
            for op in n.operands:
                counts[op] += 1
        return counts


class DagBuilder:
    """Incremental GateDag construction with structural hashing.

    Commutative gates are keyed on their sorted operand set, so repeated
    subexpressions (``NOT a`` used twice, say) share one node.
    """

    def __init__(self):
        self.nodes: list[Node] = []
        self.inputs: list[tuple[str, int]] = []
        self.outputs: list[tuple[str, int]] = []
        self._memo: dict = {}

    def input(self, name: str) -> int:
        i = self._append(Kind.INPUT, ())
        self.inputs.append((name, i))
        return i

    def const(self, value: int) -> int:
        return self.add(Kind.CONST1 if value else Kind.CONST0)

    def add(self, kind: Kind, *operands: int) -> int:
        if kind in (Kind.NOR, Kind.AND, Kind.OR, Kind.XOR):
            ops = tuple(sorted(set(operands))) if kind is not Kind.XOR else tuple(sorted(operands))
        else:
            ops = tuple(operands)
        key = (kind, ops)
        if key not in self._memo:
            self._memo[key] = self._append(kind, ops)
        return self._memo[key]

    def kind(self, i: int) -> Kind:
        return self.nodes[i].kind

    def output(self, name: str, i: int) -> None:
        self.outputs.append((name, i))

    def _append(self, kind, ops) -> int:
        i = len(self.nodes)
        self.nodes.append(Node(i, kind, ops))
        return i

    def build(self) -> GateDag:
        return GateDag(tuple(self.nodes), tuple(self.inputs), tuple(self.outputs))


# --- evaluation -------------------------------------------------------------

def eval_dag(dag: GateDag, assignment) -> dict:
    """Evaluate every output. Values may be 0/1 ints or equal-shape bit arrays."""
    vals: list = [None] * len(dag.nodes)
    for name, i in dag.inputs:
        if name not in assignment:
            raise MissingInput(name)
        v = assignment[name]
        vals[i] = (v & 1) if isinstance(v, (int, np.integer)) else np.asarray(v, dtype=np.uint8) & 1
    for n in dag.nodes:
        ops = [vals[o] for o in n.operands]
        k = n.kind
        if k is Kind.INPUT:
            continue
        if k is Kind.CONST0:
            vals[n.id] = 0
        elif k is Kind.CONST1:
            vals[n.id] = 1
        elif k is Kind.NOT:
            vals[n.id] = 1 ^ ops[0]
        elif k is Kind.NOR:
            vals[n.id] = 1 ^ _fold(ops, lambda a, b: a | b)
        elif k is Kind.AND:
            vals[n.id] = _fold(ops, lambda a, b: a & b)
        elif k is Kind.OR:
            vals[n.id] = _fold(ops, lambda a, b: a | b)
        elif k is Kind.XOR:
            vals[n.id] = _fold(ops, lambda a, b: a ^ b)
    return {name: _as_bits(vals[i]) for name, i in dag.outputs}


def _fold(ops, f):
    acc = ops[0]
    for v in ops[1:]:
        acc = f(acc, v)
    return acc


def _as_bits(v):
    return int(v) if isinstance(v, (int, np.integer)) else v


def all_patterns(names) -> dict:
    """Every assignment of ``names`` as bit columns; the first name is the MSB."""
    n = len(names)
    idx = np.arange(1 << n, dtype=np.int64)
    return {name: ((idx >> (n - 1 - i)) & 1).astype(np.uint8) for i, name in enumerate(names)}


def truth_table(dag: GateDag) -> dict:
    """Output columns over all input patterns (rows ordered as in all_patterns)."""
    pats = all_patterns(dag.input_names)
    out = eval_dag(dag, pats)
    size = 1 << len(dag.inputs)
    return {k: np.broadcast_to(np.asarray(v, dtype=np.uint8), (size,)).copy() for k, v in out.items()}


# --- NOR lowering -----------------------------------------------------------

class _NorLowering:
    def __init__(self, k_max: int):
        if k_max < 2:
            raise ValueError("k_max must be at least 2")
        self.k_max = k_max
        self.b = DagBuilder()

    def nor(self, ops) -> int:
        b = self.b
        ops = sorted(set(ops))
        if any(b.kind(o) is Kind.CONST1 for o in ops):
            return b.const(0)
        ops = [o for o in ops if b.kind(o) is not Kind.CONST0]
        if not ops:
            return b.const(1)
        if len(ops) == 1:
            inner = b.nodes[ops[0]]
            if inner.kind is Kind.NOR and len(inner.operands) == 1:
                return inner.operands[0]
        if len(ops) > self.k_max:
            chunks = [ops[i:i + self.k_max] for i in range(0, len(ops), self.k_max)]
            return self.nor([self.or_(c) for c in chunks])
        return b.add(Kind.NOR, *ops)

    def not_(self, x) -> int:
        return self.nor([x])

    def or_(self, ops) -> int:
        return self.not_(self.nor(ops))

    def and_(self, ops) -> int:
        return self.nor([self.not_(x) for x in ops])

    def xor2(self, a, b) -> int:
        # a XOR b = AND(OR(a, b), NOT(AND(a, b)))
        return self.and_([self.or_([a, b]), self.not_(self.and_([a, b]))])


def lower_to_nor(dag: GateDag, k_max: int = DEFAULT_K_MAX) -> GateDag:
    """Rewrite ``dag`` with only INPUT, NOR (1-input NOR is NOT) and CONST nodes.

    Applies NOT(x)=NOR(x), AND=NOR of NOTs, OR=NOT of NOR, XOR through
    AND/OR/NOT, folds constants, drops NOT(NOT(x)), shares identical
    subexpressions, splits NORs wider than ``k_max`` into OR-chunks under a
    final NOR, and removes logic no output depends on.
    """
    lw = _NorLowering(k_max)
    b = lw.b
    new = {}
    for name, i in dag.inputs:
        new[i] = b.input(name)
    for n in dag.nodes:
        if n.kind is Kind.INPUT:
            continue
        ops = [new[o] for o in n.operands]
        if n.kind is Kind.CONST0:
            new[n.id] = b.const(0)
        elif n.kind is Kind.CONST1:
            new[n.id] = b.const(1)
        elif n.kind is Kind.NOT:
            new[n.id] = lw.not_(ops[0])
        elif n.kind is Kind.NOR:
            new[n.id] = lw.nor(ops)
        elif n.kind is Kind.AND:
            new[n.id] = lw.and_(ops)
        elif n.kind is Kind.OR:
            new[n.id] = lw.or_(ops)
        elif n.kind is Kind.XOR:
            acc = ops[0]
            for o in ops[1:]:
                acc = lw.xor2(acc, o)
            new[n.id] = acc
    for name, i in dag.outputs:
        b.output(name, new[i])
    return prune(b.build())


def prune(dag: GateDag) -> GateDag:
    """Drop nodes no output reaches (inputs always stay) and renumber in order."""
    live = {i for _, i in dag.inputs}
    stack = [i for _, i in dag.outputs]
    while stack:
        i = stack.pop()
        if i in live and dag.nodes[i].kind is not Kind.INPUT:
            continue
        live.add(i)
        stack.extend(dag.nodes[i].operands)
    remap = {}
    nodes = []
    for n in dag.nodes:
        if n.id in live:
            remap[n.id] = len(nodes)
            nodes.append(Node(len(nodes), n.kind, tuple(remap[o] for o in n.operands)))
    return GateDag(
        tuple(nodes),
        tuple((name, remap[i]) for name, i in dag.inputs),
        tuple((name, remap[i]) for name, i in dag.outputs),
    )


# --- parsing ----------------------------------------------------------------

_NAME = r"[A-Za-z_][\w\[\].$]*"
_ASSIGN = re.compile(rf"^({_NAME})\s*=\s*(?:([A-Za-z]\w*)\s*\((.*)\)|({_NAME}))$")


def parse_netlist(text: str, format="structural") -> GateDag:
    fmt = NetlistFormat(format)
    if fmt is NetlistFormat.BLIF:
        return _parse_blif(text)
    return _parse_structural(text)


def _parse_structural(text: str) -> GateDag:
    inputs: list[str] = []
    outputs: list[str] = []
    defs: dict[str, tuple] = {}  # name -> (kind or None for alias, args, lineno)
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, _, rest = line.partition(" ")
        if head in ("INPUT", "OUTPUT"):
            names = rest.replace(",", " ").split()
            if not names:
                raise NetlistSyntaxError(f"{head} without names", lineno)
            for nm in names:
                if not re.fullmatch(_NAME, nm):
                    raise NetlistSyntaxError(f"bad signal name {nm!r}", lineno)
            (inputs if head == "INPUT" else outputs).extend(names)
            continue
        m = _ASSIGN.match(line)
        if not m:
            raise NetlistSyntaxError(f"cannot parse {line!r}", lineno)
        target, op, args, alias = m.groups()
        if target in defs or target in inputs:
            raise NetlistSyntaxError(f"{target!r} defined twice", lineno)
        if alias is not None:
            defs[target] = (None, [alias], lineno)
            continue
        try:
            kind = Kind(op.upper())
        except ValueError:
            raise NetlistSyntaxError(f"unknown gate {op!r}", lineno) from None
        if kind is Kind.INPUT:
            raise NetlistSyntaxError("INPUT is not a gate", lineno)
        arglist = [a.strip() for a in args.split(",")] if args.strip() else []
        for a in arglist:
            if not re.fullmatch(_NAME, a):
                raise NetlistSyntaxError(f"bad operand {a!r}", lineno)
        if kind in (Kind.CONST0, Kind.CONST1) and arglist:
            raise NetlistSyntaxError(f"{kind.value} takes no operands", lineno)
        if kind is Kind.NOT and len(arglist) != 1:
            raise NetlistSyntaxError("NOT takes exactly one operand", lineno)
        if kind in (Kind.NOR, Kind.AND, Kind.OR, Kind.XOR) and not arglist:
            raise NetlistSyntaxError(f"{kind.value} needs operands", lineno)
        defs[target] = (kind, arglist, lineno)
    if len(set(inputs)) != len(inputs):
        raise NetlistSyntaxError("duplicate INPUT name")
    if not outputs:
        raise NetlistSyntaxError("netlist declares no OUTPUT")
    for nm in set(inputs) & defs.keys():
        raise NetlistSyntaxError(f"input {nm!r} is also assigned", defs[nm][2])

    b = DagBuilder()
    ids = {nm: b.input(nm) for nm in inputs}

    def build(_name, kind, arglist):
        if kind in (Kind.CONST0, Kind.CONST1):
            return b.add(kind)
        return b._append(kind, tuple(ids[a] for a in arglist))

    _resolve(defs, ids, build, outputs)
    for nm in outputs:
        b.output(nm, ids[nm])
    return b.build()


def _resolve(defs, ids, build, roots):
    """Materialize definitions reachable from ``roots`` in dependency order."""
    state = {}  # name -> 1 visiting, 2 done
    order = list(roots) + [n for n in defs if n not in roots]
    for root in order:
        if root in ids:
            continue
        stack = [(root, False)]
        while stack:
            name, expanded = stack.pop()
            if name in ids:
                continue
            if name not in defs:
                raise NetlistSyntaxError(f"undefined signal {name!r}")
            kind, args, lineno = defs[name]
            if expanded:
                ids[name] = ids[args[0]] if kind is None else build(name, kind, args)
                state[name] = 2
                continue
            if state.get(name) == 1:
                raise CycleDetected(f"combinational cycle through {name!r} (line {lineno})")
            state[name] = 1
            stack.append((name, True))
            for a in reversed(args):
                if a not in ids:
                    if state.get(a) == 1:
                        raise CycleDetected(f"combinational cycle through {a!r}")
                    stack.append((a, False))


_BLIF_UNSUPPORTED = {
    ".latch": "latches (.latch)",
    ".mlatch": "latches (.mlatch)",
    ".subckt": "hierarchical subcircuits (.subckt)",
    ".gate": "library gates (.gate)",
    ".clock": "clocks (.clock)",
    ".exdc": "external don't-cares (.exdc)",
    ".search": "file inclusion (.search)",
    ".start_kiss": "state machines (.start_kiss)",
}
_PLA_DIRECTIVES = {".i", ".o", ".p", ".ilb", ".ob", ".type", ".e", ".phase"}


def _blif_lines(text):
    buf, start = "", None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].rstrip()
        if start is None:
            start = lineno
        if line.endswith("\\"):
            buf += line[:-1] + " "
            continue
        buf += line
        if buf.strip():
            yield start, buf.split()
        buf, start = "", None
    if buf.strip():
        yield start, buf.split()


def _parse_blif(text: str) -> GateDag:
    inputs: list[str] = []
    outputs: list[str] = []
    covers: dict[str, tuple] = {}  # output -> (input names, cube rows, lineno)
    current = None
    seen_model = ended = False
    for lineno, toks in _blif_lines(text):
        head = toks[0]
        if head.startswith("."):
            current = None
            if ended:
                raise UnsupportedBlifFeature("content after .end (multiple models)", lineno)
            if head in _PLA_DIRECTIVES:
                raise UnsupportedBlifFeature(f".pla input ({head}) is not supported; convert to BLIF", lineno)
            if head in _BLIF_UNSUPPORTED:
                raise UnsupportedBlifFeature(f"{_BLIF_UNSUPPORTED[head]} not supported", lineno)
            if head == ".model":
                if seen_model:
                    raise UnsupportedBlifFeature("multiple .model blocks", lineno)
                seen_model = True
            elif head == ".inputs":
                inputs.extend(toks[1:])
            elif head == ".outputs":
                outputs.extend(toks[1:])
            elif head == ".names":
                if len(toks) < 2:
                    raise NetlistSyntaxError(".names needs an output signal", lineno)
                ins, out = toks[1:-1], toks[-1]
                if len(ins) > BLIF_MAX_INPUTS:
                    raise UnsupportedBlifFeature(
                        f".names with {len(ins)} inputs (limit {BLIF_MAX_INPUTS})", lineno)
                if out in covers or out in inputs:
                    raise NetlistSyntaxError(f"{out!r} driven twice", lineno)
                current = out
                covers[out] = (ins, [], lineno)
            elif head == ".end":
                ended = True
            else:
                raise UnsupportedBlifFeature(f"directive {head}", lineno)
            continue
        if current is None:
            raise NetlistSyntaxError(f"cover row outside .names: {' '.join(toks)!r}", lineno)
        ins, rows, _ = covers[current]
        if ins:
            if len(toks) != 2 or len(toks[0]) != len(ins):
                raise NetlistSyntaxError("cover row must be '<input plane> <output>'", lineno)
            plane, val = toks
        else:
            if len(toks) != 1:
                raise NetlistSyntaxError("constant cover row must be a single bit", lineno)
            plane, val = "", toks[0]
        if set(plane) - set("01-") or val not in ("0", "1"):
            raise NetlistSyntaxError(f"bad cover row {' '.join(toks)!r}", lineno)
        rows.append((plane, int(val)))
    if not outputs:
        raise NetlistSyntaxError("BLIF model declares no .outputs")

    b = DagBuilder()
    ids = {nm: b.input(nm) for nm in inputs}
    defs = {out: ("cover", ins, ln) for out, (ins, _, ln) in covers.items()}

    def build(out, _kind, ins):
        return _cover_to_sop(b, [ids[i] for i in ins], covers[out][1], covers[out][2])

    _resolve(defs, ids, build, outputs)
    for nm in outputs:
        b.output(nm, ids[nm])
    return prune(b.build())


def _cover_to_sop(b: DagBuilder, in_ids, rows, lineno) -> int:
    n = len(in_ids)
    polarity = {v for _, v in rows}
    if len(polarity) > 1:
        raise NetlistSyntaxError("cover mixes on-set and off-set rows", lineno)
    table = []
    for bits in itertools.product((0, 1), repeat=n):
        hit = any(all(c == "-" or int(c) == x for c, x in zip(plane, bits)) for plane, _ in rows)
        table.append(int(hit) if polarity != {0} else int(not hit))
    if not any(table):
        return b.const(0)
    if all(table):
        return b.const(1)
    terms = []
    for bits, val in zip(itertools.product((0, 1), repeat=n), table):
        if not val:
            continue
        lits = [i if x else b.add(Kind.NOT, i) for i, x in zip(in_ids, bits)]
        terms.append(lits[0] if len(lits) == 1 else b.add(Kind.AND, *lits))
    return terms[0] if len(terms) == 1 else b.add(Kind.OR, *terms)
