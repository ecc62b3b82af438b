"""Benchmark circuits used by the tests, the demos, and the corpus/ files."""

from __future__ import annotations

import numpy as np

from .netlist import DagBuilder, GateDag, Kind


def not_chain(n: int) -> GateDag:
    b = DagBuilder()
    x = b.input("a")
    for _ in range(n):
        x = b._append(Kind.NOT, (x,))
    b.output("y", x)
    return b.build()


def xor2() -> GateDag:
    b = DagBuilder()
    a, c = b.input("a"), b.input("b")
    b.output("y", b.add(Kind.XOR, a, c))
    return b.build()


def mux2() -> GateDag:
    b = DagBuilder()
    s, a, c = b.input("s"), b.input("a"), b.input("b")
    ns = b.add(Kind.NOT, s)
    b.output("y", b.add(Kind.OR, b.add(Kind.AND, ns, a), b.add(Kind.AND, s, c)))
    return b.build()


def _full_adder_cell(b: DagBuilder, a, c, cin):
    t = b.add(Kind.XOR, a, c)
    s = b.add(Kind.XOR, t, cin)
    cout = b.add(Kind.OR, b.add(Kind.AND, a, c), b.add(Kind.AND, t, cin))
    return s, cout


def full_adder() -> GateDag:
    b = DagBuilder()
    a, c, cin = b.input("a"), b.input("b"), b.input("cin")
    s, cout = _full_adder_cell(b, a, c, cin)
    b.output("sum", s)
    b.output("cout", cout)
    return b.build()


def ripple_adder(bits: int) -> GateDag:
    """``bits``-wide adder; inputs a0.., b0.., cin; outputs s0.. and cout (LSB first)."""
    b = DagBuilder()
    a = [b.input(f"a{i}") for i in range(bits)]
    c = [b.input(f"b{i}") for i in range(bits)]
    carry = b.input("cin")
    sums = []
    for i in range(bits):
        s, carry = _full_adder_cell(b, a[i], c[i], carry)
        sums.append(s)
    for i, s in enumerate(sums):
        b.output(f"s{i}", s)
    b.output("cout", carry)
    return b.build()


def nor_tree(n_inputs: int) -> GateDag:
    """Balanced tree of 2-input NORs over ``n_inputs`` (a power of two)."""
    b = DagBuilder()
    level = [b.input(f"x{i}") for i in range(n_inputs)]
    while len(level) > 1:
        level = [b._append(Kind.NOR, (level[i], level[i + 1])) for i in range(0, len(level), 2)]
    b.output("y", level[0])
    return b.build()


def random_nor_dag(seed: int, n_inputs: int = 6, n_gates: int = 20,
                   max_fanin: int = 3, n_outputs: int = 2) -> GateDag:
    """Random NOR/NOT DAG; operands drawn from any earlier node."""
    rng = np.random.default_rng(seed)
    b = DagBuilder()
    ids = [b.input(f"i{k}") for k in range(n_inputs)]
    for _ in range(n_gates):
        k = int(rng.integers(1, max_fanin + 1))
        ops = rng.choice(len(ids), size=min(k, len(ids)), replace=False)
        ops = tuple(sorted(ids[o] for o in ops))
        kind = Kind.NOT if len(ops) == 1 else Kind.NOR
        ids.append(b._append(kind, ops))
    gate_ids = ids[n_inputs:]
    picks = rng.choice(len(gate_ids), size=min(n_outputs, len(gate_ids)), replace=False)
    for j, p in enumerate(sorted(picks.tolist())):
        b.output(f"o{j}", gate_ids[p])
    return b.build()


def standard_corpus(n_random: int = 50, seed: int = 2024) -> dict[str, GateDag]:
    """The named corpus used by the compiler-equivalence checks."""
    corpus = {
        "not-chain-64": not_chain(64),
        "xor2": xor2(),
        "mux2": mux2(),
        "full-adder": full_adder(),
        "ripple-adder-4": ripple_adder(4),
    }
    rng = np.random.default_rng(seed)
    for k in range(n_random):
        n_in = int(rng.integers(2, 9))
        n_g = int(rng.integers(3, 41))
        corpus[f"random-{k:02d}"] = random_nor_dag(
            int(rng.integers(2**32)), n_inputs=n_in, n_gates=n_g,
            max_fanin=int(rng.integers(2, 5)), n_outputs=int(rng.integers(1, 4)),
        )
    return corpus
