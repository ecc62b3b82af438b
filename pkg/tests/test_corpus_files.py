from pathlib import Path

import numpy as np
import pytest

from mmpu import corpus
from mmpu.netlist import parse_netlist, truth_table

CORPUS = Path(__file__).resolve().parents[1] / "corpus"


@pytest.mark.parametrize("fname, fmt, dag", [
    ("fulladder.nl", "structural", corpus.full_adder()),
    ("fulladder.blif", "blif", corpus.full_adder()),
    ("xor2.nl", "structural", corpus.xor2()),
    ("mux2.nl", "structural", corpus.mux2()),
    ("ripple4.nl", "structural", corpus.ripple_adder(4)),
    ("notchain64.nl", "structural", corpus.not_chain(64)),
])
def test_files_match_generators(fname, fmt, dag):
    parsed = parse_netlist((CORPUS / fname).read_text(), fmt)
    assert parsed.input_names == dag.input_names and parsed.output_names == dag.output_names
    a, b = truth_table(parsed), truth_table(dag)
    for o in dag.output_names:
        assert np.array_equal(a[o], b[o])


def test_notchain_file_keeps_its_gates():
    assert parse_netlist((CORPUS / "notchain64.nl").read_text()).gate_count == 64
