"""File formats, trace lines, canonical JSON, artifact round-trips."""

import json
import re

import numpy as np
import pytest

from majcert.concepts import (BooleanFunction, Certificate, InputDomain,
                              PConceptClass, RealFunction)
from majcert.decompose import majority_certificates
from majcert.errors import RejectedInputError
from majcert.formats import (boolean_decomposition_from_json,
                             boolean_decomposition_to_json, boolean_from_hex,
                             boolean_to_hex, canonical_json,
                             certificate_from_json, certificate_to_json,
                             circuit_from_text, circuit_to_text, format_float,
                             l1_winnow_trace_lines, read_circuit,
                             read_real_tables, read_truth_tables,
                             real_decomposition_from_json,
                             real_decomposition_to_json,
                             safe_winnow_trace_lines, state_from_json,
                             state_to_json, write_circuit, write_real_tables,
                             write_truth_tables)
from majcert.generators import point_function_class, random_pconcept_class
from majcert.qsim import Circuit, Gate, random_mixed_state
from majcert.rng import substream
from majcert.winnow import epsilon_cover, l1_winnow, safe_winnow


def test_boolean_hex_is_msb_first():
    domain = InputDomain(2)
    f = BooleanFunction.point(domain, 0)
    # table bits are f(0)f(1)f(2)f(3) = 1000, MSB-first -> 0x8
    assert boolean_to_hex(f) == "8"
    assert boolean_from_hex(domain, "8").bits == f.bits
    g = BooleanFunction.point(domain, 3)
    assert boolean_to_hex(g) == "1"


def test_truth_table_roundtrip(tmp_path):
    S = point_function_class(3)
    path = tmp_path / "tables.txt"
    write_truth_tables(path, S)
    text = path.read_text()
    assert text.startswith("n=3\n")
    back = read_truth_tables(path)
    assert back == S


def test_truth_table_header_required(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("deadbeef\n")
    with pytest.raises(RejectedInputError):
        read_truth_tables(path)


def test_real_table_roundtrip(tmp_path):
    S = random_pconcept_class(3, 5, substream(1, 0))
    path = tmp_path / "tables.csv"
    write_real_tables(path, S)
    back = read_real_tables(path, S.domain)
    assert back == S  # repr round-trip keeps tables bit-exact


def test_circuit_roundtrip(tmp_path):
    circuit = Circuit(qubits=3,
                      gates=(Gate("H", 0), Gate("CNOT", 2, control=0),
                             Gate("X", 1, when_bit=3),
                             Gate("CNOT", 0, control=1, when_bit=0)),
                      accept_qubit=2)
    path = tmp_path / "circuit.txt"
    write_circuit(path, circuit)
    back = read_circuit(path)
    assert back == circuit
    text = circuit_to_text(circuit)
    assert text.splitlines()[0] == "qubits=3 accept=2"


def test_circuit_text_errors():
    with pytest.raises(RejectedInputError):
        circuit_from_text("")
    with pytest.raises(RejectedInputError):
        circuit_from_text("cats=3\nH 0\n")


def test_trace_line_format():
    rng = substream(3, 0)
    domain = InputDomain(2)
    members = []
    for base in (0.2, 0.8):
        for _ in range(5):
            table = np.array([0.5, base, base, base]) + rng.uniform(-0.01, 0.01, 4)
            members.append(RealFunction(domain, np.clip(table, 0, 1)))
    S = PConceptClass(domain, members)
    cover = epsilon_cover(S, 0.05)
    result = safe_winnow(S, S[0], {0}, 0.05, cover)
    lines = safe_winnow_trace_lines(result)
    assert lines
    pattern = re.compile(r"^step=\d+ action=(split|replace|add) input=0x[0-9a-f]+")
    for line in lines:
        assert pattern.match(line)

    steps = []
    l1 = l1_winnow(S, 0.05, epsilon_cover(S, 0.05), trace_out=steps)
    for line in l1_winnow_trace_lines(l1, steps):
        assert pattern.match(line)
        assert "M=" in line


def test_canonical_json_formatting():
    assert canonical_json({"b": 1, "a": 0.5}) == '{"a":0.5,"b":1}\n'
    assert format_float(1.0) == "1.0"
    assert format_float(0.123456789012345) == "0.123456789012"
    assert canonical_json([True, False, None]) == "[true,false,null]\n"
    from fractions import Fraction
    assert canonical_json(Fraction(3, 16)) == '"3/16"\n'
    with pytest.raises(RejectedInputError):
        canonical_json(float("nan"))


def test_canonical_json_is_valid_json():
    blob = {"floats": [0.1, 1e-9, 123456.789], "nested": {"z": [1, 2], "a": "x"}}
    text = canonical_json(blob)
    parsed = json.loads(text)
    assert parsed["nested"]["a"] == "x"


def test_certificate_json_roundtrip():
    domain = InputDomain(3)
    cert = Certificate.of(domain, {0: 1, 5: 0})
    data = certificate_to_json(cert)
    assert data == {"points": ["0x0", "0x5"], "bits": [1, 0]}
    assert certificate_from_json(domain, data).assignments == cert.assignments


def test_boolean_decomposition_roundtrip():
    S = point_function_class(3)
    dec = majority_certificates(S, S[0], seed=4)
    data = boolean_decomposition_to_json(dec, S, 4, "majority")
    S2, dec2 = boolean_decomposition_from_json(json.loads(json.dumps(data)))
    assert S2 == S
    dec2.validate(S2)
    assert dec2.m == dec.m


def test_real_decomposition_roundtrip():
    from majcert.decompose import RealDecomposition, verify_real_decomposition
    S = random_pconcept_class(2, 6, substream(5, 0))
    dec = RealDecomposition(target=S[0], funcs=(S[0],),
                            points=(frozenset({0, 2}),), alpha=0.01, m=1, eps=0.5)
    data = real_decomposition_to_json(dec, S, 7)
    S2, dec2 = real_decomposition_from_json(json.loads(json.dumps(data)))
    assert S2 == S
    assert verify_real_decomposition(S2, dec2) == verify_real_decomposition(S, dec)


def test_state_json_roundtrip():
    state = random_mixed_state(2, substream(6, 0))
    back = state_from_json(2, state_to_json(state))
    assert np.allclose(back.entries, state.entries, atol=0)
