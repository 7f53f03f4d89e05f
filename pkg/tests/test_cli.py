import json
import subprocess
import sys
from pathlib import Path

import pytest

from liftsim.cli import main
from liftsim.dtrees import brute_force_Ddt, parity_problem, problem_to_json
from liftsim.gadgets import builtin_gadget
from liftsim.protocols import canonical_protocol, protocol_to_json


@pytest.fixture(scope="module")
def files(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    problem = parity_problem(2)
    (root / "parity2.json").write_text(problem_to_json(problem))
    (root / "parity3.json").write_text(problem_to_json(parity_problem(3)))
    _, tree = brute_force_Ddt(problem)
    proto = canonical_protocol(tree, builtin_gadget("ip2"))
    (root / "proto.json").write_text(protocol_to_json(proto))
    (root / "bad_gadget.json").write_text('{"b": 1, "rows": ["01"]}')
    return root


def run_cli(args, capsys):
    code = main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_gadget_analyze(capsys):
    code, out, _ = run_cli(["gadget", "analyze", "--gadget", "xor1",
                            "--xor-power", "1", "2"], capsys)
    assert code == 0
    assert "discrepancy: 1/4" in out
    assert "sandwich=holds" in out
    code, out, _ = run_cli(["gadget", "analyze", "--gadget", "and1"], capsys)
    assert "discrepancy: 1/2" in out


def test_gadget_analyze_bad_file(files, capsys):
    code, _, err = run_cli(["gadget", "analyze", "--gadget",
                            str(files / "bad_gadget.json")], capsys)
    assert code == 2
    assert "error:" in err


def test_lift_det(files, capsys):
    code, out, _ = run_cli(["lift", "--protocol", str(files / "proto.json"),
                            "--gadget", "ip2", "--z", "10",
                            "--out", str(files / "trace.json")], capsys)
    assert code == 0
    assert "status: done" in out
    assert "certification: x=" in out
    doc = json.loads((files / "trace.json").read_text())
    assert doc["rho"] == "10"


def test_lift_rand_enumerate(files, capsys):
    code, out, _ = run_cli(["lift", "--protocol", str(files / "proto.json"),
                            "--gadget", "ip2", "--z", "01", "--mode", "rand",
                            "--enumerate", "--seed", "4"], capsys)
    assert code == 0
    assert "error-halt mass (K)" in out
    assert "TV distance" in out


def test_lift_randomized_protocol_file(files, capsys):
    import json as _json
    from fractions import Fraction
    from liftsim.protocols import (RandomizedProtocol, protocol_from_json,
                                   randomized_protocol_to_json)
    proto = protocol_from_json((files / "proto.json").read_text())
    rp = RandomizedProtocol(((Fraction(1, 2), proto), (Fraction(1, 2), proto)))
    (files / "rproto.json").write_text(randomized_protocol_to_json(rp))
    code, out, _ = run_cli(["lift", "--protocol", str(files / "rproto.json"),
                            "--gadget", "ip2", "--z", "11", "--mode", "rand",
                            "--enumerate", "--seed", "2"], capsys)
    assert code == 0
    assert "sampled component:" in out
    assert "TV distance" in out
    code, _, err = run_cli(["lift", "--protocol", str(files / "rproto.json"),
                            "--gadget", "ip2", "--z", "11"], capsys)
    assert code == 2 and "--mode rand" in err


def test_lift_dimension_mismatch(files, capsys):
    code, _, err = run_cli(["lift", "--protocol", str(files / "proto.json"),
                            "--gadget", "xor1", "--z", "01"], capsys)
    assert code == 2 and "block length" in err


def test_oracle_dt(files, capsys):
    code, out, _ = run_cli(["oracle", "dt", "--problem", str(files / "parity3.json"),
                            "--out", str(files / "tree.json")], capsys)
    assert code == 0
    assert "deterministic query complexity: 3" in out
    # emitted files round-trip through their own parsers
    from liftsim.dtrees import tree_from_json, run_tree
    tree = tree_from_json((files / "tree.json").read_text())
    assert tree.query_complexity() == 3
    assert run_tree(tree, 0b101)[0] == "0"
    code, _, err = run_cli(["oracle", "dt", "--problem", str(files / "parity3.json"),
                            "--budget-n", "2"], capsys)
    assert code == 2 and "budget" in err


def test_gadget_out_roundtrip(files, capsys):
    out_path = files / "ip2.json"
    code, _, _ = run_cli(["gadget", "analyze", "--gadget", "ip2",
                          "--out", str(out_path)], capsys)
    assert code == 0
    from liftsim.gadgets import builtin_gadget, gadget_from_json
    assert gadget_from_json(out_path.read_text()) == builtin_gadget("ip2")


def test_verify_empty_spec(files, capsys):
    spec = files / "empty.json"
    spec.write_text("{}")
    code, out, _ = run_cli(["verify", str(spec)], capsys)
    assert code == 0
    assert "overall: OK" in out


def test_verify_fixture_violation(files, capsys):
    spec = files / "fixture.json"
    spec.write_text('{"seed": 3, "fixture_planted_violation": true}')
    code, out, _ = run_cli(["verify", str(spec)], capsys)
    assert code == 1
    assert "COUNTEREXAMPLES FOUND" in out


def test_verify_small_spec_deterministic(files, capsys):
    spec = files / "small.json"
    spec.write_text(json.dumps({
        "seed": 11,
        "fourier": {"count": 5},
        "xor_lemma": {"gadgets": ["xor1"], "powers": [1, 2]},
    }))
    out_a = files / "rep_a.json"
    out_b = files / "rep_b.json"
    code_a, _, _ = run_cli(["verify", str(spec), "--out", str(out_a)], capsys)
    code_b, _, _ = run_cli(["verify", str(spec), "--out", str(out_b)], capsys)
    assert code_a == code_b == 0
    assert out_a.read_bytes() == out_b.read_bytes()


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "liftsim.cli", "gadget",
                           "analyze", "--gadget", "ip1"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "discrepancy: 1/2" in proc.stdout
