import json
import subprocess
import sys

import pytest
from hypothesis import given

from ramseylab.classes import AmalgamationBase, find_amalgam, girth5_ordered
from ramseylab.cli import main
from ramseylab.formats import (
    ParseError, builtin_structure, load_family, parse_family, parse_signature,
    parse_structure, print_family, print_structure, structure_from_json,
)
from ramseylab.indiscernibles import IndexedFamily
from ramseylab.structures import Embedding, linear_order, ordered_graph

from strategies import ordered_graphs

SIG = "signature: <:2 order, R:2 symmetric antireflexive"


def test_minimal_structure_file():
    S = parse_structure(f"{SIG}\ndomain: 1\n")
    assert S == ordered_graph(1)


def test_symmetric_relation_stored_both_ways():
    S = parse_structure(f"{SIG}\ndomain: 2\nR: 0 1\n")
    assert S.table("R") == {(0, 1), (1, 0)}


def test_non_strict_order_is_a_parse_error():
    with pytest.raises(ParseError, match="strict"):
        parse_structure(f"{SIG}\ndomain: 2\n<: 0 1, 1 0\n")


def test_parse_errors_carry_lines():
    with pytest.raises(ParseError) as exc:
        parse_structure(f"{SIG}\ndomain: 2\nrel Q: 0 1\n")
    assert exc.value.line == 3
    with pytest.raises(ParseError):
        parse_signature("R:0")
    with pytest.raises(ParseError):
        parse_structure("domain: 2\n")


def test_semicolons_and_comments():
    S = parse_structure(f"{SIG}; domain: 3  # three points\nrel R: 0 2\n")
    assert S == ordered_graph(3, [(0, 2)])


@given(ordered_graphs(max_size=6))
def test_structure_round_trip(G):
    assert parse_structure(print_structure(G)) == G


def test_builtins():
    assert builtin_structure("order4") == linear_order(4)
    assert builtin_structure("clique3") == ordered_graph(3, [(0, 1), (0, 2), (1, 2)])
    assert builtin_structure("sat2").size == 3
    assert builtin_structure("membership3").size == 11
    assert builtin_structure("nonsense") is None


def test_family_round_trip(tmp_path):
    fam = IndexedFamily(ordered_graph(3, [(0, 1)]), linear_order(5), (0, 2, 4))
    text = print_family(fam)
    assert parse_family(text) == fam
    (tmp_path / "f.fam").write_text("index path3\ntarget order4\nmap: 0 -> 3\nmap: 1 -> 1\nmap: 2 -> 0\n")
    fam2, _ = load_family(str(tmp_path / "f.fam"))
    assert fam2.map == ((3,), (1,), (0,))


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


def tags(out):
    return {line.split(" ", 1)[0]: line.split(" ", 1)[1] for line in out.splitlines() if line.startswith("@")}


def test_cli_arrow_holds(capsys):
    code, out = run(capsys, "arrow", "--C", "order6", "--B", "order3", "--A", "order2", "-k", "2", "--mode", "exhaustive")
    assert code == 0 and tags(out)["@verdict"] == "holds"


def test_cli_arrow_fails_with_coloring(capsys):
    code, out = run(capsys, "arrow", "--C", "order5", "--B", "order3", "--A", "order2", "-k", "2")
    assert code == 1
    cert = json.loads(tags(out)["@certificate"])
    assert len(cert["bad_coloring"]["colors"]) == 10


def test_cli_arrow_inconclusive(capsys):
    code, out = run(capsys, "arrow", "--C", "order6", "--B", "order3", "--A", "order2", "-k", "2",
                    "--mode", "search", "--node-limit", "3")
    assert code == 2 and tags(out)["@verdict"] == "inconclusive"


def test_cli_cnf_export(capsys, tmp_path):
    path = tmp_path / "r5.cnf"
    code, _ = run(capsys, "arrow", "--C", "order5", "--B", "order3", "--A", "order2", "-k", "2",
                  "--mode", "cnf", "--cnf-out", str(path))
    assert code == 1 and path.read_text().count("p cnf 20") == 1


def test_cli_girth_ap_certificate_reverifies(capsys):
    code, out = run(capsys, "class-check", "--class", "girth5-ordered", "--bound", "3", "--props", "ap")
    assert code == 1
    cert = json.loads(tags(out)["@certificate"])
    base = cert["ap"]
    A = structure_from_json(base["A"])
    B1, B2 = structure_from_json(base["B1"]), structure_from_json(base["B2"])
    f1 = Embedding(A, B1, tuple(base["f1"]["map"]))
    f2 = Embedding(A, B2, tuple(base["f2"]["map"]))
    assert find_amalgam(girth5_ordered(), AmalgamationBase(A, B1, B2, f1, f2)) is None


def test_cli_class_file(capsys, tmp_path):
    (tmp_path / "tri.txt").write_text("forbid clique3\nsize-cap: 4\n")
    code, out = run(capsys, "class-check", "--class", str(tmp_path / "tri.txt"), "--bound", "3",
                    "--props", "hereditary,jep")
    assert code == 0


def test_cli_fraisse(capsys, tmp_path):
    out_file = tmp_path / "s2.txt"
    code, _ = run(capsys, "fraisse", "--level", "2", "--out", str(out_file))
    assert code == 0
    assert parse_structure(out_file.read_text()).size == 3
    code, _ = run(capsys, "fraisse", "--level", "5")
    assert code == 64


def test_cli_extract_and_checks(capsys, tmp_path):
    (tmp_path / "raw.fam").write_text("index sat2\ntarget order3\nmap: 0 -> 0\nmap: 1 -> 1\nmap: 2 -> 2\n")
    (tmp_path / "delta.txt").write_text("lt(x1, x2)\n")
    (tmp_path / "edge.txt").write_text(f"{SIG}\ndomain: 2\nR: 0 1\n")
    out = tmp_path / "out.fam"
    code, _ = run(capsys, "extract", "--family", str(tmp_path / "raw.fam"), "--delta",
                  str(tmp_path / "delta.txt"), "--shape", "edge.txt", "--r", "2", "--out", str(out))
    assert code == 0
    code, _ = run(capsys, "check-ind", "--family", str(out), "--delta", str(tmp_path / "delta.txt"),
                  "--bound", "2")
    assert code == 0
    code, _ = run(capsys, "based-on", "--newer", str(out), "--older", str(tmp_path / "raw.fam"),
                  "--sigma", str(tmp_path / "delta.txt"), "--bound", "2")
    assert code == 0


def test_cli_nip_demo_linear_order(capsys):
    code, out = run(capsys, "nip-demo", "--target", "linear-order", "--level", "2")
    assert code == 0 and "order-indiscernible: collapse none" in out


def test_cli_error_codes(capsys, tmp_path):
    assert run(capsys, "bogus")[0] == 64
    assert run(capsys, "arrow", "--C", str(tmp_path / "missing"), "--B", "order3", "--A", "order2", "-k", "2")[0] == 66
    bad = tmp_path / "bad.txt"
    bad.write_text(f"{SIG}\ndomain: 2\n<: 0 1, 1 0\n")
    assert run(capsys, "arrow", "--C", str(bad), "--B", "order3", "--A", "order2", "-k", "2")[0] == 65


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "ramseylab", "--version"], capture_output=True, text=True)
    assert res.returncode == 0
    assert res.stdout.startswith("ramseylab ") and "kernels" in res.stdout
