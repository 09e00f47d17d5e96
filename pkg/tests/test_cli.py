import configparser

import pytest

from clique_mst.cli import main
from clique_mst.graph import parse_graph


def report(capsys, argv, code=0):
    assert main(argv) == code
    out = capsys.readouterr().out
    cp = configparser.ConfigParser(interpolation=None)
    cp.read_string(out)
    return cp


def test_solve_mst_gen_verify(capsys, tmp_path):
    ledger = tmp_path / "l.csv"
    cp = report(capsys, ["solve", "mst", "--gen", "gnm:256,4096,seed=5", "--verify", "--ledger", str(ledger)])
    assert cp["verify"]["verdict"] == "MATCH"
    assert cp["result"]["edge_count"] == "255"
    assert cp["ledger"]["direct_rounds"] == "5"
    assert ledger.read_text().startswith("round,processor,direct_sent,direct_recv,routed_sent,routed_recv\n")


def test_solve_sf_tree_file(capsys, tmp_path):
    f = tmp_path / "tree.el"
    assert main(["gen", "path:6", "-o", str(f)]) == 0
    cp = report(capsys, ["solve", "sf", "--input", str(f), "--verify"])
    assert cp["verify"]["verdict"] == "MATCH"
    assert cp["result"]["edges"] == "0 1 2 3 4"


def test_solve_components(capsys):
    cp = report(capsys, ["solve", "components", "--gen", "blocks:40,60,4", "--verify"])
    assert cp["verify"]["verdict"] == "MATCH"
    assert int(cp["result"]["components"]) >= 4


def test_parse_error_exit_code(capsys, tmp_path):
    bad = tmp_path / "bad.el"
    bad.write_text("3 2\n0 1 5\n1 x 2\n")
    assert main(["solve", "mst", "--input", str(bad)]) == 2
    assert "line 3" in capsys.readouterr().err


def test_usage_errors(capsys, tmp_path):
    assert main(["solve", "mst"]) == 2
    assert main(["solve", "mst", "--gen", "nope:3"]) == 2
    assert main(["solve", "mst", "--gen", "path:4", "--constants", "c_bogus=3"]) == 2
    assert main(["solve", "mst", "--input", str(tmp_path / "missing.el")]) == 2


def test_protocol_exit_code(capsys):
    assert main(["solve", "mst", "--gen", "gnm:64,512", "--rounds-limit", "3"]) == 3
    assert "round limit" in capsys.readouterr().err


def test_capacity_violation_exit_code(capsys):
    # a tight routing cap cannot carry the sparsification traffic
    assert main(["solve", "mst", "--gen", "gnm:64,2000", "--constants", "c_route=1"]) == 3
    assert "capacity" in capsys.readouterr().err


def test_seed_flag_applies_when_spec_has_none(capsys):
    a = report(capsys, ["solve", "mst", "--gen", "gnm:32,64", "--seed", "4"])
    b = report(capsys, ["solve", "mst", "--gen", "gnm:32,64,seed=4"])
    assert a["result"]["edges"] == b["result"]["edges"]
    assert a["run"]["input"] == b["run"]["input"]


def test_gen_is_deterministic_and_parses(capsys, tmp_path):
    a, b = tmp_path / "a.el", tmp_path / "b.el"
    main(["gen", "gnm:8,12,seed=7", "-o", str(a)])
    main(["gen", "gnm:8,12,seed=7", "-o", str(b)])
    assert a.read_bytes() == b.read_bytes()
    g = parse_graph(a.read_text())
    assert (g.n, g.m) == (8, 12)
    assert main(["gen", "path:4"]) == 0
    assert capsys.readouterr().out.splitlines()[0] == "4 3"


def test_bench_rows_and_constant_rounds(capsys):
    assert main(["bench", "mst", "--n", "16,32,64", "--density", "8"]) == 0
    captured = capsys.readouterr()
    rows = captured.out.strip().splitlines()
    assert rows[0].startswith("algorithm,kind,n,m,seed,direct_rounds")
    assert len(rows) == 4
    assert len({r.split(",")[5] for r in rows[1:]}) == 1
    assert all(r.endswith(",1") for r in rows[1:])
    assert "fitted C" in captured.err and "WARNING" not in captured.err


def test_bench_empty_sweep(capsys):
    assert main(["bench", "sf", "--n", ""]) == 0
    assert capsys.readouterr().out.strip().count("\n") == 0


@pytest.mark.parametrize("alg", ["mst", "sf", "components"])
def test_reports_are_byte_identical(capsys, alg):
    argv = ["solve", alg, "--gen", "two-scale:100,800,seed=2", "--verify"]
    main(argv)
    first = capsys.readouterr().out
    main(argv)
    assert capsys.readouterr().out == first


def test_mismatch_exit_code(capsys, monkeypatch):
    import clique_mst.cli as cli

    real = cli.mst

    def broken(g, net):
        r = real(g, net)
        r.edges = r.edges[:-1]
        return r

    monkeypatch.setattr(cli, "mst", broken)
    assert main(["solve", "mst", "--gen", "gnm:32,64", "--verify"]) == 1
    captured = capsys.readouterr()
    assert "verdict = MISMATCH" in captured.out and "missing" in captured.err
