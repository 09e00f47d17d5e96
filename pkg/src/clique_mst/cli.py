"""Command-line front end.

    clique-mst solve {mst,sf,components} (--input FILE | --gen SPEC) [--verify] [--ledger FILE]
    clique-mst bench {mst,sf} --n 64,128,256,512 --density 8 [--seeds 0,1] [--kind gnm]
    clique-mst gen SPEC [-o FILE]

Exit codes: 0 success, 1 verification mismatch, 2 usage or parse error,
3 accounting or protocol violation.
"""
from __future__ import annotations

import argparse
import configparser
import csv
import io
import sys
from typing import Sequence

from .clique_sim import Clique, Constants, SimulationError
from .graph import Graph, GraphError, format_graph, generate_graph, parse_gen_spec, parse_graph
from .mst import mst
from .oracle import connected_components_bfs, kruskal
from .spanning_forest import InvariantViolation, spanning_forest

EXIT_OK, EXIT_MISMATCH, EXIT_USAGE, EXIT_PROTOCOL = 0, 1, 2, 3

BENCH_FIELDS = (
    "algorithm",
    "kind",
    "n",
    "m",
    "seed",
    "direct_rounds",
    "routing_invocations",
    "total_words",
    "words_per_edge",
    "max_processor_words",
    "words_per_n",
    "match",
)


class UsageError(Exception):
    pass


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _constants(text: str | None) -> Constants:
    """``c_part=4,c_route=8`` -> Constants."""
    base = Constants()
    if not text:
        return base
    known = set(base.__dict__)
    kw = {}
    for tok in filter(None, (t.strip() for t in text.split(","))):
        key, sep, val = tok.partition("=")
        if not sep or key not in known:
            raise UsageError(f"bad constant {tok!r}; known: {', '.join(sorted(known))}")
        try:
            kw[key] = int(val)
        except ValueError:
            raise UsageError(f"constant {key} needs an integer") from None
        if kw[key] < 1:
            raise UsageError(f"constant {key} must be positive")
    return base.override(**kw)


def load_graph(args) -> tuple[str, Graph]:
    if args.input:
        with open(args.input, encoding="utf-8") as fh:
            return f"file:{args.input}", parse_graph(fh.read())
    kind, params, seed = parse_gen_spec(args.gen)
    if "seed=" not in args.gen and args.seed is not None:
        seed = args.seed
    desc = f"gen:{kind}:" + ",".join(f"{k}={v}" for k, v in params.items()) + f",seed={seed}"
    return desc, generate_graph(kind, seed=seed, **params)


def run_algorithm(algorithm: str, g: Graph, net: Clique) -> dict:
    """Run one pipeline; returns result fields and the oracle comparison."""
    if algorithm == "mst":
        r = mst(g, net)
        expect = kruskal(g)
        return {
            "edges": r.edges,
            "weight": r.weight,
            "extra": {"sparsified_edges": r.sparsified, "batches": r.batches, "instances": r.instances},
            "expected": expect,
        }
    f = spanning_forest(g, net)
    cc = connected_components_bfs(g)
    if algorithm == "sf":
        # n - c edges spanning exactly the components is a forest
        fc = connected_components_bfs(Graph(g.n, tuple(g.edge_map[e] for e in f.edges)))
        ok = len(f.edges) == g.n - cc.count and fc.comp == cc.comp
        return {
            "edges": f.edges,
            "weight": g.total_weight(f.edges),
            "extra": {"components": len(set(f.comp))},
            "expected": f.edges if ok else None,
        }
    got = list(f.comp)
    return {
        "edges": None,
        "labels": got,
        "extra": {"components": len(set(got))},
        "expected_labels": list(cc.comp),
    }


def build_report(desc: str, algorithm: str, g: Graph, net: Clique, res: dict, verify: bool) -> str:
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    cp["run"] = {"input": desc, "algorithm": algorithm, "n": str(g.n), "m": str(g.m)}
    result = {}
    if res.get("edges") is not None:
        result["edge_count"] = str(len(res["edges"]))
        result["total_weight"] = str(res["weight"])
        result["edges"] = " ".join(map(str, res["edges"]))
    else:
        result["labels"] = " ".join(map(str, res["labels"]))
    result.update({k: str(v) for k, v in res["extra"].items()})
    cp["result"] = result
    s = net.ledger.summary()
    cp["ledger"] = {k: str(v) for k, v in s.items()}
    c = net.constants
    cp["constants"] = {
        **{k: str(v) for k, v in c.__dict__.items()},
        "words_per_edge": f"{s['total_words'] / max(1, g.m):.4f}",
        "max_words_per_n": f"{s['max_processor_words'] / max(1, net.n):.4f}",
    }
    if verify:
        cp["verify"] = {"verdict": "MATCH" if _matches(res) else "MISMATCH"}
    buf = io.StringIO()
    cp.write(buf)
    return buf.getvalue()


def _matches(res: dict) -> bool:
    if "expected_labels" in res:
        return res["labels"] == res["expected_labels"]
    return res["expected"] is not None and res["edges"] == res["expected"]


def _diff(res: dict) -> str:
    if "expected_labels" in res:
        bad = [x for x, (a, b) in enumerate(zip(res["labels"], res["expected_labels"])) if a != b]
        return f"label mismatch at vertices {bad[:20]}"
    if res["expected"] is None:
        return "forest does not span the connected components"
    got, want = set(res["edges"]), set(res["expected"])
    return f"missing {sorted(want - got)[:20]} extra {sorted(got - want)[:20]}"


def cmd_solve(args, out=None) -> int:
    out = out or sys.stdout
    desc, g = load_graph(args)
    net = Clique(max(1, g.n), _constants(args.constants), args.rounds_limit)
    res = run_algorithm(args.algorithm, g, net)
    out.write(build_report(desc, args.algorithm, g, net, res, args.verify))
    if args.ledger:
        with open(args.ledger, "w", encoding="utf-8", newline="") as fh:
            fh.write(net.ledger.to_csv())
    if args.verify and not _matches(res):
        print(f"verification failed: {_diff(res)}", file=sys.stderr)
        return EXIT_MISMATCH
    return EXIT_OK


def _bench_m(n: int, rule: str) -> int:
    if rule == "n/4":
        m = n * n // 4
    else:
        try:
            m = int(rule) * n
        except ValueError:
            raise UsageError(f"density must be an integer or n/4, got {rule!r}") from None
    return min(m, n * (n - 1) // 2)


def cmd_bench(args, out=None) -> int:
    out = out or sys.stdout
    consts = _constants(args.constants)
    w = csv.writer(out, lineterminator="\n")
    w.writerow(BENCH_FIELDS)
    rounds = set()
    worst = 0.0
    for n in args.n:
        for seed in args.seeds:
            m = _bench_m(n, args.density)
            params = {"n": n, "m": m} if args.kind != "regular" else {"n": n, "d": min(n - 1, 2 * m // max(1, n))}
            g = generate_graph(args.kind, seed=seed, **params)
            net = Clique(max(1, g.n), consts, args.rounds_limit)
            res = run_algorithm(args.algorithm, g, net)
            s = net.ledger.summary()
            rounds.add(s["direct_rounds"])
            wpe = s["total_words"] / max(1, g.m)
            worst = max(worst, wpe)
            w.writerow(
                [
                    args.algorithm,
                    args.kind,
                    g.n,
                    g.m,
                    seed,
                    s["direct_rounds"],
                    s["routing_invocations"],
                    s["total_words"],
                    f"{wpe:.4f}",
                    s["max_processor_words"],
                    f"{s['max_processor_words'] / max(1, g.n):.4f}",
                    int(_matches(res)),
                ]
            )
    if rounds:
        print(f"# fitted C = {worst:.4f} words per edge", file=sys.stderr)
    if len(rounds) > 1:
        print(f"# WARNING: direct-round count varies across the sweep: {sorted(rounds)}", file=sys.stderr)
    return EXIT_OK


def cmd_gen(args, out=None) -> int:
    out = out or sys.stdout
    kind, params, seed = parse_gen_spec(args.spec)
    if "seed=" not in args.spec and args.seed is not None:
        seed = args.seed
    text = format_graph(generate_graph(kind, seed=seed, **params))
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        out.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="clique-mst", description="Congested clique MST simulator.")
    sub = p.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="generator seed when the spec has none")
    common.add_argument("--rounds-limit", type=int, default=None, help="abort after this many simulated rounds")
    common.add_argument("--constants", default=None, help="overrides such as c_part=4,c_route=4,c_gather=4")

    s = sub.add_parser("solve", parents=[common], help="run one pipeline on one graph")
    s.add_argument("algorithm", choices=("mst", "sf", "components"))
    src = s.add_mutually_exclusive_group(required=True)
    src.add_argument("--input", help="edge-list file")
    src.add_argument("--gen", help="generator spec, e.g. gnm:256,4096,seed=5")
    s.add_argument("--verify", action="store_true", help="compare with the sequential oracle")
    s.add_argument("--ledger", help="write per-round per-processor word counts as CSV")
    s.set_defaults(func=cmd_solve)

    b = sub.add_parser("bench", parents=[common], help="size sweep as CSV")
    b.add_argument("algorithm", choices=("mst", "sf"))
    b.add_argument("--n", type=_int_list, default=[64, 128, 256, 512])
    b.add_argument("--density", default="8", help="m/n as an integer, or n/4")
    b.add_argument("--seeds", type=_int_list, default=[0])
    b.add_argument("--kind", default="gnm", choices=("gnm", "two-scale", "regular"))
    b.set_defaults(func=cmd_bench)

    gp = sub.add_parser("gen", parents=[common], help="write a generated graph")
    gp.add_argument("spec")
    gp.add_argument("-o", "--output")
    gp.set_defaults(func=cmd_gen)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_OK
    try:
        return args.func(args)
    except (GraphError, UsageError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (SimulationError, InvariantViolation) as e:
        print(f"protocol error: {e}", file=sys.stderr)
        return EXIT_PROTOCOL


if __name__ == "__main__":
    sys.exit(main())
