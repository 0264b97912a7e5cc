"""Command-line front end: parse, reduce, analyze, compare and export nets.

Nets go to stdout as net-source, verdicts and analyses as JSON, pictures as
DOT.  Diagnostics go to stderr.  Exit codes: 2 parse error, 3 invariant
violation, 4 interface mismatch.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from .edifice import (
    address_json, all_obs_paths, canonicalize, closure_profile, finiteness_verdict,
    renumber_after_feedback, trace_addresses, truncate,
)
from .encodings import CORPUS_NAMES, corpus, fixture_source
from .equivalence import ax_eq_up_to, beta_eps_eq, fin_ax_eq, observability, visible_eq
from .goi import Yes, No, execution_formula, goi_matrix, matrix_json
from .netcore import (
    FREE, InterfaceMismatch, Kind, Net, NetError, ParseError, canonical_structure, decompose,
    feedback, is_cut_free, observable_axioms, parse_net, port_name, serialize_net,
    vicious_circles,
)
from .rewrite import (
    Blind, Observable, blindness_oracle, eps_reduce, full_round, parse_strategy, reduce,
)

EXIT_PARSE = 2
EXIT_INVARIANT = 3
EXIT_INTERFACE = 4


# ---------------------------------------------------------------------------
# input and output

def read_source(path: str) -> str:
    """Read a file, stdin for "-", or a corpus fixture by name."""
    if path == "-":
        return sys.stdin.read()
    p = Path(path)
    if p.exists():
        return p.read_text()
    name = p.name[:-4] if p.name.endswith(".net") else p.name
    if name in CORPUS_NAMES and not p.parent.parts:
        return fixture_source(name)
    raise FileNotFoundError(path)


def load(path: str) -> Net:
    net = parse_net(read_source(path))
    net.validate()
    return net


def emit_json(obj) -> None:
    json.dump(obj, sys.stdout, indent=2, ensure_ascii=False)
    sys.stdout.write("\n")


def to_dot(net: Net, name: str | None = None) -> str:
    """Deterministic DOT; principal ports drawn as bold line ends, active pairs in red."""
    order, wires = canonical_structure(net)
    names = {c: f"c{i}" for i, c in enumerate(order)}
    shapes = {"delta": "triangle", "zeta": "invtriangle", "eps": "circle"}
    lines = [f'graph "{name or net.name}" {{', "  node [fontname=\"Helvetica\"];"]
    for k in range(1, net.interface + 1):
        lines.append(f'  free{k} [label="{k}", shape=plaintext];')
    for c in order:
        kind = net.kinds[c]
        lines.append(f'  {names[c]} [label="{kind.letter}", shape={shapes[kind.value]}];')
    for i in range(net.loops):
        lines.append(f'  loop{i} [label="", shape=circle, width=0.2];')

    def node(p) -> str:
        return f"free{p[1]}" if p[0] == FREE else names[p[0]]

    def end(p) -> str:
        return "" if p[0] == FREE else port_name(p, names).split(".")[1]

    for a, b in wires:
        attrs = [f'taillabel="{end(a)}"', f'headlabel="{end(b)}"']
        principal = [p[0] != FREE and p[1] == 0 for p in (a, b)]
        if all(principal):
            attrs.append("color=red, penwidth=2")
        elif any(principal):
            attrs.append("penwidth=2")
        lines.append(f"  {node(a)} -- {node(b)} [{', '.join(attrs)}];")
    for i in range(net.loops):
        lines.append(f"  loop{i} -- loop{i};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def _nil_json(verdict) -> dict:
    if isinstance(verdict, Yes):
        return {"nilpotent": "Yes", "power": verdict.h}
    if isinstance(verdict, No):
        return {"nilpotent": "No", "certificate": verdict.certificate}
    return {"nilpotent": "Unknown", "budget": verdict.budget}


# ---------------------------------------------------------------------------
# commands

def cmd_parse(args) -> int:
    net = load(args.file)
    if args.info:
        emit_json({
            "interface": net.interface,
            "cells": {kind.value: net.count(kind) for kind in Kind},
            "loops": net.loops,
            "active_pairs": len(net.active_pairs()),
            "vicious_circles": len(vicious_circles(net)),
            "cut_free": is_cut_free(net),
        })
    else:
        sys.stdout.write(serialize_net(net))
    return 0


def cmd_reduce(args) -> int:
    net = load(args.file)
    if args.eps:
        out = eps_reduce(net, args.budget, trace=args.trace)
    else:
        out = reduce(net, parse_strategy(args.strategy), args.budget, trace=args.trace)
    sys.stdout.write(serialize_net(out.net))
    for line in out.trace_lines():
        sys.stdout.write(f"# {line}\n")
    sys.stdout.write(f"# status: {out.status} rounds: {out.rounds} steps: {out.steps}\n")
    return 0


def cmd_obs(args) -> int:
    net = load(args.file)
    addrs, complete = all_obs_paths(net, args.budget)
    blind = blindness_oracle(net, args.budget)
    emit_json({
        "observable_axioms": address_json(observable_axioms(net)),
        "all_obs_paths": address_json(addrs),
        "complete": complete,
        "finiteness": finiteness_verdict(net, args.budget).value,
        "observability": observability(net, args.budget).value,
        "blindness": ("Blind" if isinstance(blind, Blind) else
                      "Observable" if isinstance(blind, Observable) else "Unknown"),
    })
    return 0


def cmd_goi(args) -> int:
    net = load(args.file)
    if is_cut_free(net) and not net.loops:
        emit_json({"cut_free": True, "matrix": matrix_json(goi_matrix(net))})
        return 0
    nu, sigma = decompose(net)
    verdict, matrix = execution_formula(nu, sigma, args.budget)
    emit_json({"cut_free": False, "feedback": {str(k): v for k, v in sorted(sigma.items())},
               **_nil_json(verdict), "matrix": matrix_json(matrix)})
    return 0


def cmd_ed(args) -> int:
    net = load(args.file)
    addrs, complete = all_obs_paths(net, args.budget)
    out = {"generators": address_json(canonicalize(addrs)), "complete": complete,
           "finiteness": finiteness_verdict(net, args.budget).value}
    if args.depth is not None:
        out["truncation"] = {"depth": args.depth,
                             "arches": address_json(truncate(addrs, args.depth).arches)}
    emit_json(out)
    return 0


def parse_feedback(text: str):
    pairs = []
    for item in filter(None, text.split(",")):
        i, j = item.split("-")
        pairs.append((int(i), int(j)))
    return feedback(*pairs)


def cmd_trace(args) -> int:
    net = load(args.file)
    if not is_cut_free(net):
        raise NetError("trace needs a cut-free net")
    sigma = parse_feedback(args.feedback)
    if any(k > net.interface for k in sigma):
        raise NetError(f"feedback port outside 1..{net.interface}")
    addrs, complete = trace_addresses(observable_axioms(net), sigma, args.max_len)
    emit_json({"trace": address_json(renumber_after_feedback(addrs, sigma, net.interface)),
               "complete": complete})
    return 0


def cmd_eq(args) -> int:
    a, b = load(args.a), load(args.b)
    if args.mode == "beta-eps":
        v = beta_eps_eq(a, b, args.budget or 12)
    elif args.mode == "fin-ax":
        v = fin_ax_eq(a, b, args.budget or 16)
    elif args.mode == "ax":
        v = ax_eq_up_to(a, b, args.depth, args.budget or 16)
    else:
        v = visible_eq(a, b, args.budget or 16)
    emit_json(v.to_json())
    return 0


def cmd_dot(args) -> int:
    sys.stdout.write(to_dot(load(args.file)))
    return 0


def cmd_corpus(args) -> int:
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        for name in CORPUS_NAMES:
            (out / f"{name}.net").write_text(fixture_source(name))
    if args.name:
        if args.name not in CORPUS_NAMES:
            print(f"unknown corpus net '{args.name}'", file=sys.stderr)
            return 1
        sys.stdout.write(fixture_source(args.name))
        return 0
    nets = corpus()
    emit_json([{"name": name, "interface": nets[name].interface, "cells": len(nets[name].kinds),
                "loops": nets[name].loops} for name in CORPUS_NAMES])
    return 0


def address_growth(net: Net, rounds: int, max_cells: int = 5000) -> list[dict]:
    """Observable axioms seen at each full-parallel round."""
    cur = net.copy()
    seen: set = set()
    rows = []
    for r in range(rounds + 1):
        obs = observable_axioms(cur)
        new = obs - seen
        seen |= obs
        rows.append({"round": r, "cells": len(cur.kinds), "active_pairs": len(cur.active_pairs()),
                     "observable": len(obs), "new": len(new), "cumulative": len(seen),
                     "canonical": len(canonicalize(seen))})
        if not cur.active_pairs() or len(cur.kinds) > max_cells:
            break
        full_round(cur)
    return rows


def _plot_growth(rows: list[dict], path: Path, title: str) -> None:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6, 4))
    xs = [r["round"] for r in rows]
    ax.plot(xs, [r["cumulative"] for r in rows], marker="o", label="addresses seen")
    ax.plot(xs, [r["canonical"] for r in rows], marker="s", label="canonical generators")
    ax.plot(xs, [r["observable"] for r in rows], marker="^", label="observable now")
    ax.set_xlabel("full-parallel round")
    ax.set_ylabel("count")
    ax.set_title(title)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def _write_csv(path: Path, rows: list[dict]) -> None:
    with path.open("w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]))
        w.writeheader()
        w.writerows(rows)


def cmd_report(args) -> int:
    net = load(args.file)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    stem = Path(args.file).stem or "net"
    rows = address_growth(net, args.rounds)
    growth_csv, growth_png = out / f"{stem}_growth.csv", out / f"{stem}_growth.png"
    _write_csv(growth_csv, rows)
    _plot_growth(rows, growth_png, stem)
    summary = {"growth_csv": str(growth_csv), "growth_png": str(growth_png),
               "rounds": len(rows) - 1, "final_cumulative": rows[-1]["cumulative"]}
    if args.against:
        other = load(args.against)
        if other.interface != net.interface:
            raise InterfaceMismatch(f"interfaces differ: {net.interface} and {other.interface}")
        a, _ = all_obs_paths(net, args.budget)
        b, _ = all_obs_paths(other, args.budget)
        profile = closure_profile(a, b, args.depth)
        prow = [{"depth": d, "equal": eq, "arches_first": len(truncate(a, d).arches),
                 "arches_second": len(truncate(b, d).arches)} for d, eq in enumerate(profile)]
        prof_csv = out / f"{stem}_vs_{Path(args.against).stem}_profile.csv"
        _write_csv(prof_csv, prow)
        summary["profile_csv"] = str(prof_csv)
        summary["profile"] = profile
    emit_json(summary)
    return 0


# ---------------------------------------------------------------------------
# entry point

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="symcomb", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", help="validate and print canonical net-source")
    p.add_argument("file")
    p.add_argument("--info", action="store_true", help="print a JSON summary instead")
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("reduce", help="reduce a net")
    p.add_argument("file")
    p.add_argument("--strategy", default="full", help="full, leftmost or random:SEED")
    p.add_argument("--budget", type=int, default=100)
    p.add_argument("--eps", action="store_true", help="interleave eps-reduction")
    p.add_argument("--trace", action="store_true", help="append the firing log as comments")
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("obs", help="observable axioms and observability verdicts")
    p.add_argument("file")
    p.add_argument("--budget", type=int, default=16)
    p.set_defaults(func=cmd_obs)

    p = sub.add_parser("goi", help="GoI matrix, or the execution formula of a net with cuts")
    p.add_argument("file")
    p.add_argument("--budget", type=int, default=32, help="matrix power budget")
    p.set_defaults(func=cmd_goi)

    p = sub.add_parser("ed", help="generators of the edifice")
    p.add_argument("file")
    p.add_argument("--budget", type=int, default=16)
    p.add_argument("--depth", type=int, default=None, help="also print the truncation")
    p.set_defaults(func=cmd_ed)

    p = sub.add_parser("trace", help="trace of a cut-free net's edifice along a feedback")
    p.add_argument("file")
    p.add_argument("--feedback", required=True, help="pairs like 1-2,3-4")
    p.add_argument("--max-len", type=int, default=12)
    p.set_defaults(func=cmd_trace)

    p = sub.add_parser("eq", help="compare two nets")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("--mode", choices=["beta-eps", "fin-ax", "ax", "visible"], default="fin-ax")
    p.add_argument("--depth", type=int, default=5)
    p.add_argument("--budget", type=int, default=None)
    p.set_defaults(func=cmd_eq)

    p = sub.add_parser("dot", help="DOT picture of a net")
    p.add_argument("file")
    p.set_defaults(func=cmd_dot)

    p = sub.add_parser("corpus", help="list, print or export the shipped nets")
    p.add_argument("name", nargs="?")
    p.add_argument("--out", help="write every corpus net into this directory")
    p.set_defaults(func=cmd_corpus)

    p = sub.add_parser("report", help="address growth per round and truncation profile")
    p.add_argument("file")
    p.add_argument("--rounds", type=int, default=12)
    p.add_argument("--against", help="second net for the per-depth truncation profile")
    p.add_argument("--depth", type=int, default=6)
    p.add_argument("--budget", type=int, default=16)
    p.add_argument("--out", default="report")
    p.set_defaults(func=cmd_report)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ParseError as e:
        print(f"parse error: {e}", file=sys.stderr)
        return EXIT_PARSE
    except InterfaceMismatch as e:
        print(f"interface mismatch: {e}", file=sys.stderr)
        return EXIT_INTERFACE
    except (NetError, ValueError) as e:
        print(f"invalid: {e}", file=sys.stderr)
        return EXIT_INVARIANT
    except FileNotFoundError as e:
        print(f"no such file: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
