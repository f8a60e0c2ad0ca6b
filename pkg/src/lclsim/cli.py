"""Command-line experiment runner.

Subcommands: ``gen`` (graph files), ``run`` (algorithms + matching
verifier), ``speedup`` (inequality reports), ``bounds`` (calculator
tables).  Every command is deterministic given its arguments and seed;
JSON outputs carry a provenance block with the tool version, the seed and
a hash of the resolved configuration.

Exit codes: 0 success, 1 verification failure, 2 configuration error,
3 exact-enumeration budget exceeded.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import random
import sys
from fractions import Fraction

from . import __version__
from .algorithms import (homogeneous_dispatch, solve_pointer_labeling,
                         solve_pointer_labeling_local, weak_family_to_weak2,
                         weak_to_weak2c)
from .bounds import (global_success_upper_bound, id_collision_bound,
                     recurrence_bound, zero_round_optimum)
from .engine import Assignment, LocalAlgorithm
from .errors import (BudgetExceededError, DomainError, InvalidInputError,
                     InvalidInstanceError, InvalidLabelingError,
                     InvalidParameterError, PSolverViolation)
from .graph import PortedGraph, dumps_canonical, gen_cycle, gen_regular_tree, \
    gen_symlower_pair
from .problems import (verify_homogeneous, verify_pointer_labeling,
                       verify_weak_coloring, verifier_report)
from .speedup import (SpeedupConfig, constant_edge_algorithm,
                      constant_node_algorithm, center_mod_node_algorithm,
                      ball_parity_node_algorithm, endpoint_sum_edge_algorithm,
                      own_bit_node_algorithm, random_edge_algorithm,
                      random_node_algorithm, verify_speedup_inequality,
                      default_f_grid, xor_edge_algorithm)

EXIT_OK = 0
EXIT_VERIFICATION = 1
EXIT_CONFIG = 2
EXIT_BUDGET = 3

CONFIG_VERSION = 1


def thread_count():
    """LCLSIM_THREADS is honored by recording it in provenance; the exact
    kernels are already vectorized and run single-threaded."""
    try:
        return max(1, int(os.environ.get("LCLSIM_THREADS", "1")))
    except ValueError:
        return 1


def provenance(args_dict):
    blob = dumps_canonical(args_dict)
    return {
        "tool": "lclsim",
        "version": __version__,
        "seed": args_dict.get("seed"),
        "threads": thread_count(),
        "config_hash": hashlib.sha256(blob.encode()).hexdigest(),
    }


def write_json(path, obj):
    text = dumps_canonical(obj)
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def parse_fraction(text):
    if "/" in text:
        num, den = text.split("/", 1)
        return Fraction(int(num), int(den))
    return Fraction(text)


# ---------------------------------------------------------------------------
# gen
# ---------------------------------------------------------------------------


def cmd_gen(args):
    if args.family == "regular-tree":
        g = gen_regular_tree(args.delta, args.radius)
        g.save(args.out)
        print(f"wrote {args.out}: n={g.n} delta={g.delta} oriented=yes")
    elif args.family == "cycle":
        g = gen_cycle(args.n)
        g.save(args.out)
        print(f"wrote {args.out}: n={g.n} delta={g.delta} oriented=no")
    elif args.family == "symlower":
        t_graph, t_prime, center = gen_symlower_pair(args.delta, args.r)
        t_graph.save(args.out_prefix + "_t.json")
        t_prime.save(args.out_prefix + "_tprime.json")
        print(f"wrote {args.out_prefix}_t.json and {args.out_prefix}_tprime.json: "
              f"n={t_graph.n} center={center}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# run
# ---------------------------------------------------------------------------


def random_valid_weak_coloring(g, c, k, seed, repair_passes=20):
    """Seeded random distance-k weak c-coloring.

    Starts from a uniform coloring and repairs monochromatic balls; if the
    repair sweep does not settle, falls back to random colors stratified by
    BFS-depth parity classes (odd colors vs even colors), which is valid on
    any connected graph with at least two nodes.
    """
    from .problems import _sees_other_color
    if g.n < 2:
        raise InvalidInputError("weak colorings need at least two nodes")
    rng = random.Random(seed)
    phi = {v: rng.randrange(1, c + 1) for v in range(g.n)}
    for _ in range(repair_passes):
        bad = [v for v, ok in verify_weak_coloring(g, phi, c, k).items() if not ok]
        if not bad:
            return phi
        for v in bad:
            if _sees_other_color(g, v, phi, k):
                continue
            u = g.adjacent(v)[0]
            phi[u] = phi[v] % c + 1
    from .graph import bfs_distances
    depth = bfs_distances(g, 0)
    odd = [col for col in range(1, c + 1) if col % 2 == 1]
    even = [col for col in range(1, c + 1) if col % 2 == 0]
    for block in (rng.randrange(1, k + 1), 1):
        phi = {v: rng.choice(odd if (depth[v] // block) % 2 == 0 else even)
               for v in range(g.n)}
        if all(verify_weak_coloring(g, phi, c, k).values()):
            return phi
    raise InvalidInputError("could not build a valid weak coloring")


def _load_coloring(path):
    with open(path) as fh:
        raw = json.load(fh)
    return {int(v): col for v, col in raw.items()}


def cmd_run(args):
    g = PortedGraph.load(args.graph)
    prov = provenance(vars(args))

    if args.algorithm in ("weak-family-to-weak2", "weak-to-weak2c"):
        if args.coloring:
            phi = _load_coloring(args.coloring)
        else:
            phi = random_valid_weak_coloring(g, args.c, args.k, args.seed)
        if args.algorithm == "weak-to-weak2c":
            phi2, rounds, _ = weak_to_weak2c(g, phi, args.k, args.c)
            results = verify_weak_coloring(g, phi2, 2 * args.c, 1)
            payload = {"labels": {str(v): phi2[v] for v in phi2},
                       "rounds": rounds}
            problem = f"weak-{2 * args.c}-coloring(distance 1)"
        else:
            res = weak_family_to_weak2(g, phi, args.k, args.c)
            results = verify_weak_coloring(g, res.labels, 2, 1)
            payload = {"labels": {str(v): res.labels[v] for v in res.labels},
                       "rounds": res.rounds, "stage_rounds": res.stage_rounds}
            if args.dump_stages:
                from .algorithms import (build_pseudoforest,
                                         cole_vishkin_reduce, mis_to_weak2)
                phi2, _, _ = weak_to_weak2c(g, phi, args.k, args.c,
                                            validate=False)
                pf = build_pseudoforest(g, phi2)
                psi, _ = cole_vishkin_reduce(pf, phi2, 2 * args.c)
                mis, _ = mis_to_weak2(pf, psi)
                payload["stages"] = {
                    "input": {str(v): phi[v] for v in phi},
                    "recolored": {str(v): phi2[v] for v in phi2},
                    "pseudoforest_ports": {str(v): p
                                           for v, p in pf.out_port.items()},
                    "three_coloring": {str(v): psi[v] for v in psi},
                    "independent_set": {str(v): mis[v] for v in mis},
                }
            problem = "weak-2-coloring"
    elif args.algorithm == "solve-pointers":
        a = Assignment.random(g, b=1, seed=args.seed, with_ids=True)
        labels, rounds = solve_pointer_labeling(g, a)
        results = verify_pointer_labeling(g, labels, g.delta)
        payload = {"labels": {str(v): {"d": lab.d, "port": lab.port}
                              for v, lab in labels.items()},
                   "rounds": rounds}
        problem = "pointer-labeling"
    elif args.algorithm == "solve-pointers-local":
        a = Assignment.random(g, b=1, seed=args.seed, with_ids=True)
        labels = solve_pointer_labeling_local(g, args.r, a)
        results = {v: True for v in labels}  # coverage reported, not judged
        payload = {"labels": {str(v): {"d": lab.d, "port": lab.port}
                              for v, lab in labels.items()},
                   "labeled": len(labels), "radius": args.r}
        problem = "pointer-labeling(local)"
    elif args.algorithm == "homogeneous-constant":
        a = Assignment.random(g, b=1, seed=args.seed, with_ids=True)
        solver = LocalAlgorithm(rounds=0, kind="node", rule=lambda view: 1,
                                name="constant-inner")
        labels = homogeneous_dispatch(
            g, solver, lambda gg, v, inner: inner.get(v) == 1, args.r, a)
        results = verify_homogeneous(
            g, labels, lambda gg, v, inner: inner.get(v) == 1, g.delta)
        payload = {"labels": {
            str(v): {"inner": lab.inner,
                     "pointer": None if lab.pointer is None
                     else {"d": lab.pointer.d, "port": lab.pointer.port}}
            for v, lab in labels.items()}}
        problem = "homogeneous(constant inner)"
    else:
        print(f"unknown algorithm {args.algorithm!r}", file=sys.stderr)
        return EXIT_CONFIG

    report = verifier_report(problem, results)
    out = {"provenance": prov, "report": report, **payload}
    write_json(args.out, out)
    if report["fail_nodes"]:
        print(f"verification FAILED at {len(report['fail_nodes'])} nodes",
              file=sys.stderr)
        return EXIT_VERIFICATION
    print(f"{problem}: all {report['pass_count']} nodes pass "
          f"(rounds={payload.get('rounds', 'n/a')})")
    return EXIT_OK


# ---------------------------------------------------------------------------
# speedup
# ---------------------------------------------------------------------------

NODE_SOURCES = {
    "own-bit": lambda d, t, b, c, seed: own_bit_node_algorithm(d, t, b, c),
    "constant": lambda d, t, b, c, seed: constant_node_algorithm(d, t, b, c),
    "parity": lambda d, t, b, c, seed: ball_parity_node_algorithm(d, t, b, c),
    "center-mod": lambda d, t, b, c, seed: center_mod_node_algorithm(d, t, b, c),
    "random": random_node_algorithm,
}

EDGE_SOURCES = {
    "xor": lambda d, t, b, c, seed: xor_edge_algorithm(d, t, b),
    "constant": lambda d, t, b, c, seed: constant_edge_algorithm(d, t, b, c),
    "endpoint-sum": lambda d, t, b, c, seed: endpoint_sum_edge_algorithm(d, t, b, c),
    "random": random_edge_algorithm,
}


def cmd_speedup(args):
    sources = NODE_SOURCES if args.direction == 1 else EDGE_SOURCES
    if args.algorithm not in sources:
        print(f"unknown source algorithm {args.algorithm!r}", file=sys.stderr)
        return EXIT_CONFIG
    alg = sources[args.algorithm](args.delta, args.t, args.b, args.c, args.seed)
    cfg = SpeedupConfig(delta=args.delta, c=alg.c if args.direction == 1 else args.c,
                        t=args.t, f=parse_fraction(args.f), b=args.b)
    g = gen_regular_tree(args.delta, args.t + 2)
    report = verify_speedup_inequality(
        g, alg, None, cfg, args.direction,
        f_grid=default_f_grid(args.grid) if args.grid else [])
    obj = report.to_json_obj()
    obj["provenance"] = provenance(vars(args))
    obj["source"] = alg.name
    write_json(args.out, obj)
    print(f"direction {args.direction} [{alg.name}]: p={float(report.p):.6g} "
          f"p'={float(report.p_prime):.6g} inequality "
          f"{'holds' if report.inequality_holds else 'VIOLATED'}")
    return EXIT_OK if report.inequality_holds else EXIT_VERIFICATION


# ---------------------------------------------------------------------------
# bounds
# ---------------------------------------------------------------------------


def _emit_table(rows, header, args):
    if args.format == "csv":
        lines = [",".join(header)]
        lines += [",".join(str(r[h]) for h in header) for r in rows]
        text = "\n".join(lines) + "\n"
        if args.out in (None, "-"):
            sys.stdout.write(text)
        else:
            with open(args.out, "w") as fh:
                fh.write(text)
    else:
        write_json(args.out, {"provenance": provenance(vars(args)), "rows": rows})
    return EXIT_OK


def cmd_bounds(args):
    if args.calculator == "recurrence":
        rows = []
        for t in range(args.t + 1):
            rb = recurrence_bound(args.c0, parse_fraction(args.p0), t, args.delta)
            rows.append({"c0": args.c0, "t": t, "delta": args.delta,
                         "bound": float(rb.closed_form),
                         "log2_bound": _log2_fraction(rb.closed_form),
                         "agrees_with_iteration": rb.agree})
        return _emit_table(rows, ["c0", "t", "delta", "bound",
                                  "log2_bound", "agrees_with_iteration"], args)
    if args.calculator == "global":
        rows = []
        for n in args.n:
            gb = global_success_upper_bound(n, args.t, args.b)
            row = gb.to_json_obj()
            rows.append({"n": n, "t": args.t, "b": args.b,
                         "bound": row["value"], "relaxed": row["relaxed"],
                         "condition_holds": row["condition_holds"]})
        return _emit_table(rows, ["n", "t", "b", "bound", "relaxed",
                                  "condition_holds"], args)
    if args.calculator == "zero-round":
        rows = []
        for c in args.c:
            zr = zero_round_optimum(c, args.delta)
            rows.append({"c": c, "delta": args.delta,
                         "closed_form": float(zr.closed_form),
                         "numeric_minimum": zr.numeric_minimum,
                         "gap": abs(zr.numeric_minimum - float(zr.closed_form))})
        return _emit_table(rows, ["c", "delta", "closed_form",
                                  "numeric_minimum", "gap"], args)
    if args.calculator == "id-collision":
        rows = []
        for n in args.n:
            ib = id_collision_bound(n)
            rows.append({"n": n, "value": float(ib.value),
                         "bound": float(ib.bound), "holds": ib.holds})
        return _emit_table(rows, ["n", "value", "bound", "holds"], args)
    print(f"unknown calculator {args.calculator!r}", file=sys.stderr)
    return EXIT_CONFIG


def _log2_fraction(fr):
    # log2 of a positive rational without floating through zero
    return (fr.numerator.bit_length() - 1) - (fr.denominator.bit_length() - 1) \
        if fr > 0 else None


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser():
    p = argparse.ArgumentParser(prog="lclsim", description=__doc__)
    p.add_argument("--config", help="JSON config file (versioned; replaces flags)")
    sub = p.add_subparsers(dest="command")

    g = sub.add_parser("gen", help="generate graph files")
    gsub = g.add_subparsers(dest="family")
    rt = gsub.add_parser("regular-tree")
    rt.add_argument("--delta", type=int, required=True)
    rt.add_argument("--radius", type=int, required=True)
    rt.add_argument("--out", default="tree.json")
    cy = gsub.add_parser("cycle")
    cy.add_argument("--n", type=int, required=True)
    cy.add_argument("--out", default="cycle.json")
    sl = gsub.add_parser("symlower")
    sl.add_argument("--delta", type=int, required=True)
    sl.add_argument("--r", type=int, required=True)
    sl.add_argument("--out-prefix", default="symlower")

    r = sub.add_parser("run", help="run an algorithm and its verifier")
    r.add_argument("--algorithm", required=True,
                   choices=["weak-family-to-weak2", "weak-to-weak2c",
                            "solve-pointers", "solve-pointers-local",
                            "homogeneous-constant"])
    r.add_argument("--graph", required=True)
    r.add_argument("--k", type=int, default=1)
    r.add_argument("--c", type=int, default=2)
    r.add_argument("--r", type=int, default=2)
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--coloring", help="JSON node->color file (else random valid)")
    r.add_argument("--dump-stages", action="store_true")
    r.add_argument("--out", default="labeling.json")

    s = sub.add_parser("speedup", help="speedup inequality report")
    s.add_argument("--direction", type=int, choices=[1, 2], required=True)
    s.add_argument("--delta", type=int, default=4)
    s.add_argument("--b", type=int, default=1)
    s.add_argument("--c", type=int, default=2)
    s.add_argument("--t", type=int, default=1)
    s.add_argument("--f", default="1/40")
    s.add_argument("--grid", type=int, default=100)
    s.add_argument("--algorithm", default="own-bit")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", default="speedup.json")

    b = sub.add_parser("bounds", help="bound calculator tables")
    b.add_argument("calculator",
                   choices=["recurrence", "global", "zero-round", "id-collision"])
    b.add_argument("--c0", type=int, default=2)
    b.add_argument("--p0", default="1/16")
    b.add_argument("--t", type=int, default=3)
    b.add_argument("--b", type=int, default=1)
    b.add_argument("--delta", type=int, default=4)
    b.add_argument("--n", type=int, nargs="+", default=[4096])
    b.add_argument("--c", type=int, nargs="+", default=[2, 3, 4, 5, 6, 7, 8])
    b.add_argument("--format", choices=["json", "csv"], default="json")
    b.add_argument("--out", default="-")
    return p


def _apply_config(parser, argv):
    """A config file replaces the command line: version checked, unknown
    keys rejected."""
    if "--config" not in argv:
        return argv
    i = argv.index("--config")
    path = argv[i + 1]
    with open(path) as fh:
        cfg = json.load(fh)
    if cfg.pop("version", None) != CONFIG_VERSION:
        raise InvalidParameterError(f"config must declare version {CONFIG_VERSION}")
    command = cfg.pop("command", None)
    if command is None:
        raise InvalidParameterError("config lacks a command")
    out = command.split()
    for key, val in cfg.items():
        flag = "--" + key.replace("_", "-")
        if isinstance(val, bool):
            if val:
                out.append(flag)
        elif isinstance(val, list):
            out.extend([flag] + [str(x) for x in val])
        else:
            out.extend([flag, str(val)])
    return out


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        argv = _apply_config(parser, argv)
        try:
            args = parser.parse_args(argv)
        except SystemExit as exc:  # argparse exits on unknown flags
            return EXIT_CONFIG if exc.code else EXIT_OK
        if args.command is None:
            parser.print_help()
            return EXIT_CONFIG
        if args.command == "gen":
            if getattr(args, "family", None) is None:
                parser.print_help()
                return EXIT_CONFIG
            return cmd_gen(args)
        if args.command == "run":
            return cmd_run(args)
        if args.command == "speedup":
            return cmd_speedup(args)
        if args.command == "bounds":
            return cmd_bounds(args)
        return EXIT_CONFIG
    except BudgetExceededError as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (InvalidParameterError, InvalidInputError, InvalidLabelingError,
            InvalidInstanceError, DomainError, FileNotFoundError,
            json.JSONDecodeError, KeyError, ValueError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except PSolverViolation as exc:
        print(f"inner solver violation: {exc}", file=sys.stderr)
        return EXIT_VERIFICATION


if __name__ == "__main__":
    sys.exit(main())
