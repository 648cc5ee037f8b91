"""Command-line front end.

Subcommands: params (derive and print), run (simulate either variant and
emit reports), verify-families (check the set-family properties).

Every flag can also be supplied through an environment variable with the
COLORSIM_ prefix (e.g. COLORSIM_DELTA=16); explicit flags win.  Exit codes:
0 success, 1 assertion or bound violation, 2 usage or IO error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor

from . import engine as eng
from . import report as rep
from .params import DeriveError, derive
from .setfamilies import (
    exit_family,
    fa_family,
    fb_family,
    fc_family,
    linial_family,
    member_set,
    verify_cover_free,
    verify_union_cover_free,
)
from .ss_rules import AdversarySchedule

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_USAGE = 2

ENV_PREFIX = "COLORSIM_"


def _env(name: str, fallback=None):
    return os.environ.get(ENV_PREFIX + name.upper().replace("-", "_"), fallback)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="colorsim",
        description="Distributed (delta+1)-coloring simulator: locally-iterative "
        "pipeline and self-stabilizing variant.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_params = sub.add_parser("params", help="derive and print all parameters for (n, delta)")
    p_params.add_argument("--n", type=int, default=_env("n"), required=_env("n") is None)
    p_params.add_argument(
        "--delta", type=int, default=_env("delta"), required=_env("delta") is None
    )
    p_params.add_argument("--json", action="store_true", default=bool(_env("json")))

    p_run = sub.add_parser("run", help="simulate a run and emit its report")
    p_run.add_argument("--variant", choices=("li", "ss"), default=_env("variant", "li"))
    p_run.add_argument("--graph", default=_env("graph"), help="edge-list file (u v per line)")
    p_run.add_argument(
        "--gen", choices=eng.GENERATOR_KINDS, default=_env("gen"), help="graph generator kind"
    )
    p_run.add_argument("--n", type=int, default=_env("n"))
    p_run.add_argument("--delta", type=int, default=_env("delta"))
    p_run.add_argument(
        "--seed", type=int, nargs="+", default=None, help="generator seed(s); one run per seed"
    )
    p_run.add_argument("--adversary", default=_env("adversary"), help="adversary schedule JSON file")
    p_run.add_argument("--horizon", type=int, default=_env("horizon"))
    p_run.add_argument("--rounds", type=int, default=_env("rounds"), help="max rounds override")
    p_run.add_argument("--extra-rounds", type=int, default=int(_env("extra_rounds", 1)))
    p_run.add_argument("--out", default=_env("out"), help="directory for report files")
    p_run.add_argument("--trace", choices=("summary", "full"), default=_env("trace", "summary"))
    p_run.add_argument("--figures", action="store_true", default=bool(_env("figures")))
    p_run.add_argument("--json", action="store_true", default=bool(_env("json")))
    p_run.add_argument("--jobs", type=int, default=int(_env("jobs", 1)))

    p_vf = sub.add_parser("verify-families", help="verify set-family properties at feasible scales")
    p_vf.add_argument("--n", type=int, default=_env("n"), required=_env("n") is None)
    p_vf.add_argument("--delta", type=int, default=_env("delta"), required=_env("delta") is None)
    p_vf.add_argument("--pairs", type=int, default=int(_env("pairs", 10000)))
    p_vf.add_argument("--seed", type=int, default=int(_env("seed", 0)))
    p_vf.add_argument(
        "--exhaustive-limit",
        type=int,
        default=int(_env("exhaustive_limit", 300)),
        help="largest family size checked exhaustively",
    )
    p_vf.add_argument(
        "--exhaustive",
        action="store_true",
        help="insist on exhaustive checks (refused if the family is oversize)",
    )
    p_vf.add_argument("--json", action="store_true", default=bool(_env("json")))
    return parser


def cmd_params(args) -> int:
    try:
        p = derive(args.n, args.delta)
    except DeriveError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    doc = p.to_dict()
    if args.json:
        print(json.dumps(doc, indent=2))
    else:
        for key, value in doc.items():
            print(f"{key}: {value}")
    return EXIT_OK


def _load_adversary(path):
    with open(path) as fh:
        return AdversarySchedule.from_json(json.load(fh))


def _run_one(cfg: dict):
    """One simulation run; module-level so it can cross process boundaries."""
    if cfg["graph_file"]:
        graph = eng.load_edge_list(cfg["graph_file"])
    else:
        graph = eng.gen_graph(cfg["gen"], cfg["n"], cfg["delta"], cfg["seed"])
    params = derive(graph.n, graph.delta)
    meta = {k: v for k, v in cfg.items() if v is not None}
    if cfg["variant"] == "ss":
        sched = _load_adversary(cfg["adversary"]) if cfg["adversary"] else None
        report = eng.run_ss(
            params,
            graph,
            sched,
            cfg["horizon"],
            record_trace=cfg["trace"] == "full",
            config=meta,
        )
    else:
        report = eng.run_li(
            params,
            graph,
            max_rounds=cfg["rounds"],
            extra_rounds=cfg["extra_rounds"],
            record_trace=cfg["trace"] == "full",
            config=meta,
        )
    return report


def cmd_run(args) -> int:
    if bool(args.graph) == bool(args.gen):
        print("error: exactly one of --graph or --gen is required", file=sys.stderr)
        return EXIT_USAGE
    if args.gen and (args.n is None or args.delta is None):
        print("error: --gen needs --n and --delta", file=sys.stderr)
        return EXIT_USAGE
    seeds = args.seed if args.seed is not None else [int(_env("seed", 0))]
    configs = [
        {
            "variant": args.variant,
            "graph_file": args.graph,
            "gen": args.gen,
            "n": args.n,
            "delta": args.delta,
            "seed": seed,
            "adversary": args.adversary,
            "horizon": args.horizon,
            "rounds": args.rounds,
            "extra_rounds": args.extra_rounds,
            "trace": args.trace,
        }
        for seed in seeds
    ]
    try:
        if args.jobs > 1 and len(configs) > 1:
            with ProcessPoolExecutor(max_workers=args.jobs) as pool:
                reports = list(pool.map(_run_one, configs))
        else:
            reports = [_run_one(cfg) for cfg in configs]
    except (OSError, ValueError, eng.GraphError, DeriveError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    all_ok = True
    docs = []
    for cfg, report in zip(configs, reports):
        stem = f"{report.variant}_s{cfg['seed']}"
        if args.out:
            rep.write_report(report, args.out, stem=stem, figures=args.figures)
        if args.json:
            docs.append(report.to_dict())
        status = "ok" if report.ok else "FAIL"
        landmark = (
            f"completion={report.completion_round}"
            if report.variant == "li"
            else f"t0={report.t0} stabilization={report.stabilization_round}"
        )
        print(
            f"{stem}: {status} n={report.graph_info['n']} delta={report.graph_info['delta']} "
            f"rounds={report.simulated_rounds} {landmark}"
        )
        if not report.ok:
            all_ok = False
            if report.hard_fault:
                print(f"  hard fault: {report.hard_fault}", file=sys.stderr)
            for check in report.bound_checks:
                if not check.ok:
                    print(
                        f"  failed: {check.name} (bound {check.bound}, observed {check.observed})",
                        file=sys.stderr,
                    )
    if args.json:
        print(json.dumps(docs if len(docs) > 1 else docs[0], indent=2))
    return EXIT_OK if all_ok else EXIT_VIOLATION


def cmd_verify_families(args) -> int:
    import random

    try:
        p = derive(args.n, args.delta)
    except DeriveError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    rng = random.Random(args.seed)
    results = []

    def check(family, label, prop, k, rho=None):
        size = family.family_size
        exhaustive_ok = size <= args.exhaustive_limit and family.prime <= 13
        if prop == "union-cover-free":
            # the exact multicover DP walks (rho+2)^prime states per target
            exhaustive_ok = exhaustive_ok and (rho + 2) ** family.prime <= 400_000
        if args.exhaustive and not exhaustive_ok:
            raise ValueError(
                f"{label}: family of size {size} (prime {family.prime}) is too large "
                f"for an exhaustive check; raise --exhaustive-limit or drop --exhaustive"
            )
        sets = None
        if exhaustive_ok:
            sets = [member_set(family, i) for i in range(size)]
            mode = "exhaustive"
            if prop == "cover-free":
                ok = verify_cover_free(sets, k)
            else:
                ok = verify_union_cover_free(sets, k, rho)
        else:
            mode = "sampled"
            idx = [rng.randrange(size) for _ in range(min(400, size))]
            sets = [member_set(family, i) for i in sorted(set(idx))]
            if prop == "cover-free":
                ok = verify_cover_free(sets, k, samples=300, seed=rng.randrange(2**31))
            else:
                ok = verify_union_cover_free(sets, k, rho, samples=300, seed=rng.randrange(2**31))
        results.append({"family": label, "property": prop, "k": k, "rho": rho, "mode": mode, "ok": ok})

    def check_intersections(family, label):
        worst = 0
        for _ in range(args.pairs):
            i = rng.randrange(family.family_size)
            j = rng.randrange(family.family_size)
            if i == j:
                continue
            worst = max(worst, len(member_set(family, i) & member_set(family, j)))
        ok = worst <= family.degree
        results.append(
            {
                "family": label,
                "property": "pairwise-intersection",
                "k": family.degree,
                "rho": None,
                "mode": f"{args.pairs} random pairs",
                "ok": ok,
            }
        )

    try:
        for t in range(1, p.r_star + 1):
            fam = linial_family(p, t)
            check(fam, f"linial-step-{t}", "cover-free", p.delta)
            check_intersections(fam, f"linial-step-{t}")
        if p.fallback:
            fam = exit_family(p)
            check(fam, "exit", "cover-free", p.delta)
            check_intersections(fam, "exit")
        else:
            check(fa_family(p), "fa", "union-cover-free", p.delta, p.rho)
            check_intersections(fa_family(p), "fa")
            check(fb_family(p), "fb", "cover-free", p.rho)
            check_intersections(fb_family(p), "fb")
            check(fc_family(p), "fc", "cover-free", 2 * p.rho)
            check_intersections(fc_family(p), "fc")
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    if args.json:
        print(json.dumps(results, indent=2))
    else:
        for r in results:
            flag = "pass" if r["ok"] else "FAIL"
            extra = f" rho={r['rho']}" if r["rho"] is not None else ""
            print(f"{r['family']}: {r['property']} k={r['k']}{extra} [{r['mode']}] {flag}")
    return EXIT_OK if all(r["ok"] for r in results) else EXIT_VIOLATION


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "params":
        return cmd_params(args)
    if args.command == "run":
        return cmd_run(args)
    return cmd_verify_families(args)


if __name__ == "__main__":
    sys.exit(main())
