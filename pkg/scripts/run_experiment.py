#!/usr/bin/env python3
"""Run the full eight-configuration latency matrix on one shared workload.

Synthesizes the graph, role tables, principal policy and request lists for
the given seed/scale, replays both request lists through every engine
configuration, and writes per-request rows plus summaries to CSV.

Desk-scale defaults (scale 1.0) mean a 100k-node / 1M-edge generated
graph, 67 principals over 10 formulas, and 400 requests per guard kind
with the first 200 treated as warmup.

    python scripts/run_experiment.py --seed 7 --out results.csv
    python scripts/run_experiment.py --seed 7 --scale 0.1 --nodes 5000 --edges 50000
"""

import argparse
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from rebac.bench import CONFIGURATIONS, BenchConfig, run_bench, write_csv
from rebac.synth import GeneratedGraph, SynthConfig, synthesize


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--scale", type=float, default=1.0)
    parser.add_argument("--nodes", type=int, help="generated graph node count override")
    parser.add_argument("--edges", type=int, help="generated graph edge count override")
    parser.add_argument("--graph-file", help="raw 'src dst' pair file instead of generation")
    parser.add_argument("--repetitions", type=int, default=1)
    parser.add_argument("--out", default="experiment.csv")
    args = parser.parse_args()

    source = args.graph_file or GeneratedGraph(args.nodes, args.edges)
    synth_cfg = SynthConfig(args.seed, args.scale, source)

    print(f"synthesizing workload (seed={args.seed}, scale={args.scale}) ...",
          flush=True)
    started = time.perf_counter()
    workload = synthesize(synth_cfg)
    print(f"  {len(workload.graph.vertices())} vertices, "
          f"{len(workload.graph.edge_set())} edges, "
          f"{len(workload.store.matching_rules)} principals, "
          f"{len(workload.requests['one-of'])} requests/guard kind "
          f"({time.perf_counter() - started:.1f}s)")

    reports = []
    print(f"{'config':<12} {'mean_us':>10} {'ci95_us':>9} {'allows':>7} "
          f"{'evals/req':>10} {'hits/req':>9}")
    for name in CONFIGURATIONS:
        cfg = BenchConfig(name, args.seed, args.scale, args.repetitions, source)
        report = run_bench(cfg, workload)
        reports.append(report)
        print(f"{name:<12} {report.mean_us:>10.1f} {report.ci95_us:>9.1f} "
              f"{sum(report.allows):>7} {report.mean_formula_evals:>10.2f} "
              f"{report.mean_cache_hits:>9.2f}")

    write_csv(reports, args.out)
    print(f"\nwrote {args.out}")

    eager = {r.configuration: r for r in reports if "Eg" in r.configuration}
    lazy = {r.configuration: r for r in reports if "Lz" in r.configuration}
    for eg_name, lz_name in [("ReAllEgLib", "ReAllLzLib"), ("ReAllEgStr", "ReAllLzStr"),
                             ("ReOneEg", "ReOneLz")]:
        eg, lz = eager[eg_name], lazy[lz_name]
        print(f"{eg_name} vs {lz_name}: latency x{eg.mean_us / lz.mean_us:.2f}, "
              f"evaluations x{eg.mean_formula_evals / max(lz.mean_formula_evals, 1e-9):.2f}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
