#!/usr/bin/env python3
"""Probe neighbor-retrieval latency on a generated graph, warmup included.

Generates the desk-scale graph, then measures mean out-neighbor query time
in consecutive blocks so the warmup-and-stabilize behaviour of the store
is visible, mirroring the benchmark harness's 250-query warmup phase.

    python scripts/adjacency_floor.py --seed 7 --nodes 100000 --edges 1000000
"""

import argparse
import statistics
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from rebac.prng import stream
from rebac.synth import GeneratedGraph, SynthConfig, synth_graph


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--nodes", type=int, default=100_000)
    parser.add_argument("--edges", type=int, default=1_000_000)
    parser.add_argument("--queries", type=int, default=2_000)
    parser.add_argument("--block", type=int, default=250)
    args = parser.parse_args()

    print(f"generating graph ({args.nodes} nodes, {args.edges} edges) ...", flush=True)
    started = time.perf_counter()
    g = synth_graph(SynthConfig(args.seed, 1.0, GeneratedGraph(args.nodes, args.edges)))
    print(f"  done in {time.perf_counter() - started:.1f}s")

    vertices = sorted(g.vertices())
    relations = sorted(g.relations())
    rng = stream(args.seed, "floor-probe")

    samples = []
    for i in range(args.queries):
        v = vertices[rng.randrange(len(vertices))]
        rel = relations[rng.randrange(len(relations))]
        t0 = time.perf_counter()
        g.out_neighbors(v, rel)
        samples.append((time.perf_counter() - t0) * 1e6)
        if (i + 1) % args.block == 0:
            block = samples[-args.block:]
            print(f"queries {i + 1 - args.block:>5}-{i + 1:<5} "
                  f"mean {statistics.fmean(block):7.2f}us  "
                  f"max {max(block):8.1f}us")

    post_warmup = samples[args.block:]
    print(f"\nmean after first {args.block} queries: "
          f"{statistics.fmean(post_warmup):.2f}us over {len(post_warmup)} queries")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
