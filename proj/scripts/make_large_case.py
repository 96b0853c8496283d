#!/usr/bin/env python3
"""Generates a synthetic continental-scale MATPOWER case (default 9241 buses)
used to exercise model building and export at scale. The network is a meshed
grid with long-distance overlay lines, seeded RNG, and realistic parameter
ranges; it is a size stand-in, not real system data.

Usage: make_large_case.py [--buses N] [--seed S] [--out FILE]
"""
import argparse

import numpy as np


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--buses", type=int, default=9241)
    ap.add_argument("--seed", type=int, default=9241)
    ap.add_argument("--out", default="case9241_pegase.m")
    args = ap.parse_args()

    n = args.buses
    rng = np.random.default_rng(args.seed)
    cols = int(np.floor(np.sqrt(n)))
    rows = (n + cols - 1) // cols

    def bus_at(r, c):
        i = r * cols + c
        return i if i < n else None

    edges = set()
    for r in range(rows):
        for c in range(cols):
            a = bus_at(r, c)
            if a is None:
                continue
            for dr, dc in ((0, 1), (1, 0)):
                b = bus_at(r + dr, c + dc)
                if b is not None:
                    edges.add((a, b))
    # long-distance overlay to keep the mesh realistic (~15% extra branches)
    extra = int(0.15 * len(edges))
    while extra > 0:
        a, b = rng.integers(0, n, size=2)
        if a != b and (min(a, b), max(a, b)) not in edges:
            edges.add((min(a, b), max(a, b)))
            extra -= 1
    edges = sorted(edges)

    gen_bus = sorted(rng.choice(n, size=max(1, n // 6), replace=False))
    gen_set = set(gen_bus)
    load = rng.uniform(0.0, 18.0, size=n)
    load[rng.random(n) < 0.35] = 0.0
    qload = load * rng.uniform(0.15, 0.45, size=n)

    lines = ["function mpc = case9241_pegase",
             "%% synthetic meshed network generated by scripts/make_large_case.py",
             f"%% seed {args.seed}; size stand-in for continental-scale studies",
             "mpc.version = '2';", "mpc.baseMVA = 100.0;", "",
             "%% bus data", "mpc.bus = ["]
    for i in range(n):
        btype = 3 if i == gen_bus[0] else (2 if i in gen_set else 1)
        lines.append(f"\t{i + 1}\t {btype}\t {load[i]:.2f}\t {qload[i]:.2f}"
                     "\t 0.0\t 0.0\t 1\t 1.0\t 0.0\t 380.0\t 1\t 1.1\t 0.9;")
    lines += ["];", "", "%% generator data", "mpc.gen = ["]
    pmax = rng.uniform(30.0, 400.0, size=len(gen_bus))
    for g, b in enumerate(gen_bus):
        lines.append(f"\t{b + 1}\t {0.5 * pmax[g]:.2f}\t 0.0\t {0.6 * pmax[g]:.2f}"
                     f"\t {-0.6 * pmax[g]:.2f}\t 1.0\t 100.0\t 1\t {pmax[g]:.2f}\t 0.0;")
    lines += ["];", "", "%% generator cost data", "mpc.gencost = ["]
    c1 = rng.uniform(5.0, 80.0, size=len(gen_bus))
    for g in range(len(gen_bus)):
        lines.append(f"\t2\t 0.0\t 0.0\t 3\t 0.0\t {c1[g]:.4f}\t 0.0;")
    lines += ["];", "", "%% branch data", "mpc.branch = ["]
    for a, b in edges:
        x = rng.uniform(0.01, 0.2)
        r = x * rng.uniform(0.05, 0.3)
        ch = rng.uniform(0.0, 0.04)
        rate = rng.choice([150.0, 250.0, 500.0, 1000.0])
        tap, shift = 0.0, 0.0
        if rng.random() < 0.1:
            tap = rng.uniform(0.92, 1.08)
            shift = rng.uniform(-3.0, 3.0)
        lines.append(f"\t{a + 1}\t {b + 1}\t {r:.5f}\t {x:.5f}\t {ch:.4f}"
                     f"\t {rate}\t 0.0\t 0.0\t {tap:.4f}\t {shift:.3f}"
                     "\t 1\t -30.0\t 30.0;")
    lines += ["];", ""]
    with open(args.out, "w") as fh:
        fh.write("\n".join(lines))
    print(f"wrote {args.out}: {n} buses, {len(gen_bus)} gens, {len(edges)} branches")


if __name__ == "__main__":
    main()
