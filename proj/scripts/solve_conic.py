#!/usr/bin/env python3
"""Cross-check adapter: parses the CONIC/1 text export and solves it with an
independent conic solver (cvxpy/Clarabel). Prints the optimal objective.

Usage: solve_conic.py PROGRAM.conic [--json]
"""
import argparse
import json
import sys

import cvxpy as cp
import numpy as np
import scipy.sparse as sp


def parse_conic(path):
    prog = {"objconst": 0.0, "obj": {}, "bounds": {}, "rows": [], "cones": []}
    with open(path) as fh:
        lines = [ln.rstrip("\n") for ln in fh]
    if not lines or lines[0] != "CONIC/1":
        raise ValueError("not a CONIC/1 file")
    for ln in lines[1:]:
        if not ln or ln == "end":
            continue
        tok = ln.split()
        key = tok[0]
        if key == "vars":
            prog["n"] = int(tok[1])
        elif key in ("rows", "cones"):
            pass  # counts are implied by the row/cone lines
        elif key == "objconst":
            prog["objconst"] = float(tok[1])
        elif key == "obj":
            for t in tok[1:]:
                i, v = t.split(":")
                prog["obj"][int(i)] = float(v)
        elif key == "name":
            pass
        elif key == "bound":
            prog["bounds"][int(tok[1])] = (float(tok[2]), float(tok[3]))
        elif key == "row":
            rhs = float(tok[1])
            terms = []
            for t in tok[2:]:
                i, v = t.split(":")
                terms.append((int(i), float(v)))
            prog["rows"].append((rhs, terms))
        elif key in ("soc", "rsoc"):
            prog["cones"].append((key, [int(t) for t in tok[1:]]))
        else:
            raise ValueError(f"unknown record: {key}")
    return prog


def solve(prog):
    n = prog["n"]
    x = cp.Variable(n)
    c = np.zeros(n)
    for i, v in prog["obj"].items():
        c[i] = v
    cons = []
    for i, (lo, hi) in prog["bounds"].items():
        if np.isfinite(lo):
            cons.append(x[i] >= lo)
        if np.isfinite(hi):
            cons.append(x[i] <= hi)
    if prog["rows"]:
        data, ri, ci, rhs = [], [], [], []
        for r, (b, terms) in enumerate(prog["rows"]):
            rhs.append(b)
            for i, v in terms:
                ri.append(r)
                ci.append(i)
                data.append(v)
        amat = sp.csr_matrix((data, (ri, ci)), shape=(len(prog["rows"]), n))
        cons.append(amat @ x == np.array(rhs))
    for kind, idx in prog["cones"]:
        if kind == "soc":
            cons.append(cp.norm(cp.hstack([x[i] for i in idx[1:]])) <= x[idx[0]])
        else:
            cons.append(cp.quad_over_lin(cp.hstack([x[i] for i in idx[2:]]), x[idx[0]])
                        <= 2 * x[idx[1]])
            cons.append(x[idx[0]] >= 0)
            cons.append(x[idx[1]] >= 0)
    problem = cp.Problem(cp.Minimize(c @ x + prog["objconst"]), cons)
    val = problem.solve(solver=cp.CLARABEL)
    return problem.status, val


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("program")
    ap.add_argument("--json", action="store_true")
    args = ap.parse_args()
    status, val = solve(parse_conic(args.program))
    if args.json:
        print(json.dumps({"status": status, "objective": val}))
    else:
        print(f"status {status}  objective {val:.10g}")
    return 0 if status in ("optimal", "optimal_inaccurate") else 1


if __name__ == "__main__":
    sys.exit(main())
