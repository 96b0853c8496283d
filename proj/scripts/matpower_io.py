"""Minimal MATPOWER .m case reader shared by the validation scripts."""
import re

import numpy as np


def parse_matrix(text, name):
    m = re.search(r"mpc\." + name + r"\s*=\s*\[(.*?)\];", text, re.S)
    if not m:
        return None
    rows = []
    for line in m.group(1).strip().splitlines():
        line = line.split("%")[0].strip().rstrip(";")
        if not line:
            continue
        rows.append([float(v) for v in line.split()])
    return np.array(rows)


def parse_case(path):
    with open(path) as fh:
        text = fh.read()
    return {
        "baseMVA": float(re.search(r"mpc\.baseMVA\s*=\s*([0-9.eE+-]+)", text).group(1)),
        "bus": parse_matrix(text, "bus"),
        "gen": parse_matrix(text, "gen"),
        "gencost": parse_matrix(text, "gencost"),
        "branch": parse_matrix(text, "branch"),
    }
