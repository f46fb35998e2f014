#!/usr/bin/env python3
"""Solve an SDPA sparse file with cvxopt and write a CSDP-style solution.

The file encodes  max <F0, X>  s.t.  <F_i, X> = c_i,  X psd.
The solution file holds y on the first line, then entries
"1 block i j value" of Z = sum_i y_i F_i - F0 and
"2 block i j value" of X, upper triangles only.

usage: sdpa_cvxopt.py problem.dat-s solution.sol [--tol 1e-9]
"""

import argparse
import re
import sys

import numpy as np
from cvxopt import matrix, solvers


def tokens(line):
    return [t for t in re.split(r"[\s,(){}]+", line) if t]


def parse(path):
    lines = []
    with open(path) as f:
        for line in f:
            s = line.strip()
            if not s or s[0] in '*"':
                continue
            lines.append(s)
    it = iter(lines)
    m = int(tokens(next(it))[0])
    nblocks = int(tokens(next(it))[0])
    dims = []
    while len(dims) < nblocks:
        dims += [int(t) for t in tokens(next(it))]
    c = []
    while len(c) < m:
        c += [float(t) for t in tokens(next(it))]
    mats = [[np.zeros((abs(d), abs(d))) for d in dims] for _ in range(m + 1)]
    for line in it:
        t = tokens(line)
        k, b, i, j, v = int(t[0]), int(t[1]) - 1, int(t[2]) - 1, int(t[3]) - 1, float(t[4])
        mats[k][b][i, j] = v
        mats[k][b][j, i] = v
    return m, dims, np.array(c), mats


def solve(m, dims, c, mats, tol):
    # minimise c.y subject to  sum_i y_i (-F_i) + S = -F0,  S psd,
    # so S = sum_i y_i F_i - F0 = Z and the cone multiplier is X.
    lin = [b for b, d in enumerate(dims) if d < 0]
    psd = [b for b, d in enumerate(dims) if d > 0]
    nl = sum(abs(dims[b]) for b in lin)
    Gl = np.zeros((nl, m))
    hl = np.zeros(nl)
    off = 0
    for b in lin:
        n = abs(dims[b])
        for i in range(m):
            Gl[off:off + n, i] = -np.diag(mats[i + 1][b])
        hl[off:off + n] = -np.diag(mats[0][b])
        off += n
    Gs, hs = [], []
    for b in psd:
        n = dims[b]
        G = np.zeros((n * n, m))
        for i in range(m):
            G[:, i] = -mats[i + 1][b].flatten(order="F")
        Gs.append(matrix(G))
        hs.append(matrix(-mats[0][b]))
    solvers.options.update({"abstol": tol, "reltol": tol, "feastol": tol, "maxiters": 200, "show_progress": False})
    kw = {}
    if nl:
        kw = {"Gl": matrix(Gl), "hl": matrix(hl)}
    res = solvers.sdp(matrix(c), Gs=Gs, hs=hs, **kw)
    if res["status"] != "optimal":
        print(f"cvxopt status: {res['status']}", file=sys.stderr)
    y = np.array(res["x"]).flatten()
    Z, X = {}, {}
    off = 0
    for b in lin:
        n = abs(dims[b])
        Z[b] = np.diag(np.array(res["sl"]).flatten()[off:off + n])
        X[b] = np.diag(np.array(res["zl"]).flatten()[off:off + n])
        off += n
    for k, b in enumerate(psd):
        Z[b] = np.array(res["ss"][k])
        X[b] = np.array(res["zs"][k])
    return res["status"], y, Z, X


def write(path, dims, y, Z, X):
    with open(path, "w") as f:
        f.write(" ".join(f"{v:.17e}" for v in y) + "\n")
        for matno, mats in ((1, Z), (2, X)):
            for b, d in enumerate(dims):
                n = abs(d)
                for i in range(n):
                    for j in (range(i, n) if d > 0 else [i]):
                        v = 0.5 * (mats[b][i, j] + mats[b][j, i])
                        if v != 0.0:
                            f.write(f"{matno} {b + 1} {i + 1} {j + 1} {v:.17e}\n")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("problem")
    ap.add_argument("solution")
    ap.add_argument("--tol", type=float, default=1e-9)
    a = ap.parse_args()
    m, dims, c, mats = parse(a.problem)
    status, y, Z, X = solve(m, dims, c, mats, a.tol)
    write(a.solution, dims, y, Z, X)
    # the file maximises <F0, X>; report the minimisation value -<F0, X> = -c.y
    print(f"status {status}  objective {-(c @ y):.12g}")
    return 0 if status == "optimal" else 1


if __name__ == "__main__":
    sys.exit(main())
