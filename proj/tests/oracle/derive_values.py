"""Independent reference values for the unit tests.

Plain-Python brute force and message passing, sharing no code with the
library. Run: python3 tests/oracle/derive_values.py
"""
import itertools
import math
from fractions import Fraction as F


def brute(n, factors, admissible=lambda x: True):
    z = 0
    on = [0] * n
    for x in itertools.product((0, 1), repeat=n):
        if not admissible(x):
            continue
        w = 1
        for a, b, t in factors:
            w *= t[2 * x[a] + x[b]]
        z += w
        for v in range(n):
            if x[v]:
                on[v] += w
    return z, [o / z for o in on]


def sum_product(n, factors, sweeps):
    msg_fv = {(f, s): [0.5, 0.5] for f in range(len(factors)) for s in (0, 1)}
    nbrs = {v: [] for v in range(n)}
    for f, (a, b, _) in enumerate(factors):
        nbrs[a].append((f, 0))
        nbrs[b].append((f, 1))
    for _ in range(sweeps):
        msg_vf = {}
        for f, (a, b, _) in enumerate(factors):
            for s, v in ((0, a), (1, b)):
                m = [1.0, 1.0]
                for g, gs in nbrs[v]:
                    if g != f:
                        m = [m[i] * msg_fv[(g, gs)][i] for i in (0, 1)]
                msg_vf[(f, s)] = [m[0] / sum(m), m[1] / sum(m)]
        new = {}
        for f, (a, b, t) in enumerate(factors):
            fb = msg_vf[(f, 1)]
            fa = msg_vf[(f, 0)]
            to_a = [t[2 * x + 0] * fb[0] + t[2 * x + 1] * fb[1] for x in (0, 1)]
            to_b = [t[0 + x] * fa[0] + t[2 + x] * fa[1] for x in (0, 1)]
            new[(f, 0)] = [to_a[0] / sum(to_a), to_a[1] / sum(to_a)]
            new[(f, 1)] = [to_b[0] / sum(to_b), to_b[1] / sum(to_b)]
        msg_fv = new
    out = []
    for v in range(n):
        m = [1.0, 1.0]
        for g, gs in nbrs[v]:
            m = [m[i] * msg_fv[(g, gs)][i] for i in (0, 1)]
        out.append(m[1] / sum(m))
    return out


def kl(p, q):
    return (p * math.log(p / q) + (1 - p) * math.log((1 - p) / (1 - q)))


def show(label, value):
    print(f"{label} = {value!r}")


show("logit(0.8)", math.log(4))
show("update_belief(0.8,0.4)", F(8, 10) * F(4, 10) / (F(8, 10) * F(4, 10) + F(2, 10) * F(6, 10)))
show("or(0.8,0.6,0.7)", F(14, 15))
show("sigmoid(2 ln 7/3)", F(49, 58))
show("kl(0.7,0.6)", kl(0.7, 0.6))

z, m = brute(2, [(0, 1, [1, 2, 3, 4])])
show("chain2 Z, marginals", (z, m))

# or4.agraph, unbinarized
link = [0.8, 0.3, 0.2, 0.9]
or4 = [(4, 5, [0.9, 0.2, 0.3, 0.8]), (1, 2, [0.5, 0.7, 0.6, 0.4])] + [(0, i, link) for i in (1, 2, 3, 4)]
show("or4 marginals", brute(6, or4)[1])

# and3.agraph: uniform edges, x0 = x1 & x2 & x3
and3 = [(3, 4, [0.9, 0.2, 0.3, 0.8]), (1, 4, [0.5, 0.7, 0.6, 0.4])]
show("and3 marginals", brute(5, and3, lambda x: x[0] == (x[1] & x[2] & x[3]))[1])

# path 0-1-2-3 with distinct tables: sum-product after 3 sweeps vs brute force
path = [(0, 1, [0.9, 0.2, 0.3, 0.8]), (1, 2, [0.5, 0.7, 0.6, 0.4]), (2, 3, [0.1, 1.0, 0.7, 0.3])]
show("path4 exact", brute(4, path)[1])
show("path4 sum-product 3 sweeps", sum_product(4, path, 3))
show("path4 sum-product 2 sweeps", sum_product(4, path, 2))

# triangle loopy fixed point
tri = [(0, 1, [0.9, 0.2, 0.3, 0.8]), (1, 2, [0.5, 0.7, 0.6, 0.4]), (2, 0, [0.1, 1.0, 0.7, 0.3])]
show("triangle exact", brute(3, tri)[1])
show("triangle sum-product 200 sweeps", sum_product(3, tri, 200))

# Soft attention on Chain2, head 0 of token 0, beliefs (0.8, 0.4): the
# neighbor scores 1, itself 0.
for beta in (1.0, 4.0):
    e = math.exp(beta)
    show(f"chain2 soft slot beta={beta}", (e * 0.4 + 0.8) / (e + 1))
