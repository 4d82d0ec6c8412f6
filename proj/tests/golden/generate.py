"""Exact minimum error probability over all deterministic feedback encoders.

Independent of the C++ code: plain Python with fractions. Channel entries are
the exact binary values of the doubles 1.0 - p and p, each row renormalized
exactly.
"""
import itertools
import json
import sys
from fractions import Fraction


def xor_bsc(p):
    hi, lo = Fraction(1.0 - p), Fraction(p)
    hi, lo = hi / (hi + lo), lo / (hi + lo)
    return {(x1, x2, z): (hi if z == x1 ^ x2 else lo) for x1 in (0, 1) for x2 in (0, 1) for z in (0, 1)}


def min_error(q, n, M=2):
    # strategy table entries: t=0 -> M, t=1 -> 2M (w, z0), ...
    sizes = [M * 2**t for t in range(n)]
    tables = list(itertools.product(*[list(itertools.product((0, 1), repeat=s)) for s in sizes]))
    best = None
    for f1 in tables:
        for f2 in tables:
            correct = Fraction(0)
            for zs in itertools.product((0, 1), repeat=n):
                top = Fraction(0)
                for w1 in range(M):
                    for w2 in range(M):
                        pr = Fraction(1, M * M)
                        hist = 0
                        for t, z in enumerate(zs):
                            x1 = f1[t][w1 * 2**t + hist]
                            x2 = f2[t][w2 * 2**t + hist]
                            pr *= q[(x1, x2, z)]
                            hist = hist * 2 + z
                        top = max(top, pr)
                correct += top
            pe = 1 - correct
            if best is None or pe < best:
                best = pe
    return best


if __name__ == "__main__":
    p = float(sys.argv[1]) if len(sys.argv) > 1 else 0.1
    out = {}
    for n in (1, 2):
        v = min_error(xor_bsc(p), n)
        out[f"n{n}"] = {"pe_star": float(v), "pe_star_rational": f"{v.numerator}/{v.denominator}"}
    json.dump({"channel": f"xor-bsc({p})", "m1": 2, "m2": 2, **out}, sys.stdout, indent=2)
    print()
