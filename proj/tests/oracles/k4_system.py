#!/usr/bin/env python3
"""Brute-force oracle for the K=4, l=2 single super-pixel system.

Uses exact rational arithmetic and no project code. Prints the values frozen
into tests/golden/k4_system.txt.
"""
from fractions import Fraction as F


def sylvester(order):
    h = [[1]]
    while len(h) < order:
        h = [r + r for r in h] + [r + [-v for v in r] for r in h]
    return h


def main():
    k, l = 4, 2
    rows = sylvester(k)
    tiles = [[1 if v > 0 else 0 for v in r] for r in rows]  # row-major l x l
    trace = [F(1), F(2), F(3), F(4)]

    # forward model: S(p) = sum_k X_k(p) I_k
    s = [sum(tiles[kk][p] * trace[kk] for kk in range(k)) for p in range(l * l)]

    mean_s = sum(s) / (l * l)
    recovered = []
    dc = None
    for kk in range(k):
        mx = F(sum(tiles[kk]), l * l)
        den = sum((x - mx) ** 2 for x in tiles[kk])
        if den == 0:
            dc = kk
            recovered.append(None)
            continue
        num = sum((s[p] - mean_s) * (tiles[kk][p] - mx) for p in range(l * l))
        recovered.append(num / den)
    rest = sum(F(sum(tiles[kk]), l * l) * recovered[kk]
               for kk in range(k) if kk != dc)
    recovered[dc] = (mean_s - rest) / F(sum(tiles[dc]), l * l)

    # exact solve by Gauss-Jordan over the rationals
    a = [[F(tiles[kk][p]) for kk in range(k)] + [s[p]] for p in range(l * l)]
    for c in range(k):
        piv = next(r for r in range(c, k) if a[r][c] != 0)
        a[c], a[piv] = a[piv], a[c]
        a[c] = [v / a[c][c] for v in a[c]]
        for r in range(k):
            if r != c and a[r][c] != 0:
                f = a[r][c]
                a[r] = [x - f * y for x, y in zip(a[r], a[c])]
    exact = [a[r][k] for r in range(k)]

    print("tiles", " ".join("".join(str(v) for v in t) for t in tiles))
    print("exposure", " ".join(str(v) for v in s))
    print("mean_exposure", mean_s)
    print("dc_index", dc)
    print("correlation", " ".join(str(v) for v in recovered))
    print("exact", " ".join(str(v) for v in exact))


if __name__ == "__main__":
    main()
