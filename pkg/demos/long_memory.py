"""A long-memory sequence where the normalisation by sqrt(n) breaks down.

For a Gaussian sequence with covariances r(k) ~ k^(-alpha), alpha < 1,
Var S_n(0)/n grows like n^(1 - alpha), so no finite spectral density
exists at t = 0.  At t = 1 the same sequence still behaves.  The script
prints the exact variances along a ladder of n.

    python3 demos/long_memory.py
"""
from qfourier import exact_variance_S
from qfourier import catalog


def main(alpha=0.4, ns=(256, 1024, 4096, 16384)):
    spec = catalog.long_memory(alpha)
    print(f"alpha={alpha}: expected growth per 4x n at t=0 is 4^(1-alpha) = {4 ** (1 - alpha):.4f}")
    prev = None
    for n in ns:
        v0 = exact_variance_S(spec, n, 0.0) / n
        v1 = exact_variance_S(spec, n, 1.0) / n
        step = "" if prev is None else f"  growth {v0 / prev:.4f}"
        print(f"n={n:6d}  Var S_n(0)/n = {v0:10.4f}  Var S_n(1)/n = {v1:.4f}{step}")
        prev = v0


if __name__ == "__main__":
    main()
