"""Raikov-type diagnostics for the martingale increments.

Conditional CLTs for martingales need max_k |D_k| / sqrt(n) -> 0 and
(1/n) sum_k Y_k^2 -> E Y^2.  The script samples the increments D_k(t) of
the AR(1) approximation from a fixed past and prints both statistics
along a ladder of n.

    python3 demos/raikov.py
"""
from qfourier import LinearPast
from qfourier import catalog
from qfourier.quenched import raikov_for_spec

SEED = 20140101


def main():
    out = raikov_for_spec(catalog.ar1(0.5), LinearPast((5.0,)), 1.0, [256, 1024, 4096], R=300, seed=SEED)
    print(f"target E Y^2 = {out['target']:.6f}  (projection {out['projection']})")
    for r in out["rows"]:
        print(f"n={r['n']:5d}  " + "  ".join(f"{k}={v:.4g}" for k, v in r.items() if k != "n" and isinstance(v, float)))
    print(f"max statistic decreasing: {out['max_decreasing']}  quadratic variation ok: {out['quad_var_ok']}")


if __name__ == "__main__":
    main()
