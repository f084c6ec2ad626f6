"""Sufficient conditions side by side on three models.

A geometric AR(1) satisfies everything.  The boundary family
a_j = (j+2)^(-1/2) log(j+2)^(-3/4) is square summable but the weighted
series sum a_j^2 log j diverges, which separates the weaker conditions
from the stronger ones.  The three-state chain is checked through its
transition matrix.

    python3 demos/condition_hierarchy.py
"""
from qfourier import Coefficients, LinearProcess, check_cond14, check_condMW, check_flin, check_sufcond
from qfourier import catalog
from qfourier.conditions import check_lin23

K = 100_000


def row(name, spec, checks):
    print(name)
    for check in checks:
        rep = check(spec)
        print(f"  {rep.condition_id:10s} {rep.verdict:15s} {rep.majorant}")


def main():
    boundary = LinearProcess(Coefficients(tail="power", power=0.5, log_power=0.75, shift=2.0))
    linear_checks = [
        lambda s: check_sufcond(s, K=K),
        lambda s: check_flin(s, K=K),
        lambda s: check_cond14(s, K=K),
        lambda s: check_lin23(s, K=K),
        lambda s: check_condMW(s, 1.0),
    ]
    row("AR(1), rho=0.5", catalog.ar1(0.5), linear_checks)
    row("boundary power tail", boundary, linear_checks)
    chain_checks = [
        lambda s: check_sufcond(s, K=K),
        lambda s: check_cond14(s, K=K),
        lambda s: check_condMW(s, 1.0),
    ]
    row("three-state chain", catalog.three_state_chain(), chain_checks)


if __name__ == "__main__":
    main()
