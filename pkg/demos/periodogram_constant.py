"""Which constant does the periodogram converge to?

Under a quenched CLT the real and imaginary parts of S_n(t)/sqrt(n) are
independent normals with variance pi f(t).  Then I_n(t)/f(t) is
exponential with mean 1 (it equals chi^2(2)/2), so a chi^2(2) reading
with mean 2 is off by a factor of two.  The script measures both KS
distances on simulated AR(1) paths.

    python3 demos/periodogram_constant.py
"""
import numpy as np
from scipy import stats

from qfourier import LinearPast, periodogram, simulate_paths, spectral_density
from qfourier import catalog

SEED = 20140101


def main(n=4096, R=2000, t=1.0):
    spec = catalog.ar1(0.5)
    f = spectral_density(spec, t).f
    batch = simulate_paths(spec, n, SEED, R, LinearPast((0.0,)))
    ratio = np.array([periodogram(x, t) for x in batch.values]) / f
    ks_exp = stats.kstest(ratio, "expon").statistic
    ks_chi2 = stats.kstest(ratio, "chi2", args=(2,)).statistic
    print(f"f({t}) = {f:.6f}")
    print(f"mean I_n/f = {ratio.mean():.4f}  (exponential: 1, chi^2(2): 2)")
    print(f"KS vs Exp(1)   = {ks_exp:.4f}")
    print(f"KS vs chi^2(2) = {ks_chi2:.4f}")


if __name__ == "__main__":
    main()
