"""Independent oracle for the flat-spectrum single-codeword success probability.

For the flat spectrum (all eigenvalues 1) at rate R the noise parameter is
T = 2^(2R) - 1.  Conditioned on s = ||W||^2, the codeword error ||W - tau c||^2
with tau^2 = T s / (n (1+T)) is tau^2 X where X ~ noncentral chi^2 with n
degrees of freedom and noncentrality s/tau^2 = n(1+T)/T.  The success event
(1/n)||W - tau c||^2 <= (1/n) s/(1+T) + eta becomes

    X <= n/T + n^2 (1+T) eta / (T s),

so p_n = E_{s ~ chi^2_n}[ F_ncx2(n, n(1+T)/T)(n/T + n^2(1+T)eta/(Ts)) ].

This closed-route computation never touches the package's simulator; it pins
the expected value of the Monte-Carlo pilot run.
"""

import math

from scipy import integrate, stats


def exact_success_probability(n: int, rate_bits: float, eta: float) -> float:
    T = 2.0 ** (2.0 * rate_bits) - 1.0
    nc = n * (1.0 + T) / T

    def p_given_s(s: float) -> float:
        x = n / T + n * n * (1.0 + T) * eta / (T * s)
        return stats.ncx2.cdf(x, df=n, nc=nc)

    val, err = integrate.quad(
        lambda s: p_given_s(s) * stats.chi2.pdf(s, n), 0.0, 40.0 * n, limit=400
    )
    assert err < 1e-7 * val
    return val


if __name__ == "__main__":
    for n, rate, eta in [(10, 0.5, 0.05), (20, 0.5, 0.05), (40, 0.5, 0.05)]:
        p = exact_success_probability(n, rate, eta)
        print(f"n={n} rate={rate} eta={eta}: p_n={p!r} exponent={-math.log2(p) / n!r}")
