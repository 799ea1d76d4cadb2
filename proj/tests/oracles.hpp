// Test-only numerical oracles, deliberately independent of the library's
// incremental-series path: direct long double evaluation through lgamma and
// plain fixed-length term loops.

#pragma once

#include <cmath>
#include <complex>

namespace oracle {

// sum_{m>=0} x^(m*d + k) / (m*d + k + off)!   (1/n! := 0 for n < 0)
inline long double mod_series(long double x, int k, int off, int d, int m_max = 250) {
    long double sum = 0.0L;
    for (int m = 0; m <= m_max; ++m) {
        const long long p = 1LL * m * d + k;
        const long long f = p + off;
        if (f < 0) continue;
        long double term;
        if (x == 0.0L)
            term = (p == 0) ? 1.0L / std::tgamma(static_cast<long double>(f) + 1.0L) : 0.0L;
        else
            term = std::exp(p * std::log(x) - std::lgamma(static_cast<long double>(f) + 1.0L));
        sum += term;
    }
    return sum;
}

inline long double pseudo_prob(long double mu, int k, int d) {
    return std::exp(-mu) * mod_series(mu, k, 0, d);
}

inline long double poisson(long double mu, int k) {
    if (mu == 0.0L) return k == 0 ? 1.0L : 0.0L;
    return std::exp(k * std::log(mu) - mu - std::lgamma(static_cast<long double>(k) + 1.0L));
}

// Fock-expansion side of the identity S_k(a) = D * sum_m a^(m*d+k)/(m*d+k)!,
// summed as a straight complex series with a fixed term count.
inline std::complex<long double> fock_series(std::complex<long double> a, int k, int d,
                                             int m_max = 120) {
    std::complex<long double> term(1.0L, 0.0L);
    for (int i = 1; i <= k; ++i) term *= a / static_cast<long double>(i);
    std::complex<long double> sum = term;
    long long f = k;
    for (int m = 1; m <= m_max; ++m) {
        for (int j = 1; j <= d; ++j) term *= a / static_cast<long double>(f + j);
        f += d;
        sum += term;
    }
    return sum;
}

inline long double binary_entropy(long double x) {
    if (x <= 0.0L || x >= 1.0L) return 0.0L;
    return -x * std::log2(x) - (1.0L - x) * std::log2(1.0L - x);
}

} // namespace oracle
