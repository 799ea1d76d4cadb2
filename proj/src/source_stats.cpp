#include "mpqkd/source_stats.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace mpqkd {

PhaseConfig::PhaseConfig(int d_, double tol_) : d(d_), tol(tol_) {
    if (d < 2 || d % 2 != 0)
        throw std::domain_error("PhaseConfig: D must be an even integer >= 2, got " +
                                std::to_string(d));
    if (!(tol > 0.0) || !(tol < 1e-6))
        throw std::domain_error("PhaseConfig: tol must lie in (0, 1e-6)");
}

namespace detail {

template <typename T>
T mod_factorial_series(T x, int pow0, int fac0, int d, double tol, int* terms_used) {
    constexpr int kMaxTerms = 400;
    if (terms_used) *terms_used = 1;

    if (std::abs(x) == 0.0) {
        // Only a zero-power term can survive.
        if (pow0 != 0) return T(0);
        if (fac0 < 0) return T(0);
        T t(1);
        for (int j = 1; j <= fac0; ++j) t /= T(double(j));
        return t;
    }

    const int min_terms = static_cast<int>(std::ceil(4.0 * std::max(1.0, std::abs(x))));

    // Skip terms whose factorial argument is negative (fac0 may be -1).
    int m0 = 0;
    while (fac0 + static_cast<long long>(m0) * d < 0) ++m0;

    // First term: x^(pow0 + m0*d) / (fac0 + m0*d)!, interleaved.
    T term(1);
    {
        const long long p = pow0 + static_cast<long long>(m0) * d;
        const long long f = fac0 + static_cast<long long>(m0) * d;
        long long pi = 0, fi = 0;
        while (pi < p || fi < f) {
            if (pi < p) { term *= x; ++pi; }
            if (fi < f) { term /= T(double(++fi)); }
        }
    }

    T sum = term;
    for (int m = m0, terms = 1;; ++m, ++terms) {
        if (terms_used) *terms_used = terms;
        if (std::abs(term) == 0.0) break; // underflow; later terms only shrink
        if (terms >= min_terms && std::abs(term) < tol * std::abs(sum)) break;
        if (terms >= kMaxTerms)
            throw std::runtime_error("mod_factorial_series: no convergence in 400 terms");
        const long long f = fac0 + static_cast<long long>(m) * d;
        for (int j = 1; j <= d; ++j) {
            term *= x;
            term /= T(double(f + j));
        }
        sum += term;
    }
    return sum;
}

template double mod_factorial_series<double>(double, int, int, int, double, int*);
template std::complex<double> mod_factorial_series<std::complex<double>>(std::complex<double>,
                                                                         int, int, int, double,
                                                                         int*);

} // namespace detail

static void check_intensity(double mu, const char* who) {
    if (!(mu >= 0.0))
        throw std::domain_error(std::string(who) + ": intensity must be >= 0");
}

static void check_index(int k, const PhaseConfig& cfg, const char* who) {
    if (k < 0 || k >= cfg.d)
        throw std::domain_error(std::string(who) + ": pseudo photon index out of [0, D)");
}

double pseudo_photon_prob(double mu, int k, const PhaseConfig& cfg) {
    check_intensity(mu, "pseudo_photon_prob");
    check_index(k, cfg, "pseudo_photon_prob");
    const double s = detail::mod_factorial_series(mu, k, k, cfg.d, cfg.tol);
    const double p = std::exp(-mu) * s;
    return std::min(1.0, std::max(0.0, p));
}

std::complex<double> coherent_phase_sum(std::complex<double> alpha, int k,
                                        const PhaseConfig& cfg) {
    const int kk = ((k % cfg.d) + cfg.d) % cfg.d;

    // The direct D-term sum cancels down to ~|alpha|^k/k! from summands of
    // size e^|alpha|; once that head term is too small the cancellation noise
    // dominates and the equivalent mod-D series D * sum_m a^(mD+k)/(mD+k)!
    // is evaluated instead.
    const double mag = std::abs(alpha);
    if (mag > 0.0) {
        const double log_head = kk * std::log(mag) - std::lgamma(kk + 1.0);
        if (log_head < mag + std::log(1e-4)) {
            const std::complex<double> series =
                detail::mod_factorial_series(alpha, kk, kk, cfg.d, cfg.tol);
            return static_cast<double>(cfg.d) * series;
        }
    }

    const double step = 2.0 * M_PI / cfg.d;
    std::complex<double> sum(0.0, 0.0);
    for (int n = 0; n < cfg.d; ++n) {
        const std::complex<double> weight = std::polar(1.0, step * n * kk);
        const std::complex<double> rotated = alpha * std::polar(1.0, -step * n);
        sum += weight * std::exp(rotated);
    }
    return sum;
}

double intensity_fidelity(double mu, double nu, const PhaseConfig& cfg) {
    check_intensity(mu, "intensity_fidelity");
    check_intensity(nu, "intensity_fidelity");
    if (mu == nu) return 1.0;
    const double cross = detail::mod_factorial_series(std::sqrt(mu * nu), 0, 0, cfg.d, cfg.tol);
    const double sm = detail::mod_factorial_series(mu, 0, 0, cfg.d, cfg.tol);
    const double sn = detail::mod_factorial_series(nu, 0, 0, cfg.d, cfg.tol);
    return std::min(1.0, cross / std::sqrt(sm * sn));
}

double pseudo_single_fidelity(double mu, const PhaseConfig& cfg) {
    check_intensity(mu, "pseudo_single_fidelity");
    const double s = detail::mod_factorial_series(2.0 * mu, 0, 1, cfg.d, cfg.tol);
    return std::min(1.0, 1.0 / std::sqrt(s));
}

double pseudo_single_deviation(double mu, const PhaseConfig& cfg) {
    check_intensity(mu, "pseudo_single_deviation");
    if (mu == 0.0) return 0.0;
    // Tail of the fidelity sum, starting at m = 1.
    const double tail =
        detail::mod_factorial_series(2.0 * mu, cfg.d, cfg.d + 1, cfg.d, cfg.tol);
    return std::sqrt(tail / (1.0 + tail));
}

double expected_photon_number(double mu, int k, const PhaseConfig& cfg) {
    check_intensity(mu, "expected_photon_number");
    check_index(k, cfg, "expected_photon_number");
    // Common factor mu^k is cancelled between numerator and denominator so the
    // ratio stays finite down to mu = 0 (where it equals k).
    const double num = detail::mod_factorial_series(mu, 0, k - 1, cfg.d, cfg.tol);
    const double den = detail::mod_factorial_series(mu, 0, k, cfg.d, cfg.tol);
    return num / den;
}

double binary_entropy(double x) {
    if (!(x >= 0.0) || !(x <= 1.0))
        throw std::domain_error("binary_entropy: argument outside [0, 1]");
    if (x == 0.0 || x == 1.0) return 0.0;
    return -x * std::log2(x) - (1.0 - x) * std::log2(1.0 - x);
}

double PhotonStats::prob(double mu, int k) const {
    if (cfg_) return pseudo_photon_prob(mu, k, *cfg_);
    check_intensity(mu, "PhotonStats::prob");
    if (k < 0) throw std::domain_error("PhotonStats::prob: negative photon number");
    if (mu == 0.0) return k == 0 ? 1.0 : 0.0;
    return std::exp(k * std::log(mu) - std::lgamma(k + 1.0) - mu);
}

double PhotonStats::mean_photon_number(double mu, int k) const {
    if (cfg_) return expected_photon_number(mu, k, *cfg_);
    check_intensity(mu, "PhotonStats::mean_photon_number");
    return static_cast<double>(k);
}

double PhotonStats::single_photon_fidelity(double mu) const {
    if (cfg_) return pseudo_single_fidelity(mu, *cfg_);
    check_intensity(mu, "PhotonStats::single_photon_fidelity");
    return 1.0;
}

double PhotonStats::single_photon_deviation(double mu) const {
    if (cfg_) return pseudo_single_deviation(mu, *cfg_);
    check_intensity(mu, "PhotonStats::single_photon_deviation");
    return 0.0;
}

} // namespace mpqkd
