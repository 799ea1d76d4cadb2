#include "mpqkd/basis_fidelity.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>

namespace mpqkd {

double fidelity_theta(double mu, int k, double theta, const PhaseConfig& cfg) {
    if (!(mu > 0.0))
        throw std::domain_error("fidelity_theta: intensity must be > 0");
    const int kk = ((k % cfg.d) + cfg.d) % cfg.d;

    // At the alignment angles theta = 2*pi*n/D the phase rotation permutes
    // the discrete set, so S_k(mu e^{i theta}) = e^{i k theta} S_k(mu)
    // exactly and the bound collapses to an angle factor times the
    // cancellation-free series ratio g_k(mu)/g_k(2mu).  This keeps the
    // deficit 1 - F accurate even when it sits far below machine epsilon.
    const double steps = theta * cfg.d / (2.0 * M_PI);
    if (std::fabs(steps - std::round(steps)) < 1e-9) {
        const double angle_weight =
            (kk % 2 == 1) ? 1.0 + std::cos((kk - 1) * theta) : 0.5;
        const double g_mu = detail::mod_factorial_series(mu, kk, kk, cfg.d, cfg.tol);
        const double g_2mu = detail::mod_factorial_series(2.0 * mu, kk, kk, cfg.d, cfg.tol);
        const double den = (cfg.d * g_mu) * (cfg.d * g_2mu); // |S_k(mu) S_k(2mu)|
        if (!(den >= 1e-300))
            throw std::domain_error(
                "fidelity_theta: |S_k(mu) S_k(2mu)| degenerate; mu too small for this k");
        const double joint = std::min(1.0, std::max(0.0, angle_weight * g_mu / g_2mu));
        return std::sqrt(joint);
    }

    const std::complex<double> phase = std::polar(1.0, theta);
    const std::complex<double> s_mu = coherent_phase_sum(mu, kk, cfg);
    const std::complex<double> s_2mu = coherent_phase_sum(2.0 * mu, kk, cfg);
    const std::complex<double> s_plus = coherent_phase_sum(mu * phase, kk, cfg);
    const std::complex<double> s_minus = coherent_phase_sum(-mu * phase, kk, cfg);

    const double den = std::abs(s_mu * s_2mu);
    if (den < 1e-300)
        throw std::domain_error(
            "fidelity_theta: |S_k(mu) S_k(2mu)| degenerate; mu too small for this k");

    const double num = std::norm(2.0 * phase * s_mu + s_plus - s_minus);
    double joint = num / (8.0 * den);
    joint = std::min(1.0, std::max(0.0, joint));
    return std::sqrt(joint);
}

FidelityReport fidelity_overall(double mu, int k, const PhaseConfig& cfg) {
    FidelityReport report;
    report.k = k;
    double sum = 0.0;
    for (int n = 0; n < cfg.d / 2; ++n) {
        const double theta = 2.0 * M_PI * n / cfg.d;
        const double f = fidelity_theta(mu, k, theta, cfg);
        report.per_theta.emplace_back(theta, f);
        sum += f;
    }
    // One division by the exact angle count keeps a sum of exact ones at
    // exactly 1.
    report.overall = std::min(1.0, sum / (cfg.d / 2));
    return report;
}

BalanceResult delta_balance(double f_overall, double y_kk) {
    if (!(y_kk > 0.0))
        throw std::domain_error("delta_balance: yield must be > 0");
    const double raw = (1.0 - f_overall) / (2.0 * y_kk);
    BalanceResult r;
    if (raw < 0.0) {
        r.value = 0.0;
        r.clamped = true;
    } else if (raw > 0.5) {
        r.value = 0.5;
        r.clamped = true;
    } else {
        r.value = raw;
    }
    return r;
}

double phase_error_bound(double e_bit, double delta) {
    if (!(e_bit >= 0.0) || !(e_bit <= 0.5))
        throw std::domain_error("phase_error_bound: e_bit outside [0, 1/2]");
    if (!(delta >= 0.0) || !(delta <= 0.5))
        throw std::domain_error("phase_error_bound: delta outside [0, 1/2]");
    if (delta == 0.0) return e_bit;

    const auto printed = [e_bit](double x) {
        const double cross = x * (1.0 - x) * e_bit * (1.0 - e_bit);
        return e_bit + 4.0 * x * (1.0 - x) * (1.0 - 2.0 * e_bit) +
               4.0 * (1.0 - 2.0 * x) * std::sqrt(std::max(cross, 0.0));
    };

    // delta only upper-bounds the coin imbalance, so the valid bound is the
    // envelope sup over x <= delta of the printed expression, which is not
    // globally monotone in x.  Coarse scan plus ternary refinement; the
    // expression is concave in x on [0, 1/2].
    const int n = 64;
    double best = printed(delta);
    int best_i = n;
    for (int i = 0; i <= n; ++i) {
        const double v = printed(delta * i / n);
        if (v > best) {
            best = v;
            best_i = i;
        }
    }
    double lo = delta * std::max(0, best_i - 1) / n;
    double hi = delta * std::min(n, best_i + 1) / n;
    for (int it = 0; it < 200 && hi - lo > 1e-16; ++it) {
        const double a = lo + (hi - lo) / 3.0;
        const double b = hi - (hi - lo) / 3.0;
        if (printed(a) < printed(b)) lo = a;
        else hi = b;
    }
    best = std::max(best, printed(0.5 * (lo + hi)));
    return std::min(1.0, best);
}

} // namespace mpqkd
