// Photon-number statistics of a coherent source whose phase is drawn from a
// finite set of D equally spaced values.  Randomizing over D phases splits the
// source into D "pseudo photon number" components: component k is the
// superposition of Fock states |n> with n = k (mod D).  Everything in this
// header is a pure function of its arguments.

#pragma once

#include <complex>
#include <optional>

namespace mpqkd {

// Discrete phase set {2*pi*n/D : n = 0..D-1}.  D must be even and >= 2.
// tol is the relative truncation tolerance used by all series in this module.
struct PhaseConfig {
    int d;
    double tol;

    explicit PhaseConfig(int d_, double tol_ = 1e-15);
};

// P_k = e^{-mu} * sum_m mu^(m*D+k) / (m*D+k)!
// Probability that a phase-randomized coherent pulse of intensity mu carries
// pseudo photon number k.  Sums to 1 over k = 0..D-1; converges to the
// Poisson weight e^{-mu} mu^k / k! as D grows.
double pseudo_photon_prob(double mu, int k, const PhaseConfig& cfg);

// S_k(alpha) = sum_{n=0}^{D-1} exp(i*2*pi*n*k/D) * exp(alpha * exp(-i*2*pi*n/D))
// Discrete-Fourier-weighted sum of coherent exponentials; the normalization
// and overlap kernel of the pseudo photon number decomposition.  Satisfies
// S_k(alpha) = D * sum_m alpha^(m*D+k)/(m*D+k)!.  k is taken modulo D.
std::complex<double> coherent_phase_sum(std::complex<double> alpha, int k,
                                        const PhaseConfig& cfg);

// Fidelity between the pseudo photon number distributions produced at
// intensities mu and nu:
//   F = [sum_m (mu*nu)^(m*D/2)/(m*D)!] /
//       sqrt(sum_m mu^(m*D)/(m*D)! * sum_m nu^(m*D)/(m*D)!)
// Symmetric in (mu, nu), equal to 1 at mu == nu, and -> 1 as D -> infinity.
double intensity_fidelity(double mu, double nu, const PhaseConfig& cfg);

// Fidelity between the pseudo single-photon component of a pulse pair with
// per-side intensity 2*mu and an ideal single photon:
//   F = 1 / sqrt(sum_m (2*mu)^(m*D)/(m*D+1)!)
double pseudo_single_fidelity(double mu, const PhaseConfig& cfg);

// sqrt(1 - F^2) for the pseudo-single fidelity above, evaluated from the
// series tail so the value stays accurate when F is within an ulp of 1:
//   1 - F^2 = T / (1 + T),  T = sum_{m>=1} (2*mu)^(m*D)/(m*D+1)!
double pseudo_single_deviation(double mu, const PhaseConfig& cfg);

// Mean photon number of the pseudo k-photon component,
//   n_k = [sum_m mu^(m*D+k)/(m*D+k-1)!] / [sum_m mu^(m*D+k)/(m*D+k)!],
// evaluated as an exact series ratio (the k=0 numerator has no m=0 term).
// Approaches k as D -> infinity or mu -> 0.
double expected_photon_number(double mu, int k, const PhaseConfig& cfg);

// Binary Shannon entropy, H(0) = H(1) = 0.
double binary_entropy(double x);

// Dispatch between finite-D pseudo photon statistics and the continuous
// (fully randomized, Poisson/Fock) limit.  The continuous limit substitutes
// P_k -> Poisson, n_k -> k, and pseudo-single fidelity -> 1.
class PhotonStats {
public:
    static PhotonStats discrete(const PhaseConfig& cfg) { return PhotonStats(cfg); }
    static PhotonStats continuous_limit() { return PhotonStats(); }

    bool continuous() const { return !cfg_.has_value(); }
    const std::optional<PhaseConfig>& phase_config() const { return cfg_; }

    double prob(double mu, int k) const;
    double mean_photon_number(double mu, int k) const;
    double single_photon_fidelity(double mu) const;
    double single_photon_deviation(double mu) const; // 0 in the continuous limit

private:
    PhotonStats() = default;
    explicit PhotonStats(const PhaseConfig& cfg) : cfg_(cfg) {}
    std::optional<PhaseConfig> cfg_;
};

namespace detail {

// sum_{m>=0} x^(pow0 + m*D) / (fac0 + m*D)!   with 1/n! := 0 for n < 0.
// Terms are accumulated with interleaved multiply/divide so intermediate
// values stay in range; term m+1 is built from term m by multiplying x^D and
// dividing the next D factorial integers.  Truncates once
// |term| < tol * |sum| and at least ceil(4*max(1, |x|)) terms were added.
// terms_used, when given, receives the number of terms summed.
template <typename T>
T mod_factorial_series(T x, int pow0, int fac0, int d, double tol, int* terms_used = nullptr);

} // namespace detail

} // namespace mpqkd
