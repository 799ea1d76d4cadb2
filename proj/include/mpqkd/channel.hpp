// Analytic model of the symmetric lossy link with untrusted middle detection:
// per-round click probabilities, greedy pairing rate, sifting ratios, Z-basis
// QBER, pseudo single-photon pair fraction, and the X-basis single-photon
// yield/error pair with its deviation brackets.

#pragma once

#include <cstdint>

#include "mpqkd/source_stats.hpp"

namespace mpqkd {

struct ChannelParams {
    double p_d = 1.2e-8;     // dark count probability per detector per round
    double eta_d = 0.2;      // detector efficiency
    double e_d = 0.04;       // misalignment error rate
    double f = 1.15;         // error-correction efficiency
    double alpha_db = 0.2;   // fiber loss, dB/km
    double L_km = 0.0;       // total distance between the two senders

    void validate() const;
};

// Single-side transmittance including detector efficiency.  The total
// distance is split symmetrically, L/2 per arm.
struct LinkBudget {
    double eta_s = 0.0;
};

LinkBudget link_budget(const ChannelParams& ch);

// Pr(click | intensity bits) = 1 - (1 - 2 p_d) exp(-eta_s mu (z_a + z_b))
double click_prob_given_intensity(int z_a, int z_b, double mu, const LinkBudget& lb,
                                  const ChannelParams& ch);

// Average click probability over the four equiprobable intensity settings.
double mean_click_prob(double mu, const LinkBudget& lb, const ChannelParams& ch);

// Pr(click | pseudo photon numbers) = 1 - (1 - 2 p_d)(1 - eta_s)^(n_ka + n_kb)
// with the exact (generally non-integer) mean photon numbers n_k.
double click_prob_given_pseudo_photons(int k_a, int k_b, double mu, const LinkBudget& lb,
                                       const ChannelParams& ch, const PhotonStats& stats);
double click_prob_given_pseudo_photons(int k_a, int k_b, double mu, const LinkBudget& lb,
                                       const ChannelParams& ch, const PhaseConfig& cfg);

// Expected pairs per round under greedy pairing of clicks with maximal
// interval l:  r_p = [ 1/(p (1 - (1-p)^l)) + 1/p ]^{-1}.  Returns 0 at p = 0.
double pairing_rate(double p, std::uint64_t l);

// Fraction of clicked pairs whose intensity settings form a signal pair
// (both parties flip exactly one pulse):
//   r_s = (1/16) (1/p^2) sum_{z_i XOR z_j = 11} Pr(C|z_i) Pr(C|z_j)
// Approaches 1/8 when eta_s * mu << 1 and dark counts are negligible.
double signal_pair_ratio(double mu, const LinkBudget& lb, const ChannelParams& ch);

// Expected QBER of the sifted signal pairs; the error cases are the two
// configurations where one round is double-vacuum and the other double-pulse.
double qber_z(double mu, const LinkBudget& lb, const ChannelParams& ch);

// Fraction of sifted signal pairs in which both parties emitted a pseudo
// single photon:
//   q11 = (1/16) (P_1^2 / (r_s p^2)) sum_{z_i XOR z_j = 11}
//           Pr(C_i | k_i = z_i) Pr(C_j | k_j = z_j)
double pseudo_single_pair_fraction(double mu, const LinkBudget& lb, const ChannelParams& ch,
                                   const PhotonStats& stats);
double pseudo_single_pair_fraction(double mu, const LinkBudget& lb, const ChannelParams& ch,
                                   const PhaseConfig& cfg);

struct SinglePhotonPoint {
    double yield = 0.0; // Y_11
    double error = 0.5; // e_11
};

// X-basis single-photon-pair yield and bit error rate for symmetric arms
// (eta_a = eta_b = eta_s):
//   Y = (1 - p_d^2) [ eta^2/2 + (4 eta - 3 eta^2) p_d + 4 (1-eta)^2 p_d^2 ]
//   e Y = e_0 Y - (e_0 - e_d)(1 - p_d^2) eta^2 / 2,  e_0 = 1/2
SinglePhotonPoint mdi_single_photon_yield_error(const LinkBudget& lb, const ChannelParams& ch);

struct DeviationBrackets {
    double y_lo = 0.0, y_hi = 0.0;   // bracket for the yield
    double ey_lo = 0.0, ey_hi = 0.0; // bracket for yield * error
};

// Widens (Y, e*Y) by eps1 = sqrt(1 - F^2) on both sides and intersects with
// [0, 1], where F is the pseudo-single-photon fidelity at intensity 2*mu.
DeviationBrackets apply_deviation(double y11, double e11, double mu, const PhotonStats& stats);
DeviationBrackets apply_deviation(double y11, double e11, double mu, const PhaseConfig& cfg);

} // namespace mpqkd
