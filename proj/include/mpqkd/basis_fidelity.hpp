// Basis dependence of the discrete-phase-randomized source: fidelity between
// the Z- and X-basis average states at fixed pseudo photon number, the
// quantum-coin balance parameter derived from it, and the resulting phase
// error bound.

#pragma once

#include <vector>

#include "mpqkd/source_stats.hpp"

namespace mpqkd {

// Per-party fidelity lower bound between the Z-basis and X_theta-basis
// mixtures with pseudo photon number k on each side:
//
//   F_theta = sqrt( |2 e^{i theta} S_k(mu) + S_k(mu e^{i theta})
//                    - S_k(-mu e^{i theta})|^2 / (8 |S_k(mu) S_k(2 mu)|) )
//
// The squared value bounds the joint fidelity of the two-party product
// state.  Clamped to [0, 1].  Throws if the denominator degenerates
// (|S_k(mu) S_k(2mu)| < 1e-300, i.e. mu is too small for this k at this D).
double fidelity_theta(double mu, int k, double theta, const PhaseConfig& cfg);

struct FidelityReport {
    std::vector<std::pair<double, double>> per_theta; // (theta, F_theta)
    double overall = 0.0;                             // uniform average
    int k = 0;
};

// Average of fidelity_theta over the D/2 alignment angles
// theta = 2*pi*n/D, n = 0..D/2-1, each with weight 2/D.
FidelityReport fidelity_overall(double mu, int k, const PhaseConfig& cfg);

struct BalanceResult {
    double value = 0.0; // in [0, 1/2]
    bool clamped = false;
};

// Quantum-coin imbalance Delta = (1 - F) / (2 Y), clamped to [0, 1/2].
// Beyond 1/2 the phase-error bound leaves its derivation regime; callers
// treat a clamped result as "no key".  Throws for Y <= 0.
BalanceResult delta_balance(double f_overall, double y_kk);

// Phase error rate bound from the bit error rate and the coin imbalance:
//   e_p <= e + 4 d (1-d) (1-2e) + 4 (1-2d) sqrt(d (1-d) e (1-e)),
// capped at 1.  Requires e in [0, 1/2] and d in [0, 1/2].
double phase_error_bound(double e_bit, double delta);

} // namespace mpqkd
