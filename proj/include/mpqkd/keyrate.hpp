// Secret-key rate assembly:
//   R = r_p * r_s * { q11 [1 - H(e_phase)] - f H(E_z) },  clamped at 0,
// with the single-photon quantities taken at their worst-case bracket ends,
// plus the repeaterless benchmark and grid search / sweep drivers.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mpqkd/channel.hpp"

namespace mpqkd {

struct KeyRateDiagnostics {
    double p = 0.0;       // mean click probability per round
    double r_p = 0.0;     // pairs per round
    double r_s = 0.0;     // signal-pair ratio
    double q11 = 0.0;     // pseudo single-photon pair fraction
    double e_z = 0.0;     // Z-basis QBER
    double e_phase = 0.5; // phase error bound
    double f11 = 0.0;     // overall basis fidelity at k = 1 (1 in the continuous limit)
    double y11_lo = 0.0;  // X-basis single-photon yield bracket
    double y11_hi = 0.0;
};

struct KeyRatePoint {
    double L_km = 0.0;
    int d = 0; // phase count; 0 denotes the continuous limit
    std::uint64_t l = 1;
    double mu = 0.0;
    double rate = 0.0;
    double plob = 0.0;
    KeyRateDiagnostics diag;
};

// Full pipeline at one (mu, D, l, distance) setting.  d == 0 selects the
// continuous limit (Poisson statistics, unit fidelities, zero deviation).
// Any stage failure is rethrown with the stage name prepended.  At mu == 0
// the rate is 0 and the fidelity diagnostic is reported as 0.
KeyRatePoint key_rate(double mu, int d, std::uint64_t l, const ChannelParams& ch);

// Repeaterless bound -log2(1 - eta) with eta the end-to-end fiber
// transmittance (detector efficiency excluded).  Infinite at L = 0.
double plob_bound(const ChannelParams& ch);

// Evaluates key_rate over the grid and returns the best point; ties resolve
// toward smaller mu.  Grid values must lie in [0, 0.5].
KeyRatePoint optimize_mu(int d, std::uint64_t l, const ChannelParams& ch,
                         const std::vector<double>& mu_grid);

// 101 intensities on [0.005, 0.5]: geometric below 0.05, linear above.
std::vector<double> default_mu_grid();

struct SweepGrid {
    std::vector<double> distances_km;
    std::vector<int> d_values;            // 0 = continuous limit
    std::vector<std::uint64_t> l_values;
    std::vector<double> mu_grid;          // empty = default_mu_grid()
};

struct SweepFailure {
    int d = 0;
    std::uint64_t l = 1;
    double L_km = 0.0;
    std::string message;
};

struct SweepResult {
    std::vector<KeyRatePoint> points;     // ordered by (d, l, distance)
    std::vector<SweepFailure> failures;
};

// Cartesian product of the grid with per-point intensity optimization.
// Points are independent; `workers` threads evaluate them concurrently and
// the output order (and content) does not depend on the worker count.
// Failed points are skipped and reported in `failures`.
SweepResult sweep(const SweepGrid& grid, const ChannelParams& ch, int workers = 1);

} // namespace mpqkd
