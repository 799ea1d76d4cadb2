// Monte Carlo oracle for the pairing and sifting statistics: simulates
// per-round intensity choices and clicks, applies the greedy maximal-interval
// pairing rule, and measures pairs per round, signal-pair fraction, and
// Z-basis error fraction empirically.  Fully deterministic for a fixed seed.

#pragma once

#include <cstdint>
#include <string>

#include "mpqkd/channel.hpp"

namespace mpqkd {

struct McConfig {
    std::uint64_t n_rounds = 0;
    std::uint64_t seed = 0;
    std::uint64_t l = 1;  // maximal pairing interval
    double mu = 0.1;
    ChannelParams ch;
};

struct McStats {
    double pairs_per_round = 0.0;
    double signal_pair_fraction = 0.0;
    double z_error_fraction = 0.0;
    double pairs_per_round_stderr = 0.0;
    double signal_pair_fraction_stderr = 0.0;
    double z_error_fraction_stderr = 0.0;
    std::uint64_t n_rounds = 0;
    std::uint64_t n_clicks = 0;
    std::uint64_t n_pairs = 0;
    std::uint64_t n_signal_pairs = 0;
    std::uint64_t n_error_pairs = 0;
    // Generator identifier, recorded for reproducibility across platforms.
    static constexpr const char* rng_id = "splitmix64";
};

// Per round: draw the two intensity bits uniformly, click with the modeled
// probability, then greedily pair each pending click with the next click at
// distance <= l (a click further away replaces it).  Signal pairs flip both
// parties' bits; error pairs are the vacuum-vacuum / pulse-pulse matchings.
McStats simulate(const McConfig& cfg);

struct ZScoreReport {
    double z_pairing = 0.0;
    double z_signal = 0.0;
    double z_error = 0.0;
    bool flagged = false; // any |z| > 3
};

ZScoreReport compare_with_analytic(const McStats& stats, double r_p, double r_s, double e_z);

// JSON object with fields named exactly as in McStats.
std::string mc_stats_json(const McStats& stats);

// Deterministic 64-bit generator used by the simulation and by test-data
// generation elsewhere in the project.
inline std::uint64_t splitmix64_next(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// Uniform double in [0, 1) from the top 53 bits.
inline double splitmix64_unit(std::uint64_t& state) {
    return static_cast<double>(splitmix64_next(state) >> 11) * 0x1.0p-53;
}

} // namespace mpqkd
