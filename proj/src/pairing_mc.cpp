#include "mpqkd/pairing_mc.hpp"

#include <cassert>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

namespace mpqkd {

namespace {

// Binomial standard error with a half-count continuity floor so the estimate
// stays positive when no event was observed.
double binomial_stderr(double phat, std::uint64_t n) {
    const double nn = static_cast<double>(n ? n : 1);
    return std::sqrt(phat * (1.0 - phat) / nn + 1.0 / (4.0 * nn * nn));
}

} // namespace

McStats simulate(const McConfig& cfg) {
    if (cfg.n_rounds < 1) throw std::domain_error("simulate: n_rounds must be >= 1");
    if (cfg.l < 1) throw std::domain_error("simulate: pairing interval must be >= 1");
    if (!(cfg.mu >= 0.0)) throw std::domain_error("simulate: intensity must be >= 0");

    const LinkBudget lb = link_budget(cfg.ch);
    double click_prob[4];
    for (int z_a : {0, 1})
        for (int z_b : {0, 1})
            click_prob[(z_a << 1) | z_b] =
                click_prob_given_intensity(z_a, z_b, cfg.mu, lb, cfg.ch);

    std::uint64_t rng = cfg.seed;
    McStats stats;
    stats.n_rounds = cfg.n_rounds;

    bool have_pending = false;
    std::uint64_t pending_round = 0;
    int pending_z = 0;

    for (std::uint64_t i = 0; i < cfg.n_rounds; ++i) {
        const std::uint64_t bits = splitmix64_next(rng);
        const int z = static_cast<int>(bits & 3u);
        const double u = splitmix64_unit(rng);
        if (u >= click_prob[z]) continue;
        ++stats.n_clicks;

        if (have_pending && i - pending_round <= cfg.l) {
            assert(i - pending_round >= 1);
            ++stats.n_pairs;
            const int za_i = pending_z >> 1, zb_i = pending_z & 1;
            const int za_j = z >> 1, zb_j = z & 1;
            if ((za_i ^ za_j) == 1 && (zb_i ^ zb_j) == 1) {
                ++stats.n_signal_pairs;
                // Error cases: one round double-vacuum, the other double-pulse.
                if ((pending_z == 0 && z == 3) || (pending_z == 3 && z == 0))
                    ++stats.n_error_pairs;
            }
            have_pending = false;
        } else {
            // Either nothing pending or the pending click is stale; it is
            // discarded and this click becomes the new pending one.
            have_pending = true;
            pending_round = i;
            pending_z = z;
        }
    }

    const double n_rounds = static_cast<double>(stats.n_rounds);
    stats.pairs_per_round = static_cast<double>(stats.n_pairs) / n_rounds;
    stats.pairs_per_round_stderr = binomial_stderr(stats.pairs_per_round, stats.n_rounds);
    if (stats.n_pairs > 0)
        stats.signal_pair_fraction =
            static_cast<double>(stats.n_signal_pairs) / static_cast<double>(stats.n_pairs);
    stats.signal_pair_fraction_stderr = binomial_stderr(stats.signal_pair_fraction, stats.n_pairs);
    if (stats.n_signal_pairs > 0)
        stats.z_error_fraction =
            static_cast<double>(stats.n_error_pairs) / static_cast<double>(stats.n_signal_pairs);
    stats.z_error_fraction_stderr = binomial_stderr(stats.z_error_fraction, stats.n_signal_pairs);
    return stats;
}

ZScoreReport compare_with_analytic(const McStats& stats, double r_p, double r_s, double e_z) {
    ZScoreReport rep;
    rep.z_pairing = (stats.pairs_per_round - r_p) / stats.pairs_per_round_stderr;
    rep.z_signal = (stats.signal_pair_fraction - r_s) / stats.signal_pair_fraction_stderr;
    rep.z_error = (stats.z_error_fraction - e_z) / stats.z_error_fraction_stderr;
    rep.flagged = std::fabs(rep.z_pairing) > 3.0 || std::fabs(rep.z_signal) > 3.0 ||
                  std::fabs(rep.z_error) > 3.0;
    return rep;
}

std::string mc_stats_json(const McStats& stats) {
    nlohmann::json j{
        {"pairs_per_round", stats.pairs_per_round},
        {"signal_pair_fraction", stats.signal_pair_fraction},
        {"z_error_fraction", stats.z_error_fraction},
        {"pairs_per_round_stderr", stats.pairs_per_round_stderr},
        {"signal_pair_fraction_stderr", stats.signal_pair_fraction_stderr},
        {"z_error_fraction_stderr", stats.z_error_fraction_stderr},
        {"n_rounds", stats.n_rounds},
        {"n_clicks", stats.n_clicks},
        {"n_pairs", stats.n_pairs},
        {"n_signal_pairs", stats.n_signal_pairs},
        {"n_error_pairs", stats.n_error_pairs},
        {"rng", McStats::rng_id},
    };
    return j.dump(2);
}

} // namespace mpqkd
