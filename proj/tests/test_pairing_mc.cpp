#include <doctest.h>

#include <cmath>
#include <vector>

#include <json.hpp>

#include "mpqkd/pairing_mc.hpp"

using namespace mpqkd;

namespace {

McConfig table_point(double mu, double L_km, std::uint64_t l, std::uint64_t n, std::uint64_t seed) {
    McConfig cfg;
    cfg.n_rounds = n;
    cfg.seed = seed;
    cfg.l = l;
    cfg.mu = mu;
    cfg.ch.L_km = L_km;
    return cfg;
}

} // namespace

TEST_CASE("simulation is deterministic for a fixed seed") {
    const McConfig cfg = table_point(0.1, 50.0, 100, 200000, 42);
    const McStats a = simulate(cfg);
    const McStats b = simulate(cfg);
    CHECK(a.pairs_per_round == b.pairs_per_round);
    CHECK(a.n_pairs == b.n_pairs);
    CHECK(a.n_error_pairs == b.n_error_pairs);

    McConfig other = cfg;
    other.seed = 43;
    CHECK(simulate(other).n_pairs != a.n_pairs);
}

TEST_CASE("no clicks means no pairs but positive stderr") {
    McConfig cfg = table_point(0.0, 50.0, 10, 50000, 7);
    cfg.ch.p_d = 0.0;
    const McStats s = simulate(cfg);
    CHECK(s.n_clicks == 0);
    CHECK(s.n_pairs == 0);
    CHECK(s.pairs_per_round == 0.0);
    CHECK(s.pairs_per_round_stderr > 0.0);
    CHECK(s.signal_pair_fraction_stderr > 0.0);
    CHECK(s.z_error_fraction_stderr > 0.0);
}

TEST_CASE("saturated flux pairs at the analytic rate") {
    // eta_s*mu >> 1 drives every non-vacuum round to click; the pairing rate
    // must then match the formula at the resulting click probability.
    McConfig cfg = table_point(100.0, 0.0, 1, 500000, 2718);
    cfg.ch.eta_d = 1.0;
    const McStats s = simulate(cfg);
    const LinkBudget lb = link_budget(cfg.ch);
    const double p = mean_click_prob(cfg.mu, lb, cfg.ch);
    CHECK(p == doctest::Approx(0.75).epsilon(1e-6));
    const double rp = pairing_rate(p, cfg.l);
    CHECK(std::fabs(s.pairs_per_round - rp) < 3.0 * s.pairs_per_round_stderr);
}

TEST_CASE("statistics agree with the analytic formulas at a table point") {
    const McConfig cfg = table_point(0.1, 50.0, 100, 1000000, 42);
    const McStats s = simulate(cfg);
    const LinkBudget lb = link_budget(cfg.ch);
    const double p = mean_click_prob(cfg.mu, lb, cfg.ch);
    const auto z = compare_with_analytic(s, pairing_rate(p, cfg.l),
                                         signal_pair_ratio(cfg.mu, lb, cfg.ch),
                                         qber_z(cfg.mu, lb, cfg.ch));
    CHECK(!z.flagged);
    CHECK(std::fabs(z.z_pairing) <= 3.0);
    CHECK(std::fabs(z.z_signal) <= 3.0);
    CHECK(std::fabs(z.z_error) <= 3.0);
}

TEST_CASE("greedy pairing matches an independent replay of the click stream") {
    const McConfig cfg = table_point(0.3, 25.0, 7, 100000, 99);
    const McStats s = simulate(cfg);

    // Rebuild the identical click sequence from the documented generator,
    // then pair it with a separate straightforward scan.
    const LinkBudget lb = link_budget(cfg.ch);
    double click_prob[4];
    for (int za : {0, 1})
        for (int zb : {0, 1})
            click_prob[(za << 1) | zb] = click_prob_given_intensity(za, zb, cfg.mu, lb, cfg.ch);

    std::uint64_t rng = cfg.seed;
    std::vector<std::pair<std::uint64_t, int>> clicks;
    for (std::uint64_t i = 0; i < cfg.n_rounds; ++i) {
        const int z = static_cast<int>(splitmix64_next(rng) & 3u);
        if (splitmix64_unit(rng) < click_prob[z]) clicks.emplace_back(i, z);
    }
    CHECK(clicks.size() == s.n_clicks);

    std::uint64_t pairs = 0, signal = 0, errors = 0;
    std::size_t i = 0;
    while (i + 1 < clicks.size()) {
        if (clicks[i + 1].first - clicks[i].first <= cfg.l) {
            ++pairs;
            const int zi = clicks[i].second, zj = clicks[i + 1].second;
            if (((zi ^ zj) & 1) && ((zi ^ zj) & 2)) {
                ++signal;
                if ((zi == 0 && zj == 3) || (zi == 3 && zj == 0)) ++errors;
            }
            i += 2;
        } else {
            i += 1;
        }
    }
    CHECK(pairs == s.n_pairs);
    CHECK(signal == s.n_signal_pairs);
    CHECK(errors == s.n_error_pairs);
}

TEST_CASE("z-score comparison") {
    McStats s;
    s.pairs_per_round = 0.1;
    s.signal_pair_fraction = 0.2;
    s.z_error_fraction = 0.3;
    s.pairs_per_round_stderr = 0.01;
    s.signal_pair_fraction_stderr = 0.01;
    s.z_error_fraction_stderr = 0.01;
    auto z = compare_with_analytic(s, 0.1, 0.2, 0.3);
    CHECK(z.z_pairing == 0.0);
    CHECK(z.z_signal == 0.0);
    CHECK(z.z_error == 0.0);
    CHECK(!z.flagged);

    z = compare_with_analytic(s, 0.1, 0.18, 0.3); // gap 0.02 at stderr 0.01
    CHECK(z.z_signal == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(!z.flagged);

    z = compare_with_analytic(s, 0.1, 0.15, 0.3);
    CHECK(z.flagged);
}

TEST_CASE("stats serialize with the exact field names") {
    const McConfig cfg = table_point(0.1, 50.0, 100, 20000, 5);
    const auto j = nlohmann::json::parse(mc_stats_json(simulate(cfg)));
    for (const char* field :
         {"pairs_per_round", "signal_pair_fraction", "z_error_fraction",
          "pairs_per_round_stderr", "signal_pair_fraction_stderr", "z_error_fraction_stderr",
          "n_rounds", "n_clicks", "n_pairs", "n_signal_pairs", "n_error_pairs", "rng"}) {
        CHECK(j.contains(field));
    }
    CHECK(j["rng"] == "splitmix64");
}

TEST_CASE("config validation") {
    McConfig cfg = table_point(0.1, 50.0, 100, 0, 5);
    CHECK_THROWS_AS(simulate(cfg), std::domain_error);
    cfg = table_point(0.1, 50.0, 0, 1000, 5);
    CHECK_THROWS_AS(simulate(cfg), std::domain_error);
    cfg = table_point(-0.1, 50.0, 10, 1000, 5);
    CHECK_THROWS_AS(simulate(cfg), std::domain_error);
}
