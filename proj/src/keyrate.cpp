#include "mpqkd/keyrate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <thread>

#include "mpqkd/basis_fidelity.hpp"

namespace mpqkd {

namespace {

template <typename Fn>
auto stage(const char* name, Fn&& fn) {
    try {
        return fn();
    } catch (const std::exception& e) {
        throw std::runtime_error(std::string("key_rate stage ") + name + ": " + e.what());
    }
}

} // namespace

KeyRatePoint key_rate(double mu, int d, std::uint64_t l, const ChannelParams& ch) {
    if (!(mu >= 0.0)) throw std::domain_error("key_rate: intensity must be >= 0");
    const PhotonStats stats =
        d == 0 ? PhotonStats::continuous_limit() : PhotonStats::discrete(PhaseConfig(d));

    KeyRatePoint pt;
    pt.L_km = ch.L_km;
    pt.d = d;
    pt.l = l;
    pt.mu = mu;
    pt.plob = plob_bound(ch);

    const LinkBudget lb = stage("link_budget", [&] { return link_budget(ch); });
    pt.diag.p = stage("mean_click_prob", [&] { return mean_click_prob(mu, lb, ch); });
    pt.diag.r_p = stage("pairing_rate", [&] { return pairing_rate(pt.diag.p, l); });
    pt.diag.r_s = stage("signal_pair_ratio", [&] { return signal_pair_ratio(mu, lb, ch); });
    pt.diag.e_z = stage("qber_z", [&] { return qber_z(mu, lb, ch); });

    const SinglePhotonPoint sp =
        stage("single_photon_yield", [&] { return mdi_single_photon_yield_error(lb, ch); });
    const DeviationBrackets dev =
        stage("apply_deviation", [&] { return apply_deviation(sp.yield, sp.error, mu, stats); });
    pt.diag.y11_lo = dev.y_lo;
    pt.diag.y11_hi = dev.y_hi;

    if (mu == 0.0) {
        // No pseudo single photons are ever emitted; the basis fidelity is
        // undefined here and reported as 0.
        pt.diag.q11 = 0.0;
        pt.diag.f11 = 0.0;
        pt.diag.e_phase = 0.5;
        pt.rate = 0.0;
        return pt;
    }

    pt.diag.q11 = stage("pseudo_single_pair_fraction",
                        [&] { return pseudo_single_pair_fraction(mu, lb, ch, stats); });
    pt.diag.f11 = stage("fidelity_overall", [&] {
        return stats.continuous() ? 1.0 : fidelity_overall(mu, 1, *stats.phase_config()).overall;
    });

    if (!(dev.y_lo > 0.0)) {
        // Deviation swallows the whole yield; no phase error estimate survives.
        pt.diag.e_phase = 0.5;
        pt.rate = 0.0;
        return pt;
    }

    const double e11_hi = std::min(0.5, dev.ey_hi / dev.y_lo);
    const BalanceResult delta =
        stage("delta_balance", [&] { return delta_balance(pt.diag.f11, dev.y_lo); });
    pt.diag.e_phase =
        stage("phase_error_bound", [&] { return phase_error_bound(e11_hi, delta.value); });

    if (delta.clamped || pt.diag.e_phase >= 0.5) {
        pt.rate = 0.0;
        return pt;
    }

    const double single_term = pt.diag.q11 * (1.0 - binary_entropy(pt.diag.e_phase));
    const double correction_cost = ch.f * binary_entropy(pt.diag.e_z);
    pt.rate = std::max(0.0, pt.diag.r_p * pt.diag.r_s * (single_term - correction_cost));
    return pt;
}

double plob_bound(const ChannelParams& ch) {
    ch.validate();
    const double eta = std::pow(10.0, -ch.alpha_db * ch.L_km / 10.0);
    if (eta >= 1.0) return std::numeric_limits<double>::infinity();
    return -std::log2(1.0 - eta);
}

KeyRatePoint optimize_mu(int d, std::uint64_t l, const ChannelParams& ch,
                         const std::vector<double>& mu_grid) {
    if (mu_grid.empty()) throw std::domain_error("optimize_mu: empty intensity grid");
    std::vector<double> grid = mu_grid;
    std::sort(grid.begin(), grid.end());
    for (double m : grid)
        if (!(m >= 0.0 && m <= 0.5))
            throw std::domain_error("optimize_mu: intensity grid outside [0, 0.5]");

    std::optional<KeyRatePoint> best;
    for (double m : grid) {
        KeyRatePoint pt = key_rate(m, d, l, ch);
        if (!best || pt.rate > best->rate) best = pt;
    }
    return *best;
}

std::vector<double> default_mu_grid() {
    std::vector<double> grid;
    grid.reserve(101);
    for (int i = 0; i <= 30; ++i) grid.push_back(0.005 * std::pow(10.0, i / 30.0));
    for (int i = 1; i <= 70; ++i) grid.push_back(0.05 + 0.45 * (i / 70.0));
    for (double& m : grid) m = std::min(m, 0.5);
    return grid;
}

SweepResult sweep(const SweepGrid& grid, const ChannelParams& ch, int workers) {
    struct Task {
        int d;
        std::uint64_t l;
        double L;
    };

    auto sorted_unique = [](auto values) {
        std::sort(values.begin(), values.end());
        values.erase(std::unique(values.begin(), values.end()), values.end());
        return values;
    };
    const auto ds = sorted_unique(grid.d_values);
    const auto ls = sorted_unique(grid.l_values);
    const auto dists = sorted_unique(grid.distances_km);
    const std::vector<double> mu_grid = grid.mu_grid.empty() ? default_mu_grid() : grid.mu_grid;

    std::vector<Task> tasks;
    tasks.reserve(ds.size() * ls.size() * dists.size());
    for (int d : ds)
        for (std::uint64_t l : ls)
            for (double L : dists) tasks.push_back({d, l, L});

    std::vector<std::optional<KeyRatePoint>> slots(tasks.size());
    std::vector<std::optional<SweepFailure>> fails(tasks.size());

    std::atomic<std::size_t> cursor{0};
    auto worker = [&] {
        for (;;) {
            const std::size_t i = cursor.fetch_add(1);
            if (i >= tasks.size()) return;
            const Task& t = tasks[i];
            ChannelParams local = ch;
            local.L_km = t.L;
            try {
                slots[i] = optimize_mu(t.d, t.l, local, mu_grid);
            } catch (const std::exception& e) {
                fails[i] = SweepFailure{t.d, t.l, t.L, e.what()};
            }
        }
    };

    const int n_threads = std::max(1, std::min<int>(workers, static_cast<int>(tasks.size())));
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(n_threads);
        for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    SweepResult result;
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        if (slots[i]) result.points.push_back(*slots[i]);
        if (fails[i]) result.failures.push_back(*fails[i]);
    }
    return result;
}

} // namespace mpqkd
