#include "mpqkd/channel.hpp"

#include <cmath>
#include <stdexcept>

namespace mpqkd {

void ChannelParams::validate() const {
    if (!(p_d >= 0.0 && p_d < 1e-3))
        throw std::domain_error("ChannelParams: p_d outside [0, 1e-3)");
    if (!(eta_d > 0.0 && eta_d <= 1.0))
        throw std::domain_error("ChannelParams: eta_d outside (0, 1]");
    if (!(e_d >= 0.0 && e_d < 0.5))
        throw std::domain_error("ChannelParams: e_d outside [0, 0.5)");
    if (!(f >= 1.0))
        throw std::domain_error("ChannelParams: f must be >= 1");
    if (!(alpha_db > 0.0))
        throw std::domain_error("ChannelParams: alpha_db must be > 0");
    if (!(L_km >= 0.0))
        throw std::domain_error("ChannelParams: L_km must be >= 0");
}

LinkBudget link_budget(const ChannelParams& ch) {
    ch.validate();
    LinkBudget lb;
    lb.eta_s = ch.eta_d * std::pow(10.0, -ch.alpha_db * (ch.L_km / 2.0) / 10.0);
    return lb;
}

static void check_bit(int z, const char* who) {
    if (z != 0 && z != 1) throw std::domain_error(std::string(who) + ": bit must be 0 or 1");
}

double click_prob_given_intensity(int z_a, int z_b, double mu, const LinkBudget& lb,
                                  const ChannelParams& ch) {
    check_bit(z_a, "click_prob_given_intensity");
    check_bit(z_b, "click_prob_given_intensity");
    return 1.0 - (1.0 - 2.0 * ch.p_d) * std::exp(-lb.eta_s * mu * (z_a + z_b));
}

double mean_click_prob(double mu, const LinkBudget& lb, const ChannelParams& ch) {
    double sum = 0.0;
    for (int z_a : {0, 1})
        for (int z_b : {0, 1}) sum += click_prob_given_intensity(z_a, z_b, mu, lb, ch);
    return sum / 4.0;
}

double click_prob_given_pseudo_photons(int k_a, int k_b, double mu, const LinkBudget& lb,
                                       const ChannelParams& ch, const PhotonStats& stats) {
    const double n = stats.mean_photon_number(mu, k_a) + stats.mean_photon_number(mu, k_b);
    return 1.0 - (1.0 - 2.0 * ch.p_d) * std::pow(1.0 - lb.eta_s, n);
}

double click_prob_given_pseudo_photons(int k_a, int k_b, double mu, const LinkBudget& lb,
                                       const ChannelParams& ch, const PhaseConfig& cfg) {
    return click_prob_given_pseudo_photons(k_a, k_b, mu, lb, ch, PhotonStats::discrete(cfg));
}

double pairing_rate(double p, std::uint64_t l) {
    if (!(p >= 0.0 && p <= 1.0))
        throw std::domain_error("pairing_rate: p outside [0, 1]");
    if (l < 1) throw std::domain_error("pairing_rate: l must be >= 1");
    if (p == 0.0) return 0.0;
    // 1 - (1-p)^l, evaluated in log space; p = 1 gives exactly 1.
    const double miss = (p == 1.0) ? 0.0 : std::exp(static_cast<double>(l) * std::log1p(-p));
    const double complete = 1.0 - miss;
    return 1.0 / (1.0 / (p * complete) + 1.0 / p);
}

namespace {

// The four intensity configurations forming a signal pair, [z_i, z_j] with
// z_i XOR z_j = [1, 1]; the first and last are the bit-error cases.
constexpr int kSignalConfigs[4][4] = {
    {0, 0, 1, 1}, // vacuum-vacuum then pulse-pulse  (error)
    {0, 1, 1, 0},
    {1, 0, 0, 1},
    {1, 1, 0, 0}, // pulse-pulse then vacuum-vacuum  (error)
};

struct PairSums {
    double all = 0.0; // sum over the four configurations
    double err = 0.0; // sum over the two error configurations
};

PairSums intensity_pair_sums(double mu, const LinkBudget& lb, const ChannelParams& ch) {
    PairSums s;
    for (int c = 0; c < 4; ++c) {
        const auto& z = kSignalConfigs[c];
        const double term = click_prob_given_intensity(z[0], z[1], mu, lb, ch) *
                            click_prob_given_intensity(z[2], z[3], mu, lb, ch);
        s.all += term;
        if (c == 0 || c == 3) s.err += term;
    }
    return s;
}

double checked_mean_click_prob(double mu, const LinkBudget& lb, const ChannelParams& ch,
                               const char* who) {
    const double p = mean_click_prob(mu, lb, ch);
    if (!(p > 0.0))
        throw std::domain_error(std::string(who) + ": zero click probability (no clicks)");
    return p;
}

} // namespace

double signal_pair_ratio(double mu, const LinkBudget& lb, const ChannelParams& ch) {
    const double p = checked_mean_click_prob(mu, lb, ch, "signal_pair_ratio");
    return intensity_pair_sums(mu, lb, ch).all / (16.0 * p * p);
}

double qber_z(double mu, const LinkBudget& lb, const ChannelParams& ch) {
    const double p = checked_mean_click_prob(mu, lb, ch, "qber_z");
    const PairSums s = intensity_pair_sums(mu, lb, ch);
    const double r_s = s.all / (16.0 * p * p);
    return s.err / (16.0 * r_s * p * p);
}

double pseudo_single_pair_fraction(double mu, const LinkBudget& lb, const ChannelParams& ch,
                                   const PhotonStats& stats) {
    const double p = checked_mean_click_prob(mu, lb, ch, "pseudo_single_pair_fraction");
    const double r_s = signal_pair_ratio(mu, lb, ch);
    const double p1 = stats.prob(mu, 1);
    double sum = 0.0;
    for (const auto& z : kSignalConfigs) {
        sum += click_prob_given_pseudo_photons(z[0], z[1], mu, lb, ch, stats) *
               click_prob_given_pseudo_photons(z[2], z[3], mu, lb, ch, stats);
    }
    const double q = p1 * p1 * sum / (16.0 * r_s * p * p);
    return std::min(1.0, std::max(0.0, q));
}

double pseudo_single_pair_fraction(double mu, const LinkBudget& lb, const ChannelParams& ch,
                                   const PhaseConfig& cfg) {
    return pseudo_single_pair_fraction(mu, lb, ch, PhotonStats::discrete(cfg));
}

SinglePhotonPoint mdi_single_photon_yield_error(const LinkBudget& lb, const ChannelParams& ch) {
    const double eta = lb.eta_s;
    const double pd = ch.p_d;
    const double e0 = 0.5; // vacuum error rate
    SinglePhotonPoint sp;
    sp.yield = (1.0 - pd * pd) * (eta * eta / 2.0 + (4.0 * eta - 3.0 * eta * eta) * pd +
                                  4.0 * (1.0 - eta) * (1.0 - eta) * pd * pd);
    const double ey = e0 * sp.yield - (e0 - ch.e_d) * (1.0 - pd * pd) * eta * eta / 2.0;
    sp.error = sp.yield > 0.0 ? ey / sp.yield : e0;
    return sp;
}

DeviationBrackets apply_deviation(double y11, double e11, double mu, const PhotonStats& stats) {
    const double eps1 = stats.single_photon_deviation(mu);
    const double ey = e11 * y11;
    DeviationBrackets b;
    b.y_lo = std::max(0.0, y11 - eps1);
    b.y_hi = std::min(1.0, y11 + eps1);
    b.ey_lo = std::max(0.0, ey - eps1);
    b.ey_hi = std::min(1.0, ey + eps1);
    return b;
}

DeviationBrackets apply_deviation(double y11, double e11, double mu, const PhaseConfig& cfg) {
    return apply_deviation(y11, e11, mu, PhotonStats::discrete(cfg));
}

} // namespace mpqkd
