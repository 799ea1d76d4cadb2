#include "mpqkd/decoy.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "mpqkd/lp.hpp"

namespace mpqkd {

namespace {
constexpr double kIntensityTol = 1e-12;

bool same_intensity(double a, double b) { return std::fabs(a - b) < kIntensityTol; }

std::string fmt_double(double v) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general);
    return std::string(buf, res.ptr);
}
} // namespace

void DecoyConfig::validate() const {
    if (!(nu > 0.0) || !(nu <= mu))
        throw std::domain_error("DecoyConfig: need 0 < nu <= mu");
    const double sum = s_0 + s_nu + s_mu;
    if (!(s_0 > 0.0 && s_nu > 0.0 && s_mu > 0.0) || std::fabs(sum - 1.0) > 1e-12)
        throw std::domain_error("DecoyConfig: selection probabilities must be positive and sum to 1");
    if (epsilon_override && !(*epsilon_override >= 0.0 && *epsilon_override <= 1.0))
        throw std::domain_error("DecoyConfig: epsilon override outside [0, 1]");
}

std::array<double, 6> DecoyConfig::summed_intensities() const {
    return {0.0, nu, mu, 2.0 * nu, nu + mu, 2.0 * mu};
}

double prob_k_given_mu_pair(int k_a, int k_b, double mu_a, double mu_b, const PhaseConfig& cfg) {
    return pseudo_photon_prob(mu_a, k_a, cfg) * pseudo_photon_prob(mu_b, k_b, cfg);
}

double epsilon_slack(const DecoyConfig& dc) {
    dc.validate();
    if (dc.epsilon_override) return *dc.epsilon_override;
    if (dc.mu == dc.nu) return 0.0;

    // sqrt(1 - F^2) with F the intensity fidelity.  With a = sum mu^(mD)/(mD)!
    // written as 1 + A (and likewise B, C for nu and sqrt(mu nu)),
    //   1 - F^2 = (ab - c^2)/(ab) = [(A + B - 2C) + (AB - C^2)] / (ab)
    // where the dominant part is a sum of exact squares,
    //   A + B - 2C = sum_m (mu^(mD/2) - nu^(mD/2))^2 / (mD)!.
    // This keeps the slack accurate when the fidelity is within an ulp of 1.
    const int d = dc.phases.d;
    const double u = std::pow(dc.mu, d / 2.0);
    const double v = std::pow(dc.nu, d / 2.0);
    double lead = 0.0;
    double um = 1.0, vm = 1.0, inv_fact = 1.0;
    long long fac = 0;
    for (int m = 1; m <= 80; ++m) {
        um *= u;
        vm *= v;
        for (int j = 0; j < d; ++j) inv_fact /= static_cast<double>(++fac);
        const double term = (um - vm) * (um - vm) * inv_fact;
        lead += term;
        if (term == 0.0 || term < 1e-30 * lead) break;
    }
    const auto tail = [&](double x) {
        return detail::mod_factorial_series(x, d, d, d, dc.phases.tol);
    };
    const double a_excess = tail(dc.mu);
    const double b_excess = tail(dc.nu);
    const double c_excess = tail(std::sqrt(dc.mu * dc.nu));
    const double second = a_excess * b_excess - c_excess * c_excess;
    const double ab = (1.0 + a_excess) * (1.0 + b_excess);
    return std::sqrt(std::max(0.0, (lead + second) / ab));
}

void GainTable::set(double mu_a, double mu_b, double q, double qe) {
    if (!(mu_a >= 0.0) || !(mu_b >= 0.0))
        throw std::domain_error("GainTable: negative intensity");
    if (!(q >= 0.0 && q <= 1.0) || !(qe >= 0.0) || qe > q)
        throw std::domain_error("GainTable: need 0 <= QE <= Q <= 1");
    for (auto& r : rows_) {
        if (same_intensity(r.mu_a, mu_a) && same_intensity(r.mu_b, mu_b)) {
            r.q = q;
            r.qe = qe;
            return;
        }
    }
    rows_.push_back({mu_a, mu_b, q, qe});
}

const GainRow* GainTable::find(double mu_a, double mu_b) const {
    for (const auto& r : rows_)
        if (same_intensity(r.mu_a, mu_a) && same_intensity(r.mu_b, mu_b)) return &r;
    return nullptr;
}

std::string GainTable::to_csv() const {
    std::string out = "mu_a,mu_b,Q,QE\n";
    for (const auto& r : rows_) {
        out += fmt_double(r.mu_a) + ',' + fmt_double(r.mu_b) + ',' + fmt_double(r.q) + ',' +
               fmt_double(r.qe) + '\n';
    }
    return out;
}

GainTable GainTable::from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != "mu_a,mu_b,Q,QE")
        throw std::runtime_error("GainTable: bad CSV header");
    GainTable table;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string field;
        double vals[4];
        for (int i = 0; i < 4; ++i) {
            if (!std::getline(ls, field, ',')) throw std::runtime_error("GainTable: short CSV row");
            std::size_t used = 0;
            vals[i] = std::stod(field, &used);
            if (used != field.size()) throw std::runtime_error("GainTable: bad CSV number");
        }
        table.set(vals[0], vals[1], vals[2], vals[3]);
    }
    return table;
}

void GainTable::save_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("GainTable: cannot open " + path);
    out << to_csv();
}

GainTable GainTable::load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("GainTable: cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_csv(buf.str());
}

namespace {

void check_k(int k, const PhaseConfig& cfg, const char* who) {
    if (k < 0 || k >= cfg.d)
        throw std::domain_error(std::string(who) + ": pseudo photon index out of [0, D)");
}

// min/max of variable `target` over the assembled constraint set.
Bracket solve_bracket(lp::Problem& prob, std::size_t target, const char* who) {
    prob.c.assign(prob.n, 0.0);
    prob.c[target] = 1.0;
    prob.maximize = false;
    const auto lo = lp::solve(prob);
    if (lo.status != lp::Status::optimal)
        throw DecoyInfeasible(std::string(who) + ": inconsistent gains (phase-1 residual " +
                              fmt_double(lo.infeasibility) + ")");
    prob.maximize = true;
    const auto hi = lp::solve(prob);
    if (hi.status != lp::Status::optimal)
        throw DecoyInfeasible(std::string(who) + ": inconsistent gains (phase-1 residual " +
                              fmt_double(hi.infeasibility) + ")");
    Bracket b;
    b.lo = std::max(0.0, std::min(1.0, lo.value));
    b.hi = std::max(b.lo, std::min(1.0, hi.value));
    return b;
}

} // namespace

Bracket stage1_bounds(const GainTable& gains, const DecoyConfig& dc, int k_a, double mu_b_col,
                      Observable obs) {
    dc.validate();
    check_k(k_a, dc.phases, "stage1_bounds");
    const double eps = epsilon_slack(dc);
    const int d = dc.phases.d;

    auto prob = lp::Problem::boxed(d);
    bool any_row = false;
    for (const auto& row : gains.rows()) {
        if (!same_intensity(row.mu_b, mu_b_col)) continue;
        any_row = true;
        std::vector<double> coeffs(d);
        for (int k = 0; k < d; ++k) coeffs[k] = pseudo_photon_prob(row.mu_a, k, dc.phases);
        const double observed = obs == Observable::gain ? row.q : row.qe;
        if (same_intensity(row.mu_a, dc.mu)) {
            prob.rows.push_back({coeffs, lp::Sense::eq, observed});
        } else {
            prob.rows.push_back({coeffs, lp::Sense::le, observed + eps});
            prob.rows.push_back({std::move(coeffs), lp::Sense::ge, observed - eps});
        }
    }
    if (!any_row)
        throw std::domain_error("stage1_bounds: no gain rows for the requested column");
    return solve_bracket(prob, static_cast<std::size_t>(k_a), "stage1_bounds");
}

Bracket stage2_bounds(const std::vector<std::pair<double, Bracket>>& stage1_by_col,
                      const DecoyConfig& dc, int k_b) {
    dc.validate();
    check_k(k_b, dc.phases, "stage2_bounds");
    const double eps = epsilon_slack(dc);
    const int d = dc.phases.d;

    auto prob = lp::Problem::boxed(d);
    bool have_anchor = false;
    for (const auto& [col, bracket] : stage1_by_col) {
        std::vector<double> coeffs(d);
        for (int k = 0; k < d; ++k) coeffs[k] = pseudo_photon_prob(col, k, dc.phases);
        double lo = bracket.lo, hi = bracket.hi;
        if (same_intensity(col, dc.mu)) {
            have_anchor = true; // signal column enters without extra slack
        } else {
            lo -= eps;
            hi += eps;
        }
        prob.rows.push_back({coeffs, lp::Sense::le, hi});
        prob.rows.push_back({std::move(coeffs), lp::Sense::ge, lo});
    }
    if (!have_anchor)
        throw std::domain_error("stage2_bounds: stage-1 bracket for the signal column is missing");
    return solve_bracket(prob, static_cast<std::size_t>(k_b), "stage2_bounds");
}

PairBounds estimate_pair_bounds(const GainTable& gains, const DecoyConfig& dc, int k_a, int k_b) {
    dc.validate();
    check_k(k_a, dc.phases, "estimate_pair_bounds");
    check_k(k_b, dc.phases, "estimate_pair_bounds");

    // Distinct Bob columns present in the table, signal column required.
    std::vector<double> cols;
    for (const auto& row : gains.rows()) {
        bool known = false;
        for (double c : cols) known = known || same_intensity(c, row.mu_b);
        if (!known) cols.push_back(row.mu_b);
    }
    std::sort(cols.begin(), cols.end());

    PairBounds out;
    for (Observable obs : {Observable::gain, Observable::gain_error}) {
        std::vector<std::pair<double, Bracket>> stage1;
        stage1.reserve(cols.size());
        for (double col : cols) stage1.emplace_back(col, stage1_bounds(gains, dc, k_a, col, obs));
        const Bracket b = stage2_bounds(stage1, dc, k_b);
        (obs == Observable::gain ? out.y : out.ye) = b;
    }
    return out;
}

double q11_fraction(double y11_lo, double gain_signal, double mu, const PhaseConfig& cfg) {
    if (!(gain_signal > 0.0))
        throw std::domain_error("q11_fraction: signal gain must be > 0");
    if (!(y11_lo >= 0.0))
        throw std::domain_error("q11_fraction: negative yield");
    const double p1 = pseudo_photon_prob(mu, 1, cfg);
    const double q = p1 * p1 * y11_lo / gain_signal;
    return std::min(1.0, std::max(0.0, q));
}

} // namespace mpqkd
