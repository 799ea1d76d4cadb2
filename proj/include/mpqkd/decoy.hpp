// Decoy-state estimation for discrete phase randomization.  Observed gains at
// the six summed intensity settings {0, nu, mu, 2nu, nu+mu, 2mu} bracket the
// per-pseudo-photon-pair yields through two stages of linear programs; the
// cross-intensity rows carry the deviation slack eps = sqrt(1 - F^2) because
// yields are no longer intensity-independent at finite D.

#pragma once

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mpqkd/source_stats.hpp"

namespace mpqkd {

struct DecoyConfig {
    double mu;    // signal pulse intensity
    double nu;    // decoy pulse intensity, 0 < nu < mu (nu == mu only in tests)
    double s_0;   // selection probabilities, must sum to 1
    double s_nu;
    double s_mu;
    PhaseConfig phases;
    // Testing hook: forces the deviation slack instead of deriving it from
    // the intensity fidelity.
    std::optional<double> epsilon_override{};

    void validate() const;

    // Summed per-side intensities of a paired emission: {0, nu, mu, 2nu, nu+mu, 2mu}.
    std::array<double, 6> summed_intensities() const;
};

// Joint probability that the two sides carry pseudo photon numbers (k_a, k_b)
// given summed intensities (mu_a, mu_b); a product of the two marginals.
double prob_k_given_mu_pair(int k_a, int k_b, double mu_a, double mu_b, const PhaseConfig& cfg);

// Deviation slack eps = sqrt(1 - F^2) with F the intensity fidelity of
// (mu, nu); bounds how much a yield may differ between intensity settings.
double epsilon_slack(const DecoyConfig& dc);

struct GainRow {
    double mu_a = 0.0;
    double mu_b = 0.0;
    double q = 0.0;  // gain
    double qe = 0.0; // gain * QBER
};

// Observed gains keyed by the summed intensity pair.  Rows satisfy
// 0 <= QE <= Q <= 1.  CSV columns: mu_a,mu_b,Q,QE.
class GainTable {
public:
    void set(double mu_a, double mu_b, double q, double qe);
    const GainRow* find(double mu_a, double mu_b) const;
    const std::vector<GainRow>& rows() const { return rows_; }

    std::string to_csv() const;
    static GainTable from_csv(const std::string& text);
    void save_csv(const std::string& path) const;
    static GainTable load_csv(const std::string& path);

private:
    std::vector<GainRow> rows_;
};

struct Bracket {
    double lo = 0.0;
    double hi = 1.0;
};

// Which observed column a stage-1 program constrains against.
enum class Observable { gain, gain_error };

// Inconsistent gains: the LP constraint set admits no feasible yield vector.
struct DecoyInfeasible : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Stage 1: bracket Y_{k_a} (or its error-weighted counterpart) for Bob's
// summed intensity column mu_b_col.  Variables are the D per-k values at
// Alice's signal intensity; the row at Alice intensity mu is an equality and
// every other available Alice intensity contributes a two-sided row with
// slack eps.
Bracket stage1_bounds(const GainTable& gains, const DecoyConfig& dc, int k_a, double mu_b_col,
                      Observable obs = Observable::gain);

// Stage 2: bracket Y_{k_a,k_b} at the signal-signal setting from the stage-1
// brackets of every Bob column.  The (mu, mu) bracket enters as an interval
// constraint; other columns enter with the additional +/- eps slack.
Bracket stage2_bounds(const std::vector<std::pair<double, Bracket>>& stage1_by_col,
                      const DecoyConfig& dc, int k_b);

struct PairBounds {
    Bracket y;  // yield bracket
    Bracket ye; // yield * error bracket
};

// Runs both stages for the gain and gain-error columns of one (k_a, k_b)
// target.
PairBounds estimate_pair_bounds(const GainTable& gains, const DecoyConfig& dc, int k_a, int k_b);

// Lower bound on the fraction of sifted signal pairs carrying a pseudo
// single photon on both sides: (P_1)^2 * Y_lo / Q_signal, clamped to [0, 1].
double q11_fraction(double y11_lo, double gain_signal, double mu, const PhaseConfig& cfg);

} // namespace mpqkd
