// Batch front door used by the CLI: JSON run configuration, sweep CSV
// emission, plot-script generation, and the two validation modes.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "mpqkd/keyrate.hpp"
#include "mpqkd/pairing_mc.hpp"

namespace mpqkd::cli {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Mode { sweep, mc_validate, decoy_validate };

Mode mode_from_string(const std::string& s);

struct DecoySpec {
    int instances = 100;
    std::vector<int> d_values{4, 8, 12};
    std::uint64_t seed = 20240809;
};

struct RunConfig {
    Mode mode = Mode::sweep;
    ChannelParams channel;          // Table I defaults; L_km comes from the grid
    SweepGrid grid;
    std::string csv_path;           // output artifact; empty = stdout
    std::string plot_path;          // optional plot script (sweep mode)
    std::vector<McConfig> mc_points;
    DecoySpec decoy;
    int workers = 1;
};

// Exit codes: 0 success, 2 config error, 3 numeric/validation failure, 4 IO.
constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitIo = 4;

nlohmann::json load_config_file(const std::string& path);
void apply_override(nlohmann::json& doc, const std::string& key_value); // "a.b=value"
RunConfig parse_config(const nlohmann::json& doc);

// The three parameter points pinned for Monte Carlo validation.
std::vector<McConfig> default_mc_points();

void write_sweep_csv(std::ostream& os, const std::vector<KeyRatePoint>& points);

// Writes a self-contained Python script that renders the CSV: log-scale
// rate vs distance, one series per (D, l), dashed benchmark line.  Returns
// an exit status (0 or kExitIo).
int emit_plot_script(const std::string& csv_path, const std::string& plot_path);

struct McValidation {
    bool pass = false;
    std::vector<ZScoreReport> reports;
    nlohmann::json report;
};

McValidation run_mc_validation(const std::vector<McConfig>& points);

struct DecoyValidation {
    bool pass = false;
    int instances = 0;
    int contained = 0;             // instances whose Y and Y*e brackets held the truth
    double max_square_error = 0.0; // recovery error of the slack-free square system
    nlohmann::json report;
};

DecoyValidation run_decoy_validation(const DecoySpec& spec);

// Executes a parsed configuration; returns an exit code and never throws.
int run(const RunConfig& cfg, std::ostream& out, std::ostream& err);

// Convenience wrapper: load, apply overrides, parse, run.
int run_file(const std::string& config_path, const std::vector<std::string>& overrides,
             const std::optional<Mode>& mode_flag, int workers, std::ostream& out,
             std::ostream& err);

} // namespace mpqkd::cli
