#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <unistd.h>

#include "mpqkd/runner.hpp"

using namespace mpqkd;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("mpqkd_test_" + std::to_string(::getpid()) + "_" +
                                            std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    static int& counter() {
        static int c = 0;
        return c;
    }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

std::string write_json(const TempDir& dir, const std::string& name, const json& doc) {
    const std::string p = dir.file(name);
    std::ofstream out(p);
    out << doc.dump(2);
    return p;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int count_lines(const std::string& text) {
    int n = 0;
    for (char c : text)
        if (c == '\n') ++n;
    return n;
}

} // namespace

TEST_CASE("mode parsing") {
    CHECK(cli::mode_from_string("sweep") == cli::Mode::sweep);
    CHECK(cli::mode_from_string("mc_validate") == cli::Mode::mc_validate);
    CHECK(cli::mode_from_string("decoy_validate") == cli::Mode::decoy_validate);
    CHECK_THROWS_AS(cli::mode_from_string("nonsense"), cli::ConfigError);
}

TEST_CASE("config overrides") {
    json doc = {{"channel", {{"p_d", 1.2e-8}}}};
    cli::apply_override(doc, "channel.p_d=1e-7");
    cli::apply_override(doc, "grid.d_values=[8,10]");
    cli::apply_override(doc, "outputs.csv_path=out.csv");
    CHECK(doc["channel"]["p_d"] == 1e-7);
    CHECK(doc["grid"]["d_values"] == json::array({8, 10}));
    CHECK(doc["outputs"]["csv_path"] == "out.csv");
    CHECK_THROWS_AS(cli::apply_override(doc, "no_equals"), cli::ConfigError);
}

TEST_CASE("config parsing applies table defaults and validates") {
    json doc = {{"mode", "sweep"},
                {"grid",
                 {{"distances_km", {50.0}}, {"d_values", {12}}, {"l_values", {1000}}}}};
    const auto cfg = cli::parse_config(doc);
    CHECK(cfg.channel.p_d == 1.2e-8);
    CHECK(cfg.channel.f == 1.15);
    CHECK(cfg.channel.eta_d == 0.2);
    CHECK(cfg.channel.e_d == 0.04);
    CHECK(cfg.channel.alpha_db == 0.2);
    CHECK(cfg.mc_points.size() == 3);

    json bad = doc;
    bad["grid"].erase("d_values");
    CHECK_THROWS_AS(cli::parse_config(bad), cli::ConfigError);

    json range = doc;
    range["grid"]["distances_km"] = {{"start", 10.0}, {"stop", 50.0}, {"step", 10.0}};
    CHECK(cli::parse_config(range).grid.distances_km.size() == 5);
}

TEST_CASE("sweep mode writes a deterministic CSV") {
    TempDir dir;
    const json doc = {
        {"mode", "sweep"},
        {"grid",
         {{"distances_km", {50.0, 100.0}},
          {"d_values", {10}},
          {"l_values", {1000}},
          {"mu_grid", {0.05, 0.1, 0.2}}}},
        {"outputs", {{"csv_path", dir.file("out.csv")}}}};
    const std::string cfg_path = write_json(dir, "cfg.json", doc);

    std::ostringstream out1, err1;
    CHECK(cli::run_file(cfg_path, {}, std::nullopt, 1, out1, err1) == 0);
    const std::string csv1 = slurp(dir.file("out.csv"));
    CHECK(count_lines(csv1) == 3); // header + 2 rows
    CHECK(csv1.rfind("distance_km,D,l,mu_opt,key_rate,plob,p,r_p,r_s,q11,E_z,e_phase,F11\n", 0) ==
          0);

    std::ostringstream out2, err2;
    CHECK(cli::run_file(cfg_path, {}, std::nullopt, 3, out2, err2) == 0);
    CHECK(slurp(dir.file("out.csv")) == csv1); // worker count cannot change bytes
}

TEST_CASE("set overrides reach the engine") {
    TempDir dir;
    const json doc = {
        {"mode", "sweep"},
        {"grid",
         {{"distances_km", {50.0}}, {"d_values", {10}}, {"l_values", {1000}},
          {"mu_grid", {0.1}}}},
        {"outputs", {{"csv_path", dir.file("a.csv")}}}};
    const std::string cfg_path = write_json(dir, "cfg.json", doc);

    std::ostringstream out, err;
    CHECK(cli::run_file(cfg_path, {}, std::nullopt, 1, out, err) == 0);
    const std::string base = slurp(dir.file("a.csv"));

    std::ostringstream out2, err2;
    CHECK(cli::run_file(cfg_path, {"channel.eta_d=0.1", "outputs.csv_path=" + dir.file("b.csv")},
                        std::nullopt, 1, out2, err2) == 0);
    const std::string changed = slurp(dir.file("b.csv"));
    CHECK(base != changed);
}

TEST_CASE("exit codes") {
    TempDir dir;
    std::ostringstream out, err;
    CHECK(cli::run_file(dir.file("missing.json"), {}, std::nullopt, 1, out, err) ==
          cli::kExitIo);

    const std::string garbled = dir.file("bad.json");
    std::ofstream(garbled) << "{not json";
    CHECK(cli::run_file(garbled, {}, std::nullopt, 1, out, err) == cli::kExitConfig);

    const json no_grid = {{"mode", "sweep"}};
    CHECK(cli::run_file(write_json(dir, "nogrid.json", no_grid), {}, std::nullopt, 1, out, err) ==
          cli::kExitConfig);

    // Unwritable CSV destination.
    const json doc = {
        {"mode", "sweep"},
        {"grid",
         {{"distances_km", {50.0}}, {"d_values", {10}}, {"l_values", {1000}},
          {"mu_grid", {0.1}}}},
        {"outputs", {{"csv_path", "/nonexistent_dir_mpqkd/out.csv"}}}};
    CHECK(cli::run_file(write_json(dir, "io.json", doc), {}, std::nullopt, 1, out, err) ==
          cli::kExitIo);
}

TEST_CASE("mc validation mode") {
    TempDir dir;
    const json doc = {
        {"mode", "mc_validate"},
        {"outputs", {{"csv_path", dir.file("mc.json")}}},
        {"mc",
         {{"points",
           {{{"n_rounds", 200000},
             {"seed", 42},
             {"l", 100},
             {"mu", 0.1},
             {"L_km", 50.0}}}}}}};
    std::ostringstream out, err;
    CHECK(cli::run_file(write_json(dir, "cfg.json", doc), {}, std::nullopt, 1, out, err) == 0);
    const auto report = json::parse(slurp(dir.file("mc.json")));
    CHECK(report["pass"] == true);
    CHECK(report["points"].size() == 1);
    CHECK(report["points"][0]["mc"]["rng"] == "splitmix64");
}

TEST_CASE("decoy validation mode") {
    TempDir dir;
    const json doc = {{"mode", "decoy_validate"},
                      {"outputs", {{"csv_path", dir.file("decoy.json")}}},
                      {"decoy", {{"instances", 3}, {"d_values", {4}}, {"seed", 7}}}};
    std::ostringstream out, err;
    CHECK(cli::run_file(write_json(dir, "cfg.json", doc), {}, std::nullopt, 1, out, err) == 0);
    const auto report = json::parse(slurp(dir.file("decoy.json")));
    CHECK(report["pass"] == true);
    CHECK(report["instances"] == 3);
    CHECK(report["contained"] == 3);
    CHECK(report["max_square_recovery_error"].get<double>() < 1e-7);
}

TEST_CASE("mode flag overrides the config mode") {
    TempDir dir;
    const json doc = {{"mode", "sweep"},
                      {"grid",
                       {{"distances_km", {50.0}}, {"d_values", {10}}, {"l_values", {1000}},
                        {"mu_grid", {0.1}}}},
                      {"outputs", {{"csv_path", dir.file("r.json")}}},
                      {"decoy", {{"instances", 2}, {"d_values", {4}}, {"seed", 3}}}};
    std::ostringstream out, err;
    CHECK(cli::run_file(write_json(dir, "cfg.json", doc), {}, cli::Mode::decoy_validate, 1, out,
                        err) == 0);
    CHECK(json::parse(slurp(dir.file("r.json")))["mode"] == "decoy_validate");
}

TEST_CASE("plot script emission") {
    TempDir dir;
    std::ofstream(dir.file("empty.csv"))
        << "distance_km,D,l,mu_opt,key_rate,plob,p,r_p,r_s,q11,E_z,e_phase,F11\n";
    CHECK(cli::emit_plot_script(dir.file("empty.csv"), dir.file("plot.py")) == 0);
    const std::string script = slurp(dir.file("plot.py"));
    CHECK(script.find("set_yscale(\"log\")") != std::string::npos);
    CHECK(script.find("distance (km)") != std::string::npos);
    CHECK(script.find("PLOB") != std::string::npos);
    CHECK(script.find(dir.file("empty.csv")) != std::string::npos);
    CHECK(cli::emit_plot_script(dir.file("x.csv"), "/nonexistent_dir_mpqkd/p.py") ==
          cli::kExitIo);
}

TEST_CASE("csv writer rejects non-finite fields") {
    std::vector<KeyRatePoint> pts(1);
    pts[0].plob = std::numeric_limits<double>::infinity();
    std::ostringstream os;
    CHECK_THROWS(cli::write_sweep_csv(os, pts));
}
