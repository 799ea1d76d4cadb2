#include "mpqkd/runner.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include "mpqkd/decoy.hpp"

namespace mpqkd::cli {

using nlohmann::json;

namespace {

std::string fmt_double(double v) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general);
    return std::string(buf, res.ptr);
}

double require_finite(double v, const char* field) {
    if (!std::isfinite(v))
        throw std::runtime_error(std::string("sweep CSV: non-finite field ") + field);
    return v;
}

} // namespace

Mode mode_from_string(const std::string& s) {
    if (s == "sweep") return Mode::sweep;
    if (s == "mc_validate") return Mode::mc_validate;
    if (s == "decoy_validate") return Mode::decoy_validate;
    throw ConfigError("unknown mode '" + s + "' (expected sweep|mc_validate|decoy_validate)");
}

json load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file " + path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError("config parse failed: " + std::string(e.what()));
    }
}

void apply_override(json& doc, const std::string& key_value) {
    const auto eq = key_value.find('=');
    if (eq == std::string::npos || eq == 0)
        throw ConfigError("--set expects key=value, got '" + key_value + "'");
    const std::string key = key_value.substr(0, eq);
    const std::string raw = key_value.substr(eq + 1);
    json value;
    try {
        value = json::parse(raw);
    } catch (const json::exception&) {
        value = raw; // plain string
    }
    json* node = &doc;
    std::size_t pos = 0;
    for (;;) {
        const auto dot = key.find('.', pos);
        const std::string part = key.substr(pos, dot == std::string::npos ? dot : dot - pos);
        if (part.empty()) throw ConfigError("--set key has an empty path segment: " + key);
        if (dot == std::string::npos) {
            (*node)[part] = value;
            return;
        }
        node = &(*node)[part];
        pos = dot + 1;
    }
}

namespace {

ChannelParams parse_channel(const json& j, ChannelParams base) {
    if (j.contains("p_d")) base.p_d = j.at("p_d").get<double>();
    if (j.contains("eta_d")) base.eta_d = j.at("eta_d").get<double>();
    if (j.contains("e_d")) base.e_d = j.at("e_d").get<double>();
    if (j.contains("f")) base.f = j.at("f").get<double>();
    if (j.contains("alpha_db")) base.alpha_db = j.at("alpha_db").get<double>();
    if (j.contains("L_km")) base.L_km = j.at("L_km").get<double>();
    return base;
}

std::vector<double> parse_distances(const json& j) {
    if (j.is_array()) return j.get<std::vector<double>>();
    if (j.is_object()) {
        const double start = j.at("start").get<double>();
        const double stop = j.at("stop").get<double>();
        const double step = j.at("step").get<double>();
        if (!(step > 0.0)) throw ConfigError("distances_km range: step must be > 0");
        std::vector<double> out;
        for (double v = start; v <= stop + 1e-9; v += step) out.push_back(v);
        return out;
    }
    throw ConfigError("distances_km must be an array or a {start, stop, step} object");
}

} // namespace

std::vector<McConfig> default_mc_points() {
    std::vector<McConfig> points(3);

    points[0].n_rounds = 10'000'000;
    points[0].seed = 42;
    points[0].l = 100;
    points[0].mu = 0.1;
    points[0].ch.L_km = 50.0;

    points[1].n_rounds = 10'000'000;
    points[1].seed = 1337;
    points[1].l = 1000;
    points[1].mu = 0.3;
    points[1].ch.L_km = 100.0;

    // Dark-count-dominated point; the error fraction is actually measurable here.
    points[2].n_rounds = 10'000'000;
    points[2].seed = 2024;
    points[2].l = 5000;
    points[2].mu = 0.02;
    points[2].ch.p_d = 1e-4;
    points[2].ch.L_km = 120.0;

    return points;
}

RunConfig parse_config(const json& doc) {
    try {
        RunConfig cfg;
        if (doc.contains("mode")) cfg.mode = mode_from_string(doc.at("mode").get<std::string>());
        if (doc.contains("channel")) cfg.channel = parse_channel(doc.at("channel"), ChannelParams{});

        if (doc.contains("grid")) {
            const json& g = doc.at("grid");
            if (g.contains("distances_km")) cfg.grid.distances_km = parse_distances(g.at("distances_km"));
            if (g.contains("d_values")) cfg.grid.d_values = g.at("d_values").get<std::vector<int>>();
            if (g.contains("l_values"))
                cfg.grid.l_values = g.at("l_values").get<std::vector<std::uint64_t>>();
            if (g.contains("mu_grid")) cfg.grid.mu_grid = g.at("mu_grid").get<std::vector<double>>();
        }

        if (doc.contains("outputs")) {
            const json& o = doc.at("outputs");
            if (o.contains("csv_path")) cfg.csv_path = o.at("csv_path").get<std::string>();
            if (o.contains("plot_path")) cfg.plot_path = o.at("plot_path").get<std::string>();
        }

        cfg.mc_points = default_mc_points();
        if (doc.contains("mc") && doc.at("mc").contains("points")) {
            cfg.mc_points.clear();
            for (const json& pj : doc.at("mc").at("points")) {
                McConfig p;
                p.n_rounds = pj.at("n_rounds").get<std::uint64_t>();
                p.seed = pj.at("seed").get<std::uint64_t>();
                p.l = pj.at("l").get<std::uint64_t>();
                p.mu = pj.at("mu").get<double>();
                p.ch = pj.contains("channel") ? parse_channel(pj.at("channel"), cfg.channel)
                                              : cfg.channel;
                if (pj.contains("L_km")) p.ch.L_km = pj.at("L_km").get<double>();
                cfg.mc_points.push_back(p);
            }
        }

        if (doc.contains("decoy")) {
            const json& dj = doc.at("decoy");
            if (dj.contains("instances")) cfg.decoy.instances = dj.at("instances").get<int>();
            if (dj.contains("d_values")) cfg.decoy.d_values = dj.at("d_values").get<std::vector<int>>();
            if (dj.contains("seed")) cfg.decoy.seed = dj.at("seed").get<std::uint64_t>();
        }

        if (cfg.mode == Mode::sweep) {
            if (cfg.grid.distances_km.empty() || cfg.grid.d_values.empty() ||
                cfg.grid.l_values.empty())
                throw ConfigError("sweep mode needs non-empty grid.distances_km, grid.d_values "
                                  "and grid.l_values");
            if (!cfg.plot_path.empty() && cfg.csv_path.empty())
                throw ConfigError("plot_path requires csv_path");
        }
        if (cfg.mode == Mode::decoy_validate) {
            if (cfg.decoy.instances < 1) throw ConfigError("decoy.instances must be >= 1");
            if (cfg.decoy.d_values.empty()) throw ConfigError("decoy.d_values must be non-empty");
        }
        if (cfg.mode == Mode::mc_validate && cfg.mc_points.empty())
            throw ConfigError("mc mode needs at least one point");
        return cfg;
    } catch (const json::exception& e) {
        throw ConfigError("config parse failed: " + std::string(e.what()));
    }
}

void write_sweep_csv(std::ostream& os, const std::vector<KeyRatePoint>& points) {
    os << "distance_km,D,l,mu_opt,key_rate,plob,p,r_p,r_s,q11,E_z,e_phase,F11\n";
    for (const auto& pt : points) {
        const KeyRateDiagnostics& dg = pt.diag;
        os << fmt_double(require_finite(pt.L_km, "distance_km")) << ',' << pt.d << ',' << pt.l
           << ',' << fmt_double(require_finite(pt.mu, "mu_opt")) << ','
           << fmt_double(require_finite(pt.rate, "key_rate")) << ','
           << fmt_double(require_finite(pt.plob, "plob")) << ','
           << fmt_double(require_finite(dg.p, "p")) << ','
           << fmt_double(require_finite(dg.r_p, "r_p")) << ','
           << fmt_double(require_finite(dg.r_s, "r_s")) << ','
           << fmt_double(require_finite(dg.q11, "q11")) << ','
           << fmt_double(require_finite(dg.e_z, "E_z")) << ','
           << fmt_double(require_finite(dg.e_phase, "e_phase")) << ','
           << fmt_double(require_finite(dg.f11, "F11")) << '\n';
    }
}

int emit_plot_script(const std::string& csv_path, const std::string& plot_path) {
    std::ofstream out(plot_path);
    if (!out) return kExitIo;
    std::string png = plot_path;
    const auto dot = png.find_last_of('.');
    if (dot != std::string::npos) png.resize(dot);
    png += ".png";

    out << "#!/usr/bin/env python3\n"
           "# Renders key-rate curves from the CSV next to this script.\n"
           "import csv\n"
           "from collections import defaultdict\n"
           "import matplotlib\n"
           "matplotlib.use(\"Agg\")\n"
           "import matplotlib.pyplot as plt\n"
           "\n"
           "CSV_PATH = "
        << json(csv_path).dump()
        << "\n"
           "OUT_PATH = "
        << json(png).dump()
        << "\n"
           "\n"
           "series = defaultdict(list)\n"
           "benchmark = {}\n"
           "with open(CSV_PATH) as f:\n"
           "    for row in csv.DictReader(f):\n"
           "        L = float(row[\"distance_km\"])\n"
           "        series[(int(row[\"D\"]), int(row[\"l\"]))].append((L, float(row[\"key_rate\"])))\n"
           "        benchmark[L] = float(row[\"plob\"])\n"
           "\n"
           "fig, ax = plt.subplots(figsize=(7, 5))\n"
           "for (d, l), pts in sorted(series.items()):\n"
           "    pts.sort()\n"
           "    xs = [x for x, y in pts if y > 0]\n"
           "    ys = [y for x, y in pts if y > 0]\n"
           "    name = \"continuous\" if d == 0 else f\"D={d}\"\n"
           "    ax.plot(xs, ys, label=f\"{name}, l={l:g}\")\n"
           "if benchmark:\n"
           "    xs = sorted(benchmark)\n"
           "    ax.plot(xs, [benchmark[x] for x in xs], \"k-.\", label=\"PLOB\")\n"
           "ax.set_yscale(\"log\")\n"
           "ax.set_xlabel(\"distance (km)\")\n"
           "ax.set_ylabel(\"key rate per pulse-pair position\")\n"
           "ax.legend()\n"
           "fig.tight_layout()\n"
           "fig.savefig(OUT_PATH, dpi=160)\n"
           "print(f\"wrote {OUT_PATH}\")\n";
    return out.good() ? kExitOk : kExitIo;
}

McValidation run_mc_validation(const std::vector<McConfig>& points) {
    McValidation result;
    result.pass = true;
    json report = json::array();
    for (const auto& p : points) {
        const McStats stats = simulate(p);
        const LinkBudget lb = link_budget(p.ch);
        const double click = mean_click_prob(p.mu, lb, p.ch);
        const double r_p = pairing_rate(click, p.l);
        const double r_s = signal_pair_ratio(p.mu, lb, p.ch);
        const double e_z = qber_z(p.mu, lb, p.ch);
        const ZScoreReport z = compare_with_analytic(stats, r_p, r_s, e_z);
        result.reports.push_back(z);
        result.pass = result.pass && !z.flagged;
        report.push_back({
            {"point",
             {{"n_rounds", p.n_rounds},
              {"seed", p.seed},
              {"l", p.l},
              {"mu", p.mu},
              {"L_km", p.ch.L_km},
              {"p_d", p.ch.p_d}}},
            {"analytic", {{"r_p", r_p}, {"r_s", r_s}, {"E_z", e_z}}},
            {"mc", json::parse(mc_stats_json(stats))},
            {"z_scores", {{"r_p", z.z_pairing}, {"r_s", z.z_signal}, {"E_z", z.z_error}}},
            {"flagged", z.flagged},
        });
    }
    result.report = {{"mode", "mc_validate"}, {"pass", result.pass}, {"points", report}};
    return result;
}

namespace {

GainTable forward_gains(const DecoyConfig& dc, const std::vector<std::vector<double>>& y,
                        const std::vector<std::vector<double>>& ye) {
    const int d = dc.phases.d;
    GainTable gains;
    for (double a : dc.summed_intensities()) {
        for (double b : dc.summed_intensities()) {
            double q = 0.0, qe = 0.0;
            for (int ka = 0; ka < d; ++ka) {
                const double pa = pseudo_photon_prob(a, ka, dc.phases);
                for (int kb = 0; kb < d; ++kb) {
                    const double w = pa * pseudo_photon_prob(b, kb, dc.phases);
                    q += w * y[ka][kb];
                    qe += w * ye[ka][kb];
                }
            }
            gains.set(a, b, std::min(q, 1.0), std::min(qe, q));
        }
    }
    return gains;
}

} // namespace

DecoyValidation run_decoy_validation(const DecoySpec& spec) {
    DecoyValidation result;
    result.instances = spec.instances;
    std::uint64_t rng = spec.seed;
    json inst_report = json::array();

    for (int i = 0; i < spec.instances; ++i) {
        const int d = spec.d_values[i % spec.d_values.size()];
        const double mu = 0.1 + 0.4 * splitmix64_unit(rng);
        const double nu = mu * (0.1 + 0.8 * splitmix64_unit(rng));
        DecoyConfig dc{mu, nu, 1.0 / 3, 1.0 / 3, 1.0 / 3, PhaseConfig(d)};

        std::vector<std::vector<double>> y(d, std::vector<double>(d));
        std::vector<std::vector<double>> ye(d, std::vector<double>(d));
        for (int ka = 0; ka < d; ++ka) {
            for (int kb = 0; kb < d; ++kb) {
                y[ka][kb] = splitmix64_unit(rng);
                ye[ka][kb] = y[ka][kb] * splitmix64_unit(rng);
            }
        }

        const GainTable gains = forward_gains(dc, y, ye);
        const PairBounds bounds = estimate_pair_bounds(gains, dc, 1, 1);
        const bool ok = bounds.y.lo - 1e-9 <= y[1][1] && y[1][1] <= bounds.y.hi + 1e-9 &&
                        bounds.ye.lo - 1e-9 <= ye[1][1] && ye[1][1] <= bounds.ye.hi + 1e-9;
        if (ok) ++result.contained;
        inst_report.push_back({{"D", d},
                               {"mu", mu},
                               {"nu", nu},
                               {"truth_y", y[1][1]},
                               {"truth_ye", ye[1][1]},
                               {"y_lo", bounds.y.lo},
                               {"y_hi", bounds.y.hi},
                               {"ye_lo", bounds.ye.lo},
                               {"ye_hi", bounds.ye.hi},
                               {"contained", ok}});
    }

    // Slack-free recovery: with the deviation forced to zero and six
    // well-separated intensity rows on four unknowns, both stages pin the
    // truth exactly (up to solver tolerance).
    {
        DecoyConfig dc{0.45, 0.2, 1.0 / 3, 1.0 / 3, 1.0 / 3, PhaseConfig(4)};
        dc.epsilon_override = 0.0;
        const int d = 4;
        std::vector<std::vector<double>> y(d, std::vector<double>(d));
        std::vector<std::vector<double>> ye(d, std::vector<double>(d));
        for (int ka = 0; ka < d; ++ka) {
            for (int kb = 0; kb < d; ++kb) {
                y[ka][kb] = splitmix64_unit(rng);
                ye[ka][kb] = y[ka][kb] * splitmix64_unit(rng);
            }
        }
        const GainTable gains = forward_gains(dc, y, ye);
        for (const auto& [ka, kb] : {std::pair{0, 0}, std::pair{1, 1}, std::pair{3, 2}}) {
            const PairBounds b = estimate_pair_bounds(gains, dc, ka, kb);
            for (double err : {std::fabs(b.y.lo - y[ka][kb]), std::fabs(b.y.hi - y[ka][kb]),
                               std::fabs(b.ye.lo - ye[ka][kb]), std::fabs(b.ye.hi - ye[ka][kb])})
                result.max_square_error = std::max(result.max_square_error, err);
        }
    }

    result.pass = result.contained == result.instances && result.max_square_error < 1e-7;
    result.report = {{"mode", "decoy_validate"},
                     {"pass", result.pass},
                     {"instances", result.instances},
                     {"contained", result.contained},
                     {"max_square_recovery_error", result.max_square_error},
                     {"details", inst_report}};
    return result;
}

namespace {

int write_text_output(const std::string& path, const std::string& text, std::ostream& fallback) {
    if (path.empty()) {
        fallback << text;
        return kExitOk;
    }
    std::ofstream out(path);
    if (!out) return kExitIo;
    out << text;
    return out.good() ? kExitOk : kExitIo;
}

int run_impl(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    switch (cfg.mode) {
        case Mode::sweep: {
            const SweepResult res = sweep(cfg.grid, cfg.channel, cfg.workers);
            std::ostringstream csv;
            write_sweep_csv(csv, res.points);
            const int io = write_text_output(cfg.csv_path, csv.str(), out);
            if (io != kExitOk) {
                err << "error: cannot write " << cfg.csv_path << '\n';
                return io;
            }
            if (!cfg.plot_path.empty()) {
                const int rc = emit_plot_script(cfg.csv_path, cfg.plot_path);
                if (rc != kExitOk) {
                    err << "error: cannot write " << cfg.plot_path << '\n';
                    return rc;
                }
            }
            for (const auto& f : res.failures)
                err << "sweep point failed (D=" << f.d << ", l=" << f.l << ", L=" << f.L_km
                    << " km): " << f.message << '\n';
            return res.failures.empty() ? kExitOk : kExitNumeric;
        }
        case Mode::mc_validate: {
            const McValidation v = run_mc_validation(cfg.mc_points);
            const int io = write_text_output(cfg.csv_path, v.report.dump(2) + "\n", out);
            if (io != kExitOk) return io;
            if (!v.pass) err << "mc_validate: z-score check failed (|z| > 3)\n";
            return v.pass ? kExitOk : kExitNumeric;
        }
        case Mode::decoy_validate: {
            const DecoyValidation v = run_decoy_validation(cfg.decoy);
            const int io = write_text_output(cfg.csv_path, v.report.dump(2) + "\n", out);
            if (io != kExitOk) return io;
            if (!v.pass)
                err << "decoy_validate: " << v.contained << "/" << v.instances
                    << " contained, square recovery error " << v.max_square_error << '\n';
            return v.pass ? kExitOk : kExitNumeric;
        }
    }
    return kExitConfig;
}

} // namespace

int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    try {
        return run_impl(cfg, out, err);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const IoError& e) {
        err << "io error: " << e.what() << '\n';
        return kExitIo;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitNumeric;
    }
}

int run_file(const std::string& config_path, const std::vector<std::string>& overrides,
             const std::optional<Mode>& mode_flag, int workers, std::ostream& out,
             std::ostream& err) {
    try {
        json doc = load_config_file(config_path);
        for (const auto& kv : overrides) apply_override(doc, kv);
        RunConfig cfg = parse_config(doc);
        if (mode_flag) cfg.mode = *mode_flag;
        cfg.workers = workers;
        return run(cfg, out, err);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const IoError& e) {
        err << "io error: " << e.what() << '\n';
        return kExitIo;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitNumeric;
    }
}

} // namespace mpqkd::cli
