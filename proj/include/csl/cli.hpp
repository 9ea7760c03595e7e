#pragma once

// Command-line front end. run() is the whole program minus main(), so tests
// drive it in-process with captured streams.
//
// exit codes: 0 ok, 1 usage/config, 2 data/schema, 3 non-convergence
// (simulate-mc also returns 3 when a z-score exceeds 4).

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "csl/config.hpp"
#include "csl/errors.hpp"
#include "csl/inference.hpp"
#include "csl/io.hpp"
#include "csl/phase.hpp"
#include "csl/stochastic.hpp"
#include "csl/types.hpp"
#include "csl/wavepacket.hpp"

namespace csl::cli {

using json = nlohmann::ordered_json;

enum ExitCode : int { ok = 0, usage_error = 1, data_error = 2, convergence_error = 3 };

inline constexpr double kMcZLimit = 4.0;

namespace detail {

inline const std::vector<std::string> kSpeciesKeys{"n_nucleons", "mass_kg", "v1_m_s", "v2_m_s", "g_m_s2"};

inline std::vector<std::string> keys_for(const std::string& command) {
    std::vector<std::string> extra;
    if (command == "simulate-fringe") {
        extra = {"seed", "lambda_s", "r_c_m", "c0", "p_mean", "sigma_p", "t_min_s", "t_max_s", "t_count", "t_list_s",
                 "points", "periods"};
    } else if (command == "fit-fringe") {
        extra = {"format"};
    } else if (command == "fit-contrast") {
        extra = {"fit_r_c_m", "policy", "k_sigma", "format"};
    } else if (command == "exclusion") {
        extra = {"contrast_file", "flat_bound_s", "t_max_s", "recombination_time_s", "sigma_m", "safety", "policy",
                 "k_sigma", "rc_min_m", "rc_max_m", "rc_count"};
    } else if (command == "simulate-mc") {
        extra = {"seed", "lambda_s", "r_c_m", "t_sep_s", "n_samples", "dt_s", "dt_halving", "format"};
    } else if (command == "wavepacket-report") {
        extra = {"lambda_s", "r_c_m", "sigma_m", "safety", "time_s", "units", "format"};
    }
    std::vector<std::string> keys = kSpeciesKeys;
    keys.insert(keys.end(), extra.begin(), extra.end());
    return keys;
}

inline std::string flag_name(const std::string& key) {
    std::string f = key;
    std::replace(f.begin(), f.end(), '_', '-');
    return "--" + f;
}

/// Per-subcommand state: config flags and the optional --config path.
struct Command {
    CLI::App* app = nullptr;
    std::string name;
    std::vector<std::string> keys;
    std::vector<std::pair<std::string, std::string>> flag_values;  // key, value (only set ones matter)
    std::string config_path;
    unsigned threads = 1;

    void bind(CLI::App& parent, const std::string& command, const std::string& description) {
        name = command;
        app = parent.add_subcommand(command, description);
        keys = keys_for(command);
        app->add_option("--config", config_path, "key=value file or a data file whose header to reuse");
        flag_values.resize(keys.size());
        for (std::size_t i = 0; i < keys.size(); ++i) {
            const auto* info = config::find_key(keys[i]);
            flag_values[i].first = keys[i];
            auto* opt = app->add_option(flag_name(keys[i]), flag_values[i].second, info->help);
            if (!info->choices.empty()) opt->check(CLI::IsMember(info->choices));
        }
    }

    config::RunConfig resolve() const {
        config::RunConfig cfg;
        if (const char* env = std::getenv(config::kEnvVar); env && *env) cfg.load_file(env);
        if (!config_path.empty()) cfg.load_file(config_path);
        for (std::size_t i = 0; i < keys.size(); ++i) {
            if (app->count(flag_name(keys[i])) > 0) cfg.set(keys[i], flag_values[i].second, flag_name(keys[i]) + ": ");
        }
        return cfg;
    }

    io::Header provenance(const config::RunConfig& cfg, const std::string& kind) const {
        io::Header h;
        if (!kind.empty()) h.emplace_back("kind", kind);
        h.emplace_back("command", name);
        for (auto& kv : cfg.provenance(keys)) h.push_back(std::move(kv));
        return h;
    }
};

inline AtomSpecies species_from(const config::RunConfig& cfg) {
    AtomSpecies s{cfg.integer("n_nucleons"), cfg.real("mass_kg")};
    s.validate();
    return s;
}

inline ArmGeometry geometry_from(const config::RunConfig& cfg) {
    return {cfg.real("v1_m_s"), cfg.real("v2_m_s"), cfg.real("g_m_s2")};
}

inline inference::BoundPolicy policy_from(const config::RunConfig& cfg) {
    if (cfg.text("policy") == "fit-plus-k-sigma") return inference::BoundPolicy::fit_plus_k_sigma(cfg.real("k_sigma"));
    return inference::BoundPolicy::fit_value();
}

inline json provenance_json(const io::Header& h) {
    json j = json::object();
    for (const auto& [k, v] : h) j[k] = v;
    return j;
}

inline std::string cell(const json& v) {
    if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
    if (v.is_number()) return io::format_number(v.get<double>());
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_null()) return "nan";
    if (v.is_array()) {
        std::string s;
        for (const auto& e : v) s += (s.empty() ? "" : ";") + cell(e);
        return s;
    }
    return v.dump();
}

inline void flatten(const json& v, const std::string& prefix, std::vector<std::pair<std::string, std::string>>& out) {
    if (v.is_object()) {
        for (const auto& [k, e] : v.items()) flatten(e, prefix.empty() ? k : prefix + "." + k, out);
    } else {
        out.emplace_back(prefix, cell(v));
    }
}

/// Reports are {"provenance": {...}, "results": object or array of row objects}.
inline void write_report(std::ostream& os, const json& report, const std::string& format) {
    if (format == "json") {
        os << report.dump(2) << '\n';
        return;
    }
    for (const auto& [k, v] : report["provenance"].items()) os << "# " << k << '=' << v.get<std::string>() << '\n';
    const json& results = report["results"];
    if (results.is_array()) {
        if (results.empty()) return;
        std::vector<std::string> cols;
        for (const auto& [k, v] : results.front().items()) cols.push_back(k);
        for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
        os << '\n';
        for (const auto& row : results) {
            for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cell(row[cols[i]]);
            os << '\n';
        }
        return;
    }
    std::vector<std::pair<std::string, std::string>> flat;
    flatten(results, "", flat);
    os << "quantity,value\n";
    for (const auto& [k, v] : flat) os << k << ',' << v << '\n';
}

inline io::DataFile read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path + "'");
    return io::read_data_file(in, path);
}

inline void write_file(const std::string& path, const io::DataFile& f) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write '" + path + "'");
    io::write_data_file(out, f);
    if (!out) throw DataError("write failed for '" + path + "'");
}

inline void emit(const json& report, const std::string& format, const std::string& out_path, std::ostream& out) {
    if (out_path.empty()) {
        write_report(out, report, format);
        return;
    }
    std::ofstream f(out_path, std::ios::binary);
    if (!f) throw DataError("cannot write '" + out_path + "'");
    write_report(f, report, format);
}

inline double z_score(double diff, double se) {
    if (diff == 0.0) return 0.0;
    if (!(se > 0.0)) return std::copysign(std::numeric_limits<double>::infinity(), diff);
    return diff / se;
}

// -- subcommands ------------------------------------------------------------

inline std::vector<double> t_values(const config::RunConfig& cfg) {
    auto list = cfg.real_list("t_list_s");
    if (!list.empty()) return list;
    const auto count = cfg.integer("t_count");
    if (count < 1) throw config::ConfigError("t_count must be >= 1");
    const double lo = cfg.real("t_min_s");
    const double hi = cfg.real("t_max_s");
    if (count == 1) return {lo};
    std::vector<double> t(static_cast<std::size_t>(count));
    for (std::int64_t i = 0; i < count; ++i)
        t[static_cast<std::size_t>(i)] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
    t.back() = hi;
    return t;
}

inline int simulate_fringe(const Command& cmd, const std::string& out_dir, std::ostream& out, std::ostream& err) {
    const auto cfg = cmd.resolve();
    const auto species = species_from(cfg);
    const auto geometry = geometry_from(cfg);
    const auto ts = t_values(cfg);
    const inference::SynthTruth truth{cfg.real("lambda_s"), cfg.real("r_c_m"), cfg.real("c0"), cfg.real("p_mean")};
    const inference::SynthNoise noise{cfg.real("sigma_p"), cfg.unsigned_integer("seed")};
    if (noise.sigma_p < 0.0) throw config::ConfigError("sigma_p must be >= 0");
    const inference::SynthLayout layout{static_cast<int>(cfg.integer("points")), cfg.real("periods")};
    const auto result = inference::synth_fringes(truth, species, geometry, ts, noise, layout);

    std::filesystem::create_directories(out_dir);
    const int width = std::max<int>(2, static_cast<int>(std::to_string(ts.size() - 1).size()));
    json files = json::array();
    for (std::size_t i = 0; i < result.scans.size(); ++i) {
        auto header = cmd.provenance(cfg, "fringe");
        header.emplace_back("t_index", std::to_string(i));
        header.emplace_back("clamp_count", std::to_string(result.clamp_count));
        std::string index = std::to_string(i);
        index.insert(0, static_cast<std::size_t>(std::max<int>(0, width - static_cast<int>(index.size()))), '0');
        const auto path = (std::filesystem::path(out_dir) / ("fringe_" + index + ".csv")).string();
        write_file(path, io::make_fringe_file(std::move(header), result.scans[i]));
        files.push_back(path);
    }
    if (result.clamp_count > 0)
        err << "warning: " << result.clamp_count << " population values clamped to [0, 1]\n";
    out << json{{"command", "simulate-fringe"}, {"files", files}, {"clamp_count", result.clamp_count}}.dump(2) << '\n';
    return ok;
}

inline json fit_json(const std::string& file, const inference::FringeFit& f) {
    return json{{"file", file},
                {"t_s", f.t_sep},
                {"p_mean", f.p_mean},
                {"contrast", f.contrast},
                {"alpha0_rad_s2", f.alpha0},
                {"sigma_p_mean", f.sigma_p_mean},
                {"sigma_c", f.sigma_c},
                {"sigma_alpha0", f.sigma_alpha0},
                {"residual_rms", f.residual_rms},
                {"iterations", f.iterations},
                {"n_points", static_cast<std::int64_t>(f.n_points)}};
}

inline int fit_fringe(const Command& cmd, const std::vector<std::string>& files, const std::string& contrast_out,
                      const std::string& out_path, std::ostream& out, std::ostream& /*err*/) {
    const auto cfg = cmd.resolve();
    std::vector<inference::FringeFit> fits;
    json rows = json::array();
    for (const auto& path : files) {
        const auto scan = io::parse_fringe_file(read_file(path), path);
        try {
            fits.push_back(inference::fit_fringe(scan));
        } catch (const DataError& e) {
            throw DataError(path + ": " + e.what());
        } catch (const ConvergenceError& e) {
            throw ConvergenceError(path + ": " + e.what());
        }
        rows.push_back(fit_json(path, fits.back()));
    }
    auto header = cmd.provenance(cfg, "");
    header.emplace_back("n_files", std::to_string(files.size()));
    if (!contrast_out.empty()) {
        auto ch = header;
        ch.insert(ch.begin(), {"kind", "contrast"});
        write_file(contrast_out, io::make_contrast_file(std::move(ch), inference::contrast_series(fits)));
    }
    emit(json{{"provenance", provenance_json(header)}, {"results", rows}}, cfg.text("format"), out_path, out);
    return ok;
}

inline json decay_json(const inference::DecayFit& fit, const inference::LambdaBound& bound) {
    json warnings = json::array();
    for (const auto& w : fit.warnings) warnings.push_back(w);
    json excluded = json::array();
    for (auto i : fit.excluded) excluded.push_back(static_cast<std::int64_t>(i));
    return json{{"ln_c0", fit.ln_c0},
                {"c0", std::exp(fit.ln_c0)},
                {"lambda_fit_s", fit.lambda_fit},
                {"sigma_lambda_s", fit.sigma_lambda},
                {"cov_ln_c0_ln_c0", fit.covariance[0][0]},
                {"cov_ln_c0_lambda", fit.covariance[0][1]},
                {"cov_lambda_lambda", fit.covariance[1][1]},
                {"chi2", fit.chi2},
                {"used_points", static_cast<std::int64_t>(fit.used_points)},
                {"excluded", excluded},
                {"lambda_bound_s", bound.value},
                {"warnings", warnings}};
}

inline int fit_contrast(const Command& cmd, const std::string& file, const std::string& out_path, std::ostream& out,
                        std::ostream& err) {
    const auto cfg = cmd.resolve();
    const auto species = species_from(cfg);
    const auto series = io::parse_contrast_file(read_file(file), file);
    inference::validate_series(series);
    const double r_c = cfg.real("fit_r_c_m");
    if (r_c < 0.0) throw config::ConfigError("fit_r_c_m must be >= 0");
    const auto fit = r_c > 0.0 ? inference::fit_lambda_at_rc(series, r_c, species, geometry_from(cfg))
                               : inference::fit_contrast_decay(series, species);
    for (const auto& w : fit.warnings) err << "warning: " << w << '\n';
    const auto bound = inference::lambda_upper_bound(fit, policy_from(cfg));
    emit(json{{"provenance", provenance_json(cmd.provenance(cfg, ""))}, {"results", decay_json(fit, bound)}},
         cfg.text("format"), out_path, out);
    return ok;
}

inline int exclusion(const Command& cmd, const std::string& out_path, std::ostream& out, std::ostream& /*err*/) {
    const auto cfg = cmd.resolve();
    const auto species = species_from(cfg);
    const auto grid = inference::log_grid(cfg.real("rc_min_m"), cfg.real("rc_max_m"), static_cast<int>(cfg.integer("rc_count")));
    const double sigma = cfg.real("sigma_m");
    const double safety = cfg.real("safety");
    const double flat = cfg.real("flat_bound_s");
    const auto& contrast_file = cfg.text("contrast_file");
    if ((flat > 0.0) == !contrast_file.empty())
        throw config::ConfigError("exclusion: give exactly one of --contrast-file or --flat-bound-s");

    double two_t = cfg.real("recombination_time_s");
    inference::ExclusionCurve curve;
    if (flat > 0.0) {
        if (two_t <= 0.0) two_t = 2.0 * cfg.real("t_max_s");
        const double slope = wavepacket::overlap_bound(sigma, two_t, species, safety);
        curve = inference::exclusion_curve([flat](double) { return flat; }, slope, grid);
    } else {
        const auto series = io::parse_contrast_file(read_file(contrast_file), contrast_file);
        inference::validate_series(series);
        inference::ExclusionOptions opts{safety, policy_from(cfg), std::nullopt};
        if (two_t > 0.0) opts.two_t = two_t;
        curve = inference::exclusion_curve(series, species, geometry_from(cfg), sigma, grid, opts);
        if (two_t <= 0.0) {
            for (const auto& p : series.points) two_t = std::max(two_t, 2.0 * p.t_sep);
        }
    }
    auto header = cmd.provenance(cfg, "exclusion");
    header.emplace_back("two_t_s", io::format_number(two_t));
    const auto file = io::make_exclusion_file(std::move(header), curve);
    if (!out_path.empty()) write_file(out_path, file);
    else io::write_data_file(out, file);
    if (!out_path.empty()) {
        json summary{{"command", "exclusion"},
                     {"file", out_path},
                     {"rows", static_cast<std::int64_t>(curve.samples.size())},
                     {"overlap_slope_m2_s", curve.overlap_slope}};
        summary["crossover_rc_m"] = curve.crossover_rc ? json(*curve.crossover_rc) : json(nullptr);
        out << summary.dump(2) << '\n';
    }
    return ok;
}

inline json mc_json(const stochastic::MonteCarloSummary& s) {
    return json{{"phase_mean", s.phase.mean},
                {"phase_mean_std_error", s.phase.std_error},
                {"variance", s.phase.variance},
                {"variance_std_error", s.variance_std_error},
                {"excess_kurtosis", s.excess_kurtosis},
                {"contrast", s.contrast.mean},
                {"contrast_std_error", s.contrast.std_error},
                {"steps", s.steps},
                {"dt_s", s.dt},
                {"blocks", s.blocks}};
}

inline int simulate_mc(const Command& cmd, const std::string& out_path, std::ostream& out, std::ostream& err) {
    const auto cfg = cmd.resolve();
    const auto species = species_from(cfg);
    const CslParams csl{cfg.real("lambda_s"), cfg.real("r_c_m")};
    csl.validate();
    const auto ifo = InterferometerConfig::from_geometry(geometry_from(cfg), cfg.real("t_sep_s"));
    ifo.validate();
    const auto n = cfg.integer("n_samples");
    if (n < 100) throw config::ConfigError("n_samples must be >= 100");
    double dt = cfg.real("dt_s");
    if (dt <= 0.0) dt = ifo.t_sep / 1e4;
    const stochastic::NoiseModel noise{cfg.unsigned_integer("seed"), dt, 0};
    noise.validate(ifo.t_sep);
    err << "threads=" << cmd.threads << '\n';

    const double var_exact = phase_variance(csl, species, ifo);
    const double c_exact = contrast_from_variance(var_exact);
    const auto run = stochastic::run_monte_carlo(csl, species, ifo, n, noise, cmd.threads);

    json results;
    results["analytic_variance"] = var_exact;
    results["analytic_contrast"] = c_exact;
    results["separation_parameter_u"] = separation_parameter(csl, ifo);
    results["mc"] = mc_json(run);
    const double z_var = z_score(run.phase.variance - var_exact, run.variance_std_error);
    const double z_c = z_score(run.contrast.mean - c_exact, run.contrast.std_error);
    const double z_mean = z_score(run.phase.mean, run.phase.std_error);
    results["z_variance"] = z_var;
    results["z_contrast"] = z_c;
    results["z_mean"] = z_mean;
    double worst = std::max({std::abs(z_var), std::abs(z_c), std::abs(z_mean)});
    if (cfg.text("dt_halving") == "on") {
        const auto half = stochastic::run_monte_carlo(csl, species, ifo, n, noise.halved(), cmd.threads);
        json h = mc_json(half);
        const double z_half = z_score(half.phase.variance - var_exact, half.variance_std_error);
        const double shift = z_score(half.phase.variance - run.phase.variance, run.variance_std_error);
        h["z_variance"] = z_half;
        h["variance_shift_in_std_errors"] = shift;
        h["shift_within_one_std_error"] = std::abs(shift) <= 1.0;
        results["dt_halved"] = h;
        worst = std::max(worst, std::abs(z_half));
    }
    results["max_abs_z"] = worst;
    results["pass"] = worst <= kMcZLimit;
    auto header = cmd.provenance(cfg, "");
    header.emplace_back("block_size", std::to_string(stochastic::kBlockSize));
    emit(json{{"provenance", provenance_json(header)}, {"results", results}}, cfg.text("format"), out_path, out);
    if (worst > kMcZLimit) {
        err << "mc-validate: |z| = " << worst << " exceeds " << kMcZLimit << '\n';
        return convergence_error;
    }
    return ok;
}

inline int wavepacket_report(const Command& cmd, const std::string& out_path, std::ostream& out, std::ostream& /*err*/) {
    const auto cfg = cmd.resolve();
    const auto species = species_from(cfg);
    const CslParams csl{cfg.real("lambda_s"), cfg.real("r_c_m")};
    csl.validate();
    const double sigma = cfg.real("sigma_m");
    const double t = cfg.real("time_s");
    if (!(sigma > 0.0)) throw config::ConfigError("sigma_m must be > 0");
    if (!(t >= 0.0)) throw config::ConfigError("time_s must be >= 0");
    const auto rep = wavepacket::spread_report(csl, species, sigma, t);
    json results{{"sigma_m", sigma},
                 {"time_s", t},
                 {"spreading_ratio", wavepacket::spreading_ratio(sigma, t, species)},
                 {"sigma_t_magnitude_m", rep.sigma_t_mag},
                 {"ell_t_m", rep.ell_t},
                 {"csl_position_variance_m2", rep.csl_variance},
                 {"total_variance_m2", rep.total_variance},
                 {"heating_energy_j", wavepacket::heating_energy(csl, species, t)}};
    if (t > 0.0) {
        results["overlap_bound_m2_s"] = wavepacket::overlap_bound(sigma, t, species, cfg.real("safety"));
    } else {
        results["overlap_bound_m2_s"] = nullptr;
    }
    if (cfg.text("units") == "paper") {
        results["display"] = json{{"time_ms", t * 1e3},
                                  {"sigma_um", sigma * 1e6},
                                  {"ell_t_um", rep.ell_t * 1e6},
                                  {"ell_t_mm", rep.ell_t * 1e3},
                                  {"csl_rms_um", std::sqrt(rep.csl_variance) * 1e6},
                                  {"velocity_split_mm_s", std::abs(cfg.real("v2_m_s") - cfg.real("v1_m_s")) * 1e3}};
    }
    emit(json{{"provenance", provenance_json(cmd.provenance(cfg, ""))}, {"results", results}}, cfg.text("format"),
         out_path, out);
    return ok;
}

}  // namespace detail

/// Maps an exception escaping a subcommand to its exit code, with a message on `err`.
inline int exit_code_for(std::exception_ptr e, std::ostream& err) {
    try {
        std::rethrow_exception(e);
    } catch (const config::ConfigError& x) {
        err << "config error: " << x.what() << '\n';
        return usage_error;
    } catch (const std::invalid_argument& x) {
        err << "invalid argument: " << x.what() << '\n';
        return usage_error;
    } catch (const RegimeError& x) {
        err << "invalid argument: " << x.what() << '\n';
        return usage_error;
    } catch (const DataError& x) {
        err << "data error: " << x.what() << '\n';
        return data_error;
    } catch (const std::filesystem::filesystem_error& x) {
        err << "i/o error: " << x.what() << '\n';
        return data_error;
    } catch (const ConvergenceError& x) {
        err << "no convergence: " << x.what() << '\n';
        return convergence_error;
    } catch (const std::exception& x) {
        err << "error: " << x.what() << '\n';
        return data_error;
    }
}

/// Runs the command line `args` (without the program name).
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"CSL atom-interferometer simulation and inference", "csl"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "list every subcommand's options");

    detail::Command sim_fringe, fit_fringe, fit_contrast, excl, sim_mc, wp;
    std::string out_dir, out_path, contrast_out, contrast_in;
    std::vector<std::string> fringe_files;

    sim_fringe.bind(app, "simulate-fringe", "write one synthetic fringe file per pulse separation");
    sim_fringe.app->add_option("--out-dir", out_dir, "output directory")->required();
    sim_fringe.app->add_option("--threads", sim_fringe.threads, "worker count (does not change results)");

    fit_fringe.bind(app, "fit-fringe", "fit P_mean, C and alpha0 to fringe files");
    fit_fringe.app->add_option("files", fringe_files, "fringe files")->required();
    fit_fringe.app->add_option("--contrast-out", contrast_out, "also write the contrast series here");
    fit_fringe.app->add_option("--out", out_path, "report path (default stdout)");

    fit_contrast.bind(app, "fit-contrast", "fit lambda to a contrast series");
    fit_contrast.app->add_option("file", contrast_in, "contrast file")->required();
    fit_contrast.app->add_option("--out", out_path, "report path (default stdout)");

    excl.bind(app, "exclusion", "exclusion curve in the (r_C, lambda) plane");
    excl.app->add_option("--out", out_path, "exclusion file path (default stdout)");

    sim_mc.bind(app, "simulate-mc", "Monte Carlo phase variance and contrast against the closed form");
    sim_mc.app->alias("mc-validate");
    sim_mc.app->add_option("--threads", sim_mc.threads, "worker count (does not change results)")
        ->check(CLI::Range(1u, 1024u));
    sim_mc.app->add_option("--out", out_path, "report path (default stdout)");

    wp.bind(app, "wavepacket-report", "wave-packet spread, CSL diffusion and the overlap bound");
    wp.app->add_option("--out", out_path, "report path (default stdout)");

    std::vector<std::string> argv(args.rbegin(), args.rend());
    try {
        app.parse(argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? ok : usage_error;
    }

    try {
        if (*sim_fringe.app) return detail::simulate_fringe(sim_fringe, out_dir, out, err);
        if (*fit_fringe.app) return detail::fit_fringe(fit_fringe, fringe_files, contrast_out, out_path, out, err);
        if (*fit_contrast.app) return detail::fit_contrast(fit_contrast, contrast_in, out_path, out, err);
        if (*excl.app) return detail::exclusion(excl, out_path, out, err);
        if (*sim_mc.app) return detail::simulate_mc(sim_mc, out_path, out, err);
        if (*wp.app) return detail::wavepacket_report(wp, out_path, out, err);
    } catch (...) {
        return exit_code_for(std::current_exception(), err);
    }
    return usage_error;
}

}  // namespace csl::cli
