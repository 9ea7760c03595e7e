#pragma once

// Run configuration: a flat set of known key=value settings with defaults.
// Sources are applied in order (defaults, $CSL_CONFIG, --config, flags); the
// resolved values are what every output file embeds as its provenance header,
// so a file's own header can be fed back as --config to regenerate it.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "csl/errors.hpp"
#include "csl/io.hpp"

namespace csl::config {

inline constexpr const char* kEnvVar = "CSL_CONFIG";

/// Invalid configuration input; maps to the usage exit code.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class ValueType { real, integer, text, real_list, choice };

struct KeyInfo {
    std::string name;
    ValueType type;
    std::string default_value;
    std::vector<std::string> choices{};
    std::string help{};
};

// clang-format off
inline const std::vector<KeyInfo>& known_keys() {
    static const std::vector<KeyInfo> keys{
        {"n_nucleons", ValueType::integer, "87", {}, "nucleon count N"},
        {"mass_kg", ValueType::real, "1.44e-25", {}, "atomic mass m"},
        {"v1_m_s", ValueType::real, "0", {}, "lower-arm velocity"},
        {"v2_m_s", ValueType::real, "0.011", {}, "upper-arm velocity"},
        {"g_m_s2", ValueType::real, "9.812", {}, "gravitational acceleration"},
        {"sigma_m", ValueType::real, "1e-06", {}, "initial wave-packet width"},
        {"safety", ValueType::real, "0.1", {}, "overlap safety fraction"},
        {"seed", ValueType::integer, "1", {}, "random seed"},
        {"format", ValueType::choice, "json", {"json", "csv"}, "report format"},
        {"units", ValueType::choice, "si", {"si", "paper"}, "report display units"},
        {"lambda_s", ValueType::real, "5.6e-05", {}, "collapse rate lambda"},
        {"r_c_m", ValueType::real, "1e-07", {}, "correlation length r_C"},
        {"c0", ValueType::real, "1", {}, "T-independent contrast factor"},
        {"p_mean", ValueType::real, "0.5", {}, "mean population"},
        {"sigma_p", ValueType::real, "0.01", {}, "population read noise"},
        {"t_min_s", ValueType::real, "0.011", {}, "first pulse separation"},
        {"t_max_s", ValueType::real, "0.26", {}, "last pulse separation"},
        {"t_count", ValueType::integer, "23", {}, "number of pulse separations"},
        {"t_list_s", ValueType::real_list, "", {}, "explicit pulse separations (overrides t_min/t_max/t_count)"},
        {"points", ValueType::integer, "40", {}, "points per fringe"},
        {"periods", ValueType::real, "2", {}, "fringe periods per scan"},
        {"t_sep_s", ValueType::real, "0.26", {}, "pulse separation T for Monte Carlo"},
        {"n_samples", ValueType::integer, "100000", {}, "Monte Carlo samples"},
        {"dt_s", ValueType::real, "0", {}, "Monte Carlo time step (0: T/10^4)"},
        {"dt_halving", ValueType::choice, "on", {"on", "off"}, "also run at dt/2 on the same noise path"},
        {"time_s", ValueType::real, "0.52", {}, "evolution time for wavepacket-report"},
        {"rc_min_m", ValueType::real, "1e-09", {}, "smallest r_C of the exclusion grid"},
        {"rc_max_m", ValueType::real, "0.01", {}, "largest r_C of the exclusion grid"},
        {"rc_count", ValueType::integer, "181", {}, "exclusion grid size (log spaced)"},
        {"policy", ValueType::choice, "fit-value", {"fit-value", "fit-plus-k-sigma"}, "lambda bound policy"},
        {"k_sigma", ValueType::real, "2", {}, "k for the fit-plus-k-sigma policy"},
        {"flat_bound_s", ValueType::real, "0", {}, "use this r_C-independent lambda bound instead of a contrast file (0: off)"},
        {"fit_r_c_m", ValueType::real, "0", {}, "fit-contrast: r_C for the r_C-aware fit (0: small-r_C law)"},
        {"contrast_file", ValueType::text, "", {}, "exclusion: contrast series to bound lambda from"},
        {"recombination_time_s", ValueType::real, "0", {}, "exclusion: 2T for the overlap bound (0: twice the largest T)"},
    };
    return keys;
}
// clang-format on

/// Keys written by commands as results rather than settings; ignored when a
/// data file header is loaded back as a configuration.
inline bool is_derived_key(std::string_view key) {
    static const std::vector<std::string_view> derived{
        "kind", "command", "t_s", "t_index", "clamp_count", "crossover_rc_m", "overlap_slope_m2_s", "two_t_s",
        "block_size", "blocks", "n_files"};
    return std::find(derived.begin(), derived.end(), key) != derived.end();
}

inline const KeyInfo* find_key(std::string_view name) {
    for (const auto& k : known_keys())
        if (k.name == name) return &k;
    return nullptr;
}

class RunConfig {
public:
    RunConfig() {
        for (const auto& k : known_keys()) values_[k.name] = k.default_value;
    }

    /// Validates and stores one value; `where` prefixes error messages.
    void set(const std::string& key, const std::string& value, const std::string& where = "") {
        const KeyInfo* info = find_key(key);
        if (!info) throw ConfigError(where + "unknown key '" + key + "'");
        check_value(*info, value, where);
        values_[key] = value;
    }

    /// Reads key=value lines. Plain config files may use '#' for comments;
    /// a data file (first line starts with '#') contributes only its header.
    void load(std::istream& is, const std::string& source) {
        std::string line;
        int lineno = 0;
        bool header_mode = false;
        while (std::getline(is, line)) {
            ++lineno;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            const std::string where = source + ":" + std::to_string(lineno) + ": ";
            std::string_view body(line);
            while (!body.empty() && (body.front() == ' ' || body.front() == '\t')) body.remove_prefix(1);
            if (body.empty()) continue;
            if (lineno == 1 && body.front() == '#') header_mode = true;
            if (body.front() == '#') {
                body.remove_prefix(1);
                while (!body.empty() && body.front() == ' ') body.remove_prefix(1);
                if (body.find('=') == std::string_view::npos) continue;  // comment
            } else if (header_mode && body.find('=') == std::string_view::npos) {
                break;  // column line of a data file
            }
            const auto eq = body.find('=');
            if (eq == std::string_view::npos || eq == 0) throw ConfigError(where + "expected key=value");
            std::string key(body.substr(0, eq));
            while (!key.empty() && key.back() == ' ') key.pop_back();
            std::string value(body.substr(eq + 1));
            while (!value.empty() && value.front() == ' ') value.erase(value.begin());
            while (!value.empty() && value.back() == ' ') value.pop_back();
            if (is_derived_key(key)) continue;
            set(key, value, where);
        }
    }

    void load_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open config file '" + path + "'");
        load(in, path);
    }

    const std::string& text(const std::string& key) const {
        auto it = values_.find(key);
        if (it == values_.end()) throw ConfigError("unknown key '" + key + "'");
        return it->second;
    }

    double real(const std::string& key) const { return *io::try_parse_number(text(key)); }
    std::int64_t integer(const std::string& key) const { return std::stoll(text(key)); }
    std::uint64_t unsigned_integer(const std::string& key) const { return std::stoull(text(key)); }
    std::vector<double> real_list(const std::string& key) const {
        std::vector<double> out;
        const auto& t = text(key);
        if (t.empty()) return out;
        for (const auto& cell : io::split(t, ',')) out.push_back(*io::try_parse_number(cell));
        return out;
    }

    /// Header lines for `keys`, in the given order.
    io::Header provenance(const std::vector<std::string>& keys) const {
        io::Header h;
        for (const auto& k : keys) h.emplace_back(k, text(k));
        return h;
    }

private:
    static void check_value(const KeyInfo& info, const std::string& value, const std::string& where) {
        auto bad = [&](const std::string& why) {
            return ConfigError(where + "invalid value '" + value + "' for " + info.name + ": " + why);
        };
        switch (info.type) {
            case ValueType::real: {
                const auto v = io::try_parse_number(value);
                if (!v || !std::isfinite(*v)) throw bad("expected a finite number");
                break;
            }
            case ValueType::integer: {
                if (value.empty() || value.find_first_not_of("0123456789") != std::string::npos)
                    throw bad("expected a non-negative integer");
                break;
            }
            case ValueType::real_list: {
                if (value.empty()) break;
                for (const auto& cell : io::split(value, ',')) {
                    const auto v = io::try_parse_number(cell);
                    if (!v || !std::isfinite(*v)) throw bad("expected comma-separated numbers");
                }
                break;
            }
            case ValueType::choice: {
                if (std::find(info.choices.begin(), info.choices.end(), value) == info.choices.end())
                    throw bad("expected one of the listed choices");
                break;
            }
            case ValueType::text:
                break;
        }
    }

    std::map<std::string, std::string> values_;
};

}  // namespace csl::config
