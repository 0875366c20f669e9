#pragma once

// INI-style configuration: [section] headers, key = value lines, '#'/';'
// comments, comma-separated lists. Dotted section names ([set.window]) are
// plain section names; no nesting semantics beyond the dot in the key.
// Errors carry file:line context.

#include <cctype>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "rldp/extended.hpp"
#include "rldp/laws.hpp"
#include "rldp/sets.hpp"
#include "rldp/vec.hpp"

namespace rldp {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

} // namespace detail

class Config {
public:
    static Config parse_string(const std::string& text, const std::string& origin = "<string>") {
        Config cfg;
        std::istringstream in(text);
        std::string line, section;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            std::string t = detail::trim(line);
            if (t.empty() || t[0] == '#' || t[0] == ';') continue;
            if (t.front() == '[') {
                if (t.back() != ']')
                    throw ConfigError(origin + ":" + std::to_string(lineno) +
                                      ": unterminated section header: " + t);
                section = detail::trim(t.substr(1, t.size() - 2));
                if (section.empty())
                    throw ConfigError(origin + ":" + std::to_string(lineno) +
                                      ": empty section name");
                cfg.sections_[section]; // record even if empty
                continue;
            }
            auto eq = t.find('=');
            if (eq == std::string::npos)
                throw ConfigError(origin + ":" + std::to_string(lineno) +
                                  ": expected 'key = value', got: " + t);
            std::string key = detail::trim(t.substr(0, eq));
            std::string val = detail::trim(t.substr(eq + 1));
            if (key.empty())
                throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
            cfg.sections_[section][key] = val;
        }
        return cfg;
    }

    static Config parse_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open config file: " + path);
        std::ostringstream ss;
        ss << in.rdbuf();
        return parse_string(ss.str(), path);
    }

    bool has_section(const std::string& section) const {
        return sections_.count(section) != 0;
    }
    bool has(const std::string& section, const std::string& key) const {
        auto it = sections_.find(section);
        return it != sections_.end() && it->second.count(key) != 0;
    }

    std::string get(const std::string& section, const std::string& key) const {
        auto it = sections_.find(section);
        if (it == sections_.end() || !it->second.count(key))
            throw ConfigError("missing config key: [" + section + "] " + key);
        return it->second.at(key);
    }
    std::string get_or(const std::string& section, const std::string& key,
                       const std::string& fallback) const {
        return has(section, key) ? get(section, key) : fallback;
    }

    double get_real(const std::string& section, const std::string& key) const {
        return to_real(section, key, get(section, key));
    }
    double get_real_or(const std::string& section, const std::string& key,
                       double fallback) const {
        return has(section, key) ? get_real(section, key) : fallback;
    }

    long long get_int(const std::string& section, const std::string& key) const {
        const std::string v = get(section, key);
        try {
            std::size_t pos = 0;
            long long r = std::stoll(v, &pos);
            if (pos != v.size()) throw std::invalid_argument(v);
            return r;
        } catch (const std::exception&) {
            throw ConfigError("config key [" + section + "] " + key +
                              ": expected an integer, got '" + v + "'");
        }
    }
    long long get_int_or(const std::string& section, const std::string& key,
                         long long fallback) const {
        return has(section, key) ? get_int(section, key) : fallback;
    }

    bool get_bool(const std::string& section, const std::string& key) const {
        std::string v = get(section, key);
        if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
        if (v == "false" || v == "0" || v == "no" || v == "off") return false;
        throw ConfigError("config key [" + section + "] " + key +
                          ": expected a boolean, got '" + v + "'");
    }
    bool get_bool_or(const std::string& section, const std::string& key, bool fallback) const {
        return has(section, key) ? get_bool(section, key) : fallback;
    }

    std::vector<double> get_list(const std::string& section, const std::string& key) const {
        const std::string v = get(section, key);
        std::vector<double> out;
        std::string item;
        std::istringstream in(v);
        while (std::getline(in, item, ',')) {
            std::string t = detail::trim(item);
            if (t.empty())
                throw ConfigError("config key [" + section + "] " + key +
                                  ": empty list element in '" + v + "'");
            out.push_back(to_real(section, key, t));
        }
        if (out.empty())
            throw ConfigError("config key [" + section + "] " + key + ": empty list");
        return out;
    }
    std::vector<double> get_list_or(const std::string& section, const std::string& key,
                                    std::vector<double> fallback) const {
        return has(section, key) ? get_list(section, key) : std::move(fallback);
    }

    void set(const std::string& section, const std::string& key, const std::string& value) {
        sections_[section][key] = value;
    }

private:
    double to_real(const std::string& section, const std::string& key,
                   const std::string& v) const {
        double out;
        if (!parse_real(v, out))
            throw ConfigError("config key [" + section + "] " + key +
                              ": expected a real number, got '" + v + "'");
        return out;
    }

    std::map<std::string, std::map<std::string, std::string>> sections_;
};

// --- builders used by the command-line tool ------------------------------

inline Vec vec_from_list(const std::vector<double>& xs, const std::string& what) {
    if (xs.empty() || xs.size() > static_cast<std::size_t>(max_dim))
        throw ConfigError(what + ": expected 1 to 3 components, got " +
                          std::to_string(xs.size()));
    Vec v(static_cast<int>(xs.size()));
    for (std::size_t i = 0; i < xs.size(); ++i) v[static_cast<int>(i)] = xs[i];
    return v;
}

inline PairLaw law_from_config(const Config& cfg) {
    const std::string family = cfg.get("law", "family");
    if (family == "exp_unit") {
        return make_exp_unit(cfg.get_real_or("law", "lambda", 1.0));
    }
    if (family == "exp_gauss") {
        Vec mean = vec_from_list(cfg.get_list("law", "mean"), "[law] mean");
        std::vector<double> cov = cfg.get_list("law", "cov");
        std::size_t need = static_cast<std::size_t>(mean.dim) * static_cast<std::size_t>(mean.dim);
        if (cov.size() != need)
            throw ConfigError("[law] cov: expected " + std::to_string(need) +
                              " row-major entries, got " + std::to_string(cov.size()));
        return make_exp_gauss(cfg.get_real_or("law", "lambda", 1.0), mean, cov.data());
    }
    if (family == "gauss_tail_cauchy") return make_gauss_tail_cauchy();
    if (family == "reward_of_wait") {
        const std::string fn = cfg.get_or("law", "reward", "sqrt");
        RewardFn rf;
        if (fn == "sqrt") rf = RewardFn::sqrt_wait;
        else if (fn == "log1p") rf = RewardFn::log1p_wait;
        else if (fn == "pow") rf = RewardFn::pow_wait;
        else throw ConfigError("[law] reward: expected sqrt|log1p|pow, got '" + fn + "'");
        return make_reward_of_wait(rf, cfg.get_real_or("law", "lambda", 1.0),
                                   cfg.get_real_or("law", "c", 1.0),
                                   cfg.get_real_or("law", "p", 0.5));
    }
    if (family == "oscillating_tail") {
        return make_oscillating_tail(cfg.get_real_or("law", "ell_s", 1.0),
                                     cfg.get_real_or("law", "ell_i", 2.0));
    }
    if (family == "empirical") {
        const std::string path = cfg.get("law", "samples");
        std::ifstream in(path);
        if (!in) throw ConfigError("[law] samples: cannot open '" + path + "'");
        return make_empirical(parse_samples_csv(in));
    }
    throw ConfigError("[law] family: unknown family '" + family + "'");
}

inline SetDescriptor set_from_config(const Config& cfg, int dim,
                                     const std::string& section = "set") {
    const std::string kind = cfg.get(section, "kind");
    if (kind == "open_ball" || kind == "closed_ball") {
        Vec c = vec_from_list(cfg.get_list(section, "center"), "[" + section + "] center");
        if (c.dim != dim)
            throw ConfigError("[" + section + "] center: dimension " + std::to_string(c.dim) +
                              " does not match the law's reward dimension " + std::to_string(dim));
        double r = cfg.get_real(section, "radius");
        return kind == "open_ball" ? make_open_ball(c, r) : make_closed_ball(c, r);
    }
    if (kind == "half_space") {
        Vec n = vec_from_list(cfg.get_list(section, "normal"), "[" + section + "] normal");
        if (n.dim != dim)
            throw ConfigError("[" + section + "] normal: dimension " + std::to_string(n.dim) +
                              " does not match the law's reward dimension " + std::to_string(dim));
        return make_half_space(n, cfg.get_real(section, "offset"),
                               cfg.get_bool_or(section, "open", false));
    }
    if (kind == "hyperbola_wedge") {
        if (dim != 2)
            throw ConfigError("[" + section + "] hyperbola_wedge requires a 2-dimensional reward");
        return make_hyperbola_wedge(cfg.get_real(section, "cap"),
                                    cfg.get_real(section, "level"));
    }
    throw ConfigError("[" + section +
                      "] kind: expected open_ball|closed_ball|half_space|hyperbola_wedge, got '" +
                      kind + "'");
}

} // namespace rldp
