#include "silab/config.hpp"

#include "silab/theory.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace silab {

namespace {

std::string trim(const std::string& s)
{
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

} // namespace

Config Config::parse(const std::string& text)
{
    Config cfg;
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
        std::replace(key.begin(), key.end(), '-', '_');
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
        cfg.values_[key] = value;
    }
    return cfg;
}

Config Config::load(const std::string& path)
{
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << is.rdbuf();
    return parse(ss.str());
}

void Config::merge(const Config& other)
{
    for (const auto& [k, v] : other.values_) values_[k] = v;
}

std::optional<std::string> Config::get(const std::string& key) const
{
    auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    return it->second;
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const
{
    return get(key).value_or(fallback);
}

double Config::get_double(const std::string& key, double fallback) const
{
    const auto v = get(key);
    if (!v) return fallback;
    try {
        std::size_t used = 0;
        const double out = std::stod(*v, &used);
        if (used != v->size()) throw std::invalid_argument(*v);
        return out;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': expected a number, got '" + *v + "'");
    }
}

long long Config::get_int(const std::string& key, long long fallback) const
{
    const auto v = get(key);
    if (!v) return fallback;
    const double d = get_double(key, 0.0);
    if (d != static_cast<double>(static_cast<long long>(d))) {
        throw ConfigError("config key '" + key + "': expected an integer, got '" + *v + "'");
    }
    return static_cast<long long>(d);
}

bool Config::get_bool(const std::string& key, bool fallback) const
{
    const auto v = get(key);
    if (!v) return fallback;
    std::string s = *v;
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    if (s == "1" || s == "true" || s == "yes" || s == "on") return true;
    if (s == "0" || s == "false" || s == "no" || s == "off") return false;
    throw ConfigError("config key '" + key + "': expected a boolean, got '" + *v + "'");
}

RunConfig run_config_from(const Config& c)
{
    try {
        RunConfig r;
        const int d = static_cast<int>(c.get_int("d", 50));
        NoiseSpec noise{parse_noise_family(c.get_string("noise", "none")), c.get_double("tau", 0.0)};
        r.teacher = TeacherSpec::canonical(d, parse_poly(c.get_string("link", "He3")), noise);
        r.neurons = static_cast<int>(c.get_int("neurons", 1));
        r.init = parse_init_mode(c.get_string("init", "pinned"));
        r.oracle.kind = parse_oracle_kind(c.get_string("oracle", "online"));
        r.oracle.activation = parse_poly(c.get_string("act", "He3"));
        r.oracle.eta = c.get_double("eta", 0.0);
        r.oracle.depth = static_cast<int>(c.get_int("depth", 2));
        r.batch = static_cast<int>(c.get_int("batch", 1));
        r.n = c.get_int("n", std::max<long long>(r.batch, 10000));
        r.weak_threshold = c.get_double("threshold", 0.5);
        r.strong_eps = c.get_double("strong_eps", 0.1);
        r.record_every = c.get_int("record_every", 100);
        r.master_seed = static_cast<std::uint64_t>(c.get_int("seed", 0));
        r.audit = c.get_bool("audit", false);
        const std::string gamma = c.get_string("gamma", "auto");
        r.oracle.gamma = gamma == "auto" ? gamma_auto(r.oracle, r.teacher.link, d) : c.get_double("gamma", 0.0);
        return r;
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
}

SweepSpec sweep_spec_from(const Config& c)
{
    SweepSpec s;
    s.base = run_config_from(c);
    try {
        if (c.has("eta") && !c.has("eta_min")) {
            s.eta_grid = {c.get_double("eta", 0.0)};
        } else {
            s.eta_grid = log_space(c.get_double("eta_min", 1e-3), c.get_double("eta_max", 1.0),
                                   static_cast<int>(c.get_int("eta_count", 50)));
        }
        if (c.has("n") && !c.has("n_min")) {
            s.n_grid = {c.get_int("n", 0)};
        } else {
            s.n_grid = log_space_int(c.get_double("n_min", 1e3), c.get_double("n_max", 5e5),
                                     static_cast<int>(c.get_int("n_count", 40)));
        }
        s.replicates = static_cast<int>(c.get_int("replicates", 10));
        s.grid_is_gamma = c.get_bool("grid_is_gamma", false);
        s.auto_gamma = c.get_string("gamma", "auto") == "auto";
        const std::string agg = c.get_string("aggregate", "median");
        if (agg == "median") s.aggregate = Aggregate::median;
        else if (agg == "mean") s.aggregate = Aggregate::mean;
        else throw ConfigError("config key 'aggregate': expected median or mean");
        s.jobs = static_cast<int>(c.get_int("jobs", 0));
        s.validate();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
    return s;
}

} // namespace silab
