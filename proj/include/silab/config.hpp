#pragma once

#include "silab/harness.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace silab {

/// Line-oriented "key = value" settings. '#' starts a comment; keys are
/// case-sensitive and use underscores (a CLI flag --eta-min maps to eta_min).
///
/// Recognized keys:
///   oracle        online | batch_reuse | alternating | deep_alternating
///   link, act     polynomial (He3, z^2, "c0,c1,...")
///   d, neurons, depth, batch, replicates, jobs, record_every
///   eta           single value; or eta_min, eta_max, eta_count (log grid)
///   n             single value; or n_min, n_max, n_count (log grid)
///   gamma         number or "auto";  grid_is_gamma  true | false
///   noise         none | gaussian | laplace;  tau
///   init          pinned | uniform;  threshold;  strong_eps
///   seed;  aggregate  median | mean;  out
class Config
{
public:
    static Config parse(const std::string& text);
    static Config load(const std::string& path);

    void set(const std::string& key, const std::string& value) { values_[key] = value; }
    /// Entries of other replace entries of this.
    void merge(const Config& other);

    bool has(const std::string& key) const { return values_.count(key) != 0; }
    std::optional<std::string> get(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    long long get_int(const std::string& key, long long fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;

    const std::map<std::string, std::string>& values() const { return values_; }

private:
    std::map<std::string, std::string> values_;
};

class ConfigError : public std::runtime_error
{
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Single-run settings (oracle, teacher, network, n, batch, seed).
/// gamma = auto resolves through gamma_auto.
RunConfig run_config_from(const Config& cfg);

SweepSpec sweep_spec_from(const Config& cfg);

} // namespace silab
