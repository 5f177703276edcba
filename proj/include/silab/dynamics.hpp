#pragma once

#include "silab/model.hpp"
#include "silab/oracles.hpp"
#include "silab/parallel.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace silab {

struct RunConfig
{
    TeacherSpec teacher;
    int neurons = 1;
    InitMode init = InitMode::pinned_alignment;
    OracleSpec oracle;
    std::int64_t n = 0; // total samples; floor(n / batch) updates are executed
    int batch = 1;
    double weak_threshold = 0.5;
    double strong_eps = 0.1;
    std::int64_t record_every = 100;        // steps between checkpoints; 0 keeps only the explicit ones
    std::vector<std::int64_t> record_steps; // extra checkpoints, in steps
    std::uint64_t master_seed = 0;
    std::vector<std::uint64_t> seed_path;
    bool audit = false;

    void validate() const;
    std::int64_t steps() const { return n / batch; }
    SeedTree seeds() const { return SeedTree(master_seed, seed_path); }
};

/// Per-step check of kappa' >= kappa + gamma <theta, g> - gamma^2 kappa ||g||^2
/// - gamma^3 |<theta, g>| ||g||^2 on steps that start with kappa >= 0.
struct AuditReport
{
    std::int64_t audited = 0;
    std::int64_t skipped_negative = 0;
    std::int64_t violations = 0;
    double max_violation = 0.0; // largest positive (bound - kappa'), 0 when none
};

inline constexpr double kAuditTolerance = 1e-10;

struct Trajectory
{
    std::vector<std::int64_t> steps;
    std::vector<std::int64_t> samples_seen;
    std::vector<double> kappa; // max over neurons, clamped to [-1, 1]
    std::optional<std::int64_t> weak_recovery_step;
    std::optional<std::int64_t> strong_recovery_step;
    bool diverged = false;
    std::optional<std::int64_t> divergence_step;
    std::int64_t steps_executed = 0;
    std::int64_t total_samples = 0;
    std::int64_t rejected_steps = 0;
    double max_norm_error = 0.0; // max | ||w|| - 1 | over every update
    NetworkSpec network;
    AuditReport audit;

    /// Alignment recorded at exactly this step, if the run reached it.
    std::optional<double> kappa_at(std::int64_t step) const;
};

Trajectory run(const RunConfig& config);

enum class SearchMode { binary, scan };
enum class Aggregate { median, mean };

struct SampleSizeResult
{
    std::optional<std::int64_t> n_star;
    std::vector<double> aggregate; // per n_grid entry; diverged runs count as alignment -1
};

/// Smallest n in n_grid whose aggregate final alignment over replicates is at
/// least the weak threshold. Replicate r runs once to max(n_grid) with seed
/// path template.seed_path + {r} and is read at every grid point, which gives
/// the same alignments as separate runs of each length.
SampleSizeResult weak_recovery_sample_size(const RunConfig& config_template, std::span<const std::int64_t> n_grid,
                                           int replicates, SearchMode mode = SearchMode::binary,
                                           Aggregate aggregate = Aggregate::median, Exec exec = {});

/// Median with NaN entries counted as -1.
double median_alignment(std::vector<double> values);
double mean_alignment(std::span<const double> values);

struct RidgeConfig
{
    double lambda = 1e-6;
    std::int64_t n_fit = 20000;
    std::int64_t n_test = 20000;
};

struct RidgeResult
{
    std::vector<double> second_layer;
    double test_mse = 0.0;
    double label_second_moment = 0.0; // E[y^2] on the test draws
};

/// Fits a in f(x) = sum_j a_j phi_j(x), phi_j = sigma(<x, w_j> + b_j) / N, by
/// solving (Phi^T Phi / n + lambda I) a = Phi^T y / n. Throws when lambda = 0
/// and the Gram matrix is singular.
RidgeResult ridge_fit(const NetworkSpec& net, const TeacherSpec& teacher, const RidgeConfig& cfg, Rng& rng);

} // namespace silab
