#pragma once

#include "silab/dynamics.hpp"
#include "silab/theory.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace silab {

std::vector<double> log_space(double lo, double hi, int count);
/// Log-spaced integers, rounded and deduplicated.
std::vector<std::int64_t> log_space_int(double lo, double hi, int count);

struct SweepSpec
{
    RunConfig base; // teacher, network, oracle kind and hyperparameters, batch, threshold, seed
    std::vector<double> eta_grid;
    std::vector<std::int64_t> n_grid;
    int replicates = 10;
    bool auto_gamma = true;   // gamma per cell from gamma_auto; otherwise base.oracle.gamma
    bool grid_is_gamma = false; // the grid holds gamma values and eta stays at base.oracle.eta
    Aggregate aggregate = Aggregate::median;
    int jobs = 0;

    void validate() const;
};

struct SweepCell
{
    double eta = 0.0; // grid value (gamma when the grid is over gamma)
    std::int64_t n = 0;
    int replicate = 0;
    std::uint64_t seed = 0;
    double final_alignment = 0.0; // NaN when the run diverged before n
    int recovered = 0;
    std::int64_t samples_seen = 0;
    int diverged = 0;
    double gamma = 0.0;
};

struct SweepResult
{
    std::vector<double> eta_grid;
    std::vector<std::int64_t> n_grid;
    int replicates = 0;
    double threshold = 0.5;
    Aggregate aggregate = Aggregate::median;
    std::vector<SweepCell> cells;                 // eta-major, then n, then replicate
    std::vector<std::vector<double>> aggregates;  // [eta][n], median or mean final alignment
    std::vector<std::optional<std::int64_t>> n_star; // per eta
    std::vector<PhaseBoundary> boundaries;        // theory markers over the eta range
};

/// Replicate r at grid index e runs once to max(n_grid) with seed path
/// base.seed_path + {e, r} and is read at every n; cells are independent of
/// the thread count and execution order.
SweepResult sweep(const SweepSpec& spec, Exec exec = {});
inline SweepResult sweep_serial(const SweepSpec& spec) { return sweep(spec, Exec::serial()); }

/// Recomputes aggregates and n_star from result.cells alone.
void summarize(SweepResult& result);

struct SlopeFit
{
    double slope = 0.0;
    double std_error = 0.0;
    double intercept = 0.0;
    int points = 0;
};

/// Ordinary least squares of y on x.
SlopeFit fit_line(std::span<const double> x, std::span<const double> y);

/// OLS of log n_star on log eta over eta in [eta_lo, eta_hi]; needs >= 4
/// finite points and throws otherwise.
SlopeFit fit_boundary_slope(const SweepResult& result, double eta_lo, double eta_hi);

struct KneeFit
{
    double eta_knee = 0.0;
    double flat_level = 0.0; // n_star on the flat side
    double slope = 0.0;      // log-log slope after the knee
    double rss = 0.0;
};

/// Hinge fit log n = c for log eta <= k and c + s (log eta - k) beyond,
/// minimizing the residual sum of squares over k. Needs >= 4 points.
KneeFit fit_knee(std::span<const double> eta, std::span<const double> n_star);
KneeFit fit_knee(const SweepResult& result);

/// Writes cells.csv, summary.csv, phase.csv, grid.plotdata and grid.markers
/// into dir (created if missing).
void emit(const SweepResult& result, const std::string& dir);

void write_cells_csv(const SweepResult& result, std::ostream& os);
void write_summary_csv(const SweepResult& result, std::ostream& os);
void write_phase_csv(const SweepResult& result, std::ostream& os);
void write_plotdata(const SweepResult& result, std::ostream& os);
void write_markers(const SweepResult& result, std::ostream& os);

/// Reads a cells.csv back (for recomputation checks).
std::vector<SweepCell> read_cells_csv(std::istream& is);

} // namespace silab
