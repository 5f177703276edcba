#pragma once

#include "silab/hermite.hpp"
#include "silab/oracles.hpp"

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace silab {

class NoPrediction : public std::runtime_error
{
public:
    explicit NoPrediction(const std::string& what) : std::runtime_error(what) {}
};

/// (i - 2)/2 v 0, the dimension exponent attached to mu_i.
double dimension_exponent(int i);

/// Order-level sample-complexity prediction with every constant set to 1.
struct Prediction
{
    std::vector<std::pair<int, double>> T_per_i; // gamma^{-1} mu_i^{-1} d^{(i-2)/2 v 0}, positive mu_i only
    double T = 0.0;
    int dominant_i = 0;
    std::vector<std::pair<int, double>> T_opt_per_i; // mu_i^{-2} d^{(i-1) v 1}
    double T_opt = 0.0;
    int dominant_opt_i = 0;
    double gamma_max = 0.0;      // max_i mu_i d^{-(i/2 v 1)}
    double T_at_gamma_max = 0.0; // first form evaluated at gamma_max; equals T_opt
};

/// Throws NoPrediction when no mu_i is positive.
Prediction predict_T(std::span<const double> mus, double gamma, int dim);
inline Prediction predict_T(const MuTable& table, double gamma, int dim) { return predict_T(table.mus, gamma, dim); }

struct PhaseBoundary
{
    int i = 0;
    int j = 0;
    double eta_star = 0.0;
    std::optional<double> exponent; // eta_star ~ d^{exponent}, when the mu_i are monomials in eta
    bool degenerate = false;        // batch-reuse pair whose boundary sits at the validity edge eta ~ 1/d
    bool active = false;            // the dominant index switches between i and j at eta_star
};

/// Crossings in [eta_lo, eta_hi] of mu_i(eta) d^{-(i-2)/2 v 0} = mu_j(eta) d^{-(j-2)/2 v 0}
/// for every pair with both coefficients positive, located by a log-spaced
/// scan and bisection in log eta. mus[i-1] is mu_i as a polynomial in eta.
std::vector<PhaseBoundary> phase_boundaries(std::span<const MonomialPoly> mus, OracleKind kind, int dim, double eta_lo,
                                            double eta_hi, int scan_points = 2000);

/// Index minimizing the predicted time at a given eta (0 when none is positive).
int dominant_index(std::span<const MonomialPoly> mus, int dim, double eta);

struct RecursionOptions
{
    bool include_negative = false;  // keep mu_i <= 0 terms
    bool factorial_weights = false; // weight term i by 1/(i-1)!
    bool sphere_factor = false;     // multiply the drift by (1 - alpha^2)
};

/// alpha_{t+1} = alpha_t + gamma sum_i mu_i alpha_t^{i-1}, alpha_0 = d^{-1/2}.
/// Returns the first t with alpha_t >= c_target, or nullopt after t_max steps.
std::optional<std::int64_t> recursion_oracle(std::span<const double> mus, double gamma, int dim, double c_target,
                                             std::int64_t t_max, RecursionOptions options = {});

struct LemmaReport
{
    double max_violation = -std::numeric_limits<double>::infinity(); // max relative (bound breach); <= 0 means none
    std::int64_t violations = 0;
    std::int64_t checked = 0;
    bool truncated = false; // t_max cut back to the validity window
};

inline constexpr double kLemmaTolerance = 1e-9;

/// m_t = a + c sum_{j<t} m_j against m_t <= a(1+c)^t <= a e^{ct} and the
/// matching lower bound a(1+c)^t.
LemmaReport gronwall_check(double a, double c, std::int64_t t_max);

/// m_t = a + c sum_{j<t} m_j^{k-1} against the upper bound
/// a / (1 - (k-2) c a^{k-2} t)^{1/(k-2)} for t < 1/(c(k-2)a^{k-2}) and the lower
/// bound a / (1 - (c/2) a^{k-2} t)^{1/(k-2)} for t < (a^{-(k-2)} - c)/(c(k-2)).
LemmaReport bihari_lasalle_check(double a, double c, int k, std::int64_t t_max);

/// Same checks on an arbitrary sequence that satisfies the hypothesis with
/// inequality; upper selects which lemma direction applies.
LemmaReport bihari_lasalle_check_sequence(std::span<const double> m, double a, double c, int k, bool upper);
LemmaReport gronwall_check_sequence(std::span<const double> m, double a, double c, bool upper);

enum class GammaMode { weak, strong };

/// Corollary-style first-layer learning rate with constants set to 1:
///   online       d^{-(p/2 v 1)}
///   alternating  max{d^{-(p/2 v 1)}, eta d^{-(p_2/2 v 1)}}
///   batch reuse  max_i (eta d)^{i-1} d^{-(p_i/2 v 1)}, i = 1..deg(sigma)
///   deep         max_j eta^{j-1} d^{-(p_j/2 v 1)}, j = 1..D
/// with p_i = IE(link^i). Strong mode multiplies by eps.
double gamma_auto(const OracleSpec& spec, const MonomialPoly& link, int dim, GammaMode mode = GammaMode::weak,
                  double eps = 0.1);

} // namespace silab
