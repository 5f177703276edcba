#pragma once

#include "silab/hermite.hpp"
#include "silab/model.hpp"

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace silab {

enum class OracleKind { online, batch_reuse, alternating, deep_alternating };

OracleKind parse_oracle_kind(const std::string& name);
std::string to_string(OracleKind kind);

/// Which update rule psi_eta is in force and its hyperparameters.
struct OracleSpec
{
    OracleKind kind = OracleKind::online;
    double eta = 0.0;   // second (label-transforming) learning rate; unused by online
    double gamma = 1.0; // global first-layer learning rate
    int depth = 2;      // layers of the sparse deep network (deep_alternating only)
    MonomialPoly activation = MonomialPoly::hermite(3);
    int degree_bound = 0; // r; 0 derives it from the effective oracle
    /// Persistent second-layer scalars a^(1..D-1). Empty means all ones.
    /// Alternating SGD uses the first entry.
    std::vector<double> layer_scalars;

    void validate() const;
    double layer_scalar(int i) const { return i < static_cast<int>(layer_scalars.size()) ? layer_scalars[i] : 1.0; }
};

class DegenerateOracle : public std::runtime_error
{
public:
    explicit DegenerateOracle(const std::string& what) : std::runtime_error(what) {}
};

/// Per-sample evaluation of the literal algorithms. For every kind the raw
/// update direction of one sample is psi * P_w x, where psi depends on
/// (y, <x, w>) and, for batch reuse only, on ||P_w x||^2.
class UpdateOracle
{
public:
    explicit UpdateOracle(OracleSpec spec);

    const OracleSpec& spec() const { return spec_; }

    /// Scalar multiplier of P_w x for one sample (y, z = <x, w>).
    double psi(double y, double z, double x_perp_sq) const;

    /// Transient second-layer value a~ used by alternating SGD for one sample.
    double alternating_transient(double y, double z) const;

    /// Transient per-layer values a~^(i), i = 1..D-1, for deep alternating SGD.
    std::vector<double> deep_transients(double y, double z) const;

private:
    double deep_psi(double y, double z) const;

    OracleSpec spec_;
    MonomialPoly sigma_;
    MonomialPoly dsigma_;
};

struct StepResult
{
    std::vector<double> w;          // normalized new weight (unchanged when rejected)
    std::vector<double> raw_update; // g = P_w (mean of psi x)
    double pre_norm = 1.0;          // ||w + gamma g|| before normalization
    bool rejected = false;          // zero denominator
    bool diverged = false;          // pre_norm >= 1e12 or non-finite
};

inline constexpr double kDivergenceNorm = 1e12;

/// w <- (w + gamma g) / ||w + gamma g|| with g = P_w(sum_psi_x / count).
StepResult apply_projected_update(std::span<const double> w, std::span<const double> sum_psi_x, double count,
                                  double gamma);

enum class StepStatus { ok, rejected, diverged };

/// In-place form used by the training loop. On entry acc holds sum psi x; on
/// return it holds g. w is updated unless the step is rejected or diverges.
StepStatus apply_projected_update_inplace(std::span<double> w, std::span<double> acc, double count, double gamma,
                                          double& pre_norm);

StepResult step_online(std::span<const double> w, const Sample& sample, const OracleSpec& spec);
StepResult step_batch_reuse(std::span<const double> w, const Sample& sample, const OracleSpec& spec);

struct AlternatingStep
{
    StepResult step;
    double a = 1.0; // persistent second-layer weight, returned unchanged
    double a_transient = 1.0;
};
AlternatingStep step_alternating(std::span<const double> w, double a, const Sample& sample, const OracleSpec& spec);

struct DeepStep
{
    StepResult step;
    std::vector<double> layer_scalars; // persistent, returned unchanged
    std::vector<double> transients;    // a~^(1..D-1)
};
DeepStep step_deep_alternating(std::span<const double> w, std::span<const double> layer_scalars, const Sample& sample,
                               const OracleSpec& spec);

/// psi(y, z) = sum_k y^k q_k(z). terms[k] holds q_k.
struct BivariatePoly
{
    std::vector<MonomialPoly> terms;

    int y_degree() const { return static_cast<int>(terms.size()) - 1; }
    const MonomialPoly& coeff(int k) const;
    double operator()(double y, double z) const;
};

/// Effective single-step oracle analysed by the theory. For batch reuse this
/// is the Taylor surrogate with ||P_w x||^2 replaced by d.
BivariatePoly effective_psi(const OracleSpec& spec, int dim);

/// Same oracle with eta set to 1; the y^k coefficient of the true oracle is
/// eta^{k-1} times the y^k coefficient of this one.
BivariatePoly effective_psi_unit_eta(const OracleSpec& spec, int dim);

struct MuTable
{
    std::vector<double> mus; // mus[i-1] = mu_i
    std::vector<int> istar;  // minimizers of |mu_i|^{-1} d^{(i-2)/2 v 0} over nonzero mu_i

    int degree_bound() const { return static_cast<int>(mus.size()); }
    double mu(int i) const { return i >= 1 && i <= degree_bound() ? mus[i - 1] : 0.0; }
};

/// mu_i(eta) as exact polynomials in eta: result[i-1] is mu_i.
std::vector<MonomialPoly> mu_polynomials(const OracleSpec& spec, const MonomialPoly& link, const NoiseSpec& noise, int dim);

/// mu_i = E[psi(link(a) + zeta, b) He_i(a) He_{i-1}(b)], (a, b) ~ N(0, I_2),
/// computed exactly as sum_k u_i(E_zeta (link + zeta)^k) u_{i-1}(q_k).
MuTable mu_table(const OracleSpec& spec, const MonomialPoly& link, const NoiseSpec& noise, int dim);

struct SignCheck
{
    bool pass = false;
    std::vector<int> istar;
};

/// Assumption on the sign of the dominant coefficient. Throws
/// DegenerateOracle when every mu_i vanishes.
SignCheck check_sign_assumption(std::span<const double> mus, int dim);

/// d^{(i-2)/2 v 0}.
double dimension_penalty(int i, int dim);

} // namespace silab
