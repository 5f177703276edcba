#pragma once

#include "silab/model.hpp"
#include "silab/oracles.hpp"
#include "silab/parallel.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace silab {

struct Estimate
{
    double mean = 0.0;
    double std_error = 0.0;
    double draws = 0.0;
};

/// Draws handled by one seeded chunk. Chunk c uses SeedTree(seed).child(c),
/// so estimates are identical for every thread count.
inline constexpr std::int64_t kMonteCarloChunk = 1 << 15;

/// plain draws every Gaussian; conditional draws the noise and the direction
/// orthogonal to theta_* and integrates <x, theta_*> by Gauss-Hermite
/// quadrature, which is exact for the polynomial integrands used here and
/// keeps the standard error meaningful for high-degree oracles.
enum class McScheme { plain, conditional };

/// Monte Carlo estimate of mu_i = E[psi(sigma_*(a) + zeta, b) He_i(a) He_{i-1}(b)]
/// for i = 1..max_index, with psi the effective oracle.
std::vector<Estimate> mu_monte_carlo(const OracleSpec& spec, const MonomialPoly& link, const NoiseSpec& noise, int dim,
                                     int max_index, std::int64_t draws, std::uint64_t seed, Exec exec = {},
                                     McScheme scheme = McScheme::conditional);

/// Monte Carlo estimate of E<theta_*, psi(y, <x, w>) P_w x> at alignment
/// kappa = <theta_*, w>. Online, alternating and deep oracles use the
/// per-sample update code; batch reuse uses its Taylor surrogate.
Estimate drift_monte_carlo(const OracleSpec& spec, const MonomialPoly& link, const NoiseSpec& noise, int dim,
                           double kappa, std::int64_t draws, std::uint64_t seed, Exec exec = {},
                           McScheme scheme = McScheme::conditional);

/// Gaussian integration by parts: sum_i mu_i kappa^{i-1} (1 - kappa^2) / (i-1)!.
double population_drift(std::span<const double> mus, double kappa);

/// The same sum with weights i! in place of 1/(i-1)!.
double population_drift_factorial_weights(std::span<const double> mus, double kappa);

} // namespace silab
