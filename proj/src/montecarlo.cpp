#include "silab/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>

namespace silab {

namespace {

std::int64_t chunk_count(std::int64_t draws) { return (draws + kMonteCarloChunk - 1) / kMonteCarloChunk; }

std::int64_t chunk_size(std::int64_t c, std::int64_t draws)
{
    return std::min(kMonteCarloChunk, draws - c * kMonteCarloChunk);
}

Estimate finish(const RunningStats& s) { return {s.mean, s.std_error(), s.count}; }

// Exact for polynomial integrands in a of degree < 2 * kConditionalNodes.
constexpr int kConditionalNodes = 48;

} // namespace

std::vector<Estimate> mu_monte_carlo(const OracleSpec& spec, const MonomialPoly& link, const NoiseSpec& noise, int dim,
                                     int max_index, std::int64_t draws, std::uint64_t seed, Exec exec, McScheme scheme)
{
    if (draws < 1) throw std::invalid_argument("mu_monte_carlo: need at least one draw");
    if (max_index < 1) throw std::invalid_argument("mu_monte_carlo: max_index must be positive");
    const BivariatePoly psi = effective_psi(spec, dim);
    const GaussHermiteRule& rule = gauss_hermite_rule(kConditionalNodes);
    const SeedTree root(seed);
    const std::int64_t chunks = chunk_count(draws);
    std::vector<std::vector<RunningStats>> partial(chunks, std::vector<RunningStats>(max_index));

    parallel_for(
        chunks,
        [&](std::int64_t c) {
            Rng rng = root.child(static_cast<std::uint64_t>(c)).stream();
            auto& stats = partial[c];
            std::vector<double> hea(max_index + 1), heb(max_index + 1), inner(max_index + 1);
            auto recur = [&](std::vector<double>& he, double v) {
                he[0] = 1.0;
                he[1] = v;
                for (int k = 1; k < max_index; ++k) he[k + 1] = v * he[k] - k * he[k - 1];
            };
            for (std::int64_t s = 0, m = chunk_size(c, draws); s < m; ++s) {
                if (scheme == McScheme::plain) {
                    const double a = rng.normal();
                    const double b = rng.normal();
                    const double p = psi(link(a) + noise.draw(rng), b);
                    recur(hea, a);
                    recur(heb, b);
                    for (int i = 1; i <= max_index; ++i) stats[i - 1].add(p * hea[i] * heb[i - 1]);
                    continue;
                }
                const double b = rng.normal();
                const double zeta = noise.draw(rng);
                std::fill(inner.begin(), inner.end(), 0.0);
                for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
                    const double a = rule.nodes[q];
                    const double p = rule.weights[q] * psi(link(a) + zeta, b);
                    recur(hea, a);
                    for (int i = 1; i <= max_index; ++i) inner[i] += p * hea[i];
                }
                recur(heb, b);
                for (int i = 1; i <= max_index; ++i) stats[i - 1].add(inner[i] * heb[i - 1]);
            }
        },
        exec);

    std::vector<Estimate> out(max_index);
    for (int i = 0; i < max_index; ++i) {
        RunningStats total;
        for (const auto& part : partial) total.merge(part[i]);
        out[i] = finish(total);
    }
    return out;
}

Estimate drift_monte_carlo(const OracleSpec& spec, const MonomialPoly& link, const NoiseSpec& noise, int dim,
                           double kappa, std::int64_t draws, std::uint64_t seed, Exec exec, McScheme scheme)
{
    if (draws < 1) throw std::invalid_argument("drift_monte_carlo: need at least one draw");
    if (!(std::abs(kappa) <= 1.0)) throw std::invalid_argument("drift_monte_carlo: kappa must lie in [-1, 1]");
    std::optional<BivariatePoly> surrogate;
    if (spec.kind == OracleKind::batch_reuse) surrogate = effective_psi(spec, dim);
    const UpdateOracle oracle(spec);
    const double perp = std::sqrt(1.0 - kappa * kappa);
    const GaussHermiteRule& rule = gauss_hermite_rule(kConditionalNodes);
    const SeedTree root(seed);
    const std::int64_t chunks = chunk_count(draws);
    std::vector<RunningStats> partial(chunks);

    parallel_for(
        chunks,
        [&](std::int64_t c) {
            Rng rng = root.child(static_cast<std::uint64_t>(c)).stream();
            auto term = [&](double a, double xi, double zeta) {
                const double z = kappa * a + perp * xi;
                const double y = link(a) + zeta;
                const double p = surrogate ? (*surrogate)(y, z) : oracle.psi(y, z, 0.0);
                return p * (a - kappa * z);
            };
            for (std::int64_t s = 0, m = chunk_size(c, draws); s < m; ++s) {
                if (scheme == McScheme::plain) {
                    const double a = rng.normal(); // <x, theta_*>
                    const double xi = rng.normal();
                    partial[c].add(term(a, xi, noise.draw(rng)));
                    continue;
                }
                const double xi = rng.normal();
                const double zeta = noise.draw(rng);
                double inner = 0.0;
                for (std::size_t q = 0; q < rule.nodes.size(); ++q) inner += rule.weights[q] * term(rule.nodes[q], xi, zeta);
                partial[c].add(inner);
            }
        },
        exec);

    RunningStats total;
    for (const auto& part : partial) total.merge(part);
    return finish(total);
}

double population_drift(std::span<const double> mus, double kappa)
{
    double acc = 0.0, pow = 1.0, fact = 1.0;
    for (std::size_t i = 1; i <= mus.size(); ++i) {
        if (i > 1) {
            pow *= kappa;
            fact *= static_cast<double>(i - 1);
        }
        acc += mus[i - 1] * pow / fact;
    }
    return acc * (1.0 - kappa * kappa);
}

double population_drift_factorial_weights(std::span<const double> mus, double kappa)
{
    double acc = 0.0, pow = 1.0, fact = 1.0;
    for (std::size_t i = 1; i <= mus.size(); ++i) {
        if (i > 1) pow *= kappa;
        fact *= static_cast<double>(i);
        acc += fact * mus[i - 1] * pow;
    }
    return acc * (1.0 - kappa * kappa);
}

} // namespace silab
