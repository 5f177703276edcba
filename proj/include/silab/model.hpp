#pragma once

#include "silab/hermite.hpp"

#include <boost/random/laplace_distribution.hpp>
#include <boost/random/normal_distribution.hpp>

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace silab {

/// One reproducible random stream. Not safe to share between threads.
class Rng
{
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double normal() { return normal_(engine_); }
    double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
    double laplace(double scale) { return boost::random::laplace_distribution<double>(0.0, scale)(engine_); }
    void fill_normal(std::span<double> out)
    {
        for (double& v : out) v = normal_(engine_);
    }

private:
    std::mt19937_64 engine_;
    boost::random::normal_distribution<double> normal_;
};

/// Hierarchical seed: a master seed plus a path such as
/// (cell index, replicate index, stream role). Distinct paths hash to
/// unrelated 64-bit seeds.
class SeedTree
{
public:
    explicit SeedTree(std::uint64_t master_seed, std::vector<std::uint64_t> path = {})
        : master_(master_seed), path_(std::move(path))
    {
    }

    SeedTree child(std::uint64_t index) const;
    std::uint64_t seed() const;
    Rng stream() const { return Rng(seed()); }

    std::uint64_t master_seed() const { return master_; }
    const std::vector<std::uint64_t>& path() const { return path_; }

private:
    std::uint64_t master_;
    std::vector<std::uint64_t> path_;
};

/// Stream roles used under a run's seed path.
enum class StreamRole : std::uint64_t { data = 1, init = 2, noise = 3, ridge = 4 };

enum class NoiseFamily { none, gaussian, laplace };

struct NoiseSpec
{
    NoiseFamily family = NoiseFamily::none;
    double scale = 0.0; // gaussian: standard deviation; laplace: scale parameter

    /// E[zeta^k]; odd moments vanish for both symmetric families.
    double moment(int k) const;
    double draw(Rng& rng) const;
};

NoiseFamily parse_noise_family(const std::string& name);
std::string to_string(NoiseFamily family);

struct TeacherSpec
{
    int dim = 0;
    std::vector<double> theta_star;
    MonomialPoly link;
    NoiseSpec noise;

    /// theta_* = e_1.
    static TeacherSpec canonical(int dim, MonomialPoly link, NoiseSpec noise = {});
    void validate() const;
};

struct Sample
{
    std::vector<double> x;
    double y = 0.0;
};

/// Draws x ~ N(0, I_d) into x and returns y = link(<x, theta_*>) + zeta.
double draw_sample_into(const TeacherSpec& teacher, Rng& rng, std::span<double> x);
Sample draw_sample(const TeacherSpec& teacher, Rng& rng);

enum class InitMode { uniform_sphere, pinned_alignment };
InitMode parse_init_mode(const std::string& name);

/// f(x) = (1/N) sum_j a_j sigma(<x, w_j> + b_j) with unit rows w_j.
struct NetworkSpec
{
    int neurons = 1;
    int dim = 0;
    std::vector<double> weights; // row-major, neurons x dim
    std::vector<double> second_layer;
    std::vector<double> biases;
    MonomialPoly activation;

    std::span<double> row(int j) { return {weights.data() + static_cast<std::size_t>(j) * dim, static_cast<std::size_t>(dim)}; }
    std::span<const double> row(int j) const
    {
        return {weights.data() + static_cast<std::size_t>(j) * dim, static_cast<std::size_t>(dim)};
    }
    double output(std::span<const double> x) const;
};

/// Uniform rows on S^{d-1}, or rows pinned at <theta_*, w> = d^{-1/2} with the
/// orthogonal part uniform on the sphere of radius sqrt(1 - 1/d).
/// a_j = 1 and b_j = 0.
NetworkSpec init_network(int dim, int neurons, const MonomialPoly& activation, InitMode mode, Rng& rng,
                         std::span<const double> theta_star);

/// kappa_j = <theta_*, w_j> for each neuron.
std::vector<double> alignment(const NetworkSpec& net, const TeacherSpec& teacher);

double dot(std::span<const double> a, std::span<const double> b);
double norm(std::span<const double> a);

} // namespace silab
