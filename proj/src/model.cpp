#include "silab/model.hpp"

#include <cmath>
#include <stdexcept>

namespace silab {

namespace {

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

} // namespace

SeedTree SeedTree::child(std::uint64_t index) const
{
    auto path = path_;
    path.push_back(index);
    return SeedTree(master_, std::move(path));
}

std::uint64_t SeedTree::seed() const
{
    std::uint64_t h = splitmix64(master_);
    for (std::uint64_t p : path_) h = splitmix64(h ^ splitmix64(p + 0x632be59bd9b4e019ULL));
    return h;
}

double NoiseSpec::moment(int k) const
{
    if (k < 0) throw std::invalid_argument("NoiseSpec::moment: negative order");
    if (k == 0) return 1.0;
    if (family == NoiseFamily::none || scale == 0.0 || k % 2 == 1) return 0.0;
    double m = 1.0;
    if (family == NoiseFamily::gaussian) {
        for (int j = k - 1; j > 1; j -= 2) m *= j;
    } else {
        for (int j = 2; j <= k; ++j) m *= j;
    }
    return m * std::pow(scale, k);
}

double NoiseSpec::draw(Rng& rng) const
{
    switch (family) {
    case NoiseFamily::none:
        return 0.0;
    case NoiseFamily::gaussian:
        return scale * rng.normal();
    case NoiseFamily::laplace:
        return scale > 0.0 ? rng.laplace(scale) : 0.0;
    }
    return 0.0;
}

NoiseFamily parse_noise_family(const std::string& name)
{
    if (name == "none") return NoiseFamily::none;
    if (name == "gaussian") return NoiseFamily::gaussian;
    if (name == "laplace") return NoiseFamily::laplace;
    throw std::invalid_argument("unknown noise family '" + name + "'");
}

std::string to_string(NoiseFamily family)
{
    switch (family) {
    case NoiseFamily::none: return "none";
    case NoiseFamily::gaussian: return "gaussian";
    case NoiseFamily::laplace: return "laplace";
    }
    return "none";
}

TeacherSpec TeacherSpec::canonical(int dim, MonomialPoly link, NoiseSpec noise)
{
    if (dim < 1) throw std::invalid_argument("TeacherSpec: dimension must be positive");
    TeacherSpec t;
    t.dim = dim;
    t.theta_star.assign(dim, 0.0);
    t.theta_star[0] = 1.0;
    t.link = std::move(link);
    t.noise = noise;
    return t;
}

void TeacherSpec::validate() const
{
    if (dim < 1 || static_cast<int>(theta_star.size()) != dim) {
        throw std::invalid_argument("TeacherSpec: theta_star must have dimension d");
    }
    if (std::abs(norm(theta_star) - 1.0) > 1e-12) throw std::invalid_argument("TeacherSpec: theta_star must be a unit vector");
    if (noise.scale < 0.0) throw std::invalid_argument("TeacherSpec: noise scale must be nonnegative");
}

double draw_sample_into(const TeacherSpec& teacher, Rng& rng, std::span<double> x)
{
    rng.fill_normal(x);
    return teacher.link(dot(x, teacher.theta_star)) + teacher.noise.draw(rng);
}

Sample draw_sample(const TeacherSpec& teacher, Rng& rng)
{
    Sample s;
    s.x.resize(teacher.dim);
    s.y = draw_sample_into(teacher, rng, s.x);
    return s;
}

InitMode parse_init_mode(const std::string& name)
{
    if (name == "uniform" || name == "uniform_sphere") return InitMode::uniform_sphere;
    if (name == "pinned" || name == "pinned_alignment") return InitMode::pinned_alignment;
    throw std::invalid_argument("unknown init mode '" + name + "'");
}

double NetworkSpec::output(std::span<const double> x) const
{
    double acc = 0.0;
    for (int j = 0; j < neurons; ++j) acc += second_layer[j] * activation(dot(row(j), x) + biases[j]);
    return acc / neurons;
}

NetworkSpec init_network(int dim, int neurons, const MonomialPoly& activation, InitMode mode, Rng& rng,
                         std::span<const double> theta_star)
{
    if (dim < 2) throw std::invalid_argument("init_network: dimension must be at least 2");
    if (neurons < 1) throw std::invalid_argument("init_network: need at least one neuron");
    if (static_cast<int>(theta_star.size()) != dim) throw std::invalid_argument("init_network: theta_star dimension mismatch");

    NetworkSpec net;
    net.neurons = neurons;
    net.dim = dim;
    net.weights.assign(static_cast<std::size_t>(neurons) * dim, 0.0);
    net.second_layer.assign(neurons, 1.0);
    net.biases.assign(neurons, 0.0);
    net.activation = activation;

    std::vector<double> u(dim);
    for (int j = 0; j < neurons; ++j) {
        auto w = net.row(j);
        double n = 0.0;
        do {
            rng.fill_normal(u);
            if (mode == InitMode::pinned_alignment) {
                const double c = dot(u, theta_star);
                for (int k = 0; k < dim; ++k) u[k] -= c * theta_star[k];
            }
            n = norm(u);
        } while (n == 0.0);

        if (mode == InitMode::uniform_sphere) {
            for (int k = 0; k < dim; ++k) w[k] = u[k] / n;
        } else {
            const double along = 1.0 / std::sqrt(static_cast<double>(dim));
            const double radius = std::sqrt(1.0 - 1.0 / dim);
            for (int k = 0; k < dim; ++k) w[k] = along * theta_star[k] + radius * (u[k] / n);
        }
    }
    return net;
}

std::vector<double> alignment(const NetworkSpec& net, const TeacherSpec& teacher)
{
    if (net.dim != teacher.dim) throw std::invalid_argument("alignment: dimension mismatch");
    std::vector<double> kappa(net.neurons);
    for (int j = 0; j < net.neurons; ++j) kappa[j] = dot(net.row(j), teacher.theta_star);
    return kappa;
}

double dot(std::span<const double> a, std::span<const double> b)
{
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

} // namespace silab
