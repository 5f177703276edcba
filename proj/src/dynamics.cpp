#include "silab/dynamics.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace silab {

void RunConfig::validate() const
{
    teacher.validate();
    oracle.validate();
    if (neurons < 1) throw std::invalid_argument("RunConfig: need at least one neuron");
    if (batch < 1) throw std::invalid_argument("RunConfig: batch size must be >= 1");
    if (n < batch) throw std::invalid_argument("RunConfig: n must be >= batch size");
    if (!(weak_threshold > 0.0 && weak_threshold < 1.0)) throw std::invalid_argument("RunConfig: weak threshold must lie in (0, 1)");
    if (!(strong_eps > 0.0 && strong_eps < 1.0)) throw std::invalid_argument("RunConfig: strong eps must lie in (0, 1)");
    if (record_every < 0) throw std::invalid_argument("RunConfig: record_every must be >= 0");
    if (teacher.dim < 2) throw std::invalid_argument("RunConfig: dimension must be at least 2");
}

std::optional<double> Trajectory::kappa_at(std::int64_t step) const
{
    auto it = std::lower_bound(steps.begin(), steps.end(), step);
    if (it == steps.end() || *it != step) return std::nullopt;
    return kappa[it - steps.begin()];
}

namespace {

std::vector<std::int64_t> checkpoint_schedule(const RunConfig& cfg)
{
    const std::int64_t total = cfg.steps();
    std::vector<std::int64_t> out{0, total};
    if (cfg.record_every > 0) {
        for (std::int64_t s = cfg.record_every; s < total; s += cfg.record_every) out.push_back(s);
    }
    for (std::int64_t s : cfg.record_steps) {
        if (s >= 0 && s <= total) out.push_back(s);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

double clamp_unit(double v) { return std::clamp(v, -1.0, 1.0); }

} // namespace

Trajectory run(const RunConfig& cfg)
{
    cfg.validate();
    const int d = cfg.teacher.dim;
    const int B = cfg.batch;
    const double gamma = cfg.oracle.gamma;
    const auto& theta = cfg.teacher.theta_star;
    const SeedTree seeds = cfg.seeds();
    Rng init_rng = seeds.child(static_cast<std::uint64_t>(StreamRole::init)).stream();
    Rng data_rng = seeds.child(static_cast<std::uint64_t>(StreamRole::data)).stream();
    Rng noise_rng = seeds.child(static_cast<std::uint64_t>(StreamRole::noise)).stream();

    Trajectory tr;
    tr.network = init_network(d, cfg.neurons, cfg.oracle.activation, cfg.init, init_rng, theta);
    NetworkSpec& net = tr.network;

    std::vector<UpdateOracle> oracles;
    oracles.reserve(cfg.neurons);
    for (int j = 0; j < cfg.neurons; ++j) {
        OracleSpec s = cfg.oracle;
        if (s.kind == OracleKind::alternating) s.layer_scalars = {net.second_layer[j]};
        oracles.emplace_back(std::move(s));
    }
    const bool needs_perp = cfg.oracle.kind == OracleKind::batch_reuse;

    const auto schedule = checkpoint_schedule(cfg);
    std::size_t next = 0;
    auto record = [&](std::int64_t step) {
        double best = -std::numeric_limits<double>::infinity();
        for (int j = 0; j < net.neurons; ++j) best = std::max(best, clamp_unit(dot(net.row(j), theta)));
        tr.steps.push_back(step);
        tr.samples_seen.push_back(step * B);
        tr.kappa.push_back(best);
        if (!tr.weak_recovery_step && best >= cfg.weak_threshold) tr.weak_recovery_step = step;
        if (!tr.strong_recovery_step && best >= 1.0 - cfg.strong_eps) tr.strong_recovery_step = step;
    };
    if (schedule[next] == 0) record(schedule[next++]);

    std::vector<double> xs(static_cast<std::size_t>(B) * d), ys(B), xx(B), acc(d);
    const std::int64_t total = cfg.steps();
    for (std::int64_t t = 1; t <= total && !tr.diverged; ++t) {
        for (int b = 0; b < B; ++b) {
            std::span<double> x(xs.data() + static_cast<std::size_t>(b) * d, d);
            data_rng.fill_normal(x);
            ys[b] = cfg.teacher.link(dot(x, theta)) + cfg.teacher.noise.draw(noise_rng);
            if (needs_perp) xx[b] = dot(x, x);
        }
        tr.total_samples += B;

        for (int j = 0; j < net.neurons; ++j) {
            auto w = net.row(j);
            std::fill(acc.begin(), acc.end(), 0.0);
            for (int b = 0; b < B; ++b) {
                std::span<const double> x(xs.data() + static_cast<std::size_t>(b) * d, d);
                const double z = dot(x, w);
                const double psi = oracles[j].psi(ys[b], z, needs_perp ? xx[b] - z * z : 0.0);
                for (int k = 0; k < d; ++k) acc[k] += psi * x[k];
            }
            const double kappa0 = cfg.audit ? dot(w, theta) : 0.0;
            double pre_norm = 1.0;
            const StepStatus status = apply_projected_update_inplace(w, acc, B, gamma, pre_norm);
            if (status == StepStatus::diverged) {
                tr.diverged = true;
                tr.divergence_step = t;
                break;
            }
            if (status == StepStatus::rejected) {
                ++tr.rejected_steps;
                continue;
            }
            tr.max_norm_error = std::max(tr.max_norm_error, std::abs(norm(w) - 1.0));
            if (cfg.audit) {
                if (kappa0 < 0.0) {
                    ++tr.audit.skipped_negative;
                } else {
                    const double tg = dot(theta, acc);
                    const double gg = dot(acc, acc);
                    const double bound = kappa0 + gamma * tg - gamma * gamma * kappa0 * gg
                                         - gamma * gamma * gamma * std::abs(tg) * gg;
                    const double gap = bound - dot(w, theta);
                    ++tr.audit.audited;
                    if (gap > kAuditTolerance) ++tr.audit.violations;
                    tr.audit.max_violation = std::max(tr.audit.max_violation, gap);
                }
            }
        }
        if (tr.diverged) break;
        tr.steps_executed = t;
        while (next < schedule.size() && schedule[next] == t) record(schedule[next++]);
    }
    return tr;
}

double median_alignment(std::vector<double> values)
{
    if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
    for (double& v : values) {
        if (std::isnan(v)) v = -1.0;
    }
    std::sort(values.begin(), values.end());
    const std::size_t m = values.size() / 2;
    return values.size() % 2 == 1 ? values[m] : 0.5 * (values[m - 1] + values[m]);
}

double mean_alignment(std::span<const double> values)
{
    if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
    double acc = 0.0;
    for (double v : values) acc += std::isnan(v) ? -1.0 : v;
    return acc / static_cast<double>(values.size());
}

SampleSizeResult weak_recovery_sample_size(const RunConfig& tmpl, std::span<const std::int64_t> n_grid, int replicates,
                                           SearchMode mode, Aggregate aggregate, Exec exec)
{
    if (n_grid.empty()) throw std::invalid_argument("weak_recovery_sample_size: empty n grid");
    if (replicates < 1) throw std::invalid_argument("weak_recovery_sample_size: replicates must be >= 1");
    if (!std::is_sorted(n_grid.begin(), n_grid.end())) throw std::invalid_argument("weak_recovery_sample_size: n grid must increase");

    const std::size_t G = n_grid.size();
    std::vector<std::vector<double>> finals(replicates, std::vector<double>(G));
    parallel_for(
        replicates,
        [&](std::int64_t r) {
            RunConfig cfg = tmpl;
            cfg.n = n_grid.back();
            cfg.record_every = 0;
            cfg.record_steps.clear();
            for (std::int64_t n : n_grid) cfg.record_steps.push_back(n / cfg.batch);
            cfg.seed_path.push_back(static_cast<std::uint64_t>(r));
            const Trajectory tr = run(cfg);
            for (std::size_t g = 0; g < G; ++g) {
                finals[r][g] = tr.kappa_at(n_grid[g] / cfg.batch).value_or(std::numeric_limits<double>::quiet_NaN());
            }
        },
        exec);

    SampleSizeResult out;
    out.aggregate.resize(G);
    for (std::size_t g = 0; g < G; ++g) {
        std::vector<double> col(replicates);
        for (int r = 0; r < replicates; ++r) col[r] = finals[r][g];
        out.aggregate[g] = aggregate == Aggregate::median ? median_alignment(col) : mean_alignment(col);
    }
    auto ok = [&](std::size_t g) { return out.aggregate[g] >= tmpl.weak_threshold; };
    if (mode == SearchMode::scan) {
        for (std::size_t g = 0; g < G; ++g) {
            if (ok(g)) {
                out.n_star = n_grid[g];
                break;
            }
        }
    } else {
        // Assumes the aggregate alignment is monotone in n.
        std::size_t lo = 0, hi = G;
        while (lo < hi) {
            const std::size_t mid = lo + (hi - lo) / 2;
            if (ok(mid)) hi = mid;
            else lo = mid + 1;
        }
        if (lo < G) out.n_star = n_grid[lo];
    }
    return out;
}

RidgeResult ridge_fit(const NetworkSpec& net, const TeacherSpec& teacher, const RidgeConfig& cfg, Rng& rng)
{
    if (cfg.lambda < 0.0) throw std::invalid_argument("ridge_fit: lambda must be >= 0");
    if (cfg.n_fit < net.neurons) throw std::invalid_argument("ridge_fit: n_fit must be >= number of neurons");
    if (cfg.n_test < 1) throw std::invalid_argument("ridge_fit: n_test must be positive");
    if (net.dim != teacher.dim) throw std::invalid_argument("ridge_fit: dimension mismatch");

    const int N = net.neurons;
    auto features = [&](std::span<const double> x, Eigen::Ref<Eigen::VectorXd> phi) {
        for (int j = 0; j < N; ++j) phi[j] = net.activation(dot(net.row(j), x) + net.biases[j]) / N;
    };

    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(N, N);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(N);
    Eigen::VectorXd phi(N);
    std::vector<double> x(teacher.dim);
    for (std::int64_t s = 0; s < cfg.n_fit; ++s) {
        const double y = draw_sample_into(teacher, rng, x);
        features(x, phi);
        gram.selfadjointView<Eigen::Lower>().rankUpdate(phi);
        rhs += y * phi;
    }
    gram = gram.selfadjointView<Eigen::Lower>();
    gram /= static_cast<double>(cfg.n_fit);
    rhs /= static_cast<double>(cfg.n_fit);
    gram.diagonal().array() += cfg.lambda;

    Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
    const Eigen::VectorXd pivots = ldlt.vectorD().cwiseAbs();
    if (ldlt.info() != Eigen::Success || !(pivots.minCoeff() > 1e-12 * pivots.maxCoeff())) {
        throw std::runtime_error("ridge_fit: singular normal equations; use lambda > 0");
    }
    const Eigen::VectorXd a = ldlt.solve(rhs);

    RidgeResult out;
    out.second_layer.assign(a.data(), a.data() + N);
    double se = 0.0, yy = 0.0;
    for (std::int64_t s = 0; s < cfg.n_test; ++s) {
        const double y = draw_sample_into(teacher, rng, x);
        features(x, phi);
        const double r = phi.dot(a) - y;
        se += r * r;
        yy += y * y;
    }
    out.test_mse = se / static_cast<double>(cfg.n_test);
    out.label_second_moment = yy / static_cast<double>(cfg.n_test);
    return out;
}

} // namespace silab
