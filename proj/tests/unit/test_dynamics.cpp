#include "silab/dynamics.hpp"
#include "silab/theory.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace silab;

namespace {

RunConfig base(OracleKind kind, int d, MonomialPoly link, int batch = 1)
{
    RunConfig cfg;
    cfg.teacher = TeacherSpec::canonical(d, link);
    cfg.oracle.kind = kind;
    cfg.oracle.activation = link;
    cfg.batch = batch;
    cfg.master_seed = 77;
    return cfg;
}

} // namespace

TEST_CASE("gamma = 0 leaves the alignment at its initial value")
{
    RunConfig cfg = base(OracleKind::alternating, 25, MonomialPoly::hermite(3));
    cfg.oracle.gamma = 0.0;
    cfg.oracle.eta = 1.0;
    cfg.n = 2000;
    cfg.record_every = 50;
    const Trajectory tr = run(cfg);
    for (double k : tr.kappa) CHECK(k == doctest::Approx(0.2).epsilon(1e-12));
    CHECK_FALSE(tr.weak_recovery_step.has_value());
}

TEST_CASE("online He1 recovers in linear time")
{
    RunConfig cfg = base(OracleKind::online, 25, MonomialPoly::hermite(1));
    cfg.oracle.gamma = 1.0 / 25;
    cfg.n = 10000;
    cfg.record_every = 10;
    std::vector<double> steps;
    for (std::uint64_t r = 0; r < 10; ++r) {
        RunConfig c = cfg;
        c.seed_path = {r};
        const Trajectory tr = run(c);
        steps.push_back(tr.weak_recovery_step ? static_cast<double>(*tr.weak_recovery_step) : INFINITY);
    }
    std::sort(steps.begin(), steps.end());
    CHECK(std::isfinite(0.5 * (steps[4] + steps[5])));
}

TEST_CASE("run invariants: unit norm, determinism, sample counting, thresholds")
{
    for (OracleKind kind : {OracleKind::online, OracleKind::batch_reuse, OracleKind::alternating, OracleKind::deep_alternating}) {
        RunConfig cfg = base(kind, 20, MonomialPoly::hermite(3), 4);
        cfg.oracle.eta = kind == OracleKind::batch_reuse ? 1.0 / 20 : 0.3;
        if (kind == OracleKind::deep_alternating) {
            cfg.oracle.depth = 3;
            cfg.oracle.activation = MonomialPoly::monomial(2);
        }
        cfg.oracle.gamma = gamma_auto(cfg.oracle, cfg.teacher.link, 20) / 4;
        cfg.n = 4000;
        cfg.record_every = 7;
        cfg.neurons = 2;
        const Trajectory a = run(cfg);
        const Trajectory b = run(cfg);
        CHECK(a.kappa == b.kappa);
        CHECK(a.network.weights == b.network.weights);
        CHECK(a.max_norm_error <= 1e-10);
        if (!a.diverged) {
            CHECK(a.total_samples == cfg.n);
            CHECK(a.steps_executed == cfg.n / cfg.batch);
            CHECK(a.steps.back() == cfg.n / cfg.batch);
        }
        for (std::size_t k = 0; k < a.steps.size(); ++k) {
            CHECK(a.samples_seen[k] == a.steps[k] * cfg.batch);
            CHECK(a.kappa[k] >= -1.0);
            CHECK(a.kappa[k] <= 1.0);
        }
        if (a.weak_recovery_step && a.strong_recovery_step) CHECK(*a.weak_recovery_step <= *a.strong_recovery_step);
        RunConfig hi = cfg;
        hi.weak_threshold = 0.7;
        const Trajectory c = run(hi);
        if (c.weak_recovery_step) {
            REQUIRE(a.weak_recovery_step);
            CHECK(*a.weak_recovery_step <= *c.weak_recovery_step);
        }
    }
}

TEST_CASE("eta = 0 degenerates to online bit for bit")
{
    RunConfig on = base(OracleKind::online, 25, MonomialPoly::hermite(3));
    on.oracle.gamma = 0.01;
    on.n = 1000;
    on.record_every = 1;
    const Trajectory ref = run(on);
    for (OracleKind kind : {OracleKind::batch_reuse, OracleKind::alternating}) {
        RunConfig cfg = on;
        cfg.oracle.kind = kind;
        cfg.oracle.eta = 0.0;
        const Trajectory tr = run(cfg);
        CHECK(tr.kappa == ref.kappa);
        CHECK(tr.network.weights == ref.network.weights);
    }
}

TEST_CASE("normalization audit holds pathwise")
{
    for (OracleKind kind : {OracleKind::online, OracleKind::batch_reuse, OracleKind::alternating}) {
        RunConfig cfg = base(kind, 25, MonomialPoly::hermite(3));
        cfg.oracle.eta = kind == OracleKind::batch_reuse ? 0.04 : 1.0;
        cfg.oracle.gamma = 0.05;
        cfg.n = 1000;
        cfg.audit = true;
        const Trajectory tr = run(cfg);
        CHECK(tr.audit.violations == 0);
        CHECK(tr.audit.max_violation <= 1e-10);
        CHECK(tr.audit.audited + tr.audit.skipped_negative > 0);
    }
    RunConfig z = base(OracleKind::online, 25, MonomialPoly::hermite(3));
    z.oracle.gamma = 0.0;
    z.n = 200;
    z.audit = true;
    const Trajectory tr = run(z);
    CHECK(tr.audit.violations == 0);
    CHECK(tr.audit.audited == 200);
}

TEST_CASE("divergence is flagged, not thrown")
{
    RunConfig cfg = base(OracleKind::alternating, 10, MonomialPoly::hermite(3));
    cfg.oracle.eta = 1e6;
    cfg.oracle.gamma = 1e6;
    cfg.n = 50;
    const Trajectory tr = run(cfg);
    CHECK(tr.diverged);
    CHECK(tr.divergence_step.has_value());
}

TEST_CASE("config validation")
{
    RunConfig cfg = base(OracleKind::online, 10, MonomialPoly::hermite(3), 8);
    cfg.n = 4;
    CHECK_THROWS(run(cfg));
    cfg.n = 100;
    cfg.weak_threshold = 1.0;
    CHECK_THROWS(run(cfg));
}

TEST_CASE("weak_recovery_sample_size")
{
    RunConfig cfg = base(OracleKind::online, 20, MonomialPoly::hermite(1));
    cfg.oracle.gamma = 0.05;
    const std::vector<std::int64_t> grid{50, 100, 200, 400, 800, 1600, 3200, 6400};
    const auto bin = weak_recovery_sample_size(cfg, grid, 5, SearchMode::binary);
    const auto scan = weak_recovery_sample_size(cfg, grid, 5, SearchMode::scan);
    REQUIRE(bin.n_star);
    CHECK(bin.n_star == scan.n_star);
    const auto ser = weak_recovery_sample_size(cfg, grid, 5, SearchMode::scan, Aggregate::median, Exec::serial());
    CHECK(ser.aggregate == scan.aggregate);

    // Prefix sharing: a replicate read at n equals a separate run of length n.
    RunConfig one = cfg;
    one.n = 800;
    one.record_every = 0;
    one.seed_path = {0};
    const auto single = weak_recovery_sample_size(cfg, grid, 1, SearchMode::scan);
    CHECK(single.aggregate[4] == run(one).kappa.back());

    cfg.oracle.gamma = 0.0;
    CHECK_FALSE(weak_recovery_sample_size(cfg, grid, 3).n_star.has_value());
}

TEST_CASE("median and mean alignment count NaN as -1")
{
    CHECK(median_alignment({0.1, 0.9, 0.5}) == 0.5);
    CHECK(median_alignment({std::nan(""), 0.9, 0.8, 0.7}) == doctest::Approx(0.75));
    const std::vector<double> v{std::nan(""), 1.0};
    CHECK(mean_alignment(v) == 0.0);
}

TEST_CASE("ridge_fit")
{
    const int d = 10;
    const TeacherSpec t = TeacherSpec::canonical(d, MonomialPoly::hermite(3));
    NetworkSpec net;
    net.neurons = 1;
    net.dim = d;
    net.weights.assign(d, 0.0);
    net.weights[0] = 1.0;
    net.second_layer = {1.0};
    net.biases = {0.0};
    net.activation = MonomialPoly::hermite(3);
    Rng rng(4);
    const RidgeResult al = ridge_fit(net, t, RidgeConfig{1e-6, 5000, 5000}, rng);
    CHECK(al.test_mse < 1e-4);
    CHECK(al.second_layer[0] == doctest::Approx(1.0).epsilon(1e-3));

    const RidgeResult big = ridge_fit(net, t, RidgeConfig{1e9, 2000, 20000}, rng);
    CHECK(std::abs(big.second_layer[0]) < 1e-6);
    CHECK(big.test_mse == doctest::Approx(big.label_second_moment).epsilon(1e-3));

    net.weights[0] = 0.0;
    net.weights[1] = 1.0;
    const RidgeResult orth = ridge_fit(net, t, RidgeConfig{1e-6, 5000, 20000}, rng);
    CHECK(orth.test_mse >= 0.9 * orth.label_second_moment);

    NetworkSpec two = net;
    two.neurons = 2;
    two.weights.insert(two.weights.end(), net.weights.begin(), net.weights.end());
    two.second_layer = {1.0, 1.0};
    two.biases = {0.0, 0.0};
    CHECK_THROWS(ridge_fit(two, t, RidgeConfig{0.0, 1000, 10}, rng));
    CHECK_THROWS(ridge_fit(net, t, RidgeConfig{-1.0, 1000, 10}, rng));
}
