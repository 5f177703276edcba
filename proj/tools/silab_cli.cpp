#include "silab/config.hpp"
#include "silab/dynamics.hpp"
#include "silab/harness.hpp"
#include "silab/hermite.hpp"
#include "silab/model.hpp"
#include "silab/oracles.hpp"
#include "silab/theory.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <memory>

using namespace silab;

namespace {

/// String-valued flags that mirror config keys. Values given on the command
/// line replace the ones read from --config.
struct FlagSet
{
    std::map<std::string, std::string> values;
    std::string config_path;

    void add(CLI::App* app, const std::string& flag, const std::string& help)
    {
        std::string key = flag;
        std::replace(key.begin(), key.end(), '-', '_');
        app->add_option("--" + flag, values[key], help);
    }

    Config resolve(const CLI::App* app) const
    {
        Config cfg = config_path.empty() ? Config{} : Config::load(config_path);
        for (const auto& [key, value] : values) {
            std::string flag = key;
            std::replace(flag.begin(), flag.end(), '_', '-');
            if (app->count("--" + flag) > 0) cfg.set(key, value);
        }
        return cfg;
    }
};

void add_model_flags(CLI::App* app, FlagSet& f)
{
    app->add_option("--config", f.config_path, "key = value settings file; flags override it");
    f.add(app, "oracle", "online | batch_reuse | alternating | deep_alternating");
    f.add(app, "link", "teacher link: He<k>, z^k or comma separated monomial coefficients");
    f.add(app, "act", "student activation, same syntax as --link");
    f.add(app, "d", "input dimension");
    f.add(app, "eta", "second learning rate");
    f.add(app, "depth", "layers of the deep alternating network");
    f.add(app, "noise", "none | gaussian | laplace");
    f.add(app, "tau", "noise scale");
}

std::string num(double v)
{
    std::ostringstream os;
    os << std::setprecision(12) << v;
    return os.str();
}

std::string opt_int(const std::optional<int>& v) { return v ? std::to_string(*v) : "undefined"; }
std::string opt_step(const std::optional<std::int64_t>& v) { return v ? std::to_string(*v) : "never"; }

int cmd_hermite(const Config& c, int powers)
{
    const MonomialPoly link = parse_poly(c.get_string("link", "He3"));
    const auto rep = exponent_report(link, powers);
    std::cout << "# ie=" << opt_int(rep.ie) << " ge_upper_bound=" << opt_int(rep.ge_upper_bound)
              << " witness_power=" << opt_int(rep.witness_power) << '\n';
    for (const auto& [i, ie] : rep.power_ies) std::cout << "# power " << i << " ie=" << opt_int(ie) << '\n';
    std::cout << "power,k,u_k\n";
    for (int i = 1; i <= powers; ++i) {
        const HermiteExpansion h = expand(link.pow(i));
        for (int k = 0; k <= h.max_degree(); ++k) std::cout << i << ',' << k << ',' << num(h[k]) << '\n';
    }
    return 0;
}

int cmd_gen_data(const Config& c)
{
    const int d = static_cast<int>(c.get_int("d", 50));
    const long long n = c.get_int("n", 10);
    const NoiseSpec noise{parse_noise_family(c.get_string("noise", "none")), c.get_double("tau", 0.0)};
    const TeacherSpec teacher = TeacherSpec::canonical(d, parse_poly(c.get_string("link", "He3")), noise);
    Rng rng = SeedTree(static_cast<std::uint64_t>(c.get_int("seed", 0))).child(static_cast<std::uint64_t>(StreamRole::data)).stream();
    for (int k = 1; k <= d; ++k) std::cout << 'x' << '_' << k << ',';
    std::cout << "y\n";
    std::vector<double> x(d);
    for (long long s = 0; s < n; ++s) {
        const double y = draw_sample_into(teacher, rng, x);
        for (double v : x) std::cout << num(v) << ',';
        std::cout << num(y) << '\n';
    }
    return 0;
}

OracleSpec oracle_from(const Config& c)
{
    OracleSpec s;
    s.kind = parse_oracle_kind(c.get_string("oracle", "online"));
    s.activation = parse_poly(c.get_string("act", "He3"));
    s.eta = c.get_double("eta", 0.0);
    s.depth = static_cast<int>(c.get_int("depth", 2));
    s.degree_bound = static_cast<int>(c.get_int("r", 0));
    return s;
}

NoiseSpec noise_from(const Config& c)
{
    return {parse_noise_family(c.get_string("noise", "none")), c.get_double("tau", 0.0)};
}

int cmd_mu(const Config& c)
{
    const OracleSpec spec = oracle_from(c);
    const int d = static_cast<int>(c.get_int("d", 50));
    const MuTable table = mu_table(spec, parse_poly(c.get_string("link", "He3")), noise_from(c), d);
    std::cout << "i,mu_i,istar_flag\n";
    for (int i = 1; i <= table.degree_bound(); ++i) {
        const bool star = std::find(table.istar.begin(), table.istar.end(), i) != table.istar.end();
        std::cout << i << ',' << num(table.mu(i)) << ',' << (star ? 1 : 0) << '\n';
    }
    try {
        const SignCheck check = check_sign_assumption(table.mus, d);
        std::cout << "# sign_assumption=" << (check.pass ? "pass" : "fail") << '\n';
    } catch (const DegenerateOracle& e) {
        std::cout << "# sign_assumption=degenerate\n";
    }
    return 0;
}

int cmd_simulate(const Config& c, const std::string& out_path)
{
    const RunConfig cfg = run_config_from(c);
    const Trajectory tr = run(cfg);
    std::ofstream file;
    std::ostream* os = &std::cout;
    if (!out_path.empty()) {
        file.open(out_path);
        if (!file) throw ConfigError("cannot open output file '" + out_path + "'");
        os = &file;
    }
    *os << "step,samples_seen,kappa\n";
    for (std::size_t k = 0; k < tr.steps.size(); ++k) {
        *os << tr.steps[k] << ',' << tr.samples_seen[k] << ',' << num(tr.kappa[k]) << '\n';
    }
    std::cout << "# gamma=" << num(cfg.oracle.gamma) << " weak_step=" << opt_step(tr.weak_recovery_step)
              << " strong_step=" << opt_step(tr.strong_recovery_step) << " diverged=" << (tr.diverged ? 1 : 0) << '\n';
    if (cfg.audit) {
        std::cout << "# audit audited=" << tr.audit.audited << " skipped_negative=" << tr.audit.skipped_negative
                  << " violations=" << tr.audit.violations << " max_violation=" << num(tr.audit.max_violation) << '\n';
    }
    return 0;
}

int cmd_predict(const Config& c)
{
    const OracleSpec spec = oracle_from(c);
    const int d = static_cast<int>(c.get_int("d", 50));
    const MonomialPoly link = parse_poly(c.get_string("link", "He3"));
    const MuTable table = mu_table(spec, link, noise_from(c), d);
    const double g_auto = gamma_auto(spec, link, d);
    const std::string g = c.get_string("gamma", "auto");
    const double gamma = g == "auto" ? g_auto : c.get_double("gamma", 0.0);
    const Prediction p = predict_T(table, gamma, d);
    std::cout << "i,T_i,T_opt_i\n";
    for (std::size_t k = 0; k < p.T_per_i.size(); ++k) {
        std::cout << p.T_per_i[k].first << ',' << num(p.T_per_i[k].second) << ',' << num(p.T_opt_per_i[k].second) << '\n';
    }
    std::cout << "# T=" << num(p.T) << " dominant_i=" << p.dominant_i << " T_opt=" << num(p.T_opt)
              << " dominant_opt_i=" << p.dominant_opt_i << " gamma=" << num(gamma) << " gamma_auto=" << num(g_auto)
              << " gamma_max=" << num(p.gamma_max) << '\n';
    return 0;
}

int cmd_phase(const Config& c)
{
    const OracleSpec spec = oracle_from(c);
    const int d = static_cast<int>(c.get_int("d", 50));
    const auto mus = mu_polynomials(spec, parse_poly(c.get_string("link", "He3")), noise_from(c), d);
    const auto bounds = phase_boundaries(mus, spec.kind, d, c.get_double("eta_min", 1e-4), c.get_double("eta_max", 1.0));
    std::cout << "i,j,eta_star,exponent_if_known,active,degenerate\n";
    for (const auto& b : bounds) {
        std::cout << b.i << ',' << b.j << ',' << num(b.eta_star) << ',' << (b.exponent ? num(*b.exponent) : "") << ','
                  << (b.active ? 1 : 0) << ',' << (b.degenerate ? 1 : 0) << '\n';
    }
    return 0;
}

int cmd_sweep(const Config& c, const std::string& out_dir)
{
    const SweepSpec spec = sweep_spec_from(c);
    const SweepResult res = sweep(spec);
    const std::string dir = out_dir.empty() ? c.get_string("out", "sweep_out") : out_dir;
    emit(res, dir);
    std::cout << "# cells=" << res.cells.size() << " out=" << dir << '\n';
    std::cout << "eta,n_star\n";
    for (std::size_t e = 0; e < res.eta_grid.size(); ++e) {
        std::cout << num(res.eta_grid[e]) << ',' << (res.n_star[e] ? std::to_string(*res.n_star[e]) : "none") << '\n';
    }
    return 0;
}

const char* flag_help(const std::string& key)
{
    static const std::map<std::string, const char*> help = {
        {"gamma", "first-layer learning rate, number or auto"},
        {"n", "samples to train on"},
        {"batch", "mini-batch size"},
        {"seed", "master seed"},
        {"record-every", "steps between recorded alignments"},
        {"neurons", "student width"},
        {"init", "pinned (alignment d^-1/2) or uniform"},
        {"threshold", "weak-recovery alignment"},
        {"strong-eps", "strong recovery at alignment 1 - eps"},
        {"eta-min", "smallest grid value"},
        {"eta-max", "largest grid value"},
        {"eta-count", "log-spaced grid points"},
        {"n-min", "smallest sample count"},
        {"n-max", "largest sample count"},
        {"n-count", "log-spaced sample counts"},
        {"replicates", "seeds per grid point"},
        {"aggregate", "median or mean"},
        {"grid-is-gamma", "grid over gamma with eta fixed"},
        {"jobs", "threads, 0 for the OpenMP default"},
    };
    const auto it = help.find(key);
    return it == help.end() ? "" : it->second;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Single-index model learning-rate laboratory"};
    app.require_subcommand(1);

    FlagSet hermite_f, gen_f, mu_f, sim_f, pred_f, phase_f, sweep_f;
    int powers = 2;
    std::string sim_out, sweep_out;

    auto* hermite = app.add_subcommand("hermite", "exponent report and Hermite coefficients of link powers");
    hermite->add_option("--config", hermite_f.config_path, "settings file");
    hermite_f.add(hermite, "link", "link polynomial");
    hermite->add_option("--powers", powers, "largest power K")->check(CLI::PositiveNumber);

    auto* gen = app.add_subcommand("gen-data", "emit teacher samples as CSV");
    add_model_flags(gen, gen_f);
    gen_f.add(gen, "n", "number of samples");
    gen_f.add(gen, "seed", "master seed");

    auto* mu = app.add_subcommand("mu", "mu_i table and sign check");
    add_model_flags(mu, mu_f);
    mu_f.add(mu, "r", "degree bound (0 derives it)");

    auto* sim = app.add_subcommand("simulate", "run one training trajectory");
    add_model_flags(sim, sim_f);
    for (const char* k : {"gamma", "n", "batch", "seed", "record-every", "neurons", "init", "threshold", "strong-eps"}) {
        sim_f.add(sim, k, flag_help(k));
    }
    bool audit = false;
    sim->add_flag("--audit", audit, "check the normalization lower bound every step");
    sim->add_option("--out", sim_out, "trajectory CSV path (default stdout)");

    auto* pred = app.add_subcommand("predict", "order-level sample-complexity prediction");
    add_model_flags(pred, pred_f);
    pred_f.add(pred, "gamma", "number or auto");

    auto* phase = app.add_subcommand("phase", "phase boundaries in eta");
    add_model_flags(phase, phase_f);
    phase_f.add(phase, "eta-min", "lower end of the eta range");
    phase_f.add(phase, "eta-max", "upper end of the eta range");

    auto* sw = app.add_subcommand("sweep", "(eta, n) grid sweep");
    add_model_flags(sw, sweep_f);
    for (const char* k : {"gamma", "batch", "seed", "neurons", "init", "threshold", "eta-min", "eta-max", "eta-count",
                          "n-min", "n-max", "n-count", "replicates", "aggregate", "grid-is-gamma", "jobs"}) {
        sweep_f.add(sw, k, flag_help(k));
    }
    sw->add_option("--out", sweep_out, "output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (hermite->parsed()) return cmd_hermite(hermite_f.resolve(hermite), powers);
        if (gen->parsed()) return cmd_gen_data(gen_f.resolve(gen));
        if (mu->parsed()) return cmd_mu(mu_f.resolve(mu));
        if (sim->parsed()) {
            Config c = sim_f.resolve(sim);
            if (audit) c.set("audit", "true");
            return cmd_simulate(c, sim_out);
        }
        if (pred->parsed()) return cmd_predict(pred_f.resolve(pred));
        if (phase->parsed()) return cmd_phase(phase_f.resolve(phase));
        if (sw->parsed()) return cmd_sweep(sweep_f.resolve(sw), sweep_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
