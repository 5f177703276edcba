#include "silab/harness.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace silab {

std::vector<double> log_space(double lo, double hi, int count)
{
    if (count < 1 || !(lo > 0.0) || !(hi >= lo)) throw std::invalid_argument("log_space: need count >= 1 and 0 < lo <= hi");
    if (count == 1) return {lo};
    std::vector<double> out(count);
    const double a = std::log10(lo), b = std::log10(hi);
    for (int k = 0; k < count; ++k) out[k] = std::pow(10.0, a + (b - a) * k / (count - 1));
    out.front() = lo;
    out.back() = hi;
    return out;
}

std::vector<std::int64_t> log_space_int(double lo, double hi, int count)
{
    std::vector<std::int64_t> out;
    for (double v : log_space(lo, hi, count)) out.push_back(static_cast<std::int64_t>(std::llround(v)));
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

void SweepSpec::validate() const
{
    if (eta_grid.empty() || n_grid.empty()) throw std::invalid_argument("SweepSpec: grids must be nonempty");
    for (std::size_t k = 1; k < eta_grid.size(); ++k) {
        if (!(eta_grid[k] > eta_grid[k - 1])) throw std::invalid_argument("SweepSpec: eta grid must be strictly increasing");
    }
    for (std::size_t k = 1; k < n_grid.size(); ++k) {
        if (!(n_grid[k] > n_grid[k - 1])) throw std::invalid_argument("SweepSpec: n grid must be strictly increasing");
    }
    if (n_grid.front() < base.batch) throw std::invalid_argument("SweepSpec: every n must be >= batch size");
    if (replicates < 1) throw std::invalid_argument("SweepSpec: replicates must be >= 1");
    RunConfig probe = base;
    probe.n = n_grid.back();
    probe.validate();
}

namespace {

RunConfig cell_config(const SweepSpec& spec, std::size_t e)
{
    RunConfig cfg = spec.base;
    const double v = spec.eta_grid[e];
    if (spec.grid_is_gamma) {
        cfg.oracle.gamma = v;
    } else {
        cfg.oracle.eta = v;
        if (spec.auto_gamma) cfg.oracle.gamma = gamma_auto(cfg.oracle, cfg.teacher.link, cfg.teacher.dim);
    }
    cfg.n = spec.n_grid.back();
    cfg.record_every = 0;
    cfg.record_steps.clear();
    for (std::int64_t n : spec.n_grid) cfg.record_steps.push_back(n / cfg.batch);
    cfg.seed_path.push_back(e);
    return cfg;
}

} // namespace

SweepResult sweep(const SweepSpec& spec, Exec exec)
{
    spec.validate();
    const std::size_t E = spec.eta_grid.size(), G = spec.n_grid.size();
    const int R = spec.replicates;

    SweepResult res;
    res.eta_grid = spec.eta_grid;
    res.n_grid = spec.n_grid;
    res.replicates = R;
    res.threshold = spec.base.weak_threshold;
    res.aggregate = spec.aggregate;
    res.cells.resize(E * G * R);

    if (exec.jobs == 0 && spec.jobs > 0) exec.jobs = spec.jobs;
    parallel_for(
        static_cast<std::int64_t>(E * R),
        [&](std::int64_t task) {
            const std::size_t e = static_cast<std::size_t>(task) / R;
            const int r = static_cast<int>(task % R);
            RunConfig cfg = cell_config(spec, e);
            cfg.seed_path.push_back(r);
            const Trajectory tr = run(cfg);
            const std::uint64_t seed = cfg.seeds().seed();
            for (std::size_t g = 0; g < G; ++g) {
                const std::int64_t steps = spec.n_grid[g] / cfg.batch;
                SweepCell& cell = res.cells[(e * G + g) * R + r];
                cell.eta = spec.eta_grid[e];
                cell.n = spec.n_grid[g];
                cell.replicate = r;
                cell.seed = seed;
                cell.gamma = cfg.oracle.gamma;
                const auto k = tr.kappa_at(steps);
                cell.diverged = k ? 0 : 1;
                cell.final_alignment = k.value_or(std::numeric_limits<double>::quiet_NaN());
                cell.recovered = k && *k >= res.threshold ? 1 : 0;
                cell.samples_seen = (k ? steps : tr.steps_executed) * cfg.batch;
            }
        },
        exec);

    summarize(res);
    if (!spec.grid_is_gamma && spec.base.oracle.kind != OracleKind::online && spec.eta_grid.front() > 0.0) {
        const auto mus = mu_polynomials(spec.base.oracle, spec.base.teacher.link, spec.base.teacher.noise,
                                        spec.base.teacher.dim);
        if (spec.eta_grid.back() > spec.eta_grid.front()) {
            res.boundaries = phase_boundaries(mus, spec.base.oracle.kind, spec.base.teacher.dim, spec.eta_grid.front(),
                                              spec.eta_grid.back());
        }
    }
    return res;
}

void summarize(SweepResult& res)
{
    const std::size_t E = res.eta_grid.size(), G = res.n_grid.size();
    const int R = res.replicates;
    if (res.cells.size() != E * G * static_cast<std::size_t>(R)) throw std::invalid_argument("summarize: cell count mismatch");
    res.aggregates.assign(E, std::vector<double>(G));
    res.n_star.assign(E, std::nullopt);
    std::vector<double> col(R);
    for (std::size_t e = 0; e < E; ++e) {
        for (std::size_t g = 0; g < G; ++g) {
            for (int r = 0; r < R; ++r) col[r] = res.cells[(e * G + g) * R + r].final_alignment;
            res.aggregates[e][g] = res.aggregate == Aggregate::median ? median_alignment(col) : mean_alignment(col);
            if (!res.n_star[e] && res.aggregates[e][g] >= res.threshold) res.n_star[e] = res.n_grid[g];
        }
    }
}

SlopeFit fit_line(std::span<const double> x, std::span<const double> y)
{
    const std::size_t n = x.size();
    if (n < 2 || y.size() != n) throw std::invalid_argument("fit_line: need at least two paired points");
    double mx = 0.0, my = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        mx += x[k];
        my += y[k];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        sxx += (x[k] - mx) * (x[k] - mx);
        sxy += (x[k] - mx) * (y[k] - my);
    }
    if (sxx == 0.0) throw std::invalid_argument("fit_line: x values are all equal");
    SlopeFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    f.points = static_cast<int>(n);
    if (n > 2) {
        double rss = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            const double r = y[k] - f.intercept - f.slope * x[k];
            rss += r * r;
        }
        f.std_error = std::sqrt(rss / (n - 2) / sxx);
    }
    return f;
}

SlopeFit fit_boundary_slope(const SweepResult& res, double eta_lo, double eta_hi)
{
    std::vector<double> x, y;
    for (std::size_t e = 0; e < res.eta_grid.size(); ++e) {
        const double eta = res.eta_grid[e];
        if (eta < eta_lo || eta > eta_hi || !res.n_star[e]) continue;
        x.push_back(std::log(eta));
        y.push_back(std::log(static_cast<double>(*res.n_star[e])));
    }
    if (x.size() < 4) {
        std::ostringstream msg;
        msg << "fit_boundary_slope: only " << x.size() << " recovering grid points in eta window [" << eta_lo << ", "
            << eta_hi << "]; need 4";
        throw std::runtime_error(msg.str());
    }
    return fit_line(x, y);
}

KneeFit fit_knee(std::span<const double> eta, std::span<const double> n_star)
{
    if (eta.size() != n_star.size() || eta.size() < 4) throw std::invalid_argument("fit_knee: need at least four points");
    std::vector<double> lx(eta.size()), ly(eta.size());
    for (std::size_t k = 0; k < eta.size(); ++k) {
        lx[k] = std::log(eta[k]);
        ly[k] = std::log(n_star[k]);
    }
    const double lo = *std::min_element(lx.begin(), lx.end());
    const double hi = *std::max_element(lx.begin(), lx.end());
    KneeFit best;
    best.rss = std::numeric_limits<double>::infinity();
    const int candidates = 2000;
    for (int s = 0; s <= candidates; ++s) {
        const double knee = lo + (hi - lo) * s / candidates;
        // Regress ly on [1, max(0, lx - knee)].
        double n = 0, sh = 0, shh = 0, sy = 0, shy = 0;
        for (std::size_t k = 0; k < lx.size(); ++k) {
            const double h = std::max(0.0, lx[k] - knee);
            n += 1;
            sh += h;
            shh += h * h;
            sy += ly[k];
            shy += h * ly[k];
        }
        const double det = n * shh - sh * sh;
        double c, slope;
        if (std::abs(det) < 1e-12) {
            c = sy / n;
            slope = 0.0;
        } else {
            c = (shh * sy - sh * shy) / det;
            slope = (n * shy - sh * sy) / det;
        }
        double rss = 0.0;
        for (std::size_t k = 0; k < lx.size(); ++k) {
            const double r = ly[k] - c - slope * std::max(0.0, lx[k] - knee);
            rss += r * r;
        }
        if (rss < best.rss - 1e-12) {
            best.rss = rss;
            best.eta_knee = std::exp(knee);
            best.flat_level = std::exp(c);
            best.slope = slope;
        }
    }
    return best;
}

KneeFit fit_knee(const SweepResult& res)
{
    std::vector<double> x, y;
    for (std::size_t e = 0; e < res.eta_grid.size(); ++e) {
        if (!res.n_star[e]) continue;
        x.push_back(res.eta_grid[e]);
        y.push_back(static_cast<double>(*res.n_star[e]));
    }
    return fit_knee(x, y);
}

namespace {

std::string fmt(double v)
{
    if (std::isnan(v)) return "nan";
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

} // namespace

void write_cells_csv(const SweepResult& res, std::ostream& os)
{
    os << "eta,n,replicate,seed,final_alignment,recovered,samples_seen,diverged\n";
    for (const auto& c : res.cells) {
        os << fmt(c.eta) << ',' << c.n << ',' << c.replicate << ',' << c.seed << ',' << fmt(c.final_alignment) << ','
           << c.recovered << ',' << c.samples_seen << ',' << c.diverged << '\n';
    }
}

void write_summary_csv(const SweepResult& res, std::ostream& os)
{
    os << "eta,n_star\n";
    for (std::size_t e = 0; e < res.eta_grid.size(); ++e) {
        os << fmt(res.eta_grid[e]) << ',';
        if (res.n_star[e]) os << *res.n_star[e];
        else os << "none";
        os << '\n';
    }
}

void write_phase_csv(const SweepResult& res, std::ostream& os)
{
    os << "i,j,eta_star\n";
    for (const auto& b : res.boundaries) os << b.i << ',' << b.j << ',' << fmt(b.eta_star) << '\n';
}

void write_plotdata(const SweepResult& res, std::ostream& os)
{
    os << "eta";
    for (std::int64_t n : res.n_grid) os << ' ' << n;
    os << '\n';
    for (std::size_t e = 0; e < res.eta_grid.size(); ++e) {
        os << fmt(res.eta_grid[e]);
        for (double v : res.aggregates[e]) os << ' ' << fmt(v >= res.threshold ? v : 0.0);
        os << '\n';
    }
}

void write_markers(const SweepResult& res, std::ostream& os)
{
    os << "i,j,eta_star,exponent,active,degenerate\n";
    for (const auto& b : res.boundaries) {
        os << b.i << ',' << b.j << ',' << fmt(b.eta_star) << ',' << (b.exponent ? fmt(*b.exponent) : "none") << ','
           << (b.active ? 1 : 0) << ',' << (b.degenerate ? 1 : 0) << '\n';
    }
}

void emit(const SweepResult& res, const std::string& dir)
{
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    auto write = [&](const char* name, void (*fn)(const SweepResult&, std::ostream&)) {
        const fs::path p = fs::path(dir) / name;
        std::ofstream os(p);
        if (!os) throw std::runtime_error("emit: cannot open " + p.string());
        fn(res, os);
        if (!os) throw std::runtime_error("emit: write failed for " + p.string());
    };
    write("cells.csv", write_cells_csv);
    write("summary.csv", write_summary_csv);
    write("phase.csv", write_phase_csv);
    write("grid.plotdata", write_plotdata);
    write("grid.markers", write_markers);
}

std::vector<SweepCell> read_cells_csv(std::istream& is)
{
    std::vector<SweepCell> out;
    std::string line;
    if (!std::getline(is, line)) return out;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string f[8];
        for (auto& s : f) {
            if (!std::getline(ls, s, ',')) throw std::runtime_error("read_cells_csv: short row '" + line + "'");
        }
        SweepCell c;
        c.eta = std::stod(f[0]);
        c.n = std::stoll(f[1]);
        c.replicate = std::stoi(f[2]);
        c.seed = std::stoull(f[3]);
        c.final_alignment = f[4] == "nan" ? std::numeric_limits<double>::quiet_NaN() : std::stod(f[4]);
        c.recovered = std::stoi(f[5]);
        c.samples_seen = std::stoll(f[6]);
        c.diverged = std::stoi(f[7]);
        out.push_back(c);
    }
    return out;
}

} // namespace silab
