#include "silab/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace silab {

double dimension_exponent(int i) { return i <= 2 ? 0.0 : (i - 2) / 2.0; }

namespace {

double positive_floor(std::span<const double> mus)
{
    double mx = 0.0;
    for (double m : mus) mx = std::max(mx, std::abs(m));
    return 1e-12 * mx;
}

} // namespace

Prediction predict_T(std::span<const double> mus, double gamma, int dim)
{
    if (!(gamma > 0.0)) throw std::invalid_argument("predict_T: gamma must be positive");
    const double d = dim;
    const double floor = positive_floor(mus);
    Prediction p;
    p.T = p.T_opt = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < mus.size(); ++k) {
        const int i = static_cast<int>(k) + 1;
        const double mu = mus[k];
        if (!(mu > floor)) continue;
        const double e = dimension_exponent(i);
        const double t = std::pow(d, e) / (gamma * mu);
        const double t_opt = std::pow(d, std::max(i - 1, 1)) / (mu * mu);
        p.T_per_i.emplace_back(i, t);
        p.T_opt_per_i.emplace_back(i, t_opt);
        if (t < p.T) {
            p.T = t;
            p.dominant_i = i;
        }
        if (t_opt < p.T_opt) {
            p.T_opt = t_opt;
            p.dominant_opt_i = i;
        }
        p.gamma_max = std::max(p.gamma_max, mu * std::pow(d, -(e + 1.0)));
    }
    if (p.T_per_i.empty()) throw NoPrediction("predict_T: no positive mu_i");
    p.T_at_gamma_max = std::numeric_limits<double>::infinity();
    for (const auto& [i, t] : p.T_per_i) p.T_at_gamma_max = std::min(p.T_at_gamma_max, t * gamma / p.gamma_max);
    return p;
}

int dominant_index(std::span<const MonomialPoly> mus, int dim, double eta)
{
    std::vector<double> v(mus.size());
    for (std::size_t k = 0; k < mus.size(); ++k) v[k] = mus[k](eta);
    const double floor = positive_floor(v);
    int best = 0;
    double best_score = -1.0;
    for (std::size_t k = 0; k < v.size(); ++k) {
        if (!(v[k] > floor)) continue;
        const double score = v[k] * std::pow(static_cast<double>(dim), -dimension_exponent(static_cast<int>(k) + 1));
        if (score > best_score) {
            best_score = score;
            best = static_cast<int>(k) + 1;
        }
    }
    return best;
}

namespace {

/// (power of eta, coefficient) when p has exactly one nonzero coefficient.
std::optional<int> monomial_power(const MonomialPoly& p)
{
    std::optional<int> power;
    for (int k = 0; k <= p.degree(); ++k) {
        if (p[k] == 0.0) continue;
        if (power) return std::nullopt;
        power = k;
    }
    return power;
}

} // namespace

std::vector<PhaseBoundary> phase_boundaries(std::span<const MonomialPoly> mus, OracleKind kind, int dim, double eta_lo,
                                            double eta_hi, int scan_points)
{
    if (!(eta_lo > 0.0 && eta_hi > eta_lo)) throw std::invalid_argument("phase_boundaries: need 0 < eta_lo < eta_hi");
    if (scan_points < 2) throw std::invalid_argument("phase_boundaries: need at least two scan points");
    const double d = dim;
    const int r = static_cast<int>(mus.size());
    auto score = [&](int i, double eta) { return mus[i - 1](eta) * std::pow(d, -dimension_exponent(i)); };

    std::vector<double> grid(scan_points);
    const double l0 = std::log(eta_lo), l1 = std::log(eta_hi);
    for (int s = 0; s < scan_points; ++s) grid[s] = std::exp(l0 + (l1 - l0) * s / (scan_points - 1));

    std::vector<PhaseBoundary> out;
    for (int i = 1; i <= r; ++i) {
        for (int j = i + 1; j <= r; ++j) {
            auto f = [&](double eta) -> std::optional<double> {
                const double si = score(i, eta), sj = score(j, eta);
                if (!(si > 0.0) || !(sj > 0.0)) return std::nullopt;
                return std::log(si) - std::log(sj);
            };
            for (int s = 0; s + 1 < scan_points; ++s) {
                const auto fa = f(grid[s]);
                const auto fb = f(grid[s + 1]);
                if (!fa || !fb) continue;
                double root;
                if (*fa == 0.0) {
                    root = grid[s];
                } else if ((*fa < 0.0) == (*fb < 0.0) || *fb == 0.0) {
                    continue;
                } else {
                    double lo = std::log(grid[s]), hi = std::log(grid[s + 1]);
                    const bool lo_negative = *fa < 0.0;
                    for (int it = 0; it < 200 && hi - lo > 1e-14; ++it) {
                        const double mid = 0.5 * (lo + hi);
                        const auto fm = f(std::exp(mid));
                        if (!fm) break;
                        if (*fm == 0.0) {
                            lo = hi = mid;
                            break;
                        }
                        if ((*fm < 0.0) == lo_negative) lo = mid;
                        else hi = mid;
                    }
                    root = std::exp(0.5 * (lo + hi));
                }
                PhaseBoundary b;
                b.i = i;
                b.j = j;
                b.eta_star = root;
                const auto mi = monomial_power(mus[i - 1]);
                const auto mj = monomial_power(mus[j - 1]);
                if (mi && mj && *mi != *mj) {
                    const double si = kind == OracleKind::batch_reuse ? *mi : 0.0;
                    const double sj = kind == OracleKind::batch_reuse ? *mj : 0.0;
                    b.exponent = ((si - dimension_exponent(i)) - (sj - dimension_exponent(j))) / (*mj - *mi);
                    b.degenerate = kind == OracleKind::batch_reuse && dimension_exponent(i) == dimension_exponent(j);
                }
                const int below = dominant_index(mus, dim, root * (1.0 - 1e-6));
                const int above = dominant_index(mus, dim, root * (1.0 + 1e-6));
                b.active = below != above && ((below == i && above == j) || (below == j && above == i));
                out.push_back(b);
            }
        }
    }
    std::sort(out.begin(), out.end(), [](const PhaseBoundary& a, const PhaseBoundary& b) { return a.eta_star < b.eta_star; });
    return out;
}

std::optional<std::int64_t> recursion_oracle(std::span<const double> mus, double gamma, int dim, double c_target,
                                             std::int64_t t_max, RecursionOptions options)
{
    if (!(c_target > 0.0 && c_target < 1.0)) throw std::invalid_argument("recursion_oracle: c_target must lie in (0, 1)");
    std::vector<double> weights(mus.size());
    double fact = 1.0;
    for (std::size_t k = 0; k < mus.size(); ++k) {
        if (k > 0) fact *= static_cast<double>(k);
        double mu = mus[k];
        if (!options.include_negative && mu < 0.0) mu = 0.0;
        weights[k] = options.factorial_weights ? mu / fact : mu;
    }
    double alpha = 1.0 / std::sqrt(static_cast<double>(dim));
    if (alpha >= c_target) return 0;
    for (std::int64_t t = 1; t <= t_max; ++t) {
        double drift = 0.0, pow = 1.0;
        for (double w : weights) {
            drift += w * pow;
            pow *= alpha;
        }
        if (options.sphere_factor) drift *= 1.0 - alpha * alpha;
        alpha += gamma * drift;
        if (!std::isfinite(alpha)) return std::nullopt;
        if (alpha >= c_target) return t;
    }
    return std::nullopt;
}

namespace {

void note(LemmaReport& rep, double rel)
{
    ++rep.checked;
    rep.max_violation = std::max(rep.max_violation, rel);
    if (rel > kLemmaTolerance) ++rep.violations;
}

void check_params(double a, double c)
{
    if (!(a > 0.0) || !(c > 0.0)) throw std::invalid_argument("lemma check: a and c must be positive");
}

double upper_window(double a, double c, int k) { return 1.0 / (c * (k - 2) * std::pow(a, k - 2)); }
double lower_window(double a, double c, int k) { return (std::pow(a, -(k - 2)) - c) / (c * (k - 2)); }

double bl_upper(double a, double c, int k, double t)
{
    const double base = 1.0 - (k - 2) * c * std::pow(a, k - 2) * t;
    return base > 0.0 ? a / std::pow(base, 1.0 / (k - 2)) : std::numeric_limits<double>::infinity();
}

double bl_lower(double a, double c, int k, double t)
{
    return a / std::pow(1.0 - 0.5 * c * std::pow(a, k - 2) * t, 1.0 / (k - 2));
}

} // namespace

LemmaReport gronwall_check(double a, double c, std::int64_t t_max)
{
    check_params(a, c);
    std::vector<double> m;
    double sum = 0.0;
    for (std::int64_t t = 0; t <= t_max; ++t) {
        const double v = a + c * sum;
        if (!std::isfinite(v)) break;
        m.push_back(v);
        sum += v;
    }
    LemmaReport up = gronwall_check_sequence(m, a, c, true);
    const LemmaReport lo = gronwall_check_sequence(m, a, c, false);
    up.checked += lo.checked;
    up.violations += lo.violations;
    up.max_violation = std::max(up.max_violation, lo.max_violation);
    up.truncated = static_cast<std::int64_t>(m.size()) <= t_max;
    return up;
}

LemmaReport gronwall_check_sequence(std::span<const double> m, double a, double c, bool upper)
{
    check_params(a, c);
    LemmaReport rep;
    for (std::size_t t = 0; t < m.size(); ++t) {
        const double bound = a * std::pow(1.0 + c, static_cast<double>(t));
        if (!std::isfinite(bound)) break;
        if (upper) {
            note(rep, (m[t] - bound) / bound);
            const double loose = a * std::exp(c * static_cast<double>(t));
            if (std::isfinite(loose)) note(rep, (bound - loose) / loose);
        } else {
            note(rep, (bound - m[t]) / bound);
        }
    }
    return rep;
}

LemmaReport bihari_lasalle_check(double a, double c, int k, std::int64_t t_max)
{
    check_params(a, c);
    if (k < 3) throw std::invalid_argument("bihari_lasalle_check: k must be >= 3");
    const double window = std::max(upper_window(a, c, k), lower_window(a, c, k));
    const std::int64_t horizon = std::min<std::int64_t>(t_max, static_cast<std::int64_t>(std::ceil(window)));
    std::vector<double> m;
    double sum = 0.0;
    for (std::int64_t t = 0; t <= horizon; ++t) {
        const double v = a + c * sum;
        if (!std::isfinite(v)) break;
        m.push_back(v);
        sum += std::pow(v, k - 1);
    }
    LemmaReport up = bihari_lasalle_check_sequence(m, a, c, k, true);
    const LemmaReport lo = bihari_lasalle_check_sequence(m, a, c, k, false);
    up.checked += lo.checked;
    up.violations += lo.violations;
    up.max_violation = std::max(up.max_violation, lo.max_violation);
    up.truncated = horizon < t_max;
    return up;
}

LemmaReport bihari_lasalle_check_sequence(std::span<const double> m, double a, double c, int k, bool upper)
{
    check_params(a, c);
    if (k < 3) throw std::invalid_argument("bihari_lasalle_check: k must be >= 3");
    LemmaReport rep;
    const double window = upper ? upper_window(a, c, k) : lower_window(a, c, k);
    for (std::size_t t = 0; t < m.size(); ++t) {
        const double td = static_cast<double>(t);
        if (upper) {
            // At the window edge the bound is +infinity and holds trivially.
            if (td > window) break;
            const double bound = bl_upper(a, c, k, td);
            if (std::isfinite(bound)) note(rep, (m[t] - bound) / bound);
            else note(rep, -1.0);
        } else {
            if (!(td < window)) break;
            const double bound = bl_lower(a, c, k, td);
            note(rep, (bound - m[t]) / bound);
        }
    }
    return rep;
}

namespace {

double ie_scale(const MonomialPoly& link, int power, int dim)
{
    const auto p = information_exponent(expand(link.pow(power)));
    if (!p) return 0.0;
    return std::pow(static_cast<double>(dim), -std::max(*p / 2.0, 1.0));
}

} // namespace

double gamma_auto(const OracleSpec& spec, const MonomialPoly& link, int dim, GammaMode mode, double eps)
{
    spec.validate();
    if (dim < 1) throw std::invalid_argument("gamma_auto: dimension must be positive");
    const double d = dim;
    double g = 0.0;
    switch (spec.kind) {
    case OracleKind::online:
        g = ie_scale(link, 1, dim);
        break;
    case OracleKind::alternating:
        g = std::max(ie_scale(link, 1, dim), spec.eta * ie_scale(link, 2, dim));
        break;
    case OracleKind::batch_reuse: {
        const int r = std::max(1, spec.activation.degree());
        for (int i = 1; i <= r; ++i) g = std::max(g, std::pow(spec.eta * d, i - 1) * ie_scale(link, i, dim));
        break;
    }
    case OracleKind::deep_alternating:
        for (int j = 1; j <= spec.depth; ++j) g = std::max(g, std::pow(spec.eta, j - 1) * ie_scale(link, j, dim));
        break;
    }
    if (mode == GammaMode::strong) {
        if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("gamma_auto: eps must lie in (0, 1)");
        g *= eps;
    }
    return g;
}

} // namespace silab
