#include "silab/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace silab {

OracleKind parse_oracle_kind(const std::string& name)
{
    if (name == "online") return OracleKind::online;
    if (name == "batch_reuse" || name == "batch-reuse") return OracleKind::batch_reuse;
    if (name == "alternating") return OracleKind::alternating;
    if (name == "deep_alternating" || name == "deep-alternating" || name == "deep") return OracleKind::deep_alternating;
    throw std::invalid_argument("unknown oracle '" + name + "'");
}

std::string to_string(OracleKind kind)
{
    switch (kind) {
    case OracleKind::online: return "online";
    case OracleKind::batch_reuse: return "batch_reuse";
    case OracleKind::alternating: return "alternating";
    case OracleKind::deep_alternating: return "deep_alternating";
    }
    return "online";
}

void OracleSpec::validate() const
{
    if (!(eta >= 0.0) || !std::isfinite(eta)) throw std::invalid_argument("OracleSpec: eta must be finite and >= 0");
    if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw std::invalid_argument("OracleSpec: gamma must be finite and >= 0");
    if (kind == OracleKind::deep_alternating && depth < 2) throw std::invalid_argument("OracleSpec: depth must be >= 2");
    if (degree_bound < 0) throw std::invalid_argument("OracleSpec: degree bound must be >= 0");
    if (kind == OracleKind::deep_alternating) {
        // The composed activation sigma^{o(D-1)} must respect the degree cap.
        long long deg = 1;
        for (int i = 1; i < depth; ++i) {
            deg *= std::max(1, activation.degree());
            if (deg > kMaxDegree) throw DegreeOverflow("OracleSpec: depth x degree exceeds the degree cap");
        }
    }
}

UpdateOracle::UpdateOracle(OracleSpec spec)
    : spec_(std::move(spec)), sigma_(spec_.activation), dsigma_(spec_.activation.derivative())
{
    spec_.validate();
}

double UpdateOracle::alternating_transient(double y, double z) const
{
    return spec_.layer_scalar(0) + spec_.eta * y * sigma_(z);
}

std::vector<double> UpdateOracle::deep_transients(double y, double z) const
{
    const int layers = spec_.depth - 1;
    std::vector<double> f(layers); // f[i-1] = F_{i-1}(z)
    f[0] = z;
    for (int i = 1; i < layers; ++i) f[i] = spec_.layer_scalar(i - 1) * sigma_(f[i - 1]);

    // suffix[i-1] = prod_{j=i+1}^{D-1} a^(j) sigma'(F_{j-1})
    std::vector<double> suffix(layers, 1.0);
    for (int i = layers - 1; i >= 1; --i) suffix[i - 1] = (spec_.layer_scalar(i) * dsigma_(f[i])) * suffix[i];

    std::vector<double> out(layers);
    for (int i = 1; i <= layers; ++i) {
        out[i - 1] = spec_.layer_scalar(i - 1) + spec_.eta * y * suffix[i - 1] * sigma_(f[i - 1]);
    }
    return out;
}

double UpdateOracle::deep_psi(double y, double z) const
{
    const auto transients = deep_transients(y, z);
    double fprev = z;
    double psi = y;
    for (std::size_t i = 0; i < transients.size(); ++i) {
        psi *= transients[i];
        psi *= dsigma_(fprev);
        fprev = spec_.layer_scalar(static_cast<int>(i)) * sigma_(fprev);
    }
    return psi;
}

double UpdateOracle::psi(double y, double z, double x_perp_sq) const
{
    switch (spec_.kind) {
    case OracleKind::online:
        return y * dsigma_(z);
    case OracleKind::batch_reuse: {
        // <x, w~> with w~ = w + eta y sigma'(z) P_w x, and <x, P_w x> = ||P_w x||^2.
        const double z_tilde = z + spec_.eta * y * dsigma_(z) * x_perp_sq;
        return y * dsigma_(z_tilde);
    }
    case OracleKind::alternating: {
        const double a_tilde = alternating_transient(y, z);
        return y * a_tilde * dsigma_(z);
    }
    case OracleKind::deep_alternating:
        return deep_psi(y, z);
    }
    return 0.0;
}

StepStatus apply_projected_update_inplace(std::span<double> w, std::span<double> acc, double count, double gamma,
                                          double& pre_norm)
{
    const std::size_t d = w.size();
    const double inv = 1.0 / count;
    double along = 0.0;
    for (std::size_t k = 0; k < d; ++k) along += w[k] * acc[k];
    along *= inv;
    for (std::size_t k = 0; k < d; ++k) acc[k] = acc[k] * inv - along * w[k];

    double sq = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
        const double v = w[k] + gamma * acc[k];
        sq += v * v;
    }
    const double n = std::sqrt(sq);
    pre_norm = n;
    if (!std::isfinite(n) || n >= kDivergenceNorm) return StepStatus::diverged;
    if (n == 0.0) return StepStatus::rejected;
    for (std::size_t k = 0; k < d; ++k) w[k] = (w[k] + gamma * acc[k]) / n;
    return StepStatus::ok;
}

StepResult apply_projected_update(std::span<const double> w, std::span<const double> sum_psi_x, double count,
                                  double gamma)
{
    StepResult out;
    out.w.assign(w.begin(), w.end());
    out.raw_update.assign(sum_psi_x.begin(), sum_psi_x.end());
    const StepStatus status = apply_projected_update_inplace(out.w, out.raw_update, count, gamma, out.pre_norm);
    out.rejected = status == StepStatus::rejected;
    out.diverged = status == StepStatus::diverged;
    return out;
}

namespace {

StepResult single_sample_step(std::span<const double> w, const Sample& sample, const UpdateOracle& oracle)
{
    const double z = dot(sample.x, w);
    const double xx = dot(sample.x, sample.x);
    const double psi = oracle.psi(sample.y, z, xx - z * z);
    std::vector<double> acc(sample.x.size());
    for (std::size_t k = 0; k < acc.size(); ++k) acc[k] = psi * sample.x[k];
    return apply_projected_update(w, acc, 1.0, oracle.spec().gamma);
}

void check_dims(std::span<const double> w, const Sample& sample)
{
    if (w.size() != sample.x.size()) throw std::invalid_argument("step: weight and sample dimensions differ");
}

} // namespace

StepResult step_online(std::span<const double> w, const Sample& sample, const OracleSpec& spec)
{
    check_dims(w, sample);
    OracleSpec s = spec;
    s.kind = OracleKind::online;
    return single_sample_step(w, sample, UpdateOracle(s));
}

StepResult step_batch_reuse(std::span<const double> w, const Sample& sample, const OracleSpec& spec)
{
    check_dims(w, sample);
    OracleSpec s = spec;
    s.kind = OracleKind::batch_reuse;
    return single_sample_step(w, sample, UpdateOracle(s));
}

AlternatingStep step_alternating(std::span<const double> w, double a, const Sample& sample, const OracleSpec& spec)
{
    check_dims(w, sample);
    OracleSpec s = spec;
    s.kind = OracleKind::alternating;
    s.layer_scalars = {a};
    UpdateOracle oracle(s);
    AlternatingStep out;
    out.a = a;
    out.a_transient = oracle.alternating_transient(sample.y, dot(sample.x, w));
    out.step = single_sample_step(w, sample, oracle);
    return out;
}

DeepStep step_deep_alternating(std::span<const double> w, std::span<const double> layer_scalars, const Sample& sample,
                               const OracleSpec& spec)
{
    check_dims(w, sample);
    OracleSpec s = spec;
    s.kind = OracleKind::deep_alternating;
    s.layer_scalars.assign(layer_scalars.begin(), layer_scalars.end());
    UpdateOracle oracle(s);
    DeepStep out;
    out.layer_scalars.assign(layer_scalars.begin(), layer_scalars.end());
    out.transients = oracle.deep_transients(sample.y, dot(sample.x, w));
    out.step = single_sample_step(w, sample, oracle);
    return out;
}

const MonomialPoly& BivariatePoly::coeff(int k) const
{
    static const MonomialPoly zero;
    return k >= 0 && k < static_cast<int>(terms.size()) ? terms[k] : zero;
}

double BivariatePoly::operator()(double y, double z) const
{
    double acc = 0.0;
    for (auto it = terms.rbegin(); it != terms.rend(); ++it) acc = acc * y + (*it)(z);
    return acc;
}

namespace {

BivariatePoly multiply(const BivariatePoly& a, const BivariatePoly& b)
{
    BivariatePoly out;
    if (a.terms.empty() || b.terms.empty()) return out;
    out.terms.assign(a.terms.size() + b.terms.size() - 1, MonomialPoly{});
    for (std::size_t i = 0; i < a.terms.size(); ++i) {
        if (a.terms[i].is_zero()) continue;
        for (std::size_t j = 0; j < b.terms.size(); ++j) out.terms[i + j] += a.terms[i] * b.terms[j];
    }
    return out;
}

double factorial(int k)
{
    double f = 1.0;
    for (int j = 2; j <= k; ++j) f *= j;
    return f;
}

double binomial(int n, int k)
{
    double r = 1.0;
    for (int j = 1; j <= k; ++j) r = r * (n - k + j) / j;
    return r;
}

} // namespace

BivariatePoly effective_psi_unit_eta(const OracleSpec& spec, int dim)
{
    spec.validate();
    const MonomialPoly& sigma = spec.activation;
    const MonomialPoly dsigma = sigma.derivative();
    BivariatePoly psi;
    switch (spec.kind) {
    case OracleKind::online:
        psi.terms = {MonomialPoly{}, dsigma};
        break;
    case OracleKind::alternating:
        psi.terms = {MonomialPoly{}, spec.layer_scalar(0) * dsigma, sigma * dsigma};
        break;
    case OracleKind::batch_reuse: {
        psi.terms = {MonomialPoly{}};
        const int kmax = std::max(1, sigma.degree());
        MonomialPoly dpow = MonomialPoly::constant(1.0); // (sigma')^{k-1}
        for (int k = 1; k <= kmax; ++k) {
            const double scale = std::pow(static_cast<double>(dim), k - 1) / factorial(k - 1);
            psi.terms.push_back(scale * (sigma.derivative(k) * dpow));
            dpow = dpow * dsigma;
        }
        break;
    }
    case OracleKind::deep_alternating: {
        const int layers = spec.depth - 1;
        std::vector<MonomialPoly> f(layers); // F_{i-1}
        f[0] = MonomialPoly::monomial(1);
        for (int i = 1; i < layers; ++i) f[i] = spec.layer_scalar(i - 1) * sigma.compose(f[i - 1]);
        std::vector<MonomialPoly> suffix(layers, MonomialPoly::constant(1.0));
        for (int i = layers - 1; i >= 1; --i) suffix[i - 1] = spec.layer_scalar(i) * dsigma.compose(f[i]) * suffix[i];

        BivariatePoly acc;
        acc.terms = {MonomialPoly{}, MonomialPoly::constant(1.0)}; // y
        for (int i = 1; i <= layers; ++i) {
            const MonomialPoly ds = dsigma.compose(f[i - 1]);
            BivariatePoly factor;
            factor.terms = {spec.layer_scalar(i - 1) * ds, suffix[i - 1] * sigma.compose(f[i - 1]) * ds};
            acc = multiply(acc, factor);
        }
        psi = std::move(acc);
        break;
    }
    }
    while (psi.terms.size() > 1 && psi.terms.back().is_zero()) psi.terms.pop_back();
    return psi;
}

BivariatePoly effective_psi(const OracleSpec& spec, int dim)
{
    BivariatePoly psi = effective_psi_unit_eta(spec, dim);
    for (std::size_t k = 2; k < psi.terms.size(); ++k) psi.terms[k] *= std::pow(spec.eta, static_cast<double>(k - 1));
    return psi;
}

std::vector<MonomialPoly> mu_polynomials(const OracleSpec& spec, const MonomialPoly& link, const NoiseSpec& noise, int dim)
{
    const BivariatePoly psi = effective_psi_unit_eta(spec, dim);

    struct Term
    {
        int k;
        HermiteExpansion label; // u_i of E_zeta (link + zeta)^k
        HermiteExpansion act;   // u_j of q_k
    };
    std::vector<Term> terms;
    int r_auto = 0;
    MonomialPoly link_pow = MonomialPoly::constant(1.0);
    std::vector<MonomialPoly> link_powers{link_pow};
    for (int k = 1; k <= psi.y_degree(); ++k) {
        link_powers.push_back(link_powers.back() * link);
        if (psi.terms[k].is_zero()) continue;
        MonomialPoly label;
        for (int l = 0; l <= k; ++l) {
            const double m = noise.moment(k - l);
            if (m != 0.0) label += binomial(k, l) * m * link_powers[l];
        }
        Term t{k, expand(label), expand(psi.terms[k])};
        r_auto = std::max(r_auto, std::min(label.degree(), psi.terms[k].degree() + 1));
        terms.push_back(std::move(t));
    }

    const int r = spec.degree_bound > 0 ? spec.degree_bound : std::max(1, r_auto);
    std::vector<MonomialPoly> mus(r);
    for (int i = 1; i <= r; ++i) {
        std::vector<double> coeffs;
        for (const auto& t : terms) {
            const double c = t.label[i] * t.act[i - 1];
            if (c == 0.0) continue;
            if (static_cast<int>(coeffs.size()) < t.k) coeffs.resize(t.k, 0.0);
            coeffs[t.k - 1] += c;
        }
        mus[i - 1] = MonomialPoly(std::move(coeffs));
    }
    return mus;
}

double dimension_penalty(int i, int dim)
{
    return i <= 2 ? 1.0 : std::pow(static_cast<double>(dim), (i - 2) / 2.0);
}

SignCheck check_sign_assumption(std::span<const double> mus, int dim)
{
    double mx = 0.0;
    for (double m : mus) mx = std::max(mx, std::abs(m));
    if (mx == 0.0) throw DegenerateOracle("check_sign_assumption: every mu_i vanishes");
    const double zero_tol = 1e-12 * mx;

    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < mus.size(); ++i) {
        if (std::abs(mus[i]) <= zero_tol) continue;
        best = std::min(best, dimension_penalty(static_cast<int>(i) + 1, dim) / std::abs(mus[i]));
    }
    SignCheck out;
    out.pass = true;
    for (std::size_t i = 0; i < mus.size(); ++i) {
        if (std::abs(mus[i]) <= zero_tol) continue;
        const double v = dimension_penalty(static_cast<int>(i) + 1, dim) / std::abs(mus[i]);
        if (v <= best * (1.0 + 1e-12)) {
            out.istar.push_back(static_cast<int>(i) + 1);
            if (!(mus[i] > 0.0)) out.pass = false;
        }
    }
    return out;
}

MuTable mu_table(const OracleSpec& spec, const MonomialPoly& link, const NoiseSpec& noise, int dim)
{
    const auto polys = mu_polynomials(spec, link, noise, dim);
    MuTable table;
    table.mus.reserve(polys.size());
    for (const auto& p : polys) table.mus.push_back(p(spec.eta));
    bool any = std::any_of(table.mus.begin(), table.mus.end(), [](double m) { return m != 0.0; });
    if (any) table.istar = check_sign_assumption(table.mus, dim).istar;
    return table;
}

} // namespace silab
