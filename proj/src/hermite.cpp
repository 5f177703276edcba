#include "silab/hermite.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>

namespace silab {

namespace {

void check_degree(int degree, const char* what)
{
    if (degree > kMaxDegree) {
        throw DegreeOverflow(std::string(what) + ": degree " + std::to_string(degree) +
                             " exceeds cap " + std::to_string(kMaxDegree));
    }
}

// (j-1)!! for even j, for j up to 2 * kMaxDegree.
const std::vector<double>& moment_table()
{
    static const std::vector<double> table = [] {
        std::vector<double> t(2 * kMaxDegree + 1, 0.0);
        t[0] = 1.0;
        for (int j = 2; j <= 2 * kMaxDegree; j += 2) t[j] = t[j - 2] * (j - 1);
        return t;
    }();
    return table;
}

// j! / (j-k)!
double falling_factorial(int j, int k)
{
    double r = 1.0;
    for (int i = 0; i < k; ++i) r *= (j - i);
    return r;
}

std::string trim_copy(const std::string& s)
{
    auto b = s.find_first_not_of(" \t");
    auto e = s.find_last_not_of(" \t");
    return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
}

} // namespace

MonomialPoly::MonomialPoly(std::vector<double> coeffs) : coeffs_(std::move(coeffs))
{
    if (coeffs_.empty()) coeffs_.push_back(0.0);
    trim();
    check_degree(degree(), "MonomialPoly");
}

void MonomialPoly::trim()
{
    while (coeffs_.size() > 1 && coeffs_.back() == 0.0) coeffs_.pop_back();
}

MonomialPoly MonomialPoly::monomial(int k, double c)
{
    check_degree(k, "monomial");
    std::vector<double> v(k + 1, 0.0);
    v[k] = c;
    return MonomialPoly(std::move(v));
}

MonomialPoly MonomialPoly::hermite(int k)
{
    check_degree(k, "hermite");
    MonomialPoly prev = constant(1.0);
    if (k == 0) return prev;
    MonomialPoly cur = monomial(1);
    const MonomialPoly z = monomial(1);
    for (int j = 1; j < k; ++j) {
        MonomialPoly next = z * cur - prev * static_cast<double>(j);
        prev = std::move(cur);
        cur = std::move(next);
    }
    return cur;
}

double MonomialPoly::operator()(double z) const
{
    double acc = 0.0;
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * z + *it;
    return acc;
}

MonomialPoly MonomialPoly::derivative(int order) const
{
    if (order <= 0) return *this;
    if (order > degree()) return MonomialPoly{};
    std::vector<double> out(coeffs_.size() - order);
    for (std::size_t j = order; j < coeffs_.size(); ++j) {
        out[j - order] = coeffs_[j] * falling_factorial(static_cast<int>(j), order);
    }
    return MonomialPoly(std::move(out));
}

MonomialPoly MonomialPoly::pow(int k) const
{
    if (k < 0) throw std::invalid_argument("MonomialPoly::pow: negative exponent");
    if (k == 0) return constant(1.0);
    if (!is_zero()) check_degree(degree() * k, "pow");
    MonomialPoly result = constant(1.0);
    for (int i = 0; i < k; ++i) result = result * *this;
    return result;
}

MonomialPoly MonomialPoly::compose(const MonomialPoly& inner) const
{
    if (!is_constant() && !inner.is_constant()) check_degree(degree() * inner.degree(), "compose");
    MonomialPoly acc;
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) {
        acc = acc * inner + constant(*it);
    }
    return acc;
}

MonomialPoly& MonomialPoly::operator+=(const MonomialPoly& other)
{
    if (other.coeffs_.size() > coeffs_.size()) coeffs_.resize(other.coeffs_.size(), 0.0);
    for (std::size_t j = 0; j < other.coeffs_.size(); ++j) coeffs_[j] += other.coeffs_[j];
    trim();
    return *this;
}

MonomialPoly& MonomialPoly::operator-=(const MonomialPoly& other)
{
    if (other.coeffs_.size() > coeffs_.size()) coeffs_.resize(other.coeffs_.size(), 0.0);
    for (std::size_t j = 0; j < other.coeffs_.size(); ++j) coeffs_[j] -= other.coeffs_[j];
    trim();
    return *this;
}

MonomialPoly& MonomialPoly::operator*=(double s)
{
    for (auto& c : coeffs_) c *= s;
    trim();
    return *this;
}

MonomialPoly operator*(const MonomialPoly& a, const MonomialPoly& b)
{
    if (a.is_zero() || b.is_zero()) return MonomialPoly{};
    check_degree(a.degree() + b.degree(), "multiply");
    std::vector<double> out(a.coeffs_.size() + b.coeffs_.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.coeffs_.size(); ++i) {
        if (a.coeffs_[i] == 0.0) continue;
        for (std::size_t j = 0; j < b.coeffs_.size(); ++j) out[i + j] += a.coeffs_[i] * b.coeffs_[j];
    }
    return MonomialPoly(std::move(out));
}

std::string MonomialPoly::to_string() const
{
    std::ostringstream os;
    os.precision(17);
    for (std::size_t j = 0; j < coeffs_.size(); ++j) {
        if (j) os << ',';
        os << coeffs_[j];
    }
    return os.str();
}

MonomialPoly parse_poly(const std::string& raw)
{
    const std::string text = trim_copy(raw);
    if (text.empty()) throw std::invalid_argument("parse_poly: empty polynomial");
    std::string lower = text;
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });

    try {
        if (lower.rfind("he", 0) == 0) {
            std::size_t used = 0;
            int k = std::stoi(lower.substr(2), &used);
            if (used != lower.size() - 2 || k < 0) throw std::invalid_argument("bad Hermite index");
            return MonomialPoly::hermite(k);
        }
        if (lower == "z" || lower == "x") return MonomialPoly::monomial(1);
        if (lower.rfind("z^", 0) == 0 || lower.rfind("x^", 0) == 0) {
            std::size_t used = 0;
            int k = std::stoi(lower.substr(2), &used);
            if (used != lower.size() - 2 || k < 0) throw std::invalid_argument("bad exponent");
            return MonomialPoly::monomial(k);
        }
        std::vector<double> coeffs;
        std::stringstream ss(text);
        std::string item;
        while (std::getline(ss, item, ',')) {
            item = trim_copy(item);
            std::size_t used = 0;
            coeffs.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument("trailing characters");
        }
        return MonomialPoly(std::move(coeffs));
    } catch (const DegreeOverflow&) {
        throw;
    } catch (const std::exception&) {
        throw std::invalid_argument("parse_poly: cannot parse '" + text + "'");
    }
}

double HermiteExpansion::reconstruct(double z) const
{
    // Forward recurrence on He_k(z)/k! keeps magnitudes tame.
    double acc = 0.0;
    double prev = 0.0;
    double cur = 1.0; // He_0 / 0!
    for (std::size_t k = 0; k < coeffs.size(); ++k) {
        acc += coeffs[k] * cur;
        const double kk = static_cast<double>(k);
        // He_{k+1}/(k+1)! = (z He_k/k! - He_{k-1}/(k-1)!) / (k+1)
        double next = (z * cur - prev) / (kk + 1.0);
        prev = cur;
        cur = next;
    }
    return acc;
}

double hermite_eval(int k, double z)
{
    if (k < 0) throw std::invalid_argument("hermite_eval: negative index");
    check_degree(k, "hermite_eval");
    if (k == 0) return 1.0;
    double prev = 1.0;
    double cur = z;
    for (int j = 1; j < k; ++j) {
        double next = z * cur - j * prev;
        prev = cur;
        cur = next;
    }
    return cur;
}

double gaussian_moment(int j)
{
    if (j < 0) throw std::invalid_argument("gaussian_moment: negative order");
    if (j > 2 * kMaxDegree) throw DegreeOverflow("gaussian_moment: order too large");
    return moment_table()[j];
}

double hermite_coeff(const MonomialPoly& p, int k)
{
    if (k < 0) throw std::invalid_argument("hermite_coeff: negative index");
    if (k > p.degree()) return 0.0;
    // Stein: E[p He_k] = E[p^{(k)}] = sum_j c_j j!/(j-k)! E[z^{j-k}].
    const auto& c = p.coeffs();
    const auto& m = moment_table();
    double u = 0.0;
    for (int j = k; j <= p.degree(); j += 2) {
        if (c[j] != 0.0) u += c[j] * falling_factorial(j, k) * m[j - k];
    }
    return u;
}

HermiteExpansion expand(const MonomialPoly& p)
{
    HermiteExpansion out;
    out.coeffs.resize(p.degree() + 1);
    for (int k = 0; k <= p.degree(); ++k) out.coeffs[k] = hermite_coeff(p, k);
    return out;
}

double default_ie_tolerance(const HermiteExpansion& g)
{
    double mx = 0.0;
    for (double u : g.coeffs) mx = std::max(mx, std::abs(u));
    return 1e-9 * (1.0 + mx);
}

std::optional<int> information_exponent(const HermiteExpansion& g, std::optional<double> tol)
{
    const double t = tol.value_or(default_ie_tolerance(g));
    if (!(t > 0.0)) throw std::invalid_argument("information_exponent: tolerance must be positive");
    for (int k = 1; k <= g.max_degree(); ++k) {
        if (std::abs(g.coeffs[k]) > t) return k;
    }
    return std::nullopt;
}

ExponentReport exponent_report(const MonomialPoly& link, int k_pow, std::optional<double> tol)
{
    if (k_pow < 1) throw std::invalid_argument("exponent_report: K_pow must be >= 1");
    if (link.is_constant()) throw std::invalid_argument("exponent_report: link must be nonconstant");
    check_degree(link.degree() * k_pow, "exponent_report");

    ExponentReport report;
    MonomialPoly power = MonomialPoly::constant(1.0);
    for (int i = 1; i <= k_pow; ++i) {
        power = power * link;
        auto ie = information_exponent(expand(power), tol);
        report.power_ies.emplace_back(i, ie);
        if (i == 1) report.ie = ie;
        if (ie && (!report.ge_upper_bound || *ie < *report.ge_upper_bound)) {
            report.ge_upper_bound = ie;
            report.witness_power = i;
        }
    }
    return report;
}

namespace {

GaussHermiteRule build_rule(int n)
{
    // Newton polish on the orthonormal physicists' recurrence, started from
    // the eigenvalues of the Jacobi matrix.
    constexpr double kPiM4 = 0.7511255444649425; // pi^{-1/4}
    constexpr int kMaxIt = 100;
    std::vector<double> x(n), w(n);
    const int m = (n + 1) / 2;
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(n), sub(std::max(n - 1, 1));
    for (int k = 0; k + 1 < n; ++k) sub[k] = std::sqrt((k + 1) / 2.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> jacobi;
    jacobi.computeFromTridiagonal(diag, sub.head(n - 1), Eigen::EigenvaluesOnly);
    for (int i = 0; i < m; ++i) {
        double z = jacobi.eigenvalues()[n - 1 - i];
        double pp = 0.0;
        double log_scale = 0.0; // p values are stored divided by e^{log_scale}
        for (int it = 0; it < kMaxIt; ++it) {
            double p1 = kPiM4;
            double p2 = 0.0;
            log_scale = 0.0;
            for (int j = 0; j < n; ++j) {
                double p3 = p2;
                p2 = p1;
                p1 = z * std::sqrt(2.0 / (j + 1)) * p2 - std::sqrt(static_cast<double>(j) / (j + 1)) * p3;
                if (std::abs(p1) > 1e100) {
                    p1 *= 1e-100;
                    p2 *= 1e-100;
                    log_scale += 100.0 * std::numbers::ln10;
                }
            }
            pp = std::sqrt(2.0 * n) * p2;
            double z1 = z;
            z = z1 - p1 / pp;
            if (std::abs(z - z1) <= 1e-15 * std::max(1.0, std::abs(z))) break;
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = std::exp(std::log(2.0) - 2.0 * (std::log(std::abs(pp)) + log_scale));
        w[n - 1 - i] = w[i];
    }
    GaussHermiteRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const double inv_sqrt_pi = 1.0 / std::sqrt(std::numbers::pi);
    for (int i = 0; i < n; ++i) {
        rule.nodes[i] = std::numbers::sqrt2 * x[n - 1 - i];
        rule.weights[i] = w[n - 1 - i] * inv_sqrt_pi;
    }
    return rule;
}

} // namespace

const GaussHermiteRule& gauss_hermite_rule(int nodes)
{
    if (nodes < 1) throw std::invalid_argument("gauss_hermite_rule: nodes must be >= 1");
    static std::mutex mutex;
    static std::map<int, GaussHermiteRule> cache;
    std::lock_guard lock(mutex);
    auto it = cache.find(nodes);
    if (it == cache.end()) it = cache.emplace(nodes, build_rule(nodes)).first;
    return it->second;
}

double gauss_hermite_coeff(const std::function<double(double)>& g, int k, int nodes)
{
    if (k < 0) throw std::invalid_argument("gauss_hermite_coeff: negative index");
    const auto& rule = gauss_hermite_rule(nodes);
    double acc = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        const double z = rule.nodes[i];
        acc += rule.weights[i] * g(z) * hermite_eval(k, z);
    }
    return acc;
}

} // namespace silab
