#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace silab {

/// Largest polynomial degree handled anywhere in the library.
inline constexpr int kMaxDegree = 60;

class DegreeOverflow : public std::domain_error
{
public:
    explicit DegreeOverflow(const std::string& what) : std::domain_error(what) {}
};

/// Real polynomial in the monomial basis, c_0 + c_1 z + ... + c_q z^q.
///
/// Trailing zero coefficients are trimmed on construction so that degree()
/// is the index of the last nonzero coefficient. The zero polynomial keeps a
/// single 0 coefficient and has degree 0.
class MonomialPoly
{
public:
    MonomialPoly() : coeffs_{0.0} {}
    explicit MonomialPoly(std::vector<double> coeffs);

    static MonomialPoly constant(double c) { return MonomialPoly({c}); }
    static MonomialPoly monomial(int k, double c = 1.0);
    /// Probabilist's Hermite polynomial He_k in monomial form.
    static MonomialPoly hermite(int k);

    int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
    const std::vector<double>& coeffs() const { return coeffs_; }
    double operator[](int k) const { return k <= degree() ? coeffs_[k] : 0.0; }
    bool is_zero() const { return degree() == 0 && coeffs_[0] == 0.0; }
    bool is_constant() const { return degree() == 0; }

    double operator()(double z) const;

    MonomialPoly derivative(int order = 1) const;
    MonomialPoly pow(int k) const;
    /// (*this)(inner(z)).
    MonomialPoly compose(const MonomialPoly& inner) const;

    MonomialPoly& operator+=(const MonomialPoly& other);
    MonomialPoly& operator-=(const MonomialPoly& other);
    MonomialPoly& operator*=(double s);

    friend MonomialPoly operator+(MonomialPoly a, const MonomialPoly& b) { return a += b; }
    friend MonomialPoly operator-(MonomialPoly a, const MonomialPoly& b) { return a -= b; }
    friend MonomialPoly operator*(MonomialPoly a, double s) { return a *= s; }
    friend MonomialPoly operator*(double s, MonomialPoly a) { return a *= s; }
    friend MonomialPoly operator*(const MonomialPoly& a, const MonomialPoly& b);
    friend bool operator==(const MonomialPoly&, const MonomialPoly&) = default;

    std::string to_string() const;

private:
    void trim();
    std::vector<double> coeffs_;
};

/// Parses "He3", "z", "z^2", "1" or a comma separated coefficient list
/// "c0,c1,...,cq" (lowest degree first).
MonomialPoly parse_poly(const std::string& text);

/// Unnormalized Hermite coefficients u_k = E[g(z) He_k(z)], z ~ N(0,1).
/// Reconstruction is g = sum_k (u_k / k!) He_k.
struct HermiteExpansion
{
    std::vector<double> coeffs;

    int max_degree() const { return static_cast<int>(coeffs.size()) - 1; }
    double operator[](int k) const
    {
        return k >= 0 && k < static_cast<int>(coeffs.size()) ? coeffs[k] : 0.0;
    }
    double reconstruct(double z) const;
};

/// He_k(z) through the three-term recurrence He_{k+1} = z He_k - k He_{k-1}.
double hermite_eval(int k, double z);

/// E[z^j] for z ~ N(0,1): (j-1)!! for even j, 0 for odd j.
double gaussian_moment(int j);

/// Exact change of basis. Uses u_k(p) = E[p^{(k)}(z)] and the Gaussian
/// moment table, so no quadrature is involved.
HermiteExpansion expand(const MonomialPoly& p);

/// u_k(p) for a single k; cheaper than expand(p)[k].
double hermite_coeff(const MonomialPoly& p, int k);

/// Default numerical-zero threshold for the information exponent.
double default_ie_tolerance(const HermiteExpansion& g);

/// min{k >= 1 : |u_k| > tol}, or nullopt when every u_k (k >= 1) vanishes.
std::optional<int> information_exponent(const HermiteExpansion& g, std::optional<double> tol = {});

struct ExponentReport
{
    std::optional<int> ie;
    std::vector<std::pair<int, std::optional<int>>> power_ies;
    std::optional<int> ge_upper_bound;
    std::optional<int> witness_power;
};

/// Information exponents of link^i for i = 1..k_pow and their minimum, an
/// upper bound on the generative exponent.
ExponentReport exponent_report(const MonomialPoly& link, int k_pow, std::optional<double> tol = {});

/// Gauss-Hermite rule for the standard normal weight, derived from the
/// physicists' rule (weight e^{-x^2}) by z = sqrt(2) x, w = w_phys / sqrt(pi).
struct GaussHermiteRule
{
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// Cached per node count; exact for polynomials of degree < 2 * nodes.
const GaussHermiteRule& gauss_hermite_rule(int nodes);

/// Quadrature estimate of E[g(z) He_k(z)] for z ~ N(0,1).
double gauss_hermite_coeff(const std::function<double(double)>& g, int k, int nodes);

} // namespace silab
