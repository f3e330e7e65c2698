#pragma once

#include "dfgeo/errors.hpp"
#include "dfgeo/rational.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace dfgeo {

// Exponent vector, always of length nvars; compared lexicographically.
using Exponents = std::vector<std::uint32_t>;

// Products whose total degree would exceed this bound throw DegreeOverflowError.
int max_total_degree();
void set_max_total_degree(int d);

// Scoped raise/lower of the degree bound.
class DegreeLimitGuard {
public:
    explicit DegreeLimitGuard(int d) : saved_(max_total_degree()) { set_max_total_degree(d); }
    ~DegreeLimitGuard() { set_max_total_degree(saved_); }
    DegreeLimitGuard(const DegreeLimitGuard&) = delete;
    DegreeLimitGuard& operator=(const DegreeLimitGuard&) = delete;

private:
    int saved_;
};

// Sparse multivariate polynomial over Q with a fixed variable count. The term map is
// kept free of zero coefficients, so representations are canonical.
class Polynomial {
public:
    using TermMap = std::map<Exponents, Rational>;

    explicit Polynomial(std::size_t nvars = 0) : nvars_(nvars) {}
    static Polynomial constant(std::size_t nvars, const Rational& c);
    static Polynomial variable(std::size_t nvars, std::size_t index);

    std::size_t nvars() const { return nvars_; }
    const TermMap& terms() const { return terms_; }

    bool is_zero() const { return terms_.empty(); }
    bool is_constant() const;
    Rational constant_value() const;

    int total_degree() const; // -1 for the zero polynomial
    int degree_in(std::size_t var) const;
    bool depends_on(std::size_t var) const;

    Polynomial operator-() const;
    Polynomial& operator+=(const Polynomial& o);
    Polynomial& operator-=(const Polynomial& o);
    friend Polynomial operator+(Polynomial a, const Polynomial& b) { a += b; return a; }
    friend Polynomial operator-(Polynomial a, const Polynomial& b) { a -= b; return a; }
    friend Polynomial operator*(const Polynomial& a, const Polynomial& b);
    Polynomial& operator*=(const Polynomial& o);
    Polynomial scaled(const Rational& c) const;
    Polynomial pow(unsigned e) const;

    bool operator==(const Polynomial& o) const;
    bool operator!=(const Polynomial& o) const { return !(*this == o); }

    Polynomial derivative(std::size_t var) const;
    Rational eval(const std::vector<Rational>& point) const;
    double eval_double(const std::vector<double>& point) const;

    // Substitutes images[i] for variable i. All images share one variable count,
    // which becomes the variable count of the result.
    Polynomial compose(const std::vector<Polynomial>& images) const;

    // Exact division; nullopt when `d` is not a divisor.
    std::optional<Polynomial> divide_exact(const Polynomial& d) const;

    // Gcd normalized to integer-primitive with positive leading coefficient
    // (lex order); gcd of two nonzero constants is 1.
    static Polynomial gcd(const Polynomial& a, const Polynomial& b);

    // Signed rational content; dividing by it yields the integer-primitive,
    // positive-leading normal form. Zero polynomial has content 0.
    Rational content() const;
    Polynomial primitive_part() const;

    std::string to_string(const std::function<std::string(std::size_t)>& var_name) const;

private:
    std::size_t nvars_;
    TermMap terms_;
    void add_term(const Exponents& e, const Rational& c);
    friend Polynomial poly_mul_term(const Polynomial& p, const Exponents& e, const Rational& c);
};

Rational rational_pow(const Rational& base, unsigned e);

} // namespace dfgeo
