#pragma once

#include "dfgeo/polynomial.hpp"

#include <functional>
#include <string>
#include <vector>

namespace dfgeo {

// Rational function num/den with den of unit content and zero represented as 0/1.
// Arithmetic cancels by exact division only, so intermediate fractions may carry a
// common factor; is_zero and operator== do not depend on reduction. normalized()
// performs the full gcd reduction for display or storage.
class ScalarExpr {
public:
    explicit ScalarExpr(std::size_t nvars = 0)
        : num_(nvars), den_(Polynomial::constant(nvars, Rational(1))) {}

    static ScalarExpr constant(std::size_t nvars, const Rational& c) {
        ScalarExpr s(nvars);
        s.num_ = Polynomial::constant(nvars, c);
        return s;
    }
    static ScalarExpr variable(std::size_t nvars, std::size_t index) {
        ScalarExpr s(nvars);
        s.num_ = Polynomial::variable(nvars, index);
        return s;
    }
    static ScalarExpr from_polynomial(Polynomial p);
    static ScalarExpr from_fraction(Polynomial num, Polynomial den); // reduces

    std::size_t nvars() const { return num_.nvars(); }
    const Polynomial& num() const { return num_; }
    const Polynomial& den() const { return den_; }

    bool is_zero() const { return num_.is_zero(); }
    bool is_constant() const { return num_.is_constant() && den_.is_constant(); }
    Rational constant_value() const { return num_.constant_value() / den_.constant_value(); }
    bool is_polynomial() const { return den_.is_constant(); }

    ScalarExpr operator-() const;
    friend ScalarExpr operator+(const ScalarExpr& a, const ScalarExpr& b);
    friend ScalarExpr operator-(const ScalarExpr& a, const ScalarExpr& b);
    friend ScalarExpr operator*(const ScalarExpr& a, const ScalarExpr& b);
    friend ScalarExpr operator/(const ScalarExpr& a, const ScalarExpr& b);
    ScalarExpr& operator+=(const ScalarExpr& o) { *this = *this + o; return *this; }
    ScalarExpr& operator-=(const ScalarExpr& o) { *this = *this - o; return *this; }
    ScalarExpr& operator*=(const ScalarExpr& o) { *this = *this * o; return *this; }
    ScalarExpr& operator/=(const ScalarExpr& o) { *this = *this / o; return *this; }

    ScalarExpr scaled(const Rational& c) const;
    ScalarExpr pow(int e) const;
    ScalarExpr normalized() const {
        ScalarExpr s = *this;
        s.reduce();
        return s;
    }

    bool operator==(const ScalarExpr& o) const {
        if (num_ == o.num_ && den_ == o.den_) return true;
        // Operands may be unreduced; compare by cross-multiplication.
        return (num_ * o.den_ - o.num_ * den_).is_zero();
    }
    bool operator!=(const ScalarExpr& o) const { return !(*this == o); }

    ScalarExpr derivative(std::size_t var) const;
    bool depends_on(std::size_t var) const;

    Rational eval(const std::vector<Rational>& point) const;   // throws PoleError
    double eval_double(const std::vector<double>& point) const; // throws PoleError on exact-zero den

    // Substitutes polynomial images for the variables (used for affine changes).
    ScalarExpr compose(const std::vector<Polynomial>& images) const;

    std::string to_string(const std::function<std::string(std::size_t)>& var_name) const;

private:
    Polynomial num_, den_;
    void reduce();
    void normalize_unit();
};

} // namespace dfgeo
