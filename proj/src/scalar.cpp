#include "dfgeo/scalar.hpp"

namespace dfgeo {

ScalarExpr ScalarExpr::from_polynomial(Polynomial p) {
    ScalarExpr s(p.nvars());
    s.num_ = std::move(p);
    return s;
}

ScalarExpr ScalarExpr::from_fraction(Polynomial num, Polynomial den) {
    if (num.nvars() != den.nvars()) throw DimensionError("fraction variable counts differ");
    if (den.is_zero()) throw PoleError("zero denominator");
    ScalarExpr s(num.nvars());
    s.num_ = std::move(num);
    s.den_ = std::move(den);
    s.reduce();
    return s;
}

void ScalarExpr::normalize_unit() {
    if (num_.is_zero()) {
        den_ = Polynomial::constant(num_.nvars(), Rational(1));
        return;
    }
    const Rational c = den_.content();
    if (cmp(c, Rational(1)) != 0) {
        const Rational inv = Rational(1) / c;
        num_ = num_.scaled(inv);
        den_ = den_.scaled(inv);
    }
}

void ScalarExpr::reduce() {
    if (num_.is_zero()) {
        den_ = Polynomial::constant(num_.nvars(), Rational(1));
        return;
    }
    if (!den_.is_constant()) {
        const Polynomial g = Polynomial::gcd(num_, den_);
        if (!g.is_constant()) {
            num_ = *num_.divide_exact(g);
            den_ = *den_.divide_exact(g);
        }
    }
    normalize_unit();
}

ScalarExpr ScalarExpr::operator-() const {
    ScalarExpr r = *this;
    r.num_ = -r.num_;
    return r;
}

// Sums and products defer gcd reduction. In the connection and curvature
// pipelines denominators form divisibility chains (powers of a handful of
// determinants), so exact-division probes absorb almost every merge and the
// rare coprime merge just multiplies denominators. Unreduced fractions are
// sound everywhere: zero tests look at the numerator only.
ScalarExpr operator+(const ScalarExpr& a, const ScalarExpr& b) {
    if (a.nvars() != b.nvars()) throw DimensionError("scalar variable counts differ");
    if (a.is_zero()) return b;
    if (b.is_zero()) return a;
    ScalarExpr r(a.nvars());
    if (a.den_ == b.den_) {
        r.num_ = a.num_ + b.num_;
        r.den_ = a.den_;
    } else if (auto q = b.den_.divide_exact(a.den_)) {
        r.num_ = a.num_ * *q + b.num_;
        r.den_ = b.den_;
    } else if (auto p = a.den_.divide_exact(b.den_)) {
        r.num_ = a.num_ + b.num_ * *p;
        r.den_ = a.den_;
    } else {
        r.num_ = a.num_ * b.den_ + b.num_ * a.den_;
        r.den_ = a.den_ * b.den_;
    }
    r.normalize_unit();
    return r;
}

ScalarExpr operator-(const ScalarExpr& a, const ScalarExpr& b) { return a + (-b); }

ScalarExpr operator*(const ScalarExpr& a, const ScalarExpr& b) {
    if (a.nvars() != b.nvars()) throw DimensionError("scalar variable counts differ");
    ScalarExpr r(a.nvars());
    if (a.is_zero() || b.is_zero()) return r;
    Polynomial an = a.num_, ad = a.den_;
    Polynomial bn = b.num_, bd = b.den_;
    // Cross-cancel only what exact division finds; n/d = 1/(d/n) when n | d.
    const auto cancel = [](Polynomial& num, Polynomial& den) {
        if (den.is_constant()) return;
        if (auto q = num.divide_exact(den)) {
            num = std::move(*q);
            den = Polynomial::constant(num.nvars(), Rational(1));
        } else if (auto p = den.divide_exact(num)) {
            den = std::move(*p);
            num = Polynomial::constant(den.nvars(), Rational(1));
        }
    };
    cancel(an, bd);
    cancel(bn, ad);
    r.num_ = an * bn;
    r.den_ = ad * bd;
    r.normalize_unit();
    return r;
}

ScalarExpr operator/(const ScalarExpr& a, const ScalarExpr& b) {
    if (b.is_zero()) throw PoleError("division by the zero scalar");
    ScalarExpr binv(b.nvars());
    binv.num_ = b.den_;
    binv.den_ = b.num_;
    binv.normalize_unit();
    return a * binv;
}

ScalarExpr ScalarExpr::scaled(const Rational& c) const {
    ScalarExpr r = *this;
    r.num_ = r.num_.scaled(c);
    if (sgn(c) == 0) r.den_ = Polynomial::constant(nvars(), Rational(1));
    return r;
}

ScalarExpr ScalarExpr::pow(int e) const {
    if (e == 0) return ScalarExpr::constant(nvars(), Rational(1));
    if (e < 0) {
        if (is_zero()) throw PoleError("negative power of zero");
        ScalarExpr inv(nvars());
        inv.num_ = den_;
        inv.den_ = num_;
        inv.normalize_unit();
        return inv.pow(-e);
    }
    ScalarExpr r(nvars());
    r.num_ = num_.pow(static_cast<unsigned>(e));
    r.den_ = den_.pow(static_cast<unsigned>(e));
    r.normalize_unit();
    return r;
}

ScalarExpr ScalarExpr::derivative(std::size_t var) const {
    ScalarExpr r(nvars());
    const Polynomial dd = den_.derivative(var);
    if (dd.is_zero()) {
        r.num_ = num_.derivative(var);
        r.den_ = den_;
    } else {
        // (n/d)' = (n'd - nd')/d^2, left unreduced like the ring operations.
        r.num_ = num_.derivative(var) * den_ - num_ * dd;
        r.den_ = den_ * den_;
    }
    r.normalize_unit();
    return r;
}

bool ScalarExpr::depends_on(std::size_t var) const {
    return num_.depends_on(var) || den_.depends_on(var);
}

Rational ScalarExpr::eval(const std::vector<Rational>& point) const {
    const Rational d = den_.eval(point);
    if (sgn(d) == 0) {
        // An unreduced factor may vanish where the value is finite; reduce and
        // retry before declaring a pole.
        ScalarExpr s = *this;
        s.reduce();
        const Rational d2 = s.den_.eval(point);
        if (sgn(d2) == 0) throw PoleError("denominator vanishes at the evaluation point");
        return s.num_.eval(point) / d2;
    }
    return num_.eval(point) / d;
}

double ScalarExpr::eval_double(const std::vector<double>& point) const {
    const double d = den_.eval_double(point);
    if (d == 0.0) {
        ScalarExpr s = *this;
        s.reduce();
        const double d2 = s.den_.eval_double(point);
        if (d2 == 0.0) throw PoleError("denominator vanishes at the evaluation point");
        return s.num_.eval_double(point) / d2;
    }
    return num_.eval_double(point) / d;
}

ScalarExpr ScalarExpr::compose(const std::vector<Polynomial>& images) const {
    return ScalarExpr::from_fraction(num_.compose(images), den_.compose(images));
}

std::string ScalarExpr::to_string(const std::function<std::string(std::size_t)>& var_name) const {
    if (den_.is_constant() && cmp(den_.constant_value(), Rational(1)) == 0)
        return num_.to_string(var_name);
    const ScalarExpr s = normalized();
    if (s.den_.is_constant() && cmp(s.den_.constant_value(), Rational(1)) == 0)
        return s.num_.to_string(var_name);
    return "(" + s.num_.to_string(var_name) + ")/(" + s.den_.to_string(var_name) + ")";
}

} // namespace dfgeo
