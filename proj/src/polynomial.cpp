#include "dfgeo/polynomial.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace dfgeo {

namespace {
// Thread-local so a scoped raise in one worker cannot leak into another.
thread_local int g_max_total_degree = 128;

int exp_sum(const Exponents& e) {
    int s = 0;
    for (auto x : e) s += static_cast<int>(x);
    return s;
}
} // namespace

int max_total_degree() { return g_max_total_degree; }
void set_max_total_degree(int d) { g_max_total_degree = d; }

std::optional<Rational> sqrt_exact(const Rational& q) {
    if (sgn(q) < 0) return std::nullopt;
    if (sgn(q) == 0) return Rational(0);
    Integer num = q.get_num(), den = q.get_den();
    if (mpz_perfect_square_p(num.get_mpz_t()) == 0) return std::nullopt;
    if (mpz_perfect_square_p(den.get_mpz_t()) == 0) return std::nullopt;
    Integer rn, rd;
    mpz_sqrt(rn.get_mpz_t(), num.get_mpz_t());
    mpz_sqrt(rd.get_mpz_t(), den.get_mpz_t());
    return Rational(rn) / Rational(rd);
}

std::optional<Rational> parse_rational(const std::string& text) {
    std::string t = text;
    t.erase(std::remove_if(t.begin(), t.end(), [](char c) { return c == ' '; }), t.end());
    if (t.empty()) return std::nullopt;
    auto slash = t.find('/');
    try {
        if (slash == std::string::npos) {
            Integer n(t);
            return Rational(n);
        }
        Integer n(t.substr(0, slash)), d(t.substr(slash + 1));
        if (sgn(d) == 0) return std::nullopt;
        Rational r(n, d);
        r.canonicalize();
        return r;
    } catch (const std::invalid_argument&) {
        return std::nullopt;
    }
}

Rational rational_pow(const Rational& base, unsigned e) {
    Integer n, d;
    mpz_pow_ui(n.get_mpz_t(), base.get_num().get_mpz_t(), e);
    mpz_pow_ui(d.get_mpz_t(), base.get_den().get_mpz_t(), e);
    Rational r(n, d);
    // base is canonical, so num^e / den^e already is.
    return r;
}

Polynomial Polynomial::constant(std::size_t nvars, const Rational& c) {
    Polynomial p(nvars);
    if (sgn(c) != 0) p.terms_.emplace(Exponents(nvars, 0), c);
    return p;
}

Polynomial Polynomial::variable(std::size_t nvars, std::size_t index) {
    if (index >= nvars) throw DimensionError("variable index out of range");
    Polynomial p(nvars);
    Exponents e(nvars, 0);
    e[index] = 1;
    p.terms_.emplace(std::move(e), Rational(1));
    return p;
}

bool Polynomial::is_constant() const {
    if (terms_.empty()) return true;
    return terms_.size() == 1 && exp_sum(terms_.begin()->first) == 0;
}

Rational Polynomial::constant_value() const {
    if (terms_.empty()) return Rational(0);
    if (!is_constant()) throw DimensionError("polynomial is not constant");
    return terms_.begin()->second;
}

int Polynomial::total_degree() const {
    int d = -1;
    for (const auto& [e, c] : terms_) d = std::max(d, exp_sum(e));
    return d;
}

int Polynomial::degree_in(std::size_t var) const {
    int d = -1;
    for (const auto& [e, c] : terms_) d = std::max(d, static_cast<int>(e[var]));
    return d;
}

bool Polynomial::depends_on(std::size_t var) const {
    for (const auto& [e, c] : terms_)
        if (e[var] > 0) return true;
    return false;
}

void Polynomial::add_term(const Exponents& e, const Rational& c) {
    if (sgn(c) == 0) return;
    auto it = terms_.find(e);
    if (it == terms_.end()) {
        terms_.emplace(e, c);
    } else {
        it->second += c;
        if (sgn(it->second) == 0) terms_.erase(it);
    }
}

Polynomial Polynomial::operator-() const {
    Polynomial r(nvars_);
    for (const auto& [e, c] : terms_) r.terms_.emplace(e, -c);
    return r;
}

Polynomial& Polynomial::operator+=(const Polynomial& o) {
    if (nvars_ != o.nvars_) throw DimensionError("polynomial variable counts differ");
    for (const auto& [e, c] : o.terms_) add_term(e, c);
    return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& o) {
    if (nvars_ != o.nvars_) throw DimensionError("polynomial variable counts differ");
    for (const auto& [e, c] : o.terms_) add_term(e, -c);
    return *this;
}

Polynomial poly_mul_term(const Polynomial& p, const Exponents& e, const Rational& c) {
    Polynomial r(p.nvars());
    if (sgn(c) == 0) return r;
    for (const auto& [pe, pc] : p.terms()) {
        Exponents ne(pe);
        for (std::size_t i = 0; i < ne.size(); ++i) ne[i] += e[i];
        r.terms_.emplace(std::move(ne), pc * c);
    }
    return r;
}

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    if (a.nvars() != b.nvars()) throw DimensionError("polynomial variable counts differ");
    Polynomial r(a.nvars());
    if (a.is_zero() || b.is_zero()) return r;
    const int limit = max_total_degree();
    const int da = a.total_degree(), db = b.total_degree();
    if (da + db > limit)
        throw DegreeOverflowError("product degree " + std::to_string(da + db) +
                                  " exceeds the configured bound " + std::to_string(limit));
    // Iterate over the smaller factor's terms on the outside.
    const Polynomial& small = a.terms().size() <= b.terms().size() ? a : b;
    const Polynomial& big = a.terms().size() <= b.terms().size() ? b : a;
    for (const auto& [e, c] : small.terms()) {
        for (const auto& [be, bc] : big.terms()) {
            Exponents ne(be);
            for (std::size_t i = 0; i < ne.size(); ++i) ne[i] += e[i];
            r.add_term(ne, c * bc);
        }
    }
    return r;
}

Polynomial& Polynomial::operator*=(const Polynomial& o) {
    *this = *this * o;
    return *this;
}

Polynomial Polynomial::scaled(const Rational& c) const {
    Polynomial r(nvars_);
    if (sgn(c) == 0) return r;
    for (const auto& [e, tc] : terms_) r.terms_.emplace(e, tc * c);
    return r;
}

Polynomial Polynomial::pow(unsigned e) const {
    Polynomial r = Polynomial::constant(nvars_, Rational(1));
    Polynomial base = *this;
    while (e > 0) {
        if (e & 1u) r = r * base;
        e >>= 1u;
        if (e > 0) base = base * base;
    }
    return r;
}

bool Polynomial::operator==(const Polynomial& o) const {
    if (nvars_ != o.nvars_ || terms_.size() != o.terms_.size()) return false;
    auto it = terms_.begin();
    auto jt = o.terms_.begin();
    for (; it != terms_.end(); ++it, ++jt) {
        if (it->first != jt->first || cmp(it->second, jt->second) != 0) return false;
    }
    return true;
}

Polynomial Polynomial::derivative(std::size_t var) const {
    if (var >= nvars_) throw DimensionError("variable index out of range");
    Polynomial r(nvars_);
    for (const auto& [e, c] : terms_) {
        if (e[var] == 0) continue;
        Exponents ne(e);
        ne[var] -= 1;
        r.add_term(ne, c * Rational(static_cast<unsigned long>(e[var])));
    }
    return r;
}

Rational Polynomial::eval(const std::vector<Rational>& point) const {
    if (point.size() != nvars_) throw DimensionError("evaluation point has wrong dimension");
    Rational acc(0);
    for (const auto& [e, c] : terms_) {
        Rational t = c;
        for (std::size_t i = 0; i < nvars_; ++i)
            if (e[i] > 0) t *= rational_pow(point[i], e[i]);
        acc += t;
    }
    return acc;
}

double Polynomial::eval_double(const std::vector<double>& point) const {
    if (point.size() != nvars_) throw DimensionError("evaluation point has wrong dimension");
    double acc = 0.0;
    for (const auto& [e, c] : terms_) {
        double t = to_double(c);
        for (std::size_t i = 0; i < nvars_; ++i)
            if (e[i] > 0) t *= std::pow(point[i], static_cast<int>(e[i]));
        acc += t;
    }
    return acc;
}

Polynomial Polynomial::compose(const std::vector<Polynomial>& images) const {
    if (images.size() != nvars_) throw DimensionError("substitution image count mismatch");
    std::size_t out_vars = images.empty() ? 0 : images[0].nvars();
    for (const auto& im : images)
        if (im.nvars() != out_vars) throw DimensionError("substitution images disagree on variables");
    // Lazy power cache per variable.
    std::vector<std::vector<Polynomial>> pows(nvars_);
    auto power = [&](std::size_t i, std::uint32_t e) -> const Polynomial& {
        auto& cache = pows[i];
        if (cache.empty()) cache.push_back(Polynomial::constant(out_vars, Rational(1)));
        while (cache.size() <= e) cache.push_back(cache.back() * images[i]);
        return cache[e];
    };
    Polynomial r(out_vars);
    for (const auto& [e, c] : terms_) {
        Polynomial t = Polynomial::constant(out_vars, c);
        for (std::size_t i = 0; i < nvars_; ++i)
            if (e[i] > 0) t = t * power(i, e[i]);
        r += t;
    }
    return r;
}

std::optional<Polynomial> Polynomial::divide_exact(const Polynomial& d) const {
    if (nvars_ != d.nvars_) throw DimensionError("polynomial variable counts differ");
    if (d.is_zero()) return std::nullopt;
    Polynomial q(nvars_);
    Polynomial r = *this;
    const auto& dl = *d.terms_.rbegin(); // leading term, lex order
    while (!r.is_zero()) {
        const auto& rl = *r.terms_.rbegin();
        Exponents qe(nvars_);
        for (std::size_t i = 0; i < nvars_; ++i) {
            if (rl.first[i] < dl.first[i]) return std::nullopt;
            qe[i] = rl.first[i] - dl.first[i];
        }
        Rational qc = rl.second / dl.second;
        q.add_term(qe, qc);
        r -= poly_mul_term(d, qe, qc);
    }
    return q;
}

Rational Polynomial::content() const {
    if (terms_.empty()) return Rational(0);
    Integer num_gcd(0), den_lcm(1);
    for (const auto& [e, c] : terms_) {
        mpz_gcd(num_gcd.get_mpz_t(), num_gcd.get_mpz_t(), c.get_num().get_mpz_t());
        mpz_lcm(den_lcm.get_mpz_t(), den_lcm.get_mpz_t(), c.get_den().get_mpz_t());
    }
    Rational c(num_gcd, den_lcm);
    c.canonicalize();
    if (sgn(terms_.rbegin()->second) < 0) c = -c;
    return c;
}

Polynomial Polynomial::primitive_part() const {
    if (is_zero()) return *this;
    Rational c = content();
    return scaled(Rational(1) / c);
}

namespace {

// Deterministic work budget shared by one outermost gcd call. Exhaustion
// abandons the computation and the caller keeps the fraction unreduced, which
// is always sound; it only costs representation size.
struct GcdBudgetExhausted {};

thread_local long g_gcd_budget = -1;

void gcd_charge(long cost) {
    if (g_gcd_budget < 0) return;
    g_gcd_budget -= cost;
    if (g_gcd_budget < 0) throw GcdBudgetExhausted{};
}

// Coefficients of p seen as univariate in variable k; keys are k-degrees and the
// coefficient polynomials have exponent 0 in k.
std::map<std::uint32_t, Polynomial> coeffs_in(const Polynomial& p, std::size_t k) {
    std::map<std::uint32_t, Polynomial> out;
    for (const auto& [e, c] : p.terms()) {
        Exponents re(e);
        std::uint32_t dk = re[k];
        re[k] = 0;
        auto it = out.try_emplace(dk, Polynomial(p.nvars())).first;
        it->second += poly_mul_term(Polynomial::constant(p.nvars(), Rational(1)), re, c);
    }
    return out;
}

Polynomial leading_coeff_in(const Polynomial& p, std::size_t k) {
    auto cs = coeffs_in(p, k);
    return cs.rbegin()->second;
}

// p * x_k^e
Polynomial shift_in(const Polynomial& p, std::size_t k, std::uint32_t e) {
    Exponents sh(p.nvars(), 0);
    sh[k] = e;
    return poly_mul_term(p, sh, Rational(1));
}

// Pseudo-remainder of a by b in variable k (deg_k a >= deg_k b, b nonzero in k).
Polynomial pseudo_rem(Polynomial a, const Polynomial& b, std::size_t k) {
    const int db = b.degree_in(k);
    const Polynomial lb = leading_coeff_in(b, k);
    while (!a.is_zero()) {
        const int da = a.degree_in(k);
        if (da < db) break;
        const Polynomial la = leading_coeff_in(a, k);
        gcd_charge(static_cast<long>(a.terms().size()) *
                   static_cast<long>(lb.terms().size() + 1));
        a = lb * a - shift_in(la * b, k, static_cast<std::uint32_t>(da - db));
        // Keep coefficients integer-primitive; rational growth compounds fast.
        if (!a.is_zero()) a = a.primitive_part();
    }
    return a;
}

std::uint64_t used_var_mask(const Polynomial& p) {
    std::uint64_t m = 0;
    for (const auto& [e, c] : p.terms())
        for (std::size_t i = 0; i < e.size(); ++i)
            if (e[i] > 0) m |= (std::uint64_t{1} << i);
    return m;
}

Polynomial normalized_primitive(const Polynomial& p) {
    if (p.is_zero()) return p;
    return p.primitive_part();
}

// Gcd of all k-coefficients of p (the content of p w.r.t. x_k).
Polynomial content_in(const Polynomial& p, std::size_t k) {
    auto cs = coeffs_in(p, k);
    Polynomial g(p.nvars());
    for (const auto& [dk, cp] : cs) {
        g = Polynomial::gcd(g, cp);
        if (g.is_constant() && !g.is_zero()) break;
    }
    return g;
}

// Gcd of univariate (in variable k) polynomials over Q via monic Euclid.
Polynomial gcd_univariate(Polynomial a, Polynomial b, std::size_t k) {
    while (!b.is_zero()) {
        // a mod b, classical division.
        const int db = b.degree_in(k);
        const Rational lb = leading_coeff_in(b, k).constant_value();
        while (!a.is_zero() && a.degree_in(k) >= db) {
            const int da = a.degree_in(k);
            const Rational la = leading_coeff_in(a, k).constant_value();
            gcd_charge(static_cast<long>(b.terms().size()) + 1);
            a -= shift_in(b, k, static_cast<std::uint32_t>(da - db)).scaled(la / lb);
        }
        if (!a.is_zero()) a = a.primitive_part();
        std::swap(a, b);
    }
    return normalized_primitive(a);
}

} // namespace

namespace {

Polynomial gcd_inner(const Polynomial& a, const Polynomial& b) {
    if (a.is_zero()) return normalized_primitive(b);
    if (b.is_zero()) return normalized_primitive(a);
    if (a.is_constant() || b.is_constant()) return Polynomial::constant(a.nvars(), Rational(1));
    if (a == b) return normalized_primitive(a);

    const std::uint64_t ma = used_var_mask(a), mb = used_var_mask(b);
    const std::uint64_t common = ma & mb;
    if (common == 0) return Polynomial::constant(a.nvars(), Rational(1));
    std::size_t k = 0;
    while (!(common & (std::uint64_t{1} << k))) ++k;

    if ((ma | mb) == (std::uint64_t{1} << k)) return gcd_univariate(a, b, k);

    const Polynomial ca = content_in(a, k), cb = content_in(b, k);
    const Polynomial d = Polynomial::gcd(ca, cb);
    Polynomial pa = a.divide_exact(ca)->primitive_part();
    Polynomial pb = b.divide_exact(cb)->primitive_part();
    if (pa.degree_in(k) < pb.degree_in(k)) std::swap(pa, pb);
    // Primitive polynomial remainder sequence.
    while (true) {
        if (pb.degree_in(k) <= 0) {
            // Nonzero remainder free of x_k: the primitive parts are coprime.
            if (!pb.is_zero()) return normalized_primitive(d);
            break;
        }
        Polynomial r = pseudo_rem(pa, pb, k);
        if (r.is_zero()) break;
        pa = std::move(pb);
        pb = r.divide_exact(content_in(r, k))->primitive_part();
    }
    return normalized_primitive(d * pb);
}

} // namespace

Polynomial Polynomial::gcd(const Polynomial& a, const Polynomial& b) {
    if (a.nvars() != b.nvars()) throw DimensionError("polynomial variable counts differ");

    // Pseudo-remainders legitimately overshoot the user-facing degree bound;
    // the result itself is no larger than the inputs.
    DegreeLimitGuard guard(std::max(max_total_degree(), 4096));

    const bool outermost = g_gcd_budget < 0;
    if (outermost) g_gcd_budget = 200000;
    try {
        Polynomial g = gcd_inner(a, b);
        if (outermost) g_gcd_budget = -1;
        return g;
    } catch (const GcdBudgetExhausted&) {
        if (!outermost) throw;
        g_gcd_budget = -1;
        return Polynomial::constant(a.nvars(), Rational(1));
    } catch (...) {
        if (outermost) g_gcd_budget = -1;
        throw;
    }
}

std::string Polynomial::to_string(const std::function<std::string(std::size_t)>& var_name) const {
    if (terms_.empty()) return "0";
    std::ostringstream out;
    bool first = true;
    // Highest lex term first reads most naturally.
    for (auto it = terms_.rbegin(); it != terms_.rend(); ++it) {
        const auto& [e, c] = *it;
        Rational coeff = c;
        if (first) {
            if (sgn(coeff) < 0) {
                out << "-";
                coeff = -coeff;
            }
        } else {
            out << (sgn(coeff) < 0 ? " - " : " + ");
            if (sgn(coeff) < 0) coeff = -coeff;
        }
        first = false;
        const bool has_vars = exp_sum(e) > 0;
        const bool unit = cmp(coeff, Rational(1)) == 0;
        if (!unit || !has_vars) out << coeff.get_str();
        bool need_star = !unit || !has_vars;
        for (std::size_t i = 0; i < nvars_; ++i) {
            if (e[i] == 0) continue;
            if (need_star) out << "*";
            out << var_name(i);
            if (e[i] > 1) out << "^" << e[i];
            need_star = true;
        }
    }
    return out.str();
}

} // namespace dfgeo
