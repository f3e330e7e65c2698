#include "dfgeo/density.hpp"

#include "dfgeo/algebroid.hpp"
#include "dfgeo/errors.hpp"

namespace dfgeo {

namespace {

Rational qdet(QMatrix a) {
    const std::size_t n = a.size();
    Rational result(1);
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        while (piv < n && sgn(a[piv][col]) == 0) ++piv;
        if (piv == n) return Rational(0);
        if (piv != col) {
            std::swap(a[piv], a[col]);
            result = -result;
        }
        result *= a[col][col];
        for (std::size_t r = col + 1; r < n; ++r) {
            if (sgn(a[r][col]) == 0) continue;
            const Rational f = a[r][col] / a[col][col];
            for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
        }
    }
    return result;
}

QMatrix qinverse(QMatrix a) {
    const std::size_t n = a.size();
    QMatrix inv(n, std::vector<Rational>(n, Rational(0)));
    for (std::size_t i = 0; i < n; ++i) inv[i][i] = 1;
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        while (piv < n && sgn(a[piv][col]) == 0) ++piv;
        if (piv == n) throw SingularError("affine block is singular");
        std::swap(a[piv], a[col]);
        std::swap(inv[piv], inv[col]);
        const Rational d = a[col][col];
        for (std::size_t c = 0; c < n; ++c) {
            a[col][c] /= d;
            inv[col][c] /= d;
        }
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col || sgn(a[r][col]) == 0) continue;
            const Rational f = a[r][col];
            for (std::size_t c = 0; c < n; ++c) {
                a[r][c] -= f * a[col][c];
                inv[r][c] -= f * inv[col][c];
            }
        }
    }
    return inv;
}

void require_square(const QMatrix& m, std::size_t n, const char* ctx) {
    if (m.size() != n) throw DimensionError(std::string(ctx) + ": wrong block size");
    for (const auto& row : m)
        if (row.size() != n) throw DimensionError(std::string(ctx) + ": wrong block size");
}

} // namespace

Density make_density(const CoordPtr& cs, const Rational& weight, ScalarExpr component) {
    if (component.nvars() != cs->dim()) throw DimensionError("density component nvars mismatch");
    bool foliated = true;
    for (std::size_t v = cs->dim() / 2; v < cs->dim() && foliated; ++v)
        if (component.depends_on(v)) foliated = false;
    return Density{cs, weight, std::move(component), foliated};
}

ScalarExpr div_L(const VectorField& X) {
    require_vector(X, "div_L");
    const std::size_t m = static_cast<std::size_t>(X.coords()->m());
    ScalarExpr acc(X.coords()->dim());
    for (std::size_t i = 0; i < m; ++i) acc += X.at({i}).derivative(i);
    return acc;
}

Density lie_density(const VectorField& X, const Density& d) {
    if (!is_strongly_foliated(X))
        throw ValidationError("lie_density: X must be strongly foliated");
    if (!d.strongly_foliated)
        throw ValidationError("lie_density: density must be strongly foliated");
    require_same(X.coords(), d.cs);
    ScalarExpr comp = apply_vector(X, d.component) + (d.component * div_L(X)).scaled(d.weight);
    return make_density(d.cs, d.weight, std::move(comp));
}

CovectorField induced_density_connection(const Connection& conn, const Rational& s) {
    const std::size_t n = conn.cs->dim();
    std::vector<ScalarExpr> out(n, ScalarExpr(n));
    for (std::size_t u = 0; u < n; ++u) {
        ScalarExpr tr(n);
        for (std::size_t w = 0; w < n; ++w) tr += conn.at(u, w, w);
        out[u] = tr.scaled(s);
    }
    return TensorField::covector(conn.cs, std::move(out));
}

AffineChange make_affine_dual(const QMatrix& alpha, std::vector<Rational> alpha0,
                              std::vector<Rational> beta0) {
    const std::size_t m = alpha.size();
    require_square(alpha, m, "make_affine_dual");
    if (alpha0.size() != m || beta0.size() != m)
        throw DimensionError("make_affine_dual: offset size mismatch");
    QMatrix alpha_t(m, std::vector<Rational>(m));
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j) alpha_t[j][i] = alpha[i][j];
    return AffineChange{alpha, qinverse(alpha_t), std::move(alpha0), std::move(beta0)};
}

AffineChange make_affine_general(const QMatrix& alpha, const QMatrix& beta,
                                 std::vector<Rational> alpha0, std::vector<Rational> beta0) {
    const std::size_t m = alpha.size();
    require_square(alpha, m, "make_affine_general");
    require_square(beta, m, "make_affine_general");
    if (alpha0.size() != m || beta0.size() != m)
        throw DimensionError("make_affine_general: offset size mismatch");
    if (sgn(qdet(alpha)) == 0 || sgn(qdet(beta)) == 0)
        throw SingularError("make_affine_general: singular block");
    return AffineChange{alpha, beta, std::move(alpha0), std::move(beta0)};
}

Rational frame_change_det(const AffineChange& ch) { return qdet(ch.alpha) * qdet(ch.beta); }

Density transform_density(const Density& d, const AffineChange& ch) {
    const std::size_t m = ch.alpha.size(), n = d.cs->dim();
    if (2 * m != n) throw DimensionError("transform_density: block size mismatch");
    if (d.weight.get_den() != 1)
        throw ValidationError("transform_density: weight must be an integer");

    std::vector<Polynomial> images;
    images.reserve(n);
    for (std::size_t i = 0; i < m; ++i) {
        Polynomial p = Polynomial::constant(n, ch.alpha0[i]);
        for (std::size_t j = 0; j < m; ++j)
            p += Polynomial::variable(n, j).scaled(ch.alpha[i][j]);
        images.push_back(std::move(p));
    }
    for (std::size_t i = 0; i < m; ++i) {
        Polynomial p = Polynomial::constant(n, ch.beta0[i]);
        for (std::size_t k = 0; k < m; ++k)
            p += Polynomial::variable(n, m + k).scaled(ch.beta[i][k]);
        images.push_back(std::move(p));
    }

    const Rational lam = abs(frame_change_det(ch));
    if (sgn(lam) == 0) throw SingularError("transform_density: singular frame change");
    // factor |det lambda|^{-s}
    const long s = d.weight.get_num().get_si();
    Rational factor(1);
    for (long k = 0; k < (s < 0 ? -s : s); ++k) factor *= lam;
    if (s > 0) factor = Rational(1) / factor;

    ScalarExpr comp = d.component.compose(images).scaled(factor);
    return make_density(d.cs, d.weight, std::move(comp));
}

} // namespace dfgeo
