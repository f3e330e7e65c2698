#include "dfgeo/algebroid.hpp"

#include "dfgeo/connection.hpp"
#include "dfgeo/errors.hpp"

namespace dfgeo {

VectorField d_operator(const ScalarExpr& f, const CoordPtr& cs) {
    const std::size_t n = cs->dim();
    if (f.nvars() != n) throw DimensionError("d_operator: scalar has wrong variable count");
    std::vector<ScalarExpr> df;
    df.reserve(n);
    for (std::size_t u = 0; u < n; ++u) df.push_back(f.derivative(u));
    return sharp_gamma(TensorField::covector(cs, std::move(df))).scaled(Rational(1, 2));
}

VectorField lie_bracket(const VectorField& X, const VectorField& Y) {
    require_vector(X, "lie_bracket");
    require_vector(Y, "lie_bracket");
    require_same(X.coords(), Y.coords());
    const std::size_t n = X.dim();
    std::vector<ScalarExpr> out;
    out.reserve(n);
    for (std::size_t w = 0; w < n; ++w)
        out.push_back(apply_vector(X, Y.at({w})) - apply_vector(Y, X.at({w})));
    return TensorField::vector(X.coords(), std::move(out));
}

VectorField wedge_nabla0(const VectorField& X, const VectorField& Y) {
    require_vector(X, "wedge_nabla0");
    require_vector(Y, "wedge_nabla0");
    require_same(X.coords(), Y.coords());
    const std::size_t n = X.dim();
    std::vector<ScalarExpr> phi;
    phi.reserve(n);
    for (std::size_t u = 0; u < n; ++u) {
        const TensorField dY = partial_tensor(Y, u);
        const TensorField dX = partial_tensor(X, u);
        phi.push_back((pair_gamma(X, dY) - pair_gamma(Y, dX)).scaled(Rational(1, 2)));
    }
    return sharp_gamma(TensorField::covector(X.coords(), std::move(phi)));
}

VectorField c_bracket(const VectorField& X, const VectorField& Y) {
    return lie_bracket(X, Y) - wedge_nabla0(X, Y);
}

VectorField star_product(const VectorField& X, const VectorField& Y) {
    return c_bracket(X, Y) + d_operator(pair_gamma(X, Y), X.coords());
}

VectorField assemble_pair(const VectorField& X, const CovectorField& alpha) {
    require_vector(X, "assemble_pair");
    return X + sharp_gamma(alpha);
}

std::pair<VectorField, CovectorField> split_pair(const VectorField& Z) {
    require_vector(Z, "split_pair");
    return {pr_L(Z), flat_gamma(pr_Ltilde(Z))};
}

namespace {

// Lie derivative in the Lie algebroid L: (L_X beta)_h = xi^j dbeta_h/dx^j + beta_j dxi^j/dx^h.
CovectorField l_lie_form(const VectorField& X, const CovectorField& beta) {
    const CoordPtr& cs = X.coords();
    const std::size_t m = cs->m();
    std::vector<ScalarExpr> out(cs->dim(), ScalarExpr(cs->dim()));
    for (std::size_t h = 0; h < m; ++h) {
        ScalarExpr acc(cs->dim());
        for (std::size_t j = 0; j < m; ++j) {
            acc += X.at({j}) * beta.at({h}).derivative(j);
            acc += beta.at({j}) * X.at({j}).derivative(h);
        }
        out[h] = std::move(acc);
    }
    return TensorField::covector(cs, std::move(out));
}

// Lie derivative in the Lie algebroid L* (anchor sharp_gamma):
// (L*_alpha Y)^h = alpha_j deta^h/dxt_j + eta^j dalpha_j/dxt_h.
VectorField lstar_lie_vec(const CovectorField& alpha, const VectorField& Y) {
    const CoordPtr& cs = alpha.coords();
    const std::size_t m = cs->m();
    std::vector<ScalarExpr> out(cs->dim(), ScalarExpr(cs->dim()));
    for (std::size_t h = 0; h < m; ++h) {
        ScalarExpr acc(cs->dim());
        for (std::size_t j = 0; j < m; ++j) {
            acc += alpha.at({j}) * Y.at({h}).derivative(m + j);
            acc += Y.at({j}) * alpha.at({j}).derivative(m + h);
        }
        out[h] = std::move(acc);
    }
    return TensorField::vector(cs, std::move(out));
}

// [alpha, beta]_* = flat_gamma [sharp_gamma alpha, sharp_gamma beta].
CovectorField lstar_bracket(const CovectorField& alpha, const CovectorField& beta) {
    return flat_gamma(lie_bracket(sharp_gamma(alpha), sharp_gamma(beta)));
}

// d_L f = (df/dx^h) dx^h.
CovectorField d_leaf(const ScalarExpr& f, const CoordPtr& cs) {
    const std::size_t m = cs->m();
    std::vector<ScalarExpr> out(cs->dim(), ScalarExpr(cs->dim()));
    for (std::size_t h = 0; h < m; ++h) out[h] = f.derivative(h);
    return TensorField::covector(cs, std::move(out));
}

// d_* f = (df/dxt_h) d/dx^h.
VectorField d_star(const ScalarExpr& f, const CoordPtr& cs) {
    const std::size_t m = cs->m();
    std::vector<ScalarExpr> out(cs->dim(), ScalarExpr(cs->dim()));
    for (std::size_t h = 0; h < m; ++h) out[h] = f.derivative(m + h);
    return TensorField::vector(cs, std::move(out));
}

} // namespace

VectorField c_bracket_lwz(const VectorField& X, const CovectorField& alpha,
                          const VectorField& Y, const CovectorField& beta) {
    require_vector(X, "c_bracket_lwz");
    require_vector(Y, "c_bracket_lwz");
    require_covector(alpha, "c_bracket_lwz");
    require_covector(beta, "c_bracket_lwz");
    require_same(X.coords(), Y.coords());
    require_same(X.coords(), alpha.coords());
    require_same(X.coords(), beta.coords());
    require_l_support(X, "c_bracket_lwz: X");
    require_l_support(Y, "c_bracket_lwz: Y");
    require_l_support(alpha, "c_bracket_lwz: alpha");
    require_l_support(beta, "c_bracket_lwz: beta");

    const CoordPtr& cs = X.coords();
    const ScalarExpr f = pair_dual(alpha, Y) - pair_dual(beta, X);

    VectorField vec_part = lie_bracket(X, Y) + lstar_lie_vec(alpha, Y) - lstar_lie_vec(beta, X) -
                           d_star(f, cs).scaled(Rational(1, 2));
    CovectorField form_part = lstar_bracket(alpha, beta) + l_lie_form(X, beta) -
                              l_lie_form(Y, alpha) + d_leaf(f, cs).scaled(Rational(1, 2));
    return assemble_pair(vec_part, form_part);
}

SFieldForm::SFieldForm(TensorField form) : S(std::move(form)), closed_on_L(false) {
    if (S.rank() != 2 || S.variance()[0] != Slot::C || S.variance()[1] != Slot::C)
        throw ValidationError("SFieldForm: needs a 2-covector");
    const std::size_t n = S.dim(), m = S.coords()->m();
    for (std::size_t u = 0; u < n; ++u)
        for (std::size_t v = 0; v < n; ++v) {
            if (S.at({u, v}) != -S.at({v, u}))
                throw ValidationError("SFieldForm: not antisymmetric");
            if ((u >= m || v >= m) && !S.at({u, v}).is_zero())
                throw ValidationError("SFieldForm: support leaves L");
        }
    closed_on_L = true;
    for (std::size_t i = 0; i < m && closed_on_L; ++i)
        for (std::size_t j = i + 1; j < m && closed_on_L; ++j)
            for (std::size_t k = j + 1; k < m && closed_on_L; ++k) {
                const ScalarExpr d = S.at({j, k}).derivative(i) - S.at({i, k}).derivative(j) +
                                     S.at({i, j}).derivative(k);
                if (!d.is_zero()) closed_on_L = false;
            }
}

VectorField s_field_transform(const SFieldForm& S, const VectorField& X) {
    require_vector(X, "s_field_transform");
    require_same(X.coords(), S.S.coords());
    const CoordPtr& cs = X.coords();
    const std::size_t n = cs->dim();
    const VectorField XL = pr_L(X);
    std::vector<ScalarExpr> contr(n, ScalarExpr(n));
    for (std::size_t u = 0; u < n; ++u) {
        ScalarExpr acc(n);
        for (std::size_t v = 0; v < n; ++v) {
            if (XL.at({v}).is_zero() || S.S.at({v, u}).is_zero()) continue;
            acc += XL.at({v}) * S.S.at({v, u});
        }
        contr[u] = std::move(acc);
    }
    return X + sharp_gamma(TensorField::covector(cs, std::move(contr)));
}

TensorField gen_lie_derivative(const VectorField& X, const TensorField& T) {
    require_vector(X, "gen_lie_derivative");
    require_same(X.coords(), T.coords());
    const CoordPtr& cs = T.coords();
    const std::size_t n = cs->dim();
    const std::size_t rank = T.rank();

    // star[u] = X * e_u, tabulated once.
    std::vector<VectorField> star;
    star.reserve(n);
    for (std::size_t u = 0; u < n; ++u) star.push_back(star_product(X, frame_vector(cs, u)));

    TensorField out(cs, T.variance());
    std::vector<std::size_t> idx(rank, 0);
    while (true) {
        ScalarExpr acc = apply_vector(X, T.at(idx));
        for (std::size_t s = 0; s < rank; ++s) {
            std::vector<std::size_t> jdx = idx;
            if (T.variance()[s] == Slot::C) {
                for (std::size_t w = 0; w < n; ++w) {
                    const ScalarExpr& c = star[idx[s]].at({w});
                    if (c.is_zero()) continue;
                    jdx[s] = w;
                    acc -= c * T.at(jdx);
                }
            } else {
                for (std::size_t w = 0; w < n; ++w) {
                    const ScalarExpr& c = star[w].at({idx[s]});
                    if (c.is_zero()) continue;
                    jdx[s] = w;
                    acc += c * T.at(jdx);
                }
            }
        }
        out.at(idx) = std::move(acc);

        std::size_t s = rank;
        while (s > 0) {
            --s;
            if (++idx[s] < n) break;
            idx[s] = 0;
            if (s == 0) return out;
        }
        if (rank == 0) return out;
    }
}

bool is_foliated(const ScalarExpr& f, const CoordPtr& cs) {
    for (std::size_t j = cs->m(); j < cs->dim(); ++j)
        if (f.depends_on(j)) return false;
    return true;
}

bool is_strongly_foliated(const TensorField& T) {
    for (const auto& c : T.components())
        if (!is_foliated(c, T.coords())) return false;
    return true;
}

VectorField jacobiator(const VectorField& X, const VectorField& Y, const VectorField& Z,
                       JacMode mode) {
    require_vector(X, "jacobiator");
    require_vector(Y, "jacobiator");
    require_vector(Z, "jacobiator");
    require_same(X.coords(), Y.coords());
    require_same(X.coords(), Z.coords());
    if (mode == JacMode::leibniz)
        return star_product(X, star_product(Y, Z)) - star_product(star_product(X, Y), Z) -
               star_product(Y, star_product(X, Z));

    const CoordPtr& cs = X.coords();
    const VectorField* c[3] = {&X, &Y, &Z};
    VectorField lhs(cs, {Slot::V});
    VectorField rhs1(cs, {Slot::V});
    VectorField rhs2(cs, {Slot::V});
    VectorField rhs3(cs, {Slot::V});
    for (int k = 0; k < 3; ++k) {
        const VectorField& a = *c[k];
        const VectorField& b = *c[(k + 1) % 3];
        const VectorField& d = *c[(k + 2) % 3];
        lhs += c_bracket(c_bracket(a, b), d);
        rhs1 += d_operator(pair_gamma(c_bracket(a, b), d), cs);
        rhs2 += d_operator(pair_gamma(lie_bracket(a, b), d), cs);
        rhs3 += d_operator(pair_gamma(wedge_nabla0(b, a), d), cs);
    }
    rhs1 = rhs1.scaled(Rational(1, 3));
    rhs2 = rhs2.scaled(Rational(1, 2));
    if (rhs1 != rhs2 || rhs1 != rhs3)
        throw Error("jacobiator: equivalent right-hand sides disagree");
    return lhs - rhs1;
}

BracketTable::BracketTable(CoordPtr coords)
    : cs(std::move(coords)), coeff(cs->dim() * cs->dim() * cs->dim(), ScalarExpr(cs->dim())) {}

const ScalarExpr& BracketTable::at(std::size_t u, std::size_t v, std::size_t w) const {
    const std::size_t n = cs->dim();
    return coeff[(u * n + v) * n + w];
}

ScalarExpr& BracketTable::at(std::size_t u, std::size_t v, std::size_t w) {
    const std::size_t n = cs->dim();
    return coeff[(u * n + v) * n + w];
}

bool BracketTable::antisymmetric() const {
    const std::size_t n = cs->dim();
    for (std::size_t u = 0; u < n; ++u)
        for (std::size_t v = 0; v <= u; ++v)
            for (std::size_t w = 0; w < n; ++w)
                if (at(u, v, w) != -at(v, u, w)) return false;
    return true;
}

BracketTable BracketTable::tabulate(
    const CoordPtr& cs,
    const std::function<VectorField(const VectorField&, const VectorField&)>& bracket) {
    BracketTable t(cs);
    const std::size_t n = cs->dim();
    for (std::size_t u = 0; u < n; ++u)
        for (std::size_t v = 0; v < n; ++v) {
            const VectorField b = bracket(frame_vector(cs, u), frame_vector(cs, v));
            for (std::size_t w = 0; w < n; ++w) t.at(u, v, w) = b.at({w});
        }
    return t;
}

VectorField wedge_conn(const Connection& conn, const VectorField& X, const VectorField& Y) {
    require_vector(X, "wedge_conn");
    require_vector(Y, "wedge_conn");
    require_same(X.coords(), conn.cs);
    require_same(X.coords(), Y.coords());
    const CoordPtr& cs = X.coords();
    const std::size_t n = cs->dim();
    std::vector<ScalarExpr> phi;
    phi.reserve(n);
    for (std::size_t u = 0; u < n; ++u) {
        const VectorField e = frame_vector(cs, u);
        phi.push_back(
            (pair_gamma(X, conn.cov_deriv(e, Y)) - pair_gamma(Y, conn.cov_deriv(e, X)))
                .scaled(Rational(1, 2)));
    }
    return sharp_gamma(TensorField::covector(cs, std::move(phi)));
}

VectorField bracket_from_connection(const Connection& conn, const VectorField& X,
                                    const VectorField& Y) {
    require_gamma_preserving(conn, "bracket_from_connection");
    return conn.cov_deriv(X, Y) - conn.cov_deriv(Y, X) - wedge_conn(conn, X, Y);
}

} // namespace dfgeo
