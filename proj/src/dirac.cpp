#include "dfgeo/dirac.hpp"

#include "dfgeo/algebroid.hpp"
#include "dfgeo/errors.hpp"
#include "dfgeo/linalg.hpp"

namespace dfgeo {

namespace {

VectorField nabla0(const VectorField& Z, const VectorField& Y) {
    const CoordPtr& cs = Y.coords();
    const std::size_t n = cs->dim();
    std::vector<ScalarExpr> out(n, ScalarExpr(n));
    for (std::size_t w = 0; w < n; ++w) out[w] = apply_vector(Z, Y.at({w}));
    return TensorField::vector(cs, std::move(out));
}

Matrix span_matrix(const ParaDirac& D) {
    const std::size_t n = D.cs->dim();
    Matrix m = zero_matrix(n, D.span.size(), n);
    for (std::size_t c = 0; c < D.span.size(); ++c)
        for (std::size_t r = 0; r < n; ++r) m[r][c] = D.span[c].at({r});
    return m;
}

// Matrix of flat_A : L -> L*, (flat_A X)_v = X^u A[u][v].
Matrix flat_matrix(const Matrix& A) { return transpose(A); }

// Matrix of sharp_P : L* -> L, (sharp_P b)^j = b_i P[i][j].
Matrix sharp_bivector_matrix(const Matrix& P) { return transpose(P); }

VectorField column_as_l_vector(const CoordPtr& cs, const Matrix& A, std::size_t col) {
    const std::size_t n = cs->dim();
    std::vector<ScalarExpr> out(n, ScalarExpr(n));
    for (std::size_t i = 0; i < A.size(); ++i) out[i] = A[i][col];
    return TensorField::vector(cs, std::move(out));
}

void require_isometry(const Matrix& J, const FieldSpec& field, const char* ctx) {
    const Matrix lhs = mat_mul(mat_mul(transpose(J), field.g), J);
    if (!mat_equal(lhs, field.g))
        throw ValidationError(std::string(ctx) + ": J is not a g-isometry");
}

} // namespace

ParaDirac make_para_dirac(const CoordPtr& cs, std::vector<VectorField> span,
                          const std::vector<Rational>& reference_point) {
    const std::size_t m = static_cast<std::size_t>(cs->m());
    if (span.size() != m) throw DimensionError("para-Dirac span must have m fields");
    for (const auto& s : span) {
        require_vector(s, "para-Dirac span");
        require_same(s.coords(), cs);
    }
    ParaDirac D{cs, std::move(span), true};
    if (rank_rational(eval_matrix(span_matrix(D), reference_point)) != m)
        throw ValidationError("para-Dirac span is rank deficient at the reference point");
    for (std::size_t i = 0; i < m && D.isotropic; ++i)
        for (std::size_t j = i; j < m && D.isotropic; ++j)
            if (!pair_gamma(D.span[i], D.span[j]).is_zero()) D.isotropic = false;
    return D;
}

ParaDirac dirac_from_isometry(const Matrix& J, const FieldSpec& field) {
    const std::size_t m = field.m();
    if (J.size() != m) throw DimensionError("dirac_from_isometry: J must be m x m");
    require_isometry(J, field, "dirac_from_isometry");
    std::vector<VectorField> span;
    for (std::size_t i = 0; i < m; ++i) {
        const VectorField ji = column_as_l_vector(field.cs, J, i);
        span.push_back(iota(+1, frame_vector(field.cs, i), field) + iota(-1, ji, field));
    }
    return make_para_dirac(field.cs, std::move(span), field.reference_point);
}

Matrix isometry_from_dirac(const ParaDirac& D, const GeneralizedMetric& gm) {
    const FieldSpec& field = gm.field;
    require_same(D.cs, field.cs);
    const std::size_t m = field.m(), n = field.cs->dim();
    if (!D.isotropic) throw ValidationError("isometry_from_dirac: span is not isotropic");

    Matrix gram = zero_matrix(m, m, n);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j) gram[i][j] = pair_H(gm, D.span[i], D.span[j]);
    if (det(gram).is_zero())
        throw ValidationError("isometry_from_dirac: H restricted to the span is degenerate");

    // Almost product with D at +1 and Phi(D) = D-perp at -1.
    Matrix M = zero_matrix(n, n, n);
    for (std::size_t c = 0; c < m; ++c) {
        const VectorField phi_c = apply_Phi(gm, D.span[c]);
        for (std::size_t r = 0; r < n; ++r) {
            M[r][c] = D.span[c].at({r});
            M[r][m + c] = phi_c.at({r});
        }
    }
    Matrix signs = identity_matrix(n, n);
    for (std::size_t c = m; c < n; ++c) signs[c][c] = ScalarExpr::constant(n, Rational(-1));
    Matrix psi;
    try {
        psi = mat_mul(mat_mul(M, signs), inverse(M));
    } catch (const SingularError&) {
        throw ValidationError("isometry_from_dirac: span and its H-orthogonal do not split TM");
    }

    Matrix J = zero_matrix(m, m, n);
    for (std::size_t i = 0; i < m; ++i) {
        const VectorField plus = iota(+1, frame_vector(field.cs, i), field);
        std::vector<ScalarExpr> col(n, ScalarExpr(n));
        for (std::size_t r = 0; r < n; ++r) col[r] = plus.at({r});
        const std::vector<ScalarExpr> image = mat_vec(psi, col);
        const VectorField w = TensorField::vector(field.cs, image);
        auto [x1, x2] = decompose_factors(w, field);
        if (!x1.is_zero())
            throw ValidationError("isometry_from_dirac: Psi does not map S+ to S-");
        for (std::size_t k = 0; k < m; ++k) J[k][i] = x2.at({k});
    }
    require_isometry(J, field, "isometry_from_dirac");
    return J;
}

ParaDirac graph_dirac(GraphKind kind, const TensorField& tensor,
                      const std::vector<Rational>& reference_point) {
    const CoordPtr& cs = tensor.coords();
    const std::size_t m = static_cast<std::size_t>(cs->m());
    if (tensor.rank() != 2) throw DimensionError("graph_dirac: rank-2 input expected");
    const Slot want = kind == GraphKind::two_form ? Slot::C : Slot::V;
    if (tensor.variance() != std::vector<Slot>{want, want})
        throw ValidationError("graph_dirac: wrong variance for the requested kind");
    for (std::size_t u = 0; u < cs->dim(); ++u)
        for (std::size_t v = 0; v < cs->dim(); ++v) {
            if (!tensor.at({u, v}).is_zero() && (u >= m || v >= m))
                throw ValidationError("graph_dirac: input must be supported on L");
            if (tensor.at({u, v}) != -tensor.at({v, u}))
                throw ValidationError("graph_dirac: input must be antisymmetric");
        }

    std::vector<VectorField> span;
    for (std::size_t i = 0; i < m; ++i) {
        VectorField s = kind == GraphKind::two_form ? frame_vector(cs, i)
                                                    : frame_vector(cs, m + i);
        for (std::size_t j = 0; j < m; ++j) {
            const ScalarExpr& c = tensor.at({i, j});
            if (c.is_zero()) continue;
            const std::size_t target = kind == GraphKind::two_form ? m + j : j;
            s.at({target}) += c;
        }
        span.push_back(std::move(s));
    }
    return make_para_dirac(cs, std::move(span), reference_point);
}

Matrix j_from_graph(GraphKind kind, const TensorField& tensor, const FieldSpec& field) {
    const std::size_t m = field.m(), n = field.cs->dim();
    Matrix comp = zero_matrix(m, m, n);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j) comp[i][j] = tensor.at({i, j});
    const Matrix ginv = inverse(field.g);
    const Matrix id = identity_matrix(m, n);

    auto inverse_or_report = [&](const Matrix& factor, const char* which) {
        try {
            return inverse(factor);
        } catch (const SingularError&) {
            auto names = [&](std::size_t i) { return field.cs->name(i); };
            throw ValidationError(std::string("j_from_graph: singular factor ") + which +
                                  ", det = " + det(factor).to_string(names));
        }
    };

    if (kind == GraphKind::two_form) {
        const Matrix N = mat_mul(ginv, flat_matrix(mat_sub(field.B, comp)));
        return mat_mul(mat_add(id, N), inverse_or_report(mat_sub(id, N), "Id - sharp_g flat_(B-theta)"));
    }
    const Matrix core = mat_mul(sharp_bivector_matrix(comp), flat_matrix(field.g));
    const Matrix qp = mat_mul(mat_mul(ginv, flat_matrix(mat_add(field.B, field.g))), core);
    const Matrix qm = mat_scaled(mat_mul(mat_mul(ginv, flat_matrix(mat_sub(field.B, field.g))), core),
                                 ScalarExpr::constant(n, Rational(-1)));
    return mat_mul(mat_sub(qp, id), inverse_or_report(mat_add(qm, id), "Q- + Id"));
}

ParaDirac reconstruct(const std::vector<VectorField>& E, const Matrix& varpi,
                      const std::vector<Rational>& reference_point) {
    if (E.empty() && !varpi.empty())
        throw DimensionError("reconstruct: varpi must be empty for an empty E");
    CoordPtr cs;
    if (!E.empty()) cs = E.front().coords();
    const std::size_t k = E.size();
    if (varpi.size() != k) throw DimensionError("reconstruct: varpi must be k x k");
    for (const auto& row : varpi)
        if (row.size() != k) throw DimensionError("reconstruct: varpi must be k x k");
    for (std::size_t a = 0; a < k; ++a) {
        require_l_support(E[a], "reconstruct");
        for (std::size_t b = 0; b < k; ++b)
            if (varpi[a][b] != -varpi[b][a])
                throw ValidationError("reconstruct: varpi must be antisymmetric");
    }
    if (k == 0) throw ValidationError("reconstruct: pass E = {} via the m = 0 span directly");

    const std::size_t m = static_cast<std::size_t>(cs->m()), n = cs->dim();
    Matrix emat = zero_matrix(m, k, n); // columns E_a on L
    for (std::size_t a = 0; a < k; ++a)
        for (std::size_t i = 0; i < m; ++i) emat[i][a] = E[a].at({i});
    {
        QMatrix e0 = eval_matrix(emat, reference_point);
        if (rank_rational(e0) != k)
            throw ValidationError("reconstruct: E is rank deficient at the reference point");
    }

    // alpha(E_b) = varpi(E_a, E_b) determines alpha up to ann(E); the span is
    // E_a + sharp_gamma(alpha_a) together with sharp_gamma of the annihilator.
    const Matrix et = transpose(emat); // k x m
    std::vector<VectorField> span;
    LinearSolution base;
    for (std::size_t a = 0; a < k; ++a) {
        std::vector<ScalarExpr> rhs(k, ScalarExpr(n));
        for (std::size_t b = 0; b < k; ++b) rhs[b] = varpi[a][b];
        LinearSolution sol = solve_general(et, rhs);
        if (!sol.consistent)
            throw ValidationError("reconstruct: rank of E drops on the chart");
        if (a == 0) base = sol;
        std::vector<ScalarExpr> alpha(n, ScalarExpr(n));
        for (std::size_t i = 0; i < m; ++i) alpha[i] = sol.particular[i];
        span.push_back(E[a] + sharp_gamma(TensorField::covector(cs, std::move(alpha))));
    }
    if (base.nullspace.size() != m - k)
        throw ValidationError("reconstruct: rank of E drops on the chart");
    for (const auto& nv : base.nullspace) {
        std::vector<ScalarExpr> alpha(n, ScalarExpr(n));
        for (std::size_t i = 0; i < m; ++i) alpha[i] = nv[i];
        span.push_back(sharp_gamma(TensorField::covector(cs, std::move(alpha))));
    }
    return make_para_dirac(cs, std::move(span), reference_point);
}

bool check_integrability(const ParaDirac& D, int criterion) {
    if (criterion < 0 || criterion > 5)
        throw ValidationError("check_integrability: criterion must be 0 (paraint5) or 1..5");
    if (!D.isotropic) throw ValidationError("check_integrability: span is not isotropic");
    if (criterion == 0)
        for (const auto& s : D.span)
            if (!is_strongly_foliated(s))
                throw ValidationError("check_integrability: paraint5 needs a strongly foliated span");

    const std::size_t m = D.span.size();
    for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = 0; b < m; ++b)
            for (std::size_t c = 0; c < m; ++c) {
                const VectorField& X = D.span[a];
                const VectorField& Y = D.span[b];
                const VectorField& Z = D.span[c];
                ScalarExpr r(D.cs->dim());
                switch (criterion) {
                case 1:
                    r = pair_gamma(c_bracket(X, Y), Z);
                    break;
                case 2:
                    r = pair_gamma(X, nabla0(Z, Y)) - pair_gamma(lie_bracket(X, Y), Z);
                    break;
                case 3:
                    r = pair_gamma(X, nabla0(Z, Y)) + pair_gamma(Y, nabla0(X, Z)) +
                        pair_gamma(Z, nabla0(Y, X));
                    break;
                case 4:
                    r = pair_gamma(lie_bracket(X, Y), Z) + pair_gamma(lie_bracket(Y, Z), X) +
                        pair_gamma(lie_bracket(Z, X), Y);
                    break;
                case 5:
                    r = pair_gamma(wedge_nabla0(X, Y), Z) + pair_gamma(wedge_nabla0(Y, Z), X) +
                        pair_gamma(wedge_nabla0(Z, X), Y);
                    break;
                case 0:
                    r = apply_vector(X, pair_omega(Y, Z)) - apply_vector(Y, pair_omega(X, Z)) +
                        apply_vector(Z, pair_omega(X, Y)) - pair_omega(c_bracket(X, Y), Z) +
                        pair_omega(c_bracket(X, Z), Y) - pair_omega(c_bracket(Y, Z), X);
                    break;
                }
                if (!r.is_zero()) return false;
            }
    return true;
}

ScalarExpr pair_H(const GeneralizedMetric& gm, const VectorField& Z, const VectorField& U) {
    require_vector(Z, "pair_H");
    require_vector(U, "pair_H");
    const std::size_t n = gm.field.cs->dim();
    ScalarExpr acc(n);
    for (std::size_t u = 0; u < n; ++u)
        for (std::size_t v = 0; v < n; ++v) {
            if (Z.at({u}).is_zero() || gm.H[u][v].is_zero() || U.at({v}).is_zero()) continue;
            acc += Z.at({u}) * gm.H[u][v] * U.at({v});
        }
    return acc;
}

VectorField apply_Phi(const GeneralizedMetric& gm, const VectorField& Z) {
    require_vector(Z, "apply_Phi");
    const std::size_t n = gm.field.cs->dim();
    std::vector<ScalarExpr> col(n, ScalarExpr(n));
    for (std::size_t r = 0; r < n; ++r) col[r] = Z.at({r});
    return TensorField::vector(gm.field.cs, mat_vec(gm.Phi, col));
}

PsiTriple psi_triple(const ParaDirac& D, const GeneralizedMetric& gm) {
    const FieldSpec& field = gm.field;
    const std::size_t m = field.m(), n = field.cs->dim();
    const Matrix J = isometry_from_dirac(D, gm);
    Matrix Jinv;
    try {
        Jinv = inverse(J);
    } catch (const SingularError&) {
        throw ValidationError("psi_triple: singular J");
    }
    const ScalarExpr half = ScalarExpr::constant(n, Rational(1, 2));
    const Matrix ginv = inverse(field.g);
    const Matrix sharp_pi = mat_scaled(mat_mul(mat_sub(J, Jinv), ginv), half);
    const Matrix A = mat_sub(mat_scaled(mat_add(J, Jinv), half),
                             mat_mul(sharp_pi, flat_matrix(field.B)));
    const Matrix flat_sigma = mat_sub(mat_mul(flat_matrix(field.B), mat_add(J, Jinv)),
                                      mat_mul(transpose(A), flat_matrix(field.B)));

    PsiTriple out;
    out.A = A;
    out.pi = transpose(sharp_pi);
    out.sigma = transpose(flat_sigma);

    const Matrix id = identity_matrix(m, n);
    if (!mat_equal(mat_mul(A, A), mat_sub(id, mat_mul(sharp_pi, flat_sigma))))
        throw Error("psi_triple: A^2 invariant violated");
    if (!mat_equal(mat_mul(A, out.pi), mat_mul(out.pi, transpose(A))))
        throw Error("psi_triple: pi compatibility violated");
    if (!mat_equal(mat_mul(transpose(A), out.sigma), mat_mul(out.sigma, A)))
        throw Error("psi_triple: sigma compatibility violated");
    return out;
}

namespace {

bool stays_in_span(const ParaDirac& D,
                   const std::function<VectorField(const VectorField&, const VectorField&)>& op) {
    const std::size_t m = D.span.size();
    const Matrix base = span_matrix(D);
    if (rank_symbolic(base) != m) return false;
    for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = 0; b < m; ++b) {
            const VectorField w = op(D.span[a], D.span[b]);
            Matrix aug = base;
            for (std::size_t r = 0; r < D.cs->dim(); ++r) aug[r].push_back(w.at({r}));
            if (rank_symbolic(aug) != m) return false;
        }
    return true;
}

} // namespace

bool span_involutive_lie(const ParaDirac& D) {
    return stays_in_span(D, [](const VectorField& x, const VectorField& y) {
        return lie_bracket(x, y);
    });
}

bool span_totally_geodesic(const ParaDirac& D) {
    return stays_in_span(D, [](const VectorField& x, const VectorField& y) {
        return nabla0(x, y);
    });
}

} // namespace dfgeo
