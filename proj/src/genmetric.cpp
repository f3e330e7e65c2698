#include "dfgeo/genmetric.hpp"

#include "dfgeo/algebroid.hpp"
#include "dfgeo/errors.hpp"

namespace dfgeo {

namespace {

void require_square(const Matrix& a, std::size_t m, const char* what) {
    if (a.size() != m) throw ValidationError(std::string(what) + ": wrong row count");
    for (const auto& row : a)
        if (row.size() != m) throw ValidationError(std::string(what) + ": wrong column count");
}

Matrix gamma_matrix(const CoordPtr& cs) {
    const std::size_t m = cs->m(), n = cs->dim();
    Matrix g = zero_matrix(n, n, n);
    for (std::size_t i = 0; i < m; ++i) {
        g[i][m + i] = ScalarExpr::constant(n, Rational(1));
        g[m + i][i] = ScalarExpr::constant(n, Rational(1));
    }
    return g;
}

} // namespace

FieldSpec make_field_spec(CoordPtr cs, Matrix g, Matrix B, ScalarExpr phi, int p, int q,
                          std::vector<Rational> reference_point) {
    const std::size_t m = cs->m();
    require_square(g, m, "field g");
    require_square(B, m, "field B");
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j) {
            if (g[i][j] != g[j][i]) throw ValidationError("field g: not symmetric");
            if (B[i][j] != -B[j][i]) throw ValidationError("field B: not antisymmetric");
        }
    if (p < 0 || q < 0 || static_cast<std::size_t>(p + q) != m)
        throw ValidationError("field: inertia indices must satisfy p + q = m");
    if (reference_point.size() != cs->dim())
        throw ValidationError("field: reference point has wrong dimension");
    if (det(g).is_zero()) throw ValidationError("field g: determinant vanishes identically");

    QMatrix g0;
    try {
        g0 = eval_matrix(g, reference_point);
    } catch (const PoleError&) {
        throw ValidationError("field g: pole at the reference point");
    }
    const Signature sig = signature_symmetric(g0);
    if (sig.zero != 0) throw ValidationError("field g: degenerate at the reference point");
    if (sig.positive != p || sig.negative != q)
        throw ValidationError("field g: signature at the reference point is (" +
                              std::to_string(sig.positive) + "," + std::to_string(sig.negative) +
                              "), declared (" + std::to_string(p) + "," + std::to_string(q) + ")");

    FieldSpec f;
    f.cs = std::move(cs);
    f.g = std::move(g);
    f.B = std::move(B);
    f.phi = std::move(phi);
    f.p = p;
    f.q = q;
    f.reference_point = std::move(reference_point);
    return f;
}

GeneralizedMetric build_H(const FieldSpec& field) {
    const std::size_t m = field.m(), n = field.cs->dim();
    Matrix ginv;
    try {
        ginv = inverse(field.g);
    } catch (const SingularError&) {
        throw ValidationError("build_H: degenerate g");
    }
    const Matrix gB = mat_mul(ginv, field.B);           // (g^-1 B)[j][i] = g^{jk} B_{ki}
    const Matrix hxx = mat_sub(field.g, mat_mul(field.B, gB));

    Matrix H = zero_matrix(n, n, n);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j) {
            H[i][j] = hxx[i][j];
            H[i][m + j] = gB[j][i];
            H[m + j][i] = gB[j][i];
            H[m + i][m + j] = ginv[i][j];
        }

    GeneralizedMetric gm;
    gm.field = field;
    gm.Phi = mat_mul(inverse(H), gamma_matrix(field.cs));
    gm.H = std::move(H);
    return gm;
}

VectorField iota(int sign, const VectorField& X, const FieldSpec& field) {
    if (sign != 1 && sign != -1) throw ValidationError("iota: sign must be +1 or -1");
    require_l_support(X, "iota");
    const Matrix A = sign > 0 ? mat_add(field.B, field.g) : mat_sub(field.B, field.g);
    return X + sharp_gamma(flat_l(A, X));
}

Matrix iota_frame_matrix(int sign, const FieldSpec& field) {
    const std::size_t m = field.m(), n = field.cs->dim();
    Matrix T = zero_matrix(n, m, n);
    const Matrix A = sign > 0 ? mat_add(field.B, field.g) : mat_sub(field.B, field.g);
    for (std::size_t j = 0; j < m; ++j) {
        T[j][j] = ScalarExpr::constant(n, Rational(1));
        for (std::size_t i = 0; i < m; ++i) T[m + i][j] = A[j][i];
    }
    return T;
}

Splitting splitting_of(const FieldSpec& field) {
    Splitting s;
    const std::size_t m = field.m();
    for (std::size_t j = 0; j < m; ++j) {
        const VectorField e = frame_vector(field.cs, j);
        s.s_plus.push_back(iota(+1, e, field));
        s.s_minus.push_back(iota(-1, e, field));
    }
    return s;
}

std::pair<VectorField, VectorField> decompose_factors(const VectorField& Z,
                                                      const FieldSpec& field) {
    require_vector(Z, "decompose_Spm");
    require_same(Z.coords(), field.cs);
    const VectorField Zl = pr_L(Z);
    const CovectorField alpha = flat_gamma(pr_Ltilde(Z));
    const VectorField corr = sharp_l(field.g, flat_l(field.B, Zl) - alpha);
    const VectorField X1 = (Zl - corr).scaled(Rational(1, 2));
    const VectorField X2 = (Zl + corr).scaled(Rational(1, 2));
    return {X1, X2};
}

std::pair<VectorField, VectorField> decompose_Spm(const VectorField& Z, const FieldSpec& field) {
    auto [x1, x2] = decompose_factors(Z, field);
    return {iota(+1, x1, field), iota(-1, x2, field)};
}

RecoveredField recover_field(const Matrix& H, const CoordPtr& cs) {
    const std::size_t m = cs->m(), n = cs->dim();
    require_square(H, n, "recover_field: H");
    for (std::size_t u = 0; u < n; ++u)
        for (std::size_t v = 0; v < u; ++v)
            if (H[u][v] != H[v][u]) throw ValidationError("recover_field: H not symmetric");

    Matrix htt = zero_matrix(m, m, n);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j) htt[i][j] = H[m + i][m + j];
    RecoveredField r;
    try {
        r.g = inverse(htt);
    } catch (const SingularError&) {
        throw SingularError("recover_field: tilde block of H is degenerate");
    }
    // psi^j_i = H[i][m+j]; B_{ij} = -g_{jk} psi^k_i.
    r.B = zero_matrix(m, m, n);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j) {
            ScalarExpr acc(n);
            for (std::size_t k = 0; k < m; ++k) acc += H[i][m + k] * r.g[k][j];
            r.B[i][j] = -acc;
        }
    return r;
}

bool check_level_matching(const FieldSpec& field) {
    for (const auto& row : field.g)
        for (const auto& e : row)
            if (!is_foliated(e, field.cs)) return false;
    for (const auto& row : field.B)
        for (const auto& e : row)
            if (!is_foliated(e, field.cs)) return false;
    return is_foliated(field.phi, field.cs);
}

bool check_level_matching(const TensorField& T) { return is_strongly_foliated(T); }

namespace {

// Classical Lie derivative of an m x m covariant leaf tensor along V in L.
Matrix leaf_lie_matrix(const VectorField& V, const Matrix& A, const CoordPtr& cs) {
    const std::size_t m = cs->m(), n = cs->dim();
    Matrix out = zero_matrix(m, m, n);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j) {
            ScalarExpr acc(n);
            for (std::size_t k = 0; k < m; ++k) {
                acc += V.at({k}) * A[i][j].derivative(k);
                acc += A[k][j] * V.at({k}).derivative(i);
                acc += A[i][k] * V.at({k}).derivative(j);
            }
            out[i][j] = std::move(acc);
        }
    return out;
}

bool matrix_is_zero(const Matrix& a) {
    for (const auto& row : a)
        for (const auto& e : row)
            if (!e.is_zero()) return false;
    return true;
}

} // namespace

bool is_generalized_killing(const VectorField& X, const FieldSpec& field) {
    require_vector(X, "is_generalized_killing");
    require_same(X.coords(), field.cs);
    if (!check_level_matching(field))
        throw ValidationError("is_generalized_killing: field is not level matched");
    if (!is_strongly_foliated(X))
        throw ValidationError("is_generalized_killing: X is not strongly foliated");

    const GeneralizedMetric gm = build_H(field);
    const TensorField Htensor = matrix_to_tensor(field.cs, gm.H, {Slot::C, Slot::C});
    const bool direct = gen_lie_derivative(X, Htensor).is_zero();

    const VectorField V = pr_L(X);
    const bool leafwise = matrix_is_zero(leaf_lie_matrix(V, field.g, field.cs)) &&
                          matrix_is_zero(leaf_lie_matrix(V, field.B, field.cs));
    if (direct != leafwise)
        throw Error("is_generalized_killing: direct and leafwise criteria disagree");
    return direct;
}

CovectorField flat_l(const Matrix& A, const VectorField& X) {
    require_l_support(X, "flat_l");
    const CoordPtr& cs = X.coords();
    const std::size_t m = cs->m(), n = cs->dim();
    require_square(A, m, "flat_l: matrix");
    std::vector<ScalarExpr> out(n, ScalarExpr(n));
    for (std::size_t v = 0; v < m; ++v) {
        ScalarExpr acc(n);
        for (std::size_t u = 0; u < m; ++u) {
            if (X.at({u}).is_zero() || A[u][v].is_zero()) continue;
            acc += X.at({u}) * A[u][v];
        }
        out[v] = std::move(acc);
    }
    return TensorField::covector(cs, std::move(out));
}

VectorField sharp_l(const Matrix& A, const CovectorField& alpha) {
    require_l_support(alpha, "sharp_l");
    const CoordPtr& cs = alpha.coords();
    const std::size_t m = cs->m(), n = cs->dim();
    require_square(A, m, "sharp_l: matrix");
    Matrix ainv;
    try {
        ainv = inverse(A);
    } catch (const SingularError&) {
        throw SingularError("sharp_l: degenerate metric");
    }
    std::vector<ScalarExpr> out(n, ScalarExpr(n));
    for (std::size_t j = 0; j < m; ++j) {
        ScalarExpr acc(n);
        for (std::size_t v = 0; v < m; ++v) {
            if (alpha.at({v}).is_zero()) continue;
            acc += ainv[j][v] * alpha.at({v});
        }
        out[j] = std::move(acc);
    }
    return TensorField::vector(cs, std::move(out));
}

} // namespace dfgeo
