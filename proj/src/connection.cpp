#include "dfgeo/connection.hpp"

#include "dfgeo/algebroid.hpp"
#include "dfgeo/errors.hpp"

#include <cmath>

namespace dfgeo {

Connection::Connection(CoordPtr coords)
    : cs(std::move(coords)), coef(cs->dim() * cs->dim() * cs->dim(), ScalarExpr(cs->dim())) {}

const ScalarExpr& Connection::at(std::size_t u, std::size_t v, std::size_t w) const {
    const std::size_t n = cs->dim();
    return coef[(u * n + v) * n + w];
}

ScalarExpr& Connection::at(std::size_t u, std::size_t v, std::size_t w) {
    const std::size_t n = cs->dim();
    return coef[(u * n + v) * n + w];
}

VectorField Connection::cov_deriv(const VectorField& Z, const VectorField& Y) const {
    require_vector(Z, "cov_deriv");
    require_vector(Y, "cov_deriv");
    require_same(Z.coords(), cs);
    require_same(Y.coords(), cs);
    const std::size_t n = cs->dim();
    std::vector<ScalarExpr> out(n, ScalarExpr(n));
    for (std::size_t w = 0; w < n; ++w) {
        ScalarExpr acc = apply_vector(Z, Y.at({w}));
        for (std::size_t u = 0; u < n; ++u) {
            if (Z.at({u}).is_zero()) continue;
            for (std::size_t v = 0; v < n; ++v) {
                if (Y.at({v}).is_zero() || at(u, v, w).is_zero()) continue;
                acc += Z.at({u}) * Y.at({v}) * at(u, v, w);
            }
        }
        out[w] = std::move(acc);
    }
    return TensorField::vector(cs, std::move(out));
}

Connection flat_connection(const CoordPtr& cs) { return Connection(cs); }

bool preserves_metric(const Connection& conn, const Matrix& metric) {
    const std::size_t n = conn.cs->dim();
    for (std::size_t u = 0; u < n; ++u)
        for (std::size_t v = 0; v < n; ++v)
            for (std::size_t w = v; w < n; ++w) {
                ScalarExpr r = metric[v][w].derivative(u);
                for (std::size_t s = 0; s < n; ++s) {
                    if (!conn.at(u, v, s).is_zero() && !metric[s][w].is_zero())
                        r -= conn.at(u, v, s) * metric[s][w];
                    if (!conn.at(u, w, s).is_zero() && !metric[v][s].is_zero())
                        r -= conn.at(u, w, s) * metric[v][s];
                }
                if (!r.is_zero()) return false;
            }
    return true;
}

bool preserves_gamma(const Connection& conn) {
    // gamma constant: preservation reduces to antisymmetry of the lowered
    // coefficients, Gamma_{uv}{}^{pair(w)} = -Gamma_{uw}{}^{pair(v)}.
    const std::size_t n = conn.cs->dim();
    for (std::size_t u = 0; u < n; ++u)
        for (std::size_t v = 0; v < n; ++v)
            for (std::size_t w = v; w < n; ++w) {
                const ScalarExpr& a = conn.at(u, v, conn.cs->pair_index(w));
                const ScalarExpr& b = conn.at(u, w, conn.cs->pair_index(v));
                if (a != -b) return false;
            }
    return true;
}

void require_gamma_preserving(const Connection& conn, const char* ctx) {
    if (!preserves_gamma(conn))
        throw ValidationError(std::string(ctx) + ": connection does not preserve gamma");
}

LeafConnection::LeafConnection(CoordPtr coords)
    : cs(std::move(coords)), coef(cs->m() * cs->m() * cs->m(), ScalarExpr(cs->dim())) {}

const ScalarExpr& LeafConnection::at(std::size_t k, std::size_t i, std::size_t j) const {
    const std::size_t m = cs->m();
    return coef[(k * m + i) * m + j];
}

ScalarExpr& LeafConnection::at(std::size_t k, std::size_t i, std::size_t j) {
    const std::size_t m = cs->m();
    return coef[(k * m + i) * m + j];
}

VectorField LeafConnection::cov_deriv(const VectorField& X, const VectorField& Y) const {
    require_l_support(X, "leaf cov_deriv");
    require_l_support(Y, "leaf cov_deriv");
    const std::size_t m = cs->m(), n = cs->dim();
    std::vector<ScalarExpr> out(n, ScalarExpr(n));
    for (std::size_t j = 0; j < m; ++j) {
        ScalarExpr acc(n);
        for (std::size_t k = 0; k < m; ++k) {
            if (X.at({k}).is_zero()) continue;
            acc += X.at({k}) * Y.at({j}).derivative(k);
            for (std::size_t i = 0; i < m; ++i) {
                if (Y.at({i}).is_zero() || at(k, i, j).is_zero()) continue;
                acc += X.at({k}) * Y.at({i}) * at(k, i, j);
            }
        }
        out[j] = std::move(acc);
    }
    return TensorField::vector(cs, std::move(out));
}

LConnection::LConnection(CoordPtr coords)
    : cs(std::move(coords)), coef(cs->dim() * cs->m() * cs->m(), ScalarExpr(cs->dim())) {}

const ScalarExpr& LConnection::at(std::size_t u, std::size_t i, std::size_t j) const {
    const std::size_t m = cs->m();
    return coef[(u * m + i) * m + j];
}

ScalarExpr& LConnection::at(std::size_t u, std::size_t i, std::size_t j) {
    const std::size_t m = cs->m();
    return coef[(u * m + i) * m + j];
}

VectorField LConnection::cov_deriv(const VectorField& Z, const VectorField& Y) const {
    require_vector(Z, "L cov_deriv");
    require_l_support(Y, "L cov_deriv");
    const std::size_t m = cs->m(), n = cs->dim();
    std::vector<ScalarExpr> out(n, ScalarExpr(n));
    for (std::size_t j = 0; j < m; ++j) {
        ScalarExpr acc = apply_vector(Z, Y.at({j}));
        for (std::size_t u = 0; u < n; ++u) {
            if (Z.at({u}).is_zero()) continue;
            for (std::size_t i = 0; i < m; ++i) {
                if (Y.at({i}).is_zero() || at(u, i, j).is_zero()) continue;
                acc += Z.at({u}) * Y.at({i}) * at(u, i, j);
            }
        }
        out[j] = std::move(acc);
    }
    return TensorField::vector(cs, std::move(out));
}

bool lconnection_preserves_g(const LConnection& D, const Matrix& g) {
    const std::size_t m = D.cs->m(), n = D.cs->dim();
    for (std::size_t u = 0; u < n; ++u)
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = i; j < m; ++j) {
                ScalarExpr r = g[i][j].derivative(u);
                for (std::size_t s = 0; s < m; ++s) {
                    if (!D.at(u, i, s).is_zero()) r -= D.at(u, i, s) * g[s][j];
                    if (!D.at(u, j, s).is_zero()) r -= D.at(u, j, s) * g[i][s];
                }
                if (!r.is_zero()) return false;
            }
    return true;
}

LeafConnection levi_civita_partial(const FieldSpec& field) {
    const std::size_t m = field.m();
    const Matrix ginv = inverse(field.g);
    LeafConnection lc(field.cs);
    for (std::size_t k = 0; k < m; ++k)
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < m; ++j) {
                ScalarExpr acc(field.cs->dim());
                for (std::size_t l = 0; l < m; ++l) {
                    const ScalarExpr term = field.g[i][l].derivative(k) +
                                            field.g[k][l].derivative(i) -
                                            field.g[k][i].derivative(l);
                    if (term.is_zero() || ginv[j][l].is_zero()) continue;
                    acc += ginv[j][l] * term;
                }
                lc.at(k, i, j) = acc.scaled(Rational(1, 2));
            }
    return lc;
}

Connection build_double_metric(const LConnection& Dplus, const LConnection& Dminus,
                               const GeneralizedMetric& gm) {
    const FieldSpec& field = gm.field;
    const std::size_t m = field.m(), n = field.cs->dim();
    if (!lconnection_preserves_g(Dplus, field.g) || !lconnection_preserves_g(Dminus, field.g))
        throw ValidationError("build_double_metric: D+- must preserve g");

    const Matrix Tp = iota_frame_matrix(+1, field);
    const Matrix Tm = iota_frame_matrix(-1, field);
    Matrix T = zero_matrix(n, n, n);
    for (std::size_t w = 0; w < n; ++w)
        for (std::size_t j = 0; j < m; ++j) {
            T[w][j] = Tp[w][j];
            T[w][m + j] = Tm[w][j];
        }
    const Matrix Tinv = inverse(T);

    Connection conn(field.cs);
    for (std::size_t u = 0; u < n; ++u) {
        Matrix M = zero_matrix(n, n, n); // M[b][a]: coefficient of s_b in nabla_u s_a
        Matrix dT = zero_matrix(n, n, n);
        for (std::size_t j = 0; j < m; ++j)
            for (std::size_t k = 0; k < m; ++k) {
                M[k][j] = Dplus.at(u, j, k);
                M[m + k][m + j] = Dminus.at(u, j, k);
            }
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = 0; b < n; ++b) dT[a][b] = T[a][b].derivative(u);
        const Matrix G = mat_mul(mat_sub(mat_mul(T, M), dT), Tinv);
        for (std::size_t v = 0; v < n; ++v)
            for (std::size_t w = 0; w < n; ++w) conn.at(u, v, w) = G[w][v];
    }
    return conn;
}

std::pair<LConnection, LConnection> extract_pm(const Connection& conn,
                                               const GeneralizedMetric& gm) {
    const FieldSpec& field = gm.field;
    const std::size_t m = field.m(), n = field.cs->dim();
    LConnection Dp(field.cs), Dm(field.cs);
    const Splitting sp = splitting_of(field);
    for (int sgn = 0; sgn < 2; ++sgn) {
        const auto& frames = sgn == 0 ? sp.s_plus : sp.s_minus;
        LConnection& D = sgn == 0 ? Dp : Dm;
        for (std::size_t u = 0; u < n; ++u) {
            const VectorField e = frame_vector(field.cs, u);
            for (std::size_t i = 0; i < m; ++i) {
                const VectorField w = conn.cov_deriv(e, frames[i]);
                auto [x1, x2] = decompose_factors(w, field);
                const VectorField& keep = sgn == 0 ? x1 : x2;
                const VectorField& drop = sgn == 0 ? x2 : x1;
                if (!drop.is_zero())
                    throw ValidationError("extract_pm: connection does not preserve S+/-");
                for (std::size_t j = 0; j < m; ++j) D.at(u, i, j) = keep.at({j});
            }
        }
    }
    return {Dp, Dm};
}

namespace {

// Matrix of sharp_g flat_B acting on L-component columns.
Matrix sharp_flat_matrix(const Matrix& ginv, const Matrix& B) {
    return mat_scaled(mat_mul(ginv, B), ScalarExpr::constant(B.size() * 2, Rational(-1)));
}

VectorField apply_l_matrix(const Matrix& A, const VectorField& X) {
    const CoordPtr& cs = X.coords();
    const std::size_t m = cs->m(), n = cs->dim();
    std::vector<ScalarExpr> out(n, ScalarExpr(n));
    for (std::size_t j = 0; j < m; ++j) {
        ScalarExpr acc(n);
        for (std::size_t i = 0; i < m; ++i) {
            if (A[j][i].is_zero() || X.at({i}).is_zero()) continue;
            acc += A[j][i] * X.at({i});
        }
        out[j] = std::move(acc);
    }
    return TensorField::vector(cs, std::move(out));
}

} // namespace

Connection cwt_connection(const GeneralizedMetric& gm) {
    const FieldSpec& field = gm.field;
    const CoordPtr& cs = field.cs;
    const std::size_t m = field.m(), n = cs->dim();

    Matrix ginv;
    try {
        ginv = inverse(field.g);
    } catch (const SingularError&) {
        throw ValidationError("cwt_connection: degenerate g");
    }
    const Matrix P = sharp_flat_matrix(ginv, field.B); // sharp_g flat_B
    const ScalarExpr half = ScalarExpr::constant(n, Rational(1, 2));
    Matrix Ap = mat_scaled(P, half), Am = mat_scaled(P, -half);
    for (std::size_t i = 0; i < m; ++i) {
        Ap[i][i] += half;
        Am[i][i] += half;
    }
    Matrix ApInv, AmInv;
    try {
        ApInv = inverse(Ap);
        AmInv = inverse(Am);
    } catch (const SingularError&) {
        throw ValidationError("cwt_connection: A+- singular");
    }

    const LeafConnection lc = levi_civita_partial(field);
    LConnection Dp(cs), Dm(cs);
    for (std::size_t u = 0; u < n; ++u) {
        const VectorField e = frame_vector(cs, u);
        auto [U1, U2] = decompose_factors(e, field);

        // D+ direction pieces: leafwise Levi-Civita along Am^-1 U1, plus the
        // projected mixed bracket against iota_-(Ap Am^-1 U1 - U2).
        const VectorField dirp = apply_l_matrix(AmInv, U1);
        const VectorField Wp = apply_l_matrix(Ap, dirp) - U2;
        const VectorField dirm = apply_l_matrix(ApInv, U2);
        const VectorField Wm = apply_l_matrix(Am, dirm) - U1;

        for (std::size_t i = 0; i < m; ++i) {
            const VectorField fi = frame_vector(cs, i);
            VectorField dp = lc.cov_deriv(dirp, fi);
            if (!Wp.is_zero()) {
                const VectorField br = c_bracket(iota(-1, Wp, field), iota(+1, fi, field));
                dp -= decompose_factors(br, field).first;
            }
            VectorField dm = lc.cov_deriv(dirm, fi);
            if (!Wm.is_zero()) {
                const VectorField br = c_bracket(iota(+1, Wm, field), iota(-1, fi, field));
                dm -= decompose_factors(br, field).second;
            }
            for (std::size_t j = 0; j < m; ++j) {
                Dp.at(u, i, j) = dp.at({j});
                Dm.at(u, i, j) = dm.at({j});
            }
        }
    }
    return build_double_metric(Dp, Dm, gm);
}

VtcResult vtc_connection(const GeneralizedMetric& gm) {
    const CoordPtr& cs = gm.field.cs;
    const std::size_t n = cs->dim();
    const Connection cwt = cwt_connection(gm);

    // Lowered coefficients: Gamma_{uvw} = Gamma_{uv}{}^{pair(w)}.
    TensorField psi(cs, {Slot::C, Slot::C, Slot::C});
    for (std::size_t u = 0; u < n; ++u)
        for (std::size_t v = 0; v < n; ++v)
            for (std::size_t w = 0; w < n; ++w) {
                const ScalarExpr s = cwt.at(u, v, cs->pair_index(w)) +
                                     cwt.at(v, w, cs->pair_index(u)) +
                                     cwt.at(w, u, cs->pair_index(v));
                psi.at({u, v, w}) = s.scaled(Rational(-1, 3));
            }

    Connection conn = cwt;
    for (std::size_t u = 0; u < n; ++u)
        for (std::size_t v = 0; v < n; ++v)
            for (std::size_t w = 0; w < n; ++w)
                conn.at(u, v, w) += psi.at({u, v, cs->pair_index(w)});
    return {std::move(conn), std::move(psi)};
}

VectorField modified_bracket(const Connection& conn, const VectorField& X, const VectorField& Y) {
    require_gamma_preserving(conn, "modified_bracket");
    return c_bracket(X, Y) + wedge_conn(conn, X, Y);
}

ScalarExpr gualtieri_torsion(const Connection& conn, const VectorField& X, const VectorField& Y,
                             const VectorField& Z) {
    require_gamma_preserving(conn, "gualtieri_torsion");
    const ScalarExpr main =
        pair_gamma(conn.cov_deriv(X, Y) - conn.cov_deriv(Y, X) - c_bracket(X, Y), Z);
    const ScalarExpr corr =
        pair_gamma(conn.cov_deriv(Z, X), Y) - pair_gamma(conn.cov_deriv(Z, Y), X);
    return main + corr.scaled(Rational(1, 2));
}

CovectorField sigma_pm(int sign, const LConnection& D, const Matrix& g, const VectorField& X,
                       const VectorField& Y) {
    if (sign != 1 && sign != -1) throw ValidationError("sigma_pm: sign must be +1 or -1");
    require_l_support(X, "sigma_pm");
    require_l_support(Y, "sigma_pm");
    const CoordPtr& cs = X.coords();
    const std::size_t m = cs->m(), n = cs->dim();
    auto gdot = [&](const VectorField& a, const VectorField& b) {
        ScalarExpr acc(n);
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < m; ++j) {
                if (a.at({i}).is_zero() || b.at({j}).is_zero() || g[i][j].is_zero()) continue;
                acc += a.at({i}) * g[i][j] * b.at({j});
            }
        return acc;
    };
    std::vector<ScalarExpr> out(n, ScalarExpr(n));
    for (std::size_t u = 0; u < n; ++u) {
        const VectorField e = frame_vector(cs, u);
        ScalarExpr val = gdot(X, D.cov_deriv(e, Y)) - gdot(D.cov_deriv(e, X), Y);
        out[u] = sign > 0 ? std::move(val) : -val;
    }
    return TensorField::covector(cs, std::move(out));
}

VectorField modified_curvature(const Connection& conn, const VectorField& X, const VectorField& Y,
                               const VectorField& Z) {
    require_gamma_preserving(conn, "modified_curvature");
    return conn.cov_deriv(X, conn.cov_deriv(Y, Z)) - conn.cov_deriv(Y, conn.cov_deriv(X, Z)) -
           conn.cov_deriv(modified_bracket(conn, X, Y), Z);
}

CurvatureTable::CurvatureTable(CoordPtr coords)
    : cs(std::move(coords)),
      comp(cs->dim() * cs->dim() * cs->dim() * cs->dim(), ScalarExpr(cs->dim())) {}

const ScalarExpr& CurvatureTable::at(std::size_t u, std::size_t v, std::size_t s,
                                     std::size_t w) const {
    const std::size_t n = cs->dim();
    return comp[((u * n + v) * n + s) * n + w];
}

ScalarExpr& CurvatureTable::at(std::size_t u, std::size_t v, std::size_t s, std::size_t w) {
    const std::size_t n = cs->dim();
    return comp[((u * n + v) * n + s) * n + w];
}

CurvatureTable curvature_tensor(const Connection& conn) {
    require_gamma_preserving(conn, "curvature_tensor");
    const CoordPtr& cs = conn.cs;
    const std::size_t n = cs->dim();
    CurvatureTable table(cs);
    for (std::size_t u = 0; u < n; ++u)
        for (std::size_t v = u + 1; v < n; ++v) {
            // Coordinate frames have zero C-bracket, so [e_u, e_v]_mod is the wedge.
            const VectorField wedge =
                wedge_conn(conn, frame_vector(cs, u), frame_vector(cs, v));
            for (std::size_t s = 0; s < n; ++s)
                for (std::size_t w = 0; w < n; ++w) {
                    ScalarExpr acc = conn.at(v, s, w).derivative(u) -
                                     conn.at(u, s, w).derivative(v);
                    for (std::size_t k = 0; k < n; ++k) {
                        if (!conn.at(v, s, k).is_zero() && !conn.at(u, k, w).is_zero())
                            acc += conn.at(v, s, k) * conn.at(u, k, w);
                        if (!conn.at(u, s, k).is_zero() && !conn.at(v, k, w).is_zero())
                            acc -= conn.at(u, s, k) * conn.at(v, k, w);
                        if (!wedge.at({k}).is_zero() && !conn.at(k, s, w).is_zero())
                            acc -= wedge.at({k}) * conn.at(k, s, w);
                    }
                    table.at(u, v, s, w) = acc;
                    table.at(v, u, s, w) = -table.at(u, v, s, w);
                }
        }
    return table;
}

namespace {

struct KappaParts {
    CurvatureTable table;
    Matrix ginv;
    Matrix Tp, Tm; // 2m x m iota frame matrices
};

KappaParts kappa_parts(const Connection& conn, const GeneralizedMetric& gm) {
    return {curvature_tensor(conn), inverse(gm.field.g), iota_frame_matrix(+1, gm.field),
            iota_frame_matrix(-1, gm.field)};
}

Matrix ricci_from(const KappaParts& parts, const GeneralizedMetric& gm) {
    const std::size_t n = gm.field.cs->dim();
    Matrix ric = zero_matrix(n, n, n);
    for (const Matrix* T : {&parts.Tp, &parts.Tm}) {
        const Matrix K = mat_mul(mat_mul(mat_mul(gm.H, *T), parts.ginv), transpose(*T));
        for (std::size_t u = 0; u < n; ++u)
            for (std::size_t s = 0; s < n; ++s) {
                ScalarExpr acc(n);
                for (std::size_t z = 0; z < n; ++z)
                    for (std::size_t v = 0; v < n; ++v) {
                        if (K[z][v].is_zero() || parts.table.at(u, v, s, z).is_zero()) continue;
                        acc += K[z][v] * parts.table.at(u, v, s, z);
                    }
                ric[u][s] += acc;
            }
    }
    return ric;
}

} // namespace

Matrix ricci_tensor(const Connection& conn, const GeneralizedMetric& gm) {
    return ricci_from(kappa_parts(conn, gm), gm);
}

ScalarExpr kappa_expr(const Connection& conn, const GeneralizedMetric& gm) {
    const std::size_t n = gm.field.cs->dim();
    const KappaParts parts = kappa_parts(conn, gm);
    const Matrix ric = ricci_from(parts, gm);
    ScalarExpr kappa(n);
    for (const Matrix* T : {&parts.Tp, &parts.Tm}) {
        const Matrix P = mat_mul(mat_mul(*T, parts.ginv), transpose(*T));
        for (std::size_t u = 0; u < n; ++u)
            for (std::size_t s = 0; s < n; ++s) {
                if (P[u][s].is_zero()) continue;
                const ScalarExpr sym = (ric[u][s] + ric[s][u]).scaled(Rational(1, 2));
                if (sym.is_zero()) continue;
                kappa += P[u][s] * sym;
            }
    }
    return kappa;
}

namespace {

// Signed Gram-Schmidt over the rationals; fails (returns false) when a
// normalization would leave the rationals.
bool gram_schmidt_exact(const QMatrix& G, const std::vector<std::size_t>& seed_order,
                        std::vector<std::vector<Rational>>& basis, std::vector<int>& sigma) {
    const std::size_t m = G.size();
    auto dot = [&](const std::vector<Rational>& a, const std::vector<Rational>& b) {
        Rational acc(0);
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < m; ++j) acc += a[i] * G[i][j] * b[j];
        return acc;
    };
    std::vector<std::vector<Rational>> pool;
    for (std::size_t s : seed_order) {
        std::vector<Rational> v(m, Rational(0));
        v[s] = 1;
        pool.push_back(std::move(v));
    }
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i + 1; j < m; ++j) {
            std::vector<Rational> v(m, Rational(0));
            v[seed_order[i]] = 1;
            v[seed_order[j]] = 1;
            pool.push_back(std::move(v));
        }

    basis.clear();
    sigma.clear();
    while (basis.size() < m) {
        std::vector<Rational> best;
        Rational best_q(0);
        for (const auto& cand : pool) {
            std::vector<Rational> w = cand;
            for (std::size_t k = 0; k < basis.size(); ++k) {
                const Rational c = dot(w, basis[k]) * sigma[k];
                for (std::size_t i = 0; i < m; ++i) w[i] -= c * basis[k][i];
            }
            const Rational q = dot(w, w);
            if (abs(q) > abs(best_q)) {
                best_q = q;
                best = std::move(w);
            }
        }
        if (sgn(best_q) == 0) throw SingularError("gram_schmidt: degenerate metric at point");
        const auto root = sqrt_exact(abs(best_q));
        if (!root) return false;
        for (auto& c : best) c /= *root;
        sigma.push_back(sgn(best_q));
        basis.push_back(std::move(best));
    }
    return true;
}

void gram_schmidt_double(const std::vector<std::vector<double>>& G,
                         const std::vector<std::size_t>& seed_order,
                         std::vector<std::vector<double>>& basis, std::vector<int>& sigma) {
    const std::size_t m = G.size();
    auto dot = [&](const std::vector<double>& a, const std::vector<double>& b) {
        double acc = 0;
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < m; ++j) acc += a[i] * G[i][j] * b[j];
        return acc;
    };
    std::vector<std::vector<double>> pool;
    for (std::size_t s : seed_order) {
        std::vector<double> v(m, 0.0);
        v[s] = 1.0;
        pool.push_back(std::move(v));
    }
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i + 1; j < m; ++j) {
            std::vector<double> v(m, 0.0);
            v[seed_order[i]] = 1.0;
            v[seed_order[j]] = 1.0;
            pool.push_back(std::move(v));
        }

    basis.clear();
    sigma.clear();
    while (basis.size() < m) {
        std::vector<double> best;
        double best_q = 0.0;
        for (const auto& cand : pool) {
            std::vector<double> w = cand;
            for (std::size_t k = 0; k < basis.size(); ++k) {
                const double c = dot(w, basis[k]) * sigma[k];
                for (std::size_t i = 0; i < m; ++i) w[i] -= c * basis[k][i];
            }
            const double q = dot(w, w);
            if (std::fabs(q) > std::fabs(best_q)) {
                best_q = q;
                best = std::move(w);
            }
        }
        if (std::fabs(best_q) < 1e-12)
            throw SingularError("gram_schmidt: pivot below threshold at point");
        const double root = std::sqrt(std::fabs(best_q));
        for (auto& c : best) c /= root;
        sigma.push_back(best_q > 0 ? 1 : -1);
        basis.push_back(std::move(best));
    }
}

template <typename K>
using Grid4 = std::vector<K>; // dim^4 flattened like CurvatureTable

template <typename K>
K kappa_from_basis(const Grid4<K>& R4, const std::vector<std::vector<K>>& H0,
                   const std::vector<std::vector<K>>& Tp0,
                   const std::vector<std::vector<K>>& Tm0,
                   const std::vector<std::vector<K>>& basis, const std::vector<int>& sigma,
                   std::size_t n) {
    const std::size_t m = n / 2;
    auto r4 = [&](std::size_t u, std::size_t v, std::size_t s, std::size_t z) -> const K& {
        return R4[((u * n + v) * n + s) * n + z];
    };
    std::vector<std::vector<K>> ric(n, std::vector<K>(n, K(0)));
    std::vector<std::vector<std::vector<K>>> b(2); // [eps][i] -> 2m vector
    for (int eps = 0; eps < 2; ++eps) {
        const auto& T0 = eps == 0 ? Tp0 : Tm0;
        for (std::size_t i = 0; i < m; ++i) {
            std::vector<K> bi(n, K(0));
            for (std::size_t w = 0; w < n; ++w)
                for (std::size_t j = 0; j < m; ++j) bi[w] += T0[w][j] * basis[i][j];
            b[eps].push_back(std::move(bi));
        }
    }
    for (int eps = 0; eps < 2; ++eps)
        for (std::size_t i = 0; i < m; ++i) {
            const auto& bi = b[eps][i];
            std::vector<K> c(n, K(0));
            for (std::size_t z = 0; z < n; ++z)
                for (std::size_t w = 0; w < n; ++w) c[z] += bi[w] * H0[w][z];
            for (std::size_t u = 0; u < n; ++u)
                for (std::size_t s = 0; s < n; ++s) {
                    K acc(0);
                    for (std::size_t z = 0; z < n; ++z)
                        for (std::size_t v = 0; v < n; ++v) acc += c[z] * bi[v] * r4(u, v, s, z);
                    if (sigma[i] < 0) acc = -acc;
                    ric[u][s] += acc;
                }
        }
    K kappa(0);
    for (int eps = 0; eps < 2; ++eps)
        for (std::size_t i = 0; i < m; ++i) {
            const auto& bi = b[eps][i];
            K acc(0);
            for (std::size_t u = 0; u < n; ++u)
                for (std::size_t s = 0; s < n; ++s)
                    acc += bi[u] * (ric[u][s] + ric[s][u]) * bi[s];
            acc /= K(2);
            if (sigma[i] < 0) acc = -acc;
            kappa += acc;
        }
    return kappa;
}

std::vector<std::vector<double>> to_double_matrix(const QMatrix& q) {
    std::vector<std::vector<double>> r(q.size());
    for (std::size_t i = 0; i < q.size(); ++i)
        for (const auto& x : q[i]) r[i].push_back(to_double(x));
    return r;
}

} // namespace

ScalarCurvatureResult scalar_curvature(const Connection& conn, const GeneralizedMetric& gm,
                                       const std::vector<Rational>& point) {
    const CoordPtr& cs = gm.field.cs;
    const std::size_t m = cs->m(), n = cs->dim();
    if (point.size() != n) throw DimensionError("scalar_curvature: point has wrong dimension");

    const CurvatureTable table = curvature_tensor(conn);
    std::vector<Rational> R4;
    R4.reserve(table.comp.size());
    for (const auto& e : table.comp) R4.push_back(e.eval(point));
    const QMatrix H0 = eval_matrix(gm.H, point);
    const QMatrix Tp0 = eval_matrix(iota_frame_matrix(+1, gm.field), point);
    const QMatrix Tm0 = eval_matrix(iota_frame_matrix(-1, gm.field), point);
    const QMatrix G0 = eval_matrix(gm.field.g, point);

    const Signature sig = signature_symmetric(G0);
    if (sig.zero != 0 || sig.positive != gm.field.p || sig.negative != gm.field.q)
        throw ValidationError("scalar_curvature: signature mismatch at point");

    std::vector<std::size_t> seed1(m), seed2(m);
    for (std::size_t i = 0; i < m; ++i) {
        seed1[i] = i;
        seed2[i] = m - 1 - i;
    }

    std::vector<std::vector<Rational>> basis1, basis2;
    std::vector<int> sig1, sig2;
    const bool exact1 = gram_schmidt_exact(G0, seed1, basis1, sig1);
    const bool exact2 = exact1 && gram_schmidt_exact(G0, seed2, basis2, sig2);

    ScalarCurvatureResult res;
    if (exact1 && exact2) {
        const Rational k1 = kappa_from_basis<Rational>(R4, H0, Tp0, Tm0, basis1, sig1, n);
        const Rational k2 = kappa_from_basis<Rational>(R4, H0, Tp0, Tm0, basis2, sig2, n);
        if (k1 != k2) throw Error("scalar_curvature: basis dependence detected");
        res.exact = k1;
        res.value = to_double(k1);
        return res;
    }

    std::vector<double> R4d;
    R4d.reserve(R4.size());
    for (const auto& r : R4) R4d.push_back(to_double(r));
    const auto H0d = to_double_matrix(H0);
    const auto Tp0d = to_double_matrix(Tp0);
    const auto Tm0d = to_double_matrix(Tm0);
    const auto G0d = to_double_matrix(G0);
    std::vector<std::vector<double>> basis1d, basis2d;
    std::vector<int> s1d, s2d;
    gram_schmidt_double(G0d, seed1, basis1d, s1d);
    gram_schmidt_double(G0d, seed2, basis2d, s2d);
    const double k1 = kappa_from_basis<double>(R4d, H0d, Tp0d, Tm0d, basis1d, s1d, n);
    const double k2 = kappa_from_basis<double>(R4d, H0d, Tp0d, Tm0d, basis2d, s2d, n);
    const double scale = std::max({1.0, std::fabs(k1), std::fabs(k2)});
    if (std::fabs(k1 - k2) > 1e-9 * scale)
        throw Error("scalar_curvature: basis dependence detected");
    res.value = k1;
    return res;
}

QuadRule gauss_legendre(int order) {
    if (order < 1) throw ValidationError("gauss_legendre: order must be positive");
    const std::size_t nn = static_cast<std::size_t>(order);
    QuadRule rule;
    rule.nodes.resize(nn);
    rule.weights.resize(nn);
    for (std::size_t i = 0; i < nn; ++i) {
        double x = std::cos(M_PI * (static_cast<double>(i) + 0.75) /
                            (static_cast<double>(nn) + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            if (nn == 1) p1 = x;
            for (std::size_t k = 2; k <= nn; ++k) {
                const double pk =
                    ((2.0 * static_cast<double>(k) - 1.0) * x * p1 -
                     (static_cast<double>(k) - 1.0) * p0) /
                    static_cast<double>(k);
                p0 = p1;
                p1 = pk;
            }
            const double pn = nn == 1 ? x : p1;
            const double pn1 = nn == 1 ? 1.0 : p0;
            dp = static_cast<double>(nn) * (pn1 - x * pn) / (1.0 - x * x);
            const double dx = pn / dp;
            x -= dx;
            if (std::fabs(dx) < 1e-15) break;
        }
        rule.nodes[i] = x;
        rule.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    return rule;
}

ActionResult action_value(const GeneralizedMetric& gm, ConnectionKind kind,
                          const std::vector<std::pair<double, double>>& box, int quad_order) {
    const CoordPtr& cs = gm.field.cs;
    const std::size_t n = cs->dim();
    if (box.size() != n) throw ValidationError("action_value: box has wrong dimension");

    const Connection conn =
        kind == ConnectionKind::vtc ? vtc_connection(gm).conn : cwt_connection(gm);
    const ScalarExpr kappa = kappa_expr(conn, gm);
    const ScalarExpr detH = det(gm.H);

    const QuadRule rule = gauss_legendre(quad_order);
    ActionResult out;
    out.level_matched = check_level_matching(gm.field);

    std::vector<std::size_t> idx(n, 0);
    std::vector<double> y(n);
    double sum = 0.0;
    while (true) {
        double w = 1.0;
        for (std::size_t d = 0; d < n; ++d) {
            const double half = 0.5 * (box[d].second - box[d].first);
            y[d] = 0.5 * (box[d].second + box[d].first) + half * rule.nodes[idx[d]];
            w *= half * rule.weights[idx[d]];
        }
        const double kv = kappa.eval_double(y);
        const double hv = detH.eval_double(y);
        const double pv = gm.field.phi.eval_double(y);
        sum += w * std::exp(-2.0 * pv) * kv * std::sqrt(std::fabs(hv));

        std::size_t d = n;
        bool done = true;
        while (d > 0) {
            --d;
            if (++idx[d] < rule.nodes.size()) {
                done = false;
                break;
            }
            idx[d] = 0;
        }
        if (done) break;
    }
    out.value = sum;
    return out;
}

} // namespace dfgeo
