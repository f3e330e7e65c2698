#include "dfgeo/linalg.hpp"

#include <algorithm>

namespace dfgeo {

Matrix zero_matrix(std::size_t rows, std::size_t cols, std::size_t nvars) {
    return Matrix(rows, std::vector<ScalarExpr>(cols, ScalarExpr(nvars)));
}

Matrix identity_matrix(std::size_t n, std::size_t nvars) {
    Matrix m = zero_matrix(n, n, nvars);
    for (std::size_t i = 0; i < n; ++i) m[i][i] = ScalarExpr::constant(nvars, Rational(1));
    return m;
}

namespace {
void require_shape(const Matrix& a, const Matrix& b) {
    if (a.size() != b.size() || (!a.empty() && a[0].size() != b[0].size()))
        throw DimensionError("matrix shapes differ");
}
} // namespace

Matrix mat_add(const Matrix& a, const Matrix& b) {
    require_shape(a, b);
    Matrix r = a;
    for (std::size_t i = 0; i < r.size(); ++i)
        for (std::size_t j = 0; j < r[i].size(); ++j) r[i][j] += b[i][j];
    return r;
}

Matrix mat_sub(const Matrix& a, const Matrix& b) {
    require_shape(a, b);
    Matrix r = a;
    for (std::size_t i = 0; i < r.size(); ++i)
        for (std::size_t j = 0; j < r[i].size(); ++j) r[i][j] -= b[i][j];
    return r;
}

Matrix mat_mul(const Matrix& a, const Matrix& b) {
    if (a.empty() || b.empty() || a[0].size() != b.size())
        throw DimensionError("matrix product shape mismatch");
    const std::size_t nvars = a[0][0].nvars();
    Matrix r = zero_matrix(a.size(), b[0].size(), nvars);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t k = 0; k < b.size(); ++k) {
            if (a[i][k].is_zero()) continue;
            for (std::size_t j = 0; j < b[0].size(); ++j) {
                if (b[k][j].is_zero()) continue;
                r[i][j] += a[i][k] * b[k][j];
            }
        }
    return r;
}

Matrix mat_scaled(const Matrix& a, const ScalarExpr& f) {
    Matrix r = a;
    for (auto& row : r)
        for (auto& x : row) x *= f;
    return r;
}

Matrix transpose(const Matrix& a) {
    if (a.empty()) return a;
    Matrix r(a[0].size(), std::vector<ScalarExpr>(a.size(), ScalarExpr(a[0][0].nvars())));
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < a[i].size(); ++j) r[j][i] = a[i][j];
    return r;
}

std::vector<ScalarExpr> mat_vec(const Matrix& a, const std::vector<ScalarExpr>& v) {
    if (a.empty() || a[0].size() != v.size()) throw DimensionError("matrix-vector shape mismatch");
    std::vector<ScalarExpr> r(a.size(), ScalarExpr(v.empty() ? 0 : v[0].nvars()));
    for (std::size_t i = 0; i < a.size(); ++i) {
        ScalarExpr acc(v[0].nvars());
        for (std::size_t j = 0; j < v.size(); ++j) {
            if (a[i][j].is_zero() || v[j].is_zero()) continue;
            acc += a[i][j] * v[j];
        }
        r[i] = std::move(acc);
    }
    return r;
}

bool mat_equal(const Matrix& a, const Matrix& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].size() != b[i].size()) return false;
        for (std::size_t j = 0; j < a[i].size(); ++j)
            if (a[i][j] != b[i][j]) return false;
    }
    return true;
}

namespace {
// Pivot preference: fewer polynomial terms keeps elimination small.
std::size_t expr_weight(const ScalarExpr& e) {
    return e.num().terms().size() + e.den().terms().size();
}
} // namespace

namespace {

// Cofactor expansion along the sparsest column of the active minor. All the
// matrices here are tiny (2m x 2m at worst), and staying division-free keeps
// symbolic entries at their true degrees instead of piling up denominators.
ScalarExpr det_minor(const Matrix& m, const std::vector<std::size_t>& rows,
                     const std::vector<std::size_t>& cols) {
    const std::size_t k = rows.size();
    const std::size_t nvars = m[0][0].nvars();
    if (k == 1) return m[rows[0]][cols[0]];
    std::size_t bc = 0, bnz = SIZE_MAX;
    for (std::size_t c = 0; c < k; ++c) {
        std::size_t nz = 0;
        for (std::size_t r = 0; r < k; ++r)
            if (!m[rows[r]][cols[c]].is_zero()) ++nz;
        if (nz < bnz) {
            bnz = nz;
            bc = c;
        }
    }
    ScalarExpr acc(nvars);
    if (bnz == 0) return acc;
    std::vector<std::size_t> subcols;
    subcols.reserve(k - 1);
    for (std::size_t c = 0; c < k; ++c)
        if (c != bc) subcols.push_back(cols[c]);
    for (std::size_t r = 0; r < k; ++r) {
        const ScalarExpr& e = m[rows[r]][cols[bc]];
        if (e.is_zero()) continue;
        std::vector<std::size_t> subrows;
        subrows.reserve(k - 1);
        for (std::size_t rr = 0; rr < k; ++rr)
            if (rr != r) subrows.push_back(rows[rr]);
        ScalarExpr term = e * det_minor(m, subrows, subcols);
        if ((r + bc) % 2 == 1) term = -term;
        acc += term;
    }
    return acc;
}

} // namespace

ScalarExpr det(Matrix m) {
    const std::size_t n = m.size();
    if (n == 0) throw DimensionError("determinant of empty matrix");
    for (const auto& row : m)
        if (row.size() != n) throw DimensionError("determinant needs a square matrix");
    std::vector<std::size_t> all(n);
    for (std::size_t i = 0; i < n; ++i) all[i] = i;
    return det_minor(m, all, all);
}

Matrix inverse(const Matrix& m0) {
    const std::size_t n = m0.size();
    if (n == 0) throw DimensionError("inverse of empty matrix");
    for (const auto& row : m0)
        if (row.size() != n) throw DimensionError("inverse needs a square matrix");
    const std::size_t nvars = m0[0][0].nvars();
    // Adjugate over the cofactor determinant: one clean division per entry,
    // and a unit determinant never leaves the polynomial ring.
    const ScalarExpr d = det(m0);
    if (d.is_zero()) throw SingularError("matrix is singular");
    if (n == 1) {
        Matrix inv = identity_matrix(1, nvars);
        inv[0][0] = inv[0][0] / d;
        return inv;
    }
    Matrix inv = zero_matrix(n, n, nvars);
    std::vector<std::size_t> all(n);
    for (std::size_t i = 0; i < n; ++i) all[i] = i;
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<std::size_t> rows;
        rows.reserve(n - 1);
        for (std::size_t r = 0; r < n; ++r)
            if (r != i) rows.push_back(r);
        for (std::size_t j = 0; j < n; ++j) {
            std::vector<std::size_t> cols;
            cols.reserve(n - 1);
            for (std::size_t c = 0; c < n; ++c)
                if (c != j) cols.push_back(c);
            ScalarExpr cof = det_minor(m0, rows, cols);
            if (cof.is_zero()) continue;
            if ((i + j) % 2 == 1) cof = -cof;
            inv[j][i] = cof / d;
        }
    }
    return inv;
}

std::size_t rank_symbolic(Matrix m) {
    if (m.empty()) return 0;
    const std::size_t rows = m.size(), cols = m[0].size();
    std::size_t rank = 0;
    for (std::size_t col = 0; col < cols && rank < rows; ++col) {
        std::size_t best = SIZE_MAX, best_w = SIZE_MAX;
        for (std::size_t r = rank; r < rows; ++r) {
            if (m[r][col].is_zero()) continue;
            const std::size_t w = expr_weight(m[r][col]);
            if (w < best_w) {
                best_w = w;
                best = r;
            }
        }
        if (best == SIZE_MAX) continue;
        std::swap(m[best], m[rank]);
        const ScalarExpr piv = m[rank][col];
        for (std::size_t r = rank + 1; r < rows; ++r) {
            if (m[r][col].is_zero()) continue;
            const ScalarExpr f = m[r][col] / piv;
            for (std::size_t c = col; c < cols; ++c) {
                if (m[rank][c].is_zero()) continue;
                m[r][c] -= f * m[rank][c];
            }
        }
        ++rank;
    }
    return rank;
}

LinearSolution solve_general(Matrix a, std::vector<ScalarExpr> b) {
    const std::size_t rows = a.size();
    if (rows != b.size()) throw DimensionError("solve: rhs size mismatch");
    const std::size_t cols = rows == 0 ? 0 : a[0].size();
    const std::size_t nvars = rows == 0 ? 0 : a[0][0].nvars();

    std::vector<std::size_t> pivot_col;
    std::size_t rank = 0;
    for (std::size_t col = 0; col < cols && rank < rows; ++col) {
        std::size_t best = SIZE_MAX, best_w = SIZE_MAX;
        for (std::size_t r = rank; r < rows; ++r) {
            if (a[r][col].is_zero()) continue;
            const std::size_t w = expr_weight(a[r][col]);
            if (w < best_w) {
                best_w = w;
                best = r;
            }
        }
        if (best == SIZE_MAX) continue;
        std::swap(a[best], a[rank]);
        std::swap(b[best], b[rank]);
        const ScalarExpr piv = a[rank][col];
        for (std::size_t c = col; c < cols; ++c) a[rank][c] /= piv;
        b[rank] /= piv;
        for (std::size_t r = 0; r < rows; ++r) {
            if (r == rank || a[r][col].is_zero()) continue;
            const ScalarExpr f = a[r][col];
            for (std::size_t c = col; c < cols; ++c) {
                if (a[rank][c].is_zero()) continue;
                a[r][c] -= f * a[rank][c];
            }
            if (!b[rank].is_zero()) b[r] -= f * b[rank];
        }
        pivot_col.push_back(col);
        ++rank;
    }

    LinearSolution sol;
    for (std::size_t r = rank; r < rows; ++r)
        if (!b[r].is_zero()) return sol; // inconsistent
    sol.consistent = true;
    sol.particular.assign(cols, ScalarExpr(nvars));
    for (std::size_t i = 0; i < rank; ++i) sol.particular[pivot_col[i]] = b[i];

    std::vector<bool> is_pivot(cols, false);
    for (std::size_t c : pivot_col) is_pivot[c] = true;
    for (std::size_t free_c = 0; free_c < cols; ++free_c) {
        if (is_pivot[free_c]) continue;
        std::vector<ScalarExpr> v(cols, ScalarExpr(nvars));
        v[free_c] = ScalarExpr::constant(nvars, Rational(1));
        for (std::size_t i = 0; i < rank; ++i) v[pivot_col[i]] = -a[i][free_c];
        sol.nullspace.push_back(std::move(v));
    }
    return sol;
}

QMatrix eval_matrix(const Matrix& m, const std::vector<Rational>& point) {
    QMatrix r(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) {
        r[i].reserve(m[i].size());
        for (const auto& e : m[i]) r[i].push_back(e.eval(point));
    }
    return r;
}

std::size_t rank_rational(QMatrix m) {
    if (m.empty()) return 0;
    const std::size_t rows = m.size(), cols = m[0].size();
    std::size_t rank = 0;
    for (std::size_t col = 0; col < cols && rank < rows; ++col) {
        std::size_t piv = SIZE_MAX;
        for (std::size_t r = rank; r < rows; ++r)
            if (sgn(m[r][col]) != 0) {
                piv = r;
                break;
            }
        if (piv == SIZE_MAX) continue;
        std::swap(m[piv], m[rank]);
        for (std::size_t r = rank + 1; r < rows; ++r) {
            if (sgn(m[r][col]) == 0) continue;
            const Rational f = m[r][col] / m[rank][col];
            for (std::size_t c = col; c < cols; ++c) m[r][c] -= f * m[rank][c];
        }
        ++rank;
    }
    return rank;
}

Signature signature_symmetric(QMatrix s) {
    const std::size_t n = s.size();
    for (const auto& row : s)
        if (row.size() != n) throw DimensionError("signature needs a square matrix");
    Signature sig;
    // Congruent diagonalization: X -> E X E^T preserves signature.
    std::vector<std::size_t> live;
    for (std::size_t i = 0; i < n; ++i) live.push_back(i);
    while (!live.empty()) {
        // Find a nonzero diagonal entry among live indices.
        std::size_t pi = SIZE_MAX;
        for (std::size_t idx : live)
            if (sgn(s[idx][idx]) != 0) {
                pi = idx;
                break;
            }
        if (pi == SIZE_MAX) {
            // All live diagonal entries vanish; find an off-diagonal nonzero.
            std::size_t a = SIZE_MAX, b = SIZE_MAX;
            for (std::size_t x : live) {
                for (std::size_t y : live) {
                    if (x != y && sgn(s[x][y]) != 0) {
                        a = x;
                        b = y;
                        break;
                    }
                }
                if (a != SIZE_MAX) break;
            }
            if (a == SIZE_MAX) {
                sig.zero += static_cast<int>(live.size());
                break;
            }
            // Row/column combination puts 2*s[a][b] on the diagonal.
            for (std::size_t c = 0; c < n; ++c) s[a][c] += s[b][c];
            for (std::size_t r = 0; r < n; ++r) s[r][a] += s[r][b];
            continue;
        }
        const Rational piv = s[pi][pi];
        if (sgn(piv) > 0) ++sig.positive;
        else ++sig.negative;
        // Eliminate the pivot row/column from the remaining block.
        std::vector<std::size_t> rest;
        for (std::size_t idx : live)
            if (idx != pi) rest.push_back(idx);
        for (std::size_t r : rest) {
            if (sgn(s[r][pi]) == 0) continue;
            const Rational f = s[r][pi] / piv;
            for (std::size_t c = 0; c < n; ++c) s[r][c] -= f * s[pi][c];
        }
        // The matching column operations only touch the pivot column; the
        // remaining block already equals E X E^T there.
        for (std::size_t r : rest) {
            s[r][pi] = Rational(0);
            s[pi][r] = Rational(0);
        }
        live = rest;
    }
    return sig;
}

Matrix tensor_to_matrix(const TensorField& t) {
    if (t.rank() != 2) throw DimensionError("tensor_to_matrix needs rank 2");
    const std::size_t n = t.dim();
    Matrix m = zero_matrix(n, n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) m[i][j] = t.at({i, j});
    return m;
}

TensorField matrix_to_tensor(const CoordPtr& cs, const Matrix& m, const std::vector<Slot>& variance) {
    if (variance.size() != 2) throw DimensionError("matrix_to_tensor needs rank-2 variance");
    TensorField t(cs, variance);
    const std::size_t n = cs->dim();
    if (m.size() != n) throw DimensionError("matrix has wrong size");
    for (std::size_t i = 0; i < n; ++i) {
        if (m[i].size() != n) throw DimensionError("matrix has wrong size");
        for (std::size_t j = 0; j < n; ++j) t.at({i, j}) = m[i][j];
    }
    return t;
}

VectorField musical_sharp(const TensorField& metric, const CovectorField& alpha) {
    require_covector(alpha, "musical_sharp");
    if (metric.rank() != 2 || metric.variance()[0] != Slot::C || metric.variance()[1] != Slot::C)
        throw DimensionError("musical_sharp: metric must be 2-covariant");
    require_same(metric.coords(), alpha.coords());
    const std::size_t n = alpha.dim();
    Matrix g = tensor_to_matrix(metric);
    if (det(g).is_zero()) throw SingularError("musical_sharp: degenerate metric");
    const Matrix ginv = inverse(g);
    // g(sharp a, .) = a  =>  (sharp a)^v = a_w (g^{-1})^{wv}
    TensorField r(alpha.coords(), {Slot::V});
    for (std::size_t v = 0; v < n; ++v) {
        ScalarExpr acc(n);
        for (std::size_t w = 0; w < n; ++w) {
            if (alpha.at({w}).is_zero()) continue;
            acc += alpha.at({w}) * ginv[w][v];
        }
        r.at({v}) = std::move(acc);
    }
    return r;
}

} // namespace dfgeo
