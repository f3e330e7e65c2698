#include "dfgeo/tensor.hpp"

#include <sstream>

namespace dfgeo {

std::vector<Slot> variance_from_string(const std::string& s) {
    std::vector<Slot> v;
    v.reserve(s.size());
    for (char c : s) {
        if (c == 'v') v.push_back(Slot::V);
        else if (c == 'c') v.push_back(Slot::C);
        else throw ValidationError(std::string("variance letters must be 'v' or 'c', got '") + c + "'");
    }
    return v;
}

std::string variance_to_string(const std::vector<Slot>& v) {
    std::string s;
    for (Slot x : v) s += static_cast<char>(x);
    return s;
}

namespace {
std::size_t pow_size(std::size_t dim, std::size_t rank) {
    std::size_t n = 1;
    for (std::size_t i = 0; i < rank; ++i) n *= dim;
    return n;
}
} // namespace

TensorField::TensorField(CoordPtr cs, std::vector<Slot> variance)
    : cs_(std::move(cs)), variance_(std::move(variance)) {
    if (!cs_) throw DimensionError("tensor needs a coordinate system");
    comps_.assign(pow_size(dim(), variance_.size()), ScalarExpr(dim()));
}

TensorField TensorField::scalar(CoordPtr cs, ScalarExpr f) {
    TensorField t(std::move(cs), {});
    if (f.nvars() != t.dim()) throw DimensionError("scalar has wrong variable count");
    t.comps_[0] = std::move(f);
    return t;
}

TensorField TensorField::vector(CoordPtr cs, std::vector<ScalarExpr> comps) {
    TensorField t(std::move(cs), {Slot::V});
    if (comps.size() != t.dim()) throw DimensionError("vector needs 2m components");
    for (const auto& c : comps)
        if (c.nvars() != t.dim()) throw DimensionError("component has wrong variable count");
    t.comps_ = std::move(comps);
    return t;
}

TensorField TensorField::covector(CoordPtr cs, std::vector<ScalarExpr> comps) {
    TensorField t(std::move(cs), {Slot::C});
    if (comps.size() != t.dim()) throw DimensionError("covector needs 2m components");
    for (const auto& c : comps)
        if (c.nvars() != t.dim()) throw DimensionError("component has wrong variable count");
    t.comps_ = std::move(comps);
    return t;
}

std::size_t TensorField::offset(const std::vector<std::size_t>& idx) const {
    if (idx.size() != variance_.size()) throw DimensionError("tensor index rank mismatch");
    std::size_t off = 0;
    for (std::size_t i : idx) {
        if (i >= dim()) throw DimensionError("tensor index out of range");
        off = off * dim() + i;
    }
    return off;
}

bool TensorField::is_zero() const {
    for (const auto& c : comps_)
        if (!c.is_zero()) return false;
    return true;
}

TensorField TensorField::operator-() const {
    TensorField r = *this;
    for (auto& c : r.comps_) c = -c;
    return r;
}

TensorField operator+(const TensorField& a, const TensorField& b) {
    require_same(a.cs_, b.cs_);
    if (a.variance_ != b.variance_) throw DimensionError("tensor variances differ");
    TensorField r = a;
    for (std::size_t i = 0; i < r.comps_.size(); ++i) r.comps_[i] += b.comps_[i];
    return r;
}

TensorField operator-(const TensorField& a, const TensorField& b) {
    require_same(a.cs_, b.cs_);
    if (a.variance_ != b.variance_) throw DimensionError("tensor variances differ");
    TensorField r = a;
    for (std::size_t i = 0; i < r.comps_.size(); ++i) r.comps_[i] -= b.comps_[i];
    return r;
}

TensorField TensorField::scaled(const ScalarExpr& f) const {
    TensorField r = *this;
    for (auto& c : r.comps_) c *= f;
    return r;
}

TensorField TensorField::scaled(const Rational& c) const {
    TensorField r = *this;
    for (auto& x : r.comps_) x = x.scaled(c);
    return r;
}

bool TensorField::operator==(const TensorField& o) const {
    if (variance_ != o.variance_) return false;
    if (!(cs_ == o.cs_ || *cs_ == *o.cs_)) return false;
    return comps_ == o.comps_;
}

std::string TensorField::to_string() const {
    const CoordSystem& cs = *cs_;
    auto vn = [&cs](std::size_t i) { return cs.name(i); };
    std::ostringstream out;
    if (rank() == 0) return comps_[0].to_string(vn);
    bool any = false;
    std::vector<std::size_t> idx(rank(), 0);
    for (std::size_t flat = 0; flat < comps_.size(); ++flat) {
        std::size_t rem = flat;
        for (std::size_t k = rank(); k-- > 0;) {
            idx[k] = rem % dim();
            rem /= dim();
        }
        if (comps_[flat].is_zero()) continue;
        if (any) out << " + ";
        any = true;
        out << "(" << comps_[flat].to_string(vn) << ")";
        for (std::size_t k = 0; k < rank(); ++k) {
            out << (variance_[k] == Slot::V ? " " + cs.frame_name(idx[k])
                                            : " " + cs.coframe_name(idx[k]));
        }
    }
    if (!any) return "0";
    return out.str();
}

void require_vector(const TensorField& t, const char* ctx) {
    if (!t.is_vector()) throw DimensionError(std::string(ctx) + ": expected a vector field");
}

void require_covector(const TensorField& t, const char* ctx) {
    if (!t.is_covector()) throw DimensionError(std::string(ctx) + ": expected a covector field");
}

void require_l_support(const TensorField& t, const char* ctx) {
    if (t.rank() != 1) throw DimensionError(std::string(ctx) + ": expected a rank-1 field");
    for (std::size_t u = t.coords()->m(); u < t.dim(); ++u)
        if (!t.at({u}).is_zero())
            throw ValidationError(std::string(ctx) + ": nonzero tilde component");
}

VectorField frame_vector(const CoordPtr& cs, std::size_t u) {
    TensorField t(cs, {Slot::V});
    t.at({u}) = ScalarExpr::constant(cs->dim(), Rational(1));
    return t;
}

CovectorField frame_covector(const CoordPtr& cs, std::size_t u) {
    TensorField t(cs, {Slot::C});
    t.at({u}) = ScalarExpr::constant(cs->dim(), Rational(1));
    return t;
}

TensorField gamma_tensor(const CoordPtr& cs) {
    TensorField g(cs, {Slot::C, Slot::C});
    const std::size_t m = static_cast<std::size_t>(cs->m());
    const ScalarExpr one = ScalarExpr::constant(cs->dim(), Rational(1));
    for (std::size_t i = 0; i < m; ++i) {
        g.at({i, m + i}) = one;
        g.at({m + i, i}) = one;
    }
    return g;
}

TensorField omega_tensor(const CoordPtr& cs) {
    TensorField w(cs, {Slot::C, Slot::C});
    const std::size_t m = static_cast<std::size_t>(cs->m());
    const ScalarExpr one = ScalarExpr::constant(cs->dim(), Rational(1));
    for (std::size_t i = 0; i < m; ++i) {
        w.at({i, m + i}) = one;
        w.at({m + i, i}) = -one;
    }
    return w;
}

TensorField product_structure(const CoordPtr& cs) {
    TensorField f(cs, {Slot::V, Slot::C});
    const std::size_t m = static_cast<std::size_t>(cs->m());
    const ScalarExpr one = ScalarExpr::constant(cs->dim(), Rational(1));
    for (std::size_t i = 0; i < m; ++i) {
        f.at({i, i}) = one;
        f.at({m + i, m + i}) = -one;
    }
    return f;
}

ScalarExpr pair_gamma(const VectorField& X, const VectorField& Y) {
    require_vector(X, "pair_gamma");
    require_vector(Y, "pair_gamma");
    require_same(X.coords(), Y.coords());
    const std::size_t m = static_cast<std::size_t>(X.coords()->m());
    ScalarExpr acc(X.dim());
    for (std::size_t i = 0; i < m; ++i) {
        acc += X.at({i}) * Y.at({m + i});
        acc += X.at({m + i}) * Y.at({i});
    }
    return acc;
}

ScalarExpr pair_omega(const VectorField& X, const VectorField& Y) {
    require_vector(X, "pair_omega");
    require_vector(Y, "pair_omega");
    require_same(X.coords(), Y.coords());
    const std::size_t m = static_cast<std::size_t>(X.coords()->m());
    ScalarExpr acc(X.dim());
    for (std::size_t i = 0; i < m; ++i) {
        acc += X.at({i}) * Y.at({m + i});
        acc -= X.at({m + i}) * Y.at({i});
    }
    return acc;
}

VectorField apply_F(const VectorField& X) {
    require_vector(X, "apply_F");
    VectorField r = X;
    const std::size_t m = static_cast<std::size_t>(X.coords()->m());
    for (std::size_t i = 0; i < m; ++i) r.at({m + i}) = -r.at({m + i});
    return r;
}

VectorField pr_L(const VectorField& X) {
    require_vector(X, "pr_L");
    VectorField r = X;
    const std::size_t m = static_cast<std::size_t>(X.coords()->m());
    for (std::size_t i = 0; i < m; ++i) r.at({m + i}) = ScalarExpr(X.dim());
    return r;
}

VectorField pr_Ltilde(const VectorField& X) {
    require_vector(X, "pr_Ltilde");
    VectorField r = X;
    const std::size_t m = static_cast<std::size_t>(X.coords()->m());
    for (std::size_t i = 0; i < m; ++i) r.at({i}) = ScalarExpr(X.dim());
    return r;
}

CovectorField flat_gamma(const VectorField& X) {
    require_vector(X, "flat_gamma");
    TensorField r(X.coords(), {Slot::C});
    const std::size_t m = static_cast<std::size_t>(X.coords()->m());
    for (std::size_t i = 0; i < m; ++i) {
        r.at({i}) = X.at({m + i});
        r.at({m + i}) = X.at({i});
    }
    return r;
}

VectorField sharp_gamma(const CovectorField& alpha) {
    require_covector(alpha, "sharp_gamma");
    TensorField r(alpha.coords(), {Slot::V});
    const std::size_t m = static_cast<std::size_t>(alpha.coords()->m());
    for (std::size_t i = 0; i < m; ++i) {
        r.at({i}) = alpha.at({m + i});
        r.at({m + i}) = alpha.at({i});
    }
    return r;
}

CovectorField musical_flat(const TensorField& metric, const VectorField& X) {
    require_vector(X, "musical_flat");
    if (metric.rank() != 2 || metric.variance()[0] != Slot::C || metric.variance()[1] != Slot::C)
        throw DimensionError("musical_flat: metric must be 2-covariant");
    require_same(metric.coords(), X.coords());
    TensorField r(X.coords(), {Slot::C});
    const std::size_t n = X.dim();
    for (std::size_t u = 0; u < n; ++u) {
        ScalarExpr acc(n);
        for (std::size_t v = 0; v < n; ++v) acc += metric.at({v, u}) * X.at({v});
        r.at({u}) = std::move(acc);
    }
    return r;
}

ScalarExpr pair_dual(const CovectorField& alpha, const VectorField& X) {
    require_covector(alpha, "pair_dual");
    require_vector(X, "pair_dual");
    require_same(alpha.coords(), X.coords());
    ScalarExpr acc(X.dim());
    for (std::size_t u = 0; u < X.dim(); ++u) acc += alpha.at({u}) * X.at({u});
    return acc;
}

TensorField partial_tensor(const TensorField& T, std::size_t u) {
    TensorField r = T;
    for (auto& c : r.components()) c = c.derivative(u);
    return r;
}

ScalarExpr apply_vector(const VectorField& Z, const ScalarExpr& f) {
    require_vector(Z, "apply_vector");
    ScalarExpr acc(Z.dim());
    for (std::size_t u = 0; u < Z.dim(); ++u) {
        if (Z.at({u}).is_zero()) continue;
        acc += Z.at({u}) * f.derivative(u);
    }
    return acc;
}

} // namespace dfgeo
