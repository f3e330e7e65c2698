#pragma once

#include "dfgeo/coords.hpp"
#include "dfgeo/scalar.hpp"

#include <initializer_list>
#include <vector>

namespace dfgeo {

// Slot variance: V = contravariant (frame index), C = covariant (coframe index).
enum class Slot : char { V = 'v', C = 'c' };

std::vector<Slot> variance_from_string(const std::string& s);
std::string variance_to_string(const std::vector<Slot>& v);

// Dense tensor field in the distinguished frame; components are exact rational
// functions of the coordinates. Rank 0 = scalar, rank 1 "v" = vector field,
// rank 1 "c" = covector field.
class TensorField {
public:
    TensorField(CoordPtr cs, std::vector<Slot> variance);

    static TensorField scalar(CoordPtr cs, ScalarExpr f);
    static TensorField vector(CoordPtr cs, std::vector<ScalarExpr> comps);
    static TensorField covector(CoordPtr cs, std::vector<ScalarExpr> comps);

    const CoordPtr& coords() const { return cs_; }
    const std::vector<Slot>& variance() const { return variance_; }
    std::size_t rank() const { return variance_.size(); }
    std::size_t dim() const { return cs_->dim(); }

    const std::vector<ScalarExpr>& components() const { return comps_; }
    std::vector<ScalarExpr>& components() { return comps_; }

    const ScalarExpr& at(const std::vector<std::size_t>& idx) const { return comps_[offset(idx)]; }
    ScalarExpr& at(const std::vector<std::size_t>& idx) { return comps_[offset(idx)]; }
    const ScalarExpr& at(std::initializer_list<std::size_t> idx) const {
        return comps_[offset(std::vector<std::size_t>(idx))];
    }
    ScalarExpr& at(std::initializer_list<std::size_t> idx) {
        return comps_[offset(std::vector<std::size_t>(idx))];
    }

    bool is_zero() const;
    bool is_vector() const { return variance_.size() == 1 && variance_[0] == Slot::V; }
    bool is_covector() const { return variance_.size() == 1 && variance_[0] == Slot::C; }

    TensorField operator-() const;
    friend TensorField operator+(const TensorField& a, const TensorField& b);
    friend TensorField operator-(const TensorField& a, const TensorField& b);
    TensorField& operator+=(const TensorField& o) { *this = *this + o; return *this; }
    TensorField& operator-=(const TensorField& o) { *this = *this - o; return *this; }
    TensorField scaled(const ScalarExpr& f) const;
    TensorField scaled(const Rational& c) const;

    bool operator==(const TensorField& o) const;
    bool operator!=(const TensorField& o) const { return !(*this == o); }

    std::string to_string() const;

private:
    CoordPtr cs_;
    std::vector<Slot> variance_;
    std::vector<ScalarExpr> comps_;
    std::size_t offset(const std::vector<std::size_t>& idx) const;
};

using VectorField = TensorField;  // rank-1 "v", enforced at runtime
using CovectorField = TensorField; // rank-1 "c"

void require_vector(const TensorField& t, const char* ctx);
void require_covector(const TensorField& t, const char* ctx);

// Rank-1 field supported on L (all tilde components zero).
void require_l_support(const TensorField& t, const char* ctx);

// Frame fields d/dx^u (u < m) and d/dxt_u (u >= m), and their duals.
VectorField frame_vector(const CoordPtr& cs, std::size_t u);
CovectorField frame_covector(const CoordPtr& cs, std::size_t u);

// Canonical structures of the flat para-Kaehler double manifold:
//   omega(d/dx^i, d/dxt_j) = delta_ij (symplectic), F = +Id on L, -Id on Ltilde,
//   gamma(X, Y) = omega(FX, Y), the neutral pairing of the two foliations.
TensorField gamma_tensor(const CoordPtr& cs);
TensorField omega_tensor(const CoordPtr& cs);
TensorField product_structure(const CoordPtr& cs); // slots {V, C}: F^u_v

ScalarExpr pair_gamma(const VectorField& X, const VectorField& Y);
ScalarExpr pair_omega(const VectorField& X, const VectorField& Y);
VectorField apply_F(const VectorField& X);

// Projections onto the two foliations (components outside the target half vanish).
VectorField pr_L(const VectorField& X);
VectorField pr_Ltilde(const VectorField& X);

// Musical isomorphisms of the canonical pairing (gamma^{-1} = gamma in this frame).
CovectorField flat_gamma(const VectorField& X);
VectorField sharp_gamma(const CovectorField& alpha);

// Index lowering/raising with an arbitrary 2-covariant field: flat is T(X, .),
// sharp solves T(sharp a, .) = a and throws SingularError for degenerate T.
CovectorField musical_flat(const TensorField& metric, const VectorField& X);
VectorField musical_sharp(const TensorField& metric, const CovectorField& alpha);

// Full covector/vector pairing.
ScalarExpr pair_dual(const CovectorField& alpha, const VectorField& X);

// d/dx^u-derivative of each component (the flat connection's covariant derivative
// along the frame direction u).
TensorField partial_tensor(const TensorField& T, std::size_t u);

// Directional derivative Z(f).
ScalarExpr apply_vector(const VectorField& Z, const ScalarExpr& f);

} // namespace dfgeo
