#pragma once

#include "dfgeo/linalg.hpp"

namespace dfgeo {

// Field data (g, B, phi) on the leaves of L, with declared inertia indices.
// g symmetric, B antisymmetric (both m x m over the 2m coordinates), det g
// not identically zero and of signature (p, q) at the reference point.
struct FieldSpec {
    CoordPtr cs;
    Matrix g;
    Matrix B;
    ScalarExpr phi;
    int p = 0;
    int q = 0;
    std::vector<Rational> reference_point;

    std::size_t m() const { return cs->m(); }
};

// Validates all FieldSpec invariants (throws ValidationError).
FieldSpec make_field_spec(CoordPtr cs, Matrix g, Matrix B, ScalarExpr phi, int p, int q,
                          std::vector<Rational> reference_point);

struct GeneralizedMetric {
    FieldSpec field;
    Matrix H;   // 2m x 2m, symmetric
    Matrix Phi; // 2m x 2m, Phi^2 = Id, H = gamma * Phi
};

// Block assembly: H_xx = g - B g^-1 B, H(dx_i, dxt_j) = g^{jk} B_{ki},
// H_tt = g^-1; Phi solves H(Phi Z, U) = gamma(Z, U).
GeneralizedMetric build_H(const FieldSpec& field);

// iota_pm X = X + sharp_gamma(flat_{B +- g} X); requires X supported on L.
VectorField iota(int sign, const VectorField& X, const FieldSpec& field);

// Columns of the frame images iota_pm(d/dx_j) as a 2m x m matrix.
Matrix iota_frame_matrix(int sign, const FieldSpec& field);

// Bases of S+ and S- (images of the coordinate L-frame).
struct Splitting {
    std::vector<VectorField> s_plus;
    std::vector<VectorField> s_minus;
};
Splitting splitting_of(const FieldSpec& field);

// Z = iota_+ X1 + iota_- X2 with X1 = 1/2 [X - sharp_g(flat_B X - alpha)],
// X2 = 1/2 [X + sharp_g(flat_B X - alpha)], alpha = flat_gamma(pr_Ltilde Z).
std::pair<VectorField, VectorField> decompose_Spm(const VectorField& Z, const FieldSpec& field);

// The two L-vector factors (X1, X2) of the decomposition above.
std::pair<VectorField, VectorField> decompose_factors(const VectorField& Z, const FieldSpec& field);

struct RecoveredField {
    Matrix g;
    Matrix B;
};

// Reads g from the inverse of the tilde block and B through psi = -sharp_g flat_B.
RecoveredField recover_field(const Matrix& H, const CoordPtr& cs);

bool check_level_matching(const FieldSpec& field);
bool check_level_matching(const TensorField& T);

// L_X H = 0; also evaluates the leafwise criterion (Lie_pr_L X of g and B both
// zero) and requires the two answers to agree. Preconditions: level-matched
// field, strongly foliated X.
bool is_generalized_killing(const VectorField& X, const FieldSpec& field);

// Musicals for an m x m matrix over L-indices.
CovectorField flat_l(const Matrix& A, const VectorField& X);  // (X^u A_{uv}) dx^v
VectorField sharp_l(const Matrix& A, const CovectorField& alpha); // inverse metric contraction

} // namespace dfgeo
