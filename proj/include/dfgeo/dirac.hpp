#pragma once

#include "dfgeo/genmetric.hpp"

namespace dfgeo {

// Maximal gamma-isotropic subbundle given by m spanning fields. `isotropic` is
// computed at construction; rank m is certified at the supplied point.
struct ParaDirac {
    CoordPtr cs;
    std::vector<VectorField> span;
    bool isotropic = false;
};

ParaDirac make_para_dirac(const CoordPtr& cs, std::vector<VectorField> span,
                          const std::vector<Rational>& reference_point);

// D = { iota_+ X + iota_-(JX) : X in L } for a g-isometry J (m x m, J^T g J = g).
ParaDirac dirac_from_isometry(const Matrix& J, const FieldSpec& field);

// Inverse correspondence: builds the almost-product Psi with eigenbundles
// D and its H-orthogonal, then reads J off Psi(iota_+ e_i) = iota_-(J e_i).
// Requires det of the H-Gram matrix of the span to be nonzero.
Matrix isometry_from_dirac(const ParaDirac& D, const GeneralizedMetric& gm);

enum class GraphKind { two_form, bivector };

// graph flat_theta = span{ d/dx_i + theta_ij d/dxt_j } (two_form, theta in L*^2),
// graph sharp_P    = span{ P^{ij} d/dx_j + d/dxt_i }   (bivector, P in L^2).
ParaDirac graph_dirac(GraphKind kind, const TensorField& tensor,
                      const std::vector<Rational>& reference_point);

// J_theta = (Id + sharp_g flat_{B-theta})(Id - sharp_g flat_{B-theta})^-1,
// J_P = (Q+ - Id)(Q- + Id)^-1 with Q+- = +-sharp_g flat_{B+-g} sharp_P flat_g.
Matrix j_from_graph(GraphKind kind, const TensorField& tensor, const FieldSpec& field);

// D = { X : pr_L X in E, varpi(pr_L X, Y) = gamma(pr_Lt X, Y) for all Y in E }.
// E is given by k spanning L-fields, varpi by its k x k matrix in that basis.
ParaDirac reconstruct(const std::vector<VectorField>& E, const Matrix& varpi,
                      const std::vector<Rational>& reference_point);

// paraint5 is selected by criterion = 0; 1..5 select the equivalent conditions
// gamma([X,Y]_cb, Z) = 0, gamma(X, D0_Z Y) = gamma([X,Y], Z), and the three
// cyclic forms. Criterion 0 additionally requires a strongly foliated span.
bool check_integrability(const ParaDirac& D, int criterion);

ScalarExpr pair_H(const GeneralizedMetric& gm, const VectorField& Z, const VectorField& U);
VectorField apply_Phi(const GeneralizedMetric& gm, const VectorField& Z);

struct PsiTriple {
    Matrix A;     // endomorphism of L
    Matrix sigma; // 2-form components sigma[i][j]
    Matrix pi;    // bivector components pi[i][j]
};

// A = (J + J^-1)/2 - sharp_pi flat_B, sharp_pi = (J - J^-1)/2 sharp_g,
// flat_sigma = flat_B (J + J^-1) - A^t flat_B; the representation invariants
// A^2 = Id - sharp_pi flat_sigma, A Pi = Pi A^T, A^T Sigma = Sigma A are rechecked.
PsiTriple psi_triple(const ParaDirac& D, const GeneralizedMetric& gm);

// Direct property tests used alongside the integrability criteria.
bool span_involutive_lie(const ParaDirac& D);     // [span, span] stays in the span
bool span_totally_geodesic(const ParaDirac& D);   // D0-derivatives stay in the span

} // namespace dfgeo
