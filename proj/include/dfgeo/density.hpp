#pragma once

#include "dfgeo/connection.hpp"

namespace dfgeo {

// Weight-s density of TM, component taken in the distinguished frame
// |d/dx_1 ^ ... ^ d/dxt_m|^s.
struct Density {
    CoordPtr cs;
    Rational weight;
    ScalarExpr component;
    bool strongly_foliated = false;
};

Density make_density(const CoordPtr& cs, const Rational& weight, ScalarExpr component);

// Leafwise divergence, sum over x-derivatives of the L-components.
ScalarExpr div_L(const VectorField& X);

// Component X(theta) + s * theta * div_L X; both arguments strongly foliated.
Density lie_density(const VectorField& X, const Density& d);

// s times the trace 1-form of the connection coefficients.
CovectorField induced_density_connection(const Connection& conn, const Rational& s);

// Affine chart change x = alpha x' + a0, xt = beta xt' + b0 (all constant).
// When dual is true the blocks are tied by beta = (alpha^T)^-1, the transition
// form of the distinguished charts, and the TM frame change has determinant 1.
struct AffineChange {
    QMatrix alpha;
    QMatrix beta;
    std::vector<Rational> alpha0;
    std::vector<Rational> beta0;
};

AffineChange make_affine_dual(const QMatrix& alpha, std::vector<Rational> alpha0,
                              std::vector<Rational> beta0);
AffineChange make_affine_general(const QMatrix& alpha, const QMatrix& beta,
                                 std::vector<Rational> alpha0, std::vector<Rational> beta0);

// Determinant of the TM frame change d/dx' = alpha^T-block d/dx (equals
// det(alpha) det(beta)).
Rational frame_change_det(const AffineChange& ch);

// Component in the primed chart: |det|^-s * component(x(x')). Integer weights
// only, since |det|^s must stay rational.
Density transform_density(const Density& d, const AffineChange& ch);

} // namespace dfgeo
