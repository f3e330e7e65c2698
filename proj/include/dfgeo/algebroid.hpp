#pragma once

#include "dfgeo/tensor.hpp"

#include <functional>

namespace dfgeo {

struct Connection;

// The flat metric algebroid (TM, gamma, Id, star) of the double manifold.
// All brackets below are R-bilinear, antisymmetric, and reduce to the Lie
// bracket on pure-L or pure-Ltilde arguments.

// d f = 1/2 sharp_gamma(df); satisfies gamma(d f, Z) = 1/2 Z(f) for every Z.
VectorField d_operator(const ScalarExpr& f, const CoordPtr& cs);

VectorField lie_bracket(const VectorField& X, const VectorField& Y);

// The unique field with gamma(Z, X ^ Y) = 1/2 [gamma(X, D_Z Y) - gamma(Y, D_Z X)]
// for all Z, where D is the flat connection of the affine coordinates.
VectorField wedge_nabla0(const VectorField& X, const VectorField& Y);

// [X,Y] = [X,Y]_Lie - X ^ Y.
VectorField c_bracket(const VectorField& X, const VectorField& Y);

// X * Y = [X,Y] + d(gamma(X,Y)).
VectorField star_product(const VectorField& X, const VectorField& Y);

// L + L* picture. A generalized vector Z is synonymous with the pair
// (pr_L Z, flat_gamma(pr_Ltilde Z)); the covector half has pure dx support.
VectorField assemble_pair(const VectorField& X, const CovectorField& alpha);
std::pair<VectorField, CovectorField> split_pair(const VectorField& Z);

// C-bracket computed through the Lie algebroid calculus of L and L*.
// Inputs: X, Y supported on L; alpha, beta supported on ann Ltilde.
// Returns the assembled generalized vector field; agrees with c_bracket.
VectorField c_bracket_lwz(const VectorField& X, const CovectorField& alpha,
                          const VectorField& Y, const CovectorField& beta);

// 2-form on L (components vanish whenever an index is tilde).
struct SFieldForm {
    TensorField S;
    bool closed_on_L;

    explicit SFieldForm(TensorField form);
};

// (X, alpha) -> (X, alpha + i(X)S) in the L + L* picture.
VectorField s_field_transform(const SFieldForm& S, const VectorField& X);

// Derivation extension of L_X f = X(f), L_X Y = X * Y.
TensorField gen_lie_derivative(const VectorField& X, const TensorField& T);

// No tilde-coordinate appears in any component (exact for rational components).
bool is_foliated(const ScalarExpr& f, const CoordPtr& cs);
bool is_strongly_foliated(const TensorField& T);

enum class JacMode { leibniz, cyclic };

// leibniz: X*(Y*Z) - (X*Y)*Z - Y*(X*Z).
// cyclic: sum_cycl [[X,Y],Z] minus the common value of the three equivalent
// right hand sides (1/3) sum d(gamma([X,Y],Z)), (1/2) sum d(gamma([X,Y]_Lie,Z)),
// sum d(gamma(Y^X,Z)); the three are compared and must agree.
VectorField jacobiator(const VectorField& X, const VectorField& Y,
                       const VectorField& Z, JacMode mode);

// Structure coefficients c_{uv}^w of a bilinear bracket on the frame fields.
struct BracketTable {
    CoordPtr cs;
    std::vector<ScalarExpr> coeff; // dim^3, index (u*dim + v)*dim + w

    explicit BracketTable(CoordPtr coords);

    const ScalarExpr& at(std::size_t u, std::size_t v, std::size_t w) const;
    ScalarExpr& at(std::size_t u, std::size_t v, std::size_t w);
    bool antisymmetric() const;

    static BracketTable tabulate(
        const CoordPtr& cs,
        const std::function<VectorField(const VectorField&, const VectorField&)>& bracket);
};

// Metric bracket of a gamma-preserving connection:
// nabla_X Y - nabla_Y X - X ^_nabla Y. Throws ValidationError when the
// connection does not preserve gamma.
VectorField bracket_from_connection(const Connection& conn, const VectorField& X,
                                    const VectorField& Y);

// Wedge of an arbitrary gamma-preserving connection (same defining display as
// wedge_nabla0 with D replaced by the connection).
VectorField wedge_conn(const Connection& conn, const VectorField& X, const VectorField& Y);

} // namespace dfgeo
