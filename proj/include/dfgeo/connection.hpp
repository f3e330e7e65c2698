#pragma once

#include "dfgeo/genmetric.hpp"

#include <optional>

namespace dfgeo {

// Linear connection on TM in the distinguished frame:
// nabla_{e_u} e_v = Gamma_{uv}{}^w e_w.
struct Connection {
    CoordPtr cs;
    std::vector<ScalarExpr> coef; // dim^3, index (u*dim + v)*dim + w

    explicit Connection(CoordPtr coords);

    const ScalarExpr& at(std::size_t u, std::size_t v, std::size_t w) const;
    ScalarExpr& at(std::size_t u, std::size_t v, std::size_t w);

    VectorField cov_deriv(const VectorField& Z, const VectorField& Y) const;
};

Connection flat_connection(const CoordPtr& cs);

// d_u M_{vw} = Gamma_{uv}{}^s M_{sw} + Gamma_{uw}{}^s M_{vs} identically.
bool preserves_metric(const Connection& conn, const Matrix& metric);
bool preserves_gamma(const Connection& conn);

void require_gamma_preserving(const Connection& conn, const char* ctx);

// Partial connection along the leaves of L: directions and values in L,
// derivatives only in x-coordinates. D_X Y = X^k (dY^j/dx^k + LC_{ki}{}^j Y^i) d_j.
struct LeafConnection {
    CoordPtr cs;
    std::vector<ScalarExpr> coef; // m^3, index (k*m + i)*m + j

    explicit LeafConnection(CoordPtr coords);

    const ScalarExpr& at(std::size_t k, std::size_t i, std::size_t j) const;
    ScalarExpr& at(std::size_t k, std::size_t i, std::size_t j);

    VectorField cov_deriv(const VectorField& X, const VectorField& Y) const;
};

// Connection on the bundle L with directions in all of TM:
// D_Z Y = Z^u (d_u Y^j + DGamma_{ui}{}^j Y^i) d_j.
struct LConnection {
    CoordPtr cs;
    std::vector<ScalarExpr> coef; // 2m * m * m, index (u*m + i)*m + j

    explicit LConnection(CoordPtr coords);

    const ScalarExpr& at(std::size_t u, std::size_t i, std::size_t j) const;
    ScalarExpr& at(std::size_t u, std::size_t i, std::size_t j);

    VectorField cov_deriv(const VectorField& Z, const VectorField& Y) const;
};

bool lconnection_preserves_g(const LConnection& D, const Matrix& g);

// Levi-Civita coefficients of g along the leaves of L (x-derivatives only).
LeafConnection levi_civita_partial(const FieldSpec& field);

// The unique connection acting blockwise through iota_pm:
// nabla_Z(iota_pm X) = iota_pm(D_pm_Z X). Preserves gamma and H.
Connection build_double_metric(const LConnection& Dplus, const LConnection& Dminus,
                               const GeneralizedMetric& gm);

// Extracts D_pm back from a double-metric connection; validates that
// nabla(iota_pm frame) stays inside S_pm.
std::pair<LConnection, LConnection> extract_pm(const Connection& conn,
                                               const GeneralizedMetric& gm);

// Mixed-torsion-free connection whose leafwise restrictions D^{pm,L} are the
// Levi-Civita connection of g.
Connection cwt_connection(const GeneralizedMetric& gm);

struct VtcResult {
    Connection conn;
    TensorField psi; // totally antisymmetric 3-covector deformation
};

// Torsion-free deformation of the CWT connection by Theta = sharp_gamma(Psi).
VtcResult vtc_connection(const GeneralizedMetric& gm);

// [X,Y]_mod = [X,Y] + X ^_conn Y (requires gamma preservation).
VectorField modified_bracket(const Connection& conn, const VectorField& X, const VectorField& Y);

// gamma(nabla_X Y - nabla_Y X - [X,Y], Z) + 1/2 {gamma(nabla_Z X, Y) - gamma(nabla_Z Y, X)}.
ScalarExpr gualtieri_torsion(const Connection& conn, const VectorField& X, const VectorField& Y,
                             const VectorField& Z);

// sigma_pm(X, Y): 1-form with <sigma, Z> = pm (g(X, D_pm_Z Y) - g(D_pm_Z X, Y)); X, Y in L.
CovectorField sigma_pm(int sign, const LConnection& D, const Matrix& g, const VectorField& X,
                       const VectorField& Y);

// nabla_X nabla_Y Z - nabla_Y nabla_X Z - nabla_{[X,Y]_mod} Z.
VectorField modified_curvature(const Connection& conn, const VectorField& X, const VectorField& Y,
                               const VectorField& Z);

// Frame table R(e_u, e_v) e_s = R[u][v][s][w] e_w of the modified curvature.
struct CurvatureTable {
    CoordPtr cs;
    std::vector<ScalarExpr> comp; // dim^4, index ((u*dim + v)*dim + s)*dim + w

    explicit CurvatureTable(CoordPtr coords);
    const ScalarExpr& at(std::size_t u, std::size_t v, std::size_t s, std::size_t w) const;
    ScalarExpr& at(std::size_t u, std::size_t v, std::size_t s, std::size_t w);
};

CurvatureTable curvature_tensor(const Connection& conn);

// Modified Ricci tensor on the coordinate frame, contracted through the
// inverse Gram matrix of g (basis independence makes this exact).
Matrix ricci_tensor(const Connection& conn, const GeneralizedMetric& gm);

// Exact symbolic scalar curvature kappa(H, nabla).
ScalarExpr kappa_expr(const Connection& conn, const GeneralizedMetric& gm);

struct ScalarCurvatureResult {
    double value = 0.0;
    std::optional<Rational> exact; // present when Gram-Schmidt stayed rational
};

// Pointwise kappa through a signed Gram-Schmidt pseudo-orthonormal basis;
// recomputed with a second seed order and compared.
ScalarCurvatureResult scalar_curvature(const Connection& conn, const GeneralizedMetric& gm,
                                       const std::vector<Rational>& point);

// Nodes/weights on [-1, 1].
struct QuadRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};
QuadRule gauss_legendre(int order);

enum class ConnectionKind { vtc, cwt };

struct ActionResult {
    double value = 0.0;
    bool level_matched = true; // false -> caller should warn
};

// Tensor-product Gauss-Legendre quadrature of e^{-2 phi} kappa sqrt(|det H|)
// over an axis-aligned box [lo_1, hi_1] x ... x [lo_2m, hi_2m].
ActionResult action_value(const GeneralizedMetric& gm, ConnectionKind kind,
                          const std::vector<std::pair<double, double>>& box, int quad_order);

} // namespace dfgeo
