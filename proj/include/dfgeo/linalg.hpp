#pragma once

#include "dfgeo/tensor.hpp"

#include <optional>
#include <utility>
#include <vector>

namespace dfgeo {

// Rectangular matrices over the rational-function field and over Q.
using Matrix = std::vector<std::vector<ScalarExpr>>;
using QMatrix = std::vector<std::vector<Rational>>;

Matrix zero_matrix(std::size_t rows, std::size_t cols, std::size_t nvars);
Matrix identity_matrix(std::size_t n, std::size_t nvars);
Matrix mat_add(const Matrix& a, const Matrix& b);
Matrix mat_sub(const Matrix& a, const Matrix& b);
Matrix mat_mul(const Matrix& a, const Matrix& b);
Matrix mat_scaled(const Matrix& a, const ScalarExpr& f);
Matrix transpose(const Matrix& a);
std::vector<ScalarExpr> mat_vec(const Matrix& a, const std::vector<ScalarExpr>& v);
bool mat_equal(const Matrix& a, const Matrix& b);

ScalarExpr det(Matrix m);             // Gaussian elimination over the fraction field
Matrix inverse(const Matrix& m);      // throws SingularError when det == 0
std::size_t rank_symbolic(Matrix m);  // generic rank over the fraction field

struct LinearSolution {
    bool consistent = false;
    std::vector<ScalarExpr> particular;            // one solution of A x = b
    std::vector<std::vector<ScalarExpr>> nullspace; // basis of A x = 0
};
// General exact solve of A x = b (A rows x cols, b rows).
LinearSolution solve_general(Matrix a, std::vector<ScalarExpr> b);

QMatrix eval_matrix(const Matrix& m, const std::vector<Rational>& point);
std::size_t rank_rational(QMatrix m);

// Sylvester signature (p, q) of a symmetric rational matrix by congruent
// diagonalization; the zero count is returned third.
struct Signature {
    int positive = 0;
    int negative = 0;
    int zero = 0;
};
Signature signature_symmetric(QMatrix s);

// Bridges between rank-2 tensors and matrices (row = first slot).
Matrix tensor_to_matrix(const TensorField& t);
TensorField matrix_to_tensor(const CoordPtr& cs, const Matrix& m, const std::vector<Slot>& variance);

} // namespace dfgeo
