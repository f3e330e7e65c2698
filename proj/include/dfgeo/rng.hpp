#pragma once

#include "dfgeo/genmetric.hpp"

#include <cstdint>

namespace dfgeo {

// splitmix64. Deterministic across platforms, cheap to fork per instance.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next();
    std::uint64_t below(std::uint64_t bound); // uniform in [0, bound)
    long range(long lo, long hi);             // inclusive bounds
    Rational rational(long num_bound, long den_bound);

    // Independent stream for instance `index` of batch `tag`.
    Rng fork(std::uint64_t tag, std::uint64_t index) const;

private:
    std::uint64_t state_;
};

struct PolyOptions {
    int degree = 2;
    int terms = 3;
    bool foliated = false;
    long coeff_bound = 3;
};

ScalarExpr random_scalar(const CoordPtr& cs, const PolyOptions& opt, Rng& rng);
VectorField random_vector_field(const CoordPtr& cs, const PolyOptions& opt, Rng& rng);
CovectorField random_covector_field(const CoordPtr& cs, const PolyOptions& opt, Rng& rng);
VectorField random_l_vector(const CoordPtr& cs, const PolyOptions& opt, Rng& rng);
CovectorField random_l_covector(const CoordPtr& cs, const PolyOptions& opt, Rng& rng);
std::vector<Rational> random_point(const CoordPtr& cs, Rng& rng);

// Antisymmetric rank-2 tensors supported on L.
TensorField random_two_form(const CoordPtr& cs, const PolyOptions& opt, Rng& rng);
TensorField random_bivector(const CoordPtr& cs, const PolyOptions& opt, Rng& rng);

struct FieldOptions {
    int p = -1; // signature positives; -1 means m
    int degree = 1;
    bool level_matched = true;
    bool constant = false;
    long coeff_bound = 2;
    // det C = 1 keeps inverse(g) and everything downstream polynomial; 0
    // requests a generic frame, whose fractions cost real time.
    int unimodular = 1;
};

// g = C^T diag(I_p, -I_q) C with C(reference) = Id for varying specs, so the
// signature at the origin reference point is exact; B antisymmetric, phi a
// polynomial. Unimodular C is unit lower triangular.
FieldSpec random_field_spec(const CoordPtr& cs, const FieldOptions& opt, Rng& rng);

// Exact g-isometry J = (Id - S)(Id + S)^-1 with S = g^-1 K, K antisymmetric;
// S is pointwise g-antisymmetric, so J^T g J = g identically.
Matrix random_isometry_j(const FieldSpec& field, Rng& rng);

} // namespace dfgeo
