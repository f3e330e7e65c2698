#include "dfgeo/rng.hpp"

#include "dfgeo/errors.hpp"
#include "dfgeo/linalg.hpp"

namespace dfgeo {

std::uint64_t Rng::next() {
    state_ += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

std::uint64_t Rng::below(std::uint64_t bound) {
    if (bound == 0) throw ValidationError("Rng::below(0)");
    // Rejection sampling for exact uniformity.
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t v = next();
    while (v >= limit) v = next();
    return v % bound;
}

long Rng::range(long lo, long hi) {
    if (hi < lo) throw ValidationError("Rng::range: empty interval");
    return lo + static_cast<long>(below(static_cast<std::uint64_t>(hi - lo) + 1));
}

Rational Rng::rational(long num_bound, long den_bound) {
    const long num = range(-num_bound, num_bound);
    const long den = range(1, den_bound);
    Rational q(num, den);
    q.canonicalize(); // the two-argument mpq constructor does not reduce
    return q;
}

Rng Rng::fork(std::uint64_t tag, std::uint64_t index) const {
    Rng mix(state_ ^ (tag * 0xd1342543de82ef95ull));
    mix.next();
    Rng out(mix.next() ^ (index * 0xaf251af3b0f025b5ull));
    out.next();
    return out;
}

namespace {

ScalarExpr random_poly(const CoordPtr& cs, const PolyOptions& opt, Rng& rng) {
    const std::size_t n = cs->dim();
    const std::size_t nvar = opt.foliated ? n / 2 : n;
    ScalarExpr acc(n);
    for (int t = 0; t < opt.terms; ++t) {
        const Rational c = rng.rational(opt.coeff_bound, 2);
        if (sgn(c) == 0) continue;
        ScalarExpr mono = ScalarExpr::constant(n, c);
        const int deg = static_cast<int>(rng.range(0, opt.degree));
        for (int d = 0; d < deg; ++d) {
            const std::size_t v = static_cast<std::size_t>(rng.below(nvar));
            mono *= ScalarExpr::variable(n, v);
        }
        acc += mono;
    }
    return acc;
}

} // namespace

ScalarExpr random_scalar(const CoordPtr& cs, const PolyOptions& opt, Rng& rng) {
    return random_poly(cs, opt, rng);
}

VectorField random_vector_field(const CoordPtr& cs, const PolyOptions& opt, Rng& rng) {
    std::vector<ScalarExpr> comps;
    for (std::size_t u = 0; u < cs->dim(); ++u) comps.push_back(random_poly(cs, opt, rng));
    return TensorField::vector(cs, std::move(comps));
}

CovectorField random_covector_field(const CoordPtr& cs, const PolyOptions& opt, Rng& rng) {
    std::vector<ScalarExpr> comps;
    for (std::size_t u = 0; u < cs->dim(); ++u) comps.push_back(random_poly(cs, opt, rng));
    return TensorField::covector(cs, std::move(comps));
}

VectorField random_l_vector(const CoordPtr& cs, const PolyOptions& opt, Rng& rng) {
    const std::size_t n = cs->dim();
    std::vector<ScalarExpr> comps(n, ScalarExpr(n));
    for (std::size_t i = 0; i < n / 2; ++i) comps[i] = random_poly(cs, opt, rng);
    return TensorField::vector(cs, std::move(comps));
}

CovectorField random_l_covector(const CoordPtr& cs, const PolyOptions& opt, Rng& rng) {
    const std::size_t n = cs->dim();
    std::vector<ScalarExpr> comps(n, ScalarExpr(n));
    for (std::size_t i = 0; i < n / 2; ++i) comps[i] = random_poly(cs, opt, rng);
    return TensorField::covector(cs, std::move(comps));
}

std::vector<Rational> random_point(const CoordPtr& cs, Rng& rng) {
    std::vector<Rational> pt;
    for (std::size_t u = 0; u < cs->dim(); ++u) pt.push_back(rng.rational(2, 3));
    return pt;
}

namespace {

TensorField random_antisym_l(const CoordPtr& cs, const PolyOptions& opt, Slot slot, Rng& rng) {
    const std::size_t m = static_cast<std::size_t>(cs->m());
    TensorField t(cs, {slot, slot});
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i + 1; j < m; ++j) {
            ScalarExpr c = random_poly(cs, opt, rng);
            t.at({i, j}) = c;
            t.at({j, i}) = -c;
        }
    return t;
}

} // namespace

TensorField random_two_form(const CoordPtr& cs, const PolyOptions& opt, Rng& rng) {
    return random_antisym_l(cs, opt, Slot::C, rng);
}

TensorField random_bivector(const CoordPtr& cs, const PolyOptions& opt, Rng& rng) {
    return random_antisym_l(cs, opt, Slot::V, rng);
}

FieldSpec random_field_spec(const CoordPtr& cs, const FieldOptions& opt, Rng& rng) {
    const std::size_t m = static_cast<std::size_t>(cs->m()), n = cs->dim();
    const int p = opt.p < 0 ? cs->m() : opt.p;
    const int q = cs->m() - p;
    if (p < 0 || q < 0) throw ValidationError("random_field_spec: bad signature");

    // Sparse frame entries: connection and curvature work downstream is
    // polynomial in the term counts here, so keep them single-monomial.
    PolyOptions entry{opt.degree, 1, opt.level_matched, opt.coeff_bound};
    if (opt.constant) entry.degree = 0;

    const bool uni = opt.unimodular != 0;
    // Constant specs keep their constant terms; the signature check below
    // rejects bad draws. Varying specs pin C(reference) = Id instead.
    const auto entry_poly = [&](Rng& r) {
        ScalarExpr e = random_poly(cs, entry, r);
        if (!opt.constant)
            e -= ScalarExpr::constant(n, e.eval(std::vector<Rational>(n, Rational(0))));
        return e;
    };

    for (int attempt = 0; attempt < 32; ++attempt) {
        Matrix C = identity_matrix(m, n);
        if (uni) {
            // Unit lower triangular: unimodular and sparse.
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t j = 0; j < i; ++j) C[i][j] = entry_poly(rng);
        } else {
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t j = 0; j < m; ++j) C[i][j] += entry_poly(rng);
        }
        Matrix delta = identity_matrix(m, n);
        for (std::size_t i = static_cast<std::size_t>(p); i < m; ++i)
            delta[i][i] = ScalarExpr::constant(n, Rational(-1));
        Matrix g = mat_mul(mat_mul(transpose(C), delta), C);

        Matrix B = zero_matrix(m, m, n);
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = i + 1; j < m; ++j) {
                ScalarExpr c = random_poly(cs, entry, rng);
                B[i][j] = c;
                B[j][i] = -c;
            }
        ScalarExpr phi = random_poly(cs, entry, rng);

        try {
            return make_field_spec(cs, g, B, phi, p, q,
                                   std::vector<Rational>(n, Rational(0)));
        } catch (const Error&) {
            continue; // e.g. det(g) collapsed; resample
        }
    }
    throw Error("random_field_spec: could not build a valid field");
}

Matrix random_isometry_j(const FieldSpec& field, Rng& rng) {
    const std::size_t m = field.m(), n = field.cs->dim();
    const Matrix ginv = inverse(field.g);
    for (int attempt = 0; attempt < 32; ++attempt) {
        Matrix K = zero_matrix(m, m, n);
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = i + 1; j < m; ++j) {
                const Rational c = rng.rational(2, 2);
                K[i][j] = ScalarExpr::constant(n, c);
                K[j][i] = ScalarExpr::constant(n, -c);
            }
        const Matrix S = mat_mul(ginv, K);
        Matrix denom = mat_add(identity_matrix(m, n), S);
        try {
            const Matrix J = mat_mul(mat_sub(identity_matrix(m, n), S), inverse(denom));
            const Matrix check = mat_mul(mat_mul(transpose(J), field.g), J);
            if (mat_equal(check, field.g)) return J;
        } catch (const SingularError&) {
        }
    }
    throw Error("random_isometry_j: could not build an isometry");
}

} // namespace dfgeo
