#pragma once

#include <gmpxx.h>

#include <optional>
#include <string>

namespace dfgeo {

using Rational = mpq_class;
using Integer = mpz_class;

inline double to_double(const Rational& q) { return q.get_d(); }

inline std::string to_string(const Rational& q) { return q.get_str(); }

// Exact square root when `q` is a perfect square of a rational, nullopt otherwise.
std::optional<Rational> sqrt_exact(const Rational& q);

// Parses "p" or "p/q" with optional sign. Returns nullopt on malformed input or q == 0.
std::optional<Rational> parse_rational(const std::string& text);

} // namespace dfgeo
