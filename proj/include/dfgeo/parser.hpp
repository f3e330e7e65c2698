#pragma once

#include "dfgeo/coords.hpp"
#include "dfgeo/scalar.hpp"

namespace dfgeo {

// Recursive-descent parser for the expression grammar documented in README.md:
//
//   expr    := term (('+' | '-') term)*
//   term    := factor (('*' | '/') factor)*
//   factor  := '-' factor | power
//   power   := primary ('^' exponent)?
//   primary := integer | coordinate | '(' expr ')'
//   exponent:= integer | '-' integer | '(' '-'? integer ')'
//
// Coordinates are the labels of `cs` (x1..xm, xt1..xtm by default). Unknown
// identifiers and malformed syntax raise ParseError with a byte offset.
ScalarExpr parse_scalar(const std::string& text, const CoordSystem& cs);

} // namespace dfgeo
