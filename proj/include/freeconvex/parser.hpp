#pragma once
#include <string>
#include <string_view>
#include <vector>

#include "freeconvex/errors.hpp"
#include "freeconvex/ncpoly.hpp"

namespace freeconvex {

struct RationalExpr {
  enum class Kind { Constant, Variable, Adjoint, Negate, Add, Mul, Inverse, Matrix };

  Kind kind = Kind::Constant;
  Complex value{0.0, 0.0};  // Constant
  int var = 0;              // Variable, 1-based
  int size = 0;             // Matrix: side length, children in row-major order
  std::vector<RationalExpr> children;
  SourceSpan span;

  static RationalExpr constant(Complex c);
  static RationalExpr variable(int j);
  static RationalExpr unary(Kind kind, RationalExpr child);
  static RationalExpr nary(Kind kind, std::vector<RationalExpr> children);
  static RationalExpr matrix(int size, std::vector<RationalExpr> entries);
};

RationalExpr parse(std::string_view text);

int max_variable(const RationalExpr& e);
bool contains_inverse(const RationalExpr& e);
// Output size of the expression (1 for scalars); throws on inconsistent sizes.
int expression_size(const RationalExpr& e);

// g = 0 means infer from the largest variable index (at least 1).
NcPoly to_polynomial(const RationalExpr& e, int g = 0);

std::string format(const NcPoly& p);
std::string format_number(double x);

}  // namespace freeconvex
