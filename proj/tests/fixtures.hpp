#pragma once
// Worked examples shared by the test suites (g = 1, x = x1).
#include <cmath>
#include <string>

#include "freeconvex/parser.hpp"
#include "freeconvex/pencil.hpp"

namespace fixtures {

using namespace freeconvex;

// Degree-4 example: cubic atom times a linear atom.
inline const std::string kCubicAtom = "1 + x1 + x1' - 2*x1*x1' - (x1 + x1')*x1*x1'";
inline const std::string kLinearAtom = "1 + 0.5*x1 + 0.5*x1'";
inline const std::string kDegree4 = "(" + kCubicAtom + ")*(" + kLinearAtom + ")";

inline LinearPencil degree4_pencil() {
  // [[1+x+x*, 0, x], [0, 1, x], [x*, x*, 1]]
  Matrix c = Matrix::Identity(3, 3);
  Matrix ax = Matrix::Zero(3, 3), as = Matrix::Zero(3, 3);
  ax(0, 0) = 1; ax(0, 2) = 1; ax(1, 2) = 1;
  as(0, 0) = 1; as(2, 0) = 1; as(2, 1) = 1;
  return LinearPencil(c, {ax}, {as});
}

// Degree-6 example with h = x + x*.
inline const std::string kH = "(x1 + x1')";
inline const std::string kQuarticAtom = "1 - " + kH + " - 2*" + kH + "*" + kH + " - 2*x1'*x1 + " + kH + "*" + kH +
                                        "*" + kH + " + 2*" + kH + "*" + kH + "*x1'*x1";
inline const std::string kQuadraticFactor = "1 - " + kH + "*" + kH;
inline const std::string kDegree6 = "(" + kQuarticAtom + ")*(" + kQuadraticFactor + ")";

inline LinearPencil degree6_pencil() {
  const double r2 = std::sqrt(2.0);
  Matrix c = Matrix::Identity(4, 4);
  Matrix ax = Matrix::Zero(4, 4), as = Matrix::Zero(4, 4);
  // h-dependent part, shared by x and x*.
  Matrix h = Matrix::Zero(4, 4);
  h(0, 0) = -0.5; h(0, 1) = -r2; h(0, 2) = 0.5;
  h(1, 0) = -r2;
  h(2, 0) = 0.5; h(2, 2) = -0.5;
  ax = h; as = h;
  as(0, 3) += 1; as(2, 3) += -1;
  ax(3, 0) += 1; ax(3, 2) += -1;
  return LinearPencil(c, {ax}, {as});
}

// Reference 2x2 quadratic.
inline const std::string kDegree6Quadratic =
    "[[1 - 0.5*x1 - 0.5*x1' - 2*x1*x1 - 2*x1*x1' - 3*x1'*x1 - 2*x1'*x1', 0.5*x1 + 0.5*x1' + x1'*x1],"
    " [0.5*x1 + 0.5*x1' + x1'*x1, 1 - 0.5*x1 - 0.5*x1' - x1'*x1]]";

// Degree-7 atom.
inline const std::string kDegree7 =
    "1 + 4*(x1 + x1') + 2*(x1*x1 + x1'*x1') - x1*x1' - 7*x1*x1'*(x1 + x1') - 4*x1'*x1*(x1 + x1')"
    " - x1*x1'*(x1*x1 + x1'*x1') + 2*x1*x1'*(x1*x1' + x1'*x1)*(x1 + x1')";

inline LinearPencil degree7_pencil() {
  // Entry (i,j) = cx(i,j) x + cs(i,j) x* (+ identity).
  const double cx[6][6] = {{-1, 1, -1, 1, -1, 1}, {0, 0, 0, 0, 0, 0}, {-1, 0, 1, -1, 1, -1},
                           {0, 0, 0, 0, 0, 0},    {0, 0, 0, 0, 0, 0}, {1, 0, -1, 0, 0, 2}};
  const double cs[6][6] = {{-1, 0, -1, 0, 0, 1}, {1, 0, 0, 0, 0, 0},  {-1, 0, 1, 0, 0, -1},
                           {1, 0, -1, 0, 0, 0},  {-1, 0, 1, 0, 0, 0}, {1, 0, -1, 0, 0, 2}};
  Matrix ax(6, 6), as(6, 6);
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) {
      ax(i, j) = cx[i][j];
      as(i, j) = cs[i][j];
    }
  return LinearPencil(Matrix::Identity(6, 6), {ax}, {as});
}

// 3x3 matrix polynomial [[1,0,x],[0,1,p],[x*,p*,1+p*p]] with p = x^2.
inline const std::string kBorderedBall = "[[1, 0, x1], [0, 1, x1*x1], [x1', x1'*x1', 1 + x1'*x1'*x1*x1]]";

inline LinearPencil ball_pencil(double radius = 1.0) {
  // [[1, x/r], [x*/r, 1]]
  Matrix ax = Matrix::Zero(2, 2);
  ax(0, 1) = 1.0 / radius;
  return LinearPencil::hermitian_monic({Matrix(-ax)});
}

inline const std::string kNonconvexQuadratic = "1 - x1*x1 - x1'*x1'";

// Rank-check instance: 1 - 2x - 2x* over the unit ball.
inline LinearPencil singular_rank_instance() {
  Matrix one = Matrix::Identity(1, 1);
  return LinearPencil(one, {Matrix(-2.0 * one)}, {Matrix(-2.0 * one)});
}

}  // namespace fixtures
