#include <cmath>

#include "doctest.h"
#include "fixtures.hpp"
#include "freeconvex/linalg.hpp"
#include "freeconvex/realization.hpp"

using namespace freeconvex;

namespace {

NcPoly poly(const std::string& text, int g = 0) { return to_polynomial(parse(text), g); }

Realization inverse_realization(const std::string& text, int g = 0) {
  return minimize(realize_inverse(realize_expression(parse(text), g)));
}

double det_rel(const Matrix& a, const Matrix& b) {
  Complex da = a.determinant(), db = b.determinant();
  return std::abs(da - db) / std::max(1.0, std::abs(db));
}

}  // namespace

TEST_CASE("sum with the zero function minimizes back") {
  Realization r = realize_expression(parse("1 + x1*x2 - 3*x2'"));
  Realization zero = constant_realization(Matrix::Zero(1, 1), 2);
  Realization s = minimize(realize_sum(r, zero));
  CHECK(s.d() == r.d());
  CHECK(series_discrepancy(r, s, 2 * r.d() + 1) < 1e-12);
}

TEST_CASE("product of 1+x1 and 1+x2") {
  Realization r = realize_prod(realize_expression(parse("1 + x1"), 2), realize_expression(parse("1 + x2"), 2));
  SeriesTable t = series(r, 3);
  NcPoly expect = poly("1 + x1 + x2 + x1*x2", 2);
  for (const auto& [w, c] : t) CHECK(max_abs(c - expect.coefficient(w)) < 1e-14);
  CHECK(t.size() == 1 + 4 + 16 + 64);
}

TEST_CASE("inverse twice restores the state matrices") {
  Realization r = realize_expression(parse(fixtures::kCubicAtom));
  Realization back = realize_inverse(realize_inverse(r));
  for (int k = 0; k < 2 * r.g; ++k) {
    CHECK(max_abs(back.A[k] - r.A[k]) < 1e-14);
    CHECK(max_abs(back.b[k] - r.b[k]) < 1e-14);
  }
  CHECK(max_abs(back.c - r.c) < 1e-14);
}

TEST_CASE("inverse state matrices are A_k - b_k c*") {
  Realization r = realize_expression(parse("1 - x1*x2 + x1'"));
  Realization inv = realize_inverse(r);
  for (int k = 0; k < 2 * r.g; ++k) CHECK(max_abs(inv.A[k] - (r.A[k] - r.b[k] * r.C())) < 1e-15);
}

TEST_CASE("McMillan degrees of the cubic atom inverse and of constants") {
  CHECK(inverse_realization(fixtures::kCubicAtom).d() == 3);
  CHECK(mcmillan_degree(realize_expression(parse("1"))) == 0);
  CHECK(realize_expression(parse("1")).d() == 0);
  CHECK(mcmillan_degree(constant_realization(Matrix::Constant(1, 1, 3.0), 2)) == 0);
}

TEST_CASE("inverse of 1 + x1 x2 against the geometric series") {
  Realization r = inverse_realization("1 + x1*x2");
  CHECK(r.d() == 2);
  SeriesTable t = series(r, 8);
  for (const auto& [w, c] : t) {
    // Nonzero only on (x1 x2)^k with coefficient (-1)^k.
    double expect = 0.0;
    if (w.size() % 2 == 0) {
      bool alternating = true;
      for (std::size_t i = 0; i < w.size(); ++i)
        alternating = alternating && w[i] == Letter{i % 2 == 0 ? 1 : 2, false};
      if (alternating) expect = (w.size() / 2) % 2 == 0 ? 1.0 : -1.0;
    }
    CHECK(std::abs(c(0, 0) - expect) < 1e-12);
  }
}

TEST_CASE("inverse of 1 - x1 is the all-ones power series") {
  Realization r = realize_expression(parse("inv(1 - x1)"));
  REQUIRE(r.d() == 1);
  CHECK(std::abs(r.A[0](0, 0) - 1.0) < 1e-14);
  SeriesTable t = series(r, 8);
  for (const auto& [w, c] : t) {
    bool plain = std::all_of(w.begin(), w.end(), [](const Letter& l) { return !l.starred; });
    CHECK(std::abs(c(0, 0) - (plain ? 1.0 : 0.0)) < 1e-12);
  }
}

TEST_CASE("series at order zero") {
  SeriesTable t = series(realize_expression(parse("1 + x1")), 0);
  REQUIRE(t.size() == 1);
  CHECK(max_abs(t.begin()->second - Matrix::Identity(1, 1)) == 0.0);
}

TEST_CASE("minimize strips an unreachable block") {
  Realization r = realize_expression(parse("1 + x1*x1' - 2*x1"));
  Realization padded = r;
  const int d = r.d(), extra = 3;
  Rng rng = substream(21, "realization");
  for (int k = 0; k < 2 * r.g; ++k) {
    Matrix A = Matrix::Zero(d + extra, d + extra);
    A.topLeftCorner(d, d) = r.A[k];
    A.bottomRightCorner(extra, extra) = random_complex(extra, extra, rng);
    A.topRightCorner(d, extra) = random_complex(d, extra, rng);
    padded.A[k] = A;
    Matrix b = Matrix::Zero(d + extra, 1);
    b.topRows(d) = r.b[k];
    padded.b[k] = b;
  }
  Matrix c = Matrix::Zero(d + extra, 1);
  c.topRows(d) = r.c;
  c.bottomRows(extra) = random_complex(extra, 1, rng);
  padded.c = c;
  CHECK_FALSE(is_minimal(padded));
  Realization m = minimize(padded);
  CHECK(m.d() == d);
  CHECK(is_minimal(m));
  CHECK(series_discrepancy(m, r, 2 * (d + extra) + 1) < 1e-10);
}

TEST_CASE("singularity at the origin is reported") {
  try {
    realize_expression(parse("inv(x1)"));
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::SingularAtOrigin);
  }
  CHECK_THROWS_AS(realize_expression(parse("x1 + x1'")), Error);
}

TEST_CASE("realization of the inverse-free degree-4 product") {
  Realization prod = minimize(
      realize_prod(realize_expression(parse(fixtures::kCubicAtom)), realize_expression(parse(fixtures::kLinearAtom))));
  Realization direct = realize_expression(parse(fixtures::kDegree4));
  CHECK(prod.d() == direct.d());
  CHECK(series_discrepancy(prod, direct, 2 * prod.d() + 1) < 1e-12);
  Realization poly_direct = realize_polynomial(poly(fixtures::kDegree4));
  CHECK(series_discrepancy(direct, poly_direct, 2 * poly_direct.d() + 1) < 1e-12);
}

TEST_CASE("r plus r inverse: singular exactly where det(I - X) vanishes") {
  Realization r = realize_with_inverse(parse("1 - x1"));
  LinearPencil L = pencil_of(r);
  Rng rng = substream(22, "realization");
  for (int t = 0; t < 50; ++t) {
    const int n = 1 + t % 3;
    MatrixTuple X = MatrixTuple::random(1, n, rng);
    if (t % 2) {
      // Force an eigenvalue 1.
      Matrix V = random_complex(n, n, rng);
      Matrix Dg = random_complex(n, n, rng).diagonal().asDiagonal();
      Dg(0, 0) = 1.0;
      X = MatrixTuple({Matrix(V * Dg * V.inverse())});
    }
    Matrix IX = Matrix::Identity(n, n) - X.X[0];
    const double scale = std::max(1.0, max_abs(X.X[0]));
    bool singular_f = min_singular_value(IX) < 1e-8 * scale;
    bool singular_l = min_singular_value(L.evaluate(X)) < 1e-8 * scale;
    CHECK(singular_f == singular_l);
    CHECK(singular_f == (t % 2 == 1));
  }
  CHECK(realize_with_inverse(parse("1")).d() == 0);
}

TEST_CASE("r plus r inverse matches K_f: same determinant up to powers") {
  // For polynomial f the inverse block carries det f; the f block is nilpotent.
  Realization r = realize_with_inverse(parse(fixtures::kCubicAtom));
  Realization inv = inverse_realization(fixtures::kCubicAtom);
  LinearPencil L = pencil_of(r), Linv = pencil_of(inv);
  Rng rng = substream(23, "realization");
  for (int t = 0; t < 10; ++t) {
    MatrixTuple X = MatrixTuple::random(1, 1 + t % 3, rng);
    CHECK(det_rel(L.evaluate(X), Linv.evaluate(X)) < 1e-8);
  }
}

TEST_CASE("series reproduces polynomial coefficients") {
  Rng rng = substream(24, "realization");
  std::uniform_int_distribution<int> len(0, 3), count(1, 6);
  for (int t = 0; t < 100; ++t) {
    const int g = 1 + t % 3, delta = 1 + t % 2;
    std::uniform_int_distribution<int> slot(0, 2 * g - 1);
    NcPoly p(delta, g);
    p.add_term({}, Matrix::Identity(delta, delta));
    int n = count(rng);
    for (int k = 0; k < n; ++k) {
      Word w;
      int m = len(rng);
      for (int j = 0; j < m; ++j) w.push_back(letter_of_slot(slot(rng), g));
      p.add_term(w, random_complex(delta, delta, rng));
    }
    Realization r = realize_expression(parse(format(p)), g);
    // Constant term is normalized to I; compare against p(0)^{-1} p.
    Matrix p0inv = p.constant_term().inverse();
    NcPoly normalized(delta, g);
    for (const auto& [w, c] : p.terms()) normalized.add_term(w, p0inv * c);
    SeriesTable table = series(r, degree(p));
    double worst = 0.0;
    for (const auto& [w, c] : table) worst = std::max(worst, max_abs(c - normalized.coefficient(w)));
    CHECK(worst <= 1e-9);
  }
}

TEST_CASE("equivalence of realizations") {
  Rng rng = substream(25, "realization");
  Realization r = inverse_realization("1 + x1*x2 - x2'*x1 + 0.5*x1'", 2);
  REQUIRE(is_minimal(r));
  Matrix S = random_complex(r.d(), r.d(), rng) + 2.0 * Matrix::Identity(r.d(), r.d());
  Matrix Sinv = S.inverse();
  Realization t = r;
  for (int k = 0; k < 2 * r.g; ++k) {
    t.A[k] = S * r.A[k] * Sinv;
    t.b[k] = S * r.b[k];
  }
  t.c = (r.C() * Sinv).adjoint();
  CHECK(equivalent(r, t, rng));
  Realization other = inverse_realization("1 + x1*x2 - x2'*x1 + 0.25*x1'", 2);
  CHECK_FALSE(equivalent(r, other, rng));
  // r plus an unobservable copy of itself.
  Realization padded = realize_sum(r, realize_scaled(Matrix::Zero(1, 1), r));
  try {
    equivalent(r, padded, rng);
    FAIL("expected NotMinimal");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NotMinimal);
  }
}

TEST_CASE("Kalman reduction keeps the value on evaluation") {
  Rng rng = substream(26, "realization");
  Realization big = realize_polynomial(poly("1 + x1*x1' - 2*x1'*x1*x1 + 3*x1*x1", 1));
  Realization small = minimize(big);
  CHECK(small.d() <= big.d());
  for (int t = 0; t < 5; ++t) {
    MatrixTuple X = MatrixTuple::random(1, 2, rng);
    X.X[0] *= 0.3;
    CHECK(max_abs(evaluate(big, X) - evaluate(small, X)) < 1e-10);
    CHECK(max_abs(evaluate(big, X) - evaluate(poly("1 + x1*x1' - 2*x1'*x1*x1 + 3*x1*x1"), X)) < 1e-10);
  }
}
