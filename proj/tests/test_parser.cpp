#include "doctest.h"
#include "fixtures.hpp"
#include "freeconvex/linalg.hpp"
#include "freeconvex/parser.hpp"

using namespace freeconvex;
using Kind = RationalExpr::Kind;

TEST_CASE("cubic atom text lowers to six words of degree three") {
  NcPoly f1 = to_polynomial(parse(fixtures::kCubicAtom));
  CHECK(f1.terms().size() == 6);
  CHECK(degree(f1) == 3);
  NcPoly expect(1, 1);
  auto one = [](double v) { return Matrix::Constant(1, 1, v); };
  Letter x{1, false}, xs{1, true};
  expect.add_term({}, one(1));
  expect.add_term({x}, one(1));
  expect.add_term({xs}, one(1));
  expect.add_term({x, xs}, one(-2));
  expect.add_term({x, x, xs}, one(-1));
  expect.add_term({xs, x, xs}, one(-1));
  CHECK(coefficient_distance(f1, expect) == 0.0);
}

TEST_CASE("structure of inverse and matrix nodes") {
  RationalExpr e = parse("inv(1 - x1*x2)");
  CHECK(e.kind == Kind::Inverse);
  CHECK(e.children.front().kind == Kind::Add);
  CHECK(contains_inverse(e));
  RationalExpr m = parse("[[1, x1],[x1', 1]]");
  CHECK(m.kind == Kind::Matrix);
  CHECK(m.size == 2);
  CHECK(m.children[2].kind == Kind::Adjoint);
}

TEST_CASE("lowering rules") {
  NcPoly p = to_polynomial(parse("x1*x1' - x1'*x1"));
  CHECK(p.terms().size() == 2);
  CHECK_THROWS_AS(to_polynomial(parse("inv(1-x1)")), Error);
  try {
    to_polynomial(parse("inv(1-x1)"));
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::RationalNotPolynomial);
  }
  NcPoly m = to_polynomial(parse("[[1, x1],[x1', 1]] + x1"));
  CHECK(m.delta() == 2);
  Matrix cx = m.coefficient({{1, false}});
  CHECK(cx(0, 0) == Complex(1.0));
  CHECK(cx(0, 1) == Complex(1.0));
  CHECK(cx(1, 0) == Complex(0.0));
  CHECK(cx(1, 1) == Complex(1.0));
  // The adjoint of a matrix literal transposes its grid.
  NcPoly t = to_polynomial(parse("[[0, x1],[0, 0]]'"));
  CHECK(t.coefficient({{1, true}})(1, 0) == Complex(1.0));
  CHECK(t.coefficient({{1, true}})(0, 1) == Complex(0.0));
  NcPoly c = to_polynomial(parse("2*i*x1"));
  CHECK(c.coefficient({{1, false}})(0, 0) == Complex(0.0, 2.0));
}

TEST_CASE("format of simple polynomials") {
  CHECK(format(NcPoly(1, 1)) == "0");
  CHECK(format(to_polynomial(parse(fixtures::kLinearAtom))) == "1 + 0.5*x1 + 0.5*x1'");
  CHECK(format(to_polynomial(parse("-x1 - 2*x2*x1' + i"))) == "i - x1 - 2*x2*x1'");
  CHECK(format(to_polynomial(parse("(0.25 - 3*i)*x1 - (1 + i)"))) == "(-1 - i) + (0.25 - 3*i)*x1");
}

TEST_CASE("format round trip on random polynomials") {
  Rng rng = substream(11, "parser");
  std::uniform_int_distribution<int> len(0, 4), slot(0, 5), count(0, 7);
  for (int t = 0; t < 100; ++t) {
    const int g = 3, delta = 1 + t % 2;
    NcPoly p(delta, g);
    int terms = count(rng);
    for (int k = 0; k < terms; ++k) {
      Word w;
      int n = len(rng);
      for (int j = 0; j < n; ++j) w.push_back(letter_of_slot(slot(rng), g));
      Matrix c = random_complex(delta, delta, rng);
      if (k % 3 == 0) c = c.real().cast<Complex>();
      p.add_term(w, c);
    }
    std::string text = format(p);
    NcPoly back = to_polynomial(parse(text), g);
    CHECK(coefficient_distance(back, p) == 0.0);
    CHECK(format(back) == text);
  }
}

TEST_CASE("syntax errors carry spans inside the input") {
  const char* bad[] = {"1 +", "x1 x2", "2x1", "x0", "y1", "[[1, 2],[3]]", "inv(1", "1e5", "(x1", "x1 + * x2", "", "1 ) 2"};
  for (const char* text : bad) {
    std::string s(text);
    try {
      parse(s);
      FAIL("expected parse error for '" << s << "'");
    } catch (const ParseError& e) {
      CHECK(e.span().start <= e.span().end);
      CHECK(e.span().end <= s.size());
    }
  }
}

TEST_CASE("specific error classes") {
  try {
    parse("x1 + foo");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("unknown identifier") != std::string::npos);
    CHECK(e.span().start == 5);
    CHECK(e.span().end == 8);
  }
  try {
    parse("[[1, 2], [3]]");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("non-square") != std::string::npos);
  }
}

TEST_CASE("variable count inference and override") {
  CHECK(to_polynomial(parse("x3")).g() == 3);
  CHECK(to_polynomial(parse("x1"), 4).g() == 4);
  CHECK(to_polynomial(parse("1")).g() == 1);
  CHECK_THROWS_AS(to_polynomial(parse("x3"), 2), Error);
}
