#pragma once
#include <compare>
#include <map>
#include <vector>

#include "freeconvex/random.hpp"
#include "freeconvex/types.hpp"

namespace freeconvex {

// x_var (starred = false) or x_var* (starred = true); var is 1-based.
struct Letter {
  int var = 1;
  bool starred = false;
  auto operator<=>(const Letter&) const = default;
};

using Word = std::vector<Letter>;

// Shorter words first, then lexicographic on (var, starred).
struct WordLess {
  bool operator()(const Word& a, const Word& b) const;
};

Word adjoint(const Word& w);

// Letter k in [0, 2g): x_{k+1} for k < g, x_{k-g+1}* otherwise.
int slot_of(const Letter& l, int g);
Letter letter_of_slot(int slot, int g);

inline constexpr double kCoefficientZero = 1e-12;

class NcPoly {
 public:
  using Terms = std::map<Word, Matrix, WordLess>;

  NcPoly(int delta = 1, int g = 1);

  static NcPoly constant(const Matrix& value, int g);
  static NcPoly scalar(Complex value, int g, int delta = 1);
  static NcPoly variable(int var, bool starred, int g, int delta = 1);

  int delta() const { return delta_; }
  int g() const { return g_; }
  const Terms& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  // Accumulates into the coefficient of w; drops it if it becomes negligible.
  void add_term(const Word& w, const Matrix& coeff);
  Matrix coefficient(const Word& w) const;
  Matrix constant_term() const { return coefficient({}); }

  NcPoly& operator+=(const NcPoly& q);
  NcPoly& operator-=(const NcPoly& q);

 private:
  int delta_;
  int g_;
  Terms terms_;
};

NcPoly operator+(const NcPoly& p, const NcPoly& q);
NcPoly operator-(const NcPoly& p, const NcPoly& q);
NcPoly operator-(const NcPoly& p);
NcPoly operator*(const NcPoly& p, const NcPoly& q);
NcPoly operator*(Complex alpha, const NcPoly& p);

inline NcPoly add(const NcPoly& p, const NcPoly& q) { return p + q; }
inline NcPoly mul(const NcPoly& p, const NcPoly& q) { return p * q; }
inline NcPoly scale(const NcPoly& p, Complex alpha) { return alpha * p; }

NcPoly adjoint(const NcPoly& p);
int degree(const NcPoly& p);
bool is_hermitian(const NcPoly& p, double tol = kCoefficientZero);
bool is_hereditary(const NcPoly& p);
// Max entrywise difference of coefficients over the union of supports.
double coefficient_distance(const NcPoly& p, const NcPoly& q);
// Scalar polynomial times I_delta.
NcPoly broadcast(const NcPoly& scalar_poly, int delta);
NcPoly with_variable_count(const NcPoly& p, int g);

struct MatrixTuple {
  int n = 0;
  MatrixList X;

  MatrixTuple() = default;
  explicit MatrixTuple(MatrixList mats);
  int g() const { return static_cast<int>(X.size()); }
  static MatrixTuple zero(int g, int n);
  static MatrixTuple random(int g, int n, Rng& rng);
  // X_k for slot k < g and X_k* for slot >= g.
  Matrix slot(int k) const;
};

MatrixTuple direct_sum(const MatrixTuple& a, const MatrixTuple& b);
Matrix word_value(const Word& w, const MatrixTuple& X);
Matrix evaluate(const NcPoly& p, const MatrixTuple& X);

}  // namespace freeconvex
