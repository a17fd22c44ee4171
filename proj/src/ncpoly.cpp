#include "freeconvex/ncpoly.hpp"

#include <algorithm>
#include <string>

#include "freeconvex/errors.hpp"
#include "freeconvex/linalg.hpp"

namespace freeconvex {

bool WordLess::operator()(const Word& a, const Word& b) const {
  if (a.size() != b.size()) return a.size() < b.size();
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

Word adjoint(const Word& w) {
  Word out(w.rbegin(), w.rend());
  for (auto& l : out) l.starred = !l.starred;
  return out;
}

int slot_of(const Letter& l, int g) { return (l.var - 1) + (l.starred ? g : 0); }

Letter letter_of_slot(int slot, int g) {
  return slot < g ? Letter{slot + 1, false} : Letter{slot - g + 1, true};
}

NcPoly::NcPoly(int delta, int g) : delta_(delta), g_(g) {
  if (delta < 1) throw Error(ErrorKind::DimensionMismatch, "polynomial size must be positive");
  if (g < 0) throw Error(ErrorKind::DimensionMismatch, "negative variable count");
}

NcPoly NcPoly::constant(const Matrix& value, int g) {
  if (value.rows() != value.cols())
    throw Error(ErrorKind::DimensionMismatch, "constant coefficient must be square");
  NcPoly p(static_cast<int>(value.rows()), g);
  p.add_term({}, value);
  return p;
}

NcPoly NcPoly::scalar(Complex value, int g, int delta) {
  return constant(value * Matrix::Identity(delta, delta), g);
}

NcPoly NcPoly::variable(int var, bool starred, int g, int delta) {
  if (var < 1 || var > g) throw Error(ErrorKind::DimensionMismatch, "variable index out of range");
  NcPoly p(delta, g);
  p.add_term({Letter{var, starred}}, Matrix::Identity(delta, delta));
  return p;
}

void NcPoly::add_term(const Word& w, const Matrix& coeff) {
  if (coeff.rows() != delta_ || coeff.cols() != delta_)
    throw Error(ErrorKind::DimensionMismatch, "coefficient size does not match polynomial size");
  for (const auto& l : w)
    if (l.var < 1 || l.var > g_)
      throw Error(ErrorKind::DimensionMismatch, "letter x" + std::to_string(l.var) + " outside variable range");
  auto it = terms_.find(w);
  if (it == terms_.end()) {
    if (max_abs(coeff) >= kCoefficientZero) terms_.emplace(w, coeff);
    return;
  }
  it->second += coeff;
  if (max_abs(it->second) < kCoefficientZero) terms_.erase(it);
}

Matrix NcPoly::coefficient(const Word& w) const {
  auto it = terms_.find(w);
  return it == terms_.end() ? Matrix::Zero(delta_, delta_) : it->second;
}

namespace {
void check_compatible(const NcPoly& p, const NcPoly& q) {
  if (p.delta() != q.delta() || p.g() != q.g())
    throw Error(ErrorKind::DimensionMismatch,
                "operands differ in size (" + std::to_string(p.delta()) + " vs " + std::to_string(q.delta()) +
                    ") or variable count (" + std::to_string(p.g()) + " vs " + std::to_string(q.g()) + ")");
}
}  // namespace

NcPoly& NcPoly::operator+=(const NcPoly& q) {
  check_compatible(*this, q);
  for (const auto& [w, c] : q.terms_) add_term(w, c);
  return *this;
}

NcPoly& NcPoly::operator-=(const NcPoly& q) {
  check_compatible(*this, q);
  for (const auto& [w, c] : q.terms_) add_term(w, -c);
  return *this;
}

NcPoly operator+(const NcPoly& p, const NcPoly& q) {
  NcPoly r = p;
  r += q;
  return r;
}

NcPoly operator-(const NcPoly& p, const NcPoly& q) {
  NcPoly r = p;
  r -= q;
  return r;
}

NcPoly operator-(const NcPoly& p) { return Complex(-1.0) * p; }

NcPoly operator*(const NcPoly& p, const NcPoly& q) {
  check_compatible(p, q);
  NcPoly r(p.delta(), p.g());
  for (const auto& [wp, cp] : p.terms())
    for (const auto& [wq, cq] : q.terms()) {
      Word w = wp;
      w.insert(w.end(), wq.begin(), wq.end());
      r.add_term(w, cp * cq);
    }
  return r;
}

NcPoly operator*(Complex alpha, const NcPoly& p) {
  NcPoly r(p.delta(), p.g());
  for (const auto& [w, c] : p.terms()) r.add_term(w, alpha * c);
  return r;
}

NcPoly adjoint(const NcPoly& p) {
  NcPoly r(p.delta(), p.g());
  for (const auto& [w, c] : p.terms()) r.add_term(adjoint(w), c.adjoint());
  return r;
}

int degree(const NcPoly& p) {
  int d = 0;
  for (const auto& [w, c] : p.terms()) d = std::max(d, static_cast<int>(w.size()));
  return d;
}

double coefficient_distance(const NcPoly& p, const NcPoly& q) {
  if (p.delta() != q.delta()) throw Error(ErrorKind::DimensionMismatch, "size mismatch");
  double worst = 0.0;
  for (const auto& [w, c] : p.terms()) worst = std::max(worst, max_abs(c - q.coefficient(w)));
  for (const auto& [w, c] : q.terms())
    if (!p.terms().count(w)) worst = std::max(worst, max_abs(c));
  return worst;
}

bool is_hermitian(const NcPoly& p, double tol) {
  double scale = 1.0;
  for (const auto& [w, c] : p.terms()) scale = std::max(scale, max_abs(c));
  return coefficient_distance(p, adjoint(p)) <= tol * scale;
}

bool is_hereditary(const NcPoly& p) {
  for (const auto& [w, c] : p.terms()) {
    bool seen_plain = false;
    for (const auto& l : w) {
      if (!l.starred) seen_plain = true;
      else if (seen_plain) return false;
    }
  }
  return true;
}

NcPoly broadcast(const NcPoly& s, int delta) {
  if (s.delta() != 1) throw Error(ErrorKind::DimensionMismatch, "broadcast expects a scalar polynomial");
  NcPoly r(delta, s.g());
  for (const auto& [w, c] : s.terms()) r.add_term(w, c(0, 0) * Matrix::Identity(delta, delta));
  return r;
}

NcPoly with_variable_count(const NcPoly& p, int g) {
  NcPoly r(p.delta(), g);
  for (const auto& [w, c] : p.terms()) r.add_term(w, c);
  return r;
}

MatrixTuple::MatrixTuple(MatrixList mats) : X(std::move(mats)) {
  n = X.empty() ? 0 : static_cast<int>(X.front().rows());
  for (const auto& m : X)
    if (m.rows() != n || m.cols() != n)
      throw Error(ErrorKind::DimensionMismatch, "tuple entries must be square of a common size");
}

MatrixTuple MatrixTuple::zero(int g, int n) {
  MatrixTuple t(MatrixList(g, Matrix::Zero(n, n)));
  t.n = n;
  return t;
}

MatrixTuple MatrixTuple::random(int g, int n, Rng& rng) {
  MatrixList mats;
  for (int j = 0; j < g; ++j) mats.push_back(random_complex(n, n, rng));
  MatrixTuple t(std::move(mats));
  t.n = n;
  return t;
}

Matrix MatrixTuple::slot(int k) const {
  const int gg = g();
  return k < gg ? X[k] : Matrix(X[k - gg].adjoint());
}

MatrixTuple direct_sum(const MatrixTuple& a, const MatrixTuple& b) {
  if (a.g() != b.g()) throw Error(ErrorKind::DimensionMismatch, "variable count mismatch");
  MatrixList mats;
  for (int j = 0; j < a.g(); ++j) {
    Matrix m = Matrix::Zero(a.n + b.n, a.n + b.n);
    m.topLeftCorner(a.n, a.n) = a.X[j];
    m.bottomRightCorner(b.n, b.n) = b.X[j];
    mats.push_back(m);
  }
  MatrixTuple t(std::move(mats));
  t.n = a.n + b.n;
  return t;
}

Matrix word_value(const Word& w, const MatrixTuple& X) {
  Matrix m = Matrix::Identity(X.n, X.n);
  for (const auto& l : w) {
    if (l.var < 1 || l.var > X.g()) throw Error(ErrorKind::DimensionMismatch, "letter outside tuple");
    m = l.starred ? Matrix(m * X.X[l.var - 1].adjoint()) : Matrix(m * X.X[l.var - 1]);
  }
  return m;
}

Matrix evaluate(const NcPoly& p, const MatrixTuple& X) {
  if (p.g() != X.g())
    throw Error(ErrorKind::DimensionMismatch, "polynomial has " + std::to_string(p.g()) +
                                                  " variables but the tuple has " + std::to_string(X.g()));
  Matrix out = Matrix::Zero(p.delta() * X.n, p.delta() * X.n);
  for (const auto& [w, c] : p.terms()) out += kron(c, word_value(w, X));
  return out;
}

}  // namespace freeconvex
