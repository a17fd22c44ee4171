#include "freeconvex/pencil.hpp"

#include <algorithm>

#include "freeconvex/errors.hpp"
#include "freeconvex/linalg.hpp"

namespace freeconvex {

namespace {
constexpr double kFlagTol = 1e-10;
}

LinearPencil::LinearPencil(Matrix constant, MatrixList coeff_x, MatrixList coeff_xstar)
    : constant_(std::move(constant)), coeff_x_(std::move(coeff_x)), coeff_xstar_(std::move(coeff_xstar)) {
  if (coeff_x_.size() != coeff_xstar_.size())
    throw Error(ErrorKind::DimensionMismatch, "pencil needs as many x* coefficients as x coefficients");
  for (const auto* list : {&coeff_x_, &coeff_xstar_})
    for (const auto& m : *list)
      if (m.rows() != constant_.rows() || m.cols() != constant_.cols())
        throw Error(ErrorKind::DimensionMismatch, "pencil coefficients must share the constant's shape");
  double scale = std::max(1.0, coefficient_scale(*this));
  const double tol = kFlagTol * scale;
  monic_ = constant_.rows() == constant_.cols() &&
           max_abs(constant_ - Matrix::Identity(constant_.rows(), constant_.cols())) <= tol;
  hermitian_ = monic_;
  for (std::size_t j = 0; hermitian_ && j < coeff_x_.size(); ++j)
    hermitian_ = max_abs(coeff_xstar_[j] - coeff_x_[j].adjoint()) <= tol;
}

LinearPencil LinearPencil::monic(const MatrixList& A, const MatrixList& B) {
  if (A.empty() || A.size() != B.size()) throw Error(ErrorKind::DimensionMismatch, "monic pencil needs g >= 1 pairs");
  const auto d = A.front().rows();
  MatrixList cx, cs;
  for (std::size_t j = 0; j < A.size(); ++j) {
    cx.push_back(-A[j]);
    cs.push_back(-B[j]);
  }
  return LinearPencil(Matrix::Identity(d, d), std::move(cx), std::move(cs));
}

LinearPencil LinearPencil::hermitian_monic(const MatrixList& A) {
  MatrixList B;
  for (const auto& a : A) B.push_back(a.adjoint());
  return monic(A, B);
}

LinearPencil LinearPencil::empty(int g) {
  return LinearPencil(Matrix(0, 0), MatrixList(g, Matrix(0, 0)), MatrixList(g, Matrix(0, 0)));
}

MatrixList LinearPencil::slot_matrices() const {
  MatrixList out;
  for (const auto& m : coeff_x_) out.push_back(-m);
  for (const auto& m : coeff_xstar_) out.push_back(-m);
  return out;
}

const Matrix& LinearPencil::slot_coefficient(int k) const {
  return k < g() ? coeff_x_[k] : coeff_xstar_[k - g()];
}

Matrix LinearPencil::evaluate(const MatrixTuple& X) const {
  if (X.g() != g()) throw Error(ErrorKind::DimensionMismatch, "pencil and tuple differ in variable count");
  const int n = X.n;
  Matrix out = kron(constant_, Matrix::Identity(n, n));
  for (int j = 0; j < g(); ++j) {
    out += kron(coeff_x_[j], X.X[j]);
    out += kron(coeff_xstar_[j], X.X[j].adjoint());
  }
  return out;
}

NcPoly LinearPencil::to_polynomial() const {
  if (rows() != cols() || rows() == 0) throw Error(ErrorKind::DimensionMismatch, "only nonempty square pencils convert");
  NcPoly p(rows(), g());
  p.add_term({}, constant_);
  for (int j = 0; j < g(); ++j) {
    p.add_term({Letter{j + 1, false}}, coeff_x_[j]);
    p.add_term({Letter{j + 1, true}}, coeff_xstar_[j]);
  }
  return p;
}

LinearPencil adjoint(const LinearPencil& L) {
  MatrixList cx, cs;
  for (int j = 0; j < L.g(); ++j) {
    cx.push_back(L.coeff_xstar()[j].adjoint());
    cs.push_back(L.coeff_x()[j].adjoint());
  }
  return LinearPencil(L.constant().adjoint(), std::move(cx), std::move(cs));
}

LinearPencil direct_sum(const std::vector<LinearPencil>& parts, int g) {
  int r = 0, c = 0;
  for (const auto& p : parts) {
    if (p.g() != g) throw Error(ErrorKind::DimensionMismatch, "direct sum of pencils with different g");
    r += p.rows();
    c += p.cols();
  }
  Matrix k = Matrix::Zero(r, c);
  MatrixList cx(g, Matrix::Zero(r, c)), cs(g, Matrix::Zero(r, c));
  int ro = 0, co = 0;
  for (const auto& p : parts) {
    k.block(ro, co, p.rows(), p.cols()) = p.constant();
    for (int j = 0; j < g; ++j) {
      cx[j].block(ro, co, p.rows(), p.cols()) = p.coeff_x()[j];
      cs[j].block(ro, co, p.rows(), p.cols()) = p.coeff_xstar()[j];
    }
    ro += p.rows();
    co += p.cols();
  }
  return LinearPencil(std::move(k), std::move(cx), std::move(cs));
}

LinearPencil transform(const Matrix& left, const LinearPencil& L, const Matrix& right) {
  MatrixList cx, cs;
  for (int j = 0; j < L.g(); ++j) {
    cx.push_back(left * L.coeff_x()[j] * right);
    cs.push_back(left * L.coeff_xstar()[j] * right);
  }
  return LinearPencil(left * L.constant() * right, std::move(cx), std::move(cs));
}

LinearPencil principal_block(const LinearPencil& L, int offset, int size) {
  MatrixList cx, cs;
  for (int j = 0; j < L.g(); ++j) {
    cx.push_back(L.coeff_x()[j].block(offset, offset, size, size));
    cs.push_back(L.coeff_xstar()[j].block(offset, offset, size, size));
  }
  return LinearPencil(L.constant().block(offset, offset, size, size), std::move(cx), std::move(cs));
}

LinearPencil hermitianize(const LinearPencil& L) {
  MatrixList cx, cs;
  for (int j = 0; j < L.g(); ++j) {
    Matrix a = 0.5 * (L.coeff_x()[j] + L.coeff_xstar()[j].adjoint());
    cx.push_back(a);
    cs.push_back(a.adjoint());
  }
  return LinearPencil(hermitian_part(L.constant()), std::move(cx), std::move(cs));
}

double coefficient_scale(const LinearPencil& L) {
  double s = max_abs(L.constant());
  for (int j = 0; j < L.g(); ++j) s = std::max({s, max_abs(L.coeff_x()[j]), max_abs(L.coeff_xstar()[j])});
  return s;
}

double max_coefficient_distance(const LinearPencil& a, const LinearPencil& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols() || a.g() != b.g())
    throw Error(ErrorKind::DimensionMismatch, "pencil shapes differ");
  double s = max_abs(a.constant() - b.constant());
  for (int j = 0; j < a.g(); ++j)
    s = std::max({s, max_abs(a.coeff_x()[j] - b.coeff_x()[j]), max_abs(a.coeff_xstar()[j] - b.coeff_xstar()[j])});
  return s;
}

}  // namespace freeconvex
