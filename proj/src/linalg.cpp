#include "freeconvex/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace freeconvex {

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index j = 0; j < a.cols(); ++j)
    for (Eigen::Index i = 0; i < a.rows(); ++i)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

namespace {
// JacobiSVD throughout: BDCSVD (Eigen 3.4.0) overstates rank on sparse 0/1 Krylov blocks.
struct Svd {
  Eigen::JacobiSVD<Matrix> svd;
  double cutoff;
};

Svd thin_svd(const Matrix& m, double tol, double floor, unsigned opts) {
  Eigen::JacobiSVD<Matrix> svd(m, opts);
  double smax = svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
  return {std::move(svd), tol * std::max(smax, floor)};
}
}  // namespace

int numerical_rank(const Matrix& m, double tol, double floor) {
  if (m.size() == 0) return 0;
  auto s = thin_svd(m, tol, floor, 0);
  const auto& sv = s.svd.singularValues();
  int r = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > s.cutoff && sv(i) > 0.0) ++r;
  return r;
}

bool rank_is_ambiguous(const Matrix& m, double tol) {
  if (m.size() == 0) return false;
  Eigen::JacobiSVD<Matrix> svd(m);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) == 0.0) return false;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    double ratio = sv(i) / sv(0);
    if (ratio > 0.1 * tol && ratio < 10.0 * tol) return true;
  }
  return false;
}

Matrix range_basis(const Matrix& m, double tol, double floor) {
  if (m.rows() == 0) return Matrix(0, 0);
  if (m.cols() == 0) return Matrix(m.rows(), 0);
  auto s = thin_svd(m, tol, floor, Eigen::ComputeThinU);
  const auto& sv = s.svd.singularValues();
  Eigen::Index r = 0;
  while (r < sv.size() && sv(r) > s.cutoff && sv(r) > 0.0) ++r;
  return s.svd.matrixU().leftCols(r);
}

Matrix null_space(const Matrix& m, double tol, double floor) {
  const Eigen::Index n = m.cols();
  if (n == 0) return Matrix(0, 0);
  if (m.rows() == 0) return Matrix::Identity(n, n);
  auto s = thin_svd(m, tol, floor, Eigen::ComputeFullV);
  const auto& sv = s.svd.singularValues();
  Eigen::Index r = 0;
  while (r < sv.size() && sv(r) > s.cutoff && sv(r) > 0.0) ++r;
  return s.svd.matrixV().rightCols(n - r);
}

Matrix orthogonal_complement(const Matrix& q) {
  const Eigen::Index n = q.rows();
  if (q.cols() == 0) return Matrix::Identity(n, n);
  if (q.cols() >= n) return Matrix(n, 0);
  Eigen::HouseholderQR<Matrix> qr(q);
  Matrix full = qr.householderQ() * Matrix::Identity(n, n);
  return full.rightCols(n - q.cols());
}

double min_eigenvalue(const Matrix& h) {
  if (h.rows() == 0) return std::numeric_limits<double>::infinity();
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_part(h), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

double max_abs(const Matrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

double condition_number(const Matrix& m) {
  if (m.size() == 0) return 1.0;
  Eigen::JacobiSVD<Matrix> svd(m);
  const auto& sv = svd.singularValues();
  double lo = sv(sv.size() - 1);
  return lo > 0 ? sv(0) / lo : std::numeric_limits<double>::infinity();
}

double min_singular_value(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(m);
  const auto& sv = svd.singularValues();
  // A wide or tall matrix is rank deficient as a map iff its smallest
  // singular value over min(rows, cols) vanishes.
  return sv(sv.size() - 1);
}

Matrix hermitian_part(const Matrix& m) { return 0.5 * (m + m.adjoint()); }

Matrix hermitian_power(const Matrix& m, double exponent, double floor) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_part(m));
  RealVector ev = es.eigenvalues().cwiseMax(floor);
  Vector powered(ev.size());
  for (Eigen::Index i = 0; i < ev.size(); ++i) powered(i) = std::pow(ev(i), exponent);
  return es.eigenvectors() * powered.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace freeconvex
