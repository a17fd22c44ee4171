#pragma once
#include "freeconvex/ncpoly.hpp"
#include "freeconvex/types.hpp"

namespace freeconvex {

// Affine pencil constant + sum_j coeff_x[j] x_j + sum_j coeff_xstar[j] x_j*.
class LinearPencil {
 public:
  LinearPencil() : LinearPencil(Matrix(0, 0), MatrixList(1, Matrix(0, 0)), MatrixList(1, Matrix(0, 0))) {}
  LinearPencil(Matrix constant, MatrixList coeff_x, MatrixList coeff_xstar);

  // I - sum A_j x_j - sum B_j x_j*.
  static LinearPencil monic(const MatrixList& A, const MatrixList& B);
  static LinearPencil hermitian_monic(const MatrixList& A);
  static LinearPencil empty(int g);

  int rows() const { return static_cast<int>(constant_.rows()); }
  int cols() const { return static_cast<int>(constant_.cols()); }
  int g() const { return static_cast<int>(coeff_x_.size()); }
  const Matrix& constant() const { return constant_; }
  const MatrixList& coeff_x() const { return coeff_x_; }
  const MatrixList& coeff_xstar() const { return coeff_xstar_; }
  bool is_monic() const { return monic_; }
  bool is_hermitian_monic() const { return hermitian_; }

  // Monic coefficient conventions: A_j = -coeff_x[j], B_j = -coeff_xstar[j].
  Matrix A(int j) const { return -coeff_x_[j]; }
  Matrix B(int j) const { return -coeff_xstar_[j]; }
  // 2g coefficients A_1..A_g, B_1..B_g of a monic pencil.
  MatrixList slot_matrices() const;
  // Coefficient of slot k (x for k < g, x* otherwise) as stored.
  const Matrix& slot_coefficient(int k) const;

  Matrix evaluate(const MatrixTuple& X) const;
  NcPoly to_polynomial() const;

 private:
  Matrix constant_;
  MatrixList coeff_x_;
  MatrixList coeff_xstar_;
  bool monic_ = false;
  bool hermitian_ = false;
};

LinearPencil adjoint(const LinearPencil& L);
LinearPencil direct_sum(const std::vector<LinearPencil>& parts, int g);
// left * L * right applied coefficientwise.
LinearPencil transform(const Matrix& left, const LinearPencil& L, const Matrix& right);
LinearPencil principal_block(const LinearPencil& L, int offset, int size);
// Replace each B_j by A_j* and symmetrize the constant.
LinearPencil hermitianize(const LinearPencil& L);
double coefficient_scale(const LinearPencil& L);
double max_coefficient_distance(const LinearPencil& a, const LinearPencil& b);

}  // namespace freeconvex
