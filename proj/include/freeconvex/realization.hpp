#pragma once
#include <map>

#include "freeconvex/ncpoly.hpp"
#include "freeconvex/parser.hpp"
#include "freeconvex/pencil.hpp"
#include "freeconvex/random.hpp"

namespace freeconvex {

// r(z) = D + C (I - sum_k A_k z_k)^{-1} sum_k b_k z_k with C = c^*, over 2g
// slots z_k (k < g: x_{k+1}; k >= g: x_{k-g+1}^*). Normalized when D = I.
struct Realization {
  int delta = 1;
  int g = 1;
  MatrixList A;  // 2g, d x d
  MatrixList b;  // 2g, d x delta
  Matrix c;      // d x delta
  Matrix D;      // delta x delta

  int d() const { return static_cast<int>(c.rows()); }
  Matrix C() const { return c.adjoint(); }
  bool is_normalized(double tol = 1e-12) const;
};

using SeriesTable = std::map<Word, Matrix, WordLess>;

inline constexpr double kRankTol = 1e-8;

Realization constant_realization(const Matrix& value, int g);
Realization slot_realization(int slot, int g);
// Realization of f itself built from its word support (not minimal).
Realization realize_polynomial(const NcPoly& p);

Realization realize_sum(const Realization& r, const Realization& s);
Realization realize_prod(const Realization& r, const Realization& s);
Realization realize_inverse(const Realization& r);
Realization realize_scaled(const Matrix& left, const Realization& r);
Realization realize_block_diag(const Realization& r, const Realization& s);
// Kronecker with I_delta of a scalar realization.
Realization realize_broadcast(const Realization& r, int delta);
// Left-multiply by D^{-1}; throws SingularAtOrigin when D is singular.
Realization normalize(const Realization& r);

Matrix controllable_basis(const Realization& r, double tol = kRankTol);
Matrix observable_basis(const Realization& r, double tol = kRankTol);
Realization minimize(const Realization& r, double tol = kRankTol);
bool is_minimal(const Realization& r, double tol = kRankTol);
int mcmillan_degree(const Realization& r, double tol = kRankTol);

// Value-preserving realization of the tree (D = e(0)); minimized after each step.
Realization build_realization(const RationalExpr& e, int g, double tol = kRankTol);
Realization realize_expression(const RationalExpr& e, int g = 0, double tol = kRankTol);
Realization realize_with_inverse(const RationalExpr& e, int g = 0, double tol = kRankTol);

SeriesTable series(const Realization& r, int order);
// Largest coefficient discrepancy over all words of length <= order, via the
// reachable subspace of the difference realization. Scaled by the input size.
double series_discrepancy(const Realization& r, const Realization& s, int order);

// Finds S with S A_k = A'_k S, S b_k = b'_k, C = C' S; throws NotMinimal.
bool equivalent(const Realization& r, const Realization& s, Rng& rng, double tol = kRankTol);

LinearPencil pencil_of(const Realization& r);
Matrix evaluate(const Realization& r, const MatrixTuple& X);

}  // namespace freeconvex
