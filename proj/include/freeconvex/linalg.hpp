#pragma once
#include "freeconvex/types.hpp"

namespace freeconvex {

Matrix kron(const Matrix& a, const Matrix& b);

// Column basis of range(m): singular values above tol * max(sigma_max, floor).
Matrix range_basis(const Matrix& m, double tol, double floor = 0.0);
// Orthonormal basis of ker(m), same threshold convention.
Matrix null_space(const Matrix& m, double tol, double floor = 0.0);
Matrix orthogonal_complement(const Matrix& q);

int numerical_rank(const Matrix& m, double tol, double floor = 0.0);
// True when some singular value ratio lies in (0.1 tol, 10 tol).
bool rank_is_ambiguous(const Matrix& m, double tol);

double min_eigenvalue(const Matrix& hermitian);
double max_abs(const Matrix& m);
double condition_number(const Matrix& m);
double min_singular_value(const Matrix& m);

Matrix hermitian_part(const Matrix& m);
// f applied to the eigenvalues of a hermitian matrix.
Matrix hermitian_power(const Matrix& m, double exponent, double floor = 0.0);

}  // namespace freeconvex
