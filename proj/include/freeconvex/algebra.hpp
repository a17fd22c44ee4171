#pragma once
#include <optional>
#include <vector>

#include "freeconvex/pencil.hpp"
#include "freeconvex/random.hpp"

namespace freeconvex {

inline constexpr double kAlgebraTol = 1e-8;

struct AlgebraBasis {
  int d = 0;
  MatrixList basis;  // Frobenius-orthonormal

  int dimension() const { return static_cast<int>(basis.size()); }
};

// Unital algebra generated by mats (closure under left multiplication).
AlgebraBasis generated_algebra(const MatrixList& mats, double tol = kAlgebraTol);
// Radical of the algebra via the trace form tr(ab).
MatrixList radical(const AlgebraBasis& alg, double tol = kAlgebraTol);
// Largest deviation of basis products from the span.
double closure_residual(const AlgebraBasis& alg);

bool is_irreducible(const LinearPencil& L, double tol = kAlgebraTol);

enum class BlockKind { Irreducible, Identity };

struct DiagonalBlock {
  int offset = 0;
  int size = 0;
  BlockKind kind = BlockKind::Irreducible;
  LinearPencil pencil;
};

struct BlockDecomposition {
  Matrix S;      // S L S^{-1} is block upper triangular
  Matrix S_inv;
  std::vector<DiagonalBlock> blocks;
  LinearPencil transformed;
  double triangularity_residual = 0.0;
};

BlockDecomposition burnside_decompose(const LinearPencil& L, Rng& rng, double tol = kAlgebraTol);
double triangularity_residual(const LinearPencil& transformed, const std::vector<DiagonalBlock>& blocks);

// Invertible P with P A_k(L1) = A_k(L2) P for all 2g coefficients.
std::optional<Matrix> similar(const LinearPencil& L1, const LinearPencil& L2, Rng& rng, double tol = kAlgebraTol);

struct SimilarityClass {
  int representative = 0;
  std::vector<int> members;  // includes the representative
  std::vector<Matrix> transforms;  // P with P rep = member P, parallel to members
};

std::vector<SimilarityClass> similarity_classes(const std::vector<LinearPencil>& blocks, Rng& rng,
                                                double tol = kAlgebraTol);

}  // namespace freeconvex
