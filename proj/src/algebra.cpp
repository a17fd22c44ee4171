#include "freeconvex/algebra.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "freeconvex/errors.hpp"
#include "freeconvex/linalg.hpp"

namespace freeconvex {

namespace {

Vector vec(const Matrix& m) { return Eigen::Map<const Vector>(m.data(), m.size()); }

Matrix unvec(const Vector& v, int d) { return Eigen::Map<const Matrix>(v.data(), d, d); }

double generator_scale(const MatrixList& mats) {
  double s = 1.0;
  for (const auto& m : mats) s = std::max(s, m.norm());
  return s;
}

}  // namespace

AlgebraBasis generated_algebra(const MatrixList& mats, double tol) {
  if (mats.empty()) throw Error(ErrorKind::DimensionMismatch, "generated_algebra needs at least one matrix");
  const int d = static_cast<int>(mats.front().rows());
  for (const auto& m : mats)
    if (m.rows() != d || m.cols() != d) throw Error(ErrorKind::DimensionMismatch, "generators must share one size");
  AlgebraBasis out;
  out.d = d;
  if (d == 0) return out;
  const double cutoff = tol * generator_scale(mats);
  Matrix basis(d * d, 0);
  // New directions of a candidate batch: SVD of the part orthogonal to the basis, so
  // well-separated directions are taken first and near-dependent ones are not amplified.
  auto extend = [&](const Matrix& cand) {
    Matrix r = cand;
    for (int pass = 0; pass < 2 && basis.cols() > 0; ++pass) r -= basis * (basis.adjoint() * r);
    Eigen::JacobiSVD<Matrix> svd(r, Eigen::ComputeThinU);
    const auto& sv = svd.singularValues();
    Eigen::Index k = 0;
    while (k < sv.size() && sv(k) > cutoff && basis.cols() + k < d * d) ++k;
    const Matrix fresh = svd.matrixU().leftCols(k);
    Matrix grown(d * d, basis.cols() + k);
    grown << basis, fresh;
    basis = grown;
    return fresh;
  };
  Matrix seed(d * d, 1 + static_cast<Eigen::Index>(mats.size()));
  seed.col(0) = vec(Matrix::Identity(d, d)) / std::sqrt(double(d));
  for (std::size_t k = 0; k < mats.size(); ++k) seed.col(static_cast<Eigen::Index>(k) + 1) = vec(mats[k]);
  Matrix frontier = extend(seed);
  // Words grow one letter at a time until the span stops growing.
  while (frontier.cols() > 0 && basis.cols() < d * d) {
    Matrix cand(d * d, frontier.cols() * static_cast<Eigen::Index>(mats.size()));
    for (Eigen::Index i = 0; i < frontier.cols(); ++i)
      for (std::size_t k = 0; k < mats.size(); ++k)
        cand.col(i * static_cast<Eigen::Index>(mats.size()) + static_cast<Eigen::Index>(k)) = vec(mats[k] * unvec(frontier.col(i), d));
    frontier = extend(cand);
  }
  for (Eigen::Index i = 0; i < basis.cols(); ++i) out.basis.push_back(unvec(basis.col(i), d));
  return out;
}

double closure_residual(const AlgebraBasis& alg) {
  const int n = alg.dimension();
  if (n == 0) return 0.0;
  Matrix V(alg.d * alg.d, n);
  for (int i = 0; i < n; ++i) V.col(i) = vec(alg.basis[i]);
  double worst = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      Vector p = vec(alg.basis[i] * alg.basis[j]);
      worst = std::max(worst, (p - V * (V.adjoint() * p)).norm());
    }
  return worst;
}

MatrixList radical(const AlgebraBasis& alg, double tol) {
  const int n = alg.dimension();
  MatrixList out;
  if (n == 0) return out;
  Matrix T(n, n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) T(a, b) = (alg.basis[a] * alg.basis[b]).trace();
  // Near-dependent span directions carry amplified roundoff, so small singular values of T
  // can straddle tol. A decisive gap (four decades, below sqrt(tol)) still fixes the rank.
  Eigen::JacobiSVD<Matrix> svd(T.transpose(), Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  Eigen::Index rank = 0;
  while (rank < sv.size() && sv(rank) > tol * sv(0)) ++rank;
  if (rank_is_ambiguous(T, tol)) {
    Eigen::Index cut = -1;
    double best = 0.0;
    for (Eigen::Index i = 0; i + 1 < sv.size(); ++i) {
      const double ratio = sv(i) / std::max(sv(i + 1), 1e-300 * sv(0));
      if (ratio > best) best = ratio, cut = i + 1;
    }
    if (cut < 0 || best < 1e4 || sv(cut) > std::sqrt(tol) * sv(0))
      throw Error(ErrorKind::NumericalRankAmbiguity, "trace form rank is ambiguous at tolerance " + std::to_string(tol));
    rank = cut;
  }
  const Matrix N = svd.matrixV().rightCols(n - rank);
  for (int k = 0; k < N.cols(); ++k) {
    Matrix r = Matrix::Zero(alg.d, alg.d);
    for (int a = 0; a < n; ++a) r += N(a, k) * alg.basis[a];
    out.push_back(r / std::max(r.norm(), 1e-300));
  }
  return out;
}

bool is_irreducible(const LinearPencil& L, double tol) {
  if (!L.is_monic()) throw Error(ErrorKind::InvalidInput, "irreducibility is defined for monic pencils");
  const int d = L.rows();
  if (d == 0) return false;
  return generated_algebra(L.slot_matrices(), tol).dimension() == d * d;
}

namespace {

bool all_zero(const MatrixList& mats, double tol) {
  for (const auto& m : mats)
    if (max_abs(m) > tol) return false;
  return true;
}

MatrixList compress_all(const MatrixList& mats, const Matrix& Q) {
  MatrixList out;
  for (const auto& m : mats) out.push_back(Q.adjoint() * m * Q);
  return out;
}

// Newton steps for an approximate invariant subspace: with P spanning W^perp, solve
// P*GP X - X W*GW = -P*GW over all G in the least-squares sense and move W to W + P X.
// Needed when eigenvalues repeat and the seed vector is only accurate to sqrt(eps).
Matrix refine_invariant(const MatrixList& gens, Matrix W, double scale) {
  const int d = static_cast<int>(W.rows()), w = static_cast<int>(W.cols()), m = d - w;
  if (w == 0 || m == 0) return W;
  auto leak = [&](const Matrix& B) {
    const Matrix P = orthogonal_complement(B);
    double r = 0.0;
    for (const auto& g : gens) r = std::max(r, (P.adjoint() * g * B).norm());
    return r;
  };
  double residual = leak(W);
  const Matrix Iw = Matrix::Identity(w, w), Im = Matrix::Identity(m, m);
  for (int it = 0; it < 4 && residual > 1e-13 * scale; ++it) {
    const Matrix P = orthogonal_complement(W);
    Matrix sys(static_cast<Eigen::Index>(gens.size()) * m * w, m * w);
    Vector rhs(sys.rows());
    for (std::size_t k = 0; k < gens.size(); ++k) {
      const Matrix R = P.adjoint() * gens[k] * W;
      const auto rows = static_cast<Eigen::Index>(k) * m * w;
      sys.middleRows(rows, m * w) = kron(Iw, P.adjoint() * gens[k] * P) - kron((W.adjoint() * gens[k] * W).transpose(), Im);
      rhs.segment(rows, m * w) = -Eigen::Map<const Vector>(R.data(), R.size());
    }
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(sys);
    cod.setThreshold(1e-8);
    const Vector x = cod.solve(rhs);
    Eigen::HouseholderQR<Matrix> qr(W + P * Eigen::Map<const Matrix>(x.data(), m, w));
    const Matrix next = qr.householderQ() * Matrix::Identity(d, w);
    const double r = leak(next);
    if (!(r < residual)) break;
    W = next;
    residual = r;
  }
  return W;
}

// Orthonormal basis of a simple submodule of C^d under the algebra of gens.
Matrix simple_submodule(const MatrixList& gens, int d, Rng& rng, double tol) {
  if (d == 1) return Matrix::Identity(1, 1);
  const double scale = std::max(1.0, generator_scale(gens));
  if (all_zero(gens, tol * scale)) {
    Matrix e = Matrix::Zero(d, 1);
    e(0, 0) = 1.0;
    return e;
  }
  AlgebraBasis alg = generated_algebra(gens, tol);
  if (alg.dimension() == d * d) return Matrix::Identity(d, d);
  // Simple submodules are annihilated by the radical.
  MatrixList rad = radical(alg, tol);
  Matrix N = Matrix::Identity(d, d);
  if (!rad.empty()) {
    Matrix stacked(d * rad.size(), d);
    for (std::size_t k = 0; k < rad.size(); ++k) stacked.middleRows(k * d, d) = rad[k];
    N = null_space(stacked, tol, 1.0);
    // Noisy radical elements can hide the annihilator at tol; the checks below guard the looser cut.
    if (N.cols() == 0) N = null_space(stacked, std::sqrt(tol), 1.0);
    if (N.cols() == 0) throw Error(ErrorKind::NumericalRankAmbiguity, "radical annihilator is empty");
  }
  for (int attempt = 0; attempt < 20; ++attempt) {
    Matrix a = Matrix::Zero(d, d);
    for (const auto& b : alg.basis) a += Complex(uniform(rng), uniform(rng)) * b;
    Matrix restricted = N.adjoint() * a * N;
    Eigen::ComplexEigenSolver<Matrix> es(restricted);
    const Vector& ev = es.eigenvalues();
    // Eigenvalue farthest from the others.
    int best = 0;
    double best_gap = -1.0;
    for (int i = 0; i < ev.size(); ++i) {
      double gap = std::numeric_limits<double>::infinity();
      for (int j = 0; j < ev.size(); ++j)
        if (j != i) gap = std::min(gap, std::abs(ev(i) - ev(j)));
      if (gap > best_gap) best_gap = gap, best = i;
    }
    Vector e = N * es.eigenvectors().col(best);
    e.normalize();
    // Orbit of e as a Krylov closure under the generators; products with the computed
    // algebra basis would carry that basis's roundoff into the orbit.
    Matrix W = e;
    while (W.cols() < d) {
      Matrix grown(d, W.cols() * static_cast<Eigen::Index>(gens.size() + 1));
      grown.leftCols(W.cols()) = W;
      for (std::size_t k = 0; k < gens.size(); ++k)
        grown.middleCols(W.cols() * static_cast<Eigen::Index>(k + 1), W.cols()) = gens[k] * W / scale;
      Matrix next = range_basis(grown, tol);
      if (next.cols() == W.cols()) break;
      W = next;
    }
    if (W.cols() == 0 || W.cols() == d) continue;
    W = refine_invariant(gens, W, scale);
    // Invariance and irreducibility of the restriction.
    bool invariant = true;
    for (const auto& g : gens)
      if ((g * W - W * (W.adjoint() * g * W)).norm() > std::sqrt(tol) * scale) invariant = false;
    if (!invariant) continue;
    const int w = static_cast<int>(W.cols());
    if (generated_algebra(compress_all(gens, W), tol).dimension() != w * w) continue;
    return W;
  }
  throw Error(ErrorKind::NumericalRankAmbiguity, "could not isolate a simple submodule after 20 attempts");
}

}  // namespace

double triangularity_residual(const LinearPencil& T, const std::vector<DiagonalBlock>& blocks) {
  double worst = 0.0;
  for (std::size_t bi = 0; bi < blocks.size(); ++bi)
    for (std::size_t bj = 0; bj < bi; ++bj) {
      const auto& r = blocks[bi];
      const auto& c = blocks[bj];
      for (int k = 0; k < 2 * T.g(); ++k)
        worst = std::max(worst, max_abs(T.slot_coefficient(k).block(r.offset, c.offset, r.size, c.size)));
    }
  return worst;
}

BlockDecomposition burnside_decompose(const LinearPencil& L, Rng& rng, double tol) {
  if (!L.is_monic()) throw Error(ErrorKind::InvalidInput, "burnside_decompose expects a monic pencil");
  const int d = L.rows();
  BlockDecomposition out;
  const MatrixList gens = L.slot_matrices();
  const double scale = std::max(1.0, generator_scale(gens));
  Matrix Q = Matrix::Identity(d, d);
  std::vector<int> sizes;
  // Peel simple submodules off the successive quotients.
  Matrix remaining = Matrix::Identity(d, d);  // orthonormal basis of the current quotient
  Matrix flag(d, 0);
  while (remaining.cols() > 0) {
    const int m = static_cast<int>(remaining.cols());
    MatrixList local = compress_all(gens, remaining);
    Matrix W = simple_submodule(local, m, rng, tol);
    Matrix Wfull = remaining * W;
    Matrix grown(d, flag.cols() + Wfull.cols());
    grown << flag, Wfull;
    flag = grown;
    sizes.push_back(static_cast<int>(W.cols()));
    remaining = remaining * orthogonal_complement(W);
  }
  Q = flag;
  out.S = Q.adjoint();
  out.S_inv = Q;
  out.transformed = transform(out.S, L, out.S_inv);
  int offset = 0;
  for (int s : sizes) {
    DiagonalBlock blk;
    blk.offset = offset;
    blk.size = s;
    blk.pencil = principal_block(out.transformed, offset, s);
    blk.kind = (s == 1 && all_zero(blk.pencil.slot_matrices(), std::sqrt(tol) * scale)) ? BlockKind::Identity
                                                                                          : BlockKind::Irreducible;
    out.blocks.push_back(std::move(blk));
    offset += s;
  }
  out.triangularity_residual = triangularity_residual(out.transformed, out.blocks);
  return out;
}

std::optional<Matrix> similar(const LinearPencil& L1, const LinearPencil& L2, Rng& rng, double tol) {
  if (L1.rows() != L2.rows() || L1.g() != L2.g()) return std::nullopt;
  const int d = L1.rows();
  if (d == 0) return Matrix(0, 0);
  if (max_abs(L1.constant() - L2.constant()) > std::sqrt(tol)) return std::nullopt;
  const MatrixList a1 = L1.slot_matrices(), a2 = L2.slot_matrices();
  const Matrix I = Matrix::Identity(d, d);
  Matrix sys(d * d * a1.size(), d * d);
  for (std::size_t k = 0; k < a1.size(); ++k)
    sys.middleRows(k * d * d, d * d) = kron(a1[k].transpose(), I) - kron(I, a2[k]);
  const double scale = std::max(1.0, max_abs(sys));
  Matrix N = null_space(sys, tol, scale);
  if (N.cols() == 0) return std::nullopt;
  for (int attempt = 0; attempt < 5; ++attempt) {
    Vector c = random_complex(N.cols(), 1, rng);
    Vector v = N * c;
    Matrix P = unvec(v, d);
    Eigen::JacobiSVD<Matrix> svd(P);
    const auto& sv = svd.singularValues();
    if (sv(sv.size() - 1) > std::sqrt(tol) * sv(0)) return P / sv(0);
  }
  return std::nullopt;
}

std::vector<SimilarityClass> similarity_classes(const std::vector<LinearPencil>& blocks, Rng& rng, double tol) {
  std::vector<SimilarityClass> classes;
  for (int i = 0; i < static_cast<int>(blocks.size()); ++i) {
    bool placed = false;
    for (auto& cls : classes) {
      const auto& rep = blocks[cls.representative];
      if (rep.rows() != blocks[i].rows()) continue;
      if (auto P = similar(rep, blocks[i], rng, tol)) {
        cls.members.push_back(i);
        cls.transforms.push_back(*P);
        placed = true;
        break;
      }
    }
    if (!placed) {
      SimilarityClass cls;
      cls.representative = i;
      cls.members.push_back(i);
      cls.transforms.push_back(Matrix::Identity(blocks[i].rows(), blocks[i].rows()));
      classes.push_back(std::move(cls));
    }
  }
  return classes;
}

}  // namespace freeconvex
