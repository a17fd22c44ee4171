#include "freeconvex/realization.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include "freeconvex/errors.hpp"
#include "freeconvex/linalg.hpp"

namespace freeconvex {

bool Realization::is_normalized(double tol) const {
  return max_abs(D - Matrix::Identity(delta, delta)) <= tol;
}

namespace {

void check_pair(const Realization& r, const Realization& s) {
  if (r.delta != s.delta || r.g != s.g)
    throw Error(ErrorKind::DimensionMismatch, "realizations differ in output size or variable count");
}

Realization empty_like(int delta, int g, int d) {
  Realization r;
  r.delta = delta;
  r.g = g;
  r.A.assign(2 * g, Matrix::Zero(d, d));
  r.b.assign(2 * g, Matrix::Zero(d, delta));
  r.c = Matrix::Zero(d, delta);
  r.D = Matrix::Zero(delta, delta);
  return r;
}

Realization compress(const Realization& r, const Matrix& Q) {
  Realization out = empty_like(r.delta, r.g, static_cast<int>(Q.cols()));
  for (int k = 0; k < 2 * r.g; ++k) {
    out.A[k] = Q.adjoint() * r.A[k] * Q;
    out.b[k] = Q.adjoint() * r.b[k];
  }
  out.c = Q.adjoint() * r.c;
  out.D = r.D;
  return out;
}

Matrix krylov(const MatrixList& start, const MatrixList& ops, int d, double tol, int max_steps = -1) {
  if (d == 0) return Matrix(0, 0);
  Matrix seed(d, 0);
  for (const auto& m : start) {
    Matrix grown(d, seed.cols() + m.cols());
    grown << seed, m;
    seed = grown;
  }
  double scale = seed.size() ? seed.norm() : 0.0;
  if (scale == 0.0) return Matrix(d, 0);
  Matrix K = range_basis(seed, tol);
  for (int step = 0; max_steps < 0 || step < max_steps; ++step) {
    if (K.cols() == d) break;
    Matrix W(d, K.cols() * (ops.size() + 1));
    W.leftCols(K.cols()) = K;
    for (std::size_t k = 0; k < ops.size(); ++k) W.middleCols(K.cols() * (k + 1), K.cols()) = ops[k] * K;
    Matrix next = range_basis(W, tol);
    if (next.cols() == K.cols()) {
      K = next;
      break;
    }
    K = next;
  }
  return K;
}

}  // namespace

Realization constant_realization(const Matrix& value, int g) {
  Realization r = empty_like(static_cast<int>(value.rows()), g, 0);
  r.D = value;
  return r;
}

Realization slot_realization(int slot, int g) {
  Realization r = empty_like(1, g, 1);
  r.b[slot](0, 0) = 1.0;
  r.c(0, 0) = 1.0;
  return r;
}

Realization realize_polynomial(const NcPoly& p) {
  const int g = p.g();
  const int delta = p.delta();
  // One state block per nonempty suffix of a support word.
  std::map<Word, int, WordLess> index;
  for (const auto& [w, c] : p.terms())
    for (std::size_t k = 0; k < w.size(); ++k) index.emplace(Word(w.begin() + k, w.end()), 0);
  int next = 0;
  for (auto& [w, i] : index) i = next++;
  Realization r = empty_like(delta, g, next * delta);
  const Matrix I = Matrix::Identity(delta, delta);
  for (const auto& [s, i] : index) {
    int first = slot_of(s.front(), g);
    if (s.size() == 1) {
      r.b[first].block(i * delta, 0, delta, delta) = I;
    } else {
      Word tail(s.begin() + 1, s.end());
      r.A[first].block(i * delta, index.at(tail) * delta, delta, delta) = I;
    }
    r.c.block(i * delta, 0, delta, delta) = p.coefficient(s).adjoint();
  }
  r.D = p.constant_term();
  return r;
}

Realization realize_sum(const Realization& r, const Realization& s) {
  check_pair(r, s);
  const int d1 = r.d(), d2 = s.d();
  Realization out = empty_like(r.delta, r.g, d1 + d2);
  for (int k = 0; k < 2 * r.g; ++k) {
    out.A[k].topLeftCorner(d1, d1) = r.A[k];
    out.A[k].bottomRightCorner(d2, d2) = s.A[k];
    out.b[k].topRows(d1) = r.b[k];
    out.b[k].bottomRows(d2) = s.b[k];
  }
  out.c.topRows(d1) = r.c;
  out.c.bottomRows(d2) = s.c;
  out.D = r.D + s.D;
  return out;
}

Realization realize_prod(const Realization& r, const Realization& s) {
  check_pair(r, s);
  const int d1 = r.d(), d2 = s.d();
  Realization out = empty_like(r.delta, r.g, d1 + d2);
  const Matrix C2 = s.C();
  for (int k = 0; k < 2 * r.g; ++k) {
    out.A[k].topLeftCorner(d1, d1) = r.A[k];
    out.A[k].topRightCorner(d1, d2) = r.b[k] * C2;
    out.A[k].bottomRightCorner(d2, d2) = s.A[k];
    out.b[k].topRows(d1) = r.b[k] * s.D;
    out.b[k].bottomRows(d2) = s.b[k];
  }
  out.c.topRows(d1) = r.c;
  out.c.bottomRows(d2) = (r.D * C2).adjoint();
  out.D = r.D * s.D;
  return out;
}

Realization realize_inverse(const Realization& r) {
  Eigen::FullPivLU<Matrix> lu(r.D);
  if (r.delta > 0 && !lu.isInvertible())
    throw Error(ErrorKind::SingularAtOrigin, "value at the origin is singular; inverse is not regular there");
  const Matrix Dinv = r.delta > 0 ? Matrix(lu.inverse()) : Matrix(0, 0);
  const Matrix C = r.C();
  Realization out = empty_like(r.delta, r.g, r.d());
  for (int k = 0; k < 2 * r.g; ++k) {
    out.A[k] = r.A[k] - r.b[k] * Dinv * C;
    out.b[k] = r.b[k] * Dinv;
  }
  out.c = (-Dinv * C).adjoint();
  out.D = Dinv;
  return out;
}

Realization realize_scaled(const Matrix& left, const Realization& r) {
  Realization out = r;
  out.c = (left * r.C()).adjoint();
  out.D = left * r.D;
  return out;
}

Realization realize_block_diag(const Realization& r, const Realization& s) {
  if (r.g != s.g) throw Error(ErrorKind::DimensionMismatch, "variable count mismatch");
  const int d1 = r.d(), d2 = s.d(), e1 = r.delta, e2 = s.delta;
  Realization out = empty_like(e1 + e2, r.g, d1 + d2);
  for (int k = 0; k < 2 * r.g; ++k) {
    out.A[k].topLeftCorner(d1, d1) = r.A[k];
    out.A[k].bottomRightCorner(d2, d2) = s.A[k];
    out.b[k].topLeftCorner(d1, e1) = r.b[k];
    out.b[k].bottomRightCorner(d2, e2) = s.b[k];
  }
  out.c.topLeftCorner(d1, e1) = r.c;
  out.c.bottomRightCorner(d2, e2) = s.c;
  out.D.topLeftCorner(e1, e1) = r.D;
  out.D.bottomRightCorner(e2, e2) = s.D;
  return out;
}

Realization realize_broadcast(const Realization& r, int delta) {
  if (r.delta != 1) throw Error(ErrorKind::DimensionMismatch, "broadcast expects a scalar realization");
  const Matrix I = Matrix::Identity(delta, delta);
  Realization out = empty_like(delta, r.g, r.d() * delta);
  for (int k = 0; k < 2 * r.g; ++k) {
    out.A[k] = kron(r.A[k], I);
    out.b[k] = kron(r.b[k], I);
  }
  out.c = kron(r.c, I);
  out.D = kron(r.D, I);
  return out;
}

Realization normalize(const Realization& r) {
  Eigen::FullPivLU<Matrix> lu(r.D);
  if (!lu.isInvertible())
    throw Error(ErrorKind::SingularAtOrigin, "value at the origin is singular; cannot normalize to I");
  Realization out = realize_scaled(lu.inverse(), r);
  out.D = Matrix::Identity(r.delta, r.delta);
  return out;
}

Matrix controllable_basis(const Realization& r, double tol) { return krylov(r.b, r.A, r.d(), tol); }

Matrix observable_basis(const Realization& r, double tol) {
  MatrixList adj;
  for (const auto& a : r.A) adj.push_back(a.adjoint());
  return krylov({r.c}, adj, r.d(), tol);
}

Realization minimize(const Realization& r, double tol) {
  if (r.d() == 0) return r;
  Realization step = r;
  Matrix Q = controllable_basis(step, tol);
  if (Q.cols() < step.d()) step = compress(step, Q);
  if (step.d() == 0) return step;
  Q = observable_basis(step, tol);
  if (Q.cols() < step.d()) step = compress(step, Q);
  return step;
}

bool is_minimal(const Realization& r, double tol) {
  return controllable_basis(r, tol).cols() == r.d() && observable_basis(r, tol).cols() == r.d();
}

int mcmillan_degree(const Realization& r, double tol) { return minimize(r, tol).d(); }

namespace {

Realization build(const RationalExpr& e, int g, bool star, double tol) {
  using K = RationalExpr::Kind;
  switch (e.kind) {
    case K::Constant: {
      Matrix v(1, 1);
      v(0, 0) = star ? std::conj(e.value) : e.value;
      return constant_realization(v, g);
    }
    case K::Variable: return slot_realization(e.var - 1 + (star ? g : 0), g);
    case K::Adjoint: return build(e.children.front(), g, !star, tol);
    case K::Negate: {
      Realization r = build(e.children.front(), g, star, tol);
      return realize_scaled(-Matrix::Identity(r.delta, r.delta), r);
    }
    case K::Inverse: return minimize(realize_inverse(build(e.children.front(), g, star, tol)), tol);
    case K::Matrix: {
      const int n = e.size;
      Realization acc = constant_realization(Matrix::Zero(n, n), g);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          // The adjoint of a matrix literal transposes the grid.
          const RationalExpr& entry = star ? e.children[j * n + i] : e.children[i * n + j];
          Realization s = build(entry, g, star, tol);
          if (s.delta != 1) throw Error(ErrorKind::DimensionMismatch, "matrix literal entries must be scalar");
          Matrix ei = Matrix::Zero(n, 1), ej = Matrix::Zero(1, n);
          ei(i, 0) = 1.0;
          ej(0, j) = 1.0;
          Realization placed = empty_like(n, g, s.d());
          for (int k = 0; k < 2 * g; ++k) {
            placed.A[k] = s.A[k];
            placed.b[k] = s.b[k] * ej;
          }
          placed.c = (ei * s.C()).adjoint();
          placed.D = ei * s.D * ej;
          acc = minimize(realize_sum(acc, placed), tol);
        }
      return acc;
    }
    case K::Add:
    case K::Mul: {
      std::vector<Realization> parts;
      for (const auto& c : e.children) parts.push_back(build(c, g, star, tol));
      // The adjoint of a product reverses the factor order.
      if (e.kind == K::Mul && star) std::reverse(parts.begin(), parts.end());
      int size = 1;
      for (const auto& p : parts) size = std::max(size, p.delta);
      for (auto& p : parts)
        if (p.delta != size) {
          if (p.delta != 1) throw Error(ErrorKind::DimensionMismatch, "operand sizes do not match");
          p = realize_broadcast(p, size);
        }
      Realization acc = parts.front();
      for (std::size_t k = 1; k < parts.size(); ++k)
        acc = minimize(e.kind == K::Add ? realize_sum(acc, parts[k]) : realize_prod(acc, parts[k]), tol);
      return acc;
    }
  }
  throw Error(ErrorKind::InvalidInput, "unknown expression node");
}

int resolve_g(const RationalExpr& e, int g) {
  const int m = max_variable(e);
  if (g == 0) return std::max(1, m);
  if (g < m) throw Error(ErrorKind::DimensionMismatch, "variable count smaller than largest index");
  return g;
}

}  // namespace

Realization build_realization(const RationalExpr& e, int g, double tol) {
  expression_size(e);
  return minimize(build(e, resolve_g(e, g), false, tol), tol);
}

Realization realize_expression(const RationalExpr& e, int g, double tol) {
  return minimize(normalize(build_realization(e, g, tol)), tol);
}

Realization realize_with_inverse(const RationalExpr& e, int g, double tol) {
  Realization r = normalize(build_realization(e, g, tol));
  Realization inv = minimize(realize_inverse(r), tol);
  return minimize(realize_block_diag(r, inv), tol);
}

SeriesTable series(const Realization& r, int order) {
  SeriesTable table;
  table.emplace(Word{}, r.D);
  if (order < 1) return table;
  const int slots = 2 * r.g;
  const Matrix C = r.C();
  // Depth-first over words, carrying the right-hand state product.
  std::function<void(Word&, const Matrix&)> visit = [&](Word& suffix, const Matrix& state) {
    Matrix coeff = C * state;
    table.emplace(suffix, coeff);
    if (static_cast<int>(suffix.size()) >= order) return;
    for (int k = 0; k < slots; ++k) {
      Word longer;
      longer.reserve(suffix.size() + 1);
      longer.push_back(letter_of_slot(k, r.g));
      longer.insert(longer.end(), suffix.begin(), suffix.end());
      visit(longer, r.A[k] * state);
    }
  };
  for (int k = 0; k < slots; ++k) {
    Word w{letter_of_slot(k, r.g)};
    visit(w, r.b[k]);
  }
  return table;
}

double series_discrepancy(const Realization& r, const Realization& s, int order) {
  check_pair(r, s);
  Realization diff = realize_sum(r, realize_scaled(-Matrix::Identity(s.delta, s.delta), s));
  double worst = max_abs(diff.D);
  if (order < 1 || diff.d() == 0) return worst;
  // States reachable by words of length <= order - 1, weighted by their norms.
  const int d = diff.d();
  Matrix level(d, 0);
  for (const auto& bk : diff.b) {
    Matrix grown(d, level.cols() + bk.cols());
    grown << level, bk;
    level = grown;
  }
  const Matrix C = diff.C();
  const double cscale = std::max(1.0, max_abs(C));
  for (int m = 1; m <= order && level.cols() > 0; ++m) {
    const double lscale = std::max(1.0, max_abs(level));
    worst = std::max(worst, max_abs(C * level) / (cscale * lscale));
    if (m == order) break;
    Matrix next(d, level.cols() * diff.A.size());
    for (std::size_t k = 0; k < diff.A.size(); ++k) next.middleCols(level.cols() * k, level.cols()) = diff.A[k] * level;
    // Keep a scaled basis of the reachable span to stop exponential growth.
    Eigen::JacobiSVD<Matrix> svd(next, Eigen::ComputeThinU);
    const auto& sv = svd.singularValues();
    Eigen::Index rank = 0;
    while (rank < sv.size() && sv(rank) > 1e-14 * std::max(1.0, sv(0))) ++rank;
    level = svd.matrixU().leftCols(rank) * sv.head(rank).asDiagonal();
  }
  return worst;
}

bool equivalent(const Realization& r, const Realization& s, Rng& rng, double tol) {
  check_pair(r, s);
  if (!is_minimal(r, tol) || !is_minimal(s, tol))
    throw Error(ErrorKind::NotMinimal, "equivalence is only decided for minimal realizations");
  if (r.d() != s.d()) return false;
  if (max_abs(r.D - s.D) > std::sqrt(tol) * std::max(1.0, max_abs(r.D))) return false;
  const int d = r.d(), e = r.delta;
  if (d == 0) return true;
  const Matrix I = Matrix::Identity(d, d);
  const Matrix Ie = Matrix::Identity(e, e);
  // Unknown vec(S), column-major.
  const int slots = 2 * r.g;
  Matrix sys = Matrix::Zero(slots * d * d + slots * d * e + e * d, d * d);
  Vector rhs = Vector::Zero(sys.rows());
  int row = 0;
  for (int k = 0; k < slots; ++k) {
    sys.middleRows(row, d * d) = kron(r.A[k].transpose(), I) - kron(I, s.A[k]);
    row += d * d;
  }
  for (int k = 0; k < slots; ++k) {
    sys.middleRows(row, d * e) = kron(Matrix(r.b[k].transpose()), I);
    rhs.segment(row, d * e) = Eigen::Map<const Vector>(s.b[k].data(), d * e);
    row += d * e;
  }
  sys.middleRows(row, e * d) = kron(I, s.C());
  Matrix rc = r.C();
  rhs.segment(row, e * d) = Eigen::Map<const Vector>(rc.data(), e * d);
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(sys);
  Vector x = cod.solve(rhs);
  double scale = std::max(1.0, rhs.cwiseAbs().maxCoeff());
  if ((sys * x - rhs).cwiseAbs().maxCoeff() > std::sqrt(tol) * scale * std::max(1.0, max_abs(sys))) return false;
  Matrix N = null_space(sys, tol);
  for (int attempt = 0; attempt < 5; ++attempt) {
    Vector v = x;
    if (N.cols() > 0) v += N * random_complex(N.cols(), 1, rng);
    Matrix S = Eigen::Map<const Matrix>(v.data(), d, d);
    if (condition_number(S) < 1.0 / tol) return true;
  }
  return false;
}

LinearPencil pencil_of(const Realization& r) {
  const int d = r.d();
  if (d == 0) return LinearPencil::empty(r.g);
  MatrixList A(r.A.begin(), r.A.begin() + r.g), B(r.A.begin() + r.g, r.A.end());
  return LinearPencil::monic(A, B);
}

Matrix evaluate(const Realization& r, const MatrixTuple& X) {
  if (X.g() != r.g) throw Error(ErrorKind::DimensionMismatch, "variable count mismatch");
  const int n = X.n, d = r.d();
  const Matrix In = Matrix::Identity(n, n);
  Matrix out = kron(r.D, In);
  if (d == 0) return out;
  Matrix L = Matrix::Identity(d * n, d * n);
  Matrix B = Matrix::Zero(d * n, r.delta * n);
  for (int k = 0; k < 2 * r.g; ++k) {
    Matrix Xk = X.slot(k);
    L -= kron(r.A[k], Xk);
    B += kron(r.b[k], Xk);
  }
  out += kron(r.C(), In) * L.partialPivLu().solve(B);
  return out;
}

}  // namespace freeconvex
