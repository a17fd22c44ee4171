#include "freeconvex/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <cstdio>
#include <cstdlib>
#include <map>

#include "freeconvex/errors.hpp"
#include "freeconvex/linalg.hpp"

namespace freeconvex {

// ---------------------------------------------------------------- expressions

LinearExpr& LinearExpr::operator+=(const LinearExpr& o) {
  terms.insert(terms.end(), o.terms.begin(), o.terms.end());
  constant += o.constant;
  return *this;
}

LinearExpr& LinearExpr::operator-=(const LinearExpr& o) {
  for (const auto& [p, c] : o.terms) terms.emplace_back(p, -c);
  constant -= o.constant;
  return *this;
}

LinearExpr& LinearExpr::operator*=(Complex s) {
  for (auto& t : terms) t.second *= s;
  constant *= s;
  return *this;
}

void LinearExpr::compact() {
  std::sort(terms.begin(), terms.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<std::pair<int, Complex>> out;
  std::vector<double> mass;  // sum of magnitudes merged into each term
  for (const auto& t : terms) {
    if (!out.empty() && out.back().first == t.first) {
      out.back().second += t.second;
      mass.back() += std::abs(t.second);
    } else {
      out.push_back(t);
      mass.push_back(std::abs(t.second));
    }
  }
  // Cancellation down to roundoff counts as an exact zero.
  std::vector<std::pair<int, Complex>> kept;
  for (std::size_t i = 0; i < out.size(); ++i)
    if (std::abs(out[i].second) > 1e-14 * mass[i]) kept.push_back(out[i]);
  terms = std::move(kept);
}

LinearExpr operator+(LinearExpr a, const LinearExpr& b) { return a += b; }
LinearExpr operator-(LinearExpr a, const LinearExpr& b) { return a -= b; }
LinearExpr operator*(Complex s, LinearExpr a) { return a *= s; }

LinearExpr conj(const LinearExpr& e) {
  LinearExpr out = e;
  for (auto& t : out.terms) t.second = std::conj(t.second);
  out.constant = std::conj(out.constant);
  return out;
}

ExprMatrix expr_zero(int rows, int cols) {
  return ExprMatrix(static_cast<std::size_t>(rows), std::vector<LinearExpr>(static_cast<std::size_t>(cols)));
}

namespace {
int expr_rows(const ExprMatrix& e) { return static_cast<int>(e.size()); }
int expr_cols(const ExprMatrix& e) { return e.empty() ? 0 : static_cast<int>(e[0].size()); }

void compact_all(ExprMatrix& e) {
  for (auto& row : e)
    for (auto& x : row) x.compact();
}
}  // namespace

ExprMatrix mul(const Matrix& a, const ExprMatrix& e) {
  if (a.cols() != expr_rows(e)) throw Error(ErrorKind::DimensionMismatch, "mul: inner dimensions differ");
  ExprMatrix out = expr_zero(static_cast<int>(a.rows()), expr_cols(e));
  for (int i = 0; i < a.rows(); ++i)
    for (int k = 0; k < a.cols(); ++k) {
      if (a(i, k) == Complex(0.0, 0.0)) continue;
      for (int j = 0; j < expr_cols(e); ++j) out[i][j] += a(i, k) * e[k][j];
    }
  compact_all(out);
  return out;
}

ExprMatrix mul(const ExprMatrix& e, const Matrix& a) {
  if (expr_cols(e) != a.rows()) throw Error(ErrorKind::DimensionMismatch, "mul: inner dimensions differ");
  ExprMatrix out = expr_zero(expr_rows(e), static_cast<int>(a.cols()));
  for (int i = 0; i < expr_rows(e); ++i)
    for (int k = 0; k < a.rows(); ++k)
      for (int j = 0; j < a.cols(); ++j) {
        if (a(k, j) == Complex(0.0, 0.0)) continue;
        out[i][j] += a(k, j) * e[i][k];
      }
  compact_all(out);
  return out;
}

ExprMatrix adjoint(const ExprMatrix& e) {
  ExprMatrix out = expr_zero(expr_cols(e), expr_rows(e));
  for (int i = 0; i < expr_rows(e); ++i)
    for (int j = 0; j < expr_cols(e); ++j) out[j][i] = conj(e[i][j]);
  return out;
}

ExprMatrix add(const ExprMatrix& a, const ExprMatrix& b) {
  if (expr_rows(a) != expr_rows(b) || expr_cols(a) != expr_cols(b))
    throw Error(ErrorKind::DimensionMismatch, "add: shapes differ");
  ExprMatrix out = a;
  for (int i = 0; i < expr_rows(a); ++i)
    for (int j = 0; j < expr_cols(a); ++j) {
      out[i][j] += b[i][j];
      out[i][j].compact();
    }
  return out;
}

ExprMatrix scale(const ExprMatrix& a, Complex s) {
  ExprMatrix out = a;
  for (auto& row : out)
    for (auto& x : row) x *= s;
  return out;
}

// ---------------------------------------------------------------- problem

namespace {
int upper_index(int n, int a, int b) {
  // position of (a,b), a<b, in row-major enumeration of the strict upper triangle
  return a * n - a * (a + 1) / 2 + (b - a - 1);
}
}  // namespace

int SdpProblem::add_psd_block(int n, std::string name) {
  if (n < 0) throw Error(ErrorKind::InvalidInput, "negative block size");
  blocks_.push_back(Block{std::move(name), true, n, n, num_params_});
  num_params_ += n * n;
  objective_.resize(static_cast<std::size_t>(num_params_), 0.0);
  return static_cast<int>(blocks_.size()) - 1;
}

int SdpProblem::add_free_block(int rows, int cols, std::string name) {
  if (rows < 0 || cols < 0) throw Error(ErrorKind::InvalidInput, "negative block size");
  blocks_.push_back(Block{std::move(name), false, rows, cols, num_params_});
  num_params_ += 2 * rows * cols;
  objective_.resize(static_cast<std::size_t>(num_params_), 0.0);
  return static_cast<int>(blocks_.size()) - 1;
}

LinearExpr SdpProblem::entry(int block, int r, int c) const {
  const Block& b = blocks_.at(static_cast<std::size_t>(block));
  if (r < 0 || c < 0 || r >= b.rows || c >= b.cols) throw Error(ErrorKind::DimensionMismatch, "entry out of range");
  LinearExpr e;
  const Complex I(0.0, 1.0);
  if (b.psd) {
    const int n = b.rows;
    if (r == c) {
      e.terms.emplace_back(b.offset + r, 1.0);
    } else {
      const int lo = std::min(r, c), hi = std::max(r, c);
      const int k = upper_index(n, lo, hi);
      e.terms.emplace_back(b.offset + n + 2 * k, 1.0);
      e.terms.emplace_back(b.offset + n + 2 * k + 1, r < c ? I : -I);
    }
  } else {
    const int k = r * b.cols + c;
    e.terms.emplace_back(b.offset + 2 * k, 1.0);
    e.terms.emplace_back(b.offset + 2 * k + 1, I);
  }
  return e;
}

ExprMatrix SdpProblem::matrix(int block) const {
  const Block& b = blocks_.at(static_cast<std::size_t>(block));
  ExprMatrix out = expr_zero(b.rows, b.cols);
  for (int r = 0; r < b.rows; ++r)
    for (int c = 0; c < b.cols; ++c) out[r][c] = entry(block, r, c);
  return out;
}

void SdpProblem::add_equality(const LinearExpr& expr, Complex rhs, Part part, const std::string& label) {
  LinearExpr e = expr;
  e.compact();
  const Complex target = rhs - e.constant;
  for (const auto& [p, c] : e.terms)
    if (p < 0 || p >= num_params_) throw Error(ErrorKind::DimensionMismatch, "equality references unknown parameter");
  auto emit = [&](bool real) {
    Row row;
    for (const auto& [p, c] : e.terms) {
      const double v = real ? c.real() : c.imag();
      if (std::abs(v) > 1e-14 * std::abs(c)) row.coeffs.emplace_back(p, v);
    }
    row.rhs = real ? target.real() : target.imag();
    if (!std::isfinite(row.rhs)) throw Error(ErrorKind::InvalidInput, "non-finite constraint data");
    if (row.coeffs.empty() && row.rhs == 0.0) return;
    row.label = label.empty() ? "" : label + (real ? ".re" : ".im");
    rows_.push_back(std::move(row));
  };
  if (part != Part::Imag) emit(true);
  if (part != Part::Real) emit(false);
}

void SdpProblem::add_matrix_equality(const ExprMatrix& lhs, const Matrix& rhs, bool hermitian,
                                     const std::string& label) {
  if (expr_rows(lhs) != rhs.rows() || expr_cols(lhs) != rhs.cols())
    throw Error(ErrorKind::DimensionMismatch, "matrix equality: shapes differ");
  for (int i = 0; i < rhs.rows(); ++i)
    for (int j = 0; j < rhs.cols(); ++j) {
      if (hermitian && j < i) continue;
      const std::string tag = label.empty() ? "" : label + "[" + std::to_string(i) + "," + std::to_string(j) + "]";
      add_equality(lhs[i][j], rhs(i, j), hermitian && i == j ? Part::Real : Part::Both, tag);
    }
}

void SdpProblem::set_objective(const LinearExpr& expr) {
  std::fill(objective_.begin(), objective_.end(), 0.0);
  for (const auto& [p, c] : expr.terms) objective_.at(static_cast<std::size_t>(p)) += c.real();
  has_objective_ = true;
}

MatrixList SdpProblem::unpack(const RealVector& params) const {
  if (params.size() != num_params_) throw Error(ErrorKind::DimensionMismatch, "parameter vector size");
  MatrixList out;
  for (const Block& b : blocks_) {
    Matrix m(b.rows, b.cols);
    if (b.psd) {
      const int n = b.rows;
      for (int a = 0; a < n; ++a) m(a, a) = params(b.offset + a);
      for (int a = 0; a < n; ++a)
        for (int c = a + 1; c < n; ++c) {
          const int k = upper_index(n, a, c);
          const Complex v(params(b.offset + n + 2 * k), params(b.offset + n + 2 * k + 1));
          m(a, c) = v;
          m(c, a) = std::conj(v);
        }
    } else {
      for (int r = 0; r < b.rows; ++r)
        for (int c = 0; c < b.cols; ++c) {
          const int k = r * b.cols + c;
          m(r, c) = Complex(params(b.offset + 2 * k), params(b.offset + 2 * k + 1));
        }
    }
    out.push_back(std::move(m));
  }
  return out;
}

RealVector SdpProblem::pack(const MatrixList& values) const {
  if (values.size() != blocks_.size()) throw Error(ErrorKind::DimensionMismatch, "block count");
  RealVector p = RealVector::Zero(num_params_);
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    const Block& b = blocks_[i];
    const Matrix& m = values[i];
    if (m.rows() != b.rows || m.cols() != b.cols) throw Error(ErrorKind::DimensionMismatch, "block shape");
    if (b.psd) {
      const int n = b.rows;
      for (int a = 0; a < n; ++a) p(b.offset + a) = m(a, a).real();
      for (int a = 0; a < n; ++a)
        for (int c = a + 1; c < n; ++c) {
          const int k = upper_index(n, a, c);
          const Complex v = 0.5 * (m(a, c) + std::conj(m(c, a)));
          p(b.offset + n + 2 * k) = v.real();
          p(b.offset + n + 2 * k + 1) = v.imag();
        }
    } else {
      for (int r = 0; r < b.rows; ++r)
        for (int c = 0; c < b.cols; ++c) {
          const int k = r * b.cols + c;
          p(b.offset + 2 * k) = m(r, c).real();
          p(b.offset + 2 * k + 1) = m(r, c).imag();
        }
    }
  }
  return p;
}

const char* status_name(SdpStatus s) {
  switch (s) {
    case SdpStatus::Feasible: return "feasible";
    case SdpStatus::Infeasible: return "infeasible";
    case SdpStatus::Marginal: return "marginal";
  }
  return "marginal";
}

// ---------------------------------------------------------------- interior point core

namespace {

struct Entry {
  int r, c;
  double v;
};
using Sparse = std::vector<Entry>;  // both triangles listed

struct StdSdp {
  std::vector<int> sizes;
  std::vector<std::vector<std::pair<int, Sparse>>> A;  // per row: (block, entries)
  RealMatrix F;                                        // m x nv
  RealVector b;
  std::vector<Sparse> C;
  RealVector cv;
};

struct IpmState {
  std::vector<RealMatrix> X, S;
  RealVector y, v;
  int iterations = 0;
  double pinf = 0, dinf = 0, gap = 0, pobj = 0, dobj = 0;
  bool converged = false;
};

double sparse_dot(const Sparse& a, const RealMatrix& X) {
  double s = 0.0;
  for (const Entry& e : a) s += e.v * X(e.r, e.c);
  return s;
}

void sparse_axpy(RealMatrix& out, const Sparse& a, double s) {
  for (const Entry& e : a) out(e.r, e.c) += s * e.v;
}

RealMatrix sym(const RealMatrix& m) { return 0.5 * (m + m.transpose()); }

// Largest alpha with X + alpha D PSD (infinity when unbounded).
double max_step(const RealMatrix& X, const RealMatrix& D) {
  if (X.rows() == 0) return std::numeric_limits<double>::infinity();
  Eigen::LLT<RealMatrix> llt(X);
  if (llt.info() != Eigen::Success) return 0.0;
  const RealMatrix L = llt.matrixL();
  RealMatrix t = L.triangularView<Eigen::Lower>().solve(D);
  t = L.triangularView<Eigen::Lower>().solve(t.transpose().eval()).transpose().eval();
  Eigen::SelfAdjointEigenSolver<RealMatrix> es(sym(t), Eigen::EigenvaluesOnly);
  const double lmin = es.eigenvalues().minCoeff();
  if (lmin >= 0.0) return std::numeric_limits<double>::infinity();
  return -1.0 / lmin;
}

class Ipm {
 public:
  Ipm(const StdSdp& p, int max_iter, double eps) : p_(p), max_iter_(max_iter), eps_(eps) {
    m_ = static_cast<int>(p.b.size());
    nb_ = static_cast<int>(p.sizes.size());
    nv_ = static_cast<int>(p.F.cols());
    rows_of_block_.resize(static_cast<std::size_t>(nb_));
    for (int i = 0; i < m_; ++i)
      for (const auto& [blk, ent] : p.A[static_cast<std::size_t>(i)]) rows_of_block_[static_cast<std::size_t>(blk)].push_back(i);
    N_ = 0;
    for (int s : p.sizes) N_ += s;
  }

  IpmState run() {
    IpmState st;
    double zp = 10.0, zd = std::max(10.0, std::sqrt(static_cast<double>(N_)));
    for (int i = 0; i < m_; ++i) {
      double na = p_.F.row(i).squaredNorm();
      for (const auto& [blk, ent] : p_.A[static_cast<std::size_t>(i)])
        for (const Entry& e : ent) na += e.v * e.v;
      zp = std::max(zp, (1.0 + std::abs(p_.b(i))) / (1.0 + std::sqrt(na)));
    }
    for (const Sparse& c : p_.C)
      for (const Entry& e : c) zd = std::max(zd, std::abs(e.v));
    for (int k = 0; k < nb_; ++k) {
      const int s = p_.sizes[static_cast<std::size_t>(k)];
      st.X.push_back(zp * RealMatrix::Identity(s, s));
      st.S.push_back(zd * RealMatrix::Identity(s, s));
    }
    st.y = RealVector::Zero(m_);
    st.v = RealVector::Zero(nv_);

    const double bnorm = p_.b.norm();
    double cnorm2 = p_.cv.squaredNorm();
    for (const Sparse& c : p_.C)
      for (const Entry& e : c) cnorm2 += e.v * e.v;
    const double cnorm = std::sqrt(cnorm2);
    int stalls = 0;

    for (int it = 0;; ++it) {
      // residuals
      RealVector rp = p_.b - p_.F * st.v;
      for (int i = 0; i < m_; ++i)
        for (const auto& [blk, ent] : p_.A[static_cast<std::size_t>(i)]) rp(i) -= sparse_dot(ent, st.X[static_cast<std::size_t>(blk)]);
      std::vector<RealMatrix> Rd(static_cast<std::size_t>(nb_));
      for (int k = 0; k < nb_; ++k) {
        RealMatrix r = -st.S[static_cast<std::size_t>(k)];
        sparse_axpy(r, p_.C[static_cast<std::size_t>(k)], 1.0);
        Rd[static_cast<std::size_t>(k)] = r;
      }
      for (int i = 0; i < m_; ++i)
        for (const auto& [blk, ent] : p_.A[static_cast<std::size_t>(i)]) sparse_axpy(Rd[static_cast<std::size_t>(blk)], ent, -st.y(i));
      const RealVector rf = p_.cv - p_.F.transpose() * st.y;

      double pobj = p_.cv.dot(st.v), xs = 0.0, rdn = rf.squaredNorm();
      for (int k = 0; k < nb_; ++k) {
        pobj += sparse_dot(p_.C[static_cast<std::size_t>(k)], st.X[static_cast<std::size_t>(k)]);
        xs += (st.X[static_cast<std::size_t>(k)].cwiseProduct(st.S[static_cast<std::size_t>(k)])).sum();
        rdn += Rd[static_cast<std::size_t>(k)].squaredNorm();
      }
      const double dobj = p_.b.dot(st.y);
      st.pobj = pobj;
      st.dobj = dobj;
      st.pinf = rp.norm() / (1.0 + bnorm);
      st.dinf = std::sqrt(rdn) / (1.0 + cnorm);
      st.gap = std::max(std::abs(pobj - dobj), std::abs(xs)) / (1.0 + std::abs(pobj) + std::abs(dobj));
      st.iterations = it;
      if (st.pinf <= eps_ && st.dinf <= eps_ && st.gap <= eps_) {
        st.converged = true;
        return st;
      }
      if (it >= max_iter_ || stalls >= 3) return st;
      const double mu = xs / N_;
      try {

      // inverses of S
      std::vector<RealMatrix> W(static_cast<std::size_t>(nb_));
      for (int k = 0; k < nb_; ++k) {
        Eigen::LLT<RealMatrix> llt(st.S[static_cast<std::size_t>(k)]);
        if (llt.info() != Eigen::Success) throw Error(ErrorKind::NumericalBreakdown, "dual slack lost definiteness");
        const int s = p_.sizes[static_cast<std::size_t>(k)];
        W[static_cast<std::size_t>(k)] = sym(llt.solve(RealMatrix::Identity(s, s)));
      }
      const RealMatrix M = schur(st.X, W);
      // Full KKT [[M, F], [F^T, 0]] with symmetric equilibration; rows touching only free
      // variables leave M itself singular.
      const int nk = m_ + nv_;
      RealMatrix K = RealMatrix::Zero(nk, nk);
      K.topLeftCorner(m_, m_) = M;
      K.topRightCorner(m_, nv_) = p_.F;
      K.bottomLeftCorner(nv_, m_) = p_.F.transpose();
      RealVector dscale(nk);
      for (int i = 0; i < nk; ++i) {
        const double r = K.row(i).cwiseAbs().maxCoeff();
        dscale(i) = r > 0.0 ? 1.0 / std::sqrt(r) : 1.0;
      }
      K = dscale.asDiagonal() * K * dscale.asDiagonal();
      if (!K.allFinite()) throw Error(ErrorKind::NumericalBreakdown, "Schur complement is not finite");
      Eigen::PartialPivLU<RealMatrix> lu(K);
      auto kkt_solve = [&](const RealVector& top, const RealVector& bottom, RealVector& dy, RealVector& dv) {
        RealVector rhs(nk);
        rhs.head(m_) = top;
        rhs.tail(nv_) = bottom;
        RealVector sol = dscale.asDiagonal() * lu.solve(dscale.asDiagonal() * rhs);
        if (!sol.allFinite()) throw Error(ErrorKind::NumericalBreakdown, "KKT solve produced non-finite values");
        dy = sol.head(m_);
        dv = sol.tail(nv_);
      };

      auto direction = [&](const std::vector<RealMatrix>& Rc, std::vector<RealMatrix>& dX, std::vector<RealMatrix>& dS,
                           RealVector& dy, RealVector& dv) {
        RealVector h = rp;
        for (int k = 0; k < nb_; ++k) {
          const RealMatrix T = Rc[static_cast<std::size_t>(k)] - sym(st.X[static_cast<std::size_t>(k)] * Rd[static_cast<std::size_t>(k)] * W[static_cast<std::size_t>(k)]);
          for (int i : rows_of_block_[static_cast<std::size_t>(k)])
            for (const auto& [blk, ent] : p_.A[static_cast<std::size_t>(i)])
              if (blk == k) h(i) -= sparse_dot(ent, T);
        }
        kkt_solve(h, rf, dy, dv);
        dS = Rd;
        for (int i = 0; i < m_; ++i)
          for (const auto& [blk, ent] : p_.A[static_cast<std::size_t>(i)]) sparse_axpy(dS[static_cast<std::size_t>(blk)], ent, -dy(i));
        dX.resize(static_cast<std::size_t>(nb_));
        for (int k = 0; k < nb_; ++k)
          dX[static_cast<std::size_t>(k)] = Rc[static_cast<std::size_t>(k)] - sym(st.X[static_cast<std::size_t>(k)] * dS[static_cast<std::size_t>(k)] * W[static_cast<std::size_t>(k)]);
      };
      auto steps = [&](const std::vector<RealMatrix>& dX, const std::vector<RealMatrix>& dS) {
        double ap = std::numeric_limits<double>::infinity(), ad = ap;
        for (int k = 0; k < nb_; ++k) {
          ap = std::min(ap, max_step(st.X[static_cast<std::size_t>(k)], dX[static_cast<std::size_t>(k)]));
          ad = std::min(ad, max_step(st.S[static_cast<std::size_t>(k)], dS[static_cast<std::size_t>(k)]));
        }
        return std::pair<double, double>(ap, ad);
      };

      // predictor
      std::vector<RealMatrix> Rc(static_cast<std::size_t>(nb_)), dXa, dSa, dX, dS;
      RealVector dya, dva, dy, dv;
      for (int k = 0; k < nb_; ++k) Rc[static_cast<std::size_t>(k)] = -st.X[static_cast<std::size_t>(k)];
      direction(Rc, dXa, dSa, dya, dva);
      auto [apa, ada] = steps(dXa, dSa);
      apa = std::min(1.0, apa);
      ada = std::min(1.0, ada);
      double xs_aff = 0.0;
      for (int k = 0; k < nb_; ++k)
        xs_aff += ((st.X[static_cast<std::size_t>(k)] + apa * dXa[static_cast<std::size_t>(k)])
                       .cwiseProduct(st.S[static_cast<std::size_t>(k)] + ada * dSa[static_cast<std::size_t>(k)]))
                      .sum();
      const double sigma = std::clamp(std::pow(std::max(xs_aff, 0.0) / std::max(xs, 1e-300), 3.0), 0.0, 1.0);

      // corrector
      for (int k = 0; k < nb_; ++k)
        Rc[static_cast<std::size_t>(k)] = sigma * mu * W[static_cast<std::size_t>(k)] - st.X[static_cast<std::size_t>(k)] -
                 sym(dXa[static_cast<std::size_t>(k)] * dSa[static_cast<std::size_t>(k)] * W[static_cast<std::size_t>(k)]);
      direction(Rc, dX, dS, dy, dv);
      auto [ap, ad] = steps(dX, dS);
      const double gamma = 0.9 + 0.09 * std::min(apa, ada);
      ap = std::min(1.0, gamma * ap);
      ad = std::min(1.0, gamma * ad);
      if (ap < 1e-10 && ad < 1e-10)
        ++stalls;
      else
        stalls = 0;
      for (int k = 0; k < nb_; ++k) {
        st.X[static_cast<std::size_t>(k)] = sym(st.X[static_cast<std::size_t>(k)] + ap * dX[static_cast<std::size_t>(k)]);
        st.S[static_cast<std::size_t>(k)] = sym(st.S[static_cast<std::size_t>(k)] + ad * dS[static_cast<std::size_t>(k)]);
      }
      st.v += ap * dv;
      st.y += ad * dy;
      } catch (const Error&) {
        // Late breakdowns keep the last iterate; the caller judges its accuracy.
        if (it == 0) throw;
        return st;
      }
    }
  }

 private:
  // M_ij = tr(A_i X A_j W), assembled blockwise.
  RealMatrix schur(const std::vector<RealMatrix>& X, const std::vector<RealMatrix>& W) const {
    RealMatrix M = RealMatrix::Zero(m_, m_);
    for (int k = 0; k < nb_; ++k) {
      const auto& rows = rows_of_block_[static_cast<std::size_t>(k)];
      if (rows.empty()) continue;
      const RealMatrix& Xk = X[static_cast<std::size_t>(k)];
      const RealMatrix& Wk = W[static_cast<std::size_t>(k)];
      const int s = p_.sizes[static_cast<std::size_t>(k)];
      std::vector<const Sparse*> ent(rows.size());
      for (std::size_t a = 0; a < rows.size(); ++a)
        for (const auto& [blk, e] : p_.A[static_cast<std::size_t>(rows[a])])
          if (blk == k) ent[a] = &e;
      std::vector<int> slot(static_cast<std::size_t>(s), -1);
      for (std::size_t jj = 0; jj < rows.size(); ++jj) {
        const Sparse& aj = *ent[jj];
        std::vector<int> cols;
        for (const Entry& e : aj)
          if (slot[static_cast<std::size_t>(e.c)] < 0) {
            slot[static_cast<std::size_t>(e.c)] = static_cast<int>(cols.size());
            cols.push_back(e.c);
          }
        RealMatrix U = RealMatrix::Zero(s, static_cast<Eigen::Index>(cols.size()));
        for (const Entry& e : aj) U.col(slot[static_cast<std::size_t>(e.c)]) += e.v * Xk.col(e.r);
        RealMatrix Wr(static_cast<Eigen::Index>(cols.size()), s);
        for (std::size_t c = 0; c < cols.size(); ++c) Wr.row(static_cast<Eigen::Index>(c)) = Wk.row(cols[c]);
        for (int c : cols) slot[static_cast<std::size_t>(c)] = -1;
        const RealMatrix G = U * Wr;  // X A_j W
        for (std::size_t ii = jj; ii < rows.size(); ++ii) {
          double acc = 0.0;
          for (const Entry& e : *ent[ii]) acc += e.v * G(e.c, e.r);
          M(rows[ii], rows[jj]) += acc;
        }
      }
    }
    return M.selfadjointView<Eigen::Lower>();
  }

  const StdSdp& p_;
  int max_iter_;
  double eps_;
  int m_ = 0, nb_ = 0, nv_ = 0, N_ = 0;
  std::vector<std::vector<int>> rows_of_block_;
};

// ---------------------------------------------------------------- realification

struct ParamInfo {
  int block = -1;  // problem block
  int kind = 0;    // 0 diag, 1 re, 2 im, 3 free
  int a = 0, b = 0;
  int free_index = -1;
};

struct Layout {
  std::vector<ParamInfo> params;
  std::vector<int> psd_blocks;             // problem block -> realified block index or -1
  std::vector<int> real_sizes;             // realified sizes
  std::vector<int> psd_of_real;            // realified block -> problem block
  int num_free = 0;
};

Layout make_layout(const SdpProblem& p) {
  Layout L;
  L.params.resize(static_cast<std::size_t>(p.num_params()));
  L.psd_blocks.assign(p.blocks().size(), -1);
  for (std::size_t bi = 0; bi < p.blocks().size(); ++bi) {
    const auto& b = p.blocks()[bi];
    if (b.psd) {
      L.psd_blocks[bi] = static_cast<int>(L.real_sizes.size());
      L.real_sizes.push_back(2 * b.rows);
      L.psd_of_real.push_back(static_cast<int>(bi));
      const int n = b.rows;
      for (int a = 0; a < n; ++a) L.params[static_cast<std::size_t>(b.offset + a)] = ParamInfo{static_cast<int>(bi), 0, a, a, -1};
      for (int a = 0; a < n; ++a)
        for (int c = a + 1; c < n; ++c) {
          const int k = upper_index(n, a, c);
          L.params[static_cast<std::size_t>(b.offset + n + 2 * k)] = ParamInfo{static_cast<int>(bi), 1, a, c, -1};
          L.params[static_cast<std::size_t>(b.offset + n + 2 * k + 1)] = ParamInfo{static_cast<int>(bi), 2, a, c, -1};
        }
    } else {
      for (int q = 0; q < b.num_params(); ++q)
        L.params[static_cast<std::size_t>(b.offset + q)] = ParamInfo{static_cast<int>(bi), 3, 0, 0, L.num_free++};
    }
  }
  return L;
}

// Symmetric 2n x 2n matrix A with tr(A Y) = coeff * param for the realified Y.
void realify_param(const ParamInfo& info, int n, double c, std::map<std::pair<int, int>, double>& out) {
  const int a = info.a, b = info.b;
  switch (info.kind) {
    case 0:
      out[{a, a}] += c / 2;
      out[{n + a, n + a}] += c / 2;
      break;
    case 1:
      out[{a, b}] += c / 4;
      out[{b, a}] += c / 4;
      out[{n + a, n + b}] += c / 4;
      out[{n + b, n + a}] += c / 4;
      break;
    case 2:
      out[{n + a, b}] += c / 4;
      out[{b, n + a}] += c / 4;
      out[{a, n + b}] -= c / 4;
      out[{n + b, a}] -= c / 4;
      break;
    default:
      break;
  }
}

// Per realified block sparse entries of a parameter-space row; free part accumulated into `free`.
std::vector<std::pair<int, Sparse>> realify_row(const SdpProblem& p, const Layout& L,
                                                const std::vector<std::pair<int, double>>& coeffs, RealVector* free) {
  std::map<int, std::map<std::pair<int, int>, double>> acc;
  for (const auto& [q, c] : coeffs) {
    const ParamInfo& info = L.params[static_cast<std::size_t>(q)];
    if (info.kind == 3) {
      if (free) (*free)(info.free_index) += c;
      continue;
    }
    const int rb = L.psd_blocks[static_cast<std::size_t>(info.block)];
    realify_param(info, p.blocks()[static_cast<std::size_t>(info.block)].rows, c, acc[rb]);
  }
  std::vector<std::pair<int, Sparse>> out;
  for (const auto& [rb, m] : acc) {
    Sparse s;
    for (const auto& [rc, v] : m)
      if (v != 0.0) s.push_back(Entry{rc.first, rc.second, v});
    if (!s.empty()) out.emplace_back(rb, std::move(s));
  }
  return out;
}

// Hermitian X from realified Y.
Matrix complexify(const RealMatrix& Y) {
  const Eigen::Index n = Y.rows() / 2;
  Matrix X(n, n);
  const RealMatrix re = 0.5 * (Y.topLeftCorner(n, n) + Y.bottomRightCorner(n, n));
  const RealMatrix im = 0.5 * (Y.bottomLeftCorner(n, n) - Y.topRightCorner(n, n));
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) X(i, j) = Complex(re(i, j), im(i, j));
  return 0.5 * (X + X.adjoint());
}

RealMatrix dense_rows(const SdpProblem& p) {
  RealMatrix G = RealMatrix::Zero(static_cast<Eigen::Index>(p.rows().size()), p.num_params());
  for (std::size_t i = 0; i < p.rows().size(); ++i)
    for (const auto& [q, c] : p.rows()[i].coeffs) G(static_cast<Eigen::Index>(i), q) += c;
  return G;
}

RealVector row_rhs(const SdpProblem& p) {
  RealVector r(static_cast<Eigen::Index>(p.rows().size()));
  for (std::size_t i = 0; i < p.rows().size(); ++i) r(static_cast<Eigen::Index>(i)) = p.rows()[i].rhs;
  return r;
}

RealVector row_norms(const RealMatrix& G) {
  RealVector n(G.rows());
  for (Eigen::Index i = 0; i < G.rows(); ++i) {
    const double v = G.row(i).norm();
    n(i) = v > 0.0 ? v : 1.0;
  }
  return n;
}

}  // namespace

// ---------------------------------------------------------------- verification

double equality_residual(const SdpProblem& problem, const MatrixList& values) {
  const RealVector params = problem.pack(values);
  double worst = 0.0;
  for (const auto& row : problem.rows()) {
    double lhs = 0.0, nrm = 0.0;
    for (const auto& [q, c] : row.coeffs) {
      lhs += c * params(q);
      nrm += c * c;
    }
    worst = std::max(worst, std::abs(lhs - row.rhs) / std::max(1.0, std::sqrt(nrm)));
  }
  return worst;
}

double min_psd_eigenvalue(const SdpProblem& problem, const MatrixList& values) {
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < problem.blocks().size(); ++i)
    if (problem.blocks()[i].psd && problem.blocks()[i].rows > 0) m = std::min(m, min_eigenvalue(hermitian_part(values[i])));
  return std::isfinite(m) ? m : 0.0;
}

bool verify_feasible(const SdpProblem& problem, const MatrixList& values, double tol) {
  for (const auto& v : values)
    if (!v.allFinite()) return false;
  return equality_residual(problem, values) <= 10 * tol && min_psd_eigenvalue(problem, values) >= -10 * tol;
}

std::optional<double> verify_infeasible(const SdpProblem& problem, const RealVector& lambda, double tol) {
  if (lambda.size() != static_cast<Eigen::Index>(problem.rows().size()) || !lambda.allFinite()) return std::nullopt;
  const RealMatrix G = dense_rows(problem);
  const RealVector norms = row_norms(G);
  RealVector lam = lambda.cwiseProduct(norms);  // functional on unit-normalized rows
  const double ln = lam.norm();
  if (ln == 0.0) return std::nullopt;
  lam /= ln;
  const RealVector rhat = row_rhs(problem).cwiseQuotient(norms);
  const RealVector combo = (G.array().colwise() / norms.array()).matrix().transpose() * lam;  // sum lam_i a_i
  // Combined row as hermitian matrices on PSD blocks; free part must vanish.
  const Layout L = make_layout(problem);
  std::vector<Matrix> H;
  for (const auto& b : problem.blocks()) H.push_back(b.psd ? Matrix(Matrix::Zero(b.rows, b.rows)) : Matrix(0, 0));
  double free_norm = 0.0;
  const Complex I(0.0, 1.0);
  for (Eigen::Index q = 0; q < combo.size(); ++q) {
    const ParamInfo& info = L.params[static_cast<std::size_t>(q)];
    const double c = combo(q);
    if (info.kind == 3) {
      free_norm = std::max(free_norm, std::abs(c));
      continue;
    }
    Matrix& h = H[static_cast<std::size_t>(info.block)];
    if (info.kind == 0) h(info.a, info.a) += c;
    if (info.kind == 1) {
      h(info.a, info.b) += c / 2;
      h(info.b, info.a) += c / 2;
    }
    if (info.kind == 2) {
      h(info.a, info.b) += I * c / 2.0;
      h(info.b, info.a) -= I * c / 2.0;
    }
  }
  if (free_norm > 10 * tol) return std::nullopt;
  for (std::size_t i = 0; i < H.size(); ++i)
    if (problem.blocks()[i].psd && H[i].rows() > 0 && min_eigenvalue(H[i]) < -10 * tol) return std::nullopt;
  const double margin = -lam.dot(rhat);
  if (margin <= tol) return std::nullopt;
  return margin;
}

// ---------------------------------------------------------------- driver

namespace {

struct Reduced {
  std::vector<int> kept;   // original row indices
  RealVector norms;        // per original row
  RealMatrix Fv;           // kept x nfree_reduced (orthonormal free basis applied)
  RealMatrix V;            // nfree x nfree_reduced
  std::vector<std::vector<std::pair<int, Sparse>>> A;  // kept rows, realified, normalized
  RealVector b;            // normalized rhs of kept rows
  RealVector trace;        // per kept row: sum of realified traces
};

SdpResult finish_values(const SdpProblem& problem, const Layout& L, const std::vector<RealMatrix>& Y, double shift,
                        const RealVector& free_params) {
  SdpResult r;
  RealVector params = RealVector::Zero(problem.num_params());
  MatrixList values;
  for (std::size_t bi = 0; bi < problem.blocks().size(); ++bi) {
    const auto& b = problem.blocks()[bi];
    if (b.psd) {
      Matrix X = complexify(Y[static_cast<std::size_t>(L.psd_blocks[bi])]);
      X += shift * Matrix::Identity(b.rows, b.rows);
      values.push_back(X);
    } else {
      Matrix m(b.rows, b.cols);
      for (int rr = 0; rr < b.rows; ++rr)
        for (int cc = 0; cc < b.cols; ++cc) {
          const int k = rr * b.cols + cc;
          const int f = L.params[static_cast<std::size_t>(b.offset + 2 * k)].free_index;
          m(rr, cc) = Complex(free_params(f), free_params(f + 1));
        }
      values.push_back(m);
    }
  }
  r.values = std::move(values);
  return r;
}

}  // namespace

namespace {
SdpResult solve_unlogged(const SdpProblem& problem, const SdpOptions& options);
}

SdpResult solve(const SdpProblem& problem, const SdpOptions& options) {
  SdpResult r = solve_unlogged(problem, options);
  if (options.log) options.log->push_back(SdpRecord{problem, r});
  return r;
}

namespace {
SdpResult solve_unlogged(const SdpProblem& problem, const SdpOptions& options) {
  if (problem.num_params() > options.max_parameters)
    throw Error(ErrorKind::InvalidInput, "SDP exceeds the parameter cap (" + std::to_string(problem.num_params()) + " > " +
                                             std::to_string(options.max_parameters) + ")");
  const double tol = options.tol;
  const double eps = std::min(1e-10, std::max(1e-13, 0.01 * tol));
  const Layout L = make_layout(problem);
  RealMatrix G = dense_rows(problem);
  const RealVector r = row_rhs(problem);
  if (!G.allFinite() || !r.allFinite()) throw Error(ErrorKind::InvalidInput, "non-finite SDP data");
  // Rows that vanish up to roundoff would otherwise be blown up by normalization.
  if (G.rows() > 0) {
    const double top = G.rowwise().norm().maxCoeff();
    for (Eigen::Index i = 0; i < G.rows(); ++i)
      if (G.row(i).norm() <= 1e-12 * top) G.row(i).setZero();
  }
  const Eigen::Index m0 = G.rows();
  const RealVector norms = row_norms(G);
  const RealMatrix Gn = (G.array().colwise() / norms.array()).matrix();
  const RealVector rn = r.cwiseQuotient(norms);

  SdpResult result;
  result.dual = RealVector::Zero(m0);

  // Affine consistency.
  RealVector x0 = RealVector::Zero(problem.num_params());
  std::vector<int> kept;
  if (m0 > 0) {
    Eigen::CompleteOrthogonalDecomposition<RealMatrix> cod(Gn);
    cod.setThreshold(1e-11);
    x0 = cod.solve(rn);
    const RealVector res = rn - Gn * x0;
    if (res.lpNorm<Eigen::Infinity>() > 1e-9 * (1.0 + rn.lpNorm<Eigen::Infinity>())) {
      result.status = SdpStatus::Infeasible;
      result.dual = (-res).cwiseQuotient(norms);
      result.phase_one_value = -std::numeric_limits<double>::infinity();
      result.note = "affine constraints inconsistent";
      auto margin = verify_infeasible(problem, result.dual, tol);
      if (margin) {
        result.certificate_margin = *margin;
      } else {
        result.status = SdpStatus::Marginal;
        result.note = "affine constraints nearly inconsistent";
      }
      return result;
    }
    Eigen::ColPivHouseholderQR<RealMatrix> qr(Gn.transpose());
    qr.setThreshold(1e-11);
    const Eigen::Index rank = qr.rank();
    for (Eigen::Index k = 0; k < rank; ++k) kept.push_back(static_cast<int>(qr.colsPermutation().indices()(k)));
    std::sort(kept.begin(), kept.end());
  }
  const int m = static_cast<int>(kept.size());

  Reduced red;
  red.kept = kept;
  red.norms = norms;
  RealMatrix Ffull = RealMatrix::Zero(m, L.num_free);
  red.b.resize(m);
  red.trace = RealVector::Zero(m);
  for (int i = 0; i < m; ++i) {
    const auto& row = problem.rows()[static_cast<std::size_t>(kept[static_cast<std::size_t>(i)])];
    std::vector<std::pair<int, double>> scaled = row.coeffs;
    for (auto& sc : scaled) sc.second /= norms(kept[static_cast<std::size_t>(i)]);
    RealVector fr = RealVector::Zero(L.num_free);
    red.A.push_back(realify_row(problem, L, scaled, &fr));
    Ffull.row(i) = fr.transpose();
    red.b(i) = rn(kept[static_cast<std::size_t>(i)]);
    for (const auto& [blk, ent] : red.A.back())
      for (const Entry& e : ent)
        if (e.r == e.c) red.trace(i) += e.v;
  }
  if (L.num_free > 0 && m > 0) {
    Eigen::JacobiSVD<RealMatrix> svd(Ffull, Eigen::ComputeThinV);
    const RealVector& sv = svd.singularValues();
    int rf = 0;
    for (Eigen::Index k = 0; k < sv.size(); ++k)
      if (sv(k) > 1e-11 * std::max(1.0, sv(0))) ++rf;
    red.V = svd.matrixV().leftCols(rf);
  } else {
    red.V = RealMatrix::Zero(L.num_free, 0);
  }
  red.Fv = Ffull * red.V;
  const int nf = static_cast<int>(red.V.cols());
  const int nrb = static_cast<int>(L.real_sizes.size());

  // Trace bound large enough to contain a shifted least-squares point.
  double tr0 = 0.0;
  {
    const MatrixList v0 = problem.unpack(x0);
    double lmin = 0.0;
    for (std::size_t bi = 0; bi < problem.blocks().size(); ++bi)
      if (problem.blocks()[bi].psd && problem.blocks()[bi].rows > 0) {
        lmin = std::min(lmin, min_eigenvalue(hermitian_part(v0[bi])));
        tr0 += 2.0 * v0[bi].trace().real();
      }
    int Ntot = 0;
    for (int s : L.real_sizes) Ntot += s;
    tr0 += Ntot * (1.0 - lmin);
  }
  int Ntot = 0;
  for (int sz : L.real_sizes) Ntot += sz;
  const double R_max = std::max(options.trace_bound, 10.0 * (tr0 + 1.0));
  double R = std::min(R_max, 10.0 * (tr0 + 1.0 + Ntot));

  // Phase I: maximize t with X_b = Z_b + t I, t + w1 = 1, sum tr Z_b + w2 = R.
  const int w1 = nrb, w2 = nrb + 1;
  auto phase_one = [&](double bound) {
    StdSdp p1;
    p1.sizes = L.real_sizes;
    p1.sizes.push_back(1);
    p1.sizes.push_back(1);
    p1.A = red.A;
    p1.b = red.b;
    p1.F = RealMatrix::Zero(m + 2, nf + 1);
    p1.F.topLeftCorner(m, nf) = red.Fv;
    p1.F.col(nf).head(m) = red.trace;
    p1.A.push_back({{w1, Sparse{Entry{0, 0, 1.0}}}});
    p1.F(m, nf) = 1.0;
    std::vector<std::pair<int, Sparse>> tr_row;
    for (int k = 0; k < nrb; ++k) {
      Sparse sp;
      for (int a = 0; a < L.real_sizes[static_cast<std::size_t>(k)]; ++a) sp.push_back(Entry{a, a, 1.0});
      if (!sp.empty()) tr_row.emplace_back(k, std::move(sp));
    }
    tr_row.emplace_back(w2, Sparse{Entry{0, 0, 1.0}});
    p1.A.push_back(std::move(tr_row));
    p1.b.conservativeResize(m + 2);
    p1.b(m) = 1.0;
    p1.b(m + 1) = bound;
    p1.C.assign(p1.sizes.size(), Sparse{});
    p1.cv = RealVector::Zero(nf + 1);
    p1.cv(nf) = -1.0;
    return Ipm(p1, options.max_iterations, eps).run();
  };

  IpmState s1;
  for (;;) {
    s1 = phase_one(R);
    result.iterations += s1.iterations;
    const bool bound_active = s1.X[static_cast<std::size_t>(w2)](0, 0) < 1e-6 * R;
    if (s1.v(nf) >= -tol || !bound_active || R >= R_max) break;
    R = std::min(R_max, 100.0 * R);
  }
  if (!s1.converged && (s1.pinf > 1e-6 || s1.gap > 1e-6))
    throw Error(ErrorKind::IterationLimit, "phase-I interior point did not converge (pinf=" + std::to_string(s1.pinf) +
                                               ", gap=" + std::to_string(s1.gap) + ")");
  const double t = s1.v(nf);
  const double t_upper = -s1.dobj;
  result.phase_one_value = t;

  auto map_dual = [&](const RealVector& y, double sign) {
    RealVector lam = RealVector::Zero(m0);
    for (int i = 0; i < m; ++i) lam(kept[static_cast<std::size_t>(i)]) = sign * y(i) / norms(kept[static_cast<std::size_t>(i)]);
    return lam;
  };

  if (t >= -tol) {
    const RealVector freep = red.V * s1.v.head(nf);
    SdpResult fr = finish_values(problem, L, s1.X, t, freep);
    result.values = std::move(fr.values);
    result.dual = map_dual(s1.y.head(m), 1.0);
    if (!verify_feasible(problem, result.values, tol)) {
      result.status = SdpStatus::Marginal;
      result.note = "phase-I point failed the independent check";
    } else {
      result.status = SdpStatus::Feasible;
    }
    // Phase II on the strictly feasible set.
    if (result.status == SdpStatus::Feasible && problem.has_objective() && options.phase_two && t > 10 * tol) {
      StdSdp p2;
      p2.sizes = L.real_sizes;
      p2.sizes.push_back(1);
      p2.A = red.A;
      p2.b = red.b;
      p2.F = red.Fv;
      double trx = 0.0;
      for (std::size_t bi = 0; bi < problem.blocks().size(); ++bi)
        if (problem.blocks()[bi].psd) trx += 2.0 * result.values[bi].trace().real();
      const double R2 = std::max(R, 10.0 * (trx + 1.0));
      std::vector<std::pair<int, Sparse>> tr_row;
      for (int k = 0; k < nrb; ++k) {
        Sparse s;
        for (int a = 0; a < L.real_sizes[static_cast<std::size_t>(k)]; ++a) s.push_back(Entry{a, a, 1.0});
        if (!s.empty()) tr_row.emplace_back(k, std::move(s));
      }
      tr_row.emplace_back(nrb, Sparse{Entry{0, 0, 1.0}});
      p2.A.push_back(std::move(tr_row));
      p2.b.conservativeResize(m + 1);
      p2.b(m) = R2;
      p2.F.conservativeResize(m + 1, nf);
      p2.F.row(m).setZero();
      std::vector<std::pair<int, double>> obj;
      RealVector fobj = RealVector::Zero(L.num_free);
      for (int q = 0; q < problem.num_params(); ++q)
        if (problem.objective()[static_cast<std::size_t>(q)] != 0.0) obj.emplace_back(q, problem.objective()[static_cast<std::size_t>(q)]);
      const auto cparts = realify_row(problem, L, obj, &fobj);
      p2.C.assign(p2.sizes.size(), Sparse{});
      for (const auto& [blk, ent] : cparts) p2.C[static_cast<std::size_t>(blk)] = ent;
      p2.cv = red.V.transpose() * fobj;
      try {
        IpmState s2 = Ipm(p2, options.max_iterations, eps).run();
        if (s2.converged || (s2.pinf < 1e-8 && s2.gap < 1e-7)) {
          SdpResult f2 = finish_values(problem, L, s2.X, 0.0, red.V * s2.v);
          if (verify_feasible(problem, f2.values, tol)) {
            result.values = std::move(f2.values);
            result.dual = map_dual(s2.y.head(m), 1.0);
            result.objective_optimized = true;
            result.iterations += s2.iterations;
          }
        }
      } catch (const Error&) {
        // keep the phase-I point
      }
    }
    result.equality_residual = equality_residual(problem, result.values);
    result.min_eigenvalue = min_psd_eigenvalue(problem, result.values);
    return result;
  }

  // t < -tol: try the dual functional as a separating certificate.
  const RealVector lam = map_dual(s1.y.head(m), -1.0);
  result.dual = lam;
  {
    const RealVector freep = red.V * s1.v.head(nf);
    SdpResult fr = finish_values(problem, L, s1.X, t, freep);
    result.values = std::move(fr.values);
    result.equality_residual = equality_residual(problem, result.values);
    result.min_eigenvalue = min_psd_eigenvalue(problem, result.values);
  }
  if (t_upper < -10 * tol) {
    auto margin = verify_infeasible(problem, lam, tol);
    if (margin) {
      result.status = SdpStatus::Infeasible;
      result.certificate_margin = *margin;
      return result;
    }
    result.note = "dual functional failed the independent check";
  } else {
    result.note = "phase-I optimum within the marginal band";
  }
  result.status = SdpStatus::Marginal;
  return result;
}
}  // namespace

// ---------------------------------------------------------------- moment blocks

Matrix contract(const Matrix& G, const Matrix& M, int d, int eps) {
  if (G.rows() != d || G.cols() != d || M.rows() != d * eps || M.cols() != d * eps)
    throw Error(ErrorKind::DimensionMismatch, "contract: shapes");
  Matrix out = Matrix::Zero(eps, eps);
  for (int a = 0; a < eps; ++a)
    for (int b = 0; b < eps; ++b) {
      Complex s = 0.0;
      for (int p = 0; p < d; ++p)
        for (int q = 0; q < d; ++q) s += G(p, q) * M(q + d * b, p + d * a);
      out(a, b) = s;
    }
  return out;
}

ExprMatrix contract(const Matrix& G, const ExprMatrix& M, int d, int eps) {
  if (G.rows() != d || G.cols() != d || expr_rows(M) != d * eps || expr_cols(M) != d * eps)
    throw Error(ErrorKind::DimensionMismatch, "contract: shapes");
  ExprMatrix out = expr_zero(eps, eps);
  for (int a = 0; a < eps; ++a)
    for (int b = 0; b < eps; ++b) {
      LinearExpr s;
      for (int p = 0; p < d; ++p)
        for (int q = 0; q < d; ++q)
          if (G(p, q) != Complex(0.0, 0.0)) s += G(p, q) * M[static_cast<std::size_t>(q + d * b)][static_cast<std::size_t>(p + d * a)];
      s.compact();
      out[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] = std::move(s);
    }
  return out;
}

Matrix moment_block(const MatrixList& C) {
  if (C.empty()) return Matrix(0, 0);
  const Eigen::Index n = C[0].size();
  Matrix M = Matrix::Zero(n, n);
  for (const Matrix& c : C) {
    if (c.size() != n) throw Error(ErrorKind::DimensionMismatch, "moment_block: shapes");
    const Vector v = Eigen::Map<const Vector>(c.data(), n);
    M += v * v.adjoint();
  }
  return M;
}

// ---------------------------------------------------------------- builders

std::optional<HermitianSimilarity> hermitian_similarity(const LinearPencil& L, const SdpOptions& options) {
  if (!L.is_monic()) throw Error(ErrorKind::InvalidInput, "hermitian_similarity needs a monic pencil");
  const int d = L.rows();
  SdpProblem prob;
  prob.set_tag("hermitian_similarity");
  const int P = prob.add_psd_block(d, "P");
  const ExprMatrix Pm = prob.matrix(P);
  for (int k = 0; k < L.g(); ++k) {
    // (I + P) B_k^* = A_k (I + P)  <=>  P B_k^* - A_k P = A_k - B_k^*
    const Matrix Bs = L.B(k).adjoint();
    const ExprMatrix lhs = add(mul(Pm, Bs), scale(mul(L.A(k), Pm), -1.0));
    prob.add_matrix_equality(lhs, L.A(k) - Bs, false, "sim" + std::to_string(k + 1));
  }
  LinearExpr tr;
  for (int a = 0; a < d; ++a) tr += prob.entry(P, a, a);
  prob.set_objective(tr);
  SdpResult res = solve(prob, options);
  if (res.status == SdpStatus::Infeasible) return std::nullopt;
  if (res.status == SdpStatus::Marginal) throw MarginalSdpError("hermitian similarity SDP undecided: " + res.note, 0);
  const Matrix Q = hermitian_part(res.values[static_cast<std::size_t>(P)]) + Matrix::Identity(d, d);
  const double floor = 1.0 - 10 * options.tol;
  const Matrix Qh = hermitian_power(Q, 0.5, floor);
  const Matrix Qmh = hermitian_power(Q, -0.5, floor);
  HermitianSimilarity out{Q, hermitianize(transform(Qmh, L, Qh)), std::move(res)};
  return out;
}

InclusionResult inclusion(const LinearPencil& LA, const LinearPencil& LB, const SdpOptions& options) {
  if (!LA.is_hermitian_monic() || !LB.is_hermitian_monic())
    throw Error(ErrorKind::InvalidInput, "inclusion needs hermitian monic pencils");
  if (LA.g() != LB.g()) throw Error(ErrorKind::DimensionMismatch, "inclusion: variable counts differ");
  const int dA = LA.rows(), dB = LB.rows();
  InclusionResult out;
  if (dB == 0) {
    out.included = true;
    out.sdp.status = SdpStatus::Feasible;
    return out;
  }
  SdpProblem prob;
  prob.set_tag("inclusion");
  const int M = prob.add_psd_block(dA * dB, "M");
  const int S = prob.add_psd_block(dB, "S");
  const ExprMatrix Mm = prob.matrix(M);
  for (int j = 0; j < LA.g(); ++j)
    prob.add_matrix_equality(contract(LA.A(j), Mm, dA, dB), LB.A(j), false, "coef" + std::to_string(j + 1));
  prob.add_matrix_equality(add(prob.matrix(S), contract(Matrix::Identity(dA, dA), Mm, dA, dB)), Matrix::Identity(dB, dB),
                           true, "unit");
  out.sdp = solve(prob, options);
  if (out.sdp.status == SdpStatus::Marginal) throw MarginalSdpError("inclusion SDP undecided: " + out.sdp.note, 0);
  out.included = out.sdp.status == SdpStatus::Feasible;
  return out;
}

RankCertificate rank_certificate(const LinearPencil& Lt, const LinearPencil& L, const SdpOptions& options) {
  if (!L.is_hermitian_monic()) throw Error(ErrorKind::InvalidInput, "rank_certificate needs a hermitian monic L");
  if (Lt.g() != L.g()) throw Error(ErrorKind::DimensionMismatch, "rank_certificate: variable counts differ");
  const int delta = Lt.rows(), eps = Lt.cols(), d = L.rows();
  if (delta < eps) throw Error(ErrorKind::DimensionMismatch, "rank_certificate expects rows >= cols");
  RankCertificate out;
  if (eps == 0) {
    out.status = SdpStatus::Feasible;
    out.D = Matrix::Zero(0, delta);
    out.P0 = Matrix::Zero(0, 0);
    out.M = Matrix::Zero(0, 0);
    out.kernel = Matrix::Zero(0, 0);
    out.sdp.status = SdpStatus::Feasible;
    return out;
  }
  SdpProblem prob;
  prob.set_tag("rank_certificate");
  const int Dv = prob.add_free_block(eps, delta, "D");
  const int P0v = prob.add_psd_block(eps, "P0");
  const int Mv = d > 0 ? prob.add_psd_block(d * eps, "M") : -1;
  const ExprMatrix D = prob.matrix(Dv);
  const ExprMatrix Ds = adjoint(D);
  auto moment = [&](const Matrix& G) { return d > 0 ? contract(G, prob.matrix(Mv), d, eps) : expr_zero(eps, eps); };

  // constant: 1/2 (D C + C^* D^*) - P0 - Phi_I(M) = 0
  {
    const Matrix& C = Lt.constant();
    ExprMatrix lhs = scale(add(mul(D, C), mul(C.adjoint(), Ds)), 0.5);
    lhs = add(lhs, scale(prob.matrix(P0v), -1.0));
    lhs = add(lhs, scale(moment(Matrix::Identity(d, d)), -1.0));
    prob.add_matrix_equality(lhs, Matrix::Zero(eps, eps), true, "const");
  }
  // x_j: 1/2 (D At_j + Bt_j^* D^*) + Phi_{A_j}(M) = 0
  for (int j = 0; j < L.g(); ++j) {
    const Matrix& At = Lt.coeff_x()[static_cast<std::size_t>(j)];
    const Matrix& Bt = Lt.coeff_xstar()[static_cast<std::size_t>(j)];
    ExprMatrix lhs = scale(add(mul(D, At), mul(Bt.adjoint(), Ds)), 0.5);
    if (d > 0) lhs = add(lhs, moment(L.A(j)));
    prob.add_matrix_equality(lhs, Matrix::Zero(eps, eps), false, "x" + std::to_string(j + 1));
  }
  // Re tr(D C) = 1
  {
    LinearExpr tr;
    const ExprMatrix DC = mul(D, Lt.constant());
    for (int a = 0; a < eps; ++a) tr += DC[static_cast<std::size_t>(a)][static_cast<std::size_t>(a)];
    prob.add_equality(tr, 1.0, SdpProblem::Part::Real, "normalization");
  }
  out.sdp = solve(prob, options);
  out.status = out.sdp.status;
  if (out.status != SdpStatus::Infeasible && !out.sdp.values.empty()) {
    out.D = out.sdp.values[static_cast<std::size_t>(Dv)];
    out.P0 = hermitian_part(out.sdp.values[static_cast<std::size_t>(P0v)]);
    out.M = d > 0 ? hermitian_part(out.sdp.values[static_cast<std::size_t>(Mv)]) : Matrix::Zero(0, 0);
  }
  if (out.status == SdpStatus::Feasible) {
    Matrix K = out.P0;
    if (d > 0) K += contract(Matrix::Identity(d, d), out.M, d, eps);
    K = hermitian_part(K);
    Eigen::SelfAdjointEigenSolver<Matrix> es(K);
    const double top = std::max(es.eigenvalues().maxCoeff(), 1e-300);
    const double thr = std::sqrt(options.tol) * top;
    int count = 0;
    for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k)
      if (es.eigenvalues()(k) <= thr) ++count;
    out.kernel = es.eigenvectors().leftCols(count);
  }
  return out;
}

}  // namespace freeconvex
