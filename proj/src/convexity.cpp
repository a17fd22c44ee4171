#include "freeconvex/convexity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "freeconvex/algebra.hpp"
#include "freeconvex/errors.hpp"
#include "freeconvex/linalg.hpp"
#include "freeconvex/realization.hpp"

namespace freeconvex {

SdpOptions AnalysisOptions::sdp() const {
  SdpOptions o;
  o.tol = tol;
  o.log = sdp_log;
  return o;
}

const char* rank_result_name(RankResult r) { return r == RankResult::FullRank ? "full_rank" : "rank_deficient"; }
const char* verdict_name(Verdict v) { return v == Verdict::Convex ? "convex" : "not_convex"; }

double pencil_sigma_min(const LinearPencil& L, const MatrixTuple& X) {
  const Matrix M = L.evaluate(X);
  if (M.rows() == 0 || M.cols() == 0) return std::numeric_limits<double>::infinity();
  return min_singular_value(M);
}

double pencil_min_eig(const LinearPencil& L, const MatrixTuple& X) {
  if (L.rows() == 0) return std::numeric_limits<double>::infinity();
  return min_eigenvalue(hermitian_part(L.evaluate(X)));
}

namespace {

// ---- witness search

// Sum_j A_j (x) X_j + A_j^* (x) X_j^*, so that L(X) = I - H.
Matrix domain_shift(const LinearPencil& L, const MatrixTuple& X) {
  const int n = X.n;
  Matrix H = Matrix::Zero(L.rows() * n, L.rows() * n);
  for (int j = 0; j < L.g(); ++j) H += kron(L.A(j), X.X[j]) + kron(L.A(j).adjoint(), X.X[j].adjoint());
  return hermitian_part(H);
}

std::optional<Witness> verified(const LinearPencil& Lt, const LinearPencil& L, MatrixTuple X, const std::string& method,
                                double tol) {
  Witness w;
  w.sigma_min = pencil_sigma_min(Lt, X);
  w.domain_min_eig = pencil_min_eig(L, X);
  w.X = std::move(X);
  w.method = method;
  // The kernel must be much closer than the domain boundary; otherwise a point
  // hugging the boundary passes when Ltilde and L share it.
  if (!(w.domain_min_eig > tol) || !(w.sigma_min < std::sqrt(tol)) || !(w.sigma_min <= 1e-2 * w.domain_min_eig))
    return std::nullopt;
  return w;
}

// Functional with L(X) >= 0 on the span of the kernel vectors, reduced to
// degree <= 1 moments on C^eps.
std::optional<Witness> gns_witness(const LinearPencil& Lt, const LinearPencil& L, const AnalysisOptions& options) {
  const int delta = Lt.rows(), eps = Lt.cols(), d = L.rows(), g = L.g();
  SdpProblem prob;
  prob.set_tag("witness_moments");
  const int L0 = prob.add_psd_block(eps, "Lambda0");
  std::vector<int> Lk;
  for (int j = 0; j < g; ++j) Lk.push_back(prob.add_free_block(eps, eps, "Lambda" + std::to_string(j + 1)));
  const ExprMatrix M0 = prob.matrix(L0);

  // Lambda0 C^T + sum_j Lambda_j A~_j^T + Lambda_j^* B~_j^T = 0
  ExprMatrix van = mul(M0, Matrix(Lt.constant().transpose()));
  for (int j = 0; j < g; ++j) {
    const ExprMatrix Mj = prob.matrix(Lk[static_cast<std::size_t>(j)]);
    van = add(van, mul(Mj, Matrix(Lt.coeff_x()[static_cast<std::size_t>(j)].transpose())));
    van = add(van, mul(adjoint(Mj), Matrix(Lt.coeff_xstar()[static_cast<std::size_t>(j)].transpose())));
  }
  prob.add_matrix_equality(van, Matrix::Zero(eps, delta), false, "vanish");

  if (d > 0) {
    // K = I_d (x) Lambda0 - sum_j A_j (x) Lambda_j + A_j^* (x) Lambda_j^*
    const int Kb = prob.add_psd_block(d * eps, "K");
    ExprMatrix rhs = expr_zero(d * eps, d * eps);
    auto add_kron = [&](const Matrix& G, const ExprMatrix& E, Complex s) {
      for (int p = 0; p < d; ++p)
        for (int q = 0; q < d; ++q) {
          const Complex c = s * G(p, q);
          if (c == Complex(0.0)) continue;
          for (int a = 0; a < eps; ++a)
            for (int b = 0; b < eps; ++b)
              rhs[static_cast<std::size_t>(p * eps + a)][static_cast<std::size_t>(q * eps + b)] +=
                  c * E[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
        }
    };
    add_kron(Matrix::Identity(d, d), M0, 1.0);
    for (int j = 0; j < g; ++j) {
      const ExprMatrix Mj = prob.matrix(Lk[static_cast<std::size_t>(j)]);
      add_kron(L.A(j), Mj, -1.0);
      add_kron(L.A(j).adjoint(), adjoint(Mj), -1.0);
    }
    prob.add_matrix_equality(add(prob.matrix(Kb), scale(rhs, -1.0)), Matrix::Zero(d * eps, d * eps), true, "localize");
  }
  LinearExpr tr;
  for (int a = 0; a < eps; ++a) tr += prob.entry(L0, a, a);
  prob.add_equality(tr, 1.0, SdpProblem::Part::Real, "normalization");

  SdpOptions so = options.sdp();
  so.phase_two = false;
  SdpResult res;
  try {
    res = solve(prob, so);
  } catch (const Error&) {
    return std::nullopt;
  }
  if (res.status != SdpStatus::Feasible || !(res.phase_one_value > options.tol)) return std::nullopt;

  // Lambda0 = R^* R with R = S^{1/2} U^* on its range; X_j = S^{-1/2} U^* Lambda_j U S^{-1/2}.
  const Matrix G0 = hermitian_part(res.values[static_cast<std::size_t>(L0)]);
  Eigen::SelfAdjointEigenSolver<Matrix> es(G0);
  const double top = es.eigenvalues().maxCoeff();
  std::vector<int> keep;
  for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k)
    if (es.eigenvalues()(k) > options.tol * std::max(top, 1.0)) keep.push_back(static_cast<int>(k));
  if (keep.empty()) return std::nullopt;
  const int r = static_cast<int>(keep.size());
  Matrix T(eps, r);
  for (int i = 0; i < r; ++i)
    T.col(i) = es.eigenvectors().col(keep[static_cast<std::size_t>(i)]) /
               std::sqrt(es.eigenvalues()(keep[static_cast<std::size_t>(i)]));
  MatrixList X;
  for (int j = 0; j < g; ++j) X.push_back(T.adjoint() * res.values[static_cast<std::size_t>(Lk[static_cast<std::size_t>(j)])] * T);
  MatrixTuple tuple(std::move(X));
  return verified(Lt, L, std::move(tuple), "gns", options.tol);
}

// Newton steps on the smallest singular value, staying inside the domain.
MatrixTuple polish(const LinearPencil& Lt, const LinearPencil& L, MatrixTuple X, double margin) {
  const int n = X.n, delta = Lt.rows(), eps = Lt.cols(), g = Lt.g();
  auto sigma_of = [&](const MatrixTuple& Y) { return pencil_sigma_min(Lt, Y); };
  double sigma = sigma_of(X);
  for (int it = 0; it < 60 && sigma > 1e-14; ++it) {
    Eigen::JacobiSVD<Matrix> svd(Lt.evaluate(X), Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::Index last = svd.singularValues().size() - 1;
    const Vector u = svd.matrixU().col(last), v = svd.matrixV().col(last);
    Matrix Um(n, delta), Vm(n, eps);
    for (int p = 0; p < delta; ++p) Um.col(p) = u.segment(p * n, n);
    for (int q = 0; q < eps; ++q) Vm.col(q) = v.segment(q * n, n);
    MatrixList G;
    double norm2 = 0.0;
    for (int j = 0; j < g; ++j) {
      const Matrix W = Vm * Lt.coeff_x()[static_cast<std::size_t>(j)].transpose() * Um.adjoint();
      const Matrix Ws = Vm * Lt.coeff_xstar()[static_cast<std::size_t>(j)].transpose() * Um.adjoint();
      G.push_back(W.adjoint() + Ws);
      norm2 += G.back().squaredNorm();
    }
    if (norm2 < 1e-300) break;
    double step = sigma / norm2;
    bool moved = false;
    for (int bt = 0; bt < 30; ++bt, step *= 0.5) {
      MatrixList Y;
      for (int j = 0; j < g; ++j) Y.push_back(X.X[static_cast<std::size_t>(j)] - step * G[static_cast<std::size_t>(j)]);
      MatrixTuple cand(std::move(Y));
      if (!(pencil_min_eig(L, cand) > margin)) continue;
      const double s = sigma_of(cand);
      if (s < sigma) {
        X = std::move(cand);
        sigma = s;
        moved = true;
        break;
      }
    }
    if (!moved) break;
  }
  return X;
}

std::optional<Witness> scan_witness(const LinearPencil& Lt, const LinearPencil& L, const AnalysisOptions& options) {
  const int g = Lt.g();
  const int n = std::max({L.rows(), Lt.cols(), 1});
  Rng rng = substream(options.seed, "witness-scan");
  struct Sample {
    double sigma;
    MatrixTuple X;
  };
  std::vector<Sample> best;
  const std::size_t keep = 5;
  for (int s = 0; s < options.witness_samples; ++s) {
    MatrixTuple X = MatrixTuple::random(g, n, rng);
    double scale = uniform(rng, 0.0, 1.0);
    if (L.rows() > 0) {
      const double top = Eigen::SelfAdjointEigenSolver<Matrix>(domain_shift(L, X), Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();
      if (top > 0) scale /= top;
    }
    for (auto& m : X.X) m *= scale;
    const double sigma = pencil_sigma_min(Lt, X);
    best.push_back({sigma, std::move(X)});
    std::sort(best.begin(), best.end(), [](const Sample& a, const Sample& b) { return a.sigma < b.sigma; });
    if (best.size() > keep) best.pop_back();
  }
  std::optional<Witness> out;
  for (auto& cand : best) {
    const double start = pencil_min_eig(L, cand.X);
    const double margin = std::isfinite(start) ? std::max(10 * options.tol, std::min(1e-3, 0.5 * start)) : -1.0;
    auto w = verified(Lt, L, polish(Lt, L, cand.X, margin), "scan", options.tol);
    if (w && (!out || w->sigma_min < out->sigma_min)) out = std::move(w);
  }
  return out;
}

}  // namespace

std::optional<Witness> extract_witness(const LinearPencil& Ltilde, const LinearPencil& L, const AnalysisOptions& options) {
  if (!L.is_hermitian_monic()) throw Error(ErrorKind::InvalidInput, "extract_witness needs a hermitian monic domain");
  const LinearPencil Lt = Ltilde.rows() < Ltilde.cols() ? adjoint(Ltilde) : Ltilde;
  if (Lt.cols() == 0) return std::nullopt;
  if (options.use_gns)
    if (auto w = gns_witness(Lt, L, options)) return w;
  return scan_witness(Lt, L, options);
}

RankCheckOutcome full_rank_on_interior(const LinearPencil& Ltilde, const LinearPencil& L, const AnalysisOptions& options) {
  if (!L.is_hermitian_monic()) throw Error(ErrorKind::InvalidInput, "domain pencil must be hermitian monic");
  if (Ltilde.g() != L.g()) throw Error(ErrorKind::DimensionMismatch, "pencils differ in variable count");
  const bool flip = Ltilde.rows() < Ltilde.cols();
  const LinearPencil start = flip ? adjoint(Ltilde) : Ltilde;
  RankCheckOutcome out;
  LinearPencil cur = start;
  const SdpOptions so = options.sdp();
  for (int level = 1;; ++level) {
    RankCertificate cert = rank_certificate(cur, L, so);
    RankLevel rec;
    rec.level = level;
    rec.rows = cur.rows();
    rec.cols = cur.cols();
    rec.adjoint = flip;
    rec.status = cert.status;
    rec.D = cert.D;
    if (cert.status == SdpStatus::Marginal)
      throw MarginalSdpError("rank certificate undecided at level " + std::to_string(level) + ": " + cert.sdp.note, level);
    if (cert.status == SdpStatus::Infeasible) {
      out.chain.push_back(std::move(rec));
      out.result = RankResult::RankDeficient;
      // A kernel vector of the restricted pencil is one of the original.
      if (auto w = extract_witness(cur, L, options)) {
        w->sigma_min = pencil_sigma_min(start, w->X);
        out.witness = std::move(w);
      }
      return out;
    }
    if (cert.P0.rows() > 0) {
      Eigen::SelfAdjointEigenSolver<Matrix> es(cert.P0, Eigen::EigenvaluesOnly);
      const double thr = std::sqrt(options.tol) * std::max(es.eigenvalues().cwiseAbs().maxCoeff(), 1e-300);
      rec.p0_kernel_dim = static_cast<int>((es.eigenvalues().array() <= thr).count());
    }
    rec.kernel_dim = static_cast<int>(cert.kernel.cols());
    out.chain.push_back(rec);
    if (rec.kernel_dim == 0) {
      out.result = RankResult::FullRank;
      return out;
    }
    if (rec.kernel_dim >= cur.cols())
      throw MarginalSdpError("rank recursion did not reduce the column space at level " + std::to_string(level), level);
    cur = transform(Matrix::Identity(cur.rows(), cur.rows()), cur, cert.kernel);
  }
}

// ---- convexity pipeline

LinearPencil inverse_pencil(const RationalExpr& e, int g, double tol) {
  return pencil_of(minimize(realize_inverse(realize_expression(e, g, tol)), tol));
}

LinearPencil minimize_pencil(const std::vector<LinearPencil>& blocks, int g, const AnalysisOptions& options) {
  std::vector<int> order(blocks.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return blocks[static_cast<std::size_t>(a)].rows() > blocks[static_cast<std::size_t>(b)].rows(); });
  std::vector<bool> alive(blocks.size(), true);
  for (int i : order) {
    std::vector<LinearPencil> others;
    for (std::size_t j = 0; j < blocks.size(); ++j)
      if (alive[j] && static_cast<int>(j) != i) others.push_back(blocks[j]);
    if (others.empty()) continue;
    if (inclusion(direct_sum(others, g), blocks[static_cast<std::size_t>(i)], options.sdp()).included)
      alive[static_cast<std::size_t>(i)] = false;
  }
  std::vector<LinearPencil> kept;
  for (std::size_t j = 0; j < blocks.size(); ++j)
    if (alive[j]) kept.push_back(blocks[j]);
  return kept.empty() ? LinearPencil::empty(g) : direct_sum(kept, g);
}

ConvexityReport is_convex(const RationalExpr& e, const AnalysisOptions& options) {
  ConvexityReport rep;
  const int g = std::max({options.vars, max_variable(e), 1});
  rep.g = g;
  rep.delta = expression_size(e);
  const Realization r = contains_inverse(e) ? realize_with_inverse(e, g)
                                            : minimize(realize_inverse(realize_expression(e, g)));
  const LinearPencil L = pencil_of(r);
  rep.realization_size = L.rows();
  rep.realization_pencil = L;
  rep.Lhat = LinearPencil::empty(g);
  rep.Lcheck = LinearPencil::empty(g);
  if (L.rows() == 0) {
    rep.verdict = Verdict::Convex;
    rep.minimal_pencil = LinearPencil::empty(g);
    return rep;
  }

  Rng rng = substream(options.seed, "decomposition");
  const BlockDecomposition dec = burnside_decompose(L, rng);
  rep.triangularity_residual = dec.triangularity_residual;

  std::vector<int> irreducible;
  std::vector<LinearPencil> irr_pencils;
  for (std::size_t i = 0; i < dec.blocks.size(); ++i) {
    const DiagonalBlock& b = dec.blocks[i];
    BlockRecord br;
    br.offset = b.offset;
    br.size = b.size;
    br.kind = b.kind == BlockKind::Identity ? "identity" : "irreducible";
    rep.blocks.push_back(br);
    if (b.kind == BlockKind::Irreducible) {
      irreducible.push_back(static_cast<int>(i));
      irr_pencils.push_back(b.pencil);
    }
  }

  const auto classes = similarity_classes(irr_pencils, rng);
  std::vector<std::optional<LinearPencil>> herm(irr_pencils.size());
  for (std::size_t c = 0; c < classes.size(); ++c) {
    const auto hs = hermitian_similarity(irr_pencils[static_cast<std::size_t>(classes[c].representative)], options.sdp());
    for (int m : classes[c].members) {
      BlockRecord& br = rep.blocks[static_cast<std::size_t>(irreducible[static_cast<std::size_t>(m)])];
      br.similarity_class = static_cast<int>(c);
      br.hermitian_similar = hs.has_value();
      if (hs) {
        br.q_condition = condition_number(hs->Q);
        // Similar hermitian monic pencils are unitarily equivalent.
        herm[static_cast<std::size_t>(m)] = hs->pencil;
      }
    }
  }

  std::vector<LinearPencil> check_blocks;
  for (std::size_t m = 0; m < irr_pencils.size(); ++m) {
    if (herm[m])
      rep.Lhat_blocks.push_back(*herm[m]);
    else
      check_blocks.push_back(irr_pencils[m]);
  }
  if (!rep.Lhat_blocks.empty()) rep.Lhat = direct_sum(rep.Lhat_blocks, g);
  if (!check_blocks.empty()) rep.Lcheck = direct_sum(check_blocks, g);

  for (std::size_t i = 0; i < check_blocks.size(); ++i) {
    const LinearPencil flipped = adjoint(check_blocks[i]);
    bool paired = false;
    for (std::size_t j = 0; j < check_blocks.size() && !paired; ++j)
      if (check_blocks[j].rows() == flipped.rows()) paired = similar(flipped, check_blocks[j], rng).has_value();
    if (!paired)
      rep.warnings.push_back("block of size " + std::to_string(check_blocks[i].rows()) +
                             " has no adjoint-paired partner among the non-hermitian blocks");
  }

  if (check_blocks.empty()) {
    rep.verdict = Verdict::Convex;
  } else {
    rep.rank = full_rank_on_interior(rep.Lcheck, rep.Lhat, options);
    rep.witness = rep.rank->witness;
    rep.verdict = rep.rank->result == RankResult::FullRank ? Verdict::Convex : Verdict::NotConvex;
  }
  if (rep.verdict == Verdict::Convex) rep.minimal_pencil = minimize_pencil(rep.Lhat_blocks, g, options);
  return rep;
}

LinearPencil lmi_representation(const RationalExpr& e, const AnalysisOptions& options) {
  ConvexityReport rep = is_convex(e, options);
  if (rep.verdict != Verdict::Convex) throw Error(ErrorKind::NotConvex, "the invertibility set is not convex");
  return *rep.minimal_pencil;
}

// ---- scalar structure

namespace {

Word two_letter(int first, int second, int g) { return Word{letter_of_slot(first, g), letter_of_slot(second, g)}; }

int conj_slot(int a, int g) { return a < g ? a + g : a - g; }

Complex scalar_coef(const NcPoly& f, const Word& w) {
  const Matrix c = f.coefficient(w);
  return c.size() == 0 ? Complex(0.0) : c(0, 0);
}

}  // namespace

NcPoly schur_reconstruct(const SchurForm& s, int g) {
  NcPoly f = NcPoly::scalar(1.0, g);
  Matrix one(1, 1);
  for (int j = 0; j < g; ++j) {
    one(0, 0) = -s.alpha(j);
    f.add_term(Word{letter_of_slot(j, g)}, one);
    one(0, 0) = -std::conj(s.alpha(j));
    f.add_term(Word{letter_of_slot(j + g, g)}, one);
  }
  const int k = static_cast<int>(s.U.rows());
  if (k == 0) return f;
  Matrix W(k, 2 * g);
  W << s.U, s.V;
  const Matrix H = W.adjoint() * W;
  for (int a = 0; a < 2 * g; ++a)
    for (int b = 0; b < 2 * g; ++b) {
      one(0, 0) = -H(a, b);
      f.add_term(two_letter(conj_slot(a, g), b, g), one);
    }
  return f;
}

SchurForm schur_form(const NcPoly& f, double tol) {
  if (f.delta() != 1) throw Error(ErrorKind::InvalidInput, "schur_form needs a scalar polynomial");
  if (!is_hermitian(f, 1e-10)) throw Error(ErrorKind::InvalidInput, "schur_form needs a hermitian polynomial");
  if (std::abs(scalar_coef(f, {}) - 1.0) > 1e-10) throw Error(ErrorKind::InvalidInput, "schur_form needs f(0) = 1");
  if (!is_atom_scalar(f, tol)) throw Error(ErrorKind::NotAtom, "polynomial is not an atom");
  if (degree(f) > 2) throw Error(ErrorKind::NotConvex, "convex atoms have degree at most two");
  const int g = f.g();

  Matrix H(2 * g, 2 * g);
  for (int a = 0; a < 2 * g; ++a)
    for (int b = 0; b < 2 * g; ++b) H(a, b) = -scalar_coef(f, two_letter(conj_slot(a, g), b, g));
  H = hermitian_part(H);
  Eigen::SelfAdjointEigenSolver<Matrix> es(H);
  const double scale = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
  if (es.eigenvalues().minCoeff() < -tol * scale)
    throw Error(ErrorKind::NotConvex, "quadratic part is not negative semidefinite");
  std::vector<int> keep;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
    if (es.eigenvalues()(i) > tol * scale) keep.push_back(static_cast<int>(i));
  const int k = static_cast<int>(keep.size());
  // H = W^* W with W = S^{1/2} Q^*.
  Matrix W(k, 2 * g);
  for (int i = 0; i < k; ++i) {
    const int idx = keep[static_cast<std::size_t>(i)];
    W.row(i) = std::sqrt(es.eigenvalues()(idx)) * es.eigenvectors().col(idx).adjoint();
  }

  SchurForm s;
  s.alpha = Vector(g);
  for (int j = 0; j < g; ++j) s.alpha(j) = -scalar_coef(f, Word{letter_of_slot(j, g)});
  s.U = W.leftCols(g);
  s.V = W.rightCols(g);

  MatrixList cx, cs;
  for (int j = 0; j < g; ++j) {
    Matrix c = Matrix::Zero(1 + k, 1 + k);
    c(0, 0) = -s.alpha(j);
    if (k > 0) {
      c.block(0, 1, 1, k) = s.V.col(j).adjoint();
      c.block(1, 0, k, 1) = s.U.col(j);
    }
    cx.push_back(c);
    cs.push_back(c.adjoint());
  }
  s.pencil = LinearPencil(Matrix::Identity(1 + k, 1 + k), cx, cs);
  s.reconstruction_error = coefficient_distance(f, schur_reconstruct(s, g));
  if (s.reconstruction_error > 1e-8)
    throw Error(ErrorKind::StructureMismatch, "bordered form does not reproduce the polynomial");
  return s;
}

bool is_atom_scalar(const NcPoly& f, double tol) {
  if (f.delta() != 1) throw Error(ErrorKind::InvalidInput, "is_atom_scalar needs a scalar polynomial");
  const Realization r = minimize(realize_inverse(minimize(normalize(realize_polynomial(f)))));
  const LinearPencil L = pencil_of(r);
  if (L.rows() == 0) return false;
  return is_irreducible(L, tol);
}

LinearPencil make_flip_poly(const Vector& u, const std::vector<Vector>& v,
                            const std::vector<std::vector<std::optional<Complex>>>& overrides) {
  const int d = static_cast<int>(u.size());
  if (d == 0 || u.norm() == 0.0) throw Error(ErrorKind::InvalidInput, "u must be nonzero");
  if (v.empty()) throw Error(ErrorKind::InvalidInput, "at least one v_j is required");
  MatrixList A;
  for (std::size_t j = 0; j < v.size(); ++j) {
    if (v[j].size() != d) throw Error(ErrorKind::DimensionMismatch, "v_j and u differ in length");
    Vector vt(d);
    for (int k = 0; k < d; ++k) {
      if (u(k) != Complex(0.0)) {
        vt(k) = u(k) * std::conj(v[j](k)) / std::conj(u(k));
        continue;
      }
      const bool have = j < overrides.size() && static_cast<std::size_t>(k) < overrides[j].size() && overrides[j][static_cast<std::size_t>(k)];
      if (!have)
        throw Error(ErrorKind::MissingOverride,
                    "entry " + std::to_string(k + 1) + " of u is zero; v~ override missing for v" + std::to_string(j + 1));
      vt(k) = *overrides[j][static_cast<std::size_t>(k)];
    }
    const Matrix full = u * vt.adjoint() - v[j] * u.adjoint();
    Matrix N = Matrix::Zero(d, d);
    for (int a = 0; a < d; ++a)
      for (int b = a + 1; b < d; ++b) N(a, b) = full(a, b);
    A.push_back(N + v[j] * u.adjoint());
  }
  return LinearPencil::hermitian_monic(A);
}

double det_identity_check(const NcPoly& f, const LinearPencil& L, int trials, int levels, Rng& rng) {
  double worst = 0.0;
  for (int n = 1; n <= levels; ++n)
    for (int t = 0; t < trials; ++t) {
      MatrixTuple X = MatrixTuple::random(f.g(), n, rng);
      for (auto& m : X.X) m *= 0.5 / std::sqrt(static_cast<double>(n));
      const Complex df = evaluate(f, X).determinant();
      const Complex dl = L.rows() == 0 ? Complex(1.0) : Complex(L.evaluate(X).determinant());
      const double scale = std::max({std::abs(df), std::abs(dl), 1e-300});
      worst = std::max(worst, std::abs(df - dl) / scale);
    }
  return worst;
}

}  // namespace freeconvex
