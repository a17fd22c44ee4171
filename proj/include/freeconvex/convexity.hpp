#pragma once
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "freeconvex/ncpoly.hpp"
#include "freeconvex/parser.hpp"
#include "freeconvex/pencil.hpp"
#include "freeconvex/random.hpp"
#include "freeconvex/sdp.hpp"

namespace freeconvex {

struct AnalysisOptions {
  double tol = 1e-8;
  std::uint64_t seed = 0;
  int vars = 0;               // 0: infer from the expression
  bool use_gns = true;
  int witness_samples = 1000;
  std::vector<SdpRecord>* sdp_log = nullptr;

  SdpOptions sdp() const;
};

// ---- rank recursion

enum class RankResult { FullRank, RankDeficient };
const char* rank_result_name(RankResult r);

struct RankLevel {
  int level = 1;
  int rows = 0;
  int cols = 0;
  bool adjoint = false;       // the level ran on the adjoint pencil
  SdpStatus status = SdpStatus::Marginal;
  int p0_kernel_dim = 0;
  int kernel_dim = 0;         // dim V
  Matrix D;
};

struct Witness {
  MatrixTuple X;
  std::string method;         // "gns" or "scan"
  double sigma_min = 0.0;     // smallest singular value of the tested pencil at X
  double domain_min_eig = 0.0;
};

struct RankCheckOutcome {
  RankResult result = RankResult::FullRank;
  std::vector<RankLevel> chain;
  std::optional<Witness> witness;
};

RankCheckOutcome full_rank_on_interior(const LinearPencil& Ltilde, const LinearPencil& L,
                                       const AnalysisOptions& options = {});

// Point of int D_L where Ltilde (rows >= cols) drops rank; best effort.
std::optional<Witness> extract_witness(const LinearPencil& Ltilde, const LinearPencil& L,
                                       const AnalysisOptions& options = {});

// Smallest singular value of a (tall) pencil at X and smallest eigenvalue of a hermitian pencil at X.
double pencil_sigma_min(const LinearPencil& L, const MatrixTuple& X);
double pencil_min_eig(const LinearPencil& L, const MatrixTuple& X);

// ---- convexity pipeline

enum class Verdict { Convex, NotConvex };
const char* verdict_name(Verdict v);

struct BlockRecord {
  int offset = 0;
  int size = 0;
  std::string kind;           // "irreducible" or "identity"
  int similarity_class = -1;
  bool hermitian_similar = false;
  double q_condition = 0.0;
};

struct ConvexityReport {
  Verdict verdict = Verdict::Convex;
  int g = 1;
  int delta = 1;
  int realization_size = 0;
  LinearPencil realization_pencil;
  LinearPencil Lhat;
  LinearPencil Lcheck;
  std::vector<LinearPencil> Lhat_blocks;
  std::optional<LinearPencil> minimal_pencil;
  std::vector<BlockRecord> blocks;
  double triangularity_residual = 0.0;
  std::optional<RankCheckOutcome> rank;
  std::optional<Witness> witness;
  std::vector<std::string> warnings;
};

ConvexityReport is_convex(const RationalExpr& e, const AnalysisOptions& options = {});
LinearPencil lmi_representation(const RationalExpr& e, const AnalysisOptions& options = {});

// Drops block i when the spectrahedron of the others lies inside D_{block i}; largest first.
LinearPencil minimize_pencil(const std::vector<LinearPencil>& blocks, int g, const AnalysisOptions& options = {});

// Pencil of the minimal realization of f^{-1} (f normalized to f(0) = I).
LinearPencil inverse_pencil(const RationalExpr& e, int g, double tol = 1e-8);

// ---- scalar structure

struct SchurForm {
  Vector alpha;               // g
  Matrix U;                   // k x g, column j is u_j
  Matrix V;                   // k x g, column j is v_j
  LinearPencil pencil;        // [[1 - alpha.x - conj(alpha).x*, (u.x + v.x*)^*], [u.x + v.x*, I]]
  double reconstruction_error = 0.0;
};

SchurForm schur_form(const NcPoly& f, double tol = 1e-8);
NcPoly schur_reconstruct(const SchurForm& s, int g);
bool is_atom_scalar(const NcPoly& f, double tol = 1e-8);

// u in C^d, v_j in C^d; overrides[j][k] used where u[k] == 0.
LinearPencil make_flip_poly(const Vector& u, const std::vector<Vector>& v,
                            const std::vector<std::vector<std::optional<Complex>>>& overrides = {});

double det_identity_check(const NcPoly& f, const LinearPencil& L, int trials, int levels, Rng& rng);

}  // namespace freeconvex
