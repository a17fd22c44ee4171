#pragma once
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "freeconvex/pencil.hpp"
#include "freeconvex/types.hpp"

namespace freeconvex {

// Complex-valued, real-linear expression in the real parameters of a problem.
struct LinearExpr {
  std::vector<std::pair<int, Complex>> terms;
  Complex constant{0.0, 0.0};

  LinearExpr() = default;
  explicit LinearExpr(Complex c) : constant(c) {}

  LinearExpr& operator+=(const LinearExpr& o);
  LinearExpr& operator-=(const LinearExpr& o);
  LinearExpr& operator*=(Complex s);
  // Merges repeated parameters and drops exact zeros.
  void compact();
};

LinearExpr operator+(LinearExpr a, const LinearExpr& b);
LinearExpr operator-(LinearExpr a, const LinearExpr& b);
LinearExpr operator*(Complex s, LinearExpr a);
LinearExpr conj(const LinearExpr& e);

using ExprMatrix = std::vector<std::vector<LinearExpr>>;

ExprMatrix expr_zero(int rows, int cols);
// (constant matrix) * (expression matrix) and variants.
ExprMatrix mul(const Matrix& a, const ExprMatrix& e);
ExprMatrix mul(const ExprMatrix& e, const Matrix& a);
ExprMatrix adjoint(const ExprMatrix& e);
ExprMatrix add(const ExprMatrix& a, const ExprMatrix& b);
ExprMatrix scale(const ExprMatrix& a, Complex s);

class SdpProblem {
 public:
  struct Block {
    std::string name;
    bool psd = false;
    int rows = 0;
    int cols = 0;
    int offset = 0;  // first parameter index
    int num_params() const { return psd ? rows * rows : 2 * rows * cols; }
  };
  struct Row {
    std::vector<std::pair<int, double>> coeffs;
    double rhs = 0.0;
    std::string label;
  };
  enum class Part { Both, Real, Imag };

  // Hermitian PSD n x n block; parameters: diagonal, then Re/Im of the upper triangle.
  int add_psd_block(int n, std::string name = "");
  // Unconstrained complex rows x cols block; parameters: Re/Im per entry.
  int add_free_block(int rows, int cols, std::string name = "");

  LinearExpr entry(int block, int r, int c) const;
  ExprMatrix matrix(int block) const;

  // Real-linear equality expr = rhs, split into real and imaginary rows.
  void add_equality(const LinearExpr& expr, Complex rhs = 0.0, Part part = Part::Both, const std::string& label = "");
  // Entrywise equality of matrices; hermitian=true uses the upper triangle only.
  void add_matrix_equality(const ExprMatrix& lhs, const Matrix& rhs, bool hermitian, const std::string& label = "");
  // Minimize Re(expr).
  void set_objective(const LinearExpr& expr);

  const std::string& tag() const { return tag_; }
  void set_tag(std::string tag) { tag_ = std::move(tag); }

  const std::vector<Block>& blocks() const { return blocks_; }
  const std::vector<Row>& rows() const { return rows_; }
  const std::vector<double>& objective() const { return objective_; }
  bool has_objective() const { return has_objective_; }
  int num_params() const { return num_params_; }

  // Block values from a parameter vector and back.
  MatrixList unpack(const RealVector& params) const;
  RealVector pack(const MatrixList& values) const;

 private:
  std::vector<Block> blocks_;
  std::vector<Row> rows_;
  std::vector<double> objective_;
  bool has_objective_ = false;
  int num_params_ = 0;
  std::string tag_;
};

enum class SdpStatus { Feasible, Infeasible, Marginal };
const char* status_name(SdpStatus s);

struct SdpResult;
struct SdpRecord;

struct SdpOptions {
  double tol = 1e-8;
  int max_iterations = 150;
  double trace_bound = 1e6;
  int max_parameters = 5000;
  bool phase_two = true;
  std::vector<SdpRecord>* log = nullptr;  // every solved problem is appended when set
};

struct SdpResult {
  SdpStatus status = SdpStatus::Marginal;
  MatrixList values;     // per block
  RealVector dual;       // per equality row; separating functional when infeasible
  double phase_one_value = 0.0;   // optimal min-eigenvalue slack t
  double equality_residual = 0.0;
  double min_eigenvalue = 0.0;    // over PSD blocks
  double certificate_margin = 0.0;  // -lambda.b / tr(sum lambda_i A_i), infeasible only
  int iterations = 0;
  bool objective_optimized = false;
  std::string note;
};

struct SdpRecord {
  SdpProblem problem;
  SdpResult result;
};

SdpResult solve(const SdpProblem& problem, const SdpOptions& options = {});

// Independent checks (no solver state).
double equality_residual(const SdpProblem& problem, const MatrixList& values);
double min_psd_eigenvalue(const SdpProblem& problem, const MatrixList& values);
bool verify_feasible(const SdpProblem& problem, const MatrixList& values, double tol);
// Returns the normalized margin when lambda separates (nullopt otherwise).
std::optional<double> verify_infeasible(const SdpProblem& problem, const RealVector& lambda, double tol);

// Phi_G(M)[a,b] = sum_{p,q} G[p,q] M[(q,b),(p,a)], pair (p,a) -> p + d*a, M of size d*eps.
Matrix contract(const Matrix& G, const Matrix& M, int d, int eps);
ExprMatrix contract(const Matrix& G, const ExprMatrix& M, int d, int eps);
// sum_k vec(C_k) vec(C_k)^*.
Matrix moment_block(const MatrixList& C);

struct HermitianSimilarity {
  Matrix Q;
  LinearPencil pencil;
  SdpResult sdp;
};
// nullopt when Q >= I with Q B_k^* = A_k Q is infeasible; throws MarginalSdp when undecided.
std::optional<HermitianSimilarity> hermitian_similarity(const LinearPencil& L, const SdpOptions& options = {});

struct InclusionResult {
  bool included = false;
  SdpResult sdp;
};
InclusionResult inclusion(const LinearPencil& LA, const LinearPencil& LB, const SdpOptions& options = {});

struct RankCertificate {
  SdpStatus status = SdpStatus::Marginal;
  Matrix D;      // eps x delta
  Matrix P0;     // eps x eps
  Matrix M;      // d eps x d eps
  Matrix kernel; // orthonormal basis of ker(P0 + Phi_I(M))
  SdpResult sdp;
};
RankCertificate rank_certificate(const LinearPencil& Ltilde, const LinearPencil& L, const SdpOptions& options = {});

}  // namespace freeconvex
