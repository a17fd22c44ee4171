#include "freeconvex/json_io.hpp"

#include <cmath>
#include <string>

#include "freeconvex/algebra.hpp"
#include "freeconvex/errors.hpp"

namespace freeconvex {

namespace {

[[noreturn]] void bad(const std::string& what) { throw Error(ErrorKind::InvalidInput, "malformed JSON: " + what); }

const Json& field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) bad(std::string("missing field \"") + key + "\"");
  return j.at(key);
}

int int_field(const Json& j, const char* key) {
  const Json& v = field(j, key);
  if (!v.is_number_integer()) bad(std::string("field \"") + key + "\" must be an integer");
  const auto x = v.get<long long>();
  if (x < 0 || x > 1000000) bad(std::string("field \"") + key + "\" out of range");
  return static_cast<int>(x);
}

MatrixList matrices_from_json(const Json& j, std::size_t count, int rows, int cols, const char* what) {
  if (!j.is_array() || j.size() != count) bad(std::string(what) + " must list " + std::to_string(count) + " matrices");
  MatrixList out;
  for (const auto& m : j) {
    Matrix x = matrix_from_json(m);
    if (x.rows() != rows || x.cols() != cols) {
      // [] or [[], ...] cannot carry both dimensions of an empty matrix.
      if (x.size() != 0 || static_cast<Eigen::Index>(rows) * cols != 0) bad(std::string(what) + " has a wrong shape");
      x = Matrix::Zero(rows, cols);
    }
    out.push_back(std::move(x));
  }
  return out;
}

Json list(const MatrixList& ms) {
  Json a = Json::array();
  for (const auto& m : ms) a.push_back(to_json(m));
  return a;
}

Json finite_or_null(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

}  // namespace

Json to_json(Complex z) { return Json::array({z.real(), z.imag()}); }

Json to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(to_json(m(i, k)));
    rows.push_back(std::move(row));
  }
  return rows;
}

Complex complex_from_json(const Json& j) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) bad("complex numbers are [re, im]");
  return {j[0].get<double>(), j[1].get<double>()};
}

Matrix matrix_from_json(const Json& j) {
  if (!j.is_array()) bad("matrix must be a list of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  if (rows == 0) return Matrix(0, 0);
  if (!j[0].is_array()) bad("matrix rows must be lists");
  const auto cols = static_cast<Eigen::Index>(j[0].size());
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const Json& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) bad("ragged matrix");
    for (Eigen::Index k = 0; k < cols; ++k) m(i, k) = complex_from_json(row[static_cast<std::size_t>(k)]);
  }
  return m;
}

Vector vector_from_json(const Json& j) {
  if (!j.is_array()) bad("vector must be a list");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = complex_from_json(j[i]);
  return v;
}

// ---- NcPoly

Json to_json(const NcPoly& p) {
  Json terms = Json::array();
  for (const auto& [w, c] : p.terms()) {
    Json word = Json::array();
    for (const auto& l : w) word.push_back(Json::array({l.var, l.starred}));
    terms.push_back({{"word", word}, {"coeff", to_json(c)}});
  }
  return {{"delta", p.delta()}, {"g", p.g()}, {"terms", terms}};
}

NcPoly ncpoly_from_json(const Json& j) {
  const int delta = int_field(j, "delta"), g = int_field(j, "g");
  if (delta < 1 || g < 1) bad("delta and g must be positive");
  NcPoly p(delta, g);
  const Json& terms = field(j, "terms");
  if (!terms.is_array()) bad("terms must be a list");
  for (const auto& t : terms) {
    const Json& wj = field(t, "word");
    if (!wj.is_array()) bad("word must be a list");
    Word w;
    for (const auto& l : wj) {
      if (!l.is_array() || l.size() != 2 || !l[0].is_number_integer() || !l[1].is_boolean()) bad("letters are [var, starred]");
      const int var = l[0].get<int>();
      if (var < 1 || var > g) bad("letter variable out of range");
      w.push_back({var, l[1].get<bool>()});
    }
    const Matrix c = matrix_from_json(field(t, "coeff"));
    if (c.rows() != delta || c.cols() != delta) bad("coefficient shape differs from delta");
    p.add_term(w, c);
  }
  return p;
}

// ---- Realization

Json to_json(const Realization& r) {
  MatrixList b;
  for (const auto& m : r.b) b.push_back(m);
  Json j = {{"delta", r.delta}, {"g", r.g}, {"d", r.d()}, {"A", list(r.A)}, {"b", list(b)}, {"c", to_json(r.c)}};
  if (!r.is_normalized()) j["D"] = to_json(r.D);
  return j;
}

Realization realization_from_json(const Json& j) {
  Realization r;
  r.delta = int_field(j, "delta");
  r.g = int_field(j, "g");
  const int d = int_field(j, "d");
  if (r.delta < 1 || r.g < 1) bad("delta and g must be positive");
  const auto slots = static_cast<std::size_t>(2 * r.g);
  r.A = matrices_from_json(field(j, "A"), slots, d, d, "A");
  r.b = matrices_from_json(field(j, "b"), slots, d, r.delta, "b");
  r.c = matrix_from_json(field(j, "c"));
  if (d == 0) r.c = Matrix::Zero(0, r.delta);
  if (r.c.rows() != d || r.c.cols() != r.delta) bad("c must be d x delta");
  r.D = j.contains("D") ? matrix_from_json(j.at("D")) : Matrix(Matrix::Identity(r.delta, r.delta));
  if (r.D.rows() != r.delta || r.D.cols() != r.delta) bad("D must be delta x delta");
  return r;
}

// ---- LinearPencil

Json to_json(const LinearPencil& L) {
  return {{"rows", L.rows()},
          {"cols", L.cols()},
          {"g", L.g()},
          {"constant", to_json(L.constant())},
          {"coeff_x", list(L.coeff_x())},
          {"coeff_xstar", list(L.coeff_xstar())},
          {"monic", L.is_monic()},
          {"hermitian", L.is_hermitian_monic()}};
}

LinearPencil pencil_from_json(const Json& j) {
  const int rows = int_field(j, "rows"), cols = int_field(j, "cols"), g = int_field(j, "g");
  if (g < 1) bad("g must be positive");
  Matrix c = matrix_from_json(field(j, "constant"));
  if (c.size() == 0) c = Matrix::Zero(rows, cols);
  if (c.rows() != rows || c.cols() != cols) bad("constant has a wrong shape");
  MatrixList cx = matrices_from_json(field(j, "coeff_x"), static_cast<std::size_t>(g), rows, cols, "coeff_x");
  MatrixList cs = matrices_from_json(field(j, "coeff_xstar"), static_cast<std::size_t>(g), rows, cols, "coeff_xstar");
  return LinearPencil(std::move(c), std::move(cx), std::move(cs));
}

// ---- points

Json to_json(const MatrixTuple& X) { return {{"n", X.n}, {"X", list(X.X)}}; }

MatrixTuple tuple_from_json(const Json& j) {
  const int n = int_field(j, "n");
  const Json& xs = field(j, "X");
  if (!xs.is_array() || xs.empty()) bad("X must list g >= 1 matrices");
  MatrixList mats = matrices_from_json(xs, xs.size(), n, n, "X");
  MatrixTuple t(std::move(mats));
  t.n = n;
  return t;
}

// ---- reports

Json to_json(const Witness& w) {
  return {{"method", w.method},
          {"point", to_json(w.X)},
          {"sigma_min", w.sigma_min},
          {"domain_min_eigenvalue", finite_or_null(w.domain_min_eig)}};
}

Json to_json(const RankLevel& level) {
  return {{"level", level.level},
          {"rows", level.rows},
          {"cols", level.cols},
          {"adjoint", level.adjoint},
          {"status", status_name(level.status)},
          {"p0_kernel_dim", level.p0_kernel_dim},
          {"kernel_dim", level.kernel_dim},
          {"D", to_json(level.D)}};
}

Json to_json(const RankCheckOutcome& out) {
  Json chain = Json::array();
  for (const auto& l : out.chain) chain.push_back(to_json(l));
  return {{"result", rank_result_name(out.result)},
          {"chain", chain},
          {"witness", out.witness ? to_json(*out.witness) : Json(nullptr)}};
}

Json to_json(const SdpRecord& rec) {
  const SdpProblem& p = rec.problem;
  Json blocks = Json::array();
  for (const auto& b : p.blocks())
    blocks.push_back({{"name", b.name}, {"psd", b.psd}, {"rows", b.rows}, {"cols", b.cols}, {"offset", b.offset}});
  Json rows = Json::array();
  for (const auto& r : p.rows()) {
    Json coeffs = Json::array();
    for (const auto& [q, c] : r.coeffs) coeffs.push_back(Json::array({q, c}));
    rows.push_back({{"label", r.label}, {"coeffs", coeffs}, {"rhs", r.rhs}});
  }
  const SdpResult& s = rec.result;
  Json dual = Json::array();
  for (Eigen::Index i = 0; i < s.dual.size(); ++i) dual.push_back(finite_or_null(s.dual(i)));
  Json result = {{"status", status_name(s.status)},
                 {"values", list(s.values)},
                 {"dual", dual},
                 {"phase_one_value", finite_or_null(s.phase_one_value)},
                 {"equality_residual", finite_or_null(s.equality_residual)},
                 {"min_eigenvalue", finite_or_null(s.min_eigenvalue)},
                 {"certificate_margin", finite_or_null(s.certificate_margin)},
                 {"iterations", s.iterations},
                 {"objective_optimized", s.objective_optimized},
                 {"note", s.note}};
  return {{"tag", p.tag()},
          {"num_params", p.num_params()},
          {"blocks", blocks},
          {"rows", rows},
          {"objective", p.has_objective() ? Json(p.objective()) : Json(nullptr)},
          {"result", result}};
}

Json to_json(const ConvexityReport& rep, double tol, std::uint64_t seed) {
  Json blocks = Json::array();
  for (const auto& b : rep.blocks)
    blocks.push_back({{"offset", b.offset},
                      {"size", b.size},
                      {"kind", b.kind},
                      {"similarity_class", b.similarity_class},
                      {"hermitian_similar", b.hermitian_similar},
                      {"q_condition", b.kind == "irreducible" && b.hermitian_similar ? Json(b.q_condition) : Json(nullptr)}});
  Json trace = Json::array();
  if (rep.rank)
    for (const auto& l : rep.rank->chain) trace.push_back(to_json(l));
  return {{"verdict", verdict_name(rep.verdict)},
          {"g", rep.g},
          {"delta", rep.delta},
          {"realization_size", rep.realization_size},
          {"minimal_pencil", rep.minimal_pencil ? to_json(*rep.minimal_pencil) : Json(nullptr)},
          {"Lhat", to_json(rep.Lhat)},
          {"Lcheck", to_json(rep.Lcheck)},
          {"blocks", blocks},
          {"triangularity_residual", rep.triangularity_residual},
          {"rank_result", rep.rank ? Json(rank_result_name(rep.rank->result)) : Json(nullptr)},
          {"rank_trace", trace},
          {"witness", rep.witness ? to_json(*rep.witness) : Json(nullptr)},
          {"warnings", rep.warnings},
          {"tolerances", {{"sdp", tol}, {"rank", kRankTol}, {"algebra", kAlgebraTol}}},
          {"seed", seed}};
}

}  // namespace freeconvex
