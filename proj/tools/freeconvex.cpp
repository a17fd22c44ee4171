#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "freeconvex/convexity.hpp"
#include "freeconvex/errors.hpp"
#include "freeconvex/json_io.hpp"
#include "freeconvex/parser.hpp"
#include "freeconvex/realization.hpp"

using namespace freeconvex;

namespace {

enum Exit { kOk = 0, kUsage = 1, kNumeric = 2, kNegative = 3, kMarginal = 4 };

struct Config {
  std::string input;
  std::string pencil_file;
  std::string domain_file;
  std::string point_file;
  int vars = 0;
  double tol = 1e-8;
  std::uint64_t seed = 0;
  int trials = 20;
  int max_level = 4;
  bool json = false;
  bool text = false;
  bool dump_sdp = false;
  bool no_gns = false;
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Inline text unless it names an existing file.
std::string input_text(const std::string& arg) {
  std::ifstream probe(arg);
  return probe.good() ? read_file(arg) : arg;
}

Json read_json(const std::string& arg) {
  try {
    return Json::parse(input_text(arg));
  } catch (const Json::parse_error& e) {
    throw UsageError("invalid JSON in " + arg + ": " + e.what());
  }
}

AnalysisOptions analysis_options(const Config& cfg, std::vector<SdpRecord>* log) {
  AnalysisOptions o;
  o.tol = cfg.tol;
  o.seed = cfg.seed;
  o.vars = cfg.vars;
  o.use_gns = !cfg.no_gns;
  o.sdp_log = log;
  return o;
}

void attach_log(Json& out, const Config& cfg, const std::vector<SdpRecord>& log) {
  if (!cfg.dump_sdp) return;
  Json a = Json::array();
  for (const auto& r : log) a.push_back(to_json(r));
  out["sdp_log"] = a;
}

void emit(const Json& j) { std::cout << j.dump(2) << '\n'; }

// Display only: 12 significant digits, negligible parts dropped.
double tidy(double v, double scale) {
  if (std::abs(v) <= 1e-12 * scale) return 0.0;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return std::strtod(buf, nullptr);
}

Matrix tidy(const Matrix& m, double scale) {
  Matrix out = m;
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index k = 0; k < m.cols(); ++k) out(i, k) = Complex(tidy(m(i, k).real(), scale), tidy(m(i, k).imag(), scale));
  return out;
}

std::string describe(const LinearPencil& L) {
  if (L.rows() == 0) return "(size 0)";
  if (L.rows() != L.cols()) return "(" + std::to_string(L.rows()) + "x" + std::to_string(L.cols()) + ")";
  const double scale = std::max(1.0, coefficient_scale(L));
  MatrixList cx, cs;
  for (int j = 0; j < L.g(); ++j) {
    cx.push_back(tidy(L.coeff_x()[static_cast<std::size_t>(j)], scale));
    cs.push_back(tidy(L.coeff_xstar()[static_cast<std::size_t>(j)], scale));
  }
  return format(LinearPencil(tidy(L.constant(), scale), cx, cs).to_polynomial());
}

std::string describe(const MatrixTuple& X) {
  std::ostringstream os;
  os.precision(6);
  for (int j = 0; j < X.g(); ++j) os << "  X" << j + 1 << " =\n" << X.X[static_cast<std::size_t>(j)] << '\n';
  return os.str();
}

// ---- commands

int cmd_analyze(const Config& cfg) {
  const RationalExpr e = parse(input_text(cfg.input));
  std::vector<SdpRecord> log;
  const ConvexityReport rep = is_convex(e, analysis_options(cfg, cfg.dump_sdp ? &log : nullptr));
  std::optional<double> det_err;
  if (!contains_inverse(e)) {
    Rng rng = substream(cfg.seed, "det-check");
    det_err = det_identity_check(to_polynomial(e, rep.g), rep.realization_pencil, cfg.trials, cfg.max_level, rng);
  }
  const int code = rep.verdict == Verdict::Convex ? kOk : kNegative;
  if (cfg.text) {
    std::cout << "verdict: " << verdict_name(rep.verdict) << '\n'
              << "variables: " << rep.g << ", output size: " << rep.delta << '\n'
              << "realization size: " << rep.realization_size << '\n';
    for (const auto& b : rep.blocks) {
      std::cout << "block at " << b.offset << ": size " << b.size << ", " << b.kind;
      if (b.kind == "irreducible")
        std::cout << ", class " << b.similarity_class << (b.hermitian_similar ? ", hermitian-similar" : ", not hermitian-similar");
      std::cout << '\n';
    }
    if (rep.rank) {
      for (const auto& l : rep.rank->chain)
        std::cout << "rank level " << l.level << ": " << l.rows << "x" << l.cols << ", " << status_name(l.status)
                  << ", kernel dim " << l.kernel_dim << '\n';
    }
    if (det_err) std::cout << "det identity max relative error: " << *det_err << '\n';
    if (rep.minimal_pencil)
      std::cout << "minimal pencil size: " << rep.minimal_pencil->rows() << '\n'
                << "minimal pencil: " << describe(*rep.minimal_pencil) << '\n';
    if (rep.witness) std::cout << "witness (" << rep.witness->method << "):\n" << describe(rep.witness->X);
    for (const auto& w : rep.warnings) std::cout << "warning: " << w << '\n';
    return code;
  }
  Json out = to_json(rep, cfg.tol, cfg.seed);
  out["det_identity"] = det_err ? Json{{"trials", cfg.trials}, {"levels", cfg.max_level}, {"max_relative_error", *det_err}}
                                : Json(nullptr);
  attach_log(out, cfg, log);
  emit(out);
  return code;
}

int cmd_lmi(const Config& cfg) {
  const RationalExpr e = parse(input_text(cfg.input));
  std::vector<SdpRecord> log;
  const ConvexityReport rep = is_convex(e, analysis_options(cfg, cfg.dump_sdp ? &log : nullptr));
  if (rep.verdict != Verdict::Convex) {
    std::cerr << "freeconvex: not convex; no LMI representation\n";
    return kNegative;
  }
  if (cfg.text) {
    std::cout << "size " << rep.minimal_pencil->rows() << ": " << describe(*rep.minimal_pencil) << '\n';
    return kOk;
  }
  Json out = to_json(*rep.minimal_pencil);
  attach_log(out, cfg, log);
  emit(out);
  return kOk;
}

int cmd_rankcheck(const Config& cfg) {
  const LinearPencil Lt = pencil_from_json(read_json(cfg.pencil_file));
  const LinearPencil L = pencil_from_json(read_json(cfg.domain_file));
  if (!L.is_hermitian_monic()) throw UsageError("domain pencil must be hermitian monic");
  if (Lt.g() != L.g()) throw UsageError("pencil and domain differ in variable count");
  std::vector<SdpRecord> log;
  const RankCheckOutcome out = full_rank_on_interior(Lt, L, analysis_options(cfg, cfg.dump_sdp ? &log : nullptr));
  const int code = out.result == RankResult::FullRank ? kOk : kNegative;
  if (cfg.text) {
    std::cout << "result: " << rank_result_name(out.result) << '\n';
    for (const auto& l : out.chain)
      std::cout << "level " << l.level << ": " << l.rows << "x" << l.cols << (l.adjoint ? " (adjoint)" : "") << ", "
                << status_name(l.status) << ", P0 kernel dim " << l.p0_kernel_dim << ", kernel dim " << l.kernel_dim << '\n';
    if (out.witness)
      std::cout << "witness (" << out.witness->method << "), sigma_min " << out.witness->sigma_min << ":\n"
                << describe(out.witness->X);
    return code;
  }
  Json j = to_json(out);
  attach_log(j, cfg, log);
  emit(j);
  return code;
}

int cmd_realize(const Config& cfg) {
  const RationalExpr e = parse(input_text(cfg.input));
  const int g = std::max({cfg.vars, max_variable(e), 1});
  const Realization r = realize_expression(e, g);
  if (cfg.text) {
    std::cout << "minimal realization: state size " << r.d() << ", output size " << r.delta << ", variables " << r.g << '\n';
    return kOk;
  }
  emit(to_json(r));
  return kOk;
}

int cmd_genflip(const Config& cfg) {
  const Json in = read_json(cfg.input);
  if (!in.is_object() || !in.contains("u") || !in.contains("v")) throw UsageError("genflip input needs \"u\" and \"v\"");
  const Vector u = vector_from_json(in.at("u"));
  std::vector<Vector> v;
  if (!in.at("v").is_array()) throw UsageError("\"v\" must list g vectors");
  for (const auto& vj : in.at("v")) v.push_back(vector_from_json(vj));
  std::vector<std::vector<std::optional<Complex>>> overrides;
  if (in.contains("overrides")) {
    for (const auto& row : in.at("overrides")) {
      std::vector<std::optional<Complex>> r;
      if (!row.is_array()) throw UsageError("\"overrides\" rows must be lists");
      for (const auto& z : row) r.push_back(z.is_null() ? std::nullopt : std::optional<Complex>(complex_from_json(z)));
      overrides.push_back(std::move(r));
    }
  }
  const LinearPencil L = make_flip_poly(u, v, overrides);
  if (cfg.text) {
    std::cout << "size " << L.rows() << ": " << describe(L) << '\n';
    return kOk;
  }
  emit(to_json(L));
  return kOk;
}

int cmd_eval(const Config& cfg) {
  const RationalExpr e = parse(input_text(cfg.input));
  const MatrixTuple X = tuple_from_json(read_json(cfg.point_file));
  const int g = std::max({cfg.vars, max_variable(e), X.g()});
  if (X.g() != g) throw UsageError("point has " + std::to_string(X.g()) + " matrices, expression needs " + std::to_string(g));
  const Matrix value = contains_inverse(e) ? evaluate(build_realization(e, g), X) : evaluate(to_polynomial(e, g), X);
  if (cfg.text) {
    std::cout << value << '\n';
    return kOk;
  }
  emit({{"n", X.n}, {"rows", value.rows()}, {"cols", value.cols()}, {"value", to_json(value)}});
  return kOk;
}

int exit_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::MarginalSdp:
      return kMarginal;
    case ErrorKind::NotConvex:
      return kNegative;
    case ErrorKind::IterationLimit:
    case ErrorKind::NumericalBreakdown:
    case ErrorKind::NumericalRankAmbiguity:
    case ErrorKind::NotMinimal:
    case ErrorKind::StructureMismatch:
      return kNumeric;
    default:
      return kUsage;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Convexity analysis of free invertibility sets"};
  app.require_subcommand(1);
  Config cfg;
  if (const char* env = std::getenv("FREECONVEX_SEED")) {
    try {
      std::size_t used = 0;
      cfg.seed = std::stoull(env, &used);
      if (used != std::string(env).size()) throw std::invalid_argument(env);
    } catch (const std::exception&) {
      std::cerr << "freeconvex: FREECONVEX_SEED must be a non-negative integer\n";
      return kUsage;
    }
  }

  auto common = [&](CLI::App* sub) {
    sub->add_option("--vars", cfg.vars, "Number of variables (default: inferred)")->check(CLI::NonNegativeNumber);
    sub->add_option("--tol", cfg.tol, "Solver tolerance in (0, 1e-2]")
        ->check(CLI::Validator(
            [](std::string& s) {
              double t = 0;
              try {
                t = std::stod(s);
              } catch (const std::exception&) {
                return std::string("not a number");
              }
              return t > 0 && t <= 1e-2 ? std::string() : std::string("tol must lie in (0, 1e-2]");
            },
            "(0, 1e-2]"));
    sub->add_option("--seed", cfg.seed, "Base seed (default: $FREECONVEX_SEED or 0)");
    sub->add_option("--trials", cfg.trials, "Random tuples per level for determinant checks")->check(CLI::PositiveNumber);
    sub->add_option("--max-level", cfg.max_level, "Largest matrix size for determinant checks")->check(CLI::PositiveNumber);
    auto* j = sub->add_flag("--json", cfg.json, "JSON output (default)");
    auto* t = sub->add_flag("--text", cfg.text, "Plain-text output");
    j->excludes(t);
    sub->add_flag("--dump-sdp", cfg.dump_sdp, "Include every solved SDP in the JSON output");
    sub->add_flag("--no-gns", cfg.no_gns, "Find witnesses by random scan only");
  };

  auto* analyze = app.add_subcommand("analyze", "Decide convexity and report the LMI when convex");
  analyze->add_option("input", cfg.input, "Expression or file containing one")->required();
  auto* lmi = app.add_subcommand("lmi", "Minimal LMI representation");
  lmi->add_option("input", cfg.input, "Expression or file containing one")->required();
  auto* rank = app.add_subcommand("rankcheck", "Is a pencil invertible on the interior of a free spectrahedron");
  rank->add_option("--pencil", cfg.pencil_file, "Pencil JSON file")->required();
  rank->add_option("--domain", cfg.domain_file, "Hermitian monic domain pencil JSON file")->required();
  auto* realize = app.add_subcommand("realize", "Minimal realization");
  realize->add_option("input", cfg.input, "Expression or file containing one")->required();
  auto* genflip = app.add_subcommand("genflip", "Hermitian flip-poly pencil from u, v");
  genflip->add_option("input", cfg.input, "JSON {\"u\":..., \"v\":[...], \"overrides\":[...]} or file")->required();
  auto* ev = app.add_subcommand("eval", "Evaluate an expression at a matrix tuple");
  ev->add_option("input", cfg.input, "Expression or file containing one")->required();
  ev->add_option("--point", cfg.point_file, "Point JSON {\"n\":..., \"X\":[...]}")->required();
  for (auto* sub : {analyze, lmi, rank, realize, genflip, ev}) common(sub);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*analyze) return cmd_analyze(cfg);
    if (*lmi) return cmd_lmi(cfg);
    if (*rank) return cmd_rankcheck(cfg);
    if (*realize) return cmd_realize(cfg);
    if (*genflip) return cmd_genflip(cfg);
    return cmd_eval(cfg);
  } catch (const ParseError& e) {
    std::cerr << "freeconvex: parse error at " << e.span().start << ": " << e.what() << '\n';
    return kUsage;
  } catch (const MarginalSdpError& e) {
    std::cerr << "freeconvex: marginal SDP at level " << e.level() << ": " << e.what() << '\n';
    return kMarginal;
  } catch (const Error& e) {
    std::cerr << "freeconvex: " << error_kind_name(e.kind()) << ": " << e.what() << '\n';
    return exit_for(e.kind());
  } catch (const Json::exception& e) {
    std::cerr << "freeconvex: malformed JSON input: " << e.what() << '\n';
    return kUsage;
  } catch (const UsageError& e) {
    std::cerr << "freeconvex: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "freeconvex: " << e.what() << '\n';
    return kNumeric;
  }
}
