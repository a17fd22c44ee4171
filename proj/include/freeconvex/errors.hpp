#pragma once
#include <cstddef>
#include <stdexcept>
#include <string>

namespace freeconvex {

enum class ErrorKind {
  DimensionMismatch,
  Parse,
  RationalNotPolynomial,
  SingularAtOrigin,
  NotMinimal,
  NumericalRankAmbiguity,
  IterationLimit,
  NumericalBreakdown,
  MarginalSdp,
  NotConvex,
  NotAtom,
  StructureMismatch,
  MissingOverride,
  InvalidInput,
};

const char* error_kind_name(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

struct SourceSpan {
  std::size_t start = 0;
  std::size_t end = 0;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, SourceSpan span) : Error(ErrorKind::Parse, what), span_(span) {}
  SourceSpan span() const { return span_; }

 private:
  SourceSpan span_;
};

// Raised by the rank recursion; carries the level of the undecided SDP.
class MarginalSdpError : public Error {
 public:
  MarginalSdpError(const std::string& what, int level) : Error(ErrorKind::MarginalSdp, what), level_(level) {}
  int level() const { return level_; }

 private:
  int level_;
};

}  // namespace freeconvex
