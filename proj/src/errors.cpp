#include "freeconvex/errors.hpp"

namespace freeconvex {

const char* error_kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::Parse: return "ParseError";
    case ErrorKind::RationalNotPolynomial: return "RationalNotPolynomial";
    case ErrorKind::SingularAtOrigin: return "SingularAtOrigin";
    case ErrorKind::NotMinimal: return "NotMinimal";
    case ErrorKind::NumericalRankAmbiguity: return "NumericalRankAmbiguity";
    case ErrorKind::IterationLimit: return "IterationLimit";
    case ErrorKind::NumericalBreakdown: return "NumericalBreakdown";
    case ErrorKind::MarginalSdp: return "MarginalSdp";
    case ErrorKind::NotConvex: return "NotConvex";
    case ErrorKind::NotAtom: return "NotAtom";
    case ErrorKind::StructureMismatch: return "StructureMismatch";
    case ErrorKind::MissingOverride: return "MissingOverride";
    case ErrorKind::InvalidInput: return "InvalidInput";
  }
  return "Error";
}

}  // namespace freeconvex
