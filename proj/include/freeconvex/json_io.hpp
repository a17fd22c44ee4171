#pragma once
#include <cstdint>
#include <vector>

#include <json.hpp>

#include "freeconvex/convexity.hpp"
#include "freeconvex/ncpoly.hpp"
#include "freeconvex/pencil.hpp"
#include "freeconvex/realization.hpp"
#include "freeconvex/sdp.hpp"

namespace freeconvex {

using Json = nlohmann::json;

// Complex numbers are [re, im]; matrices are row lists of those.
Json to_json(Complex z);
Json to_json(const Matrix& m);
Json to_json(const NcPoly& p);
Json to_json(const Realization& r);
Json to_json(const LinearPencil& L);
Json to_json(const MatrixTuple& X);
Json to_json(const Witness& w);
Json to_json(const RankLevel& level);
Json to_json(const RankCheckOutcome& out);
Json to_json(const SdpRecord& rec);
Json to_json(const ConvexityReport& rep, double tol, std::uint64_t seed);

// Parsers throw Error(InvalidInput) on malformed documents.
Complex complex_from_json(const Json& j);
Matrix matrix_from_json(const Json& j);
Vector vector_from_json(const Json& j);
NcPoly ncpoly_from_json(const Json& j);
Realization realization_from_json(const Json& j);
LinearPencil pencil_from_json(const Json& j);
MatrixTuple tuple_from_json(const Json& j);

}  // namespace freeconvex
