#pragma once

// JSON views of the library's reports. Doubles keep full precision; non-finite
// values are written as the strings "inf", "-inf" and "nan".

#include <json.hpp>
#include <string>

#include "sparselab/certify.hpp"
#include "sparselab/kernels.hpp"
#include "sparselab/oscillation.hpp"
#include "sparselab/sparse.hpp"
#include "sparselab/weights.hpp"

namespace sparselab {

using Json = nlohmann::ordered_json;

Json number_json(double x);
double number_from_json(const Json& j);

Json to_json(const DyadicCube& q);
DyadicCube cube_from_json(const Json& j);
Json to_json(const ConstantReport& r);
Json to_json(const DualityReport& r);
Json to_json(const CarlesonCheck& r);
Json to_json(const SparseCheck& r);
Json to_json(const CZCheck& r);
/// Cubes, omega values and each witness set as sorted [first, last] cell ranges.
Json to_json(const LernerDecomposition& d);
Json to_json(const LernerCheck& r);
Json to_json(const SelectionResult& r);
Json to_json(const DominationReport& r);
Json to_json(const H2Report& r);
Json to_json(const SymbolReport& r);
Json to_json(const OscillationProfile& r);
Json to_json(const CertificationRecord& r);
CertificationRecord record_from_json(const Json& j);

/// Collapses a sorted list of cell indices into inclusive ranges.
Json cell_ranges(const std::vector<std::size_t>& cells);

/// Parses JSON text; syntax errors become ParseError with line and column.
Json parse_json(const std::string& text);
Json read_json_file(const std::string& path);

/// printf("%.17g"), with inf/-inf/nan spelled out.
std::string format_number(double x);

}  // namespace sparselab
