#pragma once

#include <string>

#include "json.hpp"

namespace cdepth {

/// Deterministic JSON text: object keys in lexicographic order, two-space
/// indentation, every floating-point number at 17 significant digits (always
/// carrying a '.' or exponent so it re-parses as a float). Parsing the output
/// and dumping again reproduces the same bytes.
std::string canonical_dump(const nlohmann::json& value);

std::string format_double17(double v);

}  // namespace cdepth
