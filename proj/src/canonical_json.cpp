#include "cdepth/canonical_json.hpp"

#include <cmath>
#include <cstdio>

#include "cdepth/errors.hpp"

namespace cdepth {

namespace {

void emit(const nlohmann::json& v, int depth, std::string& out) {
  const std::string pad(static_cast<std::size_t>(depth) * 2, ' ');
  const std::string inner(static_cast<std::size_t>(depth + 1) * 2, ' ');
  switch (v.type()) {
    case nlohmann::json::value_t::object: {
      if (v.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      // nlohmann::json objects iterate in key order already.
      for (const auto& [key, item] : v.items()) {
        if (!first) out += ",\n";
        first = false;
        out += inner;
        out += nlohmann::json(key).dump();
        out += ": ";
        emit(item, depth + 1, out);
      }
      out += "\n" + pad + "}";
      return;
    }
    case nlohmann::json::value_t::array: {
      if (v.empty()) {
        out += "[]";
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ",\n";
        out += inner;
        emit(v[i], depth + 1, out);
      }
      out += "\n" + pad + "]";
      return;
    }
    case nlohmann::json::value_t::number_float:
      out += format_double17(v.get<double>());
      return;
    default:
      out += v.dump();
      return;
  }
}

}  // namespace

std::string format_double17(double v) {
  if (!std::isfinite(v)) throw ValidationError("cannot serialize a non-finite number to JSON");
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  std::string s(buf);
  if (s.find_first_of(".eE") == std::string::npos) s += ".0";
  return s;
}

std::string canonical_dump(const nlohmann::json& value) {
  std::string out;
  emit(value, 0, out);
  out += "\n";
  return out;
}

}  // namespace cdepth
