#pragma once

#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

namespace sgmon {

enum class BaseType { Real, Int, Bool, String, Vec2 };

inline const char* to_string(BaseType type) {
  switch (type) {
    case BaseType::Real: return "Real";
    case BaseType::Int: return "Int";
    case BaseType::Bool: return "Bool";
    case BaseType::String: return "String";
    case BaseType::Vec2: return "Vec2";
  }
  return "?";
}

inline std::optional<BaseType> parse_base_type(std::string_view name) {
  if (name == "Real") return BaseType::Real;
  if (name == "Int") return BaseType::Int;
  if (name == "Bool") return BaseType::Bool;
  if (name == "String") return BaseType::String;
  if (name == "Vec2") return BaseType::Vec2;
  return std::nullopt;
}

inline bool is_numeric(BaseType type) {
  return type == BaseType::Real || type == BaseType::Int;
}

/// Planar position in metres.
struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Vec2&, const Vec2&) = default;
};

inline double distance(const Vec2& a, const Vec2& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

using Value = std::variant<double, std::int64_t, bool, std::string, Vec2>;

inline BaseType type_of(const Value& value) {
  switch (value.index()) {
    case 0: return BaseType::Real;
    case 1: return BaseType::Int;
    case 2: return BaseType::Bool;
    case 3: return BaseType::String;
    default: return BaseType::Vec2;
  }
}

/// Shortest text that parses back to the same double. Always contains a
/// '.', an exponent or a non-finite marker so it never reads back as an Int.
inline std::string format_real(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  std::string out(buf.data(), end);
  if (out.find_first_of(".e") == std::string::npos) out += ".0";
  return out;
}

}  // namespace sgmon
