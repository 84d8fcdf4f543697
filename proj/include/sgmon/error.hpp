#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

namespace sgmon {

enum class ErrorKind {
  Parse,
  Schema,
  Validation,
  Type,
  UnknownName,
  MissingEgo,
  SizeBound,
  Stream,
  MissingAttribute,
  UnknownScenario,
  Io,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Parse: return "parse error";
    case ErrorKind::Schema: return "schema error";
    case ErrorKind::Validation: return "validation error";
    case ErrorKind::Type: return "type error";
    case ErrorKind::UnknownName: return "unknown name";
    case ErrorKind::MissingEgo: return "missing ego";
    case ErrorKind::SizeBound: return "size bound exceeded";
    case ErrorKind::Stream: return "stream error";
    case ErrorKind::MissingAttribute: return "missing attribute";
    case ErrorKind::UnknownScenario: return "unknown scenario";
    case ErrorKind::Io: return "i/o error";
  }
  return "error";
}

struct SourceLocation {
  std::size_t line = 1;
  std::size_t column = 1;

  friend bool operator==(const SourceLocation&, const SourceLocation&) = default;
};

/// Every failure raised by the library. Parse errors always carry a location.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message,
        std::optional<SourceLocation> where = std::nullopt)
      : std::runtime_error(format(kind, message, where)),
        kind_(kind),
        detail_(message),
        where_(where) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& detail() const noexcept { return detail_; }
  const std::optional<SourceLocation>& location() const noexcept {
    return where_;
  }

 private:
  static std::string format(ErrorKind kind, const std::string& message,
                            const std::optional<SourceLocation>& where) {
    std::string out = to_string(kind);
    if (where) {
      out += " at " + std::to_string(where->line) + ":" +
             std::to_string(where->column);
    }
    out += ": ";
    out += message;
    return out;
  }

  ErrorKind kind_;
  std::string detail_;
  std::optional<SourceLocation> where_;
};

/// Raised when a bound node lacks an attribute a predicate reads.
/// `name()` is the qualified `pattern-id.attribute`.
class MissingAttributeError : public Error {
 public:
  explicit MissingAttributeError(std::string qualified_name)
      : Error(ErrorKind::MissingAttribute, qualified_name),
        name_(std::move(qualified_name)) {}

  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

}  // namespace sgmon
