#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <variant>
#include <vector>

namespace koq {

enum class Severity { kError, kWarning };

enum class DiagCode {
  kParse,           // E001
  kUnknownUnit,     // E002
  kUnitAdd,         // E101, Type 1 unit error
  kUnitAssign,      // E102, Type 2 unit error
  kKoqAdd,          // E201, Type 1 KOQ error
  kKoqAssign,       // E202, Type 2 KOQ error
  kUntaggedOperand  // W301
};

inline std::string_view code_name(DiagCode c) {
  switch (c) {
    case DiagCode::kParse: return "E001";
    case DiagCode::kUnknownUnit: return "E002";
    case DiagCode::kUnitAdd: return "E101";
    case DiagCode::kUnitAssign: return "E102";
    case DiagCode::kKoqAdd: return "E201";
    case DiagCode::kKoqAssign: return "E202";
    case DiagCode::kUntaggedOperand: return "W301";
  }
  return "E001";
}

inline std::optional<DiagCode> code_from_name(std::string_view s) {
  for (DiagCode c : {DiagCode::kParse, DiagCode::kUnknownUnit, DiagCode::kUnitAdd,
                     DiagCode::kUnitAssign, DiagCode::kKoqAdd, DiagCode::kKoqAssign,
                     DiagCode::kUntaggedOperand}) {
    if (code_name(c) == s) return c;
  }
  return std::nullopt;
}

inline std::string_view severity_name(Severity s) {
  return s == Severity::kError ? "error" : "warning";
}

// 1-based line and byte column.
struct Span {
  int line = 1;
  int column = 1;
  int length = 0;

  friend bool operator==(const Span&, const Span&) = default;
};

using PayloadValue = std::variant<std::string, std::vector<std::string>>;
using Payload = std::map<std::string, PayloadValue>;

struct Diagnostic {
  DiagCode code = DiagCode::kParse;
  Severity severity = Severity::kError;
  Span span;
  std::string message;
  Payload payload;

  friend bool operator==(const Diagnostic&, const Diagnostic&) = default;
};

inline bool diagnostic_order(const Diagnostic& a, const Diagnostic& b) {
  return std::tuple(a.span.line, a.span.column, code_name(a.code)) <
         std::tuple(b.span.line, b.span.column, code_name(b.code));
}

// Final state of one let-binding; `value` is absent when it could not be
// computed (e.g. the right-hand side carried a unit error).
struct Binding {
  std::string name;
  int line = 0;
  std::optional<double> value;
  std::string unit;
  std::string koq;

  friend bool operator==(const Binding&, const Binding&) = default;
};

struct DiagnosticReport {
  std::vector<Diagnostic> diagnostics;
  std::vector<Binding> bindings;

  std::size_t error_count() const {
    return static_cast<std::size_t>(
        std::count_if(diagnostics.begin(), diagnostics.end(),
                      [](const Diagnostic& d) { return d.severity == Severity::kError; }));
  }
  std::size_t warning_count() const { return diagnostics.size() - error_count(); }
  bool has_errors() const { return error_count() != 0; }

  std::size_t count(DiagCode c) const {
    return static_cast<std::size_t>(std::count_if(
        diagnostics.begin(), diagnostics.end(), [c](const Diagnostic& d) { return d.code == c; }));
  }

  // Last binding of `name`, if any.
  const Binding* binding(std::string_view name) const {
    for (auto it = bindings.rbegin(); it != bindings.rend(); ++it) {
      if (it->name == name) return &*it;
    }
    return nullptr;
  }

  friend bool operator==(const DiagnosticReport&, const DiagnosticReport&) = default;
};

}  // namespace koq
