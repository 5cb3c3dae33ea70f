#pragma once

#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "koq/diagnostic.hpp"

namespace koq {

// nlohmann::json keeps object keys sorted, so dump() output is stable.
inline nlohmann::json to_json(const Diagnostic& d) {
  nlohmann::json payload = nlohmann::json::object();
  for (const auto& [key, value] : d.payload) {
    std::visit([&](const auto& v) { payload[key] = v; }, value);
  }
  return {{"code", std::string(code_name(d.code))},
          {"severity", std::string(severity_name(d.severity))},
          {"line", d.span.line},
          {"column", d.span.column},
          {"length", d.span.length},
          {"message", d.message},
          {"payload", std::move(payload)}};
}

inline nlohmann::json to_json(const Binding& b) {
  return {{"name", b.name},
          {"line", b.line},
          {"value", b.value ? nlohmann::json(*b.value) : nlohmann::json(nullptr)},
          {"unit", b.unit},
          {"koq", b.koq}};
}

inline nlohmann::json to_json(const DiagnosticReport& r) {
  nlohmann::json diags = nlohmann::json::array();
  for (const Diagnostic& d : r.diagnostics) diags.push_back(to_json(d));
  nlohmann::json binds = nlohmann::json::array();
  for (const Binding& b : r.bindings) binds.push_back(to_json(b));
  return {{"diagnostics", std::move(diags)}, {"bindings", std::move(binds)}};
}

struct ReportFormatError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline Diagnostic diagnostic_from_json(const nlohmann::json& j) {
  Diagnostic d;
  auto code = code_from_name(j.at("code").get<std::string>());
  if (!code) throw ReportFormatError("unknown diagnostic code " + j.at("code").dump());
  d.code = *code;
  const std::string sev = j.at("severity").get<std::string>();
  if (sev != "error" && sev != "warning") throw ReportFormatError("unknown severity " + sev);
  d.severity = sev == "error" ? Severity::kError : Severity::kWarning;
  d.span = {j.at("line").get<int>(), j.at("column").get<int>(), j.at("length").get<int>()};
  d.message = j.at("message").get<std::string>();
  for (const auto& [key, value] : j.at("payload").items()) {
    if (value.is_array()) {
      d.payload[key] = value.get<std::vector<std::string>>();
    } else {
      d.payload[key] = value.get<std::string>();
    }
  }
  return d;
}

inline DiagnosticReport report_from_json(const nlohmann::json& j) {
  DiagnosticReport r;
  try {
    for (const auto& d : j.at("diagnostics")) r.diagnostics.push_back(diagnostic_from_json(d));
    for (const auto& b : j.at("bindings")) {
      Binding out{b.at("name").get<std::string>(), b.at("line").get<int>(), std::nullopt,
                  b.at("unit").get<std::string>(), b.at("koq").get<std::string>()};
      if (!b.at("value").is_null()) out.value = b.at("value").get<double>();
      r.bindings.push_back(std::move(out));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ReportFormatError(e.what());
  }
  return r;
}

}  // namespace koq
