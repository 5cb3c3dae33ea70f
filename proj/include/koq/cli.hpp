#pragma once

#include <cstddef>
#include <fstream>
#include <future>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "koq/checker.hpp"
#include "koq/report_json.hpp"
#include "koq/unit_registry.hpp"

namespace koq::cli {

enum ExitCode : int { kClean = 0, kErrorsFound = 1, kFailure = 2 };

enum class Format { kText, kJson };

struct CliConfig {
  std::vector<std::string> inputs;
  std::optional<std::string> units_file;
  Format format = Format::kText;
  bool strict_angle = false;
  bool strict_untagged = false;
  std::optional<std::size_t> max_errors;
};

struct FileReport {
  std::string path;
  DiagnosticReport report;
};

inline std::optional<std::string> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// One object for all inputs; diagnostics beyond --max-errors are dropped
// but still counted.
inline nlohmann::json render_json(const std::vector<FileReport>& files,
                                  std::optional<std::size_t> max_errors) {
  nlohmann::json out;
  nlohmann::json arr = nlohmann::json::array();
  std::size_t errors = 0;
  std::size_t warnings = 0;
  std::size_t emitted = 0;
  bool truncated = false;
  for (const FileReport& f : files) {
    errors += f.report.error_count();
    warnings += f.report.warning_count();
    nlohmann::json file = to_json(f.report);
    file["path"] = f.path;
    if (max_errors) {
      auto& diags = file["diagnostics"];
      const std::size_t room = *max_errors > emitted ? *max_errors - emitted : 0;
      if (diags.size() > room) {
        diags.erase(diags.begin() + static_cast<std::ptrdiff_t>(room), diags.end());
        truncated = true;
      }
      emitted += diags.size();
    }
    arr.push_back(std::move(file));
  }
  out["files"] = std::move(arr);
  out["errors"] = errors;
  out["warnings"] = warnings;
  out["truncated"] = truncated;
  return out;
}

inline void render_text(std::ostream& out, const std::vector<FileReport>& files,
                        std::optional<std::size_t> max_errors) {
  std::size_t emitted = 0;
  for (const FileReport& f : files) {
    for (const Diagnostic& d : f.report.diagnostics) {
      if (max_errors && emitted >= *max_errors) return;
      out << f.path << ':' << d.span.line << ':' << d.span.column << ": " << code_name(d.code)
          << ' ' << severity_name(d.severity) << ": " << d.message << '\n';
      ++emitted;
    }
  }
}

// Loads the registry and checks every input. Returns kFailure with a message
// on `err` for unreadable inputs or a bad units file.
inline int check(const CliConfig& cfg, std::ostream& out, std::ostream& err) {
  const AngleMode mode = cfg.strict_angle ? AngleMode::kStrict : AngleMode::kStandard;
  UnitRegistry units = UnitRegistry::builtin(mode);
  if (cfg.units_file) {
    auto text = read_file(*cfg.units_file);
    if (!text) {
      err << "koqcheck: cannot read units file '" << *cfg.units_file << "'\n";
      return kFailure;
    }
    try {
      units.load(*text);
    } catch (const DefinitionError& e) {
      err << "koqcheck: " << *cfg.units_file << ": " << e.what() << '\n';
      return kFailure;
    }
  }

  std::vector<std::optional<std::string>> sources;
  sources.reserve(cfg.inputs.size());
  for (const std::string& path : cfg.inputs) {
    sources.push_back(read_file(path));
    if (!sources.back()) {
      err << "koqcheck: cannot read '" << path << "'\n";
      return kFailure;
    }
  }

  const CheckOptions opts{cfg.strict_untagged};
  std::vector<std::future<DiagnosticReport>> pending;
  pending.reserve(sources.size());
  for (const auto& src : sources) {
    pending.push_back(std::async(std::launch::async, [&units, &src, opts] {
      return check_source(*src, units, opts);
    }));
  }
  std::vector<FileReport> files;
  bool any_error = false;
  for (std::size_t i = 0; i < pending.size(); ++i) {
    files.push_back({cfg.inputs[i], pending[i].get()});
    any_error = any_error || files.back().report.has_errors();
  }

  if (cfg.format == Format::kJson) {
    out << render_json(files, cfg.max_errors).dump(2) << '\n';
  } else {
    render_text(out, files, cfg.max_errors);
  }
  return any_error ? kErrorsFound : kClean;
}

// Entry point: `koqcheck check <files...> [options]`.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Unit, dimension and kind-of-quantity checker", "koqcheck"};
  app.require_subcommand(1);
  CliConfig cfg;
  std::string format = "text";
  std::size_t max_errors = 0;

  CLI::App* check_cmd = app.add_subcommand("check", "Check quantity scripts");
  check_cmd->add_option("inputs", cfg.inputs, "Script files (.pq)")->required();
  check_cmd->add_option("--units", cfg.units_file, "Extra unit definitions file");
  check_cmd->add_option("--format", format, "Report format")
      ->check(CLI::IsMember({"text", "json"}));
  check_cmd->add_flag("--strict-angle", cfg.strict_angle, "Give plane angle its own dimension");
  check_cmd->add_flag("--strict-untagged", cfg.strict_untagged,
                      "Treat tagged + untagged addition as an error");
  auto* max_opt = check_cmd->add_option("--max-errors", max_errors,
                                        "Print at most N diagnostics")
                      ->check(CLI::PositiveNumber);

  std::vector<std::string> argv_rev(args.rbegin(), args.rend());
  try {
    app.parse(argv_rev);
  } catch (const CLI::CallForHelp&) {
    out << (check_cmd->parsed() ? check_cmd->help() : app.help());
    return kClean;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kClean;
  } catch (const CLI::ParseError& e) {
    err << "koqcheck: " << e.what() << '\n';
    return kFailure;
  }
  cfg.format = format == "json" ? Format::kJson : Format::kText;
  if (max_opt->count() > 0) cfg.max_errors = max_errors;
  return check(cfg, out, err);
}

}  // namespace koq::cli
