#pragma once

// Reproducible experiment runners behind the CLI. A run takes a JSON config
// (command id plus parameters) and returns a structured report and CSV tables.

#include <nlohmann/json.hpp>

#include <string>
#include <vector>

namespace causalflag {

using ordered_json = nlohmann::ordered_json;

enum class Verdict { Pass, Violation };

struct CsvTable {
  std::string name;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

struct ExperimentResult {
  Verdict verdict = Verdict::Pass;
  ordered_json report;
  std::vector<CsvTable> tables;
};

const std::vector<std::string>& experiment_commands();

/// One line per accepted config key with its default.
std::string experiment_help(const std::string& command);

/// Unknown commands, unknown keys and out-of-range tolerance overrides throw
/// InvalidArgument. Property errors raised while running (non-isotropic frames,
/// non-transverse triples, ...) come back as a Violation report.
ExperimentResult run_experiment(const nlohmann::json& config);

/// %.17g for every double.
std::string format_double(double v);
/// Two-space indented JSON with doubles rendered by format_double.
std::string render_json(const ordered_json& j);
std::string render_csv(const CsvTable& t);

}  // namespace causalflag
