#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qgx/check_report.hpp"

namespace qgx::cli {

/// One job of a run config.
///   kind "solve": generator + terminal + grid, writes a surface CSV.
///   kind "check": `checker` names one of known_checkers(); `params` holds
///   the checker options.
struct JobSpec {
  std::string id;
  std::string kind;
  std::string checker;
  nlohmann::json generator;
  nlohmann::json terminal;
  nlohmann::json grid;
  std::uint64_t seed = 0;
  nlohmann::json params = nlohmann::json::object();

  nlohmann::json to_json() const;
};

struct RunConfig {
  int schema_version = 1;
  std::string output_dir = "qgx-out";
  std::vector<JobSpec> jobs;

  nlohmann::json to_json() const;
  /// FNV-1a of the canonical serialization.
  std::string digest() const;

  /// Validates field types, ids and checker names. Throws ParseError with
  /// line/column for malformed JSON and InvalidArgument for bad content.
  static RunConfig parse(const std::string& text);
  static RunConfig from_json(const nlohmann::json& j);
  static RunConfig load(const std::string& path);
};

const std::vector<std::string>& known_checkers();

/// Asserted relation, inputs and default tolerances of a checker; the empty
/// id lists all checkers. Throws InvalidArgument on unknown ids.
std::string describe(const std::string& checker);

struct RunOptions {
  std::optional<std::string> output_dir;
  std::size_t jobs = 1;
  std::optional<std::uint64_t> seed_override;
  double tol_scale = 1.0;
};

struct JobResult {
  std::string id;
  std::string checker;
  lab::CheckReport report;
  std::string error;  // non-empty when the job threw
  bool failed() const noexcept { return !error.empty() || report.failed(); }
};

struct RunResult {
  std::vector<JobResult> results;
  std::vector<std::string> failing;
  std::string summary_path;
  int exit_code() const noexcept { return failing.empty() ? 0 : 1; }
};

/// Runs one job without writing artifacts (plot data is returned through
/// `plots`: name -> CSV body).
JobResult run_job(const JobSpec& job, double tol_scale,
                  std::vector<std::pair<std::string, std::string>>* plots = nullptr);

/// Runs every job (up to opts.jobs at a time) and writes per-job JSON
/// reports, plot-data CSVs and summary.csv into the output directory.
RunResult run(const RunConfig& config, const RunOptions& opts = {});

/// The summary table; identical configs give identical bytes.
std::string summary_csv(const RunConfig& config, const std::vector<JobResult>& results);

}  // namespace qgx::cli
