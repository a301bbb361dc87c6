#pragma once

#include <string>

#include <json.hpp>

namespace qgx::lab {

enum class Status { Pass, Fail, HypothesisNotSatisfied, Informational };
const char* to_string(Status s);

/// Result of one checker run. pass <=> margin >= -tolerance; a report whose
/// hypothesis does not hold is not a failure of the theorem.
struct CheckReport {
  std::string theorem;   // checker id
  std::string relation;  // asserted relation, plain text
  nlohmann::json inputs = nlohmann::json::object();
  nlohmann::json observed = nlohmann::json::object();
  nlohmann::json metadata = nlohmann::json::object();
  double margin = 0.0;
  double tolerance = 0.0;
  Status status = Status::Informational;
  double runtime_seconds = 0.0;

  bool pass() const noexcept { return margin >= -tolerance; }
  bool failed() const noexcept { return status == Status::Fail; }
  /// Sets status from the margin unless the status is already a
  /// hypothesis or informational verdict.
  void settle();

  std::string inputs_digest() const;
  nlohmann::json to_json(bool with_runtime = true) const;
};

/// FNV-1a 64-bit over the bytes, as 16 hex digits.
std::string fnv1a_hex(const std::string& bytes);

}  // namespace qgx::lab
