#include "qgx/check_report.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>

namespace qgx::lab {

const char* to_string(Status s) {
  switch (s) {
    case Status::Pass: return "pass";
    case Status::Fail: return "fail";
    case Status::HypothesisNotSatisfied: return "hypothesis-not-satisfied";
    default: return "informational";
  }
}

void CheckReport::settle() {
  if (status == Status::HypothesisNotSatisfied || status == Status::Informational) return;
  status = pass() ? Status::Pass : Status::Fail;
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string CheckReport::inputs_digest() const { return fnv1a_hex(inputs.dump()); }

nlohmann::json CheckReport::to_json(bool with_runtime) const {
  auto num = [](double v) -> nlohmann::json {
    if (std::isfinite(v)) return v;
    return v > 0 ? "inf" : (v < 0 ? "-inf" : "nan");
  };
  nlohmann::json j = {{"theorem", theorem},
                      {"relation", relation},
                      {"inputs", inputs},
                      {"inputs_digest", inputs_digest()},
                      {"observed", observed},
                      {"margin", num(margin)},
                      {"tolerance", num(tolerance)},
                      {"pass", pass()},
                      {"status", to_string(status)},
                      {"metadata", metadata}};
  if (with_runtime) j["runtime_seconds"] = runtime_seconds;
  return j;
}

}  // namespace qgx::lab
