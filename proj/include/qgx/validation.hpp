#pragma once

#include <map>
#include <string>

#include "qgx/generators.hpp"

namespace qgx::generators {

struct Lattice {
  double T = 1.0;
  double y_max = 5.0;
  double z_max = 10.0;
  int n_t = 21;
  int n_y = 21;
  int n_z = 41;

  double t(int i) const { return n_t == 1 ? 0.0 : T * i / (n_t - 1); }
  double y(int j) const { return n_y == 1 ? 0.0 : -y_max + 2.0 * y_max * j / (n_y - 1); }
  double z(int l) const { return n_z == 1 ? 0.0 : -z_max + 2.0 * z_max * l / (n_z - 1); }
};

struct AssumptionStatus {
  bool passed = true;
  // worst point seen (largest violation, or smallest slack when passing)
  double t = 0.0;
  double y = 0.0;
  double z = 0.0;
  double excess = 0.0;  // > 0 means violated by that much
  std::string detail;
};

/// Keys: H1 H2 H3 H4 A1 A2 A3 G2. Violations are report content, never errors.
struct AssumptionReport {
  std::map<std::string, AssumptionStatus> status;

  bool passes(const std::string& key) const { return status.at(key).passed; }
  bool all_pass() const;
};

AssumptionReport validate(const Generator& gen, const Lattice& lattice = {});

}  // namespace qgx::generators
