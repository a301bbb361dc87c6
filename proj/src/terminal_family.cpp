#include "qgx/terminal_family.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "qgx/random.hpp"

namespace qgx::lab {

std::vector<bsde::TerminalCondition> fixed_terminals() {
  static const char* exprs[] = {
      "tanh(x)",
      "0.5*tanh(2*x)",
      "tanh(x-1)",
      "0.2*tanh(x)+0.1",
      "max(-1,min(x,1))",
      "max(-0.5,min(0.5*x+0.2,0.5))",
      "1/(1+exp(-4*x))",
      "1/(1+exp(-4*(x+1)))-1/(1+exp(-4*(x-1)))",
      "exp(-x^2)",
      "-exp(-(x-1)^2)",
      "0.8*tanh(3*x)",
      "0.3*tanh(x)-0.4*exp(-x^2)",
  };
  std::vector<bsde::TerminalCondition> out;
  for (const char* e : exprs) out.push_back(bsde::TerminalCondition::expression(e));
  return out;
}

std::vector<bsde::TerminalCondition> random_terminals(std::uint64_t seed, int count) {
  std::vector<bsde::TerminalCondition> out;
  for (int i = 0; i < count; ++i) {
    const auto stream = 1000u + static_cast<std::uint64_t>(i);
    const auto u1 = stochastic::uniform_pair(seed, stream, 0);
    const auto u2 = stochastic::uniform_pair(seed, stream, 1);
    const auto u3 = stochastic::uniform_pair(seed, stream, 2);
    const double a = -1.0 + 2.0 * u1[0];
    const double b = 0.5 + 1.5 * u1[1];
    const double c = -1.0 + 2.0 * u2[0];
    const double d = -0.5 + u2[1];
    const double e = -1.0 + 2.0 * u3[0];
    char buf[256];
    std::snprintf(buf, sizeof buf, "%.6f*tanh(%.6f*(x-(%.6f)))+(%.6f)*exp(-(x-(%.6f))^2)", a, b,
                  c, d, e);
    out.push_back(bsde::TerminalCondition::expression(buf));
  }
  return out;
}

std::vector<bsde::TerminalCondition> terminal_family(std::uint64_t seed, int n_random) {
  auto out = fixed_terminals();
  auto extra = random_terminals(seed, n_random);
  out.insert(out.end(), extra.begin(), extra.end());
  return out;
}

double settling_width(const std::vector<bsde::TerminalCondition>& family) {
  double w = 0.0;
  for (const auto& tc : family) {
    const double lo = tc.phi(-50.0);
    const double hi = tc.phi(50.0);
    for (int k = 5000; k >= 0; --k) {
      const double x = 0.01 * k;
      if (std::abs(tc.phi(x) - hi) > 1e-8 || std::abs(tc.phi(-x) - lo) > 1e-8) {
        w = std::max(w, x);
        break;
      }
    }
  }
  return w;
}

}  // namespace qgx::lab
