#include "qgx/validation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qgx/errors.hpp"

namespace qgx::generators {

namespace {

void record(AssumptionStatus& s, double excess, double t, double y, double z) {
  if (excess > 0.0) s.passed = false;
  if (excess > s.excess) {
    s.excess = excess;
    s.t = t;
    s.y = y;
    s.z = z;
  }
}

int nearest_z(const Lattice& L, double target) {
  int best = 0;
  for (int l = 0; l < L.n_z; ++l) {
    if (std::abs(L.z(l) - target) < std::abs(L.z(best) - target)) best = l;
  }
  return best;
}

}  // namespace

bool AssumptionReport::all_pass() const {
  return std::all_of(status.begin(), status.end(), [](const auto& kv) { return kv.second.passed; });
}

AssumptionReport validate(const Generator& gen, const Lattice& L) {
  if (L.n_t < 1 || L.n_y < 1 || L.n_z < 3) {
    throw InvalidArgument("validate: lattice must be non-empty with at least 3 z points");
  }
  AssumptionReport rep;
  for (const char* key : {"H1", "H2", "H3", "H4", "A1", "A2", "A3", "G2"}) {
    rep.status[key] = AssumptionStatus{};
    rep.status[key].excess = -std::numeric_limits<double>::infinity();
  }
  auto& h1 = rep.status["H1"];
  auto& h2 = rep.status["H2"];
  auto& h3 = rep.status["H3"];
  auto& h4 = rep.status["H4"];
  auto& a2 = rep.status["A2"];
  auto& g2 = rep.status["G2"];

  const double eps_list[] = {0.1, 1.0};
  const double half = 0.5 * L.z_max;
  const int l_half_pos = nearest_z(L, half);
  const int l_half_neg = nearest_z(L, -half);

  for (int i = 0; i < L.n_t; ++i) {
    const double t = L.t(i);
    double up_full[2], up_inner[2], lo_full[2], lo_inner[2];
    for (int e = 0; e < 2; ++e) {
      up_full[e] = up_inner[e] = -std::numeric_limits<double>::infinity();
      lo_full[e] = lo_inner[e] = std::numeric_limits<double>::infinity();
    }
    double grow_edge = 0.0, grow_half = 0.0, dgrow_edge = 0.0, dgrow_half = 0.0;
    for (int j = 0; j < L.n_y; ++j) {
      const double y = L.y(j);
      const double ay = std::abs(y);
      const double ell = gen.ell(ay);
      for (int l = 0; l < L.n_z; ++l) {
        const double z = L.z(l);
        const double g = gen(t, y, z);
        const double gz = gen.dz(t, y, z);
        const double gy = gen.dy(t, y, z);
        if (!std::isfinite(g) || !std::isfinite(gz) || !std::isfinite(gy)) {
          for (auto* s : {&h1, &h2, &h3}) {
            s->passed = false;
            s->excess = std::numeric_limits<double>::infinity();
            s->t = t;
            s->y = y;
            s->z = z;
            s->detail = "non-finite value";
          }
          continue;
        }
        // H1: oscillation over a tiny step in y and in z
        const double h = 1e-7;
        const double osc = std::max(std::abs(gen(t, y + h, z) - g), std::abs(gen(t, y, z + h) - g));
        record(h1, osc - 1e-4 * (1.0 + std::abs(g)), t, y, z);
        record(h2, std::abs(g) - (gen.k() + gen.k() * ay + ell * z * z) -
                       1e-12 * (1.0 + std::abs(g)),
               t, y, z);
        record(h3, std::abs(gz) - ell * (1.0 + std::abs(z)) - 1e-12 * (1.0 + std::abs(gz)), t, y,
               z);
        for (int e = 0; e < 2; ++e) {
          const double up = gy - eps_list[e] * z * z;
          const double lo = gy + eps_list[e] * z * z;
          up_full[e] = std::max(up_full[e], up);
          lo_full[e] = std::min(lo_full[e], lo);
          if (std::abs(z) <= half + 1e-12) {
            up_inner[e] = std::max(up_inner[e], up);
            lo_inner[e] = std::min(lo_inner[e], lo);
          }
        }
        if (l == 0 || l == L.n_z - 1) {
          grow_edge = std::max(grow_edge, std::abs(g) / (1.0 + z * z));
          dgrow_edge = std::max(dgrow_edge, std::abs(gz) / (1.0 + std::abs(z)));
        }
        if (l == l_half_pos || l == l_half_neg) {
          grow_half = std::max(grow_half, std::abs(g) / (1.0 + z * z));
          dgrow_half = std::max(dgrow_half, std::abs(gz) / (1.0 + std::abs(z)));
        }
      }
    }
    // H4/A3: sup of (g_y - eps z^2) must not keep growing toward |z| = z_max
    for (int e = 0; e < 2; ++e) {
      record(h4, up_full[e] - up_inner[e] - 1e-9 * (1.0 + std::abs(up_inner[e])), t, 0.0,
             L.z_max);
      record(g2, lo_inner[e] - lo_full[e] - 1e-9 * (1.0 + std::abs(lo_inner[e])), t, 0.0,
             L.z_max);
    }
    // A2: quadratic growth on bounded y, read off the growth ratio
    record(a2, std::max(grow_edge - 1.5 * grow_half, dgrow_edge - 1.5 * dgrow_half) - 1e-12, t,
           0.0, L.z_max);
  }
  if (!h1.passed) h1.detail = h1.detail.empty() ? "jump between neighbouring points" : h1.detail;
  if (!h2.passed && h2.detail.empty()) h2.detail = "|g| exceeds k + k|y| + ell(|y|) z^2";
  if (!h3.passed && h3.detail.empty()) h3.detail = "|g_z| exceeds ell(|y|)(1+|z|)";
  if (!h4.passed) h4.detail = "g_y - eps z^2 still growing at the lattice edge";
  if (!g2.passed) g2.detail = "g_y + eps z^2 still falling at the lattice edge";
  if (!a2.passed) a2.detail = "growth faster than quadratic between z_max/2 and z_max";
  rep.status["A1"] = h1;
  rep.status["A3"] = h4;
  return rep;
}

}  // namespace qgx::generators
