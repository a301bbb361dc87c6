// Acceptance run: executes the acceptance config, re-checks every criterion
// against its pinned tolerance and prints one [PASS]/[FAIL] line per item.
//
//   acceptance <config.json> [output_dir]

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "qgx/runner.hpp"

using nlohmann::json;
namespace fs = std::filesystem;
using namespace qgx;

namespace {

struct Verdict {
  bool ok = true;
  std::vector<std::string> notes;

  void require(bool cond, const std::string& what) {
    if (!cond) ok = false;
    notes.push_back((cond ? "" : "NOT ") + what);
  }
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

class Results {
 public:
  explicit Results(const cli::RunResult& r) {
    for (const auto& j : r.results) by_id_[j.id] = &j;
  }

  // observed block of a job, or null if the job is missing or threw
  const json& observed(const std::string& id, Verdict& v) const {
    static const json null_json;
    auto it = by_id_.find(id);
    if (it == by_id_.end()) {
      v.require(false, "job " + id + " present");
      return null_json;
    }
    if (!it->second->error.empty()) {
      v.require(false, "job " + id + " ran (" + it->second->error + ")");
      return null_json;
    }
    return it->second->report.observed;
  }

  std::string status(const std::string& id) const {
    auto it = by_id_.find(id);
    if (it == by_id_.end() || !it->second->error.empty()) return "error";
    return lab::to_string(it->second->report.status);
  }

 private:
  std::map<std::string, const cli::JobResult*> by_id_;
};

double get(const json& o, const char* key) {
  if (!o.is_object() || !o.contains(key) || !o.at(key).is_number()) return NAN;
  return o.at(key).get<double>();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

Verdict ac1(const Results& r) {
  Verdict v;
  const auto& o = r.observed("heat_oracle", v);
  const double e = get(o, "max_error");
  v.require(o.is_object() && o["states"].size() == 11, "11 states compared");
  v.require(e <= 1e-4, "max error " + num(e) + " <= 1e-4");
  return v;
}

Verdict ac2(const Results& r) {
  Verdict v;
  const double e = get(r.observed("girsanov_oracle", v), "error");
  v.require(e <= 1e-3, "error " + num(e) + " <= 1e-3");
  return v;
}

Verdict ac3(const Results& r) {
  Verdict v;
  const auto& o = r.observed("entropic_oracle", v);
  const double e = get(o, "error");
  const double er = get(o, "error_refined");
  v.require(e <= 2e-3, "error " + num(e) + " <= 2e-3");
  v.require(e / er >= 1.5, "refinement factor " + num(e / er) + " >= 1.5");
  return v;
}

Verdict ac4(const Results& r) {
  Verdict v;
  const char* parts[] = {"monotonicity", "constant_preserving", "zero_one",
                         "translation_invariance", "time_consistency"};
  for (const char* id : {"axioms_zero", "axioms_linear", "axioms_entropic", "axioms_abs_drift"}) {
    const auto& o = r.observed(id, v);
    if (!o.is_object()) continue;
    bool all = true;
    for (const char* p : parts) {
      const auto& part = o[p];
      all = all && part["applicable"] == true && part["pass"] == true &&
            get(part, "value") <= get(part, "tolerance");
    }
    const double tc = get(o["time_consistency"], "value");
    const double tc_step = get(o["time_consistency_refinement"], "value");
    v.require(all, std::string(id) + " all axioms hold");
    v.require(tc < 5e-3 && tc_step < 0.0,
              std::string(id) + " compose gap " + num(tc) + " shrinks by " + num(-tc_step));
  }
  return v;
}

Verdict ac5(const Results& r) {
  Verdict v;
  for (const char* id : {"strict_entropic", "strict_linear"}) {
    const double g = get(r.observed(id, v), "min_gap");
    v.require(g > 1e-4, std::string(id) + " min interior gap " + num(g) + " > 1e-4");
  }
  return v;
}

Verdict ac6(const Results& r) {
  Verdict v;
  const auto& o = r.observed("bmo_entropic", v);
  const double est = get(o, "estimate");
  const double bound = get(o, "bound");
  const double expected = 2.0 * std::exp(8.0 * 0.5 * get(o, "Y_sup"));
  v.require(get(o, "k") == 0.5, "k = 1/2");
  v.require(std::abs(bound - expected) <= 1e-9 * expected, "bound (1+T)e^{8k|u|} = " + num(bound));
  v.require(est <= bound, "estimate " + num(est) + " <= bound, slack " + num(bound - est));
  return v;
}

Verdict ac7(const Results& r) {
  Verdict v;
  const auto& lin = r.observed("representation_linear", v);
  double worst = 0.0;
  if (lin.is_object())
    for (const auto& e : lin["errors"]) worst = std::max(worst, e.get<double>());
  v.require(lin.is_object() && worst <= 1e-8, "linear quotient error " + num(worst) + " <= 1e-8");
  const auto& ent = r.observed("representation_entropic", v);
  const double lim = get(ent, "limit");
  v.require(std::abs(lim - 0.5) <= 0.05 * 0.5, "entropic limit " + num(lim) + " within 5% of 0.5");
  bool mono = ent.is_object();
  if (mono) {
    const auto& e = ent["errors"];
    for (std::size_t k = 1; k < e.size(); ++k) mono = mono && e[k].get<double>() < e[k - 1].get<double>();
  }
  v.require(mono, "entropic error ladder monotone in eps");
  return v;
}

Verdict ac8(const Results& r) {
  Verdict v;
  v.require(r.status("converse_ordered") == "pass", "entropic(1) vs entropic(2) passes");
  const auto& w = r.observed("converse_witness", v);
  v.require(r.status("converse_witness") == "hypothesis-not-satisfied",
            "linear(0.5) vs entropic(1): comparison hypothesis refuted");
  v.require(w.is_object() && !w["stage1_witness"].is_null() && !w["discriminating_probes"].empty(),
            "discriminating witness reported");
  return v;
}

Verdict ac9(const Results& r) {
  Verdict v;
  for (const char* id : {"jensen_abs", "jensen_positive_part"}) {
    const auto& o = r.observed(id, v);
    const double m = o.is_object() && o.contains("worst") && !o["worst"].is_null()
                         ? get(o["worst"], "rhs") - get(o["worst"], "lhs")
                         : NAN;
    v.require(r.status(id) == "pass" && m >= -1e-6 && get(o, "asserted_states") > 0,
              std::string(id) + " margin " + num(m) + " >= -1e-6");
  }
  const auto& s = r.observed("jensen_half_softplus", v);
  v.require(get(s, "condition_not_met") > 0 && get(s, "asserted_states") == 0,
            "half softplus: " + num(get(s, "condition_not_met")) +
                " states flagged, none asserted");
  return v;
}

Verdict ac10(const Results& r) {
  Verdict v;
  const auto& m = r.observed("doob_meyer_martingale", v);
  v.require(get(m, "max_abs_increment") <= 1e-8,
            "martingale |A| " + num(get(m, "max_abs_increment")) + " <= 1e-8");
  const auto& d = r.observed("doob_meyer_drift", v);
  double rel = d.is_object() ? 0.0 : NAN;
  if (d.is_object()) {
    const auto& times = d["coarse_times"];
    const auto& a = d["A_at_zero_state"];
    for (std::size_t k = 1; k < times.size(); ++k) {
      const double ct = 0.2 * times[k].get<double>();
      rel = std::max(rel, std::abs(a[k].get<double>() - ct) / ct);
    }
  }
  v.require(rel <= 0.02, "drift A_t vs 0.2 t relative error " + num(rel) + " <= 2%");
  const double rt = get(r.observed("doob_meyer_classical", v), "reconstruction_error");
  v.require(rt <= 5e-3, "driver round trip " + num(rt) + " <= 5e-3");
  return v;
}

Verdict ac11(const Results& r) {
  Verdict v;
  for (const char* id : {"optional_sampling_martingale_two_valued",
                         "optional_sampling_martingale_hitting"}) {
    const auto& o = r.observed(id, v);
    const double g = std::max(std::abs(get(o, "min_gap")), std::abs(get(o, "max_gap")));
    v.require(g <= 5e-3, std::string(id) + " |gap| " + num(g) + " <= 5e-3");
  }
  for (const char* id : {"optional_sampling_sub_two_valued", "optional_sampling_sub_hitting"}) {
    const double g = get(r.observed(id, v), "min_gap");
    v.require(g >= -5e-3, std::string(id) + " min gap " + num(g) + " >= -5e-3");
  }
  return v;
}

Verdict ac12(const Results& r) {
  Verdict v;
  const auto& z = r.observed("upcrossing_zero", v);
  const double pm = get(z, "plain_mean"), pse = get(z, "plain_stderr");
  v.require(get(z, "weight_mean") == 1.0 && get(z, "beta_energy") == 0.0,
            "zero generator: unit weights, no beta");
  v.require(pm <= get(z, "doob_rhs") + 3.0 * pse,
            "zero generator: E[U] " + num(pm) + " <= Doob rhs " + num(get(z, "doob_rhs")) +
                " + 3 SE");
  const auto& e = r.observed("upcrossing_entropic", v);
  const double wm = get(e, "weighted_mean"), b = get(e, "bound");
  v.require(wm <= b, "entropic weighted mean " + num(wm) + " <= bound " + num(b));
  const double be = get(e, "beta_energy");
  v.require(std::isfinite(be) && be <= get(e, "energy_bound"),
            "beta energy " + num(be) + " finite and bounded");
  const double w = get(e, "weight_mean"), wse = get(e, "weight_stderr");
  v.require(std::abs(w - 1.0) <= 3.0 * wse,
            "weight mean " + num(w) + " within 3 SE (" + num(wse) + ") of 1");
  return v;
}

Verdict ac13(const Results& r) {
  Verdict v;
  const auto& o = r.observed("stability_mollify", v);
  const double f = get(o, "final_error");
  v.require(o.is_object() && o["monotone"] == true, "error ladder decreasing");
  v.require(f < 1e-3, "sup error at n = 64: " + num(f) + " < 1e-3");
  return v;
}

void print(const char* id, const char* title, const Verdict& v, bool& all_ok) {
  std::string detail;
  for (std::size_t k = 0; k < v.notes.size(); ++k) detail += (k ? "; " : "") + v.notes[k];
  std::printf("[%s] %s %s: %s\n", v.ok ? "PASS" : "FAIL", id, title, detail.c_str());
  all_ok = all_ok && v.ok;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: acceptance <config.json> [output_dir]\n");
    return 2;
  }
  const fs::path out = argc > 2 ? fs::path(argv[2]) : fs::temp_directory_path() / "qgx-acceptance";
  const auto config = cli::RunConfig::load(argv[1]);

  cli::RunOptions first;
  first.output_dir = (out / "run1").string();
  const auto run1 = cli::run(config, first);
  for (const auto& j : run1.results) {
    if (j.failed()) std::printf("job %s failed: %s\n", j.id.c_str(), j.error.c_str());
  }
  const Results res(run1);

  bool ok = true;
  print("AC-1", "heat-kernel oracle", ac1(res), ok);
  print("AC-2", "Girsanov oracle", ac2(res), ok);
  print("AC-3", "entropic closed form", ac3(res), ok);
  print("AC-4", "axiom suite", ac4(res), ok);
  print("AC-5", "strict comparison", ac5(res), ok);
  print("AC-6", "BMO bound", ac6(res), ok);
  print("AC-7", "representation", ac7(res), ok);
  print("AC-8", "converse comparison", ac8(res), ok);
  print("AC-9", "Jensen", ac9(res), ok);
  print("AC-10", "Doob-Meyer", ac10(res), ok);
  print("AC-11", "optional sampling", ac11(res), ok);
  print("AC-12", "upcrossing", ac12(res), ok);
  print("AC-13", "stability", ac13(res), ok);

  cli::RunOptions second;
  second.output_dir = (out / "run2").string();
  const auto run2 = cli::run(config, second);
  Verdict v14;
  const std::string s1 = slurp(run1.summary_path);
  const std::string s2 = slurp(run2.summary_path);
  v14.require(!s1.empty() && s1 == s2,
              "summary.csv byte-identical across runs (" + std::to_string(s1.size()) + " bytes)");
  print("AC-14", "determinism", v14, ok);
  return ok ? 0 : 1;
}
