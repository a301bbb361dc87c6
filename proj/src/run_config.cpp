#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "qgx/bsde_solver.hpp"
#include "qgx/errors.hpp"
#include "qgx/generators.hpp"
#include "qgx/runner.hpp"

namespace qgx::cli {

using nlohmann::json;

namespace {

struct CheckerText {
  const char* id;
  const char* role;
  const char* relation;
  const char* inputs;
  const char* tolerances;
};

const CheckerText kCheckers[] = {
    {"oracle", "closed-form oracles for the solver",
     "heat: zero generator, u(0,x) = E[tanh(x + B_T)] at 11 states; girsanov: linear(0.3), "
     "u(0,0) = E[tanh(B_T + 0.3T)]; entropic: entropic(1) with clip(x,-2,2), "
     "u(0,0) = log E[exp(clip(B_T))] and the error shrinks by >= 1.5 when the grid is refined x2",
     "params.kind = heat | girsanov | entropic; grid",
     "heat 1e-4, girsanov 1e-3, entropic 2e-3"},
    {"axioms", "axioms of the g-evaluation",
     "monotonicity (xi >= eta => E[xi] >= E[eta] - 1e-9), constant preservation when g(t,y,0)=0, "
     "zero-one law on interval events {B_s in I}, translation invariance for y-independent g, "
     "time consistency E_{0,T/2}[E_{T/2,T}[xi]] = E_{0,T}[xi] with a restarted second stage",
     "generator; params.terminals (fixed | family | list); grid; seed",
     "time consistency 5e-3 (must not grow under refinement), zero-one 5e-3, others 1e-9/1e-8"},
    {"strict_comparison", "strict comparison",
     "phi1 >= phi2 with a strict gap on a set of positive measure => E^g[phi1] > E^g[phi2] at "
     "every interior state at t = 0",
     "generator; terminal (phi1); params.phi2; params.gap", "required gap 1e-4"},
    {"bmo", "BMO bound of Z",
     "sup over a finite stopping-time family of E[int_tau^T Z^2 ds | F_tau] <= "
     "(1+T) exp(8 k ||Y||_inf)",
     "generator; terminal; grid; params.ensemble_steps, ensemble_paths, n_subpaths; seed",
     "bound check only (lower estimate of the BMO norm)"},
    {"determinism", "deterministic generators give deterministic evaluations",
     "E^g_{s,t}[phi(B_t - B_s)] is the same from every starting state",
     "generator; terminal; params.s, params.t; grid", "spread 1e-6"},
    {"representation", "representation of the generator",
     "g(t,y,z) = lim_{eps->0} (E^g_{t,(t+eps)^tau}[y + z(B_{(t+eps)^tau} - B_t)] - y)/eps, tau the "
     "exit time of the ball of radius delta/(1+|z|); Richardson limit over the eps ladder",
     "generator; params.t, y, z, delta, eps_ladder, steps_per_eps, points_per_radius",
     "max(5% of |g|, 0.01) on the limit; error ladder monotone in eps"},
    {"converse_comparison", "converse comparison",
     "E^{g1}[xi|F_t] <= E^{g2}[xi|F_t] for every terminal in the family => g1 <= g2, compared "
     "through representation quotients at probe points",
     "generator (g1); params.generator2; params.terminals; grid",
     "stage 1 exact to 1e-8, quotient order 1e-6; a failed stage 1 is reported as "
     "hypothesis-not-satisfied with a witness"},
    {"translation", "translation characterization",
     "g independent of y <=> E^g[xi + c] = E^g[xi] + c",
     "generator; params.constants; params.terminals; grid",
     "flagged y-independent: deviation < 1e-6; otherwise some deviation > 1e-5"},
    {"jensen", "Jensen inequality",
     "F(E^g[xi|F_t]) <= E^g[F(xi)|F_t] wherever dF(E^g[xi|F_t]) meets the complement of (0,1); "
     "g convex in z, y-independent, g(t,y,0) = 0",
     "generator; params.F = abs | positive_part | identity | half_softplus; params.terminals",
     "1e-6 where the condition holds; no assertion elsewhere"},
    {"doob_meyer", "Doob-Meyer decomposition",
     "X = X_T + int g ds - (A_T - A_t) - int Z dB, A increasing with A_0 = 0, "
     "A_{k+1} - A_k = E^g_{t_k,t_{k+1}}[X_{t_{k+1}}] - X_{t_k}; re-solving with driver -A "
     "reproduces X",
     "generator; terminal; params.process; params.coarse_steps", "increments >= -1e-8, round trip 5e-3"},
    {"optional_sampling", "optional sampling",
     "E^g_{sigma,tau}[X_tau] (=, >=, <=) X_sigma for finitely valued sigma <= tau",
     "generator; terminal; params.process, sigma, tau, n_paths, ensemble_steps; seed",
     "5e-3 per path"},
    {"upcrossing", "upcrossing inequality",
     "E[E(beta.B)_{t_n} U_a^b(X~, D)] <= (||X|| + k(J+1)T + |a|)/(b-a), X~_t = X_t + k(J+1)t, "
     "J = (||X|| + kT)e^{kT}, beta = int_0^1 g_z(t, Y, lambda Z) dlambda; "
     "E int beta^2 ds <= 2 ell(J)^2 (t_n + E int Z^2 ds)",
     "generator; terminal; params.process, a, b, partition_points, ensemble_steps, n_paths; seed",
     "3 Monte Carlo standard errors; weight mean within 3 standard errors of 1"},
    {"stability", "stability under generator and terminal convergence",
     "g_n -> g locally uniformly, xi_n -> xi => sup |Y^n - Y| -> 0 (monotone error ladder)",
     "generator; terminal; params.ladder (mollify radii 1/n or terminal_scale)",
     "final error 1e-3"},
};

std::pair<std::size_t, std::size_t> line_col(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  const std::size_t end = std::min(byte > 0 ? byte - 1 : 0, text.size());
  for (std::size_t i = 0; i < end; ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

}  // namespace

const std::vector<std::string>& known_checkers() {
  static const std::vector<std::string> ids = [] {
    std::vector<std::string> v;
    for (const auto& c : kCheckers) v.emplace_back(c.id);
    return v;
  }();
  return ids;
}

std::string describe(const std::string& checker) {
  std::ostringstream os;
  if (checker.empty()) {
    for (const auto& c : kCheckers) os << c.id << "  " << c.role << "\n";
    return os.str();
  }
  for (const auto& c : kCheckers) {
    if (checker == c.id) {
      os << c.id << ": " << c.role << "\n"
         << "  relation:   " << c.relation << "\n"
         << "  inputs:     " << c.inputs << "\n"
         << "  tolerances: " << c.tolerances << "\n";
      return os.str();
    }
  }
  throw InvalidArgument("unknown checker '" + checker + "'");
}

json JobSpec::to_json() const {
  json j = {{"id", id}, {"kind", kind}, {"seed", seed}, {"params", params}};
  if (kind == "check") j["checker"] = checker;
  if (!generator.is_null()) j["generator"] = generator;
  if (!terminal.is_null()) j["terminal"] = terminal;
  if (!grid.is_null()) j["grid"] = grid;
  return j;
}

json RunConfig::to_json() const {
  json jobs_j = json::array();
  for (const auto& j : jobs) jobs_j.push_back(j.to_json());
  return {{"schema_version", schema_version}, {"output_dir", output_dir}, {"jobs", jobs_j}};
}

std::string RunConfig::digest() const { return lab::fnv1a_hex(to_json().dump()); }

RunConfig RunConfig::from_json(const json& j) {
  if (!j.is_object()) throw InvalidArgument("config: top level must be an object");
  RunConfig c;
  c.schema_version = j.value("schema_version", 1);
  if (c.schema_version != 1) {
    throw InvalidArgument("config: unsupported schema_version " + std::to_string(c.schema_version));
  }
  if (j.contains("output_dir")) c.output_dir = j.at("output_dir").get<std::string>();
  if (!j.contains("jobs") || !j.at("jobs").is_array()) {
    throw InvalidArgument("config: 'jobs' must be an array");
  }
  std::set<std::string> seen;
  for (const auto& jj : j.at("jobs")) {
    if (!jj.is_object()) throw InvalidArgument("config: every job must be an object");
    JobSpec s;
    if (!jj.contains("id") || !jj.at("id").is_string()) {
      throw InvalidArgument("config: job without a string 'id'");
    }
    s.id = jj.at("id").get<std::string>();
    const std::string where = "job '" + s.id + "': ";
    if (s.id.empty() || s.id.find_first_of("/\\ ,\n") != std::string::npos) {
      throw InvalidArgument(where + "id must be non-empty without separators");
    }
    if (!seen.insert(s.id).second) throw InvalidArgument(where + "duplicate id");
    s.kind = jj.value("kind", std::string("check"));
    if (s.kind != "check" && s.kind != "solve") {
      throw InvalidArgument(where + "kind must be 'check' or 'solve'");
    }
    if (!jj.contains("seed") || !jj.at("seed").is_number_integer() ||
        jj.at("seed").get<std::int64_t>() < 0) {
      throw InvalidArgument(where + "an explicit non-negative integer 'seed' is required");
    }
    s.seed = jj.at("seed").get<std::uint64_t>();
    if (s.kind == "check") {
      s.checker = jj.value("checker", std::string());
      const auto& ids = known_checkers();
      if (std::find(ids.begin(), ids.end(), s.checker) == ids.end()) {
        throw InvalidArgument(where + "unknown checker '" + s.checker + "'");
      }
    }
    if (jj.contains("generator")) s.generator = jj.at("generator");
    if (jj.contains("terminal")) s.terminal = jj.at("terminal");
    if (jj.contains("grid")) s.grid = jj.at("grid");
    if (jj.contains("params")) s.params = jj.at("params");
    if (!s.params.is_object()) throw InvalidArgument(where + "params must be an object");
    if (!s.grid.is_null() && !s.grid.is_object()) throw InvalidArgument(where + "grid must be an object");
    try {
      if (!s.generator.is_null()) generators::builtin(s.generator);
      if (s.terminal.is_string()) bsde::TerminalCondition::expression(s.terminal.get<std::string>());
    } catch (const ParseError& e) {
      throw InvalidArgument(where + "terminal: " + e.what());
    } catch (const InvalidArgument& e) {
      throw InvalidArgument(where + e.what());
    }
    if (!s.terminal.is_null() && !s.terminal.is_string()) {
      throw InvalidArgument(where + "terminal must be an expression string");
    }
    if (s.kind == "solve" && (s.generator.is_null() || s.terminal.is_null())) {
      throw InvalidArgument(where + "solve jobs need a generator and a terminal");
    }
    c.jobs.push_back(std::move(s));
  }
  return c;
}

RunConfig RunConfig::parse(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto [line, col] = line_col(text, e.byte);
    throw ParseError("config: malformed JSON at line " + std::to_string(line) + ", column " +
                         std::to_string(col),
                     line, col);
  }
  try {
    return from_json(j);
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("config: ") + e.what());
  }
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("config: cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

}  // namespace qgx::cli
