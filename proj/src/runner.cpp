#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include "qgx/checkers.hpp"
#include "qgx/errors.hpp"
#include "qgx/expression.hpp"
#include "qgx/runner.hpp"
#include "qgx/surface_io.hpp"
#include "qgx/terminal_family.hpp"

namespace qgx::cli {

using nlohmann::json;
using lab::CheckReport;
using lab::GridSpec;

namespace {

using Plots = std::vector<std::pair<std::string, std::string>>;

GridSpec grid_from(const json& j, GridSpec def = {}) {
  GridSpec g = def;
  if (j.is_null()) return g;
  g.T = j.value("T", g.T);
  g.n_steps = j.value("n_steps", g.n_steps);
  g.n_points = j.value("n_points", g.n_points);
  g.half_width = j.value("half_width", g.half_width);
  return g;
}

generators::Generator gen_from(const json& spec, const char* what = "generator") {
  if (spec.is_null()) throw InvalidArgument(std::string("missing ") + what);
  return generators::builtin(spec);
}

bsde::TerminalCondition terminal_from(const JobSpec& job, const char* fallback = "tanh(x)") {
  return bsde::TerminalCondition::expression(
      job.terminal.is_string() ? job.terminal.get<std::string>() : fallback);
}

std::vector<bsde::TerminalCondition> terminals_from(const json& params, std::uint64_t seed) {
  const json t = params.value("terminals", json("fixed"));
  if (t.is_string()) {
    const auto name = t.get<std::string>();
    if (name == "fixed") return lab::fixed_terminals();
    if (name == "family") return lab::terminal_family(seed, params.value("n_random", 20));
    throw InvalidArgument("terminals must be 'fixed', 'family' or a list of expressions");
  }
  if (!t.is_array() || t.empty()) throw InvalidArgument("terminals: empty or malformed list");
  std::vector<bsde::TerminalCondition> out;
  for (const auto& e : t) out.push_back(bsde::TerminalCondition::expression(e.get<std::string>()));
  return out;
}

double tol(const json& params, const char* key, double def, double scale) {
  return params.value(key, def) * scale;
}

std::string fmt(double v) {
  if (!std::isfinite(v)) return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10e", v);
  return buf;
}

// The process X on the operator grids.
stochastic::GridField process_from(const json& params, const gexp::GExpectationOperator& op) {
  const json p = params.value("process", json{{"type", "martingale"}});
  const std::string type = p.value("type", std::string("martingale"));
  const auto& tg = op.tgrid();
  const auto& xg = op.xgrid();
  if (type == "martingale") return op.surface().u;
  if (type == "drift") {
    const double c = p.value("c", 0.2);
    stochastic::GridField X = op.surface().u;
    for (std::size_t i = 0; i <= tg.n_steps(); ++i) {
      for (double& v : X.row(i)) v += c * tg.node(i);
    }
    return X;
  }
  if (type == "classical") {
    const auto rate = std::make_shared<const Expression>(
        Expression::parse(p.value("rate", std::string("0.2+0.1*tanh(x)")), "x"));
    bsde::DriverV d;
    d.state_dependent = true;
    d.density = [rate](double, double x) { return -rate->eval({0.0, 0.0, 0.0, x}); };
    bsde::SolverOptions o = op.options();
    o.enforce_bound = false;
    return bsde::solve(op.generator(), op.terminal(), tg, xg, &d, o).u;
  }
  throw InvalidArgument("process.type must be martingale, drift or classical");
}

stochastic::FiniteStoppingTime stopping_from(const json& j, const stochastic::TimeGrid& eg) {
  const std::string type = j.value("type", std::string("deterministic"));
  if (type == "deterministic") {
    return stochastic::FiniteStoppingTime::deterministic(eg, eg.index_of(j.value("t", 0.0)));
  }
  if (type == "two_valued") {
    const double above = j.value("above", 0.0);
    return stochastic::FiniteStoppingTime::two_valued(
        eg, eg.index_of(j.value("s1", 0.5 * eg.t_end())), eg.index_of(j.value("s2", eg.t_end())),
        [above](double x) { return x > above; }, "two_valued(B>" + fmt(above) + ")");
  }
  if (type == "hitting") {
    return stochastic::FiniteStoppingTime::first_hitting(eg, j.value("level", 1.0),
                                                         eg.index_of(j.value("cap", eg.t_end())));
  }
  throw InvalidArgument("stopping time type must be deterministic, two_valued or hitting");
}

gexp::Classification classification_from(const json& params) {
  const std::string type =
      params.value("process", json::object()).value("type", std::string("martingale"));
  const std::string expected = params.value("expected", std::string());
  const std::string name = expected.empty() ? (type == "martingale" ? "martingale" : "submartingale")
                                            : expected;
  if (name == "martingale") return gexp::Classification::Martingale;
  if (name == "submartingale") return gexp::Classification::Submartingale;
  if (name == "supermartingale") return gexp::Classification::Supermartingale;
  throw InvalidArgument("expected must be martingale, submartingale or supermartingale");
}

CheckReport run_solve(const JobSpec& job, Plots* plots) {
  const auto gen = gen_from(job.generator);
  const auto phi = terminal_from(job);
  const GridSpec grid = grid_from(job.grid);
  const auto tg = grid.time_grid();
  const auto xg = grid.space_grid({phi});
  const auto t0 = std::chrono::steady_clock::now();
  const auto s = bsde::solve(gen, phi, tg, xg);
  CheckReport rep;
  rep.theorem = "solve";
  rep.relation = "u_t + u_xx/2 + g(t,u,u_x) = 0, u(T) = phi";
  rep.inputs = {{"generator", gen.spec()}, {"terminal", phi.description}, {"grid", grid.to_json()}};
  rep.observed = {{"u0_at_0", s.y(0.0, 0.0)},
                  {"sup_u", s.meta.sup_u},
                  {"a_priori_bound", s.meta.a_priori_bound},
                  {"max_step_iterations", s.meta.max_step_iterations},
                  {"z_clamped", s.meta.z_clamped},
                  {"certified", s.meta.certified()}};
  rep.status = lab::Status::Informational;
  rep.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (plots != nullptr) {
    const std::size_t rows = job.params.value("time_rows", std::size_t{100});
    std::ostringstream os;
    const std::size_t stride = std::max<std::size_t>(1, tg.n_steps() / std::max<std::size_t>(1, rows));
    bsde::write_surface_csv(s, os, "", stride);
    plots->emplace_back("surface", os.str());
  }
  return rep;
}

CheckReport run_check(const JobSpec& job, double ts, Plots* plots) {
  const json& p = job.params;
  const std::string& c = job.checker;
  if (c == "oracle") {
    return lab::check_oracle(p.value("kind", std::string("heat")), grid_from(job.grid));
  }
  if (c == "axioms") {
    lab::AxiomOptions o;
    o.time_consistency_tolerance = tol(p, "time_consistency_tolerance", 5e-3, ts);
    o.zero_one_tolerance = tol(p, "zero_one_tolerance", 5e-3, ts);
    o.check_refinement = p.value("check_refinement", true);
    o.zero_one_paths = p.value("zero_one_paths", o.zero_one_paths);
    o.seed = job.seed;
    return lab::check_axioms(gen_from(job.generator), terminals_from(p, job.seed),
                             grid_from(job.grid, {1.0, 500, 401, 0.0}), o);
  }
  if (c == "strict_comparison") {
    const auto phi1 = terminal_from(job);
    const auto phi2 = bsde::TerminalCondition::expression(
        p.value("phi2", std::string("tanh(x)-0.1/(1+(x/2)^2)")));
    return lab::check_strict_comparison(gen_from(job.generator), phi1, phi2, grid_from(job.grid),
                                        p.value("gap", 1e-4));
  }
  if (c == "bmo") {
    lab::BmoCheckOptions o;
    o.ensemble_steps = p.value("ensemble_steps", o.ensemble_steps);
    o.ensemble_paths = p.value("ensemble_paths", o.ensemble_paths);
    o.n_subpaths = p.value("n_subpaths", o.n_subpaths);
    o.seed = job.seed;
    return lab::check_bmo(gen_from(job.generator), terminal_from(job), grid_from(job.grid), o);
  }
  if (c == "determinism") {
    return lab::check_determinism(gen_from(job.generator), terminal_from(job), p.value("s", 0.0),
                                  p.value("t", 1.0), grid_from(job.grid),
                                  tol(p, "tolerance", 1e-6, ts));
  }
  if (c == "representation") {
    lab::RepresentationOptions o;
    o.delta = p.value("delta", o.delta);
    o.eps_ladder = p.value("eps_ladder", o.eps_ladder);
    o.steps_per_eps = p.value("steps_per_eps", o.steps_per_eps);
    o.points_per_radius = p.value("points_per_radius", o.points_per_radius);
    o.relative_tolerance = tol(p, "relative_tolerance", o.relative_tolerance, ts);
    o.absolute_floor = tol(p, "absolute_floor", o.absolute_floor, ts);
    auto rep = lab::check_representation(gen_from(job.generator), p.value("t", 0.0),
                                         p.value("y", 0.0), p.value("z", 1.0), o);
    if (plots != nullptr) {
      std::string body = "eps,quotient\n";
      const auto& q = rep.observed.at("quotients");
      for (std::size_t k = 0; k < q.size(); ++k) {
        body += fmt(o.eps_ladder[k]) + "," + fmt(q[k].get<double>()) + "\n";
      }
      plots->emplace_back("quotients", body);
    }
    return rep;
  }
  if (c == "converse_comparison") {
    std::vector<lab::Probe> probes = lab::default_probes();
    if (p.contains("probes")) {
      probes.clear();
      for (const auto& q : p.at("probes")) {
        probes.push_back({q.value("t", 0.0), q.value("y", 0.0), q.value("z", 0.0)});
      }
    }
    return lab::check_converse_comparison(
        gen_from(job.generator), gen_from(p.value("generator2", json()), "params.generator2"),
        probes, terminals_from(p, job.seed), grid_from(job.grid, {1.0, 1000, 401, 0.0}));
  }
  if (c == "translation") {
    return lab::check_translation(gen_from(job.generator),
                                  p.value("constants", std::vector<double>{0.7, 1.0}),
                                  terminals_from(p, job.seed),
                                  grid_from(job.grid, {1.0, 1000, 401, 0.0}),
                                  tol(p, "tolerance", 1e-6, ts));
  }
  if (c == "jensen") {
    return lab::check_jensen(gen_from(job.generator),
                             lab::convex_function(p.value("F", std::string("abs"))),
                             terminals_from(p, job.seed),
                             grid_from(job.grid, {1.0, 1000, 401, 0.0}),
                             tol(p, "tolerance", 1e-6, ts));
  }
  if (c == "doob_meyer" || c == "optional_sampling" || c == "upcrossing") {
    const GridSpec grid = grid_from(job.grid, {1.0, 1024, 401, 0.0});
    const auto phi = terminal_from(job);
    const gexp::GExpectationOperator op(gen_from(job.generator), phi, grid.time_grid(),
                                        grid.space_grid({phi}));
    const auto X = process_from(p, op);
    if (c == "doob_meyer") {
      return lab::doob_meyer_decompose(op, X, p.value("coarse_steps", std::size_t{8}), nullptr,
                                       tol(p, "reconstruction_tolerance", 5e-3, ts))
          .report;
    }
    if (c == "optional_sampling") {
      const stochastic::TimeGrid eg(0.0, grid.T, p.value("ensemble_steps", std::size_t{16}));
      const auto ens =
          stochastic::PathEnsemble::simulate(eg, p.value("n_paths", std::size_t{10000}), job.seed);
      const auto sigma = stopping_from(p.value("sigma", json{{"type", "deterministic"}}), eg);
      const auto tau = stopping_from(p.value("tau", json{{"type", "hitting"}}), eg);
      return lab::check_optional_sampling(op, X, classification_from(p), sigma, tau, ens,
                                          tol(p, "tolerance", 5e-3, ts));
    }
    const std::size_t steps = p.value("ensemble_steps", std::size_t{64});
    const std::size_t parts = p.value("partition_points", std::size_t{9});
    if (parts < 2 || (steps % (parts - 1)) != 0) {
      throw InvalidArgument("partition_points - 1 must divide ensemble_steps");
    }
    const stochastic::TimeGrid eg(0.0, grid.T, steps);
    std::vector<double> partition;
    for (std::size_t k = 0; k < parts; ++k) partition.push_back(eg.node(k * steps / (parts - 1)));
    const auto ens =
        stochastic::PathEnsemble::simulate(eg, p.value("n_paths", std::size_t{100000}), job.seed);
    auto up = lab::check_upcrossing(op, X, p.value("a", -0.2), p.value("b", 0.2), partition, ens);
    if (plots != nullptr) {
      std::map<int, std::size_t> hist;
      for (int n : up.counts) ++hist[n];
      std::string body = "upcrossings,frequency\n";
      for (const auto& [n, f] : hist) {
        body += std::to_string(n) + "," + fmt(static_cast<double>(f) / up.counts.size()) + "\n";
      }
      plots->emplace_back("upcrossing_histogram", body);
    }
    return up.report;
  }
  if (c == "stability") {
    const auto gen = gen_from(job.generator);
    const auto phi = terminal_from(job);
    const auto ladder = p.value("ladder", std::vector<int>{4, 8, 16, 32, 64});
    const std::string kind = p.value("kind", std::string("mollify"));
    std::vector<generators::Generator> gens;
    std::vector<bsde::TerminalCondition> terms;
    std::vector<double> bounds;
    for (int n : ladder) {
      if (n <= 0) throw InvalidArgument("stability ladder entries must be positive");
      if (kind == "mollify") {
        gens.push_back(generators::mollify(gen, 1.0 / n));
        terms.push_back(phi);
      } else if (kind == "terminal_scale") {
        gens.push_back(gen);
        const auto f = phi.phi;
        const double s = 1.0 - 1.0 / n;
        terms.push_back(bsde::TerminalCondition::function([f, s](double x) { return s * f(x); },
                                                          phi.description));
      } else {
        throw InvalidArgument("stability kind must be mollify or terminal_scale");
      }
    }
    return lab::check_stability(gens, terms, gen, phi, grid_from(job.grid, {1.0, 1000, 401, 0.0}),
                                tol(p, "tolerance", 1e-3, ts));
  }
  throw InvalidArgument("unknown checker '" + c + "'");
}

}  // namespace

JobResult run_job(const JobSpec& job, double tol_scale, Plots* plots) {
  JobResult r;
  r.id = job.id;
  r.checker = job.kind == "solve" ? "solve" : job.checker;
  try {
    r.report = job.kind == "solve" ? run_solve(job, plots) : run_check(job, tol_scale, plots);
    r.report.metadata["job_id"] = job.id;
    r.report.metadata["seed"] = job.seed;
    r.report.metadata["tol_scale"] = tol_scale;
  } catch (const std::exception& e) {
    r.error = e.what();
    r.report.theorem = r.checker;
    r.report.status = lab::Status::Fail;
    r.report.margin = -std::numeric_limits<double>::infinity();
  }
  return r;
}

std::string summary_csv(const RunConfig& config, const std::vector<JobResult>& results) {
  std::string out = "# config_digest=" + config.digest() + "\n";
  out += "job_id,checker,status,pass,margin,tolerance,inputs_digest,error\n";
  for (const auto& r : results) {
    std::string err = r.error;
    for (char& ch : err) {
      if (ch == ',' || ch == '\n' || ch == '"') ch = ';';
    }
    out += r.id + "," + r.checker + "," + lab::to_string(r.report.status) + "," +
           (r.failed() ? "false" : "true") + "," + fmt(r.report.margin) + "," +
           fmt(r.report.tolerance) + "," + (r.error.empty() ? r.report.inputs_digest() : "") +
           "," + err + "\n";
  }
  return out;
}

RunResult run(const RunConfig& input, const RunOptions& opts) {
  RunConfig config = input;
  if (opts.seed_override) {
    for (auto& j : config.jobs) j.seed = *opts.seed_override;
  }
  if (!(opts.tol_scale > 0.0)) throw InvalidArgument("tol_scale must be positive");
  const std::string dir = opts.output_dir.value_or(config.output_dir);
  std::filesystem::create_directories(dir);
  const std::string digest = config.digest();

  const std::size_t n = config.jobs.size();
  std::vector<JobResult> results(n);
  std::vector<Plots> plots(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      results[i] = run_job(config.jobs[i], opts.tol_scale, &plots[i]);
    }
  };
  const std::size_t workers = std::max<std::size_t>(1, std::min(opts.jobs, n));
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  RunResult out;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& r = results[i];
    json doc = {{"schema_version", config.schema_version},
                {"config_digest", digest},
                {"job", config.jobs[i].to_json()},
                {"report", r.report.to_json()}};
    if (!r.error.empty()) doc["error"] = r.error;
    std::ofstream(dir + "/" + r.id + ".json") << doc.dump(2) << "\n";
    for (const auto& [name, body] : plots[i]) {
      std::ofstream(dir + "/" + r.id + "_" + name + ".csv")
          << "# config_digest=" << digest << "\n" << body;
    }
    if (r.failed()) out.failing.push_back(r.id);
  }
  out.summary_path = dir + "/summary.csv";
  std::ofstream(out.summary_path) << summary_csv(config, results);
  out.results = std::move(results);
  return out;
}

}  // namespace qgx::cli
