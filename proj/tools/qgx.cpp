#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "qgx/bsde_solver.hpp"
#include "qgx/errors.hpp"
#include "qgx/generators.hpp"
#include "qgx/paths.hpp"
#include "qgx/runner.hpp"
#include "qgx/surface_io.hpp"

namespace {

int cmd_run(const std::string& config_path, const qgx::cli::RunOptions& opts) {
  qgx::cli::RunConfig config;
  try {
    config = qgx::cli::RunConfig::load(config_path);
  } catch (const qgx::ParseError& e) {
    std::cerr << config_path << ":" << e.line() << ":" << e.column() << ": " << e.what() << "\n";
    return 2;
  } catch (const qgx::InvalidArgument& e) {
    std::cerr << config_path << ": " << e.what() << "\n";
    return 2;
  }
  const auto result = qgx::cli::run(config, opts);
  for (const auto& r : result.results) {
    std::cout << r.id << "  " << r.checker << "  " << qgx::lab::to_string(r.report.status);
    if (!r.error.empty()) std::cout << "  error: " << r.error;
    std::cout << "\n";
  }
  std::cout << "summary: " << result.summary_path << "\n";
  if (!result.failing.empty()) {
    std::cerr << "failing jobs:";
    for (const auto& id : result.failing) std::cerr << " " << id;
    std::cerr << "\n";
  }
  return result.exit_code();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qgx: quadratic BSDE solver and g-expectation theorem checks"};
  app.require_subcommand(1);

  std::string config_path;
  qgx::cli::RunOptions run_opts;
  std::string out_dir;
  std::uint64_t seed_override = 0;
  auto* run = app.add_subcommand("run", "run the jobs of a JSON config");
  run->add_option("--config", config_path, "run config (JSON)")->required();
  auto* out_opt = run->add_option("--out", out_dir, "output directory (overrides the config)");
  run->add_option("--jobs", run_opts.jobs, "concurrent jobs")->check(CLI::PositiveNumber);
  auto* seed_opt = run->add_option("--seed-override", seed_override, "replace every job seed");
  run->add_option("--tol-scale", run_opts.tol_scale, "multiply checker tolerances")
      ->check(CLI::PositiveNumber);

  std::string checker;
  auto* desc = app.add_subcommand("describe", "print what a checker asserts");
  desc->add_option("checker", checker, "checker id (empty: list all)");

  std::string gen_spec = R"({"name":"zero"})";
  std::string terminal = "tanh(x)";
  double T = 1.0;
  std::size_t steps = 2000;
  std::size_t points = 801;
  std::string surface_out = "surface.csv";
  bool binary = false;
  auto* solve = app.add_subcommand("solve", "solve one BSDE and write its surface");
  solve->add_option("--generator", gen_spec, "generator spec (JSON)");
  solve->add_option("--terminal", terminal, "terminal expression in x");
  solve->add_option("--T", T, "horizon")->check(CLI::PositiveNumber);
  solve->add_option("--steps", steps, "time steps")->check(CLI::PositiveNumber);
  solve->add_option("--points", points, "space points (odd)");
  solve->add_option("--out", surface_out, "output file");
  solve->add_flag("--binary", binary, "write the binary surface format");

  std::size_t n_paths = 100;
  std::uint64_t seed = 1;
  std::string paths_out = "paths.csv";
  auto* paths = app.add_subcommand("paths", "simulate and export a Brownian ensemble");
  paths->add_option("--T", T, "horizon")->check(CLI::PositiveNumber);
  paths->add_option("--steps", steps, "time steps")->check(CLI::PositiveNumber);
  paths->add_option("--paths", n_paths, "number of paths")->check(CLI::PositiveNumber);
  paths->add_option("--seed", seed, "seed");
  paths->add_option("--out", paths_out, "output CSV");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      if (*out_opt) run_opts.output_dir = out_dir;
      if (*seed_opt) run_opts.seed_override = seed_override;
      return cmd_run(config_path, run_opts);
    }
    if (*desc) {
      std::cout << qgx::cli::describe(checker);
      return 0;
    }
    if (*solve) {
      const auto gen = qgx::generators::builtin(nlohmann::json::parse(gen_spec));
      const auto phi = qgx::bsde::TerminalCondition::expression(terminal);
      const qgx::stochastic::TimeGrid tg(0.0, T, steps);
      const auto xg = qgx::bsde::default_space_grid(phi.phi, T, points);
      const auto s = qgx::bsde::solve(gen, phi, tg, xg);
      std::ofstream os(surface_out, binary ? std::ios::binary : std::ios::out);
      if (binary) {
        qgx::bsde::write_surface_binary(s, os);
      } else {
        qgx::bsde::write_surface_csv(s, os);
      }
      std::cout << "u(0,0) = " << s.y(0.0, 0.0) << "\n";
      return 0;
    }
    if (*paths) {
      const auto ens =
          qgx::stochastic::PathEnsemble::simulate(qgx::stochastic::TimeGrid(0.0, T, steps), n_paths, seed);
      std::ofstream os(paths_out);
      ens.write_csv(os);
      return 0;
    }
  } catch (const qgx::ParseError& e) {
    std::cerr << "parse error at column " << e.column() << ": " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
