/*
 Copyright 2026 The avrfo Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "avrfo/cli.hpp"

namespace {

using namespace avrfo;

// Raw flag values; applied on top of defaults or a loaded manifest.
struct Flags {
  std::string case_id;
  std::string mode;
  std::size_t pop = 0;
  std::size_t max_gens = 0;
  double seed_x0 = 0.0;
  double dt = 0.0;
  double horizon = 0.0;
  std::string disturbance_at;
  std::string j2_mode;
  std::string derivative_on;
  std::size_t threads = 0;
  std::string plant;
  bool no_pareto_limit = false;
  std::string manifest;
  std::string out_dir = "out";
};

struct Registered {
  CLI::Option* case_id;
  CLI::Option* mode;
  CLI::Option* pop;
  CLI::Option* max_gens;
  CLI::Option* seed_x0;
  CLI::Option* dt;
  CLI::Option* horizon;
  CLI::Option* disturbance_at;
  CLI::Option* j2_mode;
  CLI::Option* derivative_on;
  CLI::Option* threads;
  CLI::Option* plant;
  CLI::Option* no_pareto_limit;
  CLI::Option* manifest;
};

Registered add_common(CLI::App* app, Flags& f) {
  Registered r{};
  r.case_id = app->add_option("--case", f.case_id, "Objective set")->check(CLI::IsMember({"I", "II", "III"}));
  r.mode = app->add_option("--mode", f.mode, "Controller family")->check(CLI::IsMember({"pid", "fopid"}));
  r.pop = app->add_option("--pop", f.pop, "Population size (default 100)")->check(CLI::Range(2, 100000));
  r.max_gens = app->add_option("--max-gens", f.max_gens, "Generation cap (default 500)");
  r.seed_x0 = app->add_option("--seed-x0", f.seed_x0, "Logistic map seed (default 0.2027)")
                  ->check(CLI::Range(0.0, 1.0));
  r.dt = app->add_option("--dt", f.dt, "Simulation step in seconds (default 1e-3)")->check(CLI::PositiveNumber);
  r.horizon = app->add_option("--horizon", f.horizon, "Horizon in seconds (default 10 for case I, 20 otherwise)")
                  ->check(CLI::PositiveNumber);
  r.disturbance_at = app->add_option("--disturbance-at", f.disturbance_at, "Load disturbance injection point")
                         ->check(CLI::IsMember({"generator-input", "generator-output"}));
  r.j2_mode = app->add_option("--j2-mode", f.j2_mode, "Control-effort reading")
                  ->check(CLI::IsMember({"deviation", "increment"}));
  r.derivative_on = app->add_option("--derivative-on", f.derivative_on, "Signal the derivative term acts on")
                        ->check(CLI::IsMember({"error", "measurement"}));
  r.threads = app->add_option("--threads", f.threads, "Evaluation threads (0 = all cores)");
  r.plant = app->add_option("--plant", f.plant, "Plant parameter JSON file")->check(CLI::ExistingFile);
  r.no_pareto_limit = app->add_flag("--no-pareto-limit", f.no_pareto_limit, "Do not cap the first front");
  r.manifest = app->add_option("--manifest", f.manifest, "Reproduce the settings of a manifest.json")
                   ->check(CLI::ExistingFile);
  app->add_option("--out-dir", f.out_dir, "Output directory")->capture_default_str();
  return r;
}

cli::RunSettings resolve(const Flags& f, const Registered& r) {
  cli::RunSettings s;
  if (r.manifest->count()) s = cli::load_manifest(f.manifest).settings;
  if (r.case_id->count()) s.case_id = objectives::parse_case(f.case_id);
  if (r.mode->count()) s.mode = cli::parse_mode(f.mode);
  if (r.pop->count()) s.nsga.pop_size = f.pop;
  if (r.max_gens->count()) s.nsga.max_generations = f.max_gens;
  if (r.seed_x0->count()) s.seed_x0 = f.seed_x0;
  if (r.dt->count()) s.dt = f.dt;
  if (r.horizon->count()) s.horizon = f.horizon;
  if (r.disturbance_at->count()) s.injection = cli::parse_injection(f.disturbance_at);
  if (r.j2_mode->count()) s.j2_mode = objectives::parse_j2_mode(f.j2_mode);
  if (r.derivative_on->count()) s.derivative = cli::parse_derivative(f.derivative_on);
  if (r.threads->count()) s.nsga.threads = f.threads;
  if (r.plant->count()) s.plant = avr::load_plant_params(f.plant);
  if (r.no_pareto_limit->count()) s.nsga.limit_pareto = false;
  moea::ChaoticRngState::seeded(s.seed_x0);  // reject degenerate seeds before any work
  for (const auto& w : s.plant.range_warnings()) std::cerr << "warning: " << w << '\n';
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-objective PID/FOPID tuning for an AVR loop"};
  app.set_version_flag("--version", cli::version());
  app.require_subcommand(1);

  Flags opt_flags;
  auto* optimize = app.add_subcommand("optimize", "Run NSGA-II and write front.csv, genlog.csv, manifest.json");
  const auto opt_reg = add_common(optimize, opt_flags);

  Flags eval_flags;
  std::string eval_genes;
  bool traces = false;
  auto* evaluate = app.add_subcommand("evaluate", "Re-evaluate gene rows and write objectives.csv");
  const auto eval_reg = add_common(evaluate, eval_flags);
  evaluate->add_option("--genes", eval_genes, "CSV with Kp,Ki,Kd[,lambda,mu] columns")->required()->check(CLI::ExistingFile);
  evaluate->add_flag("--traces", traces, "Also write per-row t,r,y,u,e traces");

  Flags rob_flags;
  std::string rob_genes;
  cli::RobustnessGrid grid;
  auto* robustness = app.add_subcommand("robustness", "K_G x tau_G sweep, writes robustness.csv");
  const auto rob_reg = add_common(robustness, rob_flags);
  robustness->add_option("--genes", rob_genes, "CSV with Kp,Ki,Kd[,lambda,mu] columns")->required()->check(CLI::ExistingFile);
  robustness->add_option("--kg", grid.kg, "K_G grid values")->delimiter(',');
  robustness->add_option("--taug", grid.tau_g, "tau_G grid values")->delimiter(',');

  CLI11_PARSE(app, argc, argv);

  try {
    if (optimize->parsed()) return cli::cmd_optimize(resolve(opt_flags, opt_reg), opt_flags.out_dir, std::cerr);
    if (evaluate->parsed()) {
      return cli::cmd_evaluate(resolve(eval_flags, eval_reg), eval_genes, eval_flags.out_dir, traces, std::cerr);
    }
    if (robustness->parsed()) {
      auto settings = resolve(rob_flags, rob_reg);
      if (!rob_reg.case_id->count() && !rob_reg.manifest->count()) settings.case_id = objectives::CaseId::II;
      return cli::cmd_robustness(settings, rob_genes, grid, rob_flags.out_dir, std::cerr);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
