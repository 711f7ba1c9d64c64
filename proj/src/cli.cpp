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
#include "avrfo/cli.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "avrfo/numfmt.hpp"

#ifndef AVRFO_VERSION
#define AVRFO_VERSION "0.0.0"
#endif

namespace avrfo::cli {

using nlohmann::json;
using objectives::CaseId;

std::string version() { return AVRFO_VERSION; }

std::string to_string(ControllerMode mode) { return mode == ControllerMode::Pid ? "pid" : "fopid"; }

ControllerMode parse_mode(std::string_view text) {
  if (text == "pid") return ControllerMode::Pid;
  if (text == "fopid") return ControllerMode::Fopid;
  throw std::invalid_argument("unknown controller mode: " + std::string(text));
}

std::string to_string(avr::DisturbanceInjection injection) {
  return injection == avr::DisturbanceInjection::GeneratorInput ? "generator-input" : "generator-output";
}

avr::DisturbanceInjection parse_injection(std::string_view text) {
  if (text == "generator-input") return avr::DisturbanceInjection::GeneratorInput;
  if (text == "generator-output") return avr::DisturbanceInjection::GeneratorOutput;
  throw std::invalid_argument("unknown disturbance injection point: " + std::string(text));
}

std::string to_string(avr::DerivativePlacement placement) {
  return placement == avr::DerivativePlacement::Error ? "error" : "measurement";
}

avr::DerivativePlacement parse_derivative(std::string_view text) {
  if (text == "error") return avr::DerivativePlacement::Error;
  if (text == "measurement") return avr::DerivativePlacement::Measurement;
  throw std::invalid_argument("unknown derivative placement: " + std::string(text));
}

moea::Bounds gene_bounds(ControllerMode mode) {
  const folib::GeneBounds b;
  const std::size_t n = mode == ControllerMode::Pid ? 3 : 5;
  return {std::vector<double>(b.lower.begin(), b.lower.begin() + static_cast<std::ptrdiff_t>(n)),
          std::vector<double>(b.upper.begin(), b.upper.begin() + static_cast<std::ptrdiff_t>(n))};
}

folib::ControllerGenes genes_from_vector(std::span<const double> x, ControllerMode mode) {
  if (mode == ControllerMode::Pid) {
    if (x.size() != 3) throw std::invalid_argument("PID genes need 3 values");
    return folib::ControllerGenes::pid(x[0], x[1], x[2]);
  }
  if (x.size() != 5) throw std::invalid_argument("FOPID genes need 5 values");
  return {x[0], x[1], x[2], x[3], x[4]};
}

objectives::ProtocolPair RunSettings::protocols() const {
  if (horizon) return objectives::ProtocolPair::with_horizon(*horizon, dt);
  return objectives::ProtocolPair::defaults(case_id, dt);
}

objectives::EvalOptions RunSettings::eval_options() const {
  objectives::EvalOptions opts;
  opts.loop.injection = injection;
  opts.loop.derivative = derivative;
  opts.j2_mode = j2_mode;
  return opts;
}

nlohmann::json manifest_to_json(const RunManifest& m) {
  const RunSettings& s = m.settings;
  const auto& n = s.nsga;
  json j;
  j["command"] = m.command;
  j["case"] = objectives::to_string(s.case_id);
  j["mode"] = to_string(s.mode);
  j["nsga"] = {{"pop_size", n.pop_size},
               {"crossover_fraction", n.crossover_fraction},
               {"mutation_fraction", n.mutation_fraction},
               {"tournament_size", n.tournament_size},
               {"pareto_fraction", n.pareto_fraction},
               {"limit_pareto", n.limit_pareto},
               {"stall_tolerance", n.stall_tolerance},
               {"stall_window", n.stall_window},
               {"max_generations", n.max_generations},
               {"mutation_sigma", n.mutation_sigma},
               {"bounds", {{"lower", gene_bounds(s.mode).lower}, {"upper", gene_bounds(s.mode).upper}}}};
  j["plant"] = s.plant;
  j["oustaloup"] = {{"N", s.oustaloup.N}, {"omega_b", s.oustaloup.omega_b}, {"omega_h", s.oustaloup.omega_h}};
  j["seed_x0"] = s.seed_x0;
  j["dt"] = s.dt;
  const auto protocols = s.protocols();
  j["horizon"] = s.horizon ? json(*s.horizon) : json(nullptr);
  j["tracking_horizon"] = protocols.tracking.horizon;
  j["disturbance_horizon"] = protocols.disturbance.horizon;
  j["disturbance_at"] = to_string(s.injection);
  j["derivative_on"] = to_string(s.derivative);
  j["j2_mode"] = objectives::to_string(s.j2_mode);
  j["objectives"] = objectives::objective_names(s.case_id);
  j["version"] = m.version;
  j["wall_seconds"] = m.wall_seconds;
  if (m.genes_file) j["genes_file"] = *m.genes_file;
  return j;
}

RunManifest manifest_from_json(const nlohmann::json& j) {
  RunManifest m;
  RunSettings& s = m.settings;
  m.command = j.value("command", std::string("optimize"));
  s.case_id = objectives::parse_case(j.at("case").get<std::string>());
  s.mode = parse_mode(j.at("mode").get<std::string>());
  if (j.contains("nsga")) {
    const auto& n = j.at("nsga");
    s.nsga.pop_size = n.value("pop_size", s.nsga.pop_size);
    s.nsga.crossover_fraction = n.value("crossover_fraction", s.nsga.crossover_fraction);
    s.nsga.mutation_fraction = n.value("mutation_fraction", s.nsga.mutation_fraction);
    s.nsga.tournament_size = n.value("tournament_size", s.nsga.tournament_size);
    s.nsga.pareto_fraction = n.value("pareto_fraction", s.nsga.pareto_fraction);
    s.nsga.limit_pareto = n.value("limit_pareto", s.nsga.limit_pareto);
    s.nsga.stall_tolerance = n.value("stall_tolerance", s.nsga.stall_tolerance);
    s.nsga.stall_window = n.value("stall_window", s.nsga.stall_window);
    s.nsga.max_generations = n.value("max_generations", s.nsga.max_generations);
    s.nsga.mutation_sigma = n.value("mutation_sigma", s.nsga.mutation_sigma);
  }
  if (j.contains("plant")) s.plant = j.at("plant").get<avr::AvrPlantParams>();
  if (j.contains("oustaloup")) {
    const auto& o = j.at("oustaloup");
    s.oustaloup.N = o.value("N", s.oustaloup.N);
    s.oustaloup.omega_b = o.value("omega_b", s.oustaloup.omega_b);
    s.oustaloup.omega_h = o.value("omega_h", s.oustaloup.omega_h);
  }
  s.seed_x0 = j.value("seed_x0", s.seed_x0);
  s.dt = j.value("dt", s.dt);
  if (j.contains("horizon") && !j.at("horizon").is_null()) s.horizon = j.at("horizon").get<double>();
  if (j.contains("disturbance_at")) s.injection = parse_injection(j.at("disturbance_at").get<std::string>());
  if (j.contains("derivative_on")) s.derivative = parse_derivative(j.at("derivative_on").get<std::string>());
  if (j.contains("j2_mode")) s.j2_mode = objectives::parse_j2_mode(j.at("j2_mode").get<std::string>());
  m.version = j.value("version", std::string());
  m.wall_seconds = j.value("wall_seconds", 0.0);
  if (j.contains("genes_file")) m.genes_file = j.at("genes_file").get<std::string>();
  return m;
}

RunManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open manifest: " + path.string());
  return manifest_from_json(json::parse(in));
}

objectives::ObjectiveVector evaluate_genes(const folib::ControllerGenes& genes, const RunSettings& settings) {
  return objectives::evaluate(genes, settings.case_id, settings.plant, settings.protocols(), settings.oustaloup,
                              settings.eval_options());
}

moea::Evaluator make_evaluator(const RunSettings& settings) {
  return [settings](std::span<const double> x) {
    return evaluate_genes(genes_from_vector(x, settings.mode), settings).values;
  };
}

moea::NsgaResult run_optimize(const RunSettings& settings, const moea::GenerationCallback& on_generation) {
  moea::NsgaConfig cfg = settings.nsga;
  cfg.bounds = gene_bounds(settings.mode);
  auto result = moea::nsga2_run(make_evaluator(settings), cfg, moea::ChaoticRngState::seeded(settings.seed_x0),
                                on_generation);
  std::stable_sort(result.front.begin(), result.front.end(),
                   [](const moea::Individual& a, const moea::Individual& b) { return a.objectives < b.objectives; });
  return result;
}

namespace {

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

void write_gene_columns(std::ostream& os, const folib::ControllerGenes& g) {
  os << format_double(g.Kp) << ',' << format_double(g.Ki) << ',' << format_double(g.Kd) << ','
     << format_double(g.lambda) << ',' << format_double(g.mu);
}

std::string optional_field(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

void write_manifest_file(const std::filesystem::path& out_dir, const RunManifest& m) {
  std::ofstream os(out_dir / "manifest.json", std::ios::binary);
  os << manifest_to_json(m).dump(2) << '\n';
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

void write_front_csv(std::ostream& os, CaseId id, ControllerMode mode, const moea::Population& front) {
  for (const auto& name : objectives::objective_names(id)) os << name << ',';
  os << "Kp,Ki,Kd,lambda,mu\n";
  for (const auto& ind : front) {
    for (double v : ind.objectives) os << format_double(v) << ',';
    write_gene_columns(os, genes_from_vector(ind.genes, mode));
    os << '\n';
  }
}

void write_trace_csv(std::ostream& os, const lti::SimTrace& trace) {
  os << "t,r,y,u,e\n";
  for (std::size_t k = 0; k < trace.size(); ++k) {
    os << format_double(trace.t[k]) << ',' << format_double(trace.r[k]) << ',' << format_double(trace.y[k]) << ','
       << format_double(trace.u[k]) << ',' << format_double(trace.e[k]) << '\n';
  }
}

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

std::vector<GeneRow> read_genes_csv(std::istream& in, std::vector<std::string>* warnings) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("genes file is empty");
  const auto header = split_csv_line(line);
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
  for (const char* required : {"Kp", "Ki", "Kd"}) {
    if (!col.count(required)) throw std::runtime_error(std::string("genes file lacks column ") + required);
  }
  const auto find = [&](std::initializer_list<const char*> names) -> std::optional<std::size_t> {
    for (const char* n : names) {
      if (col.count(n)) return col[n];
    }
    return std::nullopt;
  };
  const auto label_col = find({"solution", "label"});
  const auto ctrl_col = find({"controller"});
  const auto lambda_col = find({"lambda"});
  const auto mu_col = find({"mu"});

  std::vector<GeneRow> rows;
  std::size_t line_no = 1;
  const folib::GeneBounds bounds;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto f = split_csv_line(line);
    const auto cell = [&](std::size_t i) -> std::string { return i < f.size() ? f[i] : std::string(); };
    const auto number = [&](std::optional<std::size_t> i, double fallback) {
      if (!i) return fallback;
      const std::string s = cell(*i);
      return s.empty() ? fallback : std::stod(s);
    };
    GeneRow row;
    row.label = label_col ? cell(*label_col) : "row" + std::to_string(rows.size() + 1);
    row.genes.Kp = number(col["Kp"], 0.0);
    row.genes.Ki = number(col["Ki"], 0.0);
    row.genes.Kd = number(col["Kd"], 0.0);
    row.genes.lambda = number(lambda_col, 1.0);
    row.genes.mu = number(mu_col, 1.0);
    if (ctrl_col && cell(*ctrl_col) == "pid") row.genes.lambda = row.genes.mu = 1.0;
    if (!bounds.contains(row.genes)) {
      if (warnings) warnings->push_back("line " + std::to_string(line_no) + " (" + row.label + "): genes out of bounds, skipped");
      continue;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<GeneRow> read_genes_csv(const std::filesystem::path& path, std::vector<std::string>* warnings) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open genes file: " + path.string());
  return read_genes_csv(in, warnings);
}

std::vector<EvaluationRow> evaluate_rows(const std::vector<GeneRow>& rows, const RunSettings& settings) {
  std::vector<EvaluationRow> out;
  for (const auto& row : rows) {
    EvaluationRow er{row, evaluate_genes(row.genes, settings), std::nullopt};
    try {
      const auto trace = avr::simulate_tracking(row.genes, settings.plant, settings.protocols().tracking,
                                                settings.oustaloup, settings.eval_options().loop);
      er.metrics = lti::step_metrics(trace);
    } catch (const lti::NumericalDivergence&) {
    }
    out.push_back(std::move(er));
  }
  return out;
}

void write_objectives_csv(std::ostream& os, CaseId id, const std::vector<EvaluationRow>& rows) {
  os << "label,";
  for (const auto& name : objectives::objective_names(id)) os << name << ',';
  os << "Kp,Ki,Kd,lambda,mu,overshoot,settling,rise,peak\n";
  for (const auto& r : rows) {
    os << csv_field(r.row.label) << ',';
    for (double v : r.objectives.values) os << format_double(v) << ',';
    write_gene_columns(os, r.row.genes);
    if (r.metrics) {
      os << ',' << format_double(r.metrics->overshoot) << ',' << optional_field(r.metrics->settling_time_2pct) << ','
         << optional_field(r.metrics->rise_time_10_90) << ',' << format_double(r.metrics->peak_time);
    } else {
      os << ",,,,";
    }
    os << '\n';
  }
}

void RobustnessGrid::validate() const {
  if (kg.empty() || tau_g.empty()) throw std::invalid_argument("robustness grid must be non-empty");
  for (double v : kg) {
    if (!(v >= 0.7 && v <= 1.0)) throw std::invalid_argument("K_G grid value outside [0.7, 1]: " + format_double(v));
  }
  for (double v : tau_g) {
    if (!(v >= 1.0 && v <= 2.0)) throw std::invalid_argument("tau_G grid value outside [1, 2]: " + format_double(v));
  }
}

std::vector<RobustnessCell> robustness_sweep(const std::vector<GeneRow>& rows, const RobustnessGrid& grid,
                                             const RunSettings& settings) {
  grid.validate();
  const auto proto = settings.protocols().tracking;
  const auto loop_opts = settings.eval_options().loop;
  std::vector<RobustnessCell> cells;
  for (const auto& row : rows) {
    for (double kg : grid.kg) {
      for (double tau_g : grid.tau_g) {
        RobustnessCell cell{row.label, kg, tau_g, std::nullopt, false};
        avr::AvrPlantParams params = settings.plant;
        params.KG = kg;
        params.tauG = tau_g;
        try {
          const auto loop = avr::assemble_loop(row.genes, params, settings.oustaloup, loop_opts);
          const bool poles_ok = lti::is_stable(lti::tf_to_statespace(loop.reference_to_output));
          const auto trace = avr::simulate_tracking(row.genes, params, proto, settings.oustaloup, loop_opts);
          cell.metrics = lti::step_metrics(trace);
          cell.stable = poles_ok && trace.finite() && cell.metrics->settled();
        } catch (const lti::NumericalDivergence&) {
          cell.metrics.reset();
        }
        cells.push_back(std::move(cell));
      }
    }
  }
  return cells;
}

void write_robustness_csv(std::ostream& os, const std::vector<RobustnessCell>& cells) {
  os << "label,KG,tauG,overshoot,settling,rise,peak,stable\n";
  for (const auto& c : cells) {
    os << csv_field(c.label) << ',' << format_double(c.kg) << ',' << format_double(c.tau_g) << ',';
    if (c.metrics) {
      os << format_double(c.metrics->overshoot) << ',' << optional_field(c.metrics->settling_time_2pct) << ','
         << optional_field(c.metrics->rise_time_10_90) << ',' << format_double(c.metrics->peak_time);
    } else {
      os << ",,,";
    }
    os << ',' << (c.stable ? "true" : "false") << '\n';
  }
}

int cmd_optimize(const RunSettings& settings, const std::filesystem::path& out_dir, std::ostream& log) {
  const auto start = std::chrono::steady_clock::now();
  std::filesystem::create_directories(out_dir);
  std::ofstream genlog(out_dir / "genlog.csv", std::ios::binary);
  genlog << "generation,front_size,hypervolume,stall_metric\n";
  const auto result = run_optimize(settings, [&](const moea::GenerationRecord& r, const moea::Population&) {
    genlog << r.generation << ',' << r.front_size << ',' << format_double(r.hypervolume) << ','
           << format_double(r.stall_metric) << '\n';
  });
  genlog.close();
  {
    std::ofstream os(out_dir / "front.csv", std::ios::binary);
    write_front_csv(os, settings.case_id, settings.mode, result.front);
  }
  write_manifest_file(out_dir, {"optimize", settings, version(), seconds_since(start), std::nullopt});
  log << "case " << objectives::to_string(settings.case_id) << ' ' << to_string(settings.mode) << ": "
      << result.front.size() << " front members after " << result.log.back().generation << " generations"
      << (result.stalled ? " (stalled)" : "") << '\n';
  return 0;
}

int cmd_evaluate(const RunSettings& settings, const std::filesystem::path& genes_file,
                 const std::filesystem::path& out_dir, bool traces, std::ostream& log) {
  const auto start = std::chrono::steady_clock::now();
  std::vector<std::string> warnings;
  const auto rows = read_genes_csv(genes_file, &warnings);
  for (const auto& w : warnings) log << "warning: " << w << '\n';
  std::filesystem::create_directories(out_dir);
  const auto results = evaluate_rows(rows, settings);
  {
    std::ofstream os(out_dir / "objectives.csv", std::ios::binary);
    write_objectives_csv(os, settings.case_id, results);
  }
  if (traces) {
    const auto dir = out_dir / "traces";
    std::filesystem::create_directories(dir);
    const auto protocols = settings.protocols();
    const auto loop = settings.eval_options().loop;
    for (const auto& row : rows) {
      try {
        std::ofstream os(dir / (row.label + "_tracking.csv"), std::ios::binary);
        write_trace_csv(os, avr::simulate_tracking(row.genes, settings.plant, protocols.tracking, settings.oustaloup, loop));
      } catch (const std::exception& e) {
        log << "warning: " << row.label << " tracking trace: " << e.what() << '\n';
      }
      if (settings.case_id == CaseId::I) continue;
      try {
        const auto trace =
            avr::simulate_disturbance(row.genes, settings.plant, protocols.disturbance, settings.oustaloup, loop);
        std::ofstream os(dir / (row.label + "_disturbance.csv"), std::ios::binary);
        write_trace_csv(os, trace);
      } catch (const std::exception& e) {
        log << "warning: " << row.label << " disturbance trace: " << e.what() << '\n';
      }
    }
  }
  write_manifest_file(out_dir, {"evaluate", settings, version(), seconds_since(start), genes_file.string()});
  log << "evaluated " << results.size() << " rows\n";
  return 0;
}

int cmd_robustness(const RunSettings& settings, const std::filesystem::path& genes_file, const RobustnessGrid& grid,
                   const std::filesystem::path& out_dir, std::ostream& log) {
  const auto start = std::chrono::steady_clock::now();
  std::vector<std::string> warnings;
  const auto rows = read_genes_csv(genes_file, &warnings);
  for (const auto& w : warnings) log << "warning: " << w << '\n';
  std::filesystem::create_directories(out_dir);
  const auto cells = robustness_sweep(rows, grid, settings);
  {
    std::ofstream os(out_dir / "robustness.csv", std::ios::binary);
    write_robustness_csv(os, cells);
  }
  auto manifest_json = manifest_to_json({"robustness", settings, version(), seconds_since(start), genes_file.string()});
  manifest_json["grid"] = {{"KG", grid.kg}, {"tauG", grid.tau_g}};
  {
    std::ofstream os(out_dir / "manifest.json", std::ios::binary);
    os << manifest_json.dump(2) << '\n';
  }
  const auto unstable = std::count_if(cells.begin(), cells.end(), [](const auto& c) { return !c.stable; });
  log << cells.size() << " cells, " << unstable << " not stable\n";
  return 0;
}

}  // namespace avrfo::cli
