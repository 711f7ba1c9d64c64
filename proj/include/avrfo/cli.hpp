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
#ifndef AVRFO_CLI_HPP
#define AVRFO_CLI_HPP

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "avrfo/avr.hpp"
#include "avrfo/folib.hpp"
#include "avrfo/lti.hpp"
#include "avrfo/moea.hpp"
#include "avrfo/objectives.hpp"

namespace avrfo::cli {

std::string version();

enum class ControllerMode { Pid, Fopid };

std::string to_string(ControllerMode mode);
ControllerMode parse_mode(std::string_view text);
std::string to_string(avr::DisturbanceInjection injection);
avr::DisturbanceInjection parse_injection(std::string_view text);
std::string to_string(avr::DerivativePlacement placement);
avr::DerivativePlacement parse_derivative(std::string_view text);

/// PID optimizes (Kp, Ki, Kd); FOPID adds (lambda, mu).
moea::Bounds gene_bounds(ControllerMode mode);
folib::ControllerGenes genes_from_vector(std::span<const double> x, ControllerMode mode);

/// Everything an optimization or evaluation depends on. Serialized into every manifest.
struct RunSettings {
  objectives::CaseId case_id = objectives::CaseId::I;
  ControllerMode mode = ControllerMode::Fopid;
  moea::NsgaConfig nsga;
  avr::AvrPlantParams plant;
  folib::OustaloupConfig oustaloup;
  double seed_x0 = 0.2027;
  double dt = 1e-3;
  std::optional<double> horizon;  ///< overrides the per-case default when set
  avr::DisturbanceInjection injection = avr::DisturbanceInjection::GeneratorInput;
  avr::DerivativePlacement derivative = avr::DerivativePlacement::Error;
  objectives::J2Mode j2_mode = objectives::J2Mode::Deviation;

  objectives::ProtocolPair protocols() const;
  objectives::EvalOptions eval_options() const;
};

struct RunManifest {
  std::string command;
  RunSettings settings;
  std::string version;
  double wall_seconds = 0.0;
  std::optional<std::string> genes_file;
};

nlohmann::json manifest_to_json(const RunManifest& m);
RunManifest manifest_from_json(const nlohmann::json& j);
RunManifest load_manifest(const std::filesystem::path& path);

objectives::ObjectiveVector evaluate_genes(const folib::ControllerGenes& genes, const RunSettings& settings);
moea::Evaluator make_evaluator(const RunSettings& settings);

/// Runs NSGA-II for the configured case and mode. Front sorted by J1, then remaining objectives.
moea::NsgaResult run_optimize(const RunSettings& settings, const moea::GenerationCallback& on_generation = {});

void write_front_csv(std::ostream& os, objectives::CaseId id, ControllerMode mode, const moea::Population& front);
void write_trace_csv(std::ostream& os, const lti::SimTrace& trace);

struct GeneRow {
  std::string label;
  folib::ControllerGenes genes;
};

/// Header-driven reader. Needs Kp, Ki, Kd columns; lambda and mu are optional and an empty
/// cell means 1. A "controller" column equal to "pid" forces lambda = mu = 1. The label comes
/// from a "solution" or "label" column, else "row<N>". Out-of-bounds rows are skipped and
/// reported in warnings.
std::vector<GeneRow> read_genes_csv(std::istream& in, std::vector<std::string>* warnings = nullptr);
std::vector<GeneRow> read_genes_csv(const std::filesystem::path& path, std::vector<std::string>* warnings = nullptr);

/// Splits one CSV record (RFC 4180 quoting, no embedded newlines).
std::vector<std::string> split_csv_line(std::string_view line);

struct EvaluationRow {
  GeneRow row;
  objectives::ObjectiveVector objectives;
  std::optional<lti::StepMetrics> metrics;  ///< tracking metrics; empty when the run diverged
};

std::vector<EvaluationRow> evaluate_rows(const std::vector<GeneRow>& rows, const RunSettings& settings);
void write_objectives_csv(std::ostream& os, objectives::CaseId id, const std::vector<EvaluationRow>& rows);

struct RobustnessGrid {
  std::vector<double> kg{0.7, 0.8, 0.9, 1.0};
  std::vector<double> tau_g{1.0, 1.333, 1.667, 2.0};

  /// Throws std::invalid_argument when a value leaves K_G in [0.7, 1] or tau_G in [1, 2].
  void validate() const;
};

struct RobustnessCell {
  std::string label;
  double kg = 1.0;
  double tau_g = 1.0;
  std::optional<lti::StepMetrics> metrics;
  bool stable = false;  ///< no divergence, closed-loop poles in the open left half plane, settled
};

/// Tracking run per grid cell over the settings' tracking horizon.
std::vector<RobustnessCell> robustness_sweep(const std::vector<GeneRow>& rows, const RobustnessGrid& grid,
                                             const RunSettings& settings);
void write_robustness_csv(std::ostream& os, const std::vector<RobustnessCell>& cells);

/// Subcommand drivers. Each writes its CSV plus manifest.json into out_dir and returns an exit code.
int cmd_optimize(const RunSettings& settings, const std::filesystem::path& out_dir, std::ostream& log);
int cmd_evaluate(const RunSettings& settings, const std::filesystem::path& genes_file,
                 const std::filesystem::path& out_dir, bool traces, std::ostream& log);
int cmd_robustness(const RunSettings& settings, const std::filesystem::path& genes_file, const RobustnessGrid& grid,
                   const std::filesystem::path& out_dir, std::ostream& log);

}  // namespace avrfo::cli

#endif  // AVRFO_CLI_HPP
