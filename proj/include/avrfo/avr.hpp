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
#ifndef AVRFO_AVR_HPP
#define AVRFO_AVR_HPP

#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "avrfo/folib.hpp"
#include "avrfo/lti.hpp"

namespace avrfo::avr {

class InvalidParams : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Linearized amplifier / exciter / generator / sensor gains and time constants (seconds).
struct AvrPlantParams {
  double KA = 10.0;
  double tauA = 0.1;
  double KE = 1.0;
  double tauE = 0.4;
  double KG = 1.0;
  double tauG = 1.0;
  double KS = 1.0;
  double tauS = 0.01;

  static AvrPlantParams nominal() { return {}; }

  /// Throws InvalidParams on nonpositive time constants.
  void validate() const;
  /// Human-readable notes for values outside the documented operating ranges. Never throws.
  std::vector<std::string> range_warnings() const;

  bool operator==(const AvrPlantParams&) const = default;
};

void to_json(nlohmann::json& j, const AvrPlantParams& p);
void from_json(const nlohmann::json& j, AvrPlantParams& p);
AvrPlantParams load_plant_params(const std::string& path);

struct PlantBlocks {
  lti::TransferFunction amplifier;
  lti::TransferFunction exciter;
  lti::TransferFunction generator;
  lti::TransferFunction sensor;

  lti::TransferFunction forward_chain() const;
};

PlantBlocks build_plant(const AvrPlantParams& params);

enum class ProtocolKind { Tracking, Disturbance };

struct SimProtocol {
  double horizon = 10.0;
  double dt = 1e-3;
  ProtocolKind kind = ProtocolKind::Tracking;

  static SimProtocol tracking(double horizon, double dt = 1e-3) { return {horizon, dt, ProtocolKind::Tracking}; }
  static SimProtocol disturbance(double horizon, double dt = 1e-3) {
    return {horizon, dt, ProtocolKind::Disturbance};
  }
};

enum class DisturbanceInjection { GeneratorInput, GeneratorOutput };
enum class DerivativePlacement { Error, Measurement };

struct LoopOptions {
  DisturbanceInjection injection = DisturbanceInjection::GeneratorInput;
  DerivativePlacement derivative = DerivativePlacement::Error;
  double disturbance_magnitude = 1.0;
};

/**
 * Closed loop of the regulator with every channel written over the shared characteristic
 * polynomial. Controller u = Ce (r - H y) - Cm H y, where Cm is the derivative branch when the
 * derivative acts on the measurement and zero otherwise.
 */
struct ClosedLoop {
  lti::Polynomial characteristic;
  lti::TransferFunction reference_to_output;
  lti::TransferFunction reference_to_control;
  lti::TransferFunction reference_to_error;
  lti::TransferFunction disturbance_to_output;
  lti::TransferFunction disturbance_to_control;
};

ClosedLoop assemble_loop(const lti::TransferFunction& error_branch, const lti::TransferFunction& measurement_branch,
                         const PlantBlocks& plant, DisturbanceInjection injection);
ClosedLoop assemble_loop(const folib::ControllerGenes& genes, const AvrPlantParams& params,
                         const folib::OustaloupConfig& cfg, const LoopOptions& opts = {});

/// Unit reference step at t = 0 from rest. e = r - sensor output.
lti::SimTrace simulate_tracking(const folib::ControllerGenes& genes, const AvrPlantParams& params,
                                const SimProtocol& proto, const folib::OustaloupConfig& cfg,
                                const LoopOptions& opts = {});

/// Starts at the reference = 1 equilibrium and applies a step disturbance at t = 0.
/// The e field holds e_ld = 1 - y. Throws lti::SingularEquilibrium without integral action.
lti::SimTrace simulate_disturbance(const folib::ControllerGenes& genes, const AvrPlantParams& params,
                                   const SimProtocol& proto, const folib::OustaloupConfig& cfg,
                                   const LoopOptions& opts = {});

}  // namespace avrfo::avr

#endif  // AVRFO_AVR_HPP
