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
#ifndef AVRFO_OBJECTIVES_HPP
#define AVRFO_OBJECTIVES_HPP

#include <string>
#include <string_view>
#include <vector>

#include "avrfo/avr.hpp"
#include "avrfo/folib.hpp"
#include "avrfo/lti.hpp"

namespace avrfo::objectives {

/// Case I: (J1, J2). Case II: (J1, J3). Case III: (J1, J3, J2).
enum class CaseId { I, II, III };

/// Deviation: u - u_ss with u_ss the tail mean. Increment: u_k - u_{k-1}.
enum class J2Mode { Deviation, Increment };

inline constexpr double kPenalty = 1e9;

std::string to_string(CaseId id);
/// Accepts "I", "II", "III" (also "1", "2", "3"). Throws std::invalid_argument otherwise.
CaseId parse_case(std::string_view text);
std::string to_string(J2Mode mode);
J2Mode parse_j2_mode(std::string_view text);

std::size_t objective_count(CaseId id);
/// Column names in case order, e.g. {"J1", "J3", "J2"} for Case III.
std::vector<std::string> objective_names(CaseId id);

struct ObjectiveVector {
  CaseId case_id = CaseId::I;
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
  double operator[](std::size_t i) const { return values[i]; }
  bool penalized() const;

  static ObjectiveVector penalty(CaseId id);
};

// Left-Riemann sums over the trace grid: sum over k < n-1 of f(t_k) dt.
double itse(const lti::SimTrace& trace);
double isdco(const lti::SimTrace& trace, J2Mode mode = J2Mode::Deviation);
/// Same functional as itse, applied to the e_ld field of a disturbance trace.
double itse_load(const lti::SimTrace& trace);

struct ProtocolPair {
  avr::SimProtocol tracking = avr::SimProtocol::tracking(10.0);
  avr::SimProtocol disturbance = avr::SimProtocol::disturbance(20.0);

  /// 10 s horizon for Case I, 20 s for Cases II and III.
  static ProtocolPair defaults(CaseId id, double dt = 1e-3);
  /// Same horizon for both runs.
  static ProtocolPair with_horizon(double horizon, double dt = 1e-3);
};

struct EvalOptions {
  avr::LoopOptions loop;
  J2Mode j2_mode = J2Mode::Deviation;
};

/// Runs the simulations the case needs and returns the case-ordered vector. Any divergence,
/// singular equilibrium or non-finite value yields kPenalty in every component.
ObjectiveVector evaluate(const folib::ControllerGenes& genes, CaseId id, const avr::AvrPlantParams& params,
                         const ProtocolPair& protocols, const folib::OustaloupConfig& cfg,
                         const EvalOptions& opts = {});

}  // namespace avrfo::objectives

#endif  // AVRFO_OBJECTIVES_HPP
