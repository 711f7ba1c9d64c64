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
#include "avrfo/objectives.hpp"

#include <cmath>
#include <stdexcept>

namespace avrfo::objectives {

std::string to_string(CaseId id) {
  switch (id) {
    case CaseId::I:
      return "I";
    case CaseId::II:
      return "II";
    case CaseId::III:
      return "III";
  }
  return "?";
}

CaseId parse_case(std::string_view text) {
  if (text == "I" || text == "1") return CaseId::I;
  if (text == "II" || text == "2") return CaseId::II;
  if (text == "III" || text == "3") return CaseId::III;
  throw std::invalid_argument("unknown case: " + std::string(text));
}

std::string to_string(J2Mode mode) { return mode == J2Mode::Deviation ? "deviation" : "increment"; }

J2Mode parse_j2_mode(std::string_view text) {
  if (text == "deviation") return J2Mode::Deviation;
  if (text == "increment") return J2Mode::Increment;
  throw std::invalid_argument("unknown j2 mode: " + std::string(text));
}

std::size_t objective_count(CaseId id) { return id == CaseId::III ? 3 : 2; }

std::vector<std::string> objective_names(CaseId id) {
  switch (id) {
    case CaseId::I:
      return {"J1", "J2"};
    case CaseId::II:
      return {"J1", "J3"};
    case CaseId::III:
      return {"J1", "J3", "J2"};
  }
  return {};
}

bool ObjectiveVector::penalized() const {
  for (double v : values) {
    if (v >= kPenalty) return true;
  }
  return false;
}

ObjectiveVector ObjectiveVector::penalty(CaseId id) {
  return {id, std::vector<double>(objective_count(id), kPenalty)};
}

namespace {

double time_weighted_square(const lti::SimTrace& trace) {
  double acc = 0.0;
  for (std::size_t k = 0; k + 1 < trace.e.size(); ++k) acc += trace.t[k] * trace.e[k] * trace.e[k];
  return acc * trace.dt;
}

}  // namespace

double itse(const lti::SimTrace& trace) { return time_weighted_square(trace); }

double itse_load(const lti::SimTrace& trace) { return time_weighted_square(trace); }

double isdco(const lti::SimTrace& trace, J2Mode mode) {
  const auto& u = trace.u;
  if (u.empty()) return 0.0;
  double acc = 0.0;
  if (mode == J2Mode::Deviation) {
    const double u_ss = lti::tail_mean(u);
    for (std::size_t k = 0; k + 1 < u.size(); ++k) acc += (u[k] - u_ss) * (u[k] - u_ss);
  } else {
    for (std::size_t k = 1; k < u.size(); ++k) acc += (u[k] - u[k - 1]) * (u[k] - u[k - 1]);
  }
  return acc * trace.dt;
}

ProtocolPair ProtocolPair::defaults(CaseId id, double dt) {
  return with_horizon(id == CaseId::I ? 10.0 : 20.0, dt);
}

ProtocolPair ProtocolPair::with_horizon(double horizon, double dt) {
  return {avr::SimProtocol::tracking(horizon, dt), avr::SimProtocol::disturbance(horizon, dt)};
}

ObjectiveVector evaluate(const folib::ControllerGenes& genes, CaseId id, const avr::AvrPlantParams& params,
                         const ProtocolPair& protocols, const folib::OustaloupConfig& cfg, const EvalOptions& opts) {
  ObjectiveVector out{id, {}};
  try {
    const auto tracking = avr::simulate_tracking(genes, params, protocols.tracking, cfg, opts.loop);
    const double j1 = itse(tracking);
    if (id == CaseId::I) {
      out.values = {j1, isdco(tracking, opts.j2_mode)};
    } else {
      const auto load = avr::simulate_disturbance(genes, params, protocols.disturbance, cfg, opts.loop);
      const double j3 = itse_load(load);
      if (id == CaseId::II) {
        out.values = {j1, j3};
      } else {
        out.values = {j1, j3, isdco(tracking, opts.j2_mode)};
      }
    }
  } catch (const lti::NumericalDivergence&) {
    return ObjectiveVector::penalty(id);
  } catch (const lti::SingularEquilibrium&) {
    return ObjectiveVector::penalty(id);
  } catch (const lti::DegenerateLoop&) {
    return ObjectiveVector::penalty(id);
  }
  for (double v : out.values) {
    if (!std::isfinite(v) || v > kPenalty) return ObjectiveVector::penalty(id);
  }
  return out;
}

}  // namespace avrfo::objectives
