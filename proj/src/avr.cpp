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
#include "avrfo/avr.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace avrfo::avr {

using lti::Polynomial;
using lti::TransferFunction;

void AvrPlantParams::validate() const {
  const std::pair<const char*, double> taus[] = {{"tauA", tauA}, {"tauE", tauE}, {"tauG", tauG}, {"tauS", tauS}};
  for (const auto& [name, value] : taus) {
    if (!(value > 0.0)) throw InvalidParams(std::string(name) + " must be positive");
  }
}

std::vector<std::string> AvrPlantParams::range_warnings() const {
  struct Range {
    const char* name;
    double value;
    double lo;
    double hi;
  };
  // KE range as printed alongside a nominal KE = 1; kept as a warning only.
  const Range ranges[] = {
      {"KA", KA, 10.0, 400.0},   {"tauA", tauA, 0.02, 0.1}, {"KE", KE, 10.0, 400.0}, {"tauE", tauE, 0.5, 1.0},
      {"KG", KG, 0.7, 1.0},      {"tauG", tauG, 1.0, 2.0},  {"tauS", tauS, 0.001, 0.06},
  };
  std::vector<std::string> out;
  for (const auto& r : ranges) {
    if (r.value < r.lo || r.value > r.hi) {
      std::ostringstream msg;
      msg << r.name << " = " << r.value << " outside typical range [" << r.lo << ", " << r.hi << "]";
      out.push_back(msg.str());
    }
  }
  return out;
}

void to_json(nlohmann::json& j, const AvrPlantParams& p) {
  j = nlohmann::json{{"KA", p.KA}, {"tauA", p.tauA}, {"KE", p.KE}, {"tauE", p.tauE},
                     {"KG", p.KG}, {"tauG", p.tauG}, {"KS", p.KS}, {"tauS", p.tauS}};
}

void from_json(const nlohmann::json& j, AvrPlantParams& p) {
  AvrPlantParams out;
  const std::pair<const char*, double*> fields[] = {{"KA", &out.KA},     {"tauA", &out.tauA}, {"KE", &out.KE},
                                                    {"tauE", &out.tauE}, {"KG", &out.KG},     {"tauG", &out.tauG},
                                                    {"KS", &out.KS},     {"tauS", &out.tauS}};
  for (const auto& [key, dst] : fields) {
    if (j.contains(key)) *dst = j.at(key).get<double>();
  }
  for (const auto& item : j.items()) {
    bool known = false;
    for (const auto& [key, dst] : fields) known = known || item.key() == key;
    if (!known) throw InvalidParams("unknown plant parameter key: " + item.key());
  }
  p = out;
}

AvrPlantParams load_plant_params(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidParams("cannot open plant config: " + path);
  const auto j = nlohmann::json::parse(in);
  auto p = j.get<AvrPlantParams>();
  p.validate();
  return p;
}

TransferFunction PlantBlocks::forward_chain() const {
  return lti::tf_series(lti::tf_series(amplifier, exciter), generator);
}

PlantBlocks build_plant(const AvrPlantParams& params) {
  params.validate();
  return {TransferFunction::first_order_lag(params.KA, params.tauA),
          TransferFunction::first_order_lag(params.KE, params.tauE),
          TransferFunction::first_order_lag(params.KG, params.tauG),
          TransferFunction::first_order_lag(params.KS, params.tauS)};
}

ClosedLoop assemble_loop(const TransferFunction& error_branch, const TransferFunction& measurement_branch,
                         const PlantBlocks& plant, DisturbanceInjection injection) {
  const Polynomial& Ne = error_branch.num();
  const Polynomial& De = error_branch.den();
  const Polynomial& Nm = measurement_branch.num();
  const Polynomial Dm = Nm.is_zero() ? Polynomial::constant(1.0) : measurement_branch.den();

  const Polynomial Df = De * Dm;
  const Polynomial Nf = Nm.is_zero() ? Ne : Ne * Dm + Nm * De;

  const Polynomial Nae = plant.amplifier.num() * plant.exciter.num();
  const Polynomial Dae = plant.amplifier.den() * plant.exciter.den();
  const Polynomial& Ngen = plant.generator.num();
  const Polynomial& Dgen = plant.generator.den();
  const Polynomial Ng = Nae * Ngen;
  const Polynomial Dg = Dae * Dgen;
  const Polynomial& Nh = plant.sensor.num();
  const Polynomial& Dh = plant.sensor.den();

  Polynomial P = Df * Dg * Dh + Nf * Ng * Nh;
  if (P.is_zero()) throw lti::DegenerateLoop("closed-loop characteristic polynomial vanishes");

  ClosedLoop loop;
  loop.characteristic = P;
  loop.reference_to_output = {Ne * Dm * Ng * Dh, P};
  loop.reference_to_control = {Ne * Dm * Dg * Dh, P};
  loop.reference_to_error = {Df * Dg * Dh + Nm * De * Ng * Nh, P};
  if (injection == DisturbanceInjection::GeneratorInput) {
    loop.disturbance_to_output = {Ngen * Dae * Df * Dh, P};
    loop.disturbance_to_control = {Nf * Nh * Ngen * Dae * -1.0, P};
  } else {
    loop.disturbance_to_output = {Dg * Df * Dh, P};
    loop.disturbance_to_control = {Nf * Nh * Dg * -1.0, P};
  }
  return loop;
}

ClosedLoop assemble_loop(const folib::ControllerGenes& genes, const AvrPlantParams& params,
                         const folib::OustaloupConfig& cfg, const LoopOptions& opts) {
  const PlantBlocks plant = build_plant(params);
  if (opts.derivative == DerivativePlacement::Error) {
    return assemble_loop(folib::fopid_tf(genes, cfg), TransferFunction(), plant, opts.injection);
  }
  const auto parts = folib::fopid_parts(genes, cfg);
  return assemble_loop(parts.proportional_integral, parts.derivative, plant, opts.injection);
}

namespace {

// Several channels over one denominator share (A, B); only the output maps differ.
struct ChannelBank {
  Eigen::MatrixXd A;
  Eigen::VectorXd B;
  std::vector<Eigen::RowVectorXd> C;
  std::vector<double> D;

  lti::StateSpace channel(std::size_t i) const { return {A, B, C[i], D[i]}; }

  double output(std::size_t i, const Eigen::MatrixXd& states, Eigen::Index k, double input) const {
    const double cx = A.rows() > 0 ? C[i].dot(states.col(k)) : 0.0;
    return cx + D[i] * input;
  }
};

ChannelBank realize_channels(std::initializer_list<const TransferFunction*> channels) {
  ChannelBank bank;
  bool first = true;
  for (const TransferFunction* g : channels) {
    lti::StateSpace ss;
    double feedthrough = 0.0;
    if (g->is_proper()) {
      ss = lti::tf_to_statespace(*g);
      feedthrough = ss.D;
    } else {
      // Exact derivative kick: the s^k (k >= 1) terms only act at the input jump at t = 0 and
      // leave impulses there; the sampled trace keeps the regular part.
      const auto split = lti::split_proper(*g);
      ss = lti::tf_to_statespace(split.proper_part);
      feedthrough = split.polynomial_part.coeff_of_power(0);
    }
    if (first) {
      bank.A = ss.A;
      bank.B = ss.B;
      first = false;
    }
    bank.C.push_back(ss.C);
    bank.D.push_back(feedthrough);
  }
  if (bank.A.rows() > 0) {
    const Eigen::VectorXd d = lti::balancing_scales(bank.A);
    bank.A = d.cwiseInverse().asDiagonal() * bank.A * d.asDiagonal();
    bank.B = d.cwiseInverse().asDiagonal() * bank.B;
    for (auto& c : bank.C) c = c * d.asDiagonal();
  }
  return bank;
}

}  // namespace

lti::SimTrace simulate_tracking(const folib::ControllerGenes& genes, const AvrPlantParams& params,
                                const SimProtocol& proto, const folib::OustaloupConfig& cfg,
                                const LoopOptions& opts) {
  if (proto.kind != ProtocolKind::Tracking) throw std::invalid_argument("simulate_tracking needs a tracking protocol");
  const ClosedLoop loop = assemble_loop(genes, params, cfg, opts);
  const ChannelBank bank =
      realize_channels({&loop.reference_to_output, &loop.reference_to_control, &loop.reference_to_error});

  lti::SimTrace trace;
  trace.dt = proto.dt;
  trace.t = lti::time_grid(proto.horizon, proto.dt);
  const std::size_t n = trace.t.size();
  trace.r.assign(n, 1.0);
  const Eigen::MatrixXd states =
      lti::simulate_states(bank.A, bank.B, trace.r, proto.dt, Eigen::VectorXd::Zero(bank.A.rows()));
  trace.y.resize(n);
  trace.u.resize(n);
  trace.e.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const auto col = static_cast<Eigen::Index>(k);
    trace.y[k] = bank.output(0, states, col, 1.0);
    trace.u[k] = bank.output(1, states, col, 1.0);
    trace.e[k] = bank.output(2, states, col, 1.0);
  }
  return trace;
}

lti::SimTrace simulate_disturbance(const folib::ControllerGenes& genes, const AvrPlantParams& params,
                                   const SimProtocol& proto, const folib::OustaloupConfig& cfg,
                                   const LoopOptions& opts) {
  if (proto.kind != ProtocolKind::Disturbance) {
    throw std::invalid_argument("simulate_disturbance needs a disturbance protocol");
  }
  if (!(genes.Ki > 0.0)) throw lti::SingularEquilibrium("disturbance protocol requires integral action (Ki > 0)");
  const ClosedLoop loop = assemble_loop(genes, params, cfg, opts);
  const ChannelBank bank = realize_channels({&loop.reference_to_output, &loop.reference_to_control,
                                             &loop.disturbance_to_output, &loop.disturbance_to_control});

  // reference = 1 equilibrium of the assembled loop
  const Eigen::VectorXd x_eq = lti::steady_state(bank.channel(0), 1.0);
  const double y_eq = (bank.A.rows() > 0 ? bank.C[0].dot(x_eq) : 0.0) + bank.D[0];
  const double u_eq = (bank.A.rows() > 0 ? bank.C[1].dot(x_eq) : 0.0) + bank.D[1];

  lti::SimTrace trace;
  trace.dt = proto.dt;
  trace.t = lti::time_grid(proto.horizon, proto.dt);
  const std::size_t n = trace.t.size();
  trace.r.assign(n, 1.0);
  const std::vector<double> d(n, opts.disturbance_magnitude);
  // The reference part stays at x_eq; by linearity only the disturbance part evolves.
  const Eigen::MatrixXd states = lti::simulate_states(bank.A, bank.B, d, proto.dt, Eigen::VectorXd::Zero(bank.A.rows()));
  trace.y.resize(n);
  trace.u.resize(n);
  trace.e.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const auto col = static_cast<Eigen::Index>(k);
    trace.y[k] = y_eq + bank.output(2, states, col, d[k]);
    trace.u[k] = u_eq + bank.output(3, states, col, d[k]);
    trace.e[k] = 1.0 - trace.y[k];
  }
  return trace;
}

}  // namespace avrfo::avr
