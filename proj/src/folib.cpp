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
#include "avrfo/folib.hpp"

#include <cmath>
#include <stdexcept>

namespace avrfo::folib {

using lti::Polynomial;
using lti::TransferFunction;

void OustaloupConfig::validate() const {
  if (N < 1) throw std::invalid_argument("Oustaloup half-order N must be >= 1");
  if (!(omega_b > 0.0) || !(omega_b < omega_h)) {
    throw std::invalid_argument("Oustaloup band requires 0 < omega_b < omega_h");
  }
}

TransferFunction OustaloupLadder::transfer_function() const {
  Polynomial num = Polynomial::constant(gain);
  Polynomial den = Polynomial::constant(1.0);
  for (double z : zeros) num = num * Polynomial({1.0, z});
  for (double p : poles) den = den * Polynomial({1.0, p});
  return {num, den};
}

OustaloupLadder oustaloup_ladder(double alpha, const OustaloupConfig& cfg) {
  cfg.validate();
  OustaloupLadder ladder;
  const double ratio = cfg.omega_h / cfg.omega_b;
  const double order = static_cast<double>(cfg.order());
  for (int k = -cfg.N; k <= cfg.N; ++k) {
    const double base = static_cast<double>(k + cfg.N);
    ladder.zeros.push_back(cfg.omega_b * std::pow(ratio, (base + 0.5 * (1.0 - alpha)) / order));
    ladder.poles.push_back(cfg.omega_b * std::pow(ratio, (base + 0.5 * (1.0 + alpha)) / order));
  }
  ladder.gain = std::pow(cfg.omega_h, alpha);
  return ladder;
}

TransferFunction oustaloup_filter(double alpha, const OustaloupConfig& cfg) {
  return oustaloup_ladder(alpha, cfg).transfer_function();
}

std::vector<double> gl_weights(double alpha, std::size_t count) {
  std::vector<double> w(count);
  if (count == 0) return w;
  w[0] = 1.0;
  for (std::size_t j = 1; j < count; ++j) w[j] = w[j - 1] * (1.0 - (alpha + 1.0) / static_cast<double>(j));
  return w;
}

std::vector<double> gl_differint(std::span<const double> f, double alpha, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("gl_differint requires dt > 0");
  const auto w = gl_weights(alpha, f.size());
  const double scale = std::pow(dt, -alpha);
  std::vector<double> out(f.size());
  for (std::size_t k = 0; k < f.size(); ++k) {
    double acc = 0.0;
    for (std::size_t j = 0; j <= k; ++j) acc += w[j] * f[k - j];
    out[k] = scale * acc;
  }
  return out;
}

bool GeneBounds::contains(const ControllerGenes& g) const {
  const auto v = g.as_array();
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!(v[i] >= lower[i] && v[i] <= upper[i])) return false;
  }
  return true;
}

namespace {

const Polynomial kS{1.0, 0.0};

TransferFunction approx_power(double alpha, const OustaloupConfig& cfg) {
  if (alpha == 0.0) return TransferFunction::gain(1.0);
  return oustaloup_filter(alpha, cfg);
}

}  // namespace

ControllerParts fopid_parts(const ControllerGenes& genes, const OustaloupConfig& cfg) {
  ControllerParts parts;
  parts.proportional_integral = TransferFunction::gain(genes.Kp);
  if (genes.Ki != 0.0) {
    const TransferFunction frac = approx_power(1.0 - genes.lambda, cfg);
    const TransferFunction integral(frac.num() * genes.Ki, frac.den() * kS);
    parts.proportional_integral = lti::tf_parallel(parts.proportional_integral, integral);
  }
  if (genes.Kd != 0.0) {
    if (genes.is_pid()) {
      parts.derivative = TransferFunction(kS * genes.Kd, Polynomial::constant(1.0));
    } else {
      parts.derivative = lti::tf_scale(approx_power(genes.mu, cfg), genes.Kd);
    }
  }
  return parts;
}

TransferFunction fopid_tf(const ControllerGenes& genes, const OustaloupConfig& cfg) {
  const auto parts = fopid_parts(genes, cfg);
  if (parts.derivative.num().is_zero()) return parts.proportional_integral;
  if (parts.proportional_integral.num().is_zero()) return parts.derivative;
  return lti::tf_parallel(parts.proportional_integral, parts.derivative);
}

}  // namespace avrfo::folib
