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
#ifndef AVRFO_FOLIB_HPP
#define AVRFO_FOLIB_HPP

#include <array>
#include <span>
#include <vector>

#include "avrfo/lti.hpp"

namespace avrfo::folib {

/**
 * Band-limited recursive approximation settings for s^alpha.
 * The filter has 2N+1 real pole/zero pairs spread over [omega_b, omega_h].
 */
struct OustaloupConfig {
  int N = 2;
  double omega_b = 1e-2;
  double omega_h = 1e2;

  int order() const { return 2 * N + 1; }
  /// Throws std::invalid_argument unless N >= 1 and 0 < omega_b < omega_h.
  void validate() const;
};

/// Zeros and poles are stored as positive corner frequencies: factor (s + zero) / (s + pole).
struct OustaloupLadder {
  std::vector<double> zeros;
  std::vector<double> poles;
  double gain = 1.0;

  lti::TransferFunction transfer_function() const;
};

OustaloupLadder oustaloup_ladder(double alpha, const OustaloupConfig& cfg = {});
lti::TransferFunction oustaloup_filter(double alpha, const OustaloupConfig& cfg = {});

/// Grunwald-Letnikov differ-integral with full memory:
/// out[k] = dt^-alpha * sum_{j<=k} w_j f[k-j], w_0 = 1, w_j = w_{j-1} (1 - (alpha+1)/j).
std::vector<double> gl_differint(std::span<const double> f, double alpha, double dt);
std::vector<double> gl_weights(double alpha, std::size_t count);

/// Decision vector {Kp, Ki, Kd, lambda, mu}. lambda = mu = 1 exactly is integer PID.
struct ControllerGenes {
  double Kp = 0.0;
  double Ki = 0.0;
  double Kd = 0.0;
  double lambda = 1.0;
  double mu = 1.0;

  static ControllerGenes pid(double kp, double ki, double kd) { return {kp, ki, kd, 1.0, 1.0}; }

  bool is_pid() const { return lambda == 1.0 && mu == 1.0; }
  std::array<double, 5> as_array() const { return {Kp, Ki, Kd, lambda, mu}; }
  bool operator==(const ControllerGenes&) const = default;
};

struct GeneBounds {
  std::array<double, 5> lower{0.0, 0.0, 0.0, 0.0, 0.0};
  std::array<double, 5> upper{100.0, 100.0, 100.0, 2.0, 2.0};

  bool contains(const ControllerGenes& g) const;
};

/// Controller split into the part acting on the error and the derivative branch.
struct ControllerParts {
  lti::TransferFunction proportional_integral;  ///< Kp + Ki s^-lambda
  lti::TransferFunction derivative;             ///< Kd s^mu
};

ControllerParts fopid_parts(const ControllerGenes& genes, const OustaloupConfig& cfg = {});

/**
 * C(s) = Kp + Ki s^-lambda + Kd s^mu over a common denominator.
 *
 * The fractional integrator is realized as (1/s) times the approximation of s^(1-lambda) so
 * the controller keeps an exact pole at the origin. An approximated exponent of exactly 0 is the
 * identity, so lambda = 1 yields the exact integrator. PID mode (lambda = mu = 1) uses the exact
 * derivative and returns the textbook (Kd s^2 + Kp s + Ki) / s. Zero-gain terms are dropped.
 */
lti::TransferFunction fopid_tf(const ControllerGenes& genes, const OustaloupConfig& cfg = {});

}  // namespace avrfo::folib

#endif  // AVRFO_FOLIB_HPP
