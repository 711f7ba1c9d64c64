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
#ifndef AVRFO_LTI_HPP
#define AVRFO_LTI_HPP

#include <complex>
#include <initializer_list>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace avrfo::lti {

class DegenerateLoop : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ImproperTransferFunction : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NumericalDivergence : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SingularEquilibrium : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Real polynomial in s, coefficients stored highest power first.
/// Leading exact zeros are stripped; the zero polynomial is {0}.
class Polynomial {
 public:
  Polynomial() : coeffs_{0.0} {}
  Polynomial(std::initializer_list<double> coeffs);
  explicit Polynomial(std::vector<double> coeffs);

  static Polynomial constant(double c) { return Polynomial({c}); }
  /// Monic polynomial with the given real roots.
  static Polynomial from_roots(std::span<const double> roots);

  const std::vector<double>& coeffs() const { return coeffs_; }
  int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
  bool is_zero() const { return coeffs_.size() == 1 && coeffs_[0] == 0.0; }
  double leading() const { return coeffs_.front(); }
  /// Coefficient of s^power (0 when power exceeds the degree).
  double coeff_of_power(int power) const;

  double operator()(double s) const;
  std::complex<double> operator()(std::complex<double> s) const;

  Polynomial operator+(const Polynomial& rhs) const;
  Polynomial operator-(const Polynomial& rhs) const;
  Polynomial operator*(const Polynomial& rhs) const;
  Polynomial operator*(double k) const;
  friend Polynomial operator*(double k, const Polynomial& p) { return p * k; }
  bool operator==(const Polynomial&) const = default;

  /// Complex roots via companion-matrix eigenvalues.
  std::vector<std::complex<double>> roots() const;

 private:
  void normalize();
  std::vector<double> coeffs_;
};

Polynomial poly_mul(const Polynomial& a, const Polynomial& b);

struct PolyDivision {
  Polynomial quotient;
  Polynomial remainder;
};
PolyDivision poly_divmod(const Polynomial& num, const Polynomial& den);

class TransferFunction {
 public:
  TransferFunction() : num_(Polynomial::constant(0.0)), den_(Polynomial::constant(1.0)) {}
  TransferFunction(Polynomial num, Polynomial den);

  static TransferFunction gain(double k) { return {Polynomial::constant(k), Polynomial::constant(1.0)}; }
  /// k / (1 + tau s)
  static TransferFunction first_order_lag(double k, double tau);

  const Polynomial& num() const { return num_; }
  const Polynomial& den() const { return den_; }

  bool is_proper() const { return num_.degree() <= den_.degree() || num_.is_zero(); }
  bool is_strictly_proper() const { return num_.degree() < den_.degree() || num_.is_zero(); }

  std::complex<double> operator()(std::complex<double> s) const { return num_(s) / den_(s); }
  std::complex<double> frequency_response(double omega) const { return (*this)({0.0, omega}); }
  double dc_gain() const { return num_(0.0) / den_(0.0); }

 private:
  Polynomial num_;
  Polynomial den_;
};

struct SeriesOptions {
  bool cancel_common_roots = false;
  double cancel_tolerance = 1e-9;
};

TransferFunction tf_series(const TransferFunction& g1, const TransferFunction& g2, SeriesOptions opts = {});
TransferFunction tf_parallel(const TransferFunction& g1, const TransferFunction& g2);
TransferFunction tf_scale(const TransferFunction& g, double k);
/// forward / (1 + forward * sensor) as a single rational function.
TransferFunction tf_feedback(const TransferFunction& forward, const TransferFunction& sensor);

struct ProperSplit {
  Polynomial polynomial_part;
  TransferFunction proper_part;  ///< strictly proper remainder
};
ProperSplit split_proper(const TransferFunction& g);

struct StateSpace {
  Eigen::MatrixXd A;
  Eigen::VectorXd B;
  Eigen::RowVectorXd C;
  double D = 0.0;

  int order() const { return static_cast<int>(A.rows()); }
  std::complex<double> frequency_response(double omega) const;
};

/// Controllable canonical form. Throws ImproperTransferFunction when deg num > deg den.
StateSpace tf_to_statespace(const TransferFunction& g);

/// Power-of-two diagonal scaling d such that diag(d)^-1 A diag(d) has balanced row/column norms.
Eigen::VectorXd balancing_scales(const Eigen::MatrixXd& A);
/// Applies x = diag(d) z to a realization; the transfer function is unchanged.
StateSpace scale_states(const StateSpace& ss, const Eigen::VectorXd& d);
StateSpace balance(const StateSpace& ss);

bool is_stable(const StateSpace& ss);

/// One fixed RK4 step of x' = A x + B u with u held constant over the step, in closed form:
/// x+ = Phi x + Gamma u.
class Rk4Propagator {
 public:
  Rk4Propagator(const Eigen::MatrixXd& A, const Eigen::VectorXd& B, double dt);
  const Eigen::MatrixXd& phi() const { return phi_; }
  const Eigen::VectorXd& gamma() const { return gamma_; }
  double dt() const { return dt_; }

 private:
  Eigen::MatrixXd phi_;
  Eigen::VectorXd gamma_;
  double dt_;
};

inline constexpr double kDivergenceLimit = 1e12;

/// State trajectory (column k = x[k]) under zero-order-hold input; input.size() columns.
/// Throws NumericalDivergence when any state exceeds kDivergenceLimit or turns non-finite.
Eigen::MatrixXd simulate_states(const Eigen::MatrixXd& A, const Eigen::VectorXd& B, std::span<const double> input,
                                double dt, const Eigen::VectorXd& x0);

/// output[k] = C x[k] + D input[k]
std::vector<double> simulate(const StateSpace& ss, std::span<const double> input, double dt,
                             const Eigen::VectorXd& x0);
std::vector<double> simulate(const StateSpace& ss, std::span<const double> input, double dt);

/// x with A x + B u = 0.
Eigen::VectorXd steady_state(const StateSpace& ss, double constant_input);

struct SimTrace {
  double dt = 0.0;
  std::vector<double> t;
  std::vector<double> r;
  std::vector<double> y;
  std::vector<double> u;
  std::vector<double> e;

  std::size_t size() const { return t.size(); }
  bool consistent() const;
  bool finite() const;
};

/// Sample times t[k] = k dt for k = 0..n where n = round(horizon / dt).
std::vector<double> time_grid(double horizon, double dt);

struct StepMetrics {
  double overshoot = 0.0;
  std::optional<double> settling_time_2pct;  ///< empty when the response never stays in the band
  std::optional<double> rise_time_10_90;
  double peak_time = 0.0;
  double steady_state_value = 0.0;

  bool settled() const { return settling_time_2pct.has_value(); }
};

StepMetrics step_metrics(const SimTrace& trace);
StepMetrics step_metrics(std::span<const double> t, std::span<const double> y);

/// Mean of the final 5% of samples (at least one).
double tail_mean(std::span<const double> x);

}  // namespace avrfo::lti

#endif  // AVRFO_LTI_HPP
