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
#include "avrfo/lti.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Eigenvalues>

namespace avrfo::lti {

// ---------------------------------------------------------------------------
// Polynomial

Polynomial::Polynomial(std::initializer_list<double> coeffs) : coeffs_(coeffs) { normalize(); }

Polynomial::Polynomial(std::vector<double> coeffs) : coeffs_(std::move(coeffs)) { normalize(); }

void Polynomial::normalize() {
  auto first = std::find_if(coeffs_.begin(), coeffs_.end(), [](double c) { return c != 0.0; });
  if (first == coeffs_.end()) {
    coeffs_.assign(1, 0.0);
    return;
  }
  coeffs_.erase(coeffs_.begin(), first);
}

Polynomial Polynomial::from_roots(std::span<const double> roots) {
  Polynomial p = constant(1.0);
  for (double r : roots) p = p * Polynomial({1.0, -r});
  return p;
}

double Polynomial::coeff_of_power(int power) const {
  if (power < 0 || power > degree()) return 0.0;
  return coeffs_[static_cast<std::size_t>(degree() - power)];
}

double Polynomial::operator()(double s) const {
  double acc = 0.0;
  for (double c : coeffs_) acc = acc * s + c;
  return acc;
}

std::complex<double> Polynomial::operator()(std::complex<double> s) const {
  std::complex<double> acc = 0.0;
  for (double c : coeffs_) acc = acc * s + c;
  return acc;
}

Polynomial Polynomial::operator+(const Polynomial& rhs) const {
  const std::size_t n = std::max(coeffs_.size(), rhs.coeffs_.size());
  std::vector<double> out(n, 0.0);
  // align on the constant term
  for (std::size_t i = 0; i < coeffs_.size(); ++i) out[n - coeffs_.size() + i] += coeffs_[i];
  for (std::size_t i = 0; i < rhs.coeffs_.size(); ++i) out[n - rhs.coeffs_.size() + i] += rhs.coeffs_[i];
  return Polynomial(std::move(out));
}

Polynomial Polynomial::operator-(const Polynomial& rhs) const { return *this + rhs * -1.0; }

Polynomial Polynomial::operator*(const Polynomial& rhs) const {
  if (is_zero() || rhs.is_zero()) return Polynomial();
  std::vector<double> out(coeffs_.size() + rhs.coeffs_.size() - 1, 0.0);
  for (std::size_t i = 0; i < coeffs_.size(); ++i) {
    for (std::size_t j = 0; j < rhs.coeffs_.size(); ++j) out[i + j] += coeffs_[i] * rhs.coeffs_[j];
  }
  return Polynomial(std::move(out));
}

Polynomial Polynomial::operator*(double k) const {
  std::vector<double> out = coeffs_;
  for (double& c : out) c *= k;
  return Polynomial(std::move(out));
}

std::vector<std::complex<double>> Polynomial::roots() const {
  const int n = degree();
  if (n < 1) return {};
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(n, n);
  for (int j = 0; j < n; ++j) companion(0, j) = -coeffs_[static_cast<std::size_t>(j + 1)] / coeffs_[0];
  for (int i = 1; i < n; ++i) companion(i, i - 1) = 1.0;
  Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
  std::vector<std::complex<double>> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out.push_back(solver.eigenvalues()[i]);
  return out;
}

Polynomial poly_mul(const Polynomial& a, const Polynomial& b) { return a * b; }

PolyDivision poly_divmod(const Polynomial& num, const Polynomial& den) {
  if (den.is_zero()) throw std::invalid_argument("polynomial division by zero");
  if (num.degree() < den.degree() || num.is_zero()) return {Polynomial(), num};
  std::vector<double> rem = num.coeffs();
  const auto& d = den.coeffs();
  const std::size_t qlen = rem.size() - d.size() + 1;
  std::vector<double> q(qlen, 0.0);
  for (std::size_t i = 0; i < qlen; ++i) {
    const double f = rem[i] / d[0];
    q[i] = f;
    for (std::size_t j = 0; j < d.size(); ++j) rem[i + j] -= f * d[j];
    rem[i] = 0.0;
  }
  return {Polynomial(std::move(q)), Polynomial(std::vector<double>(rem.begin() + static_cast<long>(qlen), rem.end()))};
}

// ---------------------------------------------------------------------------
// TransferFunction

TransferFunction::TransferFunction(Polynomial num, Polynomial den) : num_(std::move(num)), den_(std::move(den)) {
  if (den_.is_zero()) throw std::invalid_argument("transfer function denominator is the zero polynomial");
}

TransferFunction TransferFunction::first_order_lag(double k, double tau) {
  return {Polynomial::constant(k), Polynomial({tau, 1.0})};
}

namespace {

Polynomial real_poly_from_roots(double lead, std::vector<std::complex<double>> roots) {
  Polynomial p = Polynomial::constant(lead);
  std::vector<bool> used(roots.size(), false);
  for (std::size_t i = 0; i < roots.size(); ++i) {
    if (used[i]) continue;
    used[i] = true;
    const auto r = roots[i];
    if (std::abs(r.imag()) <= 1e-12 * std::max(1.0, std::abs(r))) {
      p = p * Polynomial({1.0, -r.real()});
      continue;
    }
    // pair with the closest unused conjugate
    std::size_t best = roots.size();
    double best_dist = 0.0;
    for (std::size_t j = i + 1; j < roots.size(); ++j) {
      if (used[j]) continue;
      const double dist = std::abs(roots[j] - std::conj(r));
      if (best == roots.size() || dist < best_dist) {
        best = j;
        best_dist = dist;
      }
    }
    if (best != roots.size()) used[best] = true;
    p = p * Polynomial({1.0, -2.0 * r.real(), std::norm(r)});
  }
  return p;
}

}  // namespace

TransferFunction tf_series(const TransferFunction& g1, const TransferFunction& g2, SeriesOptions opts) {
  Polynomial num = g1.num() * g2.num();
  Polynomial den = g1.den() * g2.den();
  if (!opts.cancel_common_roots || num.is_zero() || num.degree() == 0 || den.degree() == 0) return {num, den};

  auto zeros = num.roots();
  auto poles = den.roots();
  std::vector<bool> pole_used(poles.size(), false);
  std::vector<std::complex<double>> kept_zeros;
  for (const auto& z : zeros) {
    bool cancelled = false;
    for (std::size_t j = 0; j < poles.size(); ++j) {
      if (pole_used[j]) continue;
      if (std::abs(z - poles[j]) <= opts.cancel_tolerance * std::max(1.0, std::abs(poles[j]))) {
        pole_used[j] = true;
        cancelled = true;
        break;
      }
    }
    if (!cancelled) kept_zeros.push_back(z);
  }
  if (kept_zeros.size() == zeros.size()) return {num, den};
  std::vector<std::complex<double>> kept_poles;
  for (std::size_t j = 0; j < poles.size(); ++j) {
    if (!pole_used[j]) kept_poles.push_back(poles[j]);
  }
  return {real_poly_from_roots(num.leading(), std::move(kept_zeros)),
          real_poly_from_roots(den.leading(), std::move(kept_poles))};
}

TransferFunction tf_parallel(const TransferFunction& g1, const TransferFunction& g2) {
  if (g1.den() == g2.den()) return {g1.num() + g2.num(), g1.den()};
  return {g1.num() * g2.den() + g2.num() * g1.den(), g1.den() * g2.den()};
}

TransferFunction tf_scale(const TransferFunction& g, double k) { return {g.num() * k, g.den()}; }

TransferFunction tf_feedback(const TransferFunction& forward, const TransferFunction& sensor) {
  Polynomial characteristic = forward.den() * sensor.den() + forward.num() * sensor.num();
  if (characteristic.is_zero()) throw DegenerateLoop("1 + forward * sensor is identically zero");
  return {forward.num() * sensor.den(), std::move(characteristic)};
}

ProperSplit split_proper(const TransferFunction& g) {
  auto [q, r] = poly_divmod(g.num(), g.den());
  return {std::move(q), TransferFunction(std::move(r), g.den())};
}

// ---------------------------------------------------------------------------
// State space

std::complex<double> StateSpace::frequency_response(double omega) const {
  const int n = order();
  if (n == 0) return D;
  Eigen::MatrixXcd M = std::complex<double>(0.0, omega) * Eigen::MatrixXcd::Identity(n, n) - A.cast<std::complex<double>>();
  Eigen::VectorXcd x = M.partialPivLu().solve(B.cast<std::complex<double>>());
  return (C.cast<std::complex<double>>() * x)(0) + D;
}

StateSpace tf_to_statespace(const TransferFunction& g) {
  if (!g.is_proper()) throw ImproperTransferFunction("cannot realize an improper transfer function");
  const Polynomial& den = g.den();
  const int n = den.degree();
  const double lead = den.leading();
  StateSpace ss;
  ss.A = Eigen::MatrixXd::Zero(n, n);
  ss.B = Eigen::VectorXd::Zero(n);
  ss.C = Eigen::RowVectorXd::Zero(n);
  if (n == 0) {
    ss.D = g.num()(0.0) / lead;
    return ss;
  }
  ss.D = g.num().coeff_of_power(n) / lead;
  for (int i = 0; i + 1 < n; ++i) ss.A(i, i + 1) = 1.0;
  for (int j = 0; j < n; ++j) {
    ss.A(n - 1, j) = -den.coeff_of_power(j) / lead;
    // strictly proper remainder after removing the feedthrough
    ss.C(j) = g.num().coeff_of_power(j) / lead - ss.D * den.coeff_of_power(j) / lead;
  }
  ss.B(n - 1) = 1.0;
  return ss;
}

Eigen::VectorXd balancing_scales(const Eigen::MatrixXd& A) {
  const int n = static_cast<int>(A.rows());
  Eigen::MatrixXd a = A;
  Eigen::VectorXd scale = Eigen::VectorXd::Ones(n);
  constexpr double radix = 2.0;
  constexpr double sqrdx = radix * radix;
  bool done = false;
  for (int sweep = 0; !done && sweep < 200; ++sweep) {
    done = true;
    for (int i = 0; i < n; ++i) {
      double c = 0.0;
      double r = 0.0;
      for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        c += std::abs(a(j, i));
        r += std::abs(a(i, j));
      }
      if (c == 0.0 || r == 0.0) continue;
      double g = r / radix;
      double f = 1.0;
      const double s = c + r;
      while (c < g) {
        f *= radix;
        c *= sqrdx;
      }
      g = r * radix;
      while (c > g) {
        f /= radix;
        c /= sqrdx;
      }
      if ((c + r) / f < 0.95 * s) {
        done = false;
        scale(i) *= f;
        a.row(i) /= f;
        a.col(i) *= f;
      }
    }
  }
  return scale;
}

StateSpace scale_states(const StateSpace& ss, const Eigen::VectorXd& d) {
  StateSpace out;
  out.A = d.cwiseInverse().asDiagonal() * ss.A * d.asDiagonal();
  out.B = d.cwiseInverse().asDiagonal() * ss.B;
  out.C = ss.C * d.asDiagonal();
  out.D = ss.D;
  return out;
}

StateSpace balance(const StateSpace& ss) {
  if (ss.order() == 0) return ss;
  return scale_states(ss, balancing_scales(ss.A));
}

bool is_stable(const StateSpace& ss) {
  if (ss.order() == 0) return true;
  Eigen::EigenSolver<Eigen::MatrixXd> solver(balance(ss).A, false);
  return (solver.eigenvalues().real().array() < 0.0).all();
}

Rk4Propagator::Rk4Propagator(const Eigen::MatrixXd& A, const Eigen::VectorXd& B, double dt) : dt_(dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("simulation step must be positive");
  const auto n = A.rows();
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd M = dt * A;
  const Eigen::MatrixXd M2 = M * M;
  const Eigen::MatrixXd M3 = M2 * M;
  const Eigen::MatrixXd M4 = M3 * M;
  phi_ = I + M + M2 / 2.0 + M3 / 6.0 + M4 / 24.0;
  gamma_ = dt * ((I + M / 2.0 + M2 / 6.0 + M3 / 24.0) * B);
}

Eigen::MatrixXd simulate_states(const Eigen::MatrixXd& A, const Eigen::VectorXd& B, std::span<const double> input,
                                double dt, const Eigen::VectorXd& x0) {
  const auto n = A.rows();
  if (x0.size() != n) throw std::invalid_argument("initial state dimension mismatch");
  const auto steps = static_cast<Eigen::Index>(input.size());
  Eigen::MatrixXd states(n, steps);
  if (steps == 0) return states;
  const Rk4Propagator prop(A, B, dt);
  Eigen::VectorXd x = x0;
  Eigen::VectorXd next(n);
  states.col(0) = x;
  for (Eigen::Index k = 1; k < steps; ++k) {
    next.noalias() = prop.phi() * x;
    next.noalias() += prop.gamma() * input[static_cast<std::size_t>(k - 1)];
    x.swap(next);
    if (n > 0) {
      const double peak = x.cwiseAbs().maxCoeff();
      if (!(peak <= kDivergenceLimit)) throw NumericalDivergence("state magnitude exceeded divergence limit");
    }
    states.col(k) = x;
  }
  return states;
}

std::vector<double> simulate(const StateSpace& ss, std::span<const double> input, double dt,
                             const Eigen::VectorXd& x0) {
  const Eigen::MatrixXd states = simulate_states(ss.A, ss.B, input, dt, x0);
  std::vector<double> out(input.size());
  for (std::size_t k = 0; k < input.size(); ++k) {
    const double cx = ss.order() > 0 ? ss.C.dot(states.col(static_cast<Eigen::Index>(k))) : 0.0;
    out[k] = cx + ss.D * input[k];
  }
  return out;
}

std::vector<double> simulate(const StateSpace& ss, std::span<const double> input, double dt) {
  return simulate(ss, input, dt, Eigen::VectorXd::Zero(ss.order()));
}

Eigen::VectorXd steady_state(const StateSpace& ss, double constant_input) {
  const int n = ss.order();
  if (n == 0) return Eigen::VectorXd();
  // solve in balanced coordinates, then map back through x = diag(d) z
  const Eigen::VectorXd d = balancing_scales(ss.A);
  const StateSpace bal = scale_states(ss, d);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(bal.A);
  if (!lu.isInvertible() || lu.rcond() < 1e-13) {
    throw SingularEquilibrium("state matrix is singular; no unique equilibrium");
  }
  const Eigen::VectorXd z = lu.solve(-bal.B * constant_input);
  return d.asDiagonal() * z;
}

// ---------------------------------------------------------------------------
// Traces and metrics

bool SimTrace::consistent() const {
  const auto n = t.size();
  if (r.size() != n || y.size() != n || u.size() != n || e.size() != n) return false;
  for (std::size_t k = 0; k < n; ++k) {
    if (std::abs(t[k] - static_cast<double>(k) * dt) > 1e-9 * std::max(1.0, t[k])) return false;
  }
  return true;
}

bool SimTrace::finite() const {
  auto all_finite = [](const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
  };
  return all_finite(t) && all_finite(r) && all_finite(y) && all_finite(u) && all_finite(e);
}

std::vector<double> time_grid(double horizon, double dt) {
  if (!(dt > 0.0) || !(horizon > 0.0)) throw std::invalid_argument("horizon and dt must be positive");
  const auto n = static_cast<std::size_t>(std::llround(horizon / dt));
  std::vector<double> t(n + 1);
  for (std::size_t k = 0; k <= n; ++k) t[k] = static_cast<double>(k) * dt;
  return t;
}

double tail_mean(std::span<const double> x) {
  if (x.empty()) throw std::invalid_argument("tail_mean of empty signal");
  const std::size_t count = std::max<std::size_t>(1, x.size() / 20);
  const auto tail = x.subspan(x.size() - count);
  return std::accumulate(tail.begin(), tail.end(), 0.0) / static_cast<double>(count);
}

StepMetrics step_metrics(std::span<const double> t, std::span<const double> y) {
  if (y.empty() || t.size() != y.size()) throw std::invalid_argument("step_metrics needs a non-empty trace");
  StepMetrics m;
  const double yf = tail_mean(y);
  m.steady_state_value = yf;

  const bool rising = yf >= 0.0;
  const auto extreme = rising ? std::max_element(y.begin(), y.end()) : std::min_element(y.begin(), y.end());
  const auto peak_idx = static_cast<std::size_t>(extreme - y.begin());
  m.peak_time = t[peak_idx];
  if (std::abs(yf) > 1e-12) m.overshoot = std::max(0.0, (*extreme - yf) / yf);

  double band = 0.02 * std::abs(yf);
  if (std::abs(yf) <= 1e-12) {
    double amp = 0.0;
    for (double v : y) amp = std::max(amp, std::abs(v));
    band = 0.02 * amp;
  }
  std::optional<std::size_t> last_out;
  for (std::size_t k = y.size(); k-- > 0;) {
    if (std::abs(y[k] - yf) > band) {
      last_out = k;
      break;
    }
  }
  if (!last_out) {
    m.settling_time_2pct = 0.0;
  } else if (*last_out + 1 < y.size()) {
    m.settling_time_2pct = t[*last_out + 1];
  }

  if (std::abs(yf) > 1e-12) {
    std::optional<double> t10;
    std::optional<double> t90;
    for (std::size_t k = 0; k < y.size(); ++k) {
      const double frac = y[k] / yf;
      if (!t10 && frac >= 0.1) t10 = t[k];
      if (!t90 && frac >= 0.9) {
        t90 = t[k];
        break;
      }
    }
    if (t10 && t90) m.rise_time_10_90 = *t90 - *t10;
  }
  return m;
}

StepMetrics step_metrics(const SimTrace& trace) { return step_metrics(trace.t, trace.y); }

}  // namespace avrfo::lti
