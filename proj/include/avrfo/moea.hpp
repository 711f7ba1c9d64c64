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
#ifndef AVRFO_MOEA_HPP
#define AVRFO_MOEA_HPP

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <vector>

namespace avrfo::moea {

class DegenerateState : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ArityMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline constexpr double kLogisticFloor = 1e-12;

/// Logistic map x <- a x (1 - x). The only randomness source of the optimizer.
struct ChaoticRngState {
  double a = 4.0;
  double x = 0.2027;

  /// Throws DegenerateState for seeds outside (0, 1) or on the fixed/periodic points
  /// 0.25, 0.5, 0.75.
  static ChaoticRngState seeded(double x0, double a = 4.0);
  static bool is_degenerate_seed(double x0);

  bool operator==(const ChaoticRngState&) const = default;
};

/// Advances the state and returns the new iterate, clamped to [1e-12, 1 - 1e-12].
double logistic_next(ChaoticRngState& rng);

/// Maps an a = 4 iterate to a uniform variate through the conjugacy with the tent map.
double uniformize(double x);

/// Box-Muller on two uniformized draws; consumes exactly two iterates.
double standard_normal(ChaoticRngState& rng);

/// min(floor(x n), n - 1) for one draw x.
std::size_t draw_index(ChaoticRngState& rng, std::size_t n);

/// Weak Pareto dominance for minimization. Throws ArityMismatch on unequal lengths.
bool dominates(std::span<const double> u, std::span<const double> v);

struct Bounds {
  std::vector<double> lower;
  std::vector<double> upper;

  std::size_t size() const { return lower.size(); }
  bool contains(std::span<const double> x) const;
  void clamp(std::vector<double>& x) const;
};

struct Individual {
  std::vector<double> genes;
  std::vector<double> objectives;
  int rank = 0;  ///< 1-based front index, 0 = unsorted
  double crowding = 0.0;
};

using Population = std::vector<Individual>;
using Front = std::vector<std::size_t>;

/// Fronts as index lists into pop (F1 first); also writes each individual's rank.
std::vector<Front> non_dominated_sort(Population& pop);

/// Assigns crowding to the members of one front. Boundary members get +inf per objective;
/// objectives with zero range over the front contribute nothing.
void crowding_distance(Population& pop, const Front& front);

/// Size-2 tournament on two distinct indices: lower rank, then larger crowding, then first drawn.
std::size_t tournament_select(const Population& pop, ChaoticRngState& rng);

/// child_g = p1_g + r (p2_g - p1_g), fresh r per gene, clamped to bounds.
std::vector<double> intermediate_crossover(std::span<const double> p1, std::span<const double> p2,
                                           ChaoticRngState& rng, const Bounds& bounds);

/// Adds sigma_fraction * (upper - lower) * N(0,1) per gene, clamped to bounds.
std::vector<double> gaussian_mutate(std::span<const double> parent, ChaoticRngState& rng, const Bounds& bounds,
                                    double sigma_fraction = 0.1);

/// Dominated hypervolume (minimization) with respect to ref. Points not strictly better
/// than ref in every objective contribute nothing.
double hypervolume(const std::vector<std::vector<double>>& points, std::span<const double> ref);

struct NsgaConfig {
  std::size_t pop_size = 100;
  double crossover_fraction = 0.8;
  double mutation_fraction = 0.2;
  std::size_t tournament_size = 2;
  double pareto_fraction = 0.7;
  bool limit_pareto = true;
  double stall_tolerance = 1e-4;
  std::size_t stall_window = 100;
  std::size_t max_generations = 500;
  double mutation_sigma = 0.1;  ///< fraction of each gene's range
  std::size_t threads = 0;      ///< 0 = hardware concurrency
  Bounds bounds;

  /// Throws std::invalid_argument on inconsistent settings.
  void validate() const;
  std::size_t pareto_cap() const;
};

struct GenerationRecord {
  std::size_t generation = 0;
  std::size_t front_size = 0;
  double hypervolume = 0.0;
  double stall_metric = 0.0;  ///< NaN until one relative change is available
};

struct NsgaResult {
  Population front;       ///< rank-1 members of the final population
  Population population;  ///< final population with rank and crowding
  std::vector<GenerationRecord> log;
  std::vector<double> reference_point;
  bool stalled = false;
};

using Evaluator = std::function<std::vector<double>(std::span<const double>)>;
using GenerationCallback = std::function<void(const GenerationRecord&, const Population&)>;

/// The evaluator must be a pure function: it may be called concurrently from worker threads.
NsgaResult nsga2_run(const Evaluator& evaluate, const NsgaConfig& config, ChaoticRngState rng,
                     const GenerationCallback& on_generation = {});

void write_generation_log(std::ostream& os, const std::vector<GenerationRecord>& log);

}  // namespace avrfo::moea

#endif  // AVRFO_MOEA_HPP
