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
#include "avrfo/moea.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <numbers>
#include <ostream>
#include <thread>

#include "avrfo/numfmt.hpp"

namespace avrfo::moea {

bool ChaoticRngState::is_degenerate_seed(double x0) {
  if (!(x0 > 0.0 && x0 < 1.0)) return true;
  return x0 == 0.25 || x0 == 0.5 || x0 == 0.75;
}

ChaoticRngState ChaoticRngState::seeded(double x0, double a) {
  if (is_degenerate_seed(x0)) throw DegenerateState("logistic seed must lie in (0,1) off 0.25, 0.5, 0.75");
  return {a, x0};
}

double logistic_next(ChaoticRngState& rng) {
  if (!(rng.x > 0.0 && rng.x < 1.0)) throw DegenerateState("logistic state left (0,1)");
  const double next = rng.a * rng.x * (1.0 - rng.x);
  rng.x = std::clamp(next, kLogisticFloor, 1.0 - kLogisticFloor);
  return rng.x;
}

double uniformize(double x) { return 2.0 / std::numbers::pi * std::asin(std::sqrt(x)); }

double standard_normal(ChaoticRngState& rng) {
  const double u1 = std::max(uniformize(logistic_next(rng)), std::numeric_limits<double>::min());
  const double u2 = uniformize(logistic_next(rng));
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::size_t draw_index(ChaoticRngState& rng, std::size_t n) {
  const double x = logistic_next(rng);
  const auto idx = static_cast<std::size_t>(std::floor(x * static_cast<double>(n)));
  return std::min(idx, n - 1);
}

bool dominates(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) throw ArityMismatch("objective vectors differ in length");
  bool strictly = false;
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (u[i] > v[i]) return false;
    if (u[i] < v[i]) strictly = true;
  }
  return strictly;
}

bool Bounds::contains(std::span<const double> x) const {
  if (x.size() != size()) return false;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] >= lower[i] && x[i] <= upper[i])) return false;
  }
  return true;
}

void Bounds::clamp(std::vector<double>& x) const {
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::clamp(x[i], lower[i], upper[i]);
}

std::vector<Front> non_dominated_sort(Population& pop) {
  const std::size_t n = pop.size();
  std::vector<std::vector<std::size_t>> dominated_by_me(n);
  std::vector<std::size_t> domination_count(n, 0);
  std::vector<Front> fronts;
  Front current;
  for (std::size_t p = 0; p < n; ++p) {
    for (std::size_t q = p + 1; q < n; ++q) {
      if (dominates(pop[p].objectives, pop[q].objectives)) {
        dominated_by_me[p].push_back(q);
        ++domination_count[q];
      } else if (dominates(pop[q].objectives, pop[p].objectives)) {
        dominated_by_me[q].push_back(p);
        ++domination_count[p];
      }
    }
  }
  for (std::size_t p = 0; p < n; ++p) {
    if (domination_count[p] == 0) current.push_back(p);
  }
  int rank = 1;
  while (!current.empty()) {
    Front next;
    for (std::size_t p : current) {
      pop[p].rank = rank;
      for (std::size_t q : dominated_by_me[p]) {
        if (--domination_count[q] == 0) next.push_back(q);
      }
    }
    std::sort(next.begin(), next.end());
    fronts.push_back(std::move(current));
    current = std::move(next);
    ++rank;
  }
  return fronts;
}

void crowding_distance(Population& pop, const Front& front) {
  for (std::size_t i : front) pop[i].crowding = 0.0;
  if (front.empty()) return;
  const std::size_t m = pop[front.front()].objectives.size();
  Front order = front;
  for (std::size_t obj = 0; obj < m; ++obj) {
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return pop[a].objectives[obj] < pop[b].objectives[obj]; });
    const double lo = pop[order.front()].objectives[obj];
    const double hi = pop[order.back()].objectives[obj];
    const double range = hi - lo;
    if (!(range > 0.0)) continue;
    pop[order.front()].crowding = std::numeric_limits<double>::infinity();
    pop[order.back()].crowding = std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k + 1 < order.size(); ++k) {
      auto& c = pop[order[k]].crowding;
      if (std::isinf(c)) continue;
      c += (pop[order[k + 1]].objectives[obj] - pop[order[k - 1]].objectives[obj]) / range;
    }
  }
}

namespace {

bool beats(const Individual& a, const Individual& b) {
  if (a.rank != b.rank) return a.rank < b.rank;
  return a.crowding > b.crowding;
}

std::size_t tournament(const Population& pop, ChaoticRngState& rng, std::size_t size) {
  size = std::min(size, pop.size());
  std::vector<std::size_t> drawn;
  while (drawn.size() < size) {
    const std::size_t idx = draw_index(rng, pop.size());
    if (std::find(drawn.begin(), drawn.end(), idx) == drawn.end()) drawn.push_back(idx);
  }
  std::size_t best = drawn.front();
  for (std::size_t k = 1; k < drawn.size(); ++k) {
    if (beats(pop[drawn[k]], pop[best])) best = drawn[k];
  }
  return best;
}

}  // namespace

std::size_t tournament_select(const Population& pop, ChaoticRngState& rng) {
  if (pop.empty()) throw std::invalid_argument("tournament on empty population");
  return tournament(pop, rng, 2);
}

std::vector<double> intermediate_crossover(std::span<const double> p1, std::span<const double> p2,
                                           ChaoticRngState& rng, const Bounds& bounds) {
  if (p1.size() != p2.size() || p1.size() != bounds.size()) throw ArityMismatch("gene vectors differ in length");
  std::vector<double> child(p1.size());
  for (std::size_t g = 0; g < p1.size(); ++g) {
    const double r = logistic_next(rng);
    child[g] = p1[g] + r * (p2[g] - p1[g]);
  }
  bounds.clamp(child);
  return child;
}

std::vector<double> gaussian_mutate(std::span<const double> parent, ChaoticRngState& rng, const Bounds& bounds,
                                    double sigma_fraction) {
  if (parent.size() != bounds.size()) throw ArityMismatch("gene vector and bounds differ in length");
  std::vector<double> child(parent.begin(), parent.end());
  for (std::size_t g = 0; g < child.size(); ++g) {
    const double sigma = sigma_fraction * (bounds.upper[g] - bounds.lower[g]);
    child[g] += sigma * standard_normal(rng);
  }
  bounds.clamp(child);
  return child;
}

namespace {

double hv_recursive(std::vector<std::vector<double>> pts, std::span<const double> ref, std::size_t m) {
  if (pts.empty()) return 0.0;
  if (m == 1) {
    double best = ref[0];
    for (const auto& p : pts) best = std::min(best, p[0]);
    return ref[0] - best;
  }
  if (m == 2) {
    std::sort(pts.begin(), pts.end(),
              [](const auto& a, const auto& b) { return a[0] < b[0] || (a[0] == b[0] && a[1] < b[1]); });
    double vol = 0.0;
    double ceiling = ref[1];
    for (const auto& p : pts) {
      if (p[1] < ceiling) {
        vol += (ref[0] - p[0]) * (ceiling - p[1]);
        ceiling = p[1];
      }
    }
    return vol;
  }
  // slice along the last objective
  std::sort(pts.begin(), pts.end(), [m](const auto& a, const auto& b) { return a[m - 1] < b[m - 1]; });
  double vol = 0.0;
  std::vector<std::vector<double>> slice;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    slice.emplace_back(pts[i].begin(), pts[i].begin() + static_cast<std::ptrdiff_t>(m - 1));
    const double z_next = i + 1 < pts.size() ? pts[i + 1][m - 1] : ref[m - 1];
    const double depth = z_next - pts[i][m - 1];
    if (depth > 0.0) vol += depth * hv_recursive(slice, ref.first(m - 1), m - 1);
  }
  return vol;
}

}  // namespace

double hypervolume(const std::vector<std::vector<double>>& points, std::span<const double> ref) {
  std::vector<std::vector<double>> inside;
  for (const auto& p : points) {
    if (p.size() != ref.size()) throw ArityMismatch("point and reference differ in length");
    bool ok = true;
    for (std::size_t i = 0; i < p.size() && ok; ++i) ok = p[i] < ref[i];
    if (ok) inside.push_back(p);
  }
  return hv_recursive(std::move(inside), ref, ref.size());
}

void NsgaConfig::validate() const {
  if (pop_size < 2) throw std::invalid_argument("pop_size must be at least 2");
  const auto in_unit = [](double f) { return f >= 0.0 && f <= 1.0; };
  if (!in_unit(crossover_fraction) || !in_unit(mutation_fraction) || !in_unit(pareto_fraction)) {
    throw std::invalid_argument("fractions must lie in [0,1]");
  }
  if (crossover_fraction + mutation_fraction > 1.0 + 1e-12) {
    throw std::invalid_argument("crossover_fraction + mutation_fraction must not exceed 1");
  }
  if (tournament_size < 1) throw std::invalid_argument("tournament_size must be positive");
  if (bounds.size() == 0 || bounds.lower.size() != bounds.upper.size()) {
    throw std::invalid_argument("bounds must be non-empty with matching lower/upper");
  }
  for (std::size_t i = 0; i < bounds.size(); ++i) {
    if (!(bounds.lower[i] <= bounds.upper[i])) throw std::invalid_argument("bounds: lower exceeds upper");
  }
  if (stall_window < 1) throw std::invalid_argument("stall_window must be positive");
}

std::size_t NsgaConfig::pareto_cap() const {
  const auto cap = static_cast<std::size_t>(std::ceil(pareto_fraction * static_cast<double>(pop_size) - 1e-9));
  return std::max<std::size_t>(cap, 1);
}

namespace {

void evaluate_all(Population& pop, const Evaluator& evaluate, std::size_t threads) {
  const std::size_t n = pop.size();
  std::size_t workers = threads != 0 ? threads : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, n);
  if (workers <= 1) {
    for (auto& ind : pop) ind.objectives = evaluate(ind.genes);
  } else {
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i = w; i < n; i += workers) pop[i].objectives = evaluate(pop[i].genes);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }
  for (const auto& ind : pop) {
    if (ind.objectives.size() != pop.front().objectives.size() || ind.objectives.empty()) {
      throw ArityMismatch("evaluator returned inconsistent objective counts");
    }
  }
}

void rank_and_crowd(Population& pop) {
  for (const auto& front : non_dominated_sort(pop)) crowding_distance(pop, front);
}

Front by_crowding(Front f, const Population& pop) {
  std::stable_sort(f.begin(), f.end(), [&](std::size_t a, std::size_t b) { return pop[a].crowding > pop[b].crowding; });
  return f;
}

Population select_survivors(Population merged, const NsgaConfig& cfg) {
  const auto fronts = non_dominated_sort(merged);
  for (const auto& f : fronts) crowding_distance(merged, f);
  const std::size_t n = cfg.pop_size;
  Front chosen;
  Front spare_first;
  for (std::size_t fi = 0; fi < fronts.size() && chosen.size() < n; ++fi) {
    std::size_t room = n - chosen.size();
    if (fi == 0 && cfg.limit_pareto) room = std::min(room, cfg.pareto_cap());
    if (fronts[fi].size() <= room) {
      chosen.insert(chosen.end(), fronts[fi].begin(), fronts[fi].end());
      continue;
    }
    const Front sorted = by_crowding(fronts[fi], merged);
    chosen.insert(chosen.end(), sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(room));
    if (fi == 0) spare_first.assign(sorted.begin() + static_cast<std::ptrdiff_t>(room), sorted.end());
  }
  // Not enough dominated solutions to fill up: readmit the truncated rank-1 members.
  for (std::size_t i = 0; i < spare_first.size() && chosen.size() < n; ++i) chosen.push_back(spare_first[i]);

  Population next;
  next.reserve(n);
  for (std::size_t idx : chosen) next.push_back(std::move(merged[idx]));
  return next;
}

Population make_children(const Population& pop, ChaoticRngState& rng, const NsgaConfig& cfg) {
  const std::size_t n = cfg.pop_size;
  auto n_cross = static_cast<std::size_t>(std::llround(cfg.crossover_fraction * static_cast<double>(n)));
  auto n_mut = static_cast<std::size_t>(std::llround(cfg.mutation_fraction * static_cast<double>(n)));
  n_cross = std::min(n_cross, n);
  n_mut = std::min(n_mut, n - n_cross);
  Population children;
  children.reserve(n);
  for (std::size_t i = 0; i < n_cross; ++i) {
    const std::size_t a = tournament(pop, rng, cfg.tournament_size);
    const std::size_t b = tournament(pop, rng, cfg.tournament_size);
    children.push_back({intermediate_crossover(pop[a].genes, pop[b].genes, rng, cfg.bounds), {}, 0, 0.0});
  }
  for (std::size_t i = 0; i < n_mut; ++i) {
    const std::size_t a = tournament(pop, rng, cfg.tournament_size);
    children.push_back({gaussian_mutate(pop[a].genes, rng, cfg.bounds, cfg.mutation_sigma), {}, 0, 0.0});
  }
  while (children.size() < n) {
    const std::size_t a = tournament(pop, rng, cfg.tournament_size);
    children.push_back({pop[a].genes, {}, 0, 0.0});
  }
  return children;
}

std::vector<std::vector<double>> first_front_points(const Population& pop) {
  std::vector<std::vector<double>> pts;
  for (const auto& ind : pop) {
    if (ind.rank == 1) pts.push_back(ind.objectives);
  }
  return pts;
}

std::vector<double> reference_from(const std::vector<std::vector<double>>& front) {
  std::vector<double> ref(front.front().size(), -std::numeric_limits<double>::infinity());
  for (const auto& p : front) {
    for (std::size_t i = 0; i < p.size(); ++i) ref[i] = std::max(ref[i], p[i]);
  }
  for (double& r : ref) r = r > 0.0 ? 1.1 * r : r + 0.1 * std::max(1.0, std::abs(r));
  return ref;
}

}  // namespace

NsgaResult nsga2_run(const Evaluator& evaluate, const NsgaConfig& config, ChaoticRngState rng,
                     const GenerationCallback& on_generation) {
  config.validate();
  const std::size_t n = config.pop_size;
  const Bounds& bounds = config.bounds;

  Population pop(n);
  for (auto& ind : pop) {
    ind.genes.resize(bounds.size());
    for (std::size_t g = 0; g < bounds.size(); ++g) {
      ind.genes[g] = bounds.lower[g] + logistic_next(rng) * (bounds.upper[g] - bounds.lower[g]);
    }
  }
  evaluate_all(pop, evaluate, config.threads);
  rank_and_crowd(pop);

  NsgaResult result;
  result.reference_point = reference_from(first_front_points(pop));
  std::vector<double> rel_changes;
  double previous_hv = 0.0;

  auto record = [&](std::size_t gen) {
    const auto front = first_front_points(pop);
    GenerationRecord rec;
    rec.generation = gen;
    rec.front_size = front.size();
    rec.hypervolume = hypervolume(front, result.reference_point);
    rec.stall_metric = std::numeric_limits<double>::quiet_NaN();
    if (gen > 0) {
      double rel = 0.0;
      if (previous_hv > 0.0) {
        rel = std::abs(rec.hypervolume - previous_hv) / previous_hv;
      } else if (rec.hypervolume > 0.0) {
        rel = 1.0;
      }
      rel_changes.push_back(rel);
      const std::size_t w = std::min(config.stall_window, rel_changes.size());
      double sum = 0.0;
      for (std::size_t k = rel_changes.size() - w; k < rel_changes.size(); ++k) sum += rel_changes[k];
      rec.stall_metric = sum / static_cast<double>(w);
    }
    previous_hv = rec.hypervolume;
    result.log.push_back(rec);
    if (on_generation) on_generation(rec, pop);
    return rec;
  };

  record(0);
  for (std::size_t gen = 1; gen <= config.max_generations; ++gen) {
    Population children = make_children(pop, rng, config);
    evaluate_all(children, evaluate, config.threads);
    Population merged = std::move(pop);
    merged.insert(merged.end(), std::make_move_iterator(children.begin()), std::make_move_iterator(children.end()));
    pop = select_survivors(std::move(merged), config);
    const auto rec = record(gen);
    if (rel_changes.size() >= config.stall_window && rec.stall_metric < config.stall_tolerance) {
      result.stalled = true;
      break;
    }
  }

  for (const auto& ind : pop) {
    if (ind.rank == 1) result.front.push_back(ind);
  }
  result.population = std::move(pop);
  return result;
}

void write_generation_log(std::ostream& os, const std::vector<GenerationRecord>& log) {
  os << "generation,front_size,hypervolume,stall_metric\n";
  for (const auto& r : log) {
    os << r.generation << ',' << r.front_size << ',' << format_double(r.hypervolume) << ','
       << format_double(r.stall_metric) << '\n';
  }
}

}  // namespace avrfo::moea
