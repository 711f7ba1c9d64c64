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
// Acceptance runner. Prints one "criterion N PASS|FAIL ..." line per criterion and exits
// non-zero when any selected criterion fails. Usage: avrfo_acceptance [--criterion N]...

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "avrfo/cli.hpp"
#include "avrfo/numfmt.hpp"
#include "support/oracles.hpp"

namespace {

using namespace avrfo;
namespace fs = std::filesystem;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double x, int digits = 4) {
  std::ostringstream os;
  os.precision(digits);
  os << x;
  return os.str();
}

// 1. Filter magnitude and phase against the ideal operator over one decade inside the band.
Outcome oustaloup_fidelity() {
  double worst_mag = 0.0, worst_phase = 0.0;
  std::string detail;
  for (double alpha : {0.3, 0.5, 0.7, 1.0, 1.3}) {
    const auto g = folib::oustaloup_filter(alpha);
    double mag = 0.0, phase = 0.0;
    for (double w : oracle::logspace(0.1, 10.0, 201)) {
      const auto h = g.frequency_response(w);
      const auto ideal = oracle::ideal_power(w, alpha);
      const double dm = std::abs(oracle::db(std::abs(h)) - oracle::db(std::abs(ideal)));
      const double dp = std::abs(std::arg(h / ideal)) * 180.0 / std::numbers::pi;
      // NaN must not slip through std::max
      mag = std::isfinite(dm) ? std::max(mag, dm) : std::numeric_limits<double>::infinity();
      phase = std::isfinite(dp) ? std::max(phase, dp) : std::numeric_limits<double>::infinity();
    }
    worst_mag = std::max(worst_mag, mag);
    worst_phase = std::max(worst_phase, phase);
    detail += " a=" + fmt(alpha, 2) + ":" + fmt(mag, 3) + "dB/" + fmt(phase, 3) + "deg";
  }
  return {worst_mag < 2.0 && worst_phase < 5.0, "max |dB| " + fmt(worst_mag) + ", max phase " + fmt(worst_phase) +
                                                    " deg (limits 2 dB, 5 deg);" + detail};
}

// 2. Time-domain step response of the half-order filter against the Grunwald-Letnikov sum.
Outcome oustaloup_vs_gl() {
  const double dt = 1e-3;
  const auto t = lti::time_grid(5.0, dt);
  const std::vector<double> step(t.size(), 1.0);
  const auto y = lti::simulate(lti::tf_to_statespace(folib::oustaloup_filter(0.5)), step, dt);
  const auto gl = folib::gl_differint(step, 0.5, dt);
  double worst = 0.0, at = 0.0;
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (t[k] < 0.5 - 1e-12) continue;
    const double rel = std::abs(y[k] - gl[k]) / std::abs(gl[k]);
    if (rel > worst) {
      worst = rel;
      at = t[k];
    }
  }
  return {worst < 0.05, "max relative error " + fmt(worst) + " at t=" + fmt(at) + " s (limit 0.05)"};
}

// 3. Analytic LTI checks.
Outcome analytic_lti() {
  const auto plant = avr::build_plant({});
  const auto loop = lti::tf_feedback(plant.forward_chain(), plant.sensor);
  const double dt = 1e-3;
  const auto t = lti::time_grid(30.0, dt);
  const std::vector<double> step(t.size(), 1.0);
  const double dc = lti::simulate(lti::tf_to_statespace(loop), step, dt).back();
  const bool dc_ok = std::abs(dc - 10.0 / 11.0) < 1e-3;

  // global error of y(1) for 1/(s+1) at dt and dt/2
  const auto lag = lti::tf_to_statespace({lti::Polynomial::constant(1.0), lti::Polynomial({1.0, 1.0})});
  const auto err = [&](double h) {
    const auto n = lti::time_grid(1.0, h).size();
    const std::vector<double> u(n, 1.0);
    return std::abs(lti::simulate(lag, u, h).back() - (1.0 - std::exp(-1.0)));
  };
  const double ratio = err(0.1) / err(0.05);
  const bool rk_ok = ratio > 14.0 && ratio < 18.0;

  const double h = 1e-3;
  const auto tg = lti::time_grid(1.0, h);
  const auto d = folib::gl_differint(tg, 0.5, h);
  const double want = 2.0 / std::sqrt(std::numbers::pi);
  const double rel = std::abs(d.back() - want) / want;
  const bool gl_ok = rel < 0.01;

  return {dc_ok && rk_ok && gl_ok, "dc " + fmt(dc, 7) + " (10/11 +- 1e-3) " + (dc_ok ? "ok" : "bad") +
                                       "; rk4 error ratio " + fmt(ratio) + " (14..18) " + (rk_ok ? "ok" : "bad") +
                                       "; D^0.5 t at 1 = " + fmt(d.back(), 6) + " rel " + fmt(rel, 3) + " " +
                                       (gl_ok ? "ok" : "bad")};
}

// 4. Fast sort against brute-force peeling.
Outcome sorting_oracle() {
  std::mt19937 gen(4);
  int mismatches = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + gen() % 50;
    const std::size_t m = 2 + gen() % 2;
    std::vector<std::vector<double>> pts(n, std::vector<double>(m));
    std::uniform_int_distribution<int> coarse(0, 5);
    for (auto& p : pts) {
      for (auto& v : p) v = trial % 3 == 0 ? coarse(gen) : std::generate_canonical<double, 53>(gen);
    }
    moea::Population pop;
    for (const auto& p : pts) pop.push_back({{}, p, 0, 0.0});
    const auto fronts = moea::non_dominated_sort(pop);
    const auto want = oracle::peel_fronts(pts);
    bool same = fronts.size() == want.size();
    for (std::size_t f = 0; same && f < fronts.size(); ++f) {
      same = std::set<std::size_t>(fronts[f].begin(), fronts[f].end()) == want[f];
    }
    mismatches += same ? 0 : 1;
  }
  return {mismatches == 0, std::to_string(200 - mismatches) + "/200 populations match"};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

cli::RunSettings desk(objectives::CaseId id, cli::ControllerMode mode) {
  cli::RunSettings s;
  s.case_id = id;
  s.mode = mode;
  s.nsga.pop_size = 40;
  s.nsga.max_generations = 80;
  return s;
}

// 5. Chaotic stream and run-to-run reproducibility through the manifest.
Outcome chaotic_determinism() {
  moea::ChaoticRngState rng;
  const double x1 = moea::logistic_next(rng);
  const double x2 = moea::logistic_next(rng);
  const bool stream_ok = std::abs(x1 - 0.6464508) < 1e-6 && std::abs(x2 - 0.9141910) < 1e-6;

  const auto root = fs::temp_directory_path() / "avrfo_acceptance_c5";
  fs::remove_all(root);
  std::ostringstream log;
  const auto s = desk(objectives::CaseId::II, cli::ControllerMode::Fopid);
  const int rc1 = cli::cmd_optimize(s, root / "a", log);
  const auto replay = cli::load_manifest(root / "a" / "manifest.json");
  const int rc2 = cli::cmd_optimize(replay.settings, root / "b", log);
  const auto fa = slurp(root / "a" / "front.csv");
  const auto fb = slurp(root / "b" / "front.csv");
  const bool runs_ok = rc1 == 0 && rc2 == 0 && !fa.empty() && fa == fb;
  fs::remove_all(root);
  return {stream_ok && runs_ok, "x1=" + fmt(x1, 8) + " x2=" + fmt(x2, 8) + "; fronts " +
                                    (runs_ok ? "byte-identical" : "differ") + " (" + std::to_string(fa.size()) +
                                    " bytes)"};
}

// 6. Published rows re-evaluated keep their trade-off ordering within each controller family.
Outcome table_ordering() {
  const fs::path tables = AVRFO_DATA_DIR "/tables";
  bool all = true;
  std::string detail;
  const auto check = [&](const std::string& file, objectives::CaseId id, const std::string& second) {
    cli::RunSettings s;
    s.case_id = id;
    const auto rows = cli::evaluate_rows(cli::read_genes_csv(tables / file), s);
    std::map<std::string, std::vector<const cli::EvaluationRow*>> families;
    for (const auto& r : rows) families[r.row.genes.is_pid() ? "pid" : "fopid"].push_back(&r);
    for (const auto& [family, members] : families) {
      bool j1_up = true, j_down = true;
      std::string values;
      for (std::size_t i = 0; i < members.size(); ++i) {
        values += " " + members[i]->row.label + "(" + fmt((*members[i]).objectives[0]) + "," +
                  fmt((*members[i]).objectives[1]) + ")";
        if (i == 0) continue;
        j1_up = j1_up && members[i]->objectives[0] > members[i - 1]->objectives[0];
        j_down = j_down && members[i]->objectives[1] < members[i - 1]->objectives[1];
      }
      all = all && j1_up && j_down;
      detail += "; " + file + " " + family + ": J1 " + (j1_up ? "up" : "NOT up") + ", " + second + " " +
                (j_down ? "down" : "NOT down") + values;
    }
  };
  check("table1.csv", objectives::CaseId::I, "J2");
  check("table2.csv", objectives::CaseId::II, "J3");
  return {all, detail.substr(2)};
}

bool weakly_covered(const std::vector<double>& p, const moea::Population& by) {
  for (const auto& q : by) {
    bool le = true;
    for (std::size_t i = 0; i < p.size(); ++i) le = le && q.objectives[i] <= p[i];
    if (le) return true;
  }
  return false;
}

double covered_fraction(const moea::Population& front, const moea::Population& by) {
  std::size_t n = 0;
  for (const auto& ind : front) n += weakly_covered(ind.objectives, by) ? 1 : 0;
  return front.empty() ? 0.0 : static_cast<double>(n) / static_cast<double>(front.size());
}

// 7. Case II: the fractional front covers the integer one.
Outcome case_two_dominance() {
  const auto pid = cli::run_optimize(desk(objectives::CaseId::II, cli::ControllerMode::Pid));
  const auto fopid = cli::run_optimize(desk(objectives::CaseId::II, cli::ControllerMode::Fopid));
  const double frac = covered_fraction(pid.front, fopid.front);
  return {frac >= 0.7, fmt(100 * frac) + "% of the PID front (" + std::to_string(pid.front.size()) +
                           ") weakly dominated by the FOPID front (" + std::to_string(fopid.front.size()) +
                           "); need >= 70%"};
}

// 8. Case I: the integer controller wins.
Outcome case_one_direction() {
  const auto pid = cli::run_optimize(desk(objectives::CaseId::I, cli::ControllerMode::Pid));
  const auto fopid = cli::run_optimize(desk(objectives::CaseId::I, cli::ControllerMode::Fopid));
  const double frac = covered_fraction(fopid.front, pid.front);

  std::vector<double> ref(2, -std::numeric_limits<double>::infinity());
  std::vector<std::vector<double>> p_pts, f_pts;
  for (const auto& ind : pid.front) p_pts.push_back(ind.objectives);
  for (const auto& ind : fopid.front) f_pts.push_back(ind.objectives);
  for (const auto* pts : {&p_pts, &f_pts}) {
    for (const auto& p : *pts) {
      for (std::size_t i = 0; i < 2; ++i) ref[i] = std::max(ref[i], p[i]);
    }
  }
  for (double& r : ref) r = r > 0.0 ? 1.1 * r : r + 0.1 * std::max(1.0, std::abs(r));
  const double hv_pid = moea::hypervolume(p_pts, ref);
  const double hv_fopid = moea::hypervolume(f_pts, ref);
  return {frac >= 0.5 || hv_pid > hv_fopid, fmt(100 * frac) + "% of the FOPID front weakly dominated by PID (need >= 50%)"
                                                "; hypervolume PID " + fmt(hv_pid, 6) + " vs FOPID " +
                                                fmt(hv_fopid, 6)};
}

// 9. Table 2 rows stay stable and settled over the generator grid.
Outcome robustness() {
  cli::RunSettings s;
  s.case_id = objectives::CaseId::II;
  const auto rows = cli::read_genes_csv(fs::path(AVRFO_DATA_DIR "/tables") / "table2.csv");
  const auto cells = cli::robustness_sweep(rows, {}, s);
  std::size_t stable = 0;
  double lo = 1e300, hi = 0.0, nominal = 0.0;
  for (const auto& c : cells) {
    stable += c.stable ? 1 : 0;
    if (c.label == "B3" && c.metrics && c.metrics->settling_time_2pct) {
      const double ts = *c.metrics->settling_time_2pct;
      lo = std::min(lo, ts);
      hi = std::max(hi, ts);
      if (c.kg == 1.0 && c.tau_g == 1.0) nominal = ts;
    }
  }
  const double spread = nominal > 0.0 ? (hi - lo) / nominal : std::nan("");
  return {stable == cells.size() && cells.size() == 96,
          std::to_string(stable) + "/" + std::to_string(cells.size()) +
              " cells stable; diagnostic: B3 settling spread " + fmt(hi - lo) + " s = " + fmt(spread) +
              " x nominal " + fmt(nominal) + " s"};
}

// 10. Optimizer plumbing on (x^2, (x-2)^2).
Outcome biquadratic_front() {
  moea::NsgaConfig cfg;
  cfg.pop_size = 40;
  cfg.max_generations = 100;
  cfg.bounds = {{-5.0}, {5.0}};
  const auto res = moea::nsga2_run(
      [](std::span<const double> x) {
        return std::vector<double>{x[0] * x[0], (x[0] - 2.0) * (x[0] - 2.0)};
      },
      cfg, moea::ChaoticRngState{});
  std::vector<double> xs;
  std::size_t outside = 0;
  for (const auto& ind : res.front) {
    const double x = ind.genes[0];
    if (x < 0.0 || x > 2.0) ++outside;
    // coverage is measured on the segment itself
    xs.push_back(std::clamp(x, 0.0, 2.0));
  }
  std::sort(xs.begin(), xs.end());
  if (xs.empty()) return {false, "empty front"};
  double gap = std::max(xs.front() - 0.0, 2.0 - xs.back());
  for (std::size_t i = 1; i < xs.size(); ++i) gap = std::max(gap, xs[i] - xs[i - 1]);
  return {gap < 0.3, std::to_string(xs.size()) + " points, " + std::to_string(outside) +
                         " just outside [0, 2]; max gap " + fmt(gap) + " (limit 0.3)"};
}

const std::map<int, std::pair<std::string, std::function<Outcome()>>>& registry() {
  static const std::map<int, std::pair<std::string, std::function<Outcome()>>> r{
      {1, {"oustaloup fidelity", oustaloup_fidelity}},
      {2, {"oustaloup vs grunwald-letnikov", oustaloup_vs_gl}},
      {3, {"analytic lti checks", analytic_lti}},
      {4, {"sorting oracle", sorting_oracle}},
      {5, {"chaotic determinism", chaotic_determinism}},
      {6, {"table ordering", table_ordering}},
      {7, {"case II dominance", case_two_dominance}},
      {8, {"case I direction", case_one_direction}},
      {9, {"robustness grid", robustness}},
      {10, {"bi-quadratic front", biquadratic_front}},
  };
  return r;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--criterion" && i + 1 < argc) {
      selected.push_back(std::atoi(argv[++i]));
    } else {
      std::cerr << "usage: " << argv[0] << " [--criterion N]...\n";
      return 2;
    }
  }
  if (selected.empty()) {
    for (const auto& [n, _] : registry()) selected.push_back(n);
  }
  int failures = 0;
  for (int n : selected) {
    const auto it = registry().find(n);
    if (it == registry().end()) {
      std::cerr << "unknown criterion " << n << "\n";
      return 2;
    }
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = it->second.second();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cout << "criterion " << n << " " << (out.pass ? "PASS" : "FAIL") << " [" << it->second.first << "] "
              << out.detail << " (" << fmt(secs, 3) << " s)" << std::endl;
    failures += out.pass ? 0 : 1;
  }
  return failures == 0 ? 0 : 1;
}
