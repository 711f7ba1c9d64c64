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
#include <cmath>
#include <functional>

#include <gtest/gtest.h>

#include "avrfo/objectives.hpp"

namespace {

using namespace avrfo;
using folib::ControllerGenes;
using objectives::CaseId;

lti::SimTrace synthetic(double horizon, double dt, const std::function<double(double)>& e,
                        const std::function<double(double)>& u = [](double) { return 0.0; }) {
  lti::SimTrace tr;
  tr.dt = dt;
  tr.t = lti::time_grid(horizon, dt);
  for (double t : tr.t) {
    tr.r.push_back(1.0);
    tr.e.push_back(e(t));
    tr.y.push_back(1.0 - e(t));
    tr.u.push_back(u(t));
  }
  return tr;
}

const ControllerGenes kB2 = ControllerGenes::pid(1.09475, 0.38383, 0.23125);
const ControllerGenes kC2 = ControllerGenes::pid(0.21406, 0.13621, 0.00829);
const ControllerGenes kA3{1.00338, 1.32100, 0.61858, 0.88479, 0.99999};
const ControllerGenes kB3{1.08069, 2.09803, 0.69040, 0.85782, 0.99999};
const ControllerGenes kB4 = ControllerGenes::pid(6.52483, 0.78404, 1.14001);

objectives::ObjectiveVector eval(const ControllerGenes& g, CaseId id, double dt = 1e-3) {
  return objectives::evaluate(g, id, {}, objectives::ProtocolPair::defaults(id, dt), {});
}

TEST(Itse, ZeroError) { EXPECT_EQ(objectives::itse(synthetic(10, 1e-3, [](double) { return 0.0; })), 0.0); }

TEST(Itse, UnitErrorGivesHalfSquaredHorizon) {
  const double T = 10.0;
  const double dt = 1e-3;
  const double j = objectives::itse(synthetic(T, dt, [](double) { return 1.0; }));
  EXPECT_NEAR(j, T * T / 2.0, T * dt);
}

TEST(Itse, DecayingExponential) {
  const double j = objectives::itse(synthetic(10, 1e-3, [](double t) { return std::exp(-t); }));
  EXPECT_NEAR(j, 0.25, 1e-3);
}

TEST(Itse, QuadraticScaling) {
  const auto e = [](double t) { return std::exp(-t) * std::cos(3 * t); };
  const double j = objectives::itse(synthetic(10, 1e-3, e));
  const double j3 = objectives::itse(synthetic(10, 1e-3, [&](double t) { return 3.0 * e(t); }));
  EXPECT_NEAR(j3, 9.0 * j, 1e-12 * j3);
  EXPECT_GE(j, 0.0);
}

TEST(Isdco, ConstantControlIsFree) {
  const auto tr = synthetic(10, 1e-3, [](double) { return 0.0; }, [](double) { return 3.7; });
  EXPECT_NEAR(objectives::isdco(tr), 0.0, 1e-20);
  EXPECT_NEAR(objectives::isdco(tr, objectives::J2Mode::Increment), 0.0, 1e-20);
}

TEST(Isdco, DecayingDeviation) {
  const auto tr = synthetic(10, 1e-3, [](double) { return 0.0; }, [](double t) { return 2.0 + std::exp(-t); });
  EXPECT_NEAR(objectives::isdco(tr), 0.5, 2e-3);
}

TEST(Isdco, IncrementReading) {
  // u_k - u_{k-1} = 0.01 on every step of a ramp
  const auto tr = synthetic(1, 1e-2, [](double) { return 0.0; }, [](double t) { return t; });
  EXPECT_NEAR(objectives::isdco(tr, objectives::J2Mode::Increment), 100 * 1e-4 * 1e-2, 1e-15);
}

TEST(Isdco, QuadraticScaling) {
  const auto u = [](double t) { return 1.0 + std::exp(-2 * t) * std::sin(t); };
  const double j = objectives::isdco(synthetic(10, 1e-3, [](double) { return 0.0; }, u));
  const double j2 = objectives::isdco(synthetic(10, 1e-3, [](double) { return 0.0; }, [&](double t) { return 2 * u(t); }));
  EXPECT_NEAR(j2, 4 * j, 1e-12 * j2);
}

TEST(ItseLoad, Examples) {
  EXPECT_EQ(objectives::itse_load(synthetic(20, 1e-3, [](double) { return 0.0; })), 0.0);
  EXPECT_NEAR(objectives::itse_load(synthetic(20, 1e-3, [](double t) { return std::exp(-t); })), 0.25, 1e-3);
}

TEST(Evaluate, ZeroControllerCaseOne) {
  const auto v = eval({0, 0, 0, 1, 1}, CaseId::I);
  ASSERT_EQ(v.size(), 2u);
  EXPECT_NEAR(v[0], 50.0, 10.0 * 1e-3);
  EXPECT_EQ(v[1], 0.0);
}

TEST(Evaluate, CaseArityAndOrder) {
  const auto v2 = eval(kA3, CaseId::II);
  ASSERT_EQ(v2.size(), 2u);
  EXPECT_GT(v2[0], 0.0);
  EXPECT_GT(v2[1], 0.0);
  EXPECT_TRUE(std::isfinite(v2[0]) && std::isfinite(v2[1]));
  const auto v3 = eval(kA3, CaseId::III);
  ASSERT_EQ(v3.size(), 3u);
  EXPECT_EQ(v3[0], v2[0]);
  EXPECT_EQ(v3[1], v2[1]);
  const auto v1 = objectives::evaluate(kA3, CaseId::I, {}, objectives::ProtocolPair::defaults(CaseId::III), {});
  EXPECT_EQ(v3[2], v1[1]);
  EXPECT_EQ(objectives::objective_names(CaseId::III), (std::vector<std::string>{"J1", "J3", "J2"}));
}

TEST(Evaluate, DefaultHorizons) {
  EXPECT_EQ(objectives::ProtocolPair::defaults(CaseId::I).tracking.horizon, 10.0);
  EXPECT_EQ(objectives::ProtocolPair::defaults(CaseId::II).tracking.horizon, 20.0);
  EXPECT_EQ(objectives::ProtocolPair::defaults(CaseId::III).disturbance.horizon, 20.0);
}

TEST(Evaluate, DivergenceMapsToPenalty) {
  // a large proportional gain destabilizes the nominal loop
  const auto v = eval(ControllerGenes::pid(100, 0, 0), CaseId::I);
  EXPECT_TRUE(v.penalized());
  for (double x : v.values) EXPECT_EQ(x, objectives::kPenalty);
}

TEST(Evaluate, MissingIntegralActionPenalizedOnlyWhenDisturbanceNeeded) {
  const ControllerGenes pd = ControllerGenes::pid(0.5, 0.0, 0.1);
  EXPECT_FALSE(eval(pd, CaseId::I).penalized());
  EXPECT_TRUE(eval(pd, CaseId::II).penalized());
  EXPECT_TRUE(eval(pd, CaseId::III).penalized());
}

TEST(Evaluate, FractionalMedianHasSmallerLoadIndexThanPidMedian) {
  EXPECT_LT(eval(kB3, CaseId::II)[1], eval(kB4, CaseId::II)[1]);
}

TEST(Evaluate, ProportionalGainRaisesControlEffort) {
  double previous = -1.0;
  for (double kp : {0.5, 1.0, 2.0}) {
    const auto v = eval(ControllerGenes::pid(kp, kB2.Ki, kB2.Kd), CaseId::I);
    ASSERT_FALSE(v.penalized());
    EXPECT_GT(v[1], previous);
    previous = v[1];
  }
}

// past Kp ~ 0.3 the loop rings and J1 rises again
TEST(Evaluate, ProportionalSweepTradesTrackingForEffort) {
  double j1_prev = 1e300, j2_prev = -1.0;
  for (double kp : {0.1, 0.2, 0.3}) {
    const auto v = eval(ControllerGenes::pid(kp, kC2.Ki, kC2.Kd), CaseId::I);
    EXPECT_LE(v[0], j1_prev) << kp;
    EXPECT_GE(v[1], j2_prev) << kp;
    j1_prev = v[0];
    j2_prev = v[1];
  }
}

TEST(Evaluate, RiemannSumsConvergeInStep) {
  const auto coarse = eval(kB2, CaseId::III, 1e-3);
  const auto fine = eval(kB2, CaseId::III, 5e-4);
  for (std::size_t i = 0; i < coarse.size(); ++i) {
    EXPECT_LT(std::abs(coarse[i] - fine[i]) / fine[i], 0.005) << i;
  }
}

TEST(Evaluate, Deterministic) {
  EXPECT_EQ(eval(kB3, CaseId::III).values, eval(kB3, CaseId::III).values);
}

TEST(Parsing, CaseAndModeNames) {
  EXPECT_EQ(objectives::parse_case("II"), CaseId::II);
  EXPECT_EQ(objectives::parse_case("3"), CaseId::III);
  EXPECT_THROW(objectives::parse_case("IV"), std::invalid_argument);
  EXPECT_EQ(objectives::parse_j2_mode("increment"), objectives::J2Mode::Increment);
  EXPECT_THROW(objectives::parse_j2_mode("abs"), std::invalid_argument);
}

}  // namespace
