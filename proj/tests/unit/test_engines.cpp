// Copyright 2026 The qcfa Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <map>
#include <set>
#include <tuple>

#include "qcfa/builders.hpp"
#include "qcfa/engines.hpp"
#include "qcfa/machine.hpp"

using namespace qcfa;
using namespace qcfa::engines;
using machine::Configuration;
using machine::Kind;
using machine::SpecBuilder;
using machine::Transition;

namespace {

machine::MachineSpec scanner() {
    SpecBuilder b(Kind::Classical, "ab", 1);
    int s = b.state("scan");
    b.set_halting("acc", "rej");
    b.set_start("scan");
    int id = b.channel(qk::identity_channel(1));
    int acc = b.state("acc");
    for (char c : std::string("<ab")) b.set(s, c, id, std::vector<Transition>{{s, 1}});
    b.set(s, '>', id, std::vector<Transition>{{acc, 0}});
    return b.finish();
}

// Dense absorbing-chain oracle for classical machines: enumerates
// (state, head) pairs and solves (I - Q) x = r directly.
struct ChainResult {
    double p_accept = 0.0;
    double steps = 0.0;
};

ChainResult classical_oracle(const machine::MachineSpec &spec, const std::string &input) {
    std::map<std::pair<int, int>, int> index;
    std::vector<std::pair<int, int>> nodes;
    auto id = [&](int s, int h) {
        auto [it, fresh] = index.try_emplace({s, h}, static_cast<int>(nodes.size()));
        if (fresh) nodes.emplace_back(s, h);
        return it->second;
    };
    id(spec.q0, 0);
    std::vector<std::vector<std::tuple<int, double>>> edges;
    std::vector<double> to_accept;
    for (std::size_t k = 0; k < nodes.size(); ++k) {
        auto [s, h] = nodes[k];
        Configuration c{s, h, qk::Vector::Ones(1)};
        auto step = machine::step_distribution(spec, c, input);
        edges.emplace_back();
        to_accept.push_back(0.0);
        for (const auto &succ : step.successors) {
            if (succ.verdict == machine::Verdict::Accept) to_accept.back() += succ.probability;
            if (succ.verdict) continue;
            int j = id(succ.config.state, succ.config.head);
            edges[k].emplace_back(j, succ.probability);
        }
    }
    const int n = static_cast<int>(nodes.size());
    Eigen::MatrixXd a = Eigen::MatrixXd::Identity(n, n);
    Eigen::VectorXd acc(n), ones = Eigen::VectorXd::Ones(n);
    for (int k = 0; k < n; ++k) {
        acc(k) = to_accept[static_cast<std::size_t>(k)];
        for (auto [j, p] : edges[static_cast<std::size_t>(k)]) a(k, j) -= p;
    }
    auto lu = a.fullPivLu();
    return {lu.solve(acc)(0), lu.solve(ones)(0)};
}

}  // namespace

TEST(Trajectory, ScannerAcceptsAfterNPlusTwoSteps) {
    auto spec = scanner();
    RunReport r = run_trajectory(spec, "ab", 1, 100);
    EXPECT_EQ(r.verdict, Verdict::Accept);
    EXPECT_EQ(r.steps, 4u);
    EXPECT_EQ(run_trajectory(spec, "", 1, 100).steps, 2u);
}

TEST(Trajectory, CutoffWhenBudgetIsExhausted) {
    RunReport r = run_trajectory(scanner(), "abab", 1, 3);
    EXPECT_EQ(r.verdict, Verdict::Cutoff);
    EXPECT_EQ(r.steps, 3u);
}

TEST(Trajectory, SeededRunsRepeat) {
    auto spec = builders::build_eq_core(builders::Rational::parse("1/3")).spec;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        RunReport a = run_trajectory(spec, "aabb", seed, 1'000'000, true);
        RunReport b = run_trajectory(spec, "aabb", seed, 1'000'000, true);
        EXPECT_EQ(a.verdict, b.verdict);
        EXPECT_EQ(a.steps, b.steps);
        EXPECT_EQ(a.digest, b.digest);
        EXPECT_NE(a.digest, 0u);
    }
}

TEST(Trajectory, ForeignSymbolIsInvalidInput) {
    try {
        run_trajectory(scanner(), "abc", 1, 10);
        FAIL();
    } catch (const Error &e) {
        EXPECT_EQ(e.kind(), ErrorKind::InvalidInput);
    }
}

TEST(Wilson, MatchesClosedForm) {
    EXPECT_NEAR(normal_quantile(0.95), 1.959963984540054, 1e-9);
    EXPECT_NEAR(normal_quantile(0.99), 2.5758293035489004, 1e-9);
    for (auto [s, n] : {std::pair<std::uint64_t, std::uint64_t>{0, 10}, {3, 10}, {10, 10}, {517, 1000}}) {
        double z = 1.959963984540054, p = double(s) / double(n), nn = double(n);
        double centre = (p + z * z / (2 * nn)) / (1 + z * z / nn);
        double half = z / (1 + z * z / nn) * std::sqrt(p * (1 - p) / nn + z * z / (4 * nn * nn));
        Interval w = wilson_interval(s, n, 0.95);
        EXPECT_NEAR(w.lo, std::max(0.0, centre - half), 1e-12);
        EXPECT_NEAR(w.hi, std::min(1.0, centre + half), 1e-12);
    }
}

TEST(Estimate, RandomWalkGateBracketsRuinProbability) {
    auto gate = builders::build_rw_gate(0).spec;
    EstimateOptions o;
    o.trials = 20000;
    o.seed = 11;
    o.confidence = 0.99;
    EstimateReport r = estimate(gate, "aa", o);
    EXPECT_EQ(r.trials, 20000u);
    EXPECT_EQ(r.accepts + r.rejects + r.cutoffs, r.trials);
    EXPECT_LE(r.wilson.lo, 1.0 / 3.0);
    EXPECT_GE(r.wilson.hi, 1.0 / 3.0);
}

TEST(Estimate, IndependentOfThreadCount) {
    auto gate = builders::build_rw_gate(1).spec;
    EstimateOptions o;
    o.trials = 500;
    o.seed = 3;
    o.threads = 1;
    EstimateReport one = estimate(gate, "abab", o);
    o.threads = 3;
    EstimateReport three = estimate(gate, "abab", o);
    EXPECT_EQ(one.accepts, three.accepts);
    EXPECT_EQ(one.mean_steps, three.mean_steps);
    EXPECT_EQ(one.median_steps, three.median_steps);
}

TEST(Estimate, EqCoreNeverRejectsEqualCounts) {
    auto eq = builders::build_eq_core(builders::Rational::parse("1/5")).spec;
    EstimateOptions o;
    o.trials = 300;
    o.seed = 9;
    o.max_steps = 10'000'000;
    EstimateReport r = estimate(eq, "aabb", o);
    EXPECT_EQ(r.rejects, 0u);
    EXPECT_EQ(r.cutoffs, 0u);
}

TEST(Exact, ClassicalMachinesAgreeWithDenseOracle) {
    for (int k = 0; k <= 3; ++k) {
        auto gate = builders::build_rw_gate(k).spec;
        for (std::string w : {"", "a", "ab", "abba", "aaaaaaa"}) {
            ChainResult o = classical_oracle(gate, w);
            AbsorptionSolution s = solve_exact(gate, w);
            double n = static_cast<double>(w.size());
            EXPECT_NEAR(s.p_accept, std::ldexp(1.0, -k) / (n + 1.0), 1e-12) << k << " " << w;
            EXPECT_NEAR(s.p_accept, o.p_accept, 1e-12);
            EXPECT_NEAR(s.expected_steps, o.steps, 1e-9 * o.steps);
            EXPECT_NEAR(s.p_accept + s.p_reject, 1.0, 1e-12);
        }
    }
}

TEST(Exact, EqCoreOneSided) {
    auto eq = builders::build_eq_core(builders::Rational::parse("1/5")).spec;
    for (std::string w : {"", "ab", "ba", "aabb", "abab", "bbbaaa"}) {
        AbsorptionSolution s = solve_exact(eq, w);
        EXPECT_NEAR(s.p_accept, 1.0, 1e-12) << w;
        EXPECT_LT(s.p_reject, 1e-12);
    }
    for (std::string w : {"a", "aab", "abb", "aaaab"}) {
        AbsorptionSolution s = solve_exact(eq, w);
        EXPECT_LE(s.p_accept, 0.2) << w;
        EXPECT_NEAR(s.p_accept + s.p_reject, 1.0, 1e-9);
    }
}

TEST(Exact, PalCorePalindromeHasNoRejectMass) {
    auto pal = builders::build_pal_core(builders::Rational::parse("1/3"), 1).spec;
    AbsorptionSolution s = solve_exact(pal, "aa");
    EXPECT_EQ(s.p_reject, 0.0);
    EXPECT_NEAR(s.p_accept, 1.0, 1e-12);
    AbsorptionSolution t = solve_exact(pal, "ab");
    EXPECT_GT(t.p_reject, 0.0);
    EXPECT_NEAR(t.p_accept + t.p_reject, 1.0, 1e-12);
}

TEST(Exact, RoutesAgree) {
    auto eq = builders::build_eq_core(builders::Rational::parse("1/3")).spec;
    ExactOptions orbit;
    orbit.method = ExactMethod::Orbit;
    ExactOptions density;
    density.method = ExactMethod::Density;
    ExactOptions horizon;
    horizon.method = ExactMethod::Horizon;
    horizon.horizon = 20'000;
    for (std::string w : {"ab", "aab", "abba"}) {
        AbsorptionSolution a = solve_exact(eq, w, orbit);
        AbsorptionSolution b = solve_exact(eq, w, density);
        AbsorptionSolution c = solve_exact(eq, w, horizon);
        EXPECT_EQ(a.method, "orbit");
        EXPECT_EQ(b.method, "density");
        EXPECT_EQ(c.method, "horizon");
        EXPECT_NEAR(a.p_accept, b.p_accept, 1e-9) << w;
        EXPECT_NEAR(a.expected_steps, b.expected_steps, 1e-6 * a.expected_steps);
        EXPECT_LE(c.p_accept, a.p_accept + 1e-9);
        EXPECT_GE(c.p_accept + c.remaining_mass, a.p_accept - 1e-9);
        EXPECT_NEAR(c.p_accept + c.p_reject + c.remaining_mass, 1.0, 1e-9);
    }
}

TEST(Exact, NodeCapRaisesResource) {
    auto eq = builders::build_eq_core(builders::Rational::parse("1/3")).spec;
    ExactOptions o;
    o.method = ExactMethod::Orbit;
    o.max_nodes = 3;
    try {
        solve_exact(eq, "aabb", o);
        FAIL();
    } catch (const Error &e) {
        EXPECT_EQ(e.kind(), ErrorKind::Resource);
    }
}

TEST(Exact, RewardsCountVisits) {
    auto gate = builders::build_rw_gate(0).spec;
    ExactOptions o;
    o.rewards.assign(1, std::vector<double>(gate.states.size(), 1.0));
    AbsorptionSolution s = solve_exact(gate, "abab", o);
    ASSERT_EQ(s.rewards.size(), 1u);
    EXPECT_NEAR(s.rewards[0], s.expected_steps, 1e-9 * s.expected_steps);
}

TEST(Streams, TrialSeedsDiffer) {
    std::set<std::uint64_t> seen;
    for (std::uint64_t t = 0; t < 1000; ++t) seen.insert(trial_seed(42, t));
    EXPECT_EQ(seen.size(), 1000u);
    std::uint64_t a = 7, b = 7;
    EXPECT_EQ(splitmix64(a), splitmix64(b));
}

TEST(Json, ReportsCarryAcceptAlias) {
    auto gate = builders::build_rw_gate(0).spec;
    nlohmann::json j = to_json(solve_exact(gate, "aa"), "exit");
    EXPECT_TRUE(j.contains("p_exit"));
}
