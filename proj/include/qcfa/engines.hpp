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


#ifndef QCFA_ENGINES_HPP
#define QCFA_ENGINES_HPP

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "qcfa/machine.hpp"

namespace qcfa::engines {

using machine::MachineSpec;
using machine::Verdict;

// ---------------------------------------------------------------------------
// Random streams

std::uint64_t splitmix64(std::uint64_t &state);
/// Seed of trial t under master seed `seed`.
std::uint64_t trial_seed(std::uint64_t seed, std::uint64_t t);

// ---------------------------------------------------------------------------
// Monte Carlo

struct RunReport {
    Verdict verdict = Verdict::Cutoff;
    std::uint64_t steps = 0;
    std::uint64_t seed = 0;
    std::uint64_t digest = 0;  // FNV-1a over visited (state, head); 0 unless requested
};

RunReport run_trajectory(const MachineSpec &spec, std::string_view input, std::uint64_t seed,
                         std::uint64_t max_steps, bool with_digest = false);

struct Interval {
    double lo = 0.0;
    double hi = 1.0;
};

/// Two-sided normal quantile for the given confidence (0.95, 0.99, ...).
double normal_quantile(double confidence);
Interval wilson_interval(std::uint64_t successes, std::uint64_t trials, double confidence = 0.95);

struct EstimateOptions {
    std::uint64_t trials = 1000;
    std::uint64_t seed = 0;
    std::uint64_t max_steps = 1'000'000;
    int threads = 0;  // 0: hardware concurrency
    double confidence = 0.95;
};

struct EstimateReport {
    std::uint64_t trials = 0;
    std::uint64_t accepts = 0;
    std::uint64_t rejects = 0;
    std::uint64_t cutoffs = 0;
    double p_hat = 0.0;
    Interval wilson;
    double confidence = 0.95;
    double mean_steps = 0.0;
    double median_steps = 0.0;
    std::uint64_t seed = 0;
    std::uint64_t max_steps = 0;
};

EstimateReport estimate(const MachineSpec &spec, std::string_view input, const EstimateOptions &options);

// ---------------------------------------------------------------------------
// Exact absorption

enum class ExactMethod { Auto, Orbit, Density, Horizon };
const char *method_name(ExactMethod m);
ExactMethod parse_method(std::string_view name);

struct ExactOptions {
    ExactMethod method = ExactMethod::Auto;
    std::size_t max_nodes = 2'000'000;     // orbit nodes or density configurations
    std::size_t max_unknowns = 200'000;    // density route
    double prob_floor = 1e-24;             // branches at or below this are dropped (rounding noise)
    double quantum = 1e-9;                 // register quantization grid
    std::uint64_t horizon = 200'000;       // steps for the truncation route
    /// rewards[r][state]: reward per step taken from `state`.
    std::vector<std::vector<double>> rewards;
};

struct AbsorptionSolution {
    double p_accept = 0.0;
    double p_reject = 0.0;
    double p_trap = 0.0;          // mass in non-halting closed classes
    double remaining_mass = 0.0;  // horizon route only
    double expected_steps = 0.0;
    bool infinite_steps = false;
    double residual = 0.0;
    std::string method;
    std::size_t nodes = 0;
    std::vector<double> rewards;  // expected total reward per reward vector
};

AbsorptionSolution solve_exact(const MachineSpec &spec, std::string_view input, const ExactOptions &options = {});

// ---------------------------------------------------------------------------
// JSON views (no provenance; front ends add it)

nlohmann::json to_json(const EstimateReport &r, const std::string &accept_alias = "");
nlohmann::json to_json(const AbsorptionSolution &s, const std::string &accept_alias = "");
nlohmann::json to_json(const RunReport &r);

}  // namespace qcfa::engines

#endif
