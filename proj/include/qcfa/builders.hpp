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


#ifndef QCFA_BUILDERS_HPP
#define QCFA_BUILDERS_HPP

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "qcfa/engines.hpp"
#include "qcfa/machine.hpp"

namespace qcfa::builders {

using machine::MachineSpec;

/// Exact rational, kept as typed for provenance ("1/5").
struct Rational {
    std::int64_t num = 1;
    std::int64_t den = 5;

    static Rational parse(std::string_view text);
    double value() const { return static_cast<double>(num) / static_cast<double>(den); }
    std::string str() const;
};

/// Coins in the EQ acceptance gate: 1 + ceil(log2(1/eps)).
int eq_coins(const Rational &eps);
/// Coin sweeps in the PAL acceptance gate: 6 + ceil(log2(1/eps)).
int pal_sweeps(const Rational &eps);
/// Default k_eps for the templates: 6 + ceil(log2(1/eps)).
int default_k_eps(const Rational &eps);

/// A machine with named exits.  `exits` maps hook names ("accept",
/// "reject", "continue", "exit") to halting state names of `spec`.
struct Fragment {
    MachineSpec spec;
    std::string entry;
    std::map<std::string, std::string> exits;
};

// ---------------------------------------------------------------------------
// Cores (virtual alphabet {a, b})

Fragment build_eq_core(const Rational &eps);
Fragment build_pal_core(const Rational &eps, int sweeps_override = 0);

/// Counter matrix M_sigma on (u, x, y, z); d(a) = 1, d(b) = 2.
Eigen::MatrixXd pal_counter_matrix(char sigma);
/// Base-4 digit encoding with d(a) = 1, d(b) = 2, first symbol least significant.
std::uint64_t pal_encoding(std::string_view w);

/// Unbiased walk from the first input cell; on the right endmarker k coins.
/// Accepting state is the "exit" hook, rejecting is "continue".
Fragment build_rw_gate(int k_eps, const std::string &alphabet = "ab");

// ---------------------------------------------------------------------------
// Length comparison adapters on a real tape.
//
// Tokens are single symbols, except that with bit_width > 0 every maximal
// run of bits is one token whose text is the run itself.  The left interval
// runs from the left endmarker to the first occurrence of `mid`; the right
// interval from there to the right endmarker.

struct TokenSets {
    std::string alphabet = "ab";
    int bit_width = 0;
    std::vector<std::string> left;
    std::vector<std::string> right;
    std::string mid;
    bool right_includes_mid = false;
};

/// Rejects iff the EQ core rejects the virtual tape a^|L| b^|R|; otherwise
/// halts in the "continue" hook.  Inputs without `mid` are rejected.
Fragment build_same_length(const TokenSets &sets, const Rational &eps);

/// Rejects deterministically if |L| is odd; otherwise compares the
/// even-indexed half of L with R.
Fragment build_twice_as_long(const TokenSets &sets, const Rational &eps);

/// PAL core on the a/b symbols preceding the first occurrence of `delimiter`.
Fragment build_pal_check(const std::string &delimiter, const std::string &alphabet, int bit_width,
                         const Rational &eps);

// ---------------------------------------------------------------------------
// Template compilers

MachineSpec compile_rpal(int level, const Rational &eps, int k_eps);
MachineSpec compile_pppal(int level, const Rational &eps, int k_eps);

/// Reward vector that is 1 on the round-marker states of a compiled
/// template; its expectation is the mean number of main-loop rounds.
std::vector<double> round_rewards(const MachineSpec &spec);

// ---------------------------------------------------------------------------
// Host-level interpreter

enum class Template { Rpal, Pppal };
const char *template_name(Template t);
Template parse_template(std::string_view name);

enum class KernelMode {
    Simulate,  // run the core machines trajectory by trajectory
    Exact,     // draw call outcomes from exact core solves
};

struct InterpretOptions {
    Template tmpl = Template::Rpal;
    int level = 1;
    Rational eps;
    int k_eps = -1;  // negative: default_k_eps(eps)
    KernelMode mode = KernelMode::Exact;
    std::uint64_t max_steps = 100'000'000;
};

/// One length comparison issued by a main-loop round.
struct CallRecord {
    std::string stage;  // "C1", "C2", "TW", "C3"
    int left = 0;
    int right = 0;
};

/// The deterministic part of a template run on one input.
struct Plan {
    bool format_ok = false;         // stage (R)
    bool parity_reject = false;     // odd-count failure in a doubling check
    std::vector<CallRecord> calls;  // in execution order within one round
    std::string pal_word;           // virtual tape of the final stage
    std::size_t n = 0;
};

Plan plan_run(const InterpretOptions &options, std::string_view input);

/// One run.  Steps are core steps plus walk steps in Simulate mode and main
/// loop rounds in Exact mode.
engines::RunReport interpret(const InterpretOptions &options, std::string_view input, std::uint64_t seed);

engines::EstimateReport interpret_estimate(const InterpretOptions &options, std::string_view input,
                                           std::uint64_t trials, std::uint64_t seed);

/// Closed-form acceptance probability from exact core solves.
double interpret_exact(const InterpretOptions &options, std::string_view input);

/// Exact acceptance probability of the EQ core on a^x b^y (memoized).
double eq_accept(const Rational &eps, int x, int y);
/// Exact acceptance probability of the PAL core on w (memoized).
double pal_accept(const Rational &eps, const std::string &w);

}  // namespace qcfa::builders

#endif
