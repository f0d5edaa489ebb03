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


#ifndef QCFA_MACHINE_HPP
#define QCFA_MACHINE_HPP

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "qcfa/qkernel.hpp"

namespace qcfa::machine {

enum class Kind { Classical, QuantumClassical };

inline constexpr char kLeftEnd = '<';
inline constexpr char kRightEnd = '>';

enum class Verdict { Accept, Reject, Cutoff };
const char *verdict_name(Verdict v);

struct Transition {
    int next = -1;
    int move = 0;  // -1, 0, +1
};

/// What happens in (state, symbol): a channel from the pool and, for each
/// of its branches in order, the classical transition.
struct Entry {
    int channel = -1;
    std::vector<Transition> outcomes;
    bool defined() const { return channel >= 0; }
};

/// A two-way constant-space machine over the tape <w>.  Tape cells are
/// indexed 0 (left endmarker) to n+1 (right endmarker).
class MachineSpec {
   public:
    Kind kind = Kind::QuantumClassical;
    std::vector<std::string> states;
    int q0 = 0;
    int q_acc = 1;
    int q_rej = 2;
    int register_dim = 1;
    std::string alphabet;  // input symbols, endmarkers excluded
    std::vector<qk::QuantumChannel> pool;
    std::vector<std::vector<Entry>> table;  // [state][symbol index]
    qk::Vector initial_register;
    nlohmann::json metadata = nlohmann::json::object();

    /// "<" + alphabet + ">"; symbol indices refer to this string.
    std::string symbols() const { return std::string(1, kLeftEnd) + alphabet + kRightEnd; }
    int num_symbols() const { return static_cast<int>(alphabet.size()) + 2; }
    int symbol_index(char c) const;  // throws InvalidInput for foreign symbols
    int state_index(const std::string &name) const;
    bool is_halting(int s) const { return s == q_acc || s == q_rej; }
    const Entry &entry(int state, int symbol) const { return table[state][symbol]; }

    /// Symbol indices of <input>.
    std::vector<int> encode_tape(std::string_view input) const;
    qk::Vector start_register() const;
};

/// Incremental construction by name.
class SpecBuilder {
   public:
    SpecBuilder(Kind kind, std::string alphabet, int register_dim);

    int state(const std::string &name);  // get-or-create
    int channel(const qk::QuantumChannel &ch);  // deduplicated by name
    void set_halting(const std::string &accept, const std::string &reject);
    void set_start(const std::string &name);
    /// Transitions are given per branch label.
    void set(int state, char symbol, int channel, const std::map<std::string, Transition> &by_label);
    void set(int state, char symbol, int channel, const std::vector<Transition> &by_branch);
    void set_initial_register(const qk::Vector &v);
    nlohmann::json &metadata() { return spec_.metadata; }
    int num_states() const { return static_cast<int>(spec_.states.size()); }

    MachineSpec finish();  // no validation; see validate_spec

   private:
    MachineSpec spec_;
    std::map<std::string, int> state_ids_;
    std::map<std::string, int> channel_ids_;
    std::string start_;
};

struct Violation {
    std::string code;  // e.g. "endmarker-guard", "totality", "completeness"
    std::string message;
};

struct ValidationReport {
    bool pass = true;
    std::vector<Violation> violations;
    std::size_t reachable_states = 0;
};

ValidationReport validate_spec(const MachineSpec &spec);
void require_valid(const MachineSpec &spec);  // throws Error(Totality) with the first violation

struct Configuration {
    int state = 0;
    int head = 0;
    qk::Vector reg;
};

struct Successor {
    double probability = 0.0;
    std::string label;
    std::optional<Verdict> verdict;  // set when the successor halts
    Configuration config;            // meaningful when !verdict
};

struct StepResult {
    std::optional<Verdict> halted;  // cfg was already in a halting state
    std::vector<Successor> successors;
};

StepResult step_distribution(const MachineSpec &spec, const Configuration &cfg, std::string_view input);

// Serialization ("qsspec-1").
nlohmann::json spec_to_json(const MachineSpec &spec);
MachineSpec spec_from_json(const nlohmann::json &j);
MachineSpec load_spec(const std::string &path);
void save_spec(const MachineSpec &spec, const std::string &path);
void write_file_atomic(const std::string &path, const std::string &content);

}  // namespace qcfa::machine

#endif
