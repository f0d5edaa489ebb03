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


#include "qcfa/machine.hpp"

#include <cmath>
#include <deque>
#include <set>

namespace qcfa::machine {

const char *verdict_name(Verdict v) {
    switch (v) {
        case Verdict::Accept: return "accept";
        case Verdict::Reject: return "reject";
        case Verdict::Cutoff: return "cutoff";
    }
    return "?";
}

int MachineSpec::symbol_index(char c) const {
    if (c == kLeftEnd) return 0;
    if (c == kRightEnd) return num_symbols() - 1;
    auto pos = alphabet.find(c);
    if (pos == std::string::npos) {
        throw Error(ErrorKind::InvalidInput, std::string("symbol '") + c + "' is not in the machine alphabet");
    }
    return static_cast<int>(pos) + 1;
}

int MachineSpec::state_index(const std::string &name) const {
    for (std::size_t k = 0; k < states.size(); ++k) {
        if (states[k] == name) return static_cast<int>(k);
    }
    throw Error(ErrorKind::InvalidArgument, "unknown state '" + name + "'");
}

std::vector<int> MachineSpec::encode_tape(std::string_view input) const {
    std::vector<int> tape;
    tape.reserve(input.size() + 2);
    tape.push_back(0);
    for (char c : input) {
        if (c == kLeftEnd || c == kRightEnd) throw Error(ErrorKind::InvalidInput, "endmarker inside the input");
        tape.push_back(symbol_index(c));
    }
    tape.push_back(num_symbols() - 1);
    return tape;
}

qk::Vector MachineSpec::start_register() const {
    if (initial_register.size() == register_dim) return initial_register;
    qk::Vector v = qk::Vector::Zero(register_dim);
    v(0) = 1.0;
    return v;
}

SpecBuilder::SpecBuilder(Kind kind, std::string alphabet, int register_dim) {
    spec_.kind = kind;
    spec_.alphabet = std::move(alphabet);
    spec_.register_dim = register_dim;
    for (char c : spec_.alphabet) {
        if (c == kLeftEnd || c == kRightEnd) throw Error(ErrorKind::InvalidArgument, "endmarker in alphabet");
    }
}

int SpecBuilder::state(const std::string &name) {
    auto it = state_ids_.find(name);
    if (it != state_ids_.end()) return it->second;
    int id = static_cast<int>(spec_.states.size());
    spec_.states.push_back(name);
    spec_.table.emplace_back(static_cast<std::size_t>(spec_.num_symbols()));
    state_ids_.emplace(name, id);
    return id;
}

int SpecBuilder::channel(const qk::QuantumChannel &ch) {
    auto it = channel_ids_.find(ch.name());
    if (it != channel_ids_.end()) return it->second;
    if (ch.dim() != spec_.register_dim) {
        throw Error(ErrorKind::DimensionMismatch, "channel '" + ch.name() + "' has dimension " +
                                                      std::to_string(ch.dim()) + ", register has " +
                                                      std::to_string(spec_.register_dim));
    }
    int id = static_cast<int>(spec_.pool.size());
    spec_.pool.push_back(ch);
    channel_ids_.emplace(ch.name(), id);
    return id;
}

void SpecBuilder::set_halting(const std::string &accept, const std::string &reject) {
    spec_.q_acc = state(accept);
    spec_.q_rej = state(reject);
}

void SpecBuilder::set_start(const std::string &name) {
    start_ = name;
    spec_.q0 = state(name);
}

void SpecBuilder::set(int st, char symbol, int ch, const std::map<std::string, Transition> &by_label) {
    const auto &branches = spec_.pool.at(static_cast<std::size_t>(ch)).branches();
    std::vector<Transition> v;
    for (const auto &b : branches) {
        auto it = by_label.find(b.label);
        if (it == by_label.end()) {
            throw Error(ErrorKind::Totality, "no transition for label '" + b.label + "' in state '" +
                                                 spec_.states[static_cast<std::size_t>(st)] + "'");
        }
        v.push_back(it->second);
    }
    set(st, symbol, ch, v);
}

void SpecBuilder::set(int st, char symbol, int ch, const std::vector<Transition> &by_branch) {
    Entry &e = spec_.table.at(static_cast<std::size_t>(st)).at(static_cast<std::size_t>(spec_.symbol_index(symbol)));
    e.channel = ch;
    e.outcomes = by_branch;
}

void SpecBuilder::set_initial_register(const qk::Vector &v) { spec_.initial_register = v; }

MachineSpec SpecBuilder::finish() {
    if (spec_.initial_register.size() != spec_.register_dim) spec_.initial_register = spec_.start_register();
    return spec_;
}

namespace {

bool is_coin_like(const qk::QuantumChannel &ch) {
    if (!ch.is_scalar() || ch.size() != 2) return false;
    for (const auto &b : ch.branches()) {
        if (std::abs(std::norm(b.op(0, 0)) - 0.5) > 1e-12) return false;
    }
    return true;
}

}  // namespace

ValidationReport validate_spec(const MachineSpec &spec) {
    ValidationReport rep;
    auto fail = [&](const std::string &code, const std::string &msg) {
        rep.pass = false;
        rep.violations.push_back({code, msg});
    };
    int ns = static_cast<int>(spec.states.size());
    int nsym = spec.num_symbols();
    std::string syms = spec.symbols();
    auto in_range = [&](int s) { return s >= 0 && s < ns; };
    if (!in_range(spec.q0) || !in_range(spec.q_acc) || !in_range(spec.q_rej)) {
        fail("states", "q0/q_acc/q_rej out of range");
        return rep;
    }
    if (spec.q_acc == spec.q_rej) fail("halting", "q_acc equals q_rej");
    if (spec.register_dim < 1) fail("register", "register dimension must be positive");
    if (spec.initial_register.size() != spec.register_dim || spec.initial_register.norm() == 0.0) {
        fail("register", "initial register has the wrong size or is zero");
    }
    if (static_cast<int>(spec.table.size()) != ns) {
        fail("table", "table row count differs from state count");
        return rep;
    }
    for (std::size_t c = 0; c < spec.pool.size(); ++c) {
        const auto &ch = spec.pool[c];
        if (ch.dim() != spec.register_dim) {
            fail("dimension", "channel '" + ch.name() + "' has dimension " + std::to_string(ch.dim()));
            continue;
        }
        auto cr = qk::check_channel(ch);
        if (!cr.pass) fail("completeness", "channel '" + ch.name() + "' residual " + std::to_string(cr.residual));
        if (spec.kind == Kind::Classical && !ch.is_identity() && !is_coin_like(ch)) {
            fail("classical", "channel '" + ch.name() + "' is neither trivial nor a fair coin");
        }
    }
    if (spec.kind == Kind::Classical && spec.register_dim != 1) fail("classical", "classical machine with register_dim > 1");

    // Reachable states, assuming any symbol may be scanned.
    std::vector<char> seen(static_cast<std::size_t>(ns), 0);
    std::deque<int> queue{spec.q0};
    seen[static_cast<std::size_t>(spec.q0)] = 1;
    while (!queue.empty()) {
        int s = queue.front();
        queue.pop_front();
        if (spec.is_halting(s)) continue;
        for (int y = 0; y < nsym; ++y) {
            const Entry &e = spec.table[static_cast<std::size_t>(s)][static_cast<std::size_t>(y)];
            std::string where = "state '" + spec.states[static_cast<std::size_t>(s)] + "' on '" + syms[static_cast<std::size_t>(y)] + "'";
            if (!e.defined()) {
                fail("totality", "no channel for " + where);
                continue;
            }
            if (e.channel >= static_cast<int>(spec.pool.size())) {
                fail("table", "channel index out of range for " + where);
                continue;
            }
            const auto &ch = spec.pool[static_cast<std::size_t>(e.channel)];
            if (e.outcomes.size() != ch.size()) {
                fail("totality", "missing classical entry for an outcome of '" + ch.name() + "' in " + where);
                continue;
            }
            for (std::size_t b = 0; b < e.outcomes.size(); ++b) {
                const Transition &t = e.outcomes[b];
                if (!in_range(t.next)) {
                    fail("table", "bad next state in " + where);
                    continue;
                }
                if (t.move < -1 || t.move > 1) fail("move", "head move outside {-1,0,1} in " + where);
                if (y == 0 && t.move == -1) fail("endmarker-guard", "left move on the left endmarker in " + where);
                if (y == nsym - 1 && t.move == 1) fail("endmarker-guard", "right move on the right endmarker in " + where);
                if (!seen[static_cast<std::size_t>(t.next)]) {
                    seen[static_cast<std::size_t>(t.next)] = 1;
                    queue.push_back(t.next);
                }
            }
        }
    }
    rep.reachable_states = static_cast<std::size_t>(std::count(seen.begin(), seen.end(), 1));
    return rep;
}

void require_valid(const MachineSpec &spec) {
    ValidationReport r = validate_spec(spec);
    if (!r.pass) {
        const auto &v = r.violations.front();
        ErrorKind kind = v.code == "completeness" ? ErrorKind::IncompleteChannel
                         : v.code == "dimension"  ? ErrorKind::DimensionMismatch
                                                  : ErrorKind::Totality;
        throw Error(kind, v.code + ": " + v.message + " (" + std::to_string(r.violations.size()) + " violations)");
    }
}

StepResult step_distribution(const MachineSpec &spec, const Configuration &cfg, std::string_view input) {
    StepResult res;
    if (cfg.state == spec.q_acc) {
        res.halted = Verdict::Accept;
        return res;
    }
    if (cfg.state == spec.q_rej) {
        res.halted = Verdict::Reject;
        return res;
    }
    int n = static_cast<int>(input.size());
    if (cfg.head < 0 || cfg.head > n + 1) throw Error(ErrorKind::InvalidArgument, "head outside [0, n+1]");
    if (cfg.reg.size() != spec.register_dim) throw Error(ErrorKind::DimensionMismatch, "register size");
    char c = cfg.head == 0 ? kLeftEnd : cfg.head == n + 1 ? kRightEnd : input[static_cast<std::size_t>(cfg.head - 1)];
    int y = spec.symbol_index(c);
    const Entry &e = spec.table.at(static_cast<std::size_t>(cfg.state)).at(static_cast<std::size_t>(y));
    if (!e.defined()) {
        throw Error(ErrorKind::Totality,
                    "no entry for state '" + spec.states[static_cast<std::size_t>(cfg.state)] + "' on '" + c + "'");
    }
    const auto &ch = spec.pool[static_cast<std::size_t>(e.channel)];
    auto outcomes = qk::apply_channel(ch, qk::QuantumState(cfg.reg));
    for (std::size_t b = 0; b < outcomes.size(); ++b) {
        if (outcomes[b].probability <= 0.0) continue;
        const Transition &t = e.outcomes.at(b);
        Successor s;
        s.probability = outcomes[b].probability;
        s.label = outcomes[b].label;
        if (t.next == spec.q_acc) {
            s.verdict = Verdict::Accept;
        } else if (t.next == spec.q_rej) {
            s.verdict = Verdict::Reject;
        } else {
            s.config.state = t.next;
            s.config.head = cfg.head + t.move;
            if (s.config.head < 0 || s.config.head > n + 1) throw Error(ErrorKind::Totality, "head left the tape");
            s.config.reg = outcomes[b].post.amplitudes();
        }
        res.successors.push_back(std::move(s));
    }
    return res;
}

}  // namespace qcfa::machine
