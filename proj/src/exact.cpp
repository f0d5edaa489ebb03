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


#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <limits>
#include <queue>
#include <unordered_map>
#include <unordered_set>

#include "qcfa/engines.hpp"

namespace qcfa::engines {

const char *method_name(ExactMethod m) {
    switch (m) {
        case ExactMethod::Auto: return "auto";
        case ExactMethod::Orbit: return "orbit";
        case ExactMethod::Density: return "density";
        case ExactMethod::Horizon: return "horizon";
    }
    return "?";
}

ExactMethod parse_method(std::string_view name) {
    for (ExactMethod m : {ExactMethod::Auto, ExactMethod::Orbit, ExactMethod::Density, ExactMethod::Horizon}) {
        if (name == method_name(m)) return m;
    }
    throw Error(ErrorKind::InvalidArgument, "unknown exact method '" + std::string(name) + "'");
}

namespace {

using qk::cplx;

constexpr int kAcc = 0;
constexpr int kRej = 1;
constexpr int kTrap = 2;

// Absorbing Markov chain on explored nodes, reduced by state elimination
// (Grassmann-Taksar-Heyman).  Only nonnegative quantities are added, so
// tiny exit probabilities do not cancel.
class AbsorbingChain {
   public:
    explicit AbsorbingChain(std::size_t rewards) : nrew_(rewards) {}

    int add_node() {
        out_.emplace_back();
        in_.emplace_back();
        absorb_.push_back({0.0, 0.0, 0.0});
        reward_.emplace_back(nrew_, 0.0);
        inf_.push_back(0);
        return static_cast<int>(out_.size()) - 1;
    }
    std::size_t size() const { return out_.size(); }

    void add_edge(int from, int to, double p) {
        if (from == to) return;  // self-loops are implied by the row deficit
        out_[static_cast<std::size_t>(from)][to] += p;
        in_[static_cast<std::size_t>(to)].insert(from);
    }
    void add_absorb(int from, int kind, double p) { absorb_[static_cast<std::size_t>(from)][static_cast<std::size_t>(kind)] += p; }
    void set_reward(int node, std::size_t r, double v) { reward_[static_cast<std::size_t>(node)][r] = v; }

    struct Result {
        double acc = 0.0, rej = 0.0, trap = 0.0;
        bool infinite = false;
        std::vector<double> rewards;
    };

    Result solve(int start) {
        std::size_t n = out_.size();
        std::vector<char> gone(n, 0);
        using Item = std::pair<double, int>;
        std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
        auto cost = [&](int k) {
            return static_cast<double>(in_[static_cast<std::size_t>(k)].size()) *
                   static_cast<double>(out_[static_cast<std::size_t>(k)].size());
        };
        for (std::size_t k = 0; k < n; ++k) {
            if (static_cast<int>(k) != start) pq.push({cost(static_cast<int>(k)), static_cast<int>(k)});
        }
        while (!pq.empty()) {
            auto [c, k] = pq.top();
            pq.pop();
            if (gone[static_cast<std::size_t>(k)]) continue;
            double now = cost(k);
            if (now > c) {
                pq.push({now, k});
                continue;
            }
            eliminate(k);
            gone[static_cast<std::size_t>(k)] = 1;
            for (int i : preds_touched_) {
                if (!gone[static_cast<std::size_t>(i)] && i != start) pq.push({cost(i), i});
            }
            for (int j : succs_touched_) {
                if (!gone[static_cast<std::size_t>(j)] && j != start) pq.push({cost(j), j});
            }
        }
        Result r;
        auto s = static_cast<std::size_t>(start);
        double out = outflow(start);
        r.rewards.assign(nrew_, 0.0);
        if (out <= 0.0) {
            r.trap = 1.0;
            r.infinite = true;
            return r;
        }
        r.acc = absorb_[s][kAcc] / out;
        r.rej = absorb_[s][kRej] / out;
        r.trap = absorb_[s][kTrap] / out;
        r.infinite = inf_[s] != 0 || r.trap > 0.0;
        for (std::size_t q = 0; q < nrew_; ++q) r.rewards[q] = reward_[s][q] / out;
        return r;
    }

   private:
    double outflow(int k) const {
        auto kk = static_cast<std::size_t>(k);
        double s = absorb_[kk][kAcc] + absorb_[kk][kRej] + absorb_[kk][kTrap];
        for (const auto &[j, p] : out_[kk]) s += p;
        return s;
    }

    void eliminate(int k) {
        auto kk = static_cast<std::size_t>(k);
        preds_touched_.assign(in_[kk].begin(), in_[kk].end());
        succs_touched_.clear();
        for (const auto &[j, p] : out_[kk]) succs_touched_.push_back(j);
        double s = outflow(k);
        for (int i : preds_touched_) {
            auto ii = static_cast<std::size_t>(i);
            auto it = out_[ii].find(k);
            double pik = it->second;
            out_[ii].erase(it);
            if (s <= 0.0) {
                // k only loops on itself: everything entering it is trapped.
                absorb_[ii][kTrap] += pik;
                inf_[ii] = 1;
                continue;
            }
            double w = pik / s;
            for (const auto &[j, pkj] : out_[kk]) {
                if (j == i) continue;
                out_[ii][j] += w * pkj;
                in_[static_cast<std::size_t>(j)].insert(i);
            }
            for (int a = 0; a < 3; ++a) absorb_[ii][static_cast<std::size_t>(a)] += w * absorb_[kk][static_cast<std::size_t>(a)];
            for (std::size_t q = 0; q < nrew_; ++q) reward_[ii][q] += w * reward_[kk][q];
            if (inf_[kk]) inf_[ii] = 1;
        }
        for (int j : succs_touched_) in_[static_cast<std::size_t>(j)].erase(k);
        out_[kk].clear();
        in_[kk].clear();
    }

    std::size_t nrew_;
    std::vector<std::unordered_map<int, double>> out_;
    std::vector<std::unordered_set<int>> in_;
    std::vector<std::array<double, 3>> absorb_;
    std::vector<std::vector<double>> reward_;
    std::vector<char> inf_;
    std::vector<int> preds_touched_, succs_touched_;
};

struct OrbitNode {
    int state;
    int head;
    qk::Vector reg;
};

// Global phase fixed by the first non-negligible amplitude; then rounded.
std::string orbit_key(int state, int head, qk::Vector &reg, double quantum) {
    std::string key;
    key.reserve(8 + static_cast<std::size_t>(reg.size()) * 16);
    key.append(reinterpret_cast<const char *>(&state), sizeof state);
    key.append(reinterpret_cast<const char *>(&head), sizeof head);
    if (reg.size() == 1) return key;
    for (Eigen::Index k = 0; k < reg.size(); ++k) {
        if (std::abs(reg(k)) > 1e-7) {
            cplx ph = std::conj(reg(k)) / std::abs(reg(k));
            reg *= ph;
            break;
        }
    }
    for (Eigen::Index k = 0; k < reg.size(); ++k) {
        std::int64_t re = std::llround(reg(k).real() / quantum);
        std::int64_t im = std::llround(reg(k).imag() / quantum);
        key.append(reinterpret_cast<const char *>(&re), sizeof re);
        key.append(reinterpret_cast<const char *>(&im), sizeof im);
    }
    return key;
}

void check_rewards(const MachineSpec &spec, const ExactOptions &opt) {
    for (const auto &r : opt.rewards) {
        if (r.size() != spec.states.size()) {
            throw Error(ErrorKind::DimensionMismatch, "reward vector length differs from the state count");
        }
    }
}

AbsorptionSolution solve_orbit(const MachineSpec &spec, std::string_view input, const ExactOptions &opt) {
    std::vector<int> tape = spec.encode_tape(input);
    int last = static_cast<int>(tape.size()) - 1;
    AbsorbingChain chain(opt.rewards.size() + 1);
    std::unordered_map<std::string, int> index;
    std::vector<OrbitNode> nodes;
    std::deque<int> queue;
    auto intern = [&](int state, int head, qk::Vector reg) {
        std::string key = orbit_key(state, head, reg, opt.quantum);
        auto it = index.find(key);
        if (it != index.end()) return it->second;
        if (nodes.size() >= opt.max_nodes) {
            throw Error(ErrorKind::Resource, "orbit exploration exceeded max_nodes=" + std::to_string(opt.max_nodes));
        }
        int id = chain.add_node();
        index.emplace(std::move(key), id);
        nodes.push_back({state, head, std::move(reg)});
        queue.push_back(id);
        chain.set_reward(id, 0, 1.0);
        for (std::size_t q = 0; q < opt.rewards.size(); ++q) {
            chain.set_reward(id, q + 1, opt.rewards[q][static_cast<std::size_t>(state)]);
        }
        return id;
    };
    qk::Vector r0 = spec.start_register();
    r0 /= r0.norm();
    AbsorptionSolution sol;
    sol.method = "orbit";
    if (spec.is_halting(spec.q0)) {
        sol.p_accept = spec.q0 == spec.q_acc ? 1.0 : 0.0;
        sol.p_reject = 1.0 - sol.p_accept;
        sol.rewards.assign(opt.rewards.size(), 0.0);
        return sol;
    }
    int start = intern(spec.q0, 0, r0);
    std::vector<double> probs;
    std::vector<qk::Vector> images;
    while (!queue.empty()) {
        int id = queue.front();
        queue.pop_front();
        OrbitNode node = nodes[static_cast<std::size_t>(id)];
        const machine::Entry &e = spec.table[static_cast<std::size_t>(node.state)][static_cast<std::size_t>(tape[static_cast<std::size_t>(node.head)])];
        if (!e.defined()) {
            throw Error(ErrorKind::Totality, "no entry for reachable state '" + spec.states[static_cast<std::size_t>(node.state)] + "'");
        }
        const auto &ch = spec.pool[static_cast<std::size_t>(e.channel)];
        probs.assign(ch.size(), 0.0);
        images.assign(ch.size(), qk::Vector());
        double kept = 0.0;
        for (std::size_t b = 0; b < ch.size(); ++b) {
            if (ch.is_scalar()) {
                probs[b] = std::norm(ch.branches()[b].op(0, 0));
                images[b] = node.reg;
            } else {
                images[b] = ch.branches()[b].op * node.reg;
                probs[b] = images[b].squaredNorm();
            }
            if (probs[b] <= opt.prob_floor || probs[b] <= 0.0) {
                probs[b] = 0.0;
                continue;
            }
            kept += probs[b];
        }
        if (!(kept > 0.0)) throw Error(ErrorKind::IncompleteChannel, "all branches vanished");
        for (std::size_t b = 0; b < ch.size(); ++b) {
            if (probs[b] <= 0.0) continue;
            double p = probs[b] / kept;
            const machine::Transition &t = e.outcomes[b];
            if (t.next == spec.q_acc) {
                chain.add_absorb(id, kAcc, p);
            } else if (t.next == spec.q_rej) {
                chain.add_absorb(id, kRej, p);
            } else {
                int h = node.head + t.move;
                if (h < 0 || h > last) throw Error(ErrorKind::Totality, "head left the tape");
                qk::Vector v = ch.is_scalar() ? node.reg : qk::Vector(images[b] / std::sqrt(probs[b]));
                int to = intern(t.next, h, std::move(v));
                chain.add_edge(id, to, p);
            }
        }
    }
    sol.nodes = chain.size();
    auto r = chain.solve(start);
    sol.p_accept = r.acc;
    sol.p_reject = r.rej;
    sol.p_trap = r.trap;
    sol.infinite_steps = r.infinite;
    sol.expected_steps = r.infinite ? std::numeric_limits<double>::infinity() : r.rewards[0];
    for (std::size_t q = 1; q < r.rewards.size(); ++q) {
        sol.rewards.push_back(r.infinite ? std::numeric_limits<double>::infinity() : r.rewards[q]);
    }
    sol.residual = std::abs(1.0 - (r.acc + r.rej + r.trap));
    return sol;
}

// Configuration graph for the density-operator routes.
struct DensitySystem {
    int d = 1;
    std::vector<std::pair<int, int>> configs;  // (state, head)
    Eigen::SparseMatrix<cplx> transfer;        // X_next = T X
    Eigen::SparseVector<cplx> acc_functional;  // flux into q_acc per unit of X
    Eigen::SparseVector<cplx> rej_functional;
    Eigen::SparseVector<cplx> trace_functional;  // Tr(X_c) summed over configs
    std::vector<Eigen::SparseVector<cplx>> reward_functionals;
    Eigen::VectorXcd b;
};

DensitySystem build_density(const MachineSpec &spec, std::string_view input, const ExactOptions &opt) {
    std::vector<int> tape = spec.encode_tape(input);
    int last = static_cast<int>(tape.size()) - 1;
    DensitySystem sys;
    int d = spec.register_dim;
    sys.d = d;
    int dd = d * d;
    std::unordered_map<long long, int> index;
    std::deque<int> queue;
    auto intern = [&](int s, int h) {
        long long key = static_cast<long long>(s) * (last + 1) + h;
        auto it = index.find(key);
        if (it != index.end()) return it->second;
        if (sys.configs.size() >= opt.max_nodes) {
            throw Error(ErrorKind::Resource, "configuration count exceeded max_nodes=" + std::to_string(opt.max_nodes));
        }
        int id = static_cast<int>(sys.configs.size());
        sys.configs.push_back({s, h});
        index.emplace(key, id);
        queue.push_back(id);
        return id;
    };
    if (!spec.is_halting(spec.q0)) intern(spec.q0, 0);
    struct Block {
        int from, to, channel, branch;
    };
    std::vector<Block> blocks;
    std::vector<std::pair<int, int>> acc_terms, rej_terms;  // (config, channel*64+branch)
    while (!queue.empty()) {
        int id = queue.front();
        queue.pop_front();
        auto [s, h] = sys.configs[static_cast<std::size_t>(id)];
        const machine::Entry &e = spec.table[static_cast<std::size_t>(s)][static_cast<std::size_t>(tape[static_cast<std::size_t>(h)])];
        if (!e.defined()) throw Error(ErrorKind::Totality, "no entry for reachable state '" + spec.states[static_cast<std::size_t>(s)] + "'");
        const auto &ch = spec.pool[static_cast<std::size_t>(e.channel)];
        for (std::size_t b = 0; b < ch.size(); ++b) {
            if (ch.branches()[b].op.norm() == 0.0) continue;
            const machine::Transition &t = e.outcomes[b];
            if (t.next == spec.q_acc) {
                acc_terms.push_back({id, e.channel * 64 + static_cast<int>(b)});
            } else if (t.next == spec.q_rej) {
                rej_terms.push_back({id, e.channel * 64 + static_cast<int>(b)});
            } else {
                int nh = h + t.move;
                if (nh < 0 || nh > last) throw Error(ErrorKind::Totality, "head left the tape");
                blocks.push_back({id, intern(t.next, nh), e.channel, static_cast<int>(b)});
            }
        }
    }
    std::size_t unknowns = sys.configs.size() * static_cast<std::size_t>(dd);
    if (unknowns > opt.max_unknowns) {
        throw Error(ErrorKind::Resource, "density system has " + std::to_string(unknowns) +
                                             " unknowns, above max_unknowns=" + std::to_string(opt.max_unknowns));
    }
    auto n = static_cast<Eigen::Index>(unknowns);
    std::vector<Eigen::Triplet<cplx>> trip;
    for (const Block &bl : blocks) {
        const qk::Matrix &k = spec.pool[static_cast<std::size_t>(bl.channel)].branches()[static_cast<std::size_t>(bl.branch)].op;
        // vec(K X K^dag) = (conj(K) (x) K) vec(X), column-major vec.
        for (int a = 0; a < d; ++a) {
            for (int c = 0; c < d; ++c) {
                cplx left = std::conj(k(a, c));
                if (left == cplx(0.0)) continue;
                for (int r = 0; r < d; ++r) {
                    for (int q = 0; q < d; ++q) {
                        cplx v = left * k(r, q);
                        if (v == cplx(0.0)) continue;
                        Eigen::Index row = static_cast<Eigen::Index>(bl.to) * dd + a * d + r;
                        Eigen::Index col = static_cast<Eigen::Index>(bl.from) * dd + c * d + q;
                        trip.emplace_back(row, col, v);
                    }
                }
            }
        }
    }
    sys.transfer.resize(n, n);
    sys.transfer.setFromTriplets(trip.begin(), trip.end());
    auto functional = [&](const std::vector<std::pair<int, int>> &terms) {
        Eigen::VectorXcd f = Eigen::VectorXcd::Zero(n);
        for (auto [cfg, code] : terms) {
            const qk::Matrix &k = spec.pool[static_cast<std::size_t>(code / 64)].branches()[static_cast<std::size_t>(code % 64)].op;
            qk::Matrix kk = k.adjoint() * k;
            // Tr(K^dag K X) = sum_{r,c} (K^dag K)_{c r} X_{r c}
            for (int c = 0; c < d; ++c) {
                for (int r = 0; r < d; ++r) f(static_cast<Eigen::Index>(cfg) * dd + c * d + r) += kk(c, r);
            }
        }
        return Eigen::SparseVector<cplx>(f.sparseView());
    };
    sys.acc_functional = functional(acc_terms);
    sys.rej_functional = functional(rej_terms);
    auto trace_of = [&](const std::vector<double> *weights) {
        Eigen::VectorXcd f = Eigen::VectorXcd::Zero(n);
        for (std::size_t cfg = 0; cfg < sys.configs.size(); ++cfg) {
            double w = weights ? (*weights)[static_cast<std::size_t>(sys.configs[cfg].first)] : 1.0;
            for (int a = 0; a < d; ++a) f(static_cast<Eigen::Index>(cfg) * dd + a * d + a) = w;
        }
        return Eigen::SparseVector<cplx>(f.sparseView());
    };
    sys.trace_functional = trace_of(nullptr);
    for (const auto &r : opt.rewards) sys.reward_functionals.push_back(trace_of(&r));
    sys.b = Eigen::VectorXcd::Zero(n);
    if (!sys.configs.empty()) {
        qk::Vector r0 = spec.start_register();
        r0 /= r0.norm();
        qk::Matrix rho = r0 * r0.adjoint();
        for (int c = 0; c < d; ++c) {
            for (int r = 0; r < d; ++r) sys.b(c * d + r) = rho(r, c);
        }
    }
    return sys;
}

double real_dot(const Eigen::SparseVector<cplx> &f, const Eigen::VectorXcd &x) {
    cplx s = 0.0;
    for (Eigen::SparseVector<cplx>::InnerIterator it(f); it; ++it) s += it.value() * x(it.index());
    return s.real();
}

AbsorptionSolution solve_horizon(const MachineSpec &spec, std::string_view input, const ExactOptions &opt) {
    AbsorptionSolution sol;
    sol.method = "horizon";
    DensitySystem sys = build_density(spec, input, opt);
    sol.nodes = sys.configs.size();
    if (sys.configs.empty()) {
        sol.p_accept = spec.q0 == spec.q_acc ? 1.0 : 0.0;
        sol.p_reject = 1.0 - sol.p_accept;
        return sol;
    }
    Eigen::VectorXcd x = sys.b;
    double acc = 0.0, rej = 0.0, steps = 0.0;
    std::vector<double> rew(opt.rewards.size(), 0.0);
    for (std::uint64_t t = 0; t < opt.horizon; ++t) {
        double mass = real_dot(sys.trace_functional, x);
        if (mass < 1e-16) break;
        acc += real_dot(sys.acc_functional, x);
        rej += real_dot(sys.rej_functional, x);
        steps += mass;
        for (std::size_t q = 0; q < rew.size(); ++q) rew[q] += real_dot(sys.reward_functionals[q], x);
        x = sys.transfer * x;
    }
    sol.p_accept = acc;
    sol.p_reject = rej;
    sol.remaining_mass = std::max(0.0, real_dot(sys.trace_functional, x));
    sol.expected_steps = steps;
    sol.infinite_steps = sol.remaining_mass > 1e-9;
    sol.rewards = rew;
    sol.residual = std::abs(1.0 - acc - rej - sol.remaining_mass);
    return sol;
}

AbsorptionSolution solve_density(const MachineSpec &spec, std::string_view input, const ExactOptions &opt) {
    AbsorptionSolution sol;
    sol.method = "density";
    DensitySystem sys = build_density(spec, input, opt);
    sol.nodes = sys.configs.size();
    if (sys.configs.empty()) {
        sol.p_accept = spec.q0 == spec.q_acc ? 1.0 : 0.0;
        sol.p_reject = 1.0 - sol.p_accept;
        return sol;
    }
    auto n = sys.transfer.rows();
    Eigen::SparseMatrix<cplx> a(n, n);
    a.setIdentity();
    a -= sys.transfer;
    a.makeCompressed();
    Eigen::SparseLU<Eigen::SparseMatrix<cplx>> lu;
    lu.compute(a);
    if (lu.info() != Eigen::Success) {
        // Singular: some mass never halts.  Fall back to truncation.
        AbsorptionSolution h = solve_horizon(spec, input, opt);
        h.method = "density->horizon";
        h.infinite_steps = true;
        return h;
    }
    Eigen::VectorXcd x = lu.solve(sys.b);
    sol.residual = (a * x - sys.b).lpNorm<Eigen::Infinity>();
    sol.p_accept = real_dot(sys.acc_functional, x);
    sol.p_reject = real_dot(sys.rej_functional, x);
    sol.expected_steps = real_dot(sys.trace_functional, x);
    for (const auto &f : sys.reward_functionals) sol.rewards.push_back(real_dot(f, x));
    double lost = 1.0 - sol.p_accept - sol.p_reject;
    if (lost > 1e-8 || !std::isfinite(sol.expected_steps)) {
        sol.p_trap = std::max(0.0, lost);
        sol.infinite_steps = true;
        sol.expected_steps = std::numeric_limits<double>::infinity();
    }
    return sol;
}

}  // namespace

AbsorptionSolution solve_exact(const MachineSpec &spec, std::string_view input, const ExactOptions &options) {
    check_rewards(spec, options);
    switch (options.method) {
        case ExactMethod::Auto:
        case ExactMethod::Orbit: return solve_orbit(spec, input, options);
        case ExactMethod::Density: return solve_density(spec, input, options);
        case ExactMethod::Horizon: return solve_horizon(spec, input, options);
    }
    throw Error(ErrorKind::InvalidArgument, "unknown method");
}

nlohmann::json to_json(const AbsorptionSolution &s, const std::string &accept_alias) {
    nlohmann::json j;
    j["p_accept"] = s.p_accept;
    j["p_reject"] = s.p_reject;
    j["p_trap"] = s.p_trap;
    if (s.method.find("horizon") != std::string::npos) j["remaining_mass"] = s.remaining_mass;
    if (s.infinite_steps) {
        j["expected_steps"] = nullptr;
        j["infinite_steps"] = true;
    } else {
        j["expected_steps"] = s.expected_steps;
        j["infinite_steps"] = false;
    }
    j["residual"] = s.residual;
    j["method"] = s.method;
    j["nodes"] = s.nodes;
    if (!accept_alias.empty()) j["p_" + accept_alias] = s.p_accept;
    return j;
}

}  // namespace qcfa::engines
