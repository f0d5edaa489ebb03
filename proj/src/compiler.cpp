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


// Template compilation.  A controller is written as a step function over a
// small value type (Ctl) and tabulated into a MachineSpec by breadth-first
// enumeration of the reachable controller states.
//
// Inside a length comparison the controller carries the core machine's
// state and a few view counters.  The core sees one virtual symbol per
// token; tokens it must not see are skipped while travelling.

#include <algorithm>
#include <deque>
#include <functional>
#include <map>
#include <memory>

#include "qcfa/builders.hpp"
#include "qcfa/langkit.hpp"

namespace qcfa::builders {

namespace {

using machine::Kind;
using machine::SpecBuilder;
using machine::Transition;
using qk::Matrix;
using qk::QuantumChannel;

constexpr int kBd = 256;  // token id of a bit run with value v is kBd + v
constexpr std::size_t kMaxControllerStates = 400'000;

enum class V { Left, A, B, Right, Skip, Err };

int core_symbol(V v) {
    switch (v) {
        case V::Left: return 0;
        case V::A: return 1;
        case V::B: return 2;
        case V::Right: return 3;
        default: return -1;
    }
}

struct Ctl {
    std::uint8_t phase = 0;
    std::uint8_t j = 0;
    std::uint8_t reg = 0;
    std::uint8_t reg2 = 0;
    std::int16_t core = -1;  // core state while a comparison runs
    std::uint8_t call = 0;
    std::uint8_t t0 = 0;
    std::uint8_t t1 = 0;
    std::int16_t tok = -1;  // token under the head, -1 when not tracked
    std::int8_t side = 0;   // which end of a wide token the head is on
    std::int8_t dir = 0;    // nonzero while travelling
    std::uint8_t skip = 0;
    std::uint8_t cnt = 0;
    std::uint16_t acc = 0;
    auto operator<=>(const Ctl &) const = default;
};

enum class Halt { None, Accept, Reject };

struct Succ {
    Halt halt = Halt::None;
    Ctl next;
    int move = 0;
};

struct Act {
    const QuantumChannel *channel = nullptr;
    std::vector<Succ> succ;
};

Succ reject() { return Succ{Halt::Reject, {}, 0}; }
Succ accept() { return Succ{Halt::Accept, {}, 0}; }

bool is_ab(int tok) { return tok == 'a' || tok == 'b'; }

// Channels of the target dimension; core channels are embedded on demand.
class ChannelPool {
   public:
    explicit ChannelPool(int dim) : dim_(dim) {
        id_ = &add(qk::identity_channel(dim));
        coin_ = &add(qk::coin_channel(dim));
    }
    const QuantumChannel *id() const { return id_; }
    const QuantumChannel *coin() const { return coin_; }
    int dim() const { return dim_; }

    const QuantumChannel *embed(const QuantumChannel &ch) {
        auto it = by_name_.find(ch.name());
        if (it != by_name_.end()) return &it->second;
        if (ch.dim() == dim_) return &add(ch);
        if (ch.dim() > dim_) throw Error(ErrorKind::DimensionMismatch, "core register larger than the machine's");
        const std::string &name = ch.name();
        if (name.rfind("reset", 0) == 0) {
            qk::Vector t = qk::Vector::Zero(dim_);
            t.head(ch.dim()) = ch.branches().front().op.col(0);
            return &add(qk::reset_channel(name, t));
        }
        std::vector<qk::Branch> branches;
        for (std::size_t b = 0; b < ch.size(); ++b) {
            Matrix op = Matrix::Zero(dim_, dim_);
            op.topLeftCorner(ch.dim(), ch.dim()) = ch.branches()[b].op;
            if (b == 0) {
                int rest = dim_ - ch.dim();
                op.bottomRightCorner(rest, rest) = Matrix::Identity(rest, rest);
            }
            branches.push_back({ch.branches()[b].label, op});
        }
        return &add(QuantumChannel(name, std::move(branches)));
    }

   private:
    const QuantumChannel &add(const QuantumChannel &ch) { return by_name_.emplace(ch.name(), ch).first->second; }

    int dim_;
    std::map<std::string, QuantumChannel> by_name_;
    const QuantumChannel *id_ = nullptr;
    const QuantumChannel *coin_ = nullptr;
};

// Shared stepping machinery.  Subclasses supply the phases and the views.
class Controller {
   public:
    Controller(std::string alphabet, int bit_width, int dim)
        : alphabet_(std::move(alphabet)), bit_width_(bit_width), pool_(dim) {}
    virtual ~Controller() = default;

    virtual Ctl start() const = 0;
    virtual std::string phase_name(int phase) const = 0;
    virtual std::string call_name(int call) const = 0;

    Act step(const Ctl &c, char sym) {
        if (c.dir != 0) return nav_step(c, sym);
        if (c.tok >= 0 && !consistent(c.tok, sym)) return halt(reject());
        if (c.core >= 0) return call_rest(c, sym);
        return rest(c, sym);
    }

    const std::string &alphabet() const { return alphabet_; }
    int dim() const { return pool_.dim(); }

    std::string state_name(const Ctl &c) const {
        std::string s = phase_name(c.phase);
        if (c.j) s += ".j" + std::to_string(c.j);
        if (c.reg || c.reg2) s += ".r" + std::to_string(c.reg) + "_" + std::to_string(c.reg2);
        if (c.core >= 0) {
            s += "/" + call_name(c.call) + ":" + core_of(c.call).spec.states[static_cast<std::size_t>(c.core)];
        }
        if (c.t0 || c.t1) s += ".v" + std::to_string(c.t0) + "_" + std::to_string(c.t1);
        if (c.tok >= 0) s += "@" + token_text(c.tok) + (c.side > 0 ? "R" : c.side < 0 ? "L" : "");
        if (c.dir != 0) {
            s += c.dir > 0 ? "/fwd" : "/bwd";
            if (c.skip) s += ".s" + std::to_string(c.skip);
            if (c.cnt) s += ".b" + std::to_string(c.cnt) + "_" + std::to_string(c.acc);
        }
        if (c.acc && c.dir == 0) s += ".a" + std::to_string(c.acc);
        return s;
    }

   protected:
    // Phases outside comparisons.
    virtual Act rest(const Ctl &c, char sym) = 0;
    virtual Act token(Ctl c, int dir) = 0;
    // Views.
    virtual const Fragment &core_of(int call) const = 0;
    virtual V classify(const Ctl &c) const = 0;
    virtual void enter(Ctl &c) const = 0;
    virtual void leave(Ctl &c) const = 0;
    virtual Succ finished(const Ctl &c) = 0;  // the core accepted; head on the right signpost

    int width(int tok) const { return tok >= kBd ? bit_width_ : 1; }
    bool is_bit(char sym) const { return bit_width_ > 0 && (sym == '0' || sym == '1'); }

    std::string token_text(int tok) const {
        if (tok < kBd) return std::string(1, static_cast<char>(tok));
        std::string s(static_cast<std::size_t>(bit_width_), '0');
        for (int p = 0; p < bit_width_; ++p) {
            if ((tok - kBd) >> (bit_width_ - 1 - p) & 1) s[static_cast<std::size_t>(p)] = '1';
        }
        return s;
    }

    bool consistent(int tok, char sym) const { return tok >= kBd ? is_bit(sym) : tok == sym; }

    Act halt(Succ s) const { return Act{pool_.id(), {s}}; }
    Act go(Succ s) const { return Act{pool_.id(), {s}}; }
    Act coin(Succ heads, Succ tails) const { return Act{pool_.coin(), {heads, tails}}; }

    static Succ stay(Ctl c) {
        c.dir = 0;
        return Succ{Halt::None, c, 0};
    }
    // Character-level move: the token is not tracked.
    static Succ step_to(Ctl c, int move) {
        c.tok = -1;
        c.side = 0;
        c.dir = 0;
        return Succ{Halt::None, c, move};
    }
    // Leave the current token in direction d and read the next one.
    Succ travel(Ctl c, int d) const {
        int k = (width(c.tok) == 1 || c.side == d) ? 1 : width(c.tok);
        c.dir = static_cast<std::int8_t>(d);
        c.skip = static_cast<std::uint8_t>(k - 1);
        c.cnt = 0;
        c.acc = 0;
        c.tok = -1;
        c.side = 0;
        return Succ{Halt::None, c, d};
    }

    Ctl begin_call(Ctl at, int call, int t0 = 0, int t1 = 0) const {
        at.call = static_cast<std::uint8_t>(call);
        at.core = static_cast<std::int16_t>(core_of(call).spec.q0);
        at.t0 = static_cast<std::uint8_t>(t0);
        at.t1 = static_cast<std::uint8_t>(t1);
        at.dir = 0;
        return at;
    }
    // The comparison starts on the current token, which is its left signpost.
    Act start_call(const Ctl &at, int call, int t0 = 0, int t1 = 0) {
        Ctl c = begin_call(at, call, t0, t1);
        return core_act(c, classify(c));
    }
    static Ctl leave_call(Ctl c, int phase) {
        c.phase = static_cast<std::uint8_t>(phase);
        c.core = -1;
        c.call = 0;
        c.t0 = c.t1 = 0;
        c.reg = c.reg2 = 0;
        return c;
    }

   private:
    Act nav_step(Ctl c, char sym) {
        int dir = c.dir;
        if (c.skip > 0) {
            if (sym == machine::kLeftEnd || sym == machine::kRightEnd) return halt(reject());
            --c.skip;
            return go(Succ{Halt::None, c, dir});
        }
        int tok;
        if (is_bit(sym)) {
            int bit = sym - '0';
            if (dir > 0) {
                c.acc = static_cast<std::uint16_t>(c.acc * 2 + bit);
            } else {
                c.acc = static_cast<std::uint16_t>(c.acc | (bit << c.cnt));
            }
            ++c.cnt;
            if (c.cnt < bit_width_) return go(Succ{Halt::None, c, dir});
            tok = kBd + c.acc;
        } else {
            if (c.cnt > 0) return halt(reject());
            tok = static_cast<unsigned char>(sym);
        }
        c.tok = static_cast<std::int16_t>(tok);
        c.side = static_cast<std::int8_t>(width(tok) > 1 ? dir : 0);
        c.cnt = 0;
        c.acc = 0;
        c.dir = 0;
        if (c.core >= 0) return call_token(c, dir);
        return token(c, dir);
    }

    Act call_token(Ctl c, int dir) {
        if (dir > 0) enter(c);
        V v = classify(c);
        if (v == V::Err) return halt(reject());
        if (v == V::Skip) {
            if (dir < 0) leave(c);
            return go(travel(c, dir));
        }
        return core_act(c, v);
    }

    Act call_rest(const Ctl &c, char) {
        V v = classify(c);
        if (v == V::Err || v == V::Skip) return halt(reject());
        return core_act(c, v);
    }

    Act core_act(const Ctl &c, V v) {
        const Fragment &core = core_of(c.call);
        const machine::Entry &e = core.spec.table[static_cast<std::size_t>(c.core)][static_cast<std::size_t>(core_symbol(v))];
        Act act;
        act.channel = pool_.embed(core.spec.pool[static_cast<std::size_t>(e.channel)]);
        std::vector<Transition> outs = e.outcomes;
        // An embedded reset has one branch per register basis vector; all of
        // them continue like the core's first branch.
        outs.resize(act.channel->size(), outs.front());
        for (const Transition &t : outs) {
            if (t.next == core.spec.q_acc) {
                act.succ.push_back(finished(c));
            } else if (t.next == core.spec.q_rej) {
                act.succ.push_back(reject());
            } else {
                Ctl n = c;
                n.core = static_cast<std::int16_t>(t.next);
                if (t.move == 0) {
                    act.succ.push_back(stay(n));
                } else {
                    if (t.move < 0) leave(n);
                    act.succ.push_back(travel(n, t.move));
                }
            }
        }
        return act;
    }

    std::string alphabet_;
    int bit_width_;

   protected:
    ChannelPool pool_;
};

MachineSpec tabulate(Controller &ctl, nlohmann::json metadata) {
    SpecBuilder b(Kind::QuantumClassical, ctl.alphabet(), ctl.dim());
    std::map<Ctl, int> ids;
    std::deque<Ctl> queue;
    std::string symbols = "<" + ctl.alphabet() + ">";
    Ctl s0 = ctl.start();
    int acc = b.state("acc"), rej = b.state("rej");
    auto intern = [&](const Ctl &c) {
        auto it = ids.find(c);
        if (it != ids.end()) return it->second;
        if (ids.size() >= kMaxControllerStates) {
            throw Error(ErrorKind::Resource, "controller exceeds " + std::to_string(kMaxControllerStates) + " states");
        }
        int before = b.num_states();
        int id = b.state(ctl.state_name(c));
        if (b.num_states() == before) throw Error(ErrorKind::Domain, "controller state name clash: " + ctl.state_name(c));
        ids.emplace(c, id);
        queue.push_back(c);
        return id;
    };
    intern(s0);
    b.set_start(ctl.state_name(s0));
    b.set_halting("acc", "rej");
    while (!queue.empty()) {
        Ctl c = queue.front();
        queue.pop_front();
        int sid = ids.at(c);
        for (char sym : symbols) {
            Act a = ctl.step(c, sym);
            int ch = b.channel(*a.channel);
            std::vector<Transition> outs;
            for (const Succ &s : a.succ) {
                bool off = (sym == machine::kLeftEnd && s.move < 0) || (sym == machine::kRightEnd && s.move > 0);
                if (s.halt == Halt::Accept) {
                    outs.push_back({acc, 0});
                } else if (s.halt == Halt::Reject || off) {
                    outs.push_back({rej, 0});
                } else {
                    outs.push_back({intern(s.next), s.move});
                }
            }
            b.set(sid, sym, ch, outs);
        }
    }
    metadata["controller_states"] = ids.size();
    b.metadata() = std::move(metadata);
    MachineSpec spec = b.finish();
    machine::require_valid(spec);
    return spec;
}

// ---------------------------------------------------------------------------
// Shared phases: main-loop marker, random-walk gate, final palindrome stage.

enum CommonPhase : std::uint8_t {
    kRound = 1,  // one visit per main-loop round
    kRwRewind,
    kRwWalk,
    kRwCoin,
    kPalRewind,
    kFirstTemplatePhase,
};

class TemplateController : public Controller {
   public:
    TemplateController(std::string alphabet, int bit_width, int level, const Rational &eps, int k_eps)
        : Controller(std::move(alphabet), bit_width, 4),
          level_(level),
          k_eps_(k_eps),
          eq_(build_eq_core(eps)),
          pal_(build_pal_core(eps)) {}

   protected:
    // Common phases; returns true when handled.
    bool common_rest(const Ctl &c, char sym, Act &out) {
        switch (c.phase) {
            case kRwRewind:
                out = sym == machine::kLeftEnd ? go(step_to(with_phase(c, kRwWalk), +1)) : go(step_to(c, -1));
                return true;
            case kRwWalk:
                if (sym == machine::kLeftEnd) {
                    out = go(step_to(with_phase(c, kRound), 0));
                } else if (sym == machine::kRightEnd) {
                    out = go(step_to(k_eps_ == 0 ? with_phase(c, kPalRewind) : with_phase(c, kRwCoin), 0));
                } else {
                    out = coin(step_to(c, +1), step_to(c, -1));
                }
                return true;
            case kRwCoin: {
                Ctl heads = c;
                ++heads.reg;
                if (heads.reg >= k_eps_) heads = with_phase(c, kPalRewind);
                out = coin(step_to(heads, 0), step_to(with_phase(c, kRound), 0));
                return true;
            }
            case kPalRewind:
                if (sym == machine::kLeftEnd) {
                    Ctl at = with_phase(c, kPalRewind);
                    at.tok = machine::kLeftEnd;
                    out = start_call(at, pal_call());
                } else {
                    out = go(step_to(c, -1));
                }
                return true;
            default: return false;
        }
    }

    static Ctl with_phase(Ctl c, int phase) {
        c.phase = static_cast<std::uint8_t>(phase);
        c.reg = c.reg2 = 0;
        c.acc = 0;
        return c;
    }

    std::string common_phase_name(int phase) const {
        switch (phase) {
            case kRound: return "m.round";
            case kRwRewind: return "rw.rewind";
            case kRwWalk: return "rw.walk";
            case kRwCoin: return "rw.coin";
            case kPalRewind: return "p.rewind";
            default: return "phase" + std::to_string(phase);
        }
    }

    virtual int pal_call() const = 0;

    int level_;
    int k_eps_;
    Fragment eq_;
    Fragment pal_;
};

// ---------------------------------------------------------------------------
// RPAL recognizer template.

class RpalController : public TemplateController {
   public:
    RpalController(int level, const Rational &eps, int k_eps) : TemplateController("ab$1", 0, level, eps, k_eps) {}

    Ctl start() const override {
        Ctl c;
        c.phase = kScan;
        return c;
    }

    std::string phase_name(int phase) const override {
        switch (phase) {
            case kScan: return "r.scan";
            case kC1Rewind: return "c1.rewind";
            case kC2Rewind: return "c2.rewind";
            case kPeek: return "c2.peek";
            case kPeekRead: return "c2.look";
            case kBack: return "c2.back";
            default: return common_phase_name(phase);
        }
    }
    std::string call_name(int call) const override {
        switch (call) {
            case kCallC1: return "C1";
            case kCallC2First: return "C2f";
            case kCallC2: return "C2";
            default: return "P";
        }
    }

   protected:
    enum Phase : std::uint8_t { kScan = kFirstTemplatePhase, kC1Rewind, kC2Rewind, kPeek, kPeekRead, kBack };
    enum Call : std::uint8_t { kCallC1 = 1, kCallC2First, kCallC2, kCallPal };

    int pal_call() const override { return kCallPal; }
    const Fragment &core_of(int call) const override { return call == kCallPal ? pal_ : eq_; }

    // Regular-expression check: ab ab+ ($ 1 (a+ 1)+)^level, reg = DFA state,
    // reg2 = blocks seen.
    Act scan(const Ctl &c, char sym) {
        Ctl n = c;
        auto to = [&](int state) {
            n.reg = static_cast<std::uint8_t>(state);
            return go(step_to(n, +1));
        };
        bool ab = sym == 'a' || sym == 'b';
        switch (c.reg) {
            case 0: return sym == '<' ? to(1) : halt(reject());
            case 1: return ab ? to(2) : halt(reject());
            case 2: return ab ? to(3) : halt(reject());
            case 3:
                if (ab) return to(3);
                if (sym == '$') {
                    n.reg2 = 1;
                    return to(4);
                }
                return halt(reject());
            case 4: return sym == '1' ? to(5) : halt(reject());
            case 5: return sym == 'a' ? to(6) : halt(reject());
            case 6: return sym == 'a' ? to(6) : sym == '1' ? to(7) : halt(reject());
            case 7:
                if (sym == 'a') return to(6);
                if (sym == '$' && c.reg2 < level_) {
                    ++n.reg2;
                    return to(4);
                }
                if (sym == '>' && c.reg2 == level_) return go(step_to(with_phase(c, kRound), 0));
                return halt(reject());
            default: return halt(reject());
        }
    }

    Act rest(const Ctl &c, char sym) override {
        Act out;
        if (common_rest(c, sym, out)) return out;
        switch (c.phase) {
            case kScan: return scan(c, sym);
            case kRound: {
                Ctl n = with_phase(c, kC1Rewind);
                n.j = static_cast<std::uint8_t>(level_);
                return go(step_to(n, 0));
            }
            case kC1Rewind:
            case kC2Rewind: {
                if (sym != '<') return go(step_to(c, -1));
                Ctl at = c;
                at.tok = '<';
                return start_call(at, c.phase == kC1Rewind ? kCallC1 : kCallC2First);
            }
            case kPeek: return go(step_to(with_phase(c, kPeekRead), +1));
            case kPeekRead:
                if (sym == 'a') return go(step_to(with_phase(c, kBack), -1));
                if (sym == '$' || sym == '>') {
                    if (c.j > 1) {
                        Ctl n = with_phase(c, kC1Rewind);
                        --n.j;
                        return go(step_to(n, 0));
                    }
                    Ctl n = with_phase(c, kRwRewind);
                    n.j = 0;
                    return go(step_to(n, 0));
                }
                return halt(reject());
            case kBack:
                // Pass the right 1 of the finished comparison, stop on the previous 1.
                if (sym == 'a') return go(step_to(c, -1));
                if (sym == '1' && c.reg == 0) {
                    Ctl n = c;
                    n.reg = 1;
                    return go(step_to(n, -1));
                }
                if (sym == '1') {
                    Ctl at = with_phase(c, kBack);
                    at.tok = '1';
                    return start_call(at, kCallC2, 0, 1);
                }
                return halt(reject());
            default: return halt(reject());
        }
    }

    Act token(Ctl, int) override { return halt(reject()); }

    // t0: dollars at or left of the head; t1: ones after the j-th dollar.
    V classify(const Ctl &c) const override {
        int tok = c.tok, d = c.t0, o = c.t1, j = c.j;
        switch (c.call) {
            case kCallC1:
                if (tok == '<') return V::Left;
                if (tok == '>') return j == level_ ? V::Right : V::Err;
                if (d < j) return V::A;
                if (tok == '$') return d == j ? V::Skip : d == j + 1 ? V::Right : V::Err;
                if (d == j) return tok == '1' ? V::B : V::Skip;
                return V::Err;
            case kCallC2First:
                if (tok == '<') return V::Left;
                if (d < j) return tok == '>' ? V::Err : V::A;
                if (d != j) return V::Err;
                if (tok == '$') return V::Skip;
                if (tok == '1') return o == 1 ? V::Skip : o == 2 ? V::Right : V::Err;
                if (tok == 'a') return o == 1 ? V::B : V::Err;
                return V::Err;
            case kCallC2:
                if (tok == '1') return o == 1 ? V::Left : o == 2 ? V::Skip : o == 3 ? V::Right : V::Err;
                if (tok == 'a') return o == 1 ? V::A : o == 2 ? V::B : V::Err;
                return V::Err;
            default:
                if (tok == '<') return V::Left;
                if (tok == 'a') return V::A;
                if (tok == 'b') return V::B;
                if (tok == '$') return V::Right;
                return V::Err;
        }
    }
    void enter(Ctl &c) const override {
        if (c.call == kCallC1 || c.call == kCallC2First) {
            if (c.tok == '$') ++c.t0;
            if (c.call == kCallC2First && c.tok == '1' && c.t0 == c.j) ++c.t1;
        } else if (c.call == kCallC2 && c.tok == '1') {
            ++c.t1;
        }
    }
    void leave(Ctl &c) const override {
        if (c.call == kCallC1 || c.call == kCallC2First) {
            if (c.call == kCallC2First && c.tok == '1' && c.t0 == c.j) --c.t1;
            if (c.tok == '$') --c.t0;
        } else if (c.call == kCallC2 && c.tok == '1') {
            --c.t1;
        }
    }
    Succ finished(const Ctl &c) override {
        switch (c.call) {
            case kCallC1: return stay(step_to(leave_call(c, kC2Rewind), 0).next);
            case kCallC2First:
            case kCallC2: return stay(leave_call(c, kPeek));
            default: return accept();
        }
    }
};

// ---------------------------------------------------------------------------
// PPPAL recognizer template.  Separators are '$' and bit runs of the delimiter width.

class PppalController : public TemplateController {
   public:
    PppalController(int level, const Rational &eps, int k_eps)
        : TemplateController("ab01$", lang_width(level), level, eps, k_eps), c_(lang_width(level)) {}

    Ctl start() const override {
        Ctl c;
        c.phase = kScan;
        return c;
    }

    std::string phase_name(int phase) const override {
        switch (phase) {
            case kScan: return "r.scan";
            case kSeekRight: return "m.seek";
            case kFindSep: return "sw.sep";
            case kFindLeft: return "sw.left";
            case kAfterCall: return "sw.after";
            case kTwFindMid: return "tw.mid";
            case kTwParity: return "tw.parity";
            case kTwRecover: return "tw.recover";
            case kTwAfter: return "tw.after";
            case kUpdate: return "sw.update";
            case kLSeek: return "l.seek";
            case kLFindLeft: return "l.left";
            case kLAfter: return "l.after";
            case kLBack: return "l.back";
            case kLNext: return "l.next";
            default: return common_phase_name(phase);
        }
    }
    std::string call_name(int call) const override {
        switch (call) {
            case kCallC1: return "C1";
            case kCallC2: return "C2";
            case kCallTw: return "TW";
            case kCallC3: return "C3";
            default: return "P";
        }
    }

   protected:
    enum Phase : std::uint8_t {
        kScan = kFirstTemplatePhase,
        kSeekRight,
        kFindSep,
        kFindLeft,
        kAfterCall,
        kTwFindMid,
        kTwParity,
        kTwRecover,
        kTwAfter,
        kUpdate,
        kLSeek,
        kLFindLeft,
        kLAfter,
        kLBack,
        kLNext,
    };
    enum Call : std::uint8_t { kCallC1 = 1, kCallC2, kCallTw, kCallC3, kCallPal };

    static int lang_width(int level) { return lang::lang_params(level).delim_width; }

    int pal_call() const override { return kCallPal; }
    const Fragment &core_of(int call) const override { return call == kCallPal ? pal_ : eq_; }

    static bool is_sep(int tok) { return tok == '$' || tok >= kBd; }
    bool is_high(int tok, int j) const { return tok >= kBd && tok - kBd >= j; }
    int top() const { return kBd + level_; }

    // Format check.  reg: 0 start, 1 first symbol, 2 in a segment, 3 in a
    // bit run (reg2 bits, acc value), 4 after a separator.  t0: top delimiter
    // seen; t1: progress through the closing "$a0a" pattern.
    Act scan(const Ctl &c, char sym) {
        Ctl n = c;
        auto to = [&](int state) {
            n.reg = static_cast<std::uint8_t>(state);
            return go(step_to(n, +1));
        };
        bool ab = sym == 'a' || sym == 'b';
        auto segment_symbol = [&]() {
            if (c.t0 && sym == 'b') return halt(reject());
            n.t1 = static_cast<std::uint8_t>(sym == 'a' && c.t1 == 1 ? 2 : sym == 'a' && c.t1 == 3 ? 4 : 0);
            n.reg2 = 0;
            n.acc = 0;
            return to(2);
        };
        switch (c.reg) {
            case 0: return sym == '<' ? to(1) : halt(reject());
            case 1:
            case 4: return ab ? segment_symbol() : halt(reject());
            case 2:
                if (ab) return segment_symbol();
                if (sym == '$') {
                    if (!c.t0) return halt(reject());
                    n.t1 = 1;
                    return to(4);
                }
                if (sym == '>') {
                    if (c.t0 && c.t1 == 4) return go(step_to(with_phase(c, kRound), 0));
                    return halt(reject());
                }
                [[fallthrough]];
            case 3: {
                if (sym != '0' && sym != '1') return halt(reject());
                int bits = (c.reg == 3 ? c.reg2 : 0) + 1;
                int value = (c.reg == 3 ? c.acc : 0) * 2 + (sym - '0');
                if (bits < c_) {
                    n.reg2 = static_cast<std::uint8_t>(bits);
                    n.acc = static_cast<std::uint16_t>(value);
                    return to(3);
                }
                n.reg2 = 0;
                n.acc = 0;
                if (value == level_) {
                    if (c.t0) return halt(reject());
                    n.t0 = 1;
                } else if (!c.t0) {
                    if (value < 1 || value >= level_) return halt(reject());
                } else if (value != 0) {
                    return halt(reject());
                }
                n.t1 = static_cast<std::uint8_t>(c.t1 == 2 && value == 0 ? 3 : 0);
                return to(4);
            }
            default: return halt(reject());
        }
    }

    Act rest(const Ctl &c, char sym) override {
        Act out;
        if (common_rest(c, sym, out)) return out;
        switch (c.phase) {
            case kScan: return scan(c, sym);
            case kRound: return go(step_to(with_phase(c, kSeekRight), 0));
            case kSeekRight: {
                if (sym != '>') return go(step_to(c, +1));
                Ctl at = with_phase(c, kFindSep);
                at.tok = '>';
                return go(travel(at, -1));
            }
            case kAfterCall: {
                Ctl n = with_phase(c, c.tok == '$' || c.tok == '>' ? kTwFindMid : kUpdate);
                return go(travel(n, -1));
            }
            case kTwAfter: return go(travel(with_phase(c, kUpdate), -1));
            case kLAfter: return go(travel(with_phase(c, kLBack), -1));
            default: return halt(reject());
        }
    }

    Act sweep_done(const Ctl &c) {
        if (level_ > 1) {
            Ctl n = with_phase(c, kLSeek);
            n.j = static_cast<std::uint8_t>(level_);
            return go(travel(n, +1));
        }
        return go(step_to(with_phase(c, kRwRewind), 0));
    }

    Act token(Ctl c, int dir) override {
        int tok = c.tok;
        switch (c.phase) {
            case kFindSep:
                if (tok == '<') return sweep_done(c);
                if (is_ab(tok)) return go(travel(c, dir));
                if (is_sep(tok)) {
                    Ctl n = with_phase(c, kFindLeft);
                    n.reg = tok == '$' ? 2 : 1;
                    return go(travel(n, -1));
                }
                return halt(reject());
            case kFindLeft:
                if (is_ab(tok)) return go(travel(c, dir));
                if (is_sep(tok) || tok == '<') return start_call(c, c.reg == 2 ? kCallC2 : kCallC1, 1);
                return halt(reject());
            case kTwFindMid:
                if (tok == '$') return go(travel(with_phase(c, kTwParity), -1));
                if (tok == '<') return go(travel(with_phase(c, kTwRecover), +1));
                return go(travel(c, dir));
            case kTwParity:
                if (tok >= kBd) {
                    Ctl n = c;
                    n.reg ^= 1;
                    return go(travel(n, dir));
                }
                if (is_ab(tok)) return go(travel(c, dir));
                if (tok == '$' || tok == '<') {
                    if (c.reg == 0) return halt(reject());
                    return start_call(with_phase(c, kTwParity), kCallTw, 1, 0);
                }
                return halt(reject());
            case kTwRecover:
                if (tok == '$' || tok == '>') return go(travel(with_phase(c, kUpdate), -1));
                return go(travel(c, dir));
            case kUpdate:
                if (is_sep(tok)) return go(travel(with_phase(c, kFindSep), -1));
                if (tok == '<') return sweep_done(c);
                return go(travel(c, dir));
            case kLSeek:
                if (tok == top()) return go(travel(with_phase(c, kLFindLeft), -1));
                if (tok == '>') return halt(reject());
                return go(travel(c, dir));
            case kLFindLeft:
                if (is_high(tok, c.j) || tok == '<') return start_call(c, kCallC3, 1);
                return go(travel(c, dir));
            case kLBack:
                if (is_ab(tok)) return go(travel(c, dir));
                if (is_high(tok, c.j)) return go(travel(with_phase(c, kLNext), -1));
                return halt(reject());
            case kLNext:
                if (is_high(tok, c.j)) return go(travel(with_phase(c, kLFindLeft), -1));
                if (tok == '<') {
                    if (c.j > 2) {
                        Ctl n = with_phase(c, kLSeek);
                        --n.j;
                        return go(travel(n, +1));
                    }
                    Ctl n = with_phase(c, kRwRewind);
                    n.j = 0;
                    return go(step_to(n, 0));
                }
                return go(travel(c, dir));
            default: return halt(reject());
        }
    }

    // C1/C2: t0 counts separators from the left signpost (1) through the
    // compared separator (2) to the right signpost (3).
    // TW: t0 counts '$' and endmarkers, t1 is the parity of delimiters seen
    // in the left block.  C3: t0 is 1 before the delimiter D ending the
    // subregion, 2 on D and the ruler segment, 3 on the right signpost.
    V classify(const Ctl &c) const override {
        int tok = c.tok, k = c.t0;
        switch (c.call) {
            case kCallC1:
            case kCallC2: {
                bool dollar = c.call == kCallC2;
                if (k == 1) {
                    if (is_sep(tok) || tok == '<') return V::Left;
                    return tok == 'a' || (!dollar && tok == 'b') ? V::A : V::Skip;
                }
                if (k == 2) {
                    if (is_sep(tok)) return dollar ? V::B : V::Skip;
                    return tok == 'a' || (!dollar && tok == 'b') ? V::B : V::Skip;
                }
                return k == 3 ? V::Right : V::Err;
            }
            case kCallTw:
                if (k == 1) {
                    if (tok == '$' || tok == '<') return V::Left;
                    if (tok >= kBd) return c.t1 == 1 ? V::A : V::Skip;
                    return V::Skip;
                }
                if (k == 2) return (tok == '$' || tok >= kBd) ? V::B : V::Skip;
                return k == 3 ? V::Right : V::Err;
            case kCallC3:
                if (k == 1) {
                    if (is_high(tok, c.j) || tok == '<') return V::Left;
                    return tok == kBd + c.j - 1 ? V::A : V::Skip;
                }
                if (k == 2) {
                    if (is_high(tok, c.j)) return V::A;
                    return is_ab(tok) ? V::B : V::Err;
                }
                return k == 3 ? V::Right : V::Err;
            default:
                if (tok == '<') return V::Left;
                if (tok == 'a') return V::A;
                if (tok == 'b') return V::B;
                if (tok == top()) return V::Right;
                return tok >= kBd ? V::Skip : V::Err;
        }
    }
    void enter(Ctl &c) const override {
        int tok = c.tok;
        switch (c.call) {
            case kCallC1:
            case kCallC2:
                if (is_sep(tok) || tok == '>') ++c.t0;
                break;
            case kCallTw:
                if (tok == '$' || tok == '>') {
                    ++c.t0;
                } else if (tok >= kBd && c.t0 == 1) {
                    c.t1 ^= 1;
                }
                break;
            case kCallC3:
                if ((c.t0 == 1 && is_high(tok, c.j)) || (c.t0 == 2 && (is_sep(tok) || tok == '>'))) ++c.t0;
                break;
            default: break;
        }
    }
    void leave(Ctl &c) const override {
        int tok = c.tok;
        switch (c.call) {
            case kCallC1:
            case kCallC2:
                if (c.t0 > 1 && (is_sep(tok) || tok == '>')) --c.t0;
                break;
            case kCallTw:
                if (tok == '$' || tok == '>') {
                    if (c.t0 > 1) --c.t0;
                } else if (tok >= kBd && c.t0 == 1) {
                    c.t1 ^= 1;
                }
                break;
            case kCallC3:
                if (c.t0 == 3 || (c.t0 == 2 && is_high(tok, c.j))) --c.t0;
                break;
            default: break;
        }
    }
    Succ finished(const Ctl &c) override {
        switch (c.call) {
            case kCallC1:
            case kCallC2: return stay(leave_call(c, kAfterCall));
            case kCallTw: return stay(leave_call(c, kTwAfter));
            case kCallC3: return stay(leave_call(c, kLAfter));
            default: return accept();
        }
    }

    int c_;
};

// ---------------------------------------------------------------------------
// Stand-alone adapters on a whole tape.

int token_id(const std::string &text, int bit_width) {
    if (text.size() == 1 && !(bit_width > 0 && (text[0] == '0' || text[0] == '1'))) {
        return static_cast<unsigned char>(text[0]);
    }
    if (bit_width > 0 && static_cast<int>(text.size()) == bit_width &&
        std::all_of(text.begin(), text.end(), [](char ch) { return ch == '0' || ch == '1'; })) {
        int v = 0;
        for (char ch : text) v = v * 2 + (ch - '0');
        return kBd + v;
    }
    throw Error(ErrorKind::InvalidArgument, "'" + text + "' is not a token of the vocabulary");
}

class AdapterController : public Controller {
   public:
    enum class Mode { Same, Twice, Pal };

    AdapterController(Mode mode, const TokenSets &sets, const Rational &eps, int dim)
        : Controller(sets.alphabet, sets.bit_width, dim), mode_(mode), sets_(sets) {
        if (mode == Mode::Pal) {
            core_ = build_pal_core(eps);
            mid_ = token_id(sets.mid, sets.bit_width);
            return;
        }
        core_ = build_eq_core(eps);
        mid_ = token_id(sets.mid, sets.bit_width);
        for (const auto &t : sets.left) left_.push_back(token_id(t, sets.bit_width));
        for (const auto &t : sets.right) right_.push_back(token_id(t, sets.bit_width));
    }

    Ctl start() const override {
        Ctl c;
        c.phase = mode_ == Mode::Pal ? kRewind : kCheck;
        c.tok = mode_ == Mode::Pal ? -1 : '<';
        return c;
    }
    std::string phase_name(int phase) const override {
        switch (phase) {
            case kCheck: return "check";
            case kRewind: return "rewind";
            default: return "cmp";
        }
    }
    std::string call_name(int) const override { return mode_ == Mode::Pal ? "pal" : "eq"; }

   protected:
    enum Phase : std::uint8_t { kCheck = 1, kRewind, kCompare };

    bool in(const std::vector<int> &set, int tok) const { return std::find(set.begin(), set.end(), tok) != set.end(); }

    const Fragment &core_of(int) const override { return core_; }

    // Pre-scan: `mid` occurs exactly once (reg), parity of left tokens (reg2).
    Act rest(const Ctl &c, char sym) override {
        if (c.phase == kCheck) return go(travel(c, +1));
        if (sym != '<') return go(step_to(c, -1));
        Ctl at = c;
        at.phase = kCompare;
        at.reg = at.reg2 = 0;
        at.tok = '<';
        return start_call(at, 1);
    }
    Act token(Ctl c, int dir) override {
        int tok = c.tok;
        if (tok == '>') {
            if (c.reg != 1 || (mode_ == Mode::Twice && c.reg2 != 0)) return halt(reject());
            Ctl n = c;
            n.phase = kRewind;
            return go(step_to(n, 0));
        }
        if (tok == mid_) {
            if (c.reg == 1) return halt(reject());
            c.reg = 1;
        } else if (c.reg == 0 && in(left_, tok)) {
            c.reg2 ^= 1;
        }
        return go(travel(c, dir));
    }

    // t0: 0 before mid, 1 from mid on; t1: parity of left tokens entered.
    V classify(const Ctl &c) const override {
        int tok = c.tok;
        if (tok == '<') return V::Left;
        if (mode_ == Mode::Pal) {
            if (tok == mid_) return V::Right;
            if (tok == 'a') return V::A;
            if (tok == 'b') return V::B;
            return tok == '>' ? V::Err : V::Skip;
        }
        if (tok == '>') return V::Right;
        if (c.t0 == 0) {
            if (!in(left_, tok)) return V::Skip;
            if (mode_ == Mode::Twice) return c.t1 == 0 ? V::A : V::Skip;
            return V::A;
        }
        if (tok == mid_) return sets_.right_includes_mid && in(right_, tok) ? V::B : V::Skip;
        return in(right_, tok) ? V::B : V::Skip;
    }
    void enter(Ctl &c) const override {
        if (mode_ == Mode::Pal) return;
        if (c.tok == mid_) c.t0 = 1;
        if (c.t0 == 0 && in(left_, c.tok)) c.t1 ^= 1;
    }
    void leave(Ctl &c) const override {
        if (mode_ == Mode::Pal) return;
        if (c.t0 == 0 && in(left_, c.tok)) c.t1 ^= 1;
        if (c.tok == mid_) c.t0 = 0;
    }
    Succ finished(const Ctl &) override { return accept(); }

   private:
    Mode mode_;
    TokenSets sets_;
    Fragment core_;
    int mid_ = -1;
    std::vector<int> left_, right_;
};

nlohmann::json template_metadata(const char *name, int level, const Rational &eps, int k_eps) {
    nlohmann::json m;
    m["builder"] = name;
    m["level"] = level;
    m["epsilon"] = eps.str();
    m["k_eps"] = k_eps;
    m["k_eq"] = eq_coins(eps);
    m["j"] = pal_sweeps(eps);
    m["round_marker"] = "m.round";
    return m;
}

void check_level(int level) {
    if (level < 1 || level > 6) throw Error(ErrorKind::InvalidLevel, "template level must be in [1, 6]");
}

}  // namespace

MachineSpec compile_rpal(int level, const Rational &eps, int k_eps) {
    check_level(level);
    if (k_eps < 0) throw Error(ErrorKind::InvalidArgument, "k_eps must be >= 0");
    RpalController c(level, eps, k_eps);
    return tabulate(c, template_metadata("rpal", level, eps, k_eps));
}

MachineSpec compile_pppal(int level, const Rational &eps, int k_eps) {
    check_level(level);
    if (k_eps < 0) throw Error(ErrorKind::InvalidArgument, "k_eps must be >= 0");
    PppalController c(level, eps, k_eps);
    return tabulate(c, template_metadata("pppal", level, eps, k_eps));
}

std::vector<double> round_rewards(const MachineSpec &spec) {
    std::vector<double> r(spec.states.size(), 0.0);
    for (std::size_t s = 0; s < spec.states.size(); ++s) {
        if (spec.states[s].rfind("m.round", 0) == 0) r[s] = 1.0;
    }
    return r;
}

namespace {

Fragment adapter(AdapterController::Mode mode, const TokenSets &sets, const Rational &eps, const char *name) {
    AdapterController c(mode, sets, eps, mode == AdapterController::Mode::Pal ? 4 : 2);
    nlohmann::json m;
    m["builder"] = name;
    m["epsilon"] = eps.str();
    m["accept_alias"] = mode == AdapterController::Mode::Pal ? "accept" : "continue";
    MachineSpec spec = tabulate(c, m);
    std::string entry = spec.states[static_cast<std::size_t>(spec.q0)];
    std::map<std::string, std::string> exits{{"reject", "rej"}};
    exits[mode == AdapterController::Mode::Pal ? "accept" : "continue"] = "acc";
    return Fragment{std::move(spec), entry, exits};
}

}  // namespace

Fragment build_same_length(const TokenSets &sets, const Rational &eps) {
    return adapter(AdapterController::Mode::Same, sets, eps, "same_length");
}

Fragment build_twice_as_long(const TokenSets &sets, const Rational &eps) {
    return adapter(AdapterController::Mode::Twice, sets, eps, "twice_as_long");
}

Fragment build_pal_check(const std::string &delimiter, const std::string &alphabet, int bit_width,
                         const Rational &eps) {
    TokenSets sets;
    sets.alphabet = alphabet;
    sets.bit_width = bit_width;
    sets.mid = delimiter;
    for (char ch : delimiter) {
        if (alphabet.find(ch) == std::string::npos) {
            throw Error(ErrorKind::InvalidArgument, "delimiter '" + delimiter + "' uses symbols outside the alphabet");
        }
    }
    return adapter(AdapterController::Mode::Pal, sets, eps, "pal_check");
}

}  // namespace qcfa::builders
