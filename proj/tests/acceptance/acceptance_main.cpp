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


// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.  Oracles here are written independently of the library
// (regexes, integer arithmetic, dense linear algebra) wherever possible.

#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <cmath>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <regex>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "qcfa/builders.hpp"
#include "qcfa/cli.hpp"
#include "qcfa/engines.hpp"
#include "qcfa/langkit.hpp"
#include "qcfa/machine.hpp"

using namespace qcfa;
using builders::Rational;
using machine::Kind;
using machine::MachineSpec;
using machine::SpecBuilder;
using machine::Transition;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Check {
    bool ok = true;
    std::ostringstream notes;
    int failures = 0;

    void expect(bool cond, const std::string &what) {
        if (cond) return;
        ok = false;
        if (failures++ < 5) notes << " [" << what << "]";
    }
};

std::vector<std::string> words(int len) {
    std::vector<std::string> out;
    for (int bits = 0; bits < (1 << len); ++bits) {
        std::string w;
        for (int p = 0; p < len; ++p) w.push_back((bits >> p) & 1 ? 'b' : 'a');
        out.push_back(w);
    }
    return out;
}

bool palindrome(const std::string &w) { return std::equal(w.begin(), w.end(), w.rbegin()); }

std::vector<std::string> palindromes(int len) {
    std::vector<std::string> out;
    for (auto &w : words(len)) {
        if (palindrome(w)) out.push_back(w);
    }
    return out;
}

std::uint64_t ipow(std::uint64_t b, int e) {
    std::uint64_t r = 1;
    while (e-- > 0) r *= b;
    return r;
}

// ceil(log2(i + 1)) by doubling.
int delimiter_width(int i) {
    int c = 0;
    while ((1 << c) < i + 1) ++c;
    return c;
}

// Smallest m > 1 with m^(i-1) < 2^m from m onwards; past i*i the ratio
// 2^m / m^(i-1) is increasing, so a finite window decides it.
int least_segment(int i) {
    int window = std::max(i * i, 64);
    int best = window + 1;
    for (int m = window; m >= 2; --m) {
        if (std::pow(double(m), i - 1) < std::pow(2.0, m)) {
            best = m;
        } else {
            break;
        }
    }
    return best;
}

// RL_i membership straight from the recursive definition.
bool in_rl(int i, const std::string &s) {
    if (i == 0) return s.size() >= 2 && s.find_first_not_of("ab") == std::string::npos;
    std::size_t cut = s.rfind('$');
    if (cut == std::string::npos) return false;
    std::string left = s.substr(0, cut);
    std::string right = s.substr(cut + 1);
    std::string want = "1";
    for (std::size_t k = 1; k < left.size(); ++k) want += std::string(left.size(), 'a') + "1";
    return right == want && in_rl(i - 1, left);
}

// Number of maximal runs of a/b symbols.
std::uint64_t segment_runs(const std::string &s) {
    std::uint64_t runs = 0;
    bool inside = false;
    for (char c : s) {
        bool ab = c == 'a' || c == 'b';
        if (ab && !inside) ++runs;
        inside = ab;
    }
    return runs;
}

std::uint64_t digit_code(const std::string &w) {
    std::uint64_t e = 0, place = 1;
    for (char c : w) {
        e += place * (c == 'a' ? 1u : 2u);
        place *= 4;
    }
    return e;
}

std::string line(int n, const Check &c, const std::string &what, double secs) {
    std::ostringstream o;
    o << "criterion " << n << ": " << (c.ok ? "PASS" : "FAIL") << " - " << what;
    o.setf(std::ios::fixed);
    o.precision(2);
    o << " (" << secs << " s)" << c.notes.str();
    return o.str();
}

// ---------------------------------------------------------------------------

Check criterion1(double &elapsed) {
    Check c;
    auto t0 = Clock::now();
    for (int k = 0; k <= 2; ++k) {
        MachineSpec gate = builders::build_rw_gate(k).spec;
        for (int n = 0; n <= 10; ++n) {
            std::string w(static_cast<std::size_t>(n), n % 2 ? 'a' : 'b');
            double p = engines::solve_exact(gate, w).p_accept;
            double want = 1.0 / (double(1 << k) * (n + 1));
            c.expect(std::abs(p - want) <= 1e-9, "k=" + std::to_string(k) + " n=" + std::to_string(n));
        }
    }
    elapsed = seconds_since(t0);
    c.expect(elapsed < 1.0, "runtime");
    return c;
}

Check criterion2() {
    Check c;
    Rational eps = Rational::parse("1/5");
    int k = builders::default_k_eps(eps);
    MachineSpec rpal = builders::compile_rpal(1, eps, k);
    int count = 0;
    for (int len = 2; len * len + len + 1 <= 57; ++len) {
        for (const auto &w : words(len)) {
            std::string s = lang::build_rl(1, w);
            if (!lang::is_member(lang::Family::RPAL, 1, s)) continue;
            c.expect(palindrome(w) && in_rl(1, s), "oracle " + s);
            double p = engines::solve_exact(rpal, s).p_accept;
            c.expect(std::abs(p - 1.0) <= 1e-8, "rpal " + s);
            ++count;
        }
    }
    int want = 0;
    for (int len = 2; len <= 7; ++len) want += 1 << ((len + 1) / 2);
    c.expect(count == want, "member count");
    MachineSpec pppal = builders::compile_pppal(1, eps, k);
    for (int m : {2, 3}) {
        for (const auto &p : palindromes(m)) {
            std::string s = lang::build_pppal(lang::lang_params(1), p);
            c.expect(s.size() == (m == 2 ? 15u : 47u), "length");
            c.expect(lang::is_member(lang::Family::PPPAL, 1, s), "member " + s);
            double pa = engines::solve_exact(pppal, s).p_accept;
            c.expect(std::abs(pa - 1.0) <= 1e-8, "pppal " + s);
        }
    }
    c.notes << " rpal members=" << count;
    return c;
}

// Structured negative corpus.
struct Negative {
    builders::Template tmpl;
    int level;
    std::string s;
};

std::map<std::string, std::vector<Negative>> negative_corpus() {
    using builders::Template;
    std::map<std::string, std::vector<Negative>> corpus;
    const std::regex rpal_shape("[ab][ab]+(\\$1(a+1)+)+");
    auto keep = [&](const std::string &cls, Template t, int level, const std::string &s) {
        lang::Family f = t == Template::Rpal ? lang::Family::RPAL : lang::Family::PPPAL;
        if (lang::is_member(f, level, s)) return;
        auto &v = corpus[cls];
        for (const auto &e : v) {
            if (e.s == s && e.tmpl == t) return;
        }
        v.push_back({t, level, s});
    };

    // Regex violations: single edits of RPAL_1 members that leave the shape.
    const std::string sigma = "ab1$";
    for (int len = 2; len <= 4; ++len) {
        for (const auto &w : palindromes(len)) {
            std::string s = lang::build_rl(1, w);
            for (std::size_t p = 0; p < s.size(); ++p) {
                for (char ch : sigma) {
                    std::string sub = s;
                    sub[p] = ch;
                    std::string ins = s;
                    ins.insert(ins.begin() + static_cast<std::ptrdiff_t>(p), ch);
                    for (const auto &u : {sub, ins}) {
                        if (!std::regex_match(u, rpal_shape)) keep("regex", Template::Rpal, 1, u);
                    }
                }
                std::string del = s;
                del.erase(p, 1);
                if (!std::regex_match(del, rpal_shape)) keep("regex", Template::Rpal, 1, del);
            }
        }
    }

    // Segment-length defects: one a/b run made one symbol longer or shorter.
    auto run_edits = [&](const std::string &cls, Template t, int level, const std::string &s) {
        for (std::size_t p = 0; p < s.size(); ++p) {
            bool starts = (s[p] == 'a' || s[p] == 'b') && (p == 0 || (s[p - 1] != 'a' && s[p - 1] != 'b'));
            if (!starts) continue;
            std::string longer = s;
            longer.insert(longer.begin() + static_cast<std::ptrdiff_t>(p), 'a');
            keep(cls, t, level, longer);
            std::size_t end = p;
            while (end < s.size() && (s[end] == 'a' || s[end] == 'b')) ++end;
            if (end - p > 1) {
                std::string shorter = s;
                shorter.erase(p, 1);
                keep(cls, t, level, shorter);
            }
        }
    };
    for (int m : {2, 3}) {
        for (const auto &p : palindromes(m)) {
            run_edits("segment-length", Template::Pppal, 1, lang::build_pppal(lang::lang_params(1), p));
        }
    }
    for (int len = 2; len <= 4; ++len) {
        for (const auto &w : palindromes(len)) {
            std::string s = lang::build_rl(1, w);
            std::size_t cut = s.find('$');
            std::string tail = s.substr(cut);
            for (std::size_t p = 2; p < tail.size(); ++p) {
                if (tail[p] == 'a' && tail[p - 1] == '1') {
                    std::string longer = tail;
                    longer.insert(longer.begin() + static_cast<std::ptrdiff_t>(p), 'a');
                    keep("segment-length", Template::Rpal, 1, w + longer);
                    std::string shorter = tail;
                    if (w.size() > 1) {
                        shorter.erase(p, 1);
                        keep("segment-length", Template::Rpal, 1, w + shorter);
                    }
                }
            }
        }
    }

    // Block-count defects: a segment or a block too many or too few.
    for (int len = 2; len <= 6; ++len) {
        for (const auto &w : palindromes(len)) {
            std::string s = lang::build_rl(1, w);
            std::string seg = std::string(w.size(), 'a') + "1";
            keep("block-count", Template::Rpal, 1, s + seg);
            if (w.size() > 2) keep("block-count", Template::Rpal, 1, s.substr(0, s.size() - seg.size()));
        }
    }
    for (int len = 2; len <= 3; ++len) {
        for (const auto &w : palindromes(len)) {
            keep("block-count", Template::Rpal, 1, lang::build_rl(2, w));
            std::string s = lang::build_rl(1, w);
            keep("block-count", Template::Rpal, 1, s + s.substr(s.find('$')));
        }
    }
    for (int m : {2, 3}) {
        for (const auto &p : palindromes(m)) {
            std::string s = lang::build_pppal(lang::lang_params(1), p);
            std::size_t first = s.find('$');
            std::size_t second = s.find('$', first + 1);
            if (second != std::string::npos) keep("block-count", Template::Pppal, 1, s.substr(0, first) + s.substr(second));
            keep("block-count", Template::Pppal, 1, s.substr(0, first) + s.substr(first, second - first) + s.substr(first));
        }
    }

    // Well-ordering defects: PPPAL_2 strings whose delimiter order is
    // permuted, and PPPAL_3 strings with a level-2 delimiter moved by one slot.
    auto delimiter_slots = [](const lang::LangParams &params, int m) {
        std::vector<std::size_t> slots;
        std::size_t pos = 0;
        for (std::uint64_t k = 0; k < ipow(std::uint64_t(m), params.level - 1); ++k) {
            pos += static_cast<std::size_t>(m);
            slots.push_back(pos);
            pos += static_cast<std::size_t>(params.delim_width);
        }
        return slots;
    };
    lang::LangParams p2 = lang::lang_params(2);
    const auto w2 = static_cast<std::size_t>(p2.delim_width);
    for (int m : {p2.min_segment, p2.min_segment + 1}) {
        for (const auto &p : palindromes(m * m)) {
            std::string s = lang::build_pppal(p2, p);
            auto slots = delimiter_slots(p2, m);
            std::vector<std::string> delims;
            for (auto at : slots) delims.push_back(s.substr(at, w2));
            std::vector<std::string> order = delims;
            std::sort(order.begin(), order.end());
            do {
                if (order == delims) continue;
                std::string u = s;
                for (std::size_t k = 0; k < slots.size(); ++k) u.replace(slots[k], w2, order[k]);
                keep("well-ordering", Template::Pppal, 2, u);
            } while (std::next_permutation(order.begin(), order.end()));
        }
    }
    lang::LangParams p3 = lang::lang_params(3);
    const int m3 = p3.min_segment;
    const auto w3 = static_cast<std::size_t>(p3.delim_width);
    const std::string two = lang::cbin(p3, 2);
    std::mt19937_64 rng(31);
    for (int t = 0; t < 5; ++t) {
        std::string half(ipow(std::uint64_t(m3), 3) / 2, 'a');
        for (auto &ch : half) ch = rng() % 2 ? 'a' : 'b';
        std::string p = half + "a" + std::string(half.rbegin(), half.rend());
        std::string s = lang::build_pppal(p3, p);
        auto slots = delimiter_slots(p3, m3);
        for (std::size_t k = 0; k + 1 < slots.size(); ++k) {
            if (s.substr(slots[k], w3) != two) continue;
            for (std::size_t other : {k - 1, k + 1}) {
                std::string u = s;
                std::string a = u.substr(slots[k], w3), b = u.substr(slots[other], w3);
                u.replace(slots[k], w3, b);
                u.replace(slots[other], w3, a);
                keep("well-ordering", Template::Pppal, 3, u);
            }
        }
    }

    // Nonpalindromic first blocks in otherwise well-formed strings.
    for (int len = 2; len <= 5; ++len) {
        for (const auto &w : words(len)) {
            if (!palindrome(w)) keep("nonpalindromic", Template::Rpal, 1, lang::build_rl(1, w));
        }
    }
    for (int m : {2, 3}) {
        for (const auto &p : words(m)) {
            if (!palindrome(p)) keep("nonpalindromic", Template::Pppal, 1, lang::build_pppal(lang::lang_params(1), p));
        }
    }
    for (const auto &p : words(p2.min_segment * p2.min_segment)) {
        if (!palindrome(p)) keep("nonpalindromic", Template::Pppal, 2, lang::build_pppal(p2, p));
    }
    return corpus;
}

Check criterion3() {
    Check c;
    const std::regex rpal_shape("[ab][ab]+(\\$1(a+1)+)+");
    Rational eps = Rational::parse("1/5");
    auto corpus = negative_corpus();
    std::uint64_t seed = 1000;
    double worst = 0.0;
    for (const auto &[cls, items] : corpus) {
        c.expect(items.size() >= 50, cls + " has " + std::to_string(items.size()) + " strings");
        int deterministic = 0;
        for (const auto &neg : items) {
            builders::InterpretOptions o;
            o.tmpl = neg.tmpl;
            o.level = neg.level;
            o.eps = eps;
            o.mode = builders::KernelMode::Exact;
            auto r = builders::interpret_estimate(o, neg.s, 10'000, seed++);
            auto ci = engines::wilson_interval(r.accepts, r.trials, 0.95);
            double exact = builders::interpret_exact(o, neg.s);
            worst = std::max(worst, r.p_hat);
            bool caught_at_format = !builders::plan_run(o, neg.s).format_ok;
            if (cls == "regex") {
                c.expect(!std::regex_match(neg.s, rpal_shape) && caught_at_format, "regex class " + neg.s);
            }
            if (caught_at_format) {
                ++deterministic;
                c.expect(r.accepts == 0 && exact == 0.0, cls + " nonzero at format stage " + neg.s);
            } else {
                c.expect(ci.lo <= 0.2, cls + " " + neg.s);
                c.expect(exact <= 0.2 + 1e-8, cls + " exact " + neg.s);
            }
        }
        c.notes << " " << cls << "=" << items.size() << "/" << deterministic << "R";
    }
    c.expect(corpus.size() == 5, "class count");
    c.notes << " max p_hat=" << worst;
    return c;
}

Check criterion4(double &elapsed) {
    Check c;
    auto t0 = Clock::now();
    std::uint64_t k = 2;
    for (std::uint64_t want : {7u, 57u, 3307u}) {
        std::uint64_t next = k * k + k + 1;
        c.expect(next == want && lang::srel_next_len(k) == want, "srel " + std::to_string(want));
        k = next;
    }
    std::string w = "ab";
    for (int i = 1; i <= 3; ++i) c.expect(lang::build_rl(i, w).size() == std::vector<std::size_t>{7, 57, 3307}[i - 1], "rl length");

    for (int m = 2; m <= 10; ++m) {
        std::uint64_t want = std::uint64_t(m) * (std::uint64_t{1} << (m + 1)) - 1;
        c.expect(lang::total_length(lang::lang_params(1), m) == want, "total_length m=" + std::to_string(m));
    }
    for (int i = 1; i <= 3; ++i) {
        lang::LangParams params = lang::lang_params(i);
        int ci = delimiter_width(i);
        int mi = least_segment(i);
        c.expect(params.delim_width == ci && params.min_segment == mi, "parameters i=" + std::to_string(i));
        for (int m = mi; m <= mi + 1; ++m) {
            std::uint64_t two = std::uint64_t{1} << (m + 1), mm = std::uint64_t(m);
            std::uint64_t want = (mm - 1) * two + std::uint64_t(ci) * (two - mm - 2) + mm + 1;
            std::string s = lang::build_pppal(params, std::string(ipow(mm, i), 'a'));
            c.expect(s.size() == want && lang::total_length(params, m) == want,
                     "pad length i=" + std::to_string(i) + " m=" + std::to_string(m));
            c.expect(segment_runs(s) == two - 2, "segments i=" + std::to_string(i) + " m=" + std::to_string(m));
            auto census = lang::census(params, s);
            c.expect(census.segments == two - 2 && census.binary_delimiters == two - mm - 2, "census");
        }
    }
    for (int m = 2; m <= 10; ++m) {
        std::string s = lang::build_pppal(lang::lang_params(1), std::string(std::size_t(m), 'b'));
        c.expect(segment_runs(s) == (std::uint64_t{1} << (m + 1)) - 2, "segments i=1 m=" + std::to_string(m));
    }

    // Well-ordered uniqueness over every (i, m) with m^(i-1) <= 10^4.
    std::mt19937_64 rng(2026);
    std::uint64_t samples = 0, exhausted = 0, pairs = 0;
    for (int i = 2;; ++i) {
        lang::LangParams params = lang::lang_params(i);
        int m0 = params.min_segment;
        if (ipow(std::uint64_t(m0), i - 1) > 10'000) break;
        for (int m = m0; ipow(std::uint64_t(m), i - 1) <= 10'000; ++m) {
            ++pairs;
            std::uint64_t len = ipow(std::uint64_t(m), i - 1);
            lang::DelimiterSeq want = lang::well_ordered_sequence(params, m);
            c.expect(want.entries.size() == len && lang::is_well_ordered(params, m, want), "generated");
            for (int j = 1; j <= i; ++j) {
                c.expect(lang::sumdel(want, j) == ipow(std::uint64_t(m), i - j), "sumdel");
            }
            double space = std::pow(double(i), double(len));
            if (space <= 10'000) {
                ++exhausted;
                lang::DelimiterSeq cand{std::vector<int>(len, 1)};
                for (std::uint64_t code = 0; code < std::uint64_t(space); ++code) {
                    std::uint64_t r = code;
                    for (auto &e : cand.entries) {
                        e = int(r % std::uint64_t(i)) + 1;
                        r /= std::uint64_t(i);
                    }
                    c.expect(lang::is_well_ordered(params, m, cand) == (cand == want), "exhaustive");
                }
            }
            std::uint64_t budget = std::max<std::uint64_t>(10, 120'000 / len);
            for (std::uint64_t t = 0; t < budget; ++t) {
                lang::DelimiterSeq cand = want;
                int edits = 1 + int(rng() % 3);
                for (int e = 0; e < edits; ++e) {
                    std::size_t a = rng() % len;
                    if (rng() % 2) {
                        cand.entries[a] = int(rng() % std::uint64_t(i)) + 1;
                    } else {
                        std::swap(cand.entries[a], cand.entries[rng() % len]);
                    }
                }
                if (t % 8 == 0) {
                    for (auto &e : cand.entries) e = int(rng() % std::uint64_t(i)) + 1;
                }
                c.expect(lang::is_well_ordered(params, m, cand) == (cand == want), "sample");
                ++samples;
            }
        }
    }
    c.expect(samples >= 1'000'000, "sample budget");
    elapsed = seconds_since(t0);
    c.expect(elapsed < 60.0, "runtime");
    c.notes << " pairs=" << pairs << " exhausted=" << exhausted << " samples=" << samples;
    return c;
}

Check criterion5() {
    Check c;
    std::mt19937_64 rng(5);
    std::uint64_t members = 0;
    for (int i = 1; i <= 3; ++i) {
        for (std::size_t len = 2;; ++len) {
            std::uint64_t n = len;
            for (int l = 0; l < i; ++l) n = n * n + n + 1;
            if (n > 4096) break;
            std::vector<std::string> ws;
            if (len <= 12) {
                ws = words(int(len));
            } else {
                for (int t = 0; t < 64; ++t) {
                    std::string w;
                    for (std::size_t k = 0; k < len; ++k) w.push_back(rng() % 2 ? 'a' : 'b');
                    ws.push_back(w);
                }
            }
            for (const auto &w : ws) {
                std::string s = lang::build_rl(i, w);
                c.expect(in_rl(i, s) && s.size() == n, "rl oracle");
                std::string s0 = s.substr(0, s.find('$'));
                c.expect(ipow(s0.size(), 1 << i) < s.size(), "first-block bound i=" + std::to_string(i));
                ++members;
            }
        }
    }
    std::uint64_t patterns = 0;
    for (int i = 1; i <= 3; ++i) {
        lang::LangParams params = lang::lang_params(i);
        for (int m = params.min_segment; lang::total_length(params, m) <= (1u << 22); ++m) {
            for (int t = 0; t < 4; ++t) {
                std::string p(ipow(std::uint64_t(m), i), 'a');
                for (auto &ch : p) ch = rng() % 2 ? 'a' : 'b';
                std::string s = lang::build_pppal(params, p);
                std::size_t lead = s.find_first_not_of("ab");
                c.expect(lead == std::size_t(m) && lang::segl(s) == m, "leading segment");
                c.expect((std::uint64_t{1} << m) < s.size(), "segment bound i=" + std::to_string(i));
                ++patterns;
            }
        }
    }
    c.notes << " rl strings=" << members << " pppal patterns=" << patterns;
    return c;
}

Check criterion6() {
    Check c;
    MachineSpec pal = builders::build_pal_core(Rational::parse("1/5")).spec;
    int pass = pal.state_index("pal.pass");
    auto go_op = [&](char sym) {
        const auto &e = pal.entry(pass, pal.symbol_index(sym));
        const auto &ch = pal.pool[std::size_t(e.channel)];
        return ch.branches()[std::size_t(ch.find_label("go"))].op;
    };
    qk::Matrix ga = go_op('a'), gb = go_op('b');
    std::uint64_t checked = 0;
    for (int len = 0; len <= 10; ++len) {
        double scale = std::pow(8.0, -len);
        for (const auto &w : words(len)) {
            std::string rev(w.rbegin(), w.rend());
            double y = double(digit_code(rev)) * scale, z = double(digit_code(w)) * scale;
            // Operator product on the unnormalized start (1, 1, 0, 0).
            qk::Vector v = qk::Vector::Zero(4);
            v(0) = v(1) = 1.0;
            for (char ch : w) v = (ch == 'a' ? ga : gb) * v;
            c.expect(std::abs(v(2) - y) <= 1e-10 && std::abs(v(3) - z) <= 1e-10, "product " + w);
            c.expect(((v(2) - v(3)) == qk::cplx(0.0)) == palindrome(w), "diff " + w);

            // The same pass driven through the machine's step semantics.
            machine::Configuration cfg{pal.q0, 0, pal.start_register()};
            double mass = 1.0;
            bool clean = true;
            for (int cell = 0; cell <= len && clean; ++cell) {
                auto step = machine::step_distribution(pal, cfg, w);
                const machine::Successor *next = nullptr;
                for (const auto &s : step.successors) {
                    if (!s.verdict && s.config.head == cell + 1) next = &s;
                }
                if (!next) {
                    clean = false;
                    break;
                }
                mass *= next->probability;
                cfg = next->config;
            }
            c.expect(clean, "pass " + w);
            if (!clean) continue;
            qk::Vector raw = std::sqrt(2.0 * mass) * cfg.reg;
            c.expect(std::abs(raw(2) - y) <= 1e-10 && std::abs(raw(3) - z) <= 1e-10, "machine " + w);
            ++checked;
        }
    }
    c.notes << " words=" << checked;
    return c;
}

// Small hand-built machines for the zoo.
MachineSpec scanner() {
    SpecBuilder b(Kind::Classical, "ab", 1);
    int s = b.state("scan");
    b.set_halting("acc", "rej");
    b.set_start("scan");
    int id = b.channel(qk::identity_channel(1));
    int acc = b.state("acc");
    for (char ch : std::string("<ab")) b.set(s, ch, id, std::vector<Transition>{{s, 1}});
    b.set(s, '>', id, std::vector<Transition>{{acc, 0}});
    return b.finish();
}

MachineSpec coin_parity() {
    SpecBuilder b(Kind::Classical, "ab", 1);
    int even = b.state("even"), odd = b.state("odd");
    b.set_halting("acc", "rej");
    b.set_start("even");
    int acc = b.state("acc"), rej = b.state("rej");
    int id = b.channel(qk::identity_channel(1));
    int coin = b.channel(qk::coin_channel(1));
    b.set(even, '<', id, std::vector<Transition>{{even, 1}});
    b.set(odd, '<', id, std::vector<Transition>{{odd, 1}});
    for (char ch : std::string("ab")) {
        b.set(even, ch, coin, std::vector<Transition>{{even, 1}, {odd, 1}});
        b.set(odd, ch, ch == 'a' ? coin : id,
              ch == 'a' ? std::vector<Transition>{{odd, 1}, {even, 1}} : std::vector<Transition>{{odd, 1}});
    }
    b.set(even, '>', id, std::vector<Transition>{{acc, 0}});
    b.set(odd, '>', id, std::vector<Transition>{{rej, 0}});
    return b.finish();
}

// Rotates by +theta on a and -theta on b, measures once at the right end.
MachineSpec rotate_measure(double theta) {
    SpecBuilder b(Kind::QuantumClassical, "ab", 2);
    int s = b.state("rot");
    b.set_halting("acc", "rej");
    b.set_start("rot");
    int acc = b.state("acc"), rej = b.state("rej");
    int id = b.channel(qk::identity_channel(2));
    int plus = b.channel(qk::rotation_channel("rot+", theta));
    int minus = b.channel(qk::rotation_channel("rot-", -theta));
    qk::Matrix p0 = qk::Matrix::Zero(2, 2), p1 = qk::Matrix::Zero(2, 2);
    p0(0, 0) = 1.0;
    p1(1, 1) = 1.0;
    int meas = b.channel(qk::projective_channel("meas", {"m0", "m1"}, {p0, p1}));
    b.set(s, '<', id, std::vector<Transition>{{s, 1}});
    b.set(s, 'a', plus, std::vector<Transition>{{s, 1}});
    b.set(s, 'b', minus, std::vector<Transition>{{s, 1}});
    b.set(s, '>', meas, std::vector<Transition>{{acc, 0}, {rej, 0}});
    return b.finish();
}

// Repeats rotate-and-measure rounds: outcome 1 rejects, outcome 0 accepts
// on a fair coin and otherwise restarts from a fresh register.
MachineSpec rotate_retry(double theta) {
    SpecBuilder b(Kind::QuantumClassical, "ab", 2);
    int reset = b.state("reset"), rot = b.state("rot"), back = b.state("back"), toss = b.state("toss");
    b.set_halting("acc", "rej");
    b.set_start("reset");
    int acc = b.state("acc"), rej = b.state("rej");
    int id = b.channel(qk::identity_channel(2));
    int coin = b.channel(qk::coin_channel(2));
    int rs = b.channel(qk::reset_channel("reset", qk::Vector::Unit(2, 0)));
    int plus = b.channel(qk::rotation_channel("rot+", theta));
    qk::Matrix p0 = qk::Matrix::Zero(2, 2), p1 = qk::Matrix::Zero(2, 2);
    p0(0, 0) = 1.0;
    p1(1, 1) = 1.0;
    int meas = b.channel(qk::projective_channel("meas", {"m0", "m1"}, {p0, p1}));
    b.set(reset, '<', rs, std::vector<Transition>(2, {rot, 1}));
    for (char ch : std::string("ab>")) b.set(reset, ch, id, std::vector<Transition>{{reset, -1}});
    b.set(rot, '<', id, std::vector<Transition>{{rot, 1}});
    b.set(rot, 'a', plus, std::vector<Transition>{{rot, 1}});
    b.set(rot, 'b', id, std::vector<Transition>{{rot, 1}});
    b.set(rot, '>', meas, std::vector<Transition>{{toss, 0}, {rej, 0}});
    b.set(toss, '>', coin, std::vector<Transition>{{acc, 0}, {back, -1}});
    for (char ch : std::string("<ab")) b.set(toss, ch, id, std::vector<Transition>{{rej, 0}});
    b.set(back, '<', id, std::vector<Transition>{{reset, 0}});
    for (char ch : std::string("ab>")) b.set(back, ch, id, std::vector<Transition>{{back, -1}});
    return b.finish();
}

struct ZooCase {
    std::string name;
    MachineSpec spec;
    std::vector<std::string> inputs;
};

std::vector<ZooCase> zoo() {
    Rational third = Rational::parse("1/3"), fifth = Rational::parse("1/5");
    builders::TokenSets sets;
    sets.alphabet = "a$";
    sets.left = {"a"};
    sets.right = {"a"};
    sets.mid = "$";
    std::vector<ZooCase> z;
    z.push_back({"scanner", scanner(), {"", "a", "ab", "bab", "abba"}});
    z.push_back({"coin-parity", coin_parity(), {"", "a", "b", "ab", "bbab"}});
    for (int k = 0; k <= 2; ++k) {
        z.push_back({"rw-gate-k" + std::to_string(k), builders::build_rw_gate(k).spec, {"", "a", "ab", "abab", "aaaaaaaa"}});
    }
    z.push_back({"rotate-measure", rotate_measure(0.7), {"", "a", "ab", "aab", "bbbab"}});
    z.push_back({"rotate-retry", rotate_retry(0.9), {"", "a", "b", "aa", "aba"}});
    z.push_back({"eq-core-1/3", builders::build_eq_core(third).spec, {"", "a", "ab", "aab", "abbb"}});
    z.push_back({"eq-core-1/5", builders::build_eq_core(fifth).spec, {"", "b", "ba", "abb", "aaab"}});
    z.push_back({"pal-core-1sweep", builders::build_pal_core(third, 1).spec, {"", "a", "ab", "ba", "abb"}});
    z.push_back({"same-length", builders::build_same_length(sets, third).spec, {"$", "a$a", "aa$a", "a$", "aaa"}});
    z.push_back({"twice-as-long", builders::build_twice_as_long(sets, third).spec, {"$", "aa$a", "a$a", "aa$", "aaaa$a"}});
    z.push_back({"pal-check", builders::build_pal_check("$", "ab$", 0, third).spec, {"$", "ab", "$a$", "ab$", "bab"}});
    z.push_back({"rpal-1", builders::compile_rpal(1, third, 0), {"aab", "a$1a1", "aa$1aaa1", "ba$1aa1aa1", "aa$1aa1$1a1"}});
    z.push_back({"pppal-1", builders::compile_pppal(1, third, 0),
                 {"ab", "aa1aa0aa0aa$a0", "aa1aa0aa0aa0aa$a0a", "aa1aa0aa0aa$a0a0", "aa1aa0aa0aa$$a0a"}});
    return z;
}

Check criterion7() {
    Check c;
    auto machines = zoo();
    std::uint64_t seed = 77;
    int cases = 0;
    double total_steps = 0;
    for (const auto &zc : machines) {
        c.expect(machine::validate_spec(zc.spec).pass, "invalid " + zc.name);
        for (const auto &in : zc.inputs) {
            auto exact = engines::solve_exact(zc.spec, in);
            if (std::getenv("QCFA_ZOO_STEPS")) {
                std::cerr << zc.name << " '" << in << "' " << exact.expected_steps << "\n";
                continue;
            }
            engines::EstimateOptions o;
            o.trials = 100'000;
            o.seed = seed++;
            o.confidence = 0.99;
            o.max_steps = 100'000'000;
            o.threads = 1;
            auto est = engines::estimate(zc.spec, in, o);
            c.expect(est.cutoffs == 0, zc.name + " cutoff on '" + in + "'");
            c.expect(est.wilson.lo <= exact.p_accept + 1e-12 && exact.p_accept <= est.wilson.hi + 1e-12,
                     zc.name + " '" + in + "' exact=" + std::to_string(exact.p_accept) + " hat=" + std::to_string(est.p_hat));
            total_steps += est.mean_steps * double(est.trials);
            ++cases;
        }
    }
    c.expect(machines.size() >= 12 && cases >= 60, "zoo size");
    c.notes << " machines=" << machines.size() << " cases=" << cases << " simulated steps=" << total_steps;
    return c;
}

Check criterion8() {
    Check c;
    Rational fifth = Rational::parse("1/5");
    MachineSpec pal = builders::build_pal_core(fifth).spec;
    std::vector<double> xs, ys;
    for (int n = 2; n <= 8; ++n) {
        std::string w(std::size_t(n), 'a');
        auto s = engines::solve_exact(pal, w);
        c.expect(!s.infinite_steps && s.expected_steps > 0, "pal steps n=" + std::to_string(n));
        xs.push_back(n);
        ys.push_back(std::log2(s.expected_steps));
    }
    double mx = 0, my = 0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
        mx += xs[k];
        my += ys[k];
    }
    mx /= double(xs.size());
    my /= double(xs.size());
    double sxy = 0, sxx = 0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
        sxy += (xs[k] - mx) * (ys[k] - my);
        sxx += (xs[k] - mx) * (xs[k] - mx);
    }
    double slope = sxy / sxx;
    c.expect(slope >= 0.5, "pal slope");

    MachineSpec rpal = builders::compile_rpal(1, fifth, builders::default_k_eps(fifth));
    std::vector<double> loop(rpal.states.size(), 0.0);
    for (std::size_t s = 0; s < rpal.states.size(); ++s) {
        const std::string &name = rpal.states[s];
        bool outside = name.rfind("r.", 0) == 0 || name.rfind("p.", 0) == 0;
        loop[s] = outside ? 0.0 : 1.0;
    }
    engines::ExactOptions o;
    o.rewards = {builders::round_rewards(rpal), loop};
    std::vector<double> per_round;
    for (const std::string &w : {std::string("aa"), std::string("aaaaaaa")}) {
        std::string s = lang::build_rl(1, w);
        auto sol = engines::solve_exact(rpal, s, o);
        c.expect(sol.rewards.size() == 2 && sol.rewards[0] >= 1.0, "rounds");
        per_round.push_back(sol.rewards[1] / sol.rewards[0]);
    }
    double loglog = std::log(per_round[1] / per_round[0]) / std::log(57.0 / 7.0);
    c.expect(loglog <= 4.0, "rpal per-round slope");
    c.notes << " pal log2-slope=" << slope << " rpal steps/round n=7:" << per_round[0] << " n=57:" << per_round[1]
            << " log-log slope=" << loglog;
    return c;
}

// Distinguishing suffix search written from the definition.
bool dissimilar(const std::string &u, const std::string &v, int n) {
    auto pal = [](const std::string &s) { return palindrome(s); };
    int room = n - int(std::max(u.size(), v.size()));
    for (int len = 0; len <= room; ++len) {
        for (const auto &x : words(len)) {
            if (pal(u + x) != pal(v + x)) return true;
        }
    }
    return false;
}

Check criterion9() {
    Check c;
    for (int n : {2, 4, 6}) {
        lang::DissimOptions o;
        auto w = lang::dissim_lower_bound(lang::Family::PAL, std::nullopt, n, o);
        std::size_t want = std::size_t{1} << (n / 2);
        c.expect(w.strings.size() == want, "size n=" + std::to_string(n));
        c.expect(lang::verify_witness(lang::Family::PAL, std::nullopt, w), "witness n=" + std::to_string(n));
        for (std::size_t a = 0; a < w.strings.size(); ++a) {
            c.expect(int(w.strings[a].size()) <= n, "length");
            for (std::size_t b = a + 1; b < w.strings.size(); ++b) {
                c.expect(dissimilar(w.strings[a], w.strings[b], n), "pair " + w.strings[a] + "/" + w.strings[b]);
            }
        }
        lang::DissimOptions ex;
        ex.exhaustive = true;
        auto full = lang::dissim_lower_bound(lang::Family::PAL, std::nullopt, n, ex);
        c.expect(lang::verify_witness(lang::Family::PAL, std::nullopt, full), "exhaustive witness");
        c.expect(want <= full.strings.size(), "exhaustive bound n=" + std::to_string(n));
        c.notes << " n=" << n << ":" << w.strings.size() << "<=" << full.strings.size();
    }
    return c;
}

Check criterion10() {
    Check c;
    std::vector<std::vector<std::string>> commands{
        {"run", "--builder", "eq-core", "--eps", "1/3", "--input", "aab", "--seed", "9", "--digest"},
        {"run", "--builder", "rpal", "--i", "1", "--k-eps", "0", "--input", "ab$1aa1", "--seed", "3", "--interpret"},
        {"estimate", "--builder", "rw-gate", "--k-eps", "1", "--input", "abab", "--seed", "5", "--trials", "3000"},
        {"estimate", "--builder", "pppal", "--i", "1", "--input", "aa1aa0aa0aa$a0a", "--seed", "2", "--trials", "2000",
         "--interpret"},
        {"estimate", "--builder", "rpal", "--i", "1", "--eps", "1/3", "--k-eps", "0", "--input", "aa$1aaa1", "--seed",
         "4", "--trials", "300", "--interpret", "--kernel", "simulate"},
        {"sweep", "--kind", "rw-gate", "--from", "1", "--to", "4", "--seed", "8", "--trials", "500", "--format", "csv"},
        {"sweep", "--kind", "rpal", "--from", "2", "--to", "3", "--seed", "8", "--trials", "200", "--format", "json"},
        {"exact", "--builder", "pal-core", "--input", "aba"},
        {"gen", "--family", "pppal", "--i", "2", "--m", "2", "--near", "--format", "json"},
    };
    for (auto args : commands) {
        args.push_back("--no-timestamp");
        std::ostringstream o1, e1, o2, e2;
        int r1 = cli::run(args, o1, e1);
        int r2 = cli::run(args, o2, e2);
        std::string what = args[0] + " " + args[2];
        c.expect(r1 == r2 && r1 != cli::kUsage && r1 != cli::kResource, what + " exit " + std::to_string(r1) + " " + e1.str());
        c.expect(!o1.str().empty() && o1.str() == o2.str(), what + " output differs");
    }
    c.notes << " commands=" << commands.size();
    return c;
}

}  // namespace

int main(int argc, char **argv) {
    std::set<int> only;
    for (int a = 1; a < argc; ++a) only.insert(std::atoi(argv[a]));
    bool all = true;
    auto report = [&](int n, const std::string &what, const std::function<Check(double &)> &body) {
        if (!only.empty() && !only.count(n)) return;
        auto t0 = Clock::now();
        double inner = 0;
        Check c;
        try {
            c = body(inner);
        } catch (const std::exception &e) {
            c.ok = false;
            c.notes << " [exception: " << e.what() << "]";
        }
        all = all && c.ok;
        std::cout << line(n, c, what, seconds_since(t0)) << std::endl;
    };
    auto plain = [](Check (*f)()) { return [f](double &) { return f(); }; };
    report(1, "random-walk gate exit law", criterion1);
    report(2, "one-sided error on members (exact)", plain(criterion2));
    report(3, "error bound on the negative corpus", plain(criterion3));
    report(4, "language-layer identities", criterion4);
    report(5, "first-block and segment length bounds", plain(criterion5));
    report(6, "PAL counter oracle", plain(criterion6));
    report(7, "Monte Carlo vs exact on the zoo", plain(criterion7));
    report(8, "runtime trends", plain(criterion8));
    report(9, "PAL dissimilarity witnesses", plain(criterion9));
    report(10, "determinism of stochastic commands", plain(criterion10));
    return all ? 0 : 1;
}
