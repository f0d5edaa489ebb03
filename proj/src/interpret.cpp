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


// Host-level interpreter for the two templates.  The deterministic stages
// are evaluated directly on the token sequence; the length comparisons and
// the palindrome check are delegated to the core machines.

#include <algorithm>
#include <cmath>
#include <mutex>
#include <random>
#include <regex>
#include <tuple>

#include "qcfa/builders.hpp"
#include "qcfa/langkit.hpp"

namespace qcfa::builders {

const char *template_name(Template t) { return t == Template::Rpal ? "rpal" : "pppal"; }

Template parse_template(std::string_view name) {
    if (name == "rpal") return Template::Rpal;
    if (name == "pppal") return Template::Pppal;
    throw Error(ErrorKind::InvalidArgument, "unknown template '" + std::string(name) + "' (rpal or pppal)");
}

namespace {

std::mutex cache_mutex;
std::map<std::string, Fragment> core_cache;
std::map<std::tuple<std::string, int, int>, double> eq_cache;
std::map<std::pair<std::string, std::string>, double> pal_cache;

const Fragment &cached_core(const Rational &eps, bool pal) {
    std::string key = (pal ? "pal:" : "eq:") + eps.str();
    auto it = core_cache.find(key);
    if (it == core_cache.end()) it = core_cache.emplace(key, pal ? build_pal_core(eps) : build_eq_core(eps)).first;
    return it->second;
}

// ---------------------------------------------------------------------------
// RPAL plan

Plan plan_rpal(int level, std::string_view s) {
    Plan plan;
    plan.n = s.size();
    static const std::regex shape("[ab][ab]+(\\$1(a+1)+)+");
    std::string str(s);
    if (!std::regex_match(str, shape) || std::count(str.begin(), str.end(), '$') != level) return plan;
    plan.format_ok = true;
    std::vector<std::size_t> dollars;
    for (std::size_t p = 0; p < str.size(); ++p) {
        if (str[p] == '$') dollars.push_back(p);
    }
    plan.pal_word = str.substr(0, dollars.front());
    for (int j = level; j >= 1; --j) {
        std::size_t start = dollars[static_cast<std::size_t>(j - 1)];
        std::size_t end = j == level ? str.size() : dollars[static_cast<std::size_t>(j)];
        std::string block = str.substr(start + 1, end - start - 1);
        std::vector<int> runs;
        int ones = 0, run = 0;
        for (char ch : block) {
            if (ch == '1') {
                ++ones;
                if (run > 0) runs.push_back(run);
                run = 0;
            } else {
                ++run;
            }
        }
        int prefix = static_cast<int>(start);
        plan.calls.push_back({"C1", prefix, ones});
        plan.calls.push_back({"C2", prefix, runs.front()});
        for (std::size_t t = 1; t < runs.size(); ++t) plan.calls.push_back({"C2", runs[t - 1], runs[t]});
    }
    return plan;
}

// ---------------------------------------------------------------------------
// PPPAL plan

struct Tok {
    enum Kind { Left, Right, A, B, Dollar, Bd } kind;
    int value = 0;  // delimiter value
};

bool sep(const Tok &t) { return t.kind == Tok::Dollar || t.kind == Tok::Bd; }
bool ab(const Tok &t) { return t.kind == Tok::A || t.kind == Tok::B; }

// Tokenizes and applies the five prefix checks.  Empty on failure.
std::optional<std::vector<Tok>> pppal_tokens(int level, std::string_view s) {
    int c = lang::lang_params(level).delim_width;
    std::vector<Tok> toks{{Tok::Left, 0}};
    for (std::size_t p = 0; p < s.size();) {
        char ch = s[p];
        if (ch == 'a' || ch == 'b') {
            toks.push_back({ch == 'a' ? Tok::A : Tok::B, 0});
            ++p;
        } else if (ch == '$') {
            toks.push_back({Tok::Dollar, 0});
            ++p;
        } else {
            std::size_t q = p;
            while (q < s.size() && (s[q] == '0' || s[q] == '1')) ++q;
            if (static_cast<int>(q - p) != c) return std::nullopt;
            toks.push_back({Tok::Bd, std::stoi(std::string(s.substr(p, q - p)), nullptr, 2)});
            p = q;
        }
    }
    toks.push_back({Tok::Right, 0});
    std::size_t last = toks.size() - 1;
    // Begins with a/b; every separator sits between two a/b symbols.
    if (last < 2 || !ab(toks[1])) return std::nullopt;
    for (std::size_t k = 1; k < last; ++k) {
        if (sep(toks[k]) && !(ab(toks[k - 1]) && ab(toks[k + 1]))) return std::nullopt;
    }
    // cbin(level) exactly once; smaller nonzero values before it; after it
    // only a, $ and cbin(0).
    std::size_t top = 0;
    for (std::size_t k = 1; k < last; ++k) {
        if (toks[k].kind == Tok::Bd && toks[k].value == level) {
            if (top) return std::nullopt;
            top = k;
        }
    }
    if (!top) return std::nullopt;
    for (std::size_t k = 1; k < last; ++k) {
        const Tok &t = toks[k];
        if (k < top) {
            if (t.kind == Tok::Dollar) return std::nullopt;
            if (t.kind == Tok::Bd && (t.value < 1 || t.value >= level)) return std::nullopt;
        } else if (k > top) {
            if (t.kind == Tok::B || (t.kind == Tok::Bd && t.value != 0)) return std::nullopt;
        }
    }
    // Ends with $ a cbin(0) a.
    if (last < 5) return std::nullopt;
    if (toks[last - 4].kind != Tok::Dollar || toks[last - 3].kind != Tok::A || toks[last - 2].kind != Tok::Bd ||
        toks[last - 2].value != 0 || toks[last - 1].kind != Tok::A) {
        return std::nullopt;
    }
    return toks;
}

Plan plan_pppal(int level, std::string_view s) {
    Plan plan;
    plan.n = s.size();
    auto parsed = pppal_tokens(level, s);
    if (!parsed) return plan;
    plan.format_ok = true;
    const std::vector<Tok> &t = *parsed;
    std::size_t last = t.size() - 1;
    auto count = [&](std::size_t from, std::size_t to, auto pred) {
        int n = 0;
        for (std::size_t k = from + 1; k < to; ++k) n += pred(t[k]) ? 1 : 0;
        return n;
    };
    auto is_a = [](const Tok &x) { return x.kind == Tok::A; };
    auto is_bd = [](const Tok &x) { return x.kind == Tok::Bd; };
    auto dollar_or_end = [&](std::size_t k) { return t[k].kind == Tok::Dollar || k == last || k == 0; };

    std::size_t top = 0;
    for (std::size_t k = 0; k < last; ++k) {
        if (t[k].kind == Tok::Bd && t[k].value == level) top = k;
    }
    for (std::size_t k = 1; k < top; ++k) {
        if (ab(t[k])) plan.pal_word.push_back(t[k].kind == Tok::A ? 'a' : 'b');
    }

    // Right-to-left sweep over separators.
    std::vector<std::size_t> seps{0};
    for (std::size_t k = 1; k < last; ++k) {
        if (sep(t[k])) seps.push_back(k);
    }
    seps.push_back(last);
    for (std::size_t q = seps.size() - 2; q >= 1; --q) {
        std::size_t pl = seps[q - 1], pm = seps[q], pr = seps[q + 1];
        if (t[pm].kind == Tok::Bd) {
            plan.calls.push_back({"C1", count(pl, pm, ab), count(pm, pr, ab)});
        } else {
            plan.calls.push_back({"C2", count(pl, pm, is_a), 1 + count(pm, pr, is_a)});
        }
        if (dollar_or_end(pr)) {
            // Doubling check between the last two '$'-delimited blocks.
            std::size_t tm = pr;
            do {
                --tm;
            } while (tm > 0 && t[tm].kind != Tok::Dollar);
            if (tm > 0) {
                std::size_t tl = tm;
                do {
                    --tl;
                } while (tl > 0 && t[tl].kind != Tok::Dollar);
                int left = count(tl, tm, is_bd);
                if (left % 2 == 0) {
                    plan.parity_reject = true;
                    return plan;
                }
                plan.calls.push_back({"TW", (left + 1) / 2, 1 + count(tm, pr, is_bd)});
            }
        }
    }

    // Well-ordering: for each high delimiter D (value >= j) compare the
    // number of cbin(j-1) since the previous high one, plus one, with the
    // length of the segment following D.
    auto high = [](const Tok &x, int j) { return x.kind == Tok::Bd && x.value >= j; };
    for (int j = level; j >= 2; --j) {
        for (std::size_t d = top; d > 0; --d) {
            if (!high(t[d], j)) continue;
            std::size_t pl = d;
            do {
                --pl;
            } while (pl > 0 && !high(t[pl], j));
            int lows = 0;
            for (std::size_t k = pl + 1; k < d; ++k) lows += (t[k].kind == Tok::Bd && t[k].value == j - 1) ? 1 : 0;
            std::size_t pr = d + 1;
            while (pr < last && !sep(t[pr])) ++pr;
            plan.calls.push_back({"C3", lows + 1, count(d, pr, ab)});
        }
    }
    return plan;
}

std::string eq_word(int x, int y) { return std::string(static_cast<std::size_t>(x), 'a') + std::string(static_cast<std::size_t>(y), 'b'); }

int effective_k(const InterpretOptions &o) { return o.k_eps >= 0 ? o.k_eps : default_k_eps(o.eps); }

double exit_probability(const InterpretOptions &o, std::size_t n) {
    return std::ldexp(1.0, -effective_k(o)) / static_cast<double>(n + 1);
}

double calls_pass(const InterpretOptions &o, const Plan &plan) {
    double p = 1.0;
    for (const auto &c : plan.calls) p *= eq_accept(o.eps, c.left, c.right);
    return p;
}

double uniform(std::mt19937_64 &rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace

Plan plan_run(const InterpretOptions &options, std::string_view input) {
    if (options.level < 1 || options.level > 6) throw Error(ErrorKind::InvalidLevel, "template level must be in [1, 6]");
    for (char ch : input) {
        std::string_view alpha = options.tmpl == Template::Rpal ? "ab$1" : "ab01$";
        if (alpha.find(ch) == std::string_view::npos) {
            throw Error(ErrorKind::InvalidInput, std::string("symbol '") + ch + "' outside the template alphabet");
        }
    }
    return options.tmpl == Template::Rpal ? plan_rpal(options.level, input) : plan_pppal(options.level, input);
}

double eq_accept(const Rational &eps, int x, int y) {
    std::lock_guard lock(cache_mutex);
    auto key = std::make_tuple(eps.str(), x, y);
    auto it = eq_cache.find(key);
    if (it != eq_cache.end()) return it->second;
    if (x == y) return eq_cache[key] = 1.0;
    double p = engines::solve_exact(cached_core(eps, false).spec, eq_word(x, y)).p_accept;
    return eq_cache[key] = p;
}

double pal_accept(const Rational &eps, const std::string &w) {
    std::lock_guard lock(cache_mutex);
    auto key = std::make_pair(eps.str(), w);
    auto it = pal_cache.find(key);
    if (it != pal_cache.end()) return it->second;
    double p = engines::solve_exact(cached_core(eps, true).spec, w).p_accept;
    return pal_cache[key] = p;
}

double interpret_exact(const InterpretOptions &options, std::string_view input) {
    Plan plan = plan_run(options, input);
    if (!plan.format_ok || plan.parity_reject) return 0.0;
    double pass = calls_pass(options, plan);
    double g = exit_probability(options, plan.n);
    double exit = pass * g / (1.0 - pass * (1.0 - g));
    return exit * pal_accept(options.eps, plan.pal_word);
}

engines::RunReport interpret(const InterpretOptions &options, std::string_view input, std::uint64_t seed) {
    using machine::Verdict;
    Plan plan = plan_run(options, input);
    engines::RunReport rep;
    rep.seed = seed;
    if (!plan.format_ok || plan.parity_reject) {
        rep.verdict = Verdict::Reject;
        rep.steps = 1;
        return rep;
    }
    std::mt19937_64 rng(seed);
    double g = exit_probability(options, plan.n);

    if (options.mode == KernelMode::Exact) {
        // Rounds until a comparison rejects or the gate exits are geometric.
        double pass = calls_pass(options, plan);
        double q = 1.0 - pass * (1.0 - g);
        double u = uniform(rng);
        double rounds = q >= 1.0 ? 1.0 : std::ceil(std::log1p(-u) / std::log1p(-q));
        rounds = std::max(rounds, 1.0);
        if (rounds > static_cast<double>(options.max_steps)) {
            rep.verdict = Verdict::Cutoff;
            rep.steps = options.max_steps;
            return rep;
        }
        rep.steps = static_cast<std::uint64_t>(rounds);
        if (uniform(rng) >= pass * g / q) {
            rep.verdict = Verdict::Reject;
            return rep;
        }
        rep.verdict = uniform(rng) < pal_accept(options.eps, plan.pal_word) ? Verdict::Accept : Verdict::Reject;
        return rep;
    }

    // Trajectory mode: every comparison and the final check run on the cores.
    const MachineSpec *eq = nullptr;
    const MachineSpec *pal = nullptr;
    {
        std::lock_guard lock(cache_mutex);
        eq = &cached_core(options.eps, false).spec;
        pal = &cached_core(options.eps, true).spec;
    }
    int k = effective_k(options);
    auto budget = [&]() { return options.max_steps - std::min(rep.steps, options.max_steps); };
    while (true) {
        for (const auto &c : plan.calls) {
            engines::RunReport r = engines::run_trajectory(*eq, eq_word(c.left, c.right), rng(), budget());
            rep.steps += r.steps;
            if (r.verdict != Verdict::Accept) {
                rep.verdict = r.verdict;
                return rep;
            }
        }
        // Unbiased walk from the first symbol, then k coins.
        std::int64_t pos = 1, right = static_cast<std::int64_t>(plan.n) + 1;
        while (pos > 0 && pos < right) {
            pos += (rng() & 1) ? 1 : -1;
            ++rep.steps;
        }
        bool exit = pos == right;
        for (int t = 0; exit && t < k; ++t) exit = (rng() & 1) != 0;
        if (rep.steps >= options.max_steps) {
            rep.verdict = Verdict::Cutoff;
            rep.steps = options.max_steps;
            return rep;
        }
        if (exit) break;
    }
    engines::RunReport r = engines::run_trajectory(*pal, plan.pal_word, rng(), budget());
    rep.steps += r.steps;
    rep.verdict = r.verdict;
    return rep;
}

engines::EstimateReport interpret_estimate(const InterpretOptions &options, std::string_view input,
                                           std::uint64_t trials, std::uint64_t seed) {
    engines::EstimateReport est;
    est.trials = trials;
    est.seed = seed;
    est.max_steps = options.max_steps;
    std::vector<double> steps;
    steps.reserve(static_cast<std::size_t>(trials));
    double total = 0.0;
    for (std::uint64_t t = 0; t < trials; ++t) {
        engines::RunReport r = interpret(options, input, engines::trial_seed(seed, t));
        switch (r.verdict) {
            case machine::Verdict::Accept: ++est.accepts; break;
            case machine::Verdict::Reject: ++est.rejects; break;
            case machine::Verdict::Cutoff: ++est.cutoffs; break;
        }
        steps.push_back(static_cast<double>(r.steps));
        total += static_cast<double>(r.steps);
    }
    if (trials > 0) {
        est.p_hat = static_cast<double>(est.accepts) / static_cast<double>(trials);
        est.mean_steps = total / static_cast<double>(trials);
        std::sort(steps.begin(), steps.end());
        std::size_t mid = steps.size() / 2;
        est.median_steps = steps.size() % 2 ? steps[mid] : 0.5 * (steps[mid - 1] + steps[mid]);
    }
    est.wilson = engines::wilson_interval(est.accepts, trials, est.confidence);
    return est;
}

}  // namespace qcfa::builders
