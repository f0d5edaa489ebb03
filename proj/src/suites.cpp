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


#include "qcfa/suites.hpp"

#include <cmath>
#include <functional>
#include <map>

#include "qcfa/builders.hpp"
#include "qcfa/engines.hpp"
#include "qcfa/langkit.hpp"

namespace qcfa::suites {

namespace {

class Tally {
   public:
    explicit Tally(std::string name) : name_(std::move(name)) {}
    void check(bool ok, const std::string &what) {
        ++checks_;
        if (!ok && failures_.size() < 20) failures_.push_back(what);
        pass_ = pass_ && ok;
    }
    nlohmann::json json() const {
        return {{"suite", name_}, {"pass", pass_}, {"checks", checks_}, {"failures", failures_}};
    }

   private:
    std::string name_;
    bool pass_ = true;
    std::size_t checks_ = 0;
    std::vector<std::string> failures_;
};

std::string rep(char c, int n) { return std::string(static_cast<std::size_t>(n), c); }

std::vector<std::string> palindromes(int len) {
    std::vector<std::string> out;
    int half = (len + 1) / 2;
    for (int bits = 0; bits < (1 << half); ++bits) {
        std::string w(static_cast<std::size_t>(len), 'a');
        for (int p = 0; p < half; ++p) {
            char c = (bits >> (half - 1 - p)) & 1 ? 'b' : 'a';
            w[static_cast<std::size_t>(p)] = c;
            w[static_cast<std::size_t>(len - 1 - p)] = c;
        }
        out.push_back(w);
    }
    return out;
}

nlohmann::json gate() {
    Tally t("gate");
    for (int k = 0; k <= 2; ++k) {
        builders::Fragment g = builders::build_rw_gate(k);
        for (int n = 0; n <= 10; ++n) {
            double p = engines::solve_exact(g.spec, rep('a', n)).p_accept;
            double want = std::ldexp(1.0, -k) / (n + 1);
            t.check(std::abs(p - want) <= 1e-9, "k=" + std::to_string(k) + " n=" + std::to_string(n));
        }
    }
    return t.json();
}

nlohmann::json counter() {
    Tally t("counter");
    for (int len = 0; len <= 8; ++len) {
        for (int bits = 0; bits < (1 << len); ++bits) {
            std::string w;
            for (int p = 0; p < len; ++p) w.push_back((bits >> p) & 1 ? 'b' : 'a');
            Eigen::Vector4d v(1, 1, 0, 0);
            for (char c : w) v = builders::pal_counter_matrix(c) * v;
            std::uint64_t y = 0, z = 0, place = 1;
            for (char c : w) {
                z += place * (c == 'a' ? 1u : 2u);
                place *= 4;
            }
            place = 1;
            for (auto it = w.rbegin(); it != w.rend(); ++it) {
                y += place * (*it == 'a' ? 1u : 2u);
                place *= 4;
            }
            bool pal = std::equal(w.begin(), w.end(), w.rbegin());
            t.check(v(2) == static_cast<double>(y) && v(3) == static_cast<double>(z) && (pal == (y == z)), w);
        }
    }
    return t.json();
}

nlohmann::json lang() {
    Tally t("lang");
    std::uint64_t k = 2;
    for (std::uint64_t want : {7u, 57u, 3307u}) {
        k = lang::srel_next_len(k);
        t.check(k == want, "srel " + std::to_string(want));
    }
    lang::LangParams p1 = lang::lang_params(1);
    for (int m = 2; m <= 10; ++m) {
        std::uint64_t want = static_cast<std::uint64_t>(m) * (std::uint64_t{1} << (m + 1)) - 1;
        t.check(lang::total_length(p1, m) == want, "total_length m=" + std::to_string(m));
    }
    for (int i = 1; i <= 3; ++i) {
        lang::LangParams p = lang::lang_params(i);
        for (int m = p.min_segment; m < p.min_segment + 2; ++m) {
            std::uint64_t side = 1;
            for (int r = 0; r < i; ++r) side *= static_cast<std::uint64_t>(m);
            std::string s = lang::build_pppal(p, std::string(side, 'a'));
            std::uint64_t c = static_cast<std::uint64_t>(p.delim_width);
            std::uint64_t mm = static_cast<std::uint64_t>(m);
            std::uint64_t two = std::uint64_t{1} << (m + 1);
            std::uint64_t want = (mm - 1) * two + c * (two - mm - 2) + mm + 1;
            t.check(s.size() == want && want == lang::total_length(p, m),
                    "pad length i=" + std::to_string(i) + " m=" + std::to_string(m));
            t.check(lang::is_member(lang::Family::PPPAL, i, s), "member i=" + std::to_string(i));
            if (i >= 2) {
                lang::DelimiterSeq seq = lang::well_ordered_sequence(p, m);
                for (int j = 1; j <= i; ++j) {
                    std::uint64_t want_j = 1;
                    for (int r = 0; r < i - j; ++r) want_j *= mm;
                    t.check(lang::sumdel(seq, j) == want_j, "sumdel j=" + std::to_string(j));
                }
            }
        }
    }
    return t.json();
}

nlohmann::json onesided() {
    Tally t("onesided");
    builders::Rational eps = builders::Rational::parse("1/5");
    int k = builders::default_k_eps(eps);
    machine::MachineSpec rpal = builders::compile_rpal(1, eps, k);
    for (int len : {2, 7}) {
        for (const std::string &w : palindromes(len)) {
            std::string s = lang::build_rl(1, w);
            double p = engines::solve_exact(rpal, s).p_accept;
            t.check(std::abs(p - 1.0) <= 1e-8, "rpal " + s);
        }
    }
    machine::MachineSpec pppal = builders::compile_pppal(1, eps, k);
    for (const std::string &w : palindromes(2)) {
        std::string s = lang::build_pppal(lang::lang_params(1), w);
        double p = engines::solve_exact(pppal, s).p_accept;
        t.check(std::abs(p - 1.0) <= 1e-8, "pppal " + s);
    }
    return t.json();
}

nlohmann::json dissim() {
    Tally t("dissim");
    for (int n : {2, 4, 6}) {
        lang::DissimOptions opt;
        opt.exhaustive = false;
        lang::DissimilarWitness w = lang::dissim_lower_bound(lang::Family::PAL, std::nullopt, n, opt);
        t.check(w.strings.size() == (std::size_t{1} << (n / 2)), "size n=" + std::to_string(n));
        t.check(lang::verify_witness(lang::Family::PAL, std::nullopt, w), "witness n=" + std::to_string(n));
    }
    return t.json();
}

nlohmann::json cores() {
    Tally t("cores");
    builders::Rational eps = builders::Rational::parse("1/5");
    for (int x = 0; x <= 4; ++x) {
        for (int y = 0; y <= 4; ++y) {
            double p = builders::eq_accept(eps, x, y);
            bool ok = x == y ? std::abs(p - 1.0) <= 1e-8 : p <= 0.2 + 1e-8;
            t.check(ok, "eq a^" + std::to_string(x) + "b^" + std::to_string(y));
        }
    }
    for (int len = 1; len <= 4; ++len) {
        for (int bits = 0; bits < (1 << len); ++bits) {
            std::string w;
            for (int p = 0; p < len; ++p) w.push_back((bits >> p) & 1 ? 'b' : 'a');
            double p = builders::pal_accept(eps, w);
            bool pal = std::equal(w.begin(), w.end(), w.rbegin());
            t.check(pal ? std::abs(p - 1.0) <= 1e-8 : p <= 0.2 + 1e-8, "pal " + w);
        }
    }
    return t.json();
}

const std::map<std::string, std::function<nlohmann::json()>> &registry() {
    static const std::map<std::string, std::function<nlohmann::json()>> r{
        {"gate", gate}, {"counter", counter}, {"lang", lang}, {"onesided", onesided}, {"dissim", dissim}, {"cores", cores},
    };
    return r;
}

}  // namespace

std::vector<std::string> suite_names() {
    std::vector<std::string> names;
    for (const auto &kv : registry()) names.push_back(kv.first);
    return names;
}

nlohmann::json run_suite(const std::string &name) {
    auto it = registry().find(name);
    if (it == registry().end()) throw Error(ErrorKind::InvalidArgument, "unknown suite '" + name + "'");
    return it->second();
}

}  // namespace qcfa::suites
