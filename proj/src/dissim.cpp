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


#include <algorithm>
#include <bit>
#include <map>
#include <numeric>
#include <set>

#include "json.hpp"
#include "qcfa/langkit.hpp"

namespace qcfa::lang {

namespace {

// Number of strings of length <= len over k symbols.
std::uint64_t count_upto(std::uint64_t k, int len) {
    std::uint64_t total = 0, pw = 1;
    for (int l = 0; l <= len; ++l) {
        total += pw;
        pw *= k;
    }
    return total;
}

// idx-th string of the shortlex enumeration.
std::string shortlex_string(std::string_view alphabet, std::uint64_t idx) {
    std::uint64_t k = alphabet.size();
    int len = 0;
    std::uint64_t pw = 1;
    while (idx >= pw) {
        idx -= pw;
        pw *= k;
        ++len;
    }
    std::string s(static_cast<std::size_t>(len), alphabet[0]);
    for (int p = len - 1; p >= 0; --p) {
        s[static_cast<std::size_t>(p)] = alphabet[idx % k];
        idx /= k;
    }
    return s;
}

std::string reversed(std::string_view s) { return std::string(s.rbegin(), s.rend()); }

DissimilarWitness complete_pairs(int n, std::vector<std::string> lefts, const std::vector<std::string> &completions) {
    DissimilarWitness w;
    w.n = n;
    w.method = "constructive";
    for (std::size_t x = 0; x < lefts.size(); ++x) {
        for (std::size_t y = x + 1; y < lefts.size(); ++y) {
            w.pairs.push_back({lefts[x], lefts[y], completions[x]});
        }
    }
    w.strings = std::move(lefts);
    return w;
}

void check_witness_size(std::uint64_t size, const DissimOptions &opt) {
    if (size > opt.max_witness) {
        throw Error(ErrorKind::Resource, "witness of size " + std::to_string(size) + " exceeds max_witness=" +
                                             std::to_string(opt.max_witness));
    }
}

std::vector<std::string> all_ab(int len) {
    std::vector<std::string> out;
    for (std::uint64_t v = 0; v < (std::uint64_t{1} << len); ++v) {
        std::string s(static_cast<std::size_t>(len), 'a');
        for (int p = 0; p < len; ++p) {
            if ((v >> (len - 1 - p)) & 1u) s[static_cast<std::size_t>(p)] = 'b';
        }
        out.push_back(std::move(s));
    }
    return out;
}

std::uint64_t rl_length(int level, std::uint64_t m) {
    for (int t = 0; t < level; ++t) {
        m = srel_next_len(m);
        if (m > (1u << 26)) return m;
    }
    return m;
}

std::optional<DissimilarWitness> constructive(Family family, std::optional<int> level, int n,
                                              const DissimOptions &opt) {
    switch (family) {
        case Family::EQ: {
            std::vector<std::string> lefts, comps;
            for (int k = 0; 2 * k <= n; ++k) {
                lefts.emplace_back(static_cast<std::size_t>(k), 'a');
                comps.emplace_back(static_cast<std::size_t>(k), 'b');
            }
            check_witness_size(lefts.size(), opt);
            return complete_pairs(n, std::move(lefts), comps);
        }
        case Family::PAL: {
            int h = n / 2;
            check_witness_size(std::uint64_t{1} << std::min(h, 63), opt);
            std::vector<std::string> lefts = all_ab(h), comps;
            for (const auto &w : lefts) comps.push_back(reversed(w));
            return complete_pairs(n, std::move(lefts), comps);
        }
        case Family::RPAL: {
            // Largest even first-block length whose members fit in n.
            int m = 0;
            for (int c = 2; rl_length(*level, static_cast<std::uint64_t>(c)) <= static_cast<std::uint64_t>(n); c += 2) m = c;
            if (m == 0) return std::nullopt;
            check_witness_size(std::uint64_t{1} << std::min(m / 2, 63), opt);
            std::vector<std::string> lefts = all_ab(m / 2), comps;
            for (const auto &w : lefts) {
                std::string full = build_rl(*level, w + reversed(w));
                comps.push_back(full.substr(w.size()));
            }
            return complete_pairs(n, std::move(lefts), comps);
        }
        case Family::PPAL:
        case Family::PPPAL: {
            LangParams params = lang_params(*level);
            int m = 0;
            for (int c = params.min_segment; c <= 58; ++c) {
                std::uint64_t len = 0;
                if (family == Family::PPPAL) {
                    len = total_length(params, c);
                } else {
                    std::uint64_t segs = 1;
                    for (int t = 1; t < params.level; ++t) segs *= static_cast<std::uint64_t>(c);
                    len = segs * static_cast<std::uint64_t>(c + params.delim_width);
                }
                if (len > static_cast<std::uint64_t>(n)) break;
                m = c;
            }
            if (m == 0) return std::nullopt;
            std::uint64_t side = 1;
            for (int t = 0; t < params.level; ++t) side *= static_cast<std::uint64_t>(m);
            std::uint64_t half = side / 2;
            check_witness_size(std::uint64_t{1} << std::min<std::uint64_t>(half, 63), opt);
            std::string middle = side % 2 ? "a" : "";
            std::vector<std::string> lefts, comps;
            for (const auto &w : all_ab(static_cast<int>(half))) {
                std::string p = w + middle + reversed(w);
                std::string s = family == Family::PPPAL ? build_pppal(params, p) : punc(params, p);
                // Minimal prefix holding `half` palindrome symbols.
                std::size_t cut = 0, seen = 0;
                while (seen < half) {
                    if (s[cut] == 'a' || s[cut] == 'b') ++seen;
                    ++cut;
                }
                lefts.push_back(s.substr(0, cut));
                comps.push_back(s.substr(cut));
            }
            return complete_pairs(n, std::move(lefts), comps);
        }
        default: return std::nullopt;
    }
}

// Max clique with pivoting; graphs here have at most a few thousand nodes.
void bron_kerbosch(const std::vector<std::vector<char>> &adj, std::vector<int> &r, std::vector<int> p,
                   std::vector<int> x, std::vector<int> &best) {
    if (p.empty() && x.empty()) {
        if (r.size() > best.size()) best = r;
        return;
    }
    if (r.size() + p.size() <= best.size()) return;
    int pivot = -1;
    std::size_t pivot_deg = 0;
    for (const auto *set : {&p, &x}) {
        for (int u : *set) {
            std::size_t deg = 0;
            for (int v : p) deg += static_cast<std::size_t>(adj[static_cast<std::size_t>(u)][static_cast<std::size_t>(v)]);
            if (pivot < 0 || deg > pivot_deg) {
                pivot = u;
                pivot_deg = deg;
            }
        }
    }
    std::vector<int> cand;
    for (int v : p) {
        if (!adj[static_cast<std::size_t>(pivot)][static_cast<std::size_t>(v)]) cand.push_back(v);
    }
    for (int v : cand) {
        std::vector<int> np, nx;
        for (int u : p) {
            if (adj[static_cast<std::size_t>(v)][static_cast<std::size_t>(u)]) np.push_back(u);
        }
        for (int u : x) {
            if (adj[static_cast<std::size_t>(v)][static_cast<std::size_t>(u)]) nx.push_back(u);
        }
        r.push_back(v);
        bron_kerbosch(adj, r, std::move(np), std::move(nx), best);
        r.pop_back();
        p.erase(std::find(p.begin(), p.end(), v));
        x.push_back(v);
    }
}

DissimilarWitness exhaustive(Family family, std::optional<int> level, int n, const DissimOptions &opt) {
    if (n > opt.max_n) {
        throw Error(ErrorKind::Resource, "exhaustive dissimilarity search is capped at max_n=" + std::to_string(opt.max_n));
    }
    std::string_view alphabet = family_alphabet(family);
    std::uint64_t k = alphabet.size();
    std::uint64_t nstrings = count_upto(k, n);
    // Work: every (w, v) with |wv| <= n.
    std::uint64_t work = 0;
    for (int l = 0; l <= n; ++l) {
        std::uint64_t pw = 1;
        for (int t = 0; t < l; ++t) pw *= k;
        work += pw * count_upto(k, n - l);
        if (work > opt.max_candidates) {
            throw Error(ErrorKind::Resource, "exhaustive dissimilarity search exceeds max_candidates=" +
                                                 std::to_string(opt.max_candidates));
        }
    }
    // Signature: membership of wv over suffixes v in shortlex order, so the
    // restriction to shorter suffixes is a prefix of the bit vector.
    std::map<std::pair<int, std::vector<bool>>, int> groups;
    std::vector<std::string> reps;
    std::vector<int> rep_len;
    std::vector<std::vector<bool>> rep_sig;
    for (std::uint64_t idx = 0; idx < nstrings; ++idx) {
        std::string w = shortlex_string(alphabet, idx);
        int len = static_cast<int>(w.size());
        std::uint64_t nsuf = count_upto(k, n - len);
        std::vector<bool> sig(static_cast<std::size_t>(nsuf));
        for (std::uint64_t v = 0; v < nsuf; ++v) {
            sig[static_cast<std::size_t>(v)] = is_member(family, level, w + shortlex_string(alphabet, v));
        }
        auto key = std::make_pair(len, sig);
        if (groups.emplace(key, static_cast<int>(reps.size())).second) {
            reps.push_back(w);
            rep_len.push_back(len);
            rep_sig.push_back(std::move(sig));
        }
    }
    std::size_t g = reps.size();
    std::vector<std::vector<char>> adj(g, std::vector<char>(g, 0));
    std::vector<std::vector<std::int64_t>> diff(g, std::vector<std::int64_t>(g, -1));
    for (std::size_t x = 0; x < g; ++x) {
        for (std::size_t y = x + 1; y < g; ++y) {
            std::size_t common = std::min(rep_sig[x].size(), rep_sig[y].size());
            for (std::size_t v = 0; v < common; ++v) {
                if (rep_sig[x][v] != rep_sig[y][v]) {
                    adj[x][y] = adj[y][x] = 1;
                    diff[x][y] = diff[y][x] = static_cast<std::int64_t>(v);
                    break;
                }
            }
        }
    }
    std::vector<int> r, best, p(g), x;
    std::iota(p.begin(), p.end(), 0);
    bron_kerbosch(adj, r, p, x, best);
    std::sort(best.begin(), best.end());
    DissimilarWitness w;
    w.n = n;
    w.method = "exhaustive";
    for (int id : best) w.strings.push_back(reps[static_cast<std::size_t>(id)]);
    for (std::size_t a = 0; a < best.size(); ++a) {
        for (std::size_t b = a + 1; b < best.size(); ++b) {
            auto ia = static_cast<std::size_t>(best[a]), ib = static_cast<std::size_t>(best[b]);
            w.pairs.push_back({reps[ia], reps[ib], shortlex_string(alphabet, static_cast<std::uint64_t>(diff[ia][ib]))});
        }
    }
    return w;
}

}  // namespace

DissimilarWitness dissim_lower_bound(Family family, std::optional<int> level, int n, const DissimOptions &options) {
    if (n < 1) throw Error(ErrorKind::InvalidArgument, "n must be positive");
    if (family_is_indexed(family) && (!level || *level < 1)) {
        throw Error(ErrorKind::InvalidLevel, std::string(family_name(family)) + " needs a level >= 1");
    }
    if (!family_is_indexed(family) && level) {
        throw Error(ErrorKind::InvalidArgument, std::string(family_name(family)) + " takes no level");
    }
    DissimilarWitness w;
    if (!options.exhaustive) {
        if (auto c = constructive(family, level, n, options)) {
            w = std::move(*c);
        } else {
            w = exhaustive(family, level, n, options);
        }
    } else {
        w = exhaustive(family, level, n, options);
    }
    if (!verify_witness(family, level, w)) {
        throw Error(ErrorKind::Domain, "internal: witness failed verification");
    }
    return w;
}

bool verify_witness(Family family, std::optional<int> level, const DissimilarWitness &witness) {
    auto fits = [&](const std::string &s) { return s.size() <= static_cast<std::size_t>(witness.n); };
    std::vector<std::string> sorted = witness.strings;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) return false;
    std::size_t k = witness.strings.size();
    if (witness.pairs.size() != k * (k - (k > 0 ? 1 : 0)) / 2) return false;
    std::set<std::pair<std::string, std::string>> covered;
    for (const auto &pr : witness.pairs) {
        std::string l = pr.left + pr.suffix, r = pr.right + pr.suffix;
        if (!fits(pr.left) || !fits(pr.right) || !fits(l) || !fits(r)) return false;
        if (is_member(family, level, l) == is_member(family, level, r)) return false;
        covered.insert(std::minmax(pr.left, pr.right));
    }
    for (std::size_t a = 0; a < k; ++a) {
        for (std::size_t b = a + 1; b < k; ++b) {
            if (!covered.count(std::minmax(witness.strings[a], witness.strings[b]))) return false;
        }
    }
    return true;
}

std::optional<std::string> find_distinguisher(Family family, std::optional<int> level, std::string_view w,
                                              std::string_view w2, int n) {
    int longest = static_cast<int>(std::max(w.size(), w2.size()));
    if (longest > n) return std::nullopt;
    std::string_view alphabet = family_alphabet(family);
    std::uint64_t nsuf = count_upto(alphabet.size(), n - longest);
    for (std::uint64_t v = 0; v < nsuf; ++v) {
        std::string s = shortlex_string(alphabet, v);
        if (is_member(family, level, std::string(w) + s) != is_member(family, level, std::string(w2) + s)) return s;
    }
    return std::nullopt;
}

std::string witness_to_json(const DissimilarWitness &witness) {
    nlohmann::json j;
    j["n"] = witness.n;
    j["strings"] = witness.strings;
    j["pairs"] = nlohmann::json::array();
    for (const auto &p : witness.pairs) {
        j["pairs"].push_back({{"left", p.left}, {"right", p.right}, {"suffix", p.suffix}});
    }
    return j.dump();
}

}  // namespace qcfa::lang
