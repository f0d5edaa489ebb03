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

#include "qcfa/langkit.hpp"

#include <algorithm>
#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>
#include <limits>

namespace qcfa::lang {

namespace {

using boost::multiprecision::cpp_int;

bool is_ab(char c) { return c == 'a' || c == 'b'; }
bool is_bit(char c) { return c == '0' || c == '1'; }

bool is_palindrome(std::string_view s) {
    return std::equal(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(s.size() / 2), s.rbegin());
}

std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b) {
    if (a != 0 && b > std::numeric_limits<std::uint64_t>::max() / a) {
        throw Error(ErrorKind::Resource, "integer overflow in length computation");
    }
    return a * b;
}

std::uint64_t checked_pow(std::uint64_t base, int exp) {
    std::uint64_t r = 1;
    for (int e = 0; e < exp; ++e) r = checked_mul(r, base);
    return r;
}

// m^(i-1) < 2^m, exactly.
bool power_below_exponential(int m, int level) {
    cpp_int lhs = 1;
    for (int e = 0; e < level - 1; ++e) lhs *= m;
    cpp_int rhs = 1;
    rhs <<= m;
    return lhs < rhs;
}

void check_alphabet(Family family, std::string_view s) {
    std::string_view alphabet = family_alphabet(family);
    for (char c : s) {
        if (alphabet.find(c) == std::string_view::npos) {
            throw Error(ErrorKind::InvalidInput,
                        std::string("symbol '") + c + "' is not in the alphabet of " + family_name(family));
        }
    }
}

bool rl_member(int level, std::string_view s) {
    if (level == 0) {
        return s.size() >= 2 && std::all_of(s.begin(), s.end(), is_ab);
    }
    std::size_t pos = s.rfind('$');
    if (pos == std::string_view::npos) return false;
    std::string_view w = s.substr(0, pos);
    std::string_view tail = s.substr(pos + 1);
    std::size_t k = w.size();
    if (k < 2) return false;
    // tail = 1 (a^k 1)^(k-1)
    if (tail.size() != 1 + (k + 1) * (k - 1)) return false;
    if (tail[0] != '1') return false;
    for (std::size_t seg = 0; seg + 1 < k; ++seg) {
        std::size_t base = 1 + seg * (k + 1);
        for (std::size_t t = 0; t < k; ++t) {
            if (tail[base + t] != 'a') return false;
        }
        if (tail[base + k] != '1') return false;
    }
    return rl_member(level - 1, w);
}

bool ppal_member(const LangParams &params, std::string_view s) {
    std::size_t first_bit = s.find_first_of("01");
    if (first_bit == std::string_view::npos) return false;
    int m = static_cast<int>(first_bit);
    if (m < params.min_segment) return false;
    std::string p;
    for (char c : s) {
        if (is_ab(c)) p.push_back(c);
    }
    std::optional<int> root = exact_root(p.size(), params.level);
    if (!root || *root != m) return false;
    if (!is_palindrome(p)) return false;
    return punc(params, p) == s;
}

std::size_t ppal_length(const LangParams &params, int m) {
    std::uint64_t segs = checked_pow(static_cast<std::uint64_t>(m), params.level - 1);
    return static_cast<std::size_t>(checked_mul(segs, static_cast<std::uint64_t>(m)) +
                                    checked_mul(segs, static_cast<std::uint64_t>(params.delim_width)));
}

bool pppal_member(const LangParams &params, std::string_view s) {
    std::size_t first_bit = s.find_first_of("01");
    if (first_bit == std::string_view::npos) return false;
    int m = static_cast<int>(first_bit);
    if (m < params.min_segment || m > 58) return false;
    if (total_length(params, m) != s.size()) return false;
    std::size_t head_len = ppal_length(params, m);
    if (head_len > s.size()) return false;
    std::string_view head = s.substr(0, head_len);
    if (!ppal_member(params, head)) return false;
    return pad(params, head) == s;
}

std::string bin(int v) {
    if (v == 0) return "0";
    std::string r;
    while (v > 0) {
        r.push_back(static_cast<char>('0' + (v & 1)));
        v >>= 1;
    }
    std::reverse(r.begin(), r.end());
    return r;
}

bool shl_member(std::string_view s) {
    int expected = 0;
    std::size_t start = 0;
    while (true) {
        std::size_t end = s.find('$', start);
        std::string_view piece = s.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start);
        if (piece != bin(expected)) return false;
        if (end == std::string_view::npos) break;
        start = end + 1;
        ++expected;
        if (expected > (1 << 28)) return false;
    }
    return expected > 0;
}

void require_level(Family family, std::optional<int> level) {
    if (family_is_indexed(family)) {
        if (!level) throw Error(ErrorKind::InvalidArgument, std::string(family_name(family)) + " needs a level");
        int minimum = family == Family::RL ? 0 : 1;
        if (*level < minimum) throw Error(ErrorKind::InvalidLevel, "level " + std::to_string(*level));
    } else if (level) {
        throw Error(ErrorKind::InvalidArgument, std::string(family_name(family)) + " takes no level");
    }
}

}  // namespace

const char *family_name(Family family) {
    switch (family) {
        case Family::EQ: return "eq";
        case Family::PAL: return "pal";
        case Family::RL: return "rl";
        case Family::RPAL: return "rpal";
        case Family::PPAL: return "ppal";
        case Family::PPPAL: return "pppal";
        case Family::SHL: return "shl";
    }
    return "?";
}

Family parse_family(std::string_view name) {
    std::string lower(name);
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    for (Family f : {Family::EQ, Family::PAL, Family::RL, Family::RPAL, Family::PPAL, Family::PPPAL, Family::SHL}) {
        if (lower == family_name(f)) return f;
    }
    throw Error(ErrorKind::InvalidArgument, "unknown family '" + std::string(name) + "'");
}

bool family_is_indexed(Family family) {
    return family == Family::RL || family == Family::RPAL || family == Family::PPAL || family == Family::PPPAL;
}

std::string_view family_alphabet(Family family) {
    switch (family) {
        case Family::EQ:
        case Family::PAL: return "ab";
        case Family::RL:
        case Family::RPAL: return "ab1$";
        case Family::PPAL:
        case Family::PPPAL: return "ab01$";
        case Family::SHL: return "01$";
    }
    return "";
}

LangParams lang_params(int level) {
    if (level < 1) throw Error(ErrorKind::InvalidLevel, "level must be >= 1, got " + std::to_string(level));
    LangParams p;
    p.level = level;
    int width = 0;
    while ((1 << width) < level + 1) ++width;
    p.delim_width = width;

    // Scan a finite window and certify the inequality stays true past it.
    int window = std::max(level * level, 64);
    int last_failure = 1;
    for (int m = 2; m <= window; ++m) {
        if (!power_below_exponential(m, level)) last_failure = m;
    }
    if (last_failure >= window) {
        throw Error(ErrorKind::Domain, "min_segment window exhausted for level " + std::to_string(level));
    }
    // Past i^2 the ratio 2^m / m^(i-1) grows: (1 + 1/m)^(i-1) < 2.
    cpp_int a = 1, b = 1;
    cpp_int sq = static_cast<long long>(level) * level;
    for (int e = 0; e < level - 1; ++e) {
        a *= (sq + 1);
        b *= sq;
    }
    if (!(a < 2 * b)) throw Error(ErrorKind::Domain, "monotonicity certificate failed");
    p.min_segment = last_failure + 1;
    return p;
}

std::string cbin(const LangParams &params, int j) {
    if (j < 1 || j > params.level) {
        throw Error(ErrorKind::InvalidDelimiter,
                    "delimiter " + std::to_string(j) + " outside [1, " + std::to_string(params.level) + "]");
    }
    std::string r(static_cast<std::size_t>(params.delim_width), '0');
    for (int b = 0; b < params.delim_width; ++b) {
        if ((j >> b) & 1) r[static_cast<std::size_t>(params.delim_width - 1 - b)] = '1';
    }
    return r;
}

std::uint64_t srel_next_len(std::uint64_t k) {
    if (k < 2) throw Error(ErrorKind::InvalidArgument, "block length must be >= 2");
    return checked_mul(k, k) + k + 1;
}

std::string build_rl(int level, std::string_view w) {
    if (level < 0) throw Error(ErrorKind::InvalidLevel, "negative level");
    if (w.size() < 2) throw Error(ErrorKind::InvalidArgument, "base block must have length >= 2");
    if (!std::all_of(w.begin(), w.end(), is_ab)) {
        throw Error(ErrorKind::InvalidInput, "base block must be over {a,b}");
    }
    std::string s(w);
    for (int t = 0; t < level; ++t) {
        std::size_t k = s.size();
        std::uint64_t next = srel_next_len(k);
        if (next > (1u << 26)) throw Error(ErrorKind::Resource, "RL string longer than 2^26");
        std::string out;
        out.reserve(static_cast<std::size_t>(next));
        out += s;
        out += "$1";
        for (std::size_t seg = 0; seg + 1 < k; ++seg) {
            out.append(k, 'a');
            out.push_back('1');
        }
        s = std::move(out);
    }
    return s;
}

bool is_member(Family family, std::optional<int> level, std::string_view s) {
    require_level(family, level);
    check_alphabet(family, s);
    switch (family) {
        case Family::EQ: {
            std::size_t n = s.size();
            if (n % 2 != 0) return false;
            for (std::size_t t = 0; t < n; ++t) {
                if (s[t] != (t < n / 2 ? 'a' : 'b')) return false;
            }
            return true;
        }
        case Family::PAL: return is_palindrome(s);
        case Family::RL: return rl_member(*level, s);
        case Family::RPAL: {
            if (!rl_member(*level, s)) return false;
            return is_palindrome(s.substr(0, s.find('$')));
        }
        case Family::PPAL: return ppal_member(lang_params(*level), s);
        case Family::PPPAL: return pppal_member(lang_params(*level), s);
        case Family::SHL: return shl_member(s);
    }
    return false;
}

std::optional<int> exact_root(std::uint64_t len, int level) {
    if (level < 1) return std::nullopt;
    if (level == 1) {
        if (len > static_cast<std::uint64_t>(std::numeric_limits<int>::max())) return std::nullopt;
        return static_cast<int>(len);
    }
    double guess = std::pow(static_cast<double>(len), 1.0 / level);
    std::int64_t g = std::llround(guess);
    for (std::int64_t m = std::max<std::int64_t>(0, g - 2); m <= g + 2; ++m) {
        cpp_int v = 1;
        for (int e = 0; e < level; ++e) v *= m;
        if (v == len) return static_cast<int>(m);
    }
    return std::nullopt;
}

DelimiterSeq well_ordered_sequence(const LangParams &params, int m) {
    int i = params.level;
    if (i < 2) throw Error(ErrorKind::Domain, "well-ordered sequences need level >= 2");
    if (m < params.min_segment) {
        throw Error(ErrorKind::Domain,
                    "m=" + std::to_string(m) + " below min_segment " + std::to_string(params.min_segment));
    }
    std::uint64_t len = checked_pow(static_cast<std::uint64_t>(m), i - 1);
    if (len > (1u << 26)) throw Error(ErrorKind::Resource, "delimiter sequence longer than 2^26");
    DelimiterSeq seq;
    seq.entries.assign(static_cast<std::size_t>(len), 0);
    // Stage l fills every vacant slot whose 1-based index is a multiple of m^(l-1).
    for (int l = i; l >= 1; --l) {
        std::uint64_t stride = checked_pow(static_cast<std::uint64_t>(m), l - 1);
        for (std::uint64_t slot = stride; slot <= len; slot += stride) {
            int &e = seq.entries[static_cast<std::size_t>(slot - 1)];
            if (e == 0) e = l;
        }
    }
    return seq;
}

bool is_well_ordered(const LangParams &params, int m, const DelimiterSeq &seq) {
    int i = params.level;
    const auto &e = seq.entries;
    if (e.empty()) return false;
    for (int v : e) {
        if (v < 1 || v > i) return false;
    }
    if (std::count(e.begin(), e.end(), i) != 1 || e.back() != i) return false;
    for (int j = 2; j <= i; ++j) {
        std::int64_t run = 0;
        for (int v : e) {
            if (v >= j) {
                if (run != m - 1) return false;
                run = 0;
            } else if (v == j - 1) {
                ++run;
            }
        }
    }
    return true;
}

std::uint64_t sumdel(const DelimiterSeq &seq, int j) {
    return static_cast<std::uint64_t>(
        std::count_if(seq.entries.begin(), seq.entries.end(), [j](int v) { return v >= j; }));
}

std::string punc(const LangParams &params, std::string_view p) {
    if (!std::all_of(p.begin(), p.end(), is_ab)) throw Error(ErrorKind::InvalidInput, "punc input must be over {a,b}");
    std::optional<int> root = exact_root(p.size(), params.level);
    if (!root || *root < params.min_segment) {
        throw Error(ErrorKind::Length, "length " + std::to_string(p.size()) + " is not m^" +
                                           std::to_string(params.level) + " for an admissible m");
    }
    int m = *root;
    if (params.level == 1) return std::string(p) + cbin(params, 1);
    DelimiterSeq seq = well_ordered_sequence(params, m);
    std::string out;
    out.reserve(p.size() + seq.entries.size() * static_cast<std::size_t>(params.delim_width));
    for (std::size_t k = 0; k < seq.entries.size(); ++k) {
        out.append(p.substr(k * static_cast<std::size_t>(m), static_cast<std::size_t>(m)));
        out += cbin(params, seq.entries[k]);
    }
    return out;
}

std::string pad_suffix(const LangParams &params, int l) {
    if (l < 1) throw Error(ErrorKind::InvalidArgument, "padding level must be >= 1");
    if (l > 40) throw Error(ErrorKind::Resource, "padding level above 40");
    std::string zeros(static_cast<std::size_t>(params.delim_width), '0');
    std::string out;
    for (int cur = l; cur >= 1; --cur) {
        std::string seg(static_cast<std::size_t>(cur), 'a');
        out += '$';
        out += seg;
        std::uint64_t reps = (std::uint64_t{1} << cur) - 1;
        for (std::uint64_t r = 0; r < reps; ++r) {
            out += zeros;
            out += seg;
        }
    }
    return out;
}

std::string pad(const LangParams &params, std::string_view w) {
    int m = segl(w);
    if (m < params.min_segment) {
        throw Error(ErrorKind::MalformedInput, "first segment shorter than min_segment");
    }
    if (m > 40) throw Error(ErrorKind::Resource, "segment length above 40");
    std::uint64_t segments = checked_pow(static_cast<std::uint64_t>(m), params.level - 1);
    std::size_t stride = static_cast<std::size_t>(m + params.delim_width);
    if (w.size() != segments * stride) {
        throw Error(ErrorKind::MalformedInput, "punctuated string has the wrong length for m=" + std::to_string(m));
    }
    for (std::uint64_t k = 0; k < segments; ++k) {
        std::size_t base = static_cast<std::size_t>(k) * stride;
        for (int t = 0; t < m; ++t) {
            if (!is_ab(w[base + static_cast<std::size_t>(t)])) {
                throw Error(ErrorKind::MalformedInput, "segment " + std::to_string(k + 1) + " has the wrong length");
            }
        }
        for (int t = 0; t < params.delim_width; ++t) {
            if (!is_bit(w[base + static_cast<std::size_t>(m + t)])) {
                throw Error(ErrorKind::MalformedInput, "delimiter " + std::to_string(k + 1) + " is malformed");
            }
        }
    }
    std::uint64_t fill = (std::uint64_t{1} << m) - segments - 1;
    std::string zeros(static_cast<std::size_t>(params.delim_width), '0');
    std::string seg(static_cast<std::size_t>(m), 'a');
    std::string out(w);
    for (std::uint64_t r = 0; r < fill; ++r) {
        out += seg;
        out += zeros;
    }
    out += seg;
    if (m >= 2) out += pad_suffix(params, m - 1);
    return out;
}

int segl(std::string_view w) {
    std::size_t pos = w.find_first_of("01");
    if (pos == std::string_view::npos) throw Error(ErrorKind::UndefinedSegl, "no binary symbol in string");
    return static_cast<int>(pos);
}

std::uint64_t total_length(const LangParams &params, int m) {
    if (m < params.min_segment) throw Error(ErrorKind::Domain, "m below min_segment");
    if (m > 58) throw Error(ErrorKind::Resource, "m above 58 overflows 64-bit lengths");
    std::uint64_t um = static_cast<std::uint64_t>(m);
    std::uint64_t p = std::uint64_t{1} << (m + 1);
    return (um - 1) * p + static_cast<std::uint64_t>(params.delim_width) * (p - um - 2) + um + 1;
}

std::string build_pppal(const LangParams &params, std::string_view p) { return pad(params, punc(params, p)); }

Census census(const LangParams &params, std::string_view s) {
    (void)params;
    Census c;
    char prev = 0;
    for (char ch : s) {
        if (is_ab(ch) && !is_ab(prev)) ++c.segments;
        if (is_bit(ch) && !is_bit(prev)) ++c.binary_delimiters;
        if (ch == '$') ++c.dollars;
        prev = ch;
    }
    return c;
}

std::string build_shl(int k) {
    if (k < 1) throw Error(ErrorKind::InvalidArgument, "SHL needs k >= 1");
    std::string out = bin(0);
    for (int t = 1; t <= k; ++t) {
        out += '$';
        out += bin(t);
    }
    return out;
}

}  // namespace qcfa::lang
