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

#ifndef QCFA_LANGKIT_HPP
#define QCFA_LANGKIT_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "qcfa/error.hpp"

namespace qcfa::lang {

/// Language families handled by the toolkit.  RL, RPAL, PPAL and PPPAL are
/// indexed by a level i; EQ, PAL and SHL are not.
enum class Family { EQ, PAL, RL, RPAL, PPAL, PPPAL, SHL };

const char *family_name(Family family);
Family parse_family(std::string_view name);
bool family_is_indexed(Family family);

/// Symbols a family's strings may contain.
std::string_view family_alphabet(Family family);

/// Parameters of one level of the punctuated/padded families.
struct LangParams {
    int level = 1;          // i
    int delim_width = 1;    // symbols per binary delimiter
    int min_segment = 2;    // least admissible segment length
};

LangParams lang_params(int level);

/// Fixed-width binary rendering of delimiter value j (1 <= j <= level).
std::string cbin(const LangParams &params, int j);

/// Length of the next block-prefix of an RL member: k*k + k + 1.
std::uint64_t srel_next_len(std::uint64_t k);

/// Applies the RL recursion `level` times to w.
std::string build_rl(int level, std::string_view w);

/// Exact membership.  Throws Error(InvalidInput) for symbols outside the
/// family's alphabet, Error(InvalidArgument) when the index is missing or
/// supplied for an unindexed family.
bool is_member(Family family, std::optional<int> level, std::string_view s);

/// Delimiter values, each in [1, level].
struct DelimiterSeq {
    std::vector<int> entries;
    bool operator==(const DelimiterSeq &) const = default;
};

DelimiterSeq well_ordered_sequence(const LangParams &params, int m);
bool is_well_ordered(const LangParams &params, int m, const DelimiterSeq &seq);

/// Number of entries with value >= j.
std::uint64_t sumdel(const DelimiterSeq &seq, int j);

std::string punc(const LangParams &params, std::string_view p);
std::string pad(const LangParams &params, std::string_view w);
std::string pad_suffix(const LangParams &params, int l);  // p_{i,l}
int segl(std::string_view w);
std::uint64_t total_length(const LangParams &params, int m);

/// Member of PPPAL_i built from the palindrome-side string p (|p| = m^i).
/// Palindromeness of p is not required.
std::string build_pppal(const LangParams &params, std::string_view p);

/// Segment / separator census of a padded string.
struct Census {
    std::uint64_t segments = 0;
    std::uint64_t binary_delimiters = 0;
    std::uint64_t dollars = 0;
};
Census census(const LangParams &params, std::string_view s);

/// Integer m with m^level == len, if one exists.
std::optional<int> exact_root(std::uint64_t len, int level);

/// Bin(0)$bin(1)$...$bin(k).
std::string build_shl(int k);

// ---------------------------------------------------------------------------
// Dissimilarity

struct DistinguishedPair {
    std::string left;
    std::string right;
    std::string suffix;
};

struct DissimilarWitness {
    int n = 0;
    std::vector<std::string> strings;
    std::vector<DistinguishedPair> pairs;
    std::string method;  // "constructive" or "exhaustive"
};

struct DissimOptions {
    int max_n = 14;
    std::uint64_t max_candidates = 1u << 21;
    std::size_t max_witness = 256;
    bool exhaustive = false;
};

/// Pairwise n-dissimilar set.  Constructive families from the separation
/// arguments are used by default where they exist; `exhaustive` computes
/// the exact maximum by clique search over equivalence classes.
DissimilarWitness dissim_lower_bound(Family family, std::optional<int> level, int n,
                                     const DissimOptions &options = {});

/// Re-checks every stored pair against the membership oracle.
bool verify_witness(Family family, std::optional<int> level, const DissimilarWitness &witness);

/// Shortest distinguishing suffix with |wv|, |w'v| <= n, if any.
std::optional<std::string> find_distinguisher(Family family, std::optional<int> level,
                                              std::string_view w, std::string_view w2, int n);

std::string witness_to_json(const DissimilarWitness &witness);

}  // namespace qcfa::lang

#endif
