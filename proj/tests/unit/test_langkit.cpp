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


#include <gtest/gtest.h>

#include <random>

#include "qcfa/langkit.hpp"

using namespace qcfa;
using namespace qcfa::lang;

TEST(LangParams, WidthsAndMinimumSegments) {
    EXPECT_EQ(lang_params(1).delim_width, 1);
    EXPECT_EQ(lang_params(3).delim_width, 2);
    EXPECT_EQ(lang_params(4).delim_width, 3);
    EXPECT_EQ(lang_params(3).min_segment, 5);
    EXPECT_EQ(lang_params(1).min_segment, 2);
    EXPECT_THROW(lang_params(0), Error);
}

TEST(LangParams, Cbin) {
    EXPECT_EQ(cbin(lang_params(3), 1), "01");
    EXPECT_EQ(cbin(lang_params(3), 2), "10");
    EXPECT_EQ(cbin(lang_params(3), 3), "11");
    EXPECT_EQ(cbin(lang_params(4), 2), "010");
    EXPECT_EQ(cbin(lang_params(1), 1), "1");
    EXPECT_THROW(cbin(lang_params(2), 3), Error);
}

TEST(Rl, Recursion) {
    EXPECT_EQ(srel_next_len(2), 7u);
    EXPECT_EQ(srel_next_len(7), 57u);
    EXPECT_EQ(srel_next_len(57), 3307u);
    EXPECT_EQ(build_rl(1, "ab"), "ab$1aa1");
    EXPECT_EQ(build_rl(0, "ab"), "ab");
    std::string two = build_rl(2, "ab");
    EXPECT_EQ(two.size(), 57u);
    EXPECT_EQ(two.rfind("ab$1aa1$1", 0), 0u);
    EXPECT_THROW(build_rl(1, "a"), Error);
}

TEST(Membership, Examples) {
    EXPECT_TRUE(is_member(Family::RPAL, 1, "aa$1aa1"));
    EXPECT_FALSE(is_member(Family::RPAL, 1, "ab$1aa1"));
    EXPECT_TRUE(is_member(Family::RL, 1, "ab$1aa1"));
    EXPECT_TRUE(is_member(Family::PPPAL, 1, "aa1aa0aa0aa$a0a"));
    EXPECT_TRUE(is_member(Family::SHL, std::nullopt, "0$1$10$11"));
    EXPECT_FALSE(is_member(Family::SHL, std::nullopt, "0$1$11"));
    EXPECT_TRUE(is_member(Family::EQ, std::nullopt, "aabb"));
    EXPECT_TRUE(is_member(Family::PAL, std::nullopt, "aba"));
    EXPECT_FALSE(is_member(Family::PAL, std::nullopt, "ab"));
}

TEST(Membership, ArgumentErrors) {
    EXPECT_THROW(is_member(Family::RPAL, std::nullopt, "aa"), Error);
    EXPECT_THROW(is_member(Family::PAL, 1, "aa"), Error);
    EXPECT_THROW(is_member(Family::PAL, std::nullopt, "axa"), Error);
}

TEST(WellOrdered, Sequences) {
    EXPECT_EQ(well_ordered_sequence(lang_params(2), 2).entries, (std::vector<int>{1, 2}));
    EXPECT_EQ(well_ordered_sequence(lang_params(2), 3).entries, (std::vector<int>{1, 1, 2}));
    DelimiterSeq s = well_ordered_sequence(lang_params(3), 5);
    ASSERT_EQ(s.entries.size(), 25u);
    for (std::size_t k = 1; k <= 25; ++k) {
        int want = k == 25 ? 3 : (k % 5 == 0 ? 2 : 1);
        EXPECT_EQ(s.entries[k - 1], want) << "slot " << k;
    }
    EXPECT_TRUE(is_well_ordered(lang_params(3), 5, s));
    DelimiterSeq swapped = s;
    std::swap(swapped.entries[4], swapped.entries[5]);
    EXPECT_FALSE(is_well_ordered(lang_params(3), 5, swapped));
    EXPECT_FALSE(is_well_ordered(lang_params(2), 2, DelimiterSeq{{2, 1}}));
    EXPECT_EQ(sumdel(s, 1), 25u);
    EXPECT_EQ(sumdel(s, 2), 5u);
    EXPECT_EQ(sumdel(s, 3), 1u);
}

TEST(Padding, Examples) {
    EXPECT_EQ(punc(lang_params(1), "aa"), "aa1");
    EXPECT_EQ(punc(lang_params(2), "abba"), "ab01ba10");
    EXPECT_EQ(pad(lang_params(1), "aa1"), "aa1aa0aa0aa$a0a");
    EXPECT_EQ(pad(lang_params(1), "aaa1").size(), 47u);
    EXPECT_EQ(pad_suffix(lang_params(1), 2), "$aa0aa0aa0aa$a0a");
    EXPECT_EQ(segl("aa1aa0aa0aa$a0a"), 2);
    EXPECT_EQ(segl("ab01ba10"), 2);
    EXPECT_EQ(total_length(lang_params(1), 2), 15u);
    EXPECT_EQ(total_length(lang_params(1), 3), 47u);
    std::string p125(125, 'a');
    std::string w = punc(lang_params(3), p125);
    EXPECT_EQ(segl(w), 5);
    EXPECT_EQ(census(lang_params(3), w).segments, 25u);
}

TEST(Padding, CensusCounts) {
    for (int m = 2; m <= 7; ++m) {
        std::string s = build_pppal(lang_params(1), std::string(static_cast<std::size_t>(m), 'a'));
        Census c = census(lang_params(1), s);
        EXPECT_EQ(c.segments, (std::uint64_t{1} << (m + 1)) - 2);
        EXPECT_EQ(c.binary_delimiters, (std::uint64_t{1} << (m + 1)) - static_cast<std::uint64_t>(m) - 2);
        EXPECT_EQ(c.dollars, static_cast<std::uint64_t>(m) - 1);
    }
}

TEST(Shl, Builder) {
    EXPECT_EQ(build_shl(3), "0$1$10$11");
    EXPECT_TRUE(is_member(Family::SHL, std::nullopt, build_shl(9)));
}

// Round trip: generated members pass, random single-symbol mutations are
// labelled consistently with a direct rebuild.
TEST(Membership, MutationsOfMembers) {
    std::mt19937_64 rng(7);
    EXPECT_TRUE(is_member(Family::RPAL, 1, build_rl(1, "abba")));
    EXPECT_TRUE(is_member(Family::PPPAL, 2, build_pppal(lang_params(2), "abba")));
    std::string s = build_pppal(lang_params(1), "aba");
    std::string_view alpha = family_alphabet(Family::PPPAL);
    int flipped_members = 0;
    for (int t = 0; t < 200; ++t) {
        std::string u = s;
        std::size_t p = rng() % u.size();
        char c = alpha[rng() % alpha.size()];
        if (c == u[p]) continue;
        u[p] = c;
        if (is_member(Family::PPPAL, 1, u)) ++flipped_members;
    }
    // Only the palindrome side can change while staying a member, and a
    // single flip there breaks the palindrome unless it is the centre.
    EXPECT_LE(flipped_members, 5);
}

TEST(Dissimilarity, PalWitness) {
    DissimilarWitness w = dissim_lower_bound(Family::PAL, std::nullopt, 4);
    EXPECT_EQ(w.strings.size(), 4u);
    EXPECT_TRUE(verify_witness(Family::PAL, std::nullopt, w));
    auto d = find_distinguisher(Family::PAL, std::nullopt, "ab", "ba", 4);
    ASSERT_TRUE(d.has_value());
    EXPECT_NE(is_member(Family::PAL, std::nullopt, "ab" + *d), is_member(Family::PAL, std::nullopt, "ba" + *d));
}

TEST(Dissimilarity, EqWitness) {
    DissimilarWitness w = dissim_lower_bound(Family::EQ, std::nullopt, 6);
    EXPECT_GE(w.strings.size(), 4u);
    EXPECT_TRUE(verify_witness(Family::EQ, std::nullopt, w));
}
