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


#include <charconv>
#include <cmath>
#include <numbers>
#include <numeric>

#include "qcfa/builders.hpp"

namespace qcfa::builders {

using machine::Kind;
using machine::SpecBuilder;
using machine::Transition;
using qk::Matrix;

Rational Rational::parse(std::string_view text) {
    auto parse_int = [&](std::string_view part) {
        std::int64_t v = 0;
        auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
        if (ec != std::errc() || ptr != part.data() + part.size()) {
            throw Error(ErrorKind::InvalidArgument, "malformed rational '" + std::string(text) + "'");
        }
        return v;
    };
    Rational r;
    std::size_t slash = text.find('/');
    if (slash == std::string_view::npos) {
        r.num = parse_int(text);
        r.den = 1;
    } else {
        r.num = parse_int(text.substr(0, slash));
        r.den = parse_int(text.substr(slash + 1));
    }
    if (r.den <= 0 || r.num <= 0 || 2 * r.num >= r.den) {
        throw Error(ErrorKind::InvalidArgument, "epsilon must lie in (0, 1/2), got '" + std::string(text) + "'");
    }
    std::int64_t g = std::gcd(r.num, r.den);
    r.num /= g;
    r.den /= g;
    return r;
}

std::string Rational::str() const { return std::to_string(num) + "/" + std::to_string(den); }

namespace {

// ceil(log2(1/eps)) in exact integer arithmetic.
int ceil_log2_inverse(const Rational &eps) {
    int t = 0;
    std::int64_t v = eps.num;
    while (v < eps.den) {
        v *= 2;
        ++t;
    }
    return t;
}

}  // namespace

int eq_coins(const Rational &eps) { return 1 + ceil_log2_inverse(eps); }
int pal_sweeps(const Rational &eps) { return 6 + ceil_log2_inverse(eps); }
int default_k_eps(const Rational &eps) { return 6 + ceil_log2_inverse(eps); }

// EQ: each round rotates by +theta per a and -theta per b, measures at the
// right end, then runs two walks and k coins as the acceptance gate.
Fragment build_eq_core(const Rational &eps) {
    const int k = eq_coins(eps);
    SpecBuilder b(Kind::QuantumClassical, "ab", 2);
    b.set_start("eq.reset");
    b.set_halting("eq.acc", "eq.rej");
    const double theta = std::numbers::pi * std::numbers::sqrt2;
    int id = b.channel(qk::identity_channel(2));
    int coin = b.channel(qk::coin_channel(2));
    int reset = b.channel(qk::reset_channel("reset.eq", qk::Vector::Unit(2, 0)));
    int plus = b.channel(qk::rotation_channel("eq.rot+", theta));
    int minus = b.channel(qk::rotation_channel("eq.rot-", -theta));
    Matrix p0 = Matrix::Zero(2, 2), p1 = Matrix::Zero(2, 2);
    p0(0, 0) = 1.0;
    p1(1, 1) = 1.0;
    int meas = b.channel(qk::projective_channel("eq.meas", {"m0", "m1"}, {p0, p1}));

    int s_reset = b.state("eq.reset"), s_rot = b.state("eq.rot");
    int s_back1 = b.state("eq.back1"), s_walk1 = b.state("eq.walk1");
    int s_back2 = b.state("eq.back2"), s_walk2 = b.state("eq.walk2");
    int acc = b.state("eq.acc"), rej = b.state("eq.rej");
    std::vector<int> coins;
    for (int c = 1; c <= k; ++c) coins.push_back(b.state("eq.coin" + std::to_string(c)));

    b.set(s_reset, '<', reset, std::vector<Transition>(2, {s_rot, +1}));
    for (char c : {'a', 'b', '>'}) b.set(s_reset, c, id, {{s_reset, -1}});

    b.set(s_rot, '<', id, {{s_rot, +1}});
    b.set(s_rot, 'a', plus, {{s_rot, +1}});
    b.set(s_rot, 'b', minus, {{s_rot, +1}});
    b.set(s_rot, '>', meas, {{s_back1, -1}, {rej, 0}});

    auto walk = [&](int back, int walker, int on_right) {
        b.set(back, '<', id, {{walker, +1}});
        for (char c : {'a', 'b', '>'}) b.set(back, c, id, {{back, -1}});
        b.set(walker, '<', id, {{s_reset, 0}});
        for (char c : {'a', 'b'}) b.set(walker, c, coin, {{walker, +1}, {walker, -1}});
        b.set(walker, '>', id, {{on_right, 0}});
    };
    walk(s_back1, s_walk1, s_back2);
    walk(s_back2, s_walk2, coins.empty() ? acc : coins.front());

    for (std::size_t c = 0; c < coins.size(); ++c) {
        int next = c + 1 < coins.size() ? coins[c + 1] : acc;
        b.set(coins[c], '>', coin, {{next, 0}, {s_reset, 0}});
        for (char s : {'<', 'a', 'b'}) b.set(coins[c], s, id, {{rej, 0}});
    }
    b.metadata()["builder"] = "eq_core";
    b.metadata()["epsilon"] = eps.str();
    b.metadata()["k_eq"] = k;
    Fragment f{b.finish(), "eq.reset", {{"accept", "eq.acc"}, {"reject", "eq.rej"}}};
    return f;
}

Eigen::MatrixXd pal_counter_matrix(char sigma) {
    double d = sigma == 'a' ? 1.0 : 2.0;
    if (sigma != 'a' && sigma != 'b') throw Error(ErrorKind::InvalidInput, "PAL counter symbol must be a or b");
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(4, 4);
    m(0, 0) = 1.0;
    m(1, 1) = 4.0;
    m(2, 2) = 4.0;
    m(2, 0) = d;
    m(3, 3) = 1.0;
    m(3, 1) = d;
    return m;
}

std::uint64_t pal_encoding(std::string_view w) {
    std::uint64_t e = 0, p = 1;
    for (char c : w) {
        e += (c == 'a' ? 1u : 2u) * p;
        p *= 4;
    }
    return e;
}

// PAL: each pass applies M_sigma/8 through a dilation (the restart outcome
// aborts the round), then measures the (y - z) axis at the right end.
Fragment build_pal_core(const Rational &eps, int sweeps_override) {
    const int j = sweeps_override > 0 ? sweeps_override : pal_sweeps(eps);
    SpecBuilder b(Kind::QuantumClassical, "ab", 4);
    b.set_start("pal.reset");
    b.set_halting("pal.acc", "pal.rej");
    int id = b.channel(qk::identity_channel(4));
    int coin = b.channel(qk::coin_channel(4));
    qk::Vector start = qk::Vector::Zero(4);
    start(0) = start(1) = 1.0;
    int reset = b.channel(qk::reset_channel("reset.pal", start));
    int da = b.channel(qk::dilate_contraction(pal_counter_matrix('a'), 8.0, "pal.a"));
    int db = b.channel(qk::dilate_contraction(pal_counter_matrix('b'), 8.0, "pal.b"));
    qk::Vector v = qk::Vector::Zero(4);
    v(2) = std::sqrt(0.5);
    v(3) = -std::sqrt(0.5);
    Matrix pd = v * v.adjoint();
    int meas = b.channel(qk::projective_channel("pal.diff", {"diff", "same"}, {pd, Matrix::Identity(4, 4) - pd}));

    int s_reset = b.state("pal.reset"), s_pass = b.state("pal.pass");
    int acc = b.state("pal.acc"), rej = b.state("pal.rej");
    std::vector<int> back, sweep;
    for (int t = 1; t <= j; ++t) {
        back.push_back(b.state("pal.back" + std::to_string(t)));
        sweep.push_back(b.state("pal.sweep" + std::to_string(t)));
    }
    b.set(s_reset, '<', reset, std::vector<Transition>(4, {s_pass, +1}));
    for (char c : {'a', 'b', '>'}) b.set(s_reset, c, id, {{s_reset, -1}});

    b.set(s_pass, '<', id, {{s_pass, +1}});
    b.set(s_pass, 'a', da, {{"go", {s_pass, +1}}, {"restart", {s_reset, -1}}});
    b.set(s_pass, 'b', db, {{"go", {s_pass, +1}}, {"restart", {s_reset, -1}}});
    b.set(s_pass, '>', meas, {{"diff", {rej, 0}}, {"same", {back[0], -1}}});

    for (int t = 0; t < j; ++t) {
        int bk = back[static_cast<std::size_t>(t)], sw = sweep[static_cast<std::size_t>(t)];
        b.set(bk, '<', id, {{sw, +1}});
        for (char c : {'a', 'b', '>'}) b.set(bk, c, id, {{bk, -1}});
        b.set(sw, '<', id, {{rej, 0}});
        for (char c : {'a', 'b'}) b.set(sw, c, coin, {{sw, +1}, {s_reset, -1}});
        int after = t + 1 < j ? back[static_cast<std::size_t>(t + 1)] : acc;
        b.set(sw, '>', id, {{after, after == acc ? 0 : -1}});
    }
    b.metadata()["builder"] = "pal_core";
    b.metadata()["epsilon"] = eps.str();
    b.metadata()["j"] = j;
    return Fragment{b.finish(), "pal.reset", {{"accept", "pal.acc"}, {"reject", "pal.rej"}}};
}

Fragment build_rw_gate(int k_eps, const std::string &alphabet) {
    if (k_eps < 0) throw Error(ErrorKind::InvalidArgument, "k_eps must be >= 0");
    SpecBuilder b(Kind::Classical, alphabet, 1);
    b.set_start("rw.start");
    b.set_halting("rw.exit", "rw.continue");
    int id = b.channel(qk::identity_channel(1));
    int coin = b.channel(qk::coin_channel(1));
    int start = b.state("rw.start"), walk = b.state("rw.walk");
    int exit = b.state("rw.exit"), cont = b.state("rw.continue");
    std::vector<int> coins;
    for (int c = 1; c <= k_eps; ++c) coins.push_back(b.state("rw.coin" + std::to_string(c)));
    b.set(start, '<', id, {{walk, +1}});
    b.set(start, '>', id, {{start, -1}});
    b.set(walk, '<', id, {{cont, 0}});
    b.set(walk, '>', id, {{coins.empty() ? exit : coins.front(), 0}});
    for (char c : alphabet) {
        b.set(start, c, id, {{start, -1}});
        b.set(walk, c, coin, {{walk, +1}, {walk, -1}});
    }
    for (std::size_t c = 0; c < coins.size(); ++c) {
        int next = c + 1 < coins.size() ? coins[c + 1] : exit;
        b.set(coins[c], '>', coin, {{next, 0}, {cont, 0}});
        b.set(coins[c], '<', id, {{cont, 0}});
        for (char s : alphabet) b.set(coins[c], s, id, {{cont, 0}});
    }
    b.metadata()["builder"] = "rw_gate";
    b.metadata()["k_eps"] = k_eps;
    b.metadata()["accept_alias"] = "exit";
    return Fragment{b.finish(), "rw.start", {{"exit", "rw.exit"}, {"continue", "rw.continue"}}};
}

}  // namespace qcfa::builders
