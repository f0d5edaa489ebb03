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
#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <random>
#include <mutex>
#include <thread>

#include "qcfa/engines.hpp"

namespace qcfa::engines {

std::uint64_t splitmix64(std::uint64_t &state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::uint64_t trial_seed(std::uint64_t seed, std::uint64_t t) {
    std::uint64_t s = seed;
    std::uint64_t a = splitmix64(s);
    std::uint64_t u = a ^ (t * 0xD1B54A32D192ED03ULL);
    return splitmix64(u);
}

namespace {

using qk::cplx;

// Flat, allocation-free view of a spec for sampling.
struct FastChannel {
    int dim = 1;
    int branches = 1;
    bool identity = false;
    bool scalar = false;
    std::vector<double> scalar_probs;  // |c_b|^2 when scalar
    std::vector<cplx> ops;             // branches * dim * dim, row-major
};

struct FastSpec {
    int nsym = 0;
    int dim = 1;
    std::vector<FastChannel> channels;
    const MachineSpec *spec = nullptr;

    explicit FastSpec(const MachineSpec &s) : nsym(s.num_symbols()), dim(s.register_dim), spec(&s) {
        for (const auto &ch : s.pool) {
            FastChannel f;
            f.dim = ch.dim();
            f.branches = static_cast<int>(ch.size());
            f.identity = ch.is_identity();
            f.scalar = ch.is_scalar();
            for (const auto &b : ch.branches()) {
                f.scalar_probs.push_back(std::norm(b.op(0, 0)));
                for (int r = 0; r < f.dim; ++r) {
                    for (int c = 0; c < f.dim; ++c) f.ops.push_back(b.op(r, c));
                }
            }
            channels.push_back(std::move(f));
        }
    }
};

inline double uniform01(std::mt19937_64 &rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

RunReport run_fast(const FastSpec &fs, const std::vector<int> &tape, std::uint64_t seed, std::uint64_t max_steps,
                   bool with_digest) {
    const MachineSpec &spec = *fs.spec;
    std::mt19937_64 rng(seed);
    int d = fs.dim;
    std::vector<cplx> psi(static_cast<std::size_t>(d)), images;
    std::vector<double> probs;
    qk::Vector r0 = spec.start_register();
    double n0 = r0.norm();
    for (int k = 0; k < d; ++k) psi[static_cast<std::size_t>(k)] = r0(k) / n0;
    int state = spec.q0;
    int head = 0;
    RunReport rep;
    rep.seed = seed;
    std::uint64_t digest = 1469598103934665603ULL;
    auto mix = [&](std::uint64_t v) {
        for (int b = 0; b < 8; ++b) {
            digest ^= (v >> (8 * b)) & 0xFF;
            digest *= 1099511628211ULL;
        }
    };
    int last = static_cast<int>(tape.size()) - 1;
    while (true) {
        if (state == spec.q_acc) {
            rep.verdict = Verdict::Accept;
            break;
        }
        if (state == spec.q_rej) {
            rep.verdict = Verdict::Reject;
            break;
        }
        if (rep.steps >= max_steps) {
            rep.verdict = Verdict::Cutoff;
            break;
        }
        if (with_digest) mix((static_cast<std::uint64_t>(state) << 32) | static_cast<std::uint32_t>(head));
        const machine::Entry &e = spec.table[static_cast<std::size_t>(state)][static_cast<std::size_t>(tape[static_cast<std::size_t>(head)])];
        if (!e.defined()) {
            throw Error(ErrorKind::Totality, "no entry for state '" + spec.states[static_cast<std::size_t>(state)] + "'");
        }
        const FastChannel &ch = fs.channels[static_cast<std::size_t>(e.channel)];
        int chosen = 0;
        if (ch.identity) {
            chosen = 0;
        } else if (ch.scalar) {
            double u = uniform01(rng);
            double acc = 0.0;
            chosen = ch.branches - 1;
            for (int b = 0; b < ch.branches; ++b) {
                acc += ch.scalar_probs[static_cast<std::size_t>(b)];
                if (u < acc) {
                    chosen = b;
                    break;
                }
            }
        } else {
            // Images of psi under every branch, then one draw.
            std::size_t need = static_cast<std::size_t>(ch.branches * d);
            if (images.size() < need) images.resize(need);
            if (probs.size() < static_cast<std::size_t>(ch.branches)) probs.resize(static_cast<std::size_t>(ch.branches));
            double total = 0.0;
            for (int b = 0; b < ch.branches; ++b) {
                const cplx *op = &ch.ops[static_cast<std::size_t>(b * d * d)];
                cplx *out = &images[static_cast<std::size_t>(b * d)];
                double p = 0.0;
                for (int r = 0; r < d; ++r) {
                    cplx s = 0.0;
                    for (int c = 0; c < d; ++c) s += op[r * d + c] * psi[static_cast<std::size_t>(c)];
                    out[r] = s;
                    p += std::norm(s);
                }
                probs[static_cast<std::size_t>(b)] = p;
                total += p;
            }
            if (!(total > 0.0)) throw Error(ErrorKind::IncompleteChannel, "channel annihilated the register");
            double u = uniform01(rng) * total;
            chosen = -1;
            double acc = 0.0;
            for (int b = 0; b < ch.branches; ++b) {
                if (probs[static_cast<std::size_t>(b)] <= 0.0) continue;
                acc += probs[static_cast<std::size_t>(b)];
                chosen = b;
                if (u < acc) break;
            }
            double inv = 1.0 / std::sqrt(probs[static_cast<std::size_t>(chosen)]);
            const cplx *img = &images[static_cast<std::size_t>(chosen * d)];
            for (int r = 0; r < d; ++r) psi[static_cast<std::size_t>(r)] = img[r] * inv;
        }
        const machine::Transition &t = e.outcomes[static_cast<std::size_t>(chosen)];
        state = t.next;
        head += t.move;
        if (head < 0 || head > last) throw Error(ErrorKind::Totality, "head left the tape");
        ++rep.steps;
    }
    if (with_digest) {
        mix(rep.steps);
        rep.digest = digest;
    }
    return rep;
}

}  // namespace

RunReport run_trajectory(const MachineSpec &spec, std::string_view input, std::uint64_t seed,
                         std::uint64_t max_steps, bool with_digest) {
    FastSpec fs(spec);
    return run_fast(fs, spec.encode_tape(input), seed, max_steps, with_digest);
}

double normal_quantile(double confidence) {
    if (!(confidence > 0.0 && confidence < 1.0)) throw Error(ErrorKind::InvalidArgument, "confidence must be in (0,1)");
    boost::math::normal_distribution<double> n;
    return boost::math::quantile(n, 0.5 + confidence / 2.0);
}

Interval wilson_interval(std::uint64_t successes, std::uint64_t trials, double confidence) {
    if (trials == 0) return {0.0, 1.0};
    double z = normal_quantile(confidence);
    double n = static_cast<double>(trials);
    double p = static_cast<double>(successes) / n;
    double z2 = z * z;
    double denom = 1.0 + z2 / n;
    double centre = (p + z2 / (2.0 * n)) / denom;
    double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
    Interval iv{std::max(0.0, centre - half), std::min(1.0, centre + half)};
    if (successes == 0) iv.lo = 0.0;
    if (successes == trials) iv.hi = 1.0;
    return iv;
}

EstimateReport estimate(const MachineSpec &spec, std::string_view input, const EstimateOptions &options) {
    if (options.trials < 1) throw Error(ErrorKind::InvalidArgument, "trials must be >= 1");
    FastSpec fs(spec);
    std::vector<int> tape = spec.encode_tape(input);
    std::uint64_t n = options.trials;
    std::vector<std::uint8_t> verdicts(n);
    std::vector<std::uint64_t> steps(n);
    int threads = options.threads > 0 ? options.threads : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    threads = static_cast<int>(std::min<std::uint64_t>(static_cast<std::uint64_t>(threads), n));
    auto work = [&](std::uint64_t begin, std::uint64_t end) {
        for (std::uint64_t t = begin; t < end; ++t) {
            RunReport r = run_fast(fs, tape, trial_seed(options.seed, t), options.max_steps, false);
            verdicts[t] = static_cast<std::uint8_t>(r.verdict);
            steps[t] = r.steps;
        }
    };
    if (threads <= 1) {
        work(0, n);
    } else {
        std::vector<std::thread> pool;
        std::exception_ptr failure;
        std::mutex m;
        std::uint64_t chunk = (n + static_cast<std::uint64_t>(threads) - 1) / static_cast<std::uint64_t>(threads);
        for (int k = 0; k < threads; ++k) {
            std::uint64_t b = static_cast<std::uint64_t>(k) * chunk;
            std::uint64_t e = std::min(n, b + chunk);
            if (b >= e) break;
            pool.emplace_back([&, b, e] {
                try {
                    work(b, e);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(m);
                    if (!failure) failure = std::current_exception();
                }
            });
        }
        for (auto &th : pool) th.join();
        if (failure) std::rethrow_exception(failure);
    }
    EstimateReport rep;
    rep.trials = n;
    rep.seed = options.seed;
    rep.max_steps = options.max_steps;
    rep.confidence = options.confidence;
    long double total = 0.0L;
    for (std::uint64_t t = 0; t < n; ++t) {
        switch (static_cast<Verdict>(verdicts[t])) {
            case Verdict::Accept: ++rep.accepts; break;
            case Verdict::Reject: ++rep.rejects; break;
            case Verdict::Cutoff: ++rep.cutoffs; break;
        }
        total += static_cast<long double>(steps[t]);
    }
    rep.p_hat = static_cast<double>(rep.accepts) / static_cast<double>(n);
    rep.wilson = wilson_interval(rep.accepts, n, options.confidence);
    rep.mean_steps = static_cast<double>(total / static_cast<long double>(n));
    std::vector<std::uint64_t> sorted = steps;
    std::sort(sorted.begin(), sorted.end());
    rep.median_steps = n % 2 == 1 ? static_cast<double>(sorted[n / 2])
                                  : 0.5 * (static_cast<double>(sorted[n / 2 - 1]) + static_cast<double>(sorted[n / 2]));
    return rep;
}

nlohmann::json to_json(const RunReport &r) {
    nlohmann::json j;
    j["verdict"] = machine::verdict_name(r.verdict);
    j["steps"] = r.steps;
    j["seed"] = r.seed;
    if (r.digest != 0) j["digest"] = r.digest;
    return j;
}

nlohmann::json to_json(const EstimateReport &r, const std::string &accept_alias) {
    nlohmann::json j;
    j["verdict_counts"] = {{"accept", r.accepts}, {"reject", r.rejects}, {"cutoff", r.cutoffs}};
    j["trials"] = r.trials;
    j["p_hat"] = r.p_hat;
    j["wilson_lo"] = r.wilson.lo;
    j["wilson_hi"] = r.wilson.hi;
    j["confidence"] = r.confidence;
    j["mean_steps"] = r.mean_steps;
    j["median_steps"] = r.median_steps;
    j["cutoffs"] = r.cutoffs;
    j["seed"] = r.seed;
    j["max_steps"] = r.max_steps;
    if (!accept_alias.empty()) j["p_" + accept_alias + "_hat"] = r.p_hat;
    return j;
}

}  // namespace qcfa::engines
