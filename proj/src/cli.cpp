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


#include "qcfa/cli.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <iomanip>
#include <optional>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "qcfa/builders.hpp"
#include "qcfa/engines.hpp"
#include "qcfa/langkit.hpp"
#include "qcfa/machine.hpp"
#include "qcfa/suites.hpp"

namespace qcfa::cli {

namespace {

using machine::MachineSpec;
using nlohmann::json;

struct Common {
    std::string out;
    bool no_timestamp = false;
};

// Where a machine comes from: a spec file or an in-memory builder.
struct Source {
    std::string spec_path;
    std::string builder;
    int level = 1;
    std::string eps = "1/5";
    int k_eps = -1;
    int sweeps = 0;
    std::string delimiter = "$";
};

const std::vector<std::string> kBuilders{"rpal", "pppal", "eq-core", "pal-core", "rw-gate", "pal-check"};

void add_common(CLI::App *sub, Common &c) {
    sub->add_option("--out", c.out, "write the report to this file (atomically) instead of stdout");
    sub->add_flag("--no-timestamp", c.no_timestamp, "omit the timestamp from the provenance block");
}

void add_source(CLI::App *sub, Source &s) {
    sub->add_option("--spec", s.spec_path, "machine spec file");
    sub->add_option("--builder", s.builder, "build the machine in memory")->check(CLI::IsMember(kBuilders));
    sub->add_option("--i", s.level, "template level");
    sub->add_option("--eps", s.eps, "error bound as a rational string, e.g. 1/5");
    sub->add_option("--k-eps", s.k_eps, "gate coin count; default 6 + ceil(log2(1/eps))");
    sub->add_option("--sweeps", s.sweeps, "PAL core acceptance sweeps (0: derived from eps)");
    sub->add_option("--delimiter", s.delimiter, "delimiter token for pal-check");
}

int k_of(const Source &s, const builders::Rational &eps) { return s.k_eps >= 0 ? s.k_eps : builders::default_k_eps(eps); }

MachineSpec make_spec(const Source &s) {
    if (s.spec_path.empty() == s.builder.empty()) {
        throw Error(ErrorKind::InvalidArgument, "give exactly one of --spec or --builder");
    }
    if (!s.spec_path.empty()) return machine::load_spec(s.spec_path);
    builders::Rational eps = builders::Rational::parse(s.eps);
    if (s.builder == "rpal") return builders::compile_rpal(s.level, eps, k_of(s, eps));
    if (s.builder == "pppal") return builders::compile_pppal(s.level, eps, k_of(s, eps));
    if (s.builder == "eq-core") return builders::build_eq_core(eps).spec;
    if (s.builder == "pal-core") return builders::build_pal_core(eps, s.sweeps).spec;
    if (s.builder == "rw-gate") return builders::build_rw_gate(std::max(0, k_of(s, eps))).spec;
    return builders::build_pal_check(s.delimiter, "ab01$", lang::lang_params(s.level).delim_width, eps).spec;
}

json source_params(const Source &s) {
    if (!s.spec_path.empty()) return {{"spec", s.spec_path}};
    json j{{"builder", s.builder}, {"i", s.level}, {"eps", s.eps}};
    if (s.k_eps >= 0) j["k_eps"] = s.k_eps;
    if (s.sweeps > 0) j["sweeps"] = s.sweeps;
    if (s.builder == "pal-check") j["delimiter"] = s.delimiter;
    return j;
}

std::string accept_alias(const MachineSpec &spec) {
    auto it = spec.metadata.find("accept_alias");
    return it != spec.metadata.end() && it->is_string() ? it->get<std::string>() : std::string();
}

std::string utc_now() {
    std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

json provenance(const std::string &command, json params, std::optional<std::uint64_t> seed, const Common &c) {
    json p{{"tool", "qcfa"}, {"version", kVersion}, {"command", command}, {"parameters", std::move(params)}};
    if (seed) p["seed"] = *seed;
    if (!c.no_timestamp) p["timestamp"] = utc_now();
    return p;
}

json report(const std::string &command, json params, std::optional<std::uint64_t> seed, const Common &c, json result) {
    return {{"schema", kReportSchema}, {"provenance", provenance(command, std::move(params), seed, c)}, {"result", std::move(result)}};
}

void emit(const std::string &text, const Common &c, std::ostream &out) {
    if (c.out.empty()) {
        out << text;
    } else {
        machine::write_file_atomic(c.out, text);
    }
}

void emit(const json &j, const Common &c, std::ostream &out) { emit(j.dump(2) + "\n", c, out); }

// ---------------------------------------------------------------------------
// gen

std::vector<std::string> palindromes(std::size_t len, std::size_t limit) {
    std::vector<std::string> out;
    std::size_t half = (len + 1) / 2;
    std::uint64_t total = half >= 63 ? ~std::uint64_t{0} : (std::uint64_t{1} << half);
    for (std::uint64_t bits = 0; bits < total && out.size() < limit; ++bits) {
        std::string w(len, 'a');
        for (std::size_t p = 0; p < half && p < 64; ++p) {
            char c = (bits >> (half - 1 - p)) & 1 ? 'b' : 'a';
            w[p] = c;
            w[len - 1 - p] = c;
        }
        out.push_back(std::move(w));
    }
    return out;
}

std::vector<std::string> words(std::size_t len, std::size_t limit) {
    std::vector<std::string> out;
    std::uint64_t total = len >= 63 ? ~std::uint64_t{0} : (std::uint64_t{1} << len);
    for (std::uint64_t bits = 0; bits < total && out.size() < limit; ++bits) {
        std::string w(len, 'a');
        for (std::size_t p = 0; p < len && p < 64; ++p) {
            if ((bits >> (len - 1 - p)) & 1) w[p] = 'b';
        }
        out.push_back(std::move(w));
    }
    return out;
}

std::size_t side_length(int m, int level) {
    std::size_t side = 1;
    for (int r = 0; r < level; ++r) {
        side *= static_cast<std::size_t>(m);
        if (side > (std::size_t{1} << 20)) throw Error(ErrorKind::Resource, "palindrome side longer than 2^20");
    }
    return side;
}

std::vector<std::string> members(lang::Family f, int level, int m, std::size_t limit) {
    using lang::Family;
    std::vector<std::string> out;
    switch (f) {
        case Family::EQ: out.push_back(std::string(static_cast<std::size_t>(m), 'a') + std::string(static_cast<std::size_t>(m), 'b')); break;
        case Family::PAL: out = palindromes(static_cast<std::size_t>(m), limit); break;
        case Family::SHL: out.push_back(lang::build_shl(m)); break;
        case Family::RL:
            for (const auto &w : words(static_cast<std::size_t>(m), limit)) out.push_back(lang::build_rl(level, w));
            break;
        case Family::RPAL:
            for (const auto &w : palindromes(static_cast<std::size_t>(m), limit)) out.push_back(lang::build_rl(level, w));
            break;
        case Family::PPAL:
        case Family::PPPAL: {
            lang::LangParams p = lang::lang_params(level);
            if (m < p.min_segment) {
                throw Error(ErrorKind::Domain, "m must be at least " + std::to_string(p.min_segment) + " at level " + std::to_string(level));
            }
            for (const auto &w : palindromes(side_length(m, level), limit)) {
                out.push_back(f == Family::PPAL ? lang::punc(p, w) : lang::build_pppal(p, w));
            }
            break;
        }
    }
    return out;
}

// Single-symbol substitutions and deletions that leave the language.
std::vector<std::string> near_members(lang::Family f, std::optional<int> level, const std::vector<std::string> &base,
                                      std::size_t limit) {
    std::string_view alphabet = lang::family_alphabet(f);
    std::vector<std::string> out;
    std::set<std::string> seen;
    auto offer = [&](const std::string &s) {
        if (out.size() < limit && seen.insert(s).second && !lang::is_member(f, level, s)) out.push_back(s);
    };
    for (const auto &s : base) {
        for (std::size_t p = 0; p < s.size() && out.size() < limit; ++p) {
            for (char c : alphabet) {
                if (c == s[p]) continue;
                std::string t = s;
                t[p] = c;
                offer(t);
            }
            offer(s.substr(0, p) + s.substr(p + 1));
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// sweep

struct SweepRow {
    std::size_t n = 0;
    int m = 0;
    engines::EstimateReport est;
    std::uint64_t seed = 0;
    std::string status = "ok";
};

std::string csv_number(double v) {
    std::ostringstream os;
    os << std::setprecision(10) << v;
    return os.str();
}

}  // namespace

int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
    CLI::App app{"Two-way quantum finite automata toolkit", "qcfa"};
    app.set_config("--config", "", "read options from a TOML/INI file");
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    Common common;
    Source source;
    std::string family_name, input;
    std::optional<int> level;
    int gen_m = 2;
    std::size_t limit = 16;
    bool near = false;
    std::string format = "text";
    std::uint64_t seed = 0, trials = 1000, max_steps = 1'000'000, horizon = 200'000;
    std::size_t max_nodes = 2'000'000;
    double prob_floor = engines::ExactOptions{}.prob_floor;
    int threads = 1;
    double confidence = 0.95;
    bool digest = false, interpret = false, rounds = false;
    std::string kernel = "exact", method = "auto", kind = "rw-gate", engine = "interpret";
    int from = 1, to = 8;
    std::vector<std::string> suites;

    CLI::App *gen = app.add_subcommand("gen", "emit language members or near-members");
    gen->add_option("--family", family_name, "eq, pal, rl, rpal, ppal, pppal, shl")->required();
    gen->add_option("--i", level, "level of indexed families");
    gen->add_option("--m", gen_m, "size parameter (block length or palindrome side)");
    gen->add_option("--limit", limit, "maximum number of strings");
    gen->add_flag("--near", near, "emit nonmembers one edit away from members");
    gen->add_option("--format", format, "text or json")->check(CLI::IsMember({"text", "json"}));
    add_common(gen, common);

    CLI::App *check = app.add_subcommand("check", "membership oracle");
    check->add_option("--family", family_name, "language family")->required();
    check->add_option("--i", level, "level of indexed families");
    check->add_option("--input", input, "string to test")->required();
    add_common(check, common);

    CLI::App *build = app.add_subcommand("build", "compile a machine to a spec file");
    add_source(build, source);
    build->add_option("--out", common.out, "spec file to write")->required();
    build->add_flag("--no-timestamp", common.no_timestamp, "omit the timestamp from the provenance block");

    CLI::App *runc = app.add_subcommand("run", "one seeded trajectory");
    add_source(runc, source);
    runc->add_option("--input", input, "input string")->required();
    runc->add_option("--seed", seed, "random seed")->required();
    runc->add_option("--max-steps", max_steps, "step cutoff");
    runc->add_flag("--digest", digest, "record a trajectory digest");
    runc->add_flag("--interpret", interpret, "use the host-level template interpreter");
    runc->add_option("--kernel", kernel, "interpreter kernel: exact or simulate")->check(CLI::IsMember({"exact", "simulate"}));
    add_common(runc, common);

    CLI::App *est = app.add_subcommand("estimate", "Monte Carlo acceptance estimate");
    add_source(est, source);
    est->add_option("--input", input, "input string")->required();
    est->add_option("--seed", seed, "random seed")->required();
    est->add_option("--trials", trials, "number of trials");
    est->add_option("--max-steps", max_steps, "step cutoff per trial");
    est->add_option("--threads", threads, "worker threads (0: all cores)");
    est->add_option("--confidence", confidence, "Wilson interval confidence");
    est->add_flag("--interpret", interpret, "use the host-level template interpreter");
    est->add_option("--kernel", kernel, "interpreter kernel: exact or simulate")->check(CLI::IsMember({"exact", "simulate"}));
    add_common(est, common);

    CLI::App *exact = app.add_subcommand("exact", "exact absorption probabilities and expected steps");
    add_source(exact, source);
    exact->add_option("--input", input, "input string")->required();
    exact->add_option("--method", method, "auto, orbit, density or horizon")->check(CLI::IsMember({"auto", "orbit", "density", "horizon"}));
    exact->add_option("--horizon", horizon, "steps for the horizon route");
    exact->add_option("--max-nodes", max_nodes, "configuration cap");
    exact->add_option("--prob-floor", prob_floor, "branch probabilities at or below this count as zero");
    exact->add_flag("--rounds", rounds, "also report expected main-loop rounds of a template");
    add_common(exact, common);

    CLI::App *sweep = app.add_subcommand("sweep", "one CSV row per size point");
    sweep->add_option("--kind", kind, "rw-gate, eq-core, pal-core, rpal or pppal")
        ->check(CLI::IsMember({"rw-gate", "eq-core", "pal-core", "rpal", "pppal"}));
    sweep->add_option("--from", from, "first size point");
    sweep->add_option("--to", to, "last size point");
    sweep->add_option("--i", source.level, "template level");
    sweep->add_option("--eps", source.eps, "error bound");
    sweep->add_option("--k-eps", source.k_eps, "gate coin count");
    sweep->add_option("--sweeps", source.sweeps, "PAL core sweep override");
    sweep->add_option("--seed", seed, "random seed")->required();
    sweep->add_option("--trials", trials, "trials per point");
    sweep->add_option("--max-steps", max_steps, "step cutoff per trial");
    sweep->add_option("--threads", threads, "worker threads (0: all cores)");
    sweep->add_option("--engine", engine, "templates only: interpret (exact kernel) or compiled")
        ->check(CLI::IsMember({"interpret", "compiled"}));
    sweep->add_option("--format", format, "csv or json")->check(CLI::IsMember({"text", "csv", "json"}));
    add_common(sweep, common);

    CLI::App *verify = app.add_subcommand("verify", "run invariant suites");
    verify->add_option("--suite", suites, "suite name (repeatable; default all)");
    add_common(verify, common);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError &e) {
        int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (*gen) {
            lang::Family f = lang::parse_family(family_name);
            if (lang::family_is_indexed(f) && !level) throw Error(ErrorKind::InvalidArgument, "--i is required for " + family_name);
            std::vector<std::string> list = members(f, level.value_or(1), gen_m, limit);
            if (near) list = near_members(f, level, list, limit);
            if (format == "json") {
                json params{{"family", family_name}, {"m", gen_m}, {"limit", limit}, {"near", near}};
                if (level) params["i"] = *level;
                emit(report("gen", params, std::nullopt, common, {{"strings", list}}), common, out);
            } else {
                std::string text;
                for (const auto &s : list) text += s + "\n";
                emit(text, common, out);
            }
            return kOk;
        }
        if (*check) {
            lang::Family f = lang::parse_family(family_name);
            bool member = lang::is_member(f, level, input);
            json params{{"family", family_name}, {"input", input}};
            if (level) params["i"] = *level;
            emit(report("check", params, std::nullopt, common, {{"member", member}}), common, out);
            return member ? kOk : kNegative;
        }
        if (*build) {
            MachineSpec spec = make_spec(source);
            machine::require_valid(spec);
            machine::save_spec(spec, common.out);
            json summary{{"path", common.out}, {"states", spec.states.size()}, {"channels", spec.pool.size()},
                         {"register_dim", spec.register_dim}, {"metadata", spec.metadata}};
            Common to_stdout{"", common.no_timestamp};
            emit(report("build", source_params(source), std::nullopt, to_stdout, summary), to_stdout, out);
            return kOk;
        }
        auto interpret_options = [&]() {
            builders::InterpretOptions o;
            o.tmpl = builders::parse_template(source.builder);
            o.level = source.level;
            o.eps = builders::Rational::parse(source.eps);
            o.k_eps = source.k_eps;
            o.mode = kernel == "exact" ? builders::KernelMode::Exact : builders::KernelMode::Simulate;
            o.max_steps = max_steps;
            return o;
        };
        if (*runc) {
            json params = source_params(source);
            params["input"] = input;
            params["max_steps"] = max_steps;
            engines::RunReport r;
            if (interpret) {
                params["interpret"] = kernel;
                r = builders::interpret(interpret_options(), input, seed);
            } else {
                r = engines::run_trajectory(make_spec(source), input, seed, max_steps, digest);
            }
            emit(report("run", params, seed, common, engines::to_json(r)), common, out);
            switch (r.verdict) {
                case machine::Verdict::Accept: return kOk;
                case machine::Verdict::Reject: return kNegative;
                case machine::Verdict::Cutoff: return kResource;
            }
        }
        if (*est) {
            json params = source_params(source);
            params["input"] = input;
            params["trials"] = trials;
            params["max_steps"] = max_steps;
            params["confidence"] = confidence;
            engines::EstimateReport r;
            std::string alias;
            if (interpret) {
                params["interpret"] = kernel;
                r = builders::interpret_estimate(interpret_options(), input, trials, seed);
            } else {
                MachineSpec spec = make_spec(source);
                alias = accept_alias(spec);
                engines::EstimateOptions o;
                o.trials = trials;
                o.seed = seed;
                o.max_steps = max_steps;
                o.threads = threads;
                o.confidence = confidence;
                r = engines::estimate(spec, input, o);
            }
            emit(report("estimate", params, seed, common, engines::to_json(r, alias)), common, out);
            return kOk;
        }
        if (*exact) {
            MachineSpec spec = make_spec(source);
            engines::ExactOptions o;
            o.method = engines::parse_method(method);
            o.horizon = horizon;
            o.max_nodes = max_nodes;
            o.prob_floor = prob_floor;
            if (rounds) o.rewards.push_back(builders::round_rewards(spec));
            engines::AbsorptionSolution s = engines::solve_exact(spec, input, o);
            json result = engines::to_json(s, accept_alias(spec));
            if (rounds) result["expected_rounds"] = s.rewards.empty() ? json() : json(s.rewards.front());
            json params = source_params(source);
            params["input"] = input;
            params["method"] = method;
            params["prob_floor"] = prob_floor;
            emit(report("exact", params, std::nullopt, common, result), common, out);
            return kOk;
        }
        if (*sweep) {
            if (from > to || from < 0) throw Error(ErrorKind::InvalidArgument, "empty size range");
            builders::Rational eps = builders::Rational::parse(source.eps);
            std::vector<SweepRow> rows;
            std::optional<MachineSpec> fixed;
            if (kind == "rw-gate") fixed = builders::build_rw_gate(std::max(0, k_of(source, eps))).spec;
            if (kind == "eq-core") fixed = builders::build_eq_core(eps).spec;
            if (kind == "pal-core") fixed = builders::build_pal_core(eps, source.sweeps).spec;
            if ((kind == "rpal" || kind == "pppal") && engine == "compiled") {
                source.builder = kind;
                fixed = make_spec(source);
            }
            for (int point = from; point <= to; ++point) {
                SweepRow row;
                row.m = point;
                row.seed = engines::trial_seed(seed, static_cast<std::uint64_t>(point));
                try {
                    std::string w;
                    if (kind == "rw-gate") {
                        w = std::string(static_cast<std::size_t>(point), 'a');
                    } else if (kind == "eq-core") {
                        w = std::string(static_cast<std::size_t>(point), 'a') + std::string(static_cast<std::size_t>(point), 'b');
                    } else if (kind == "pal-core") {
                        std::vector<std::string> p = palindromes(static_cast<std::size_t>(point), 2);
                        w = p.back();
                    } else {
                        lang::Family f = kind == "rpal" ? lang::Family::RPAL : lang::Family::PPPAL;
                        std::vector<std::string> list = members(f, source.level, point, 2);
                        w = list.back();
                    }
                    row.n = w.size();
                    if (fixed) {
                        engines::EstimateOptions o;
                        o.trials = trials;
                        o.seed = row.seed;
                        o.max_steps = max_steps;
                        o.threads = threads;
                        row.est = engines::estimate(*fixed, w, o);
                    } else {
                        source.builder = kind;
                        builders::InterpretOptions o = interpret_options();
                        o.mode = builders::KernelMode::Exact;
                        row.est = builders::interpret_estimate(o, w, trials, row.seed);
                    }
                } catch (const Error &e) {
                    row.status = e.what();
                }
                rows.push_back(std::move(row));
            }
            json params{{"kind", kind}, {"from", from}, {"to", to}, {"i", source.level}, {"eps", source.eps},
                        {"trials", trials}, {"max_steps", max_steps}};
            if (source.k_eps >= 0) params["k_eps"] = source.k_eps;
            if (kind == "rpal" || kind == "pppal") params["engine"] = engine;
            json prov = provenance("sweep", params, seed, common);
            if (format == "json") {
                json table = json::array();
                for (const auto &r : rows) {
                    table.push_back({{"n", r.n}, {"m", r.m}, {"estimate", engines::to_json(r.est)}, {"seed", r.seed}, {"status", r.status}});
                }
                emit(json{{"schema", kReportSchema}, {"provenance", prov}, {"result", {{"rows", table}}}}, common, out);
            } else {
                std::string text = "# " + json{{"schema", kReportSchema}, {"provenance", prov}}.dump() + "\n";
                text += "n,m,p_accept_hat,wilson_lo,wilson_hi,mean_steps,median_steps,cutoff_rate,seed,status\n";
                for (const auto &r : rows) {
                    bool ok = r.status == "ok";
                    double cut = ok && r.est.trials ? static_cast<double>(r.est.cutoffs) / static_cast<double>(r.est.trials) : 0.0;
                    std::string status = r.status;
                    std::replace(status.begin(), status.end(), ',', ';');
                    text += std::to_string(r.n) + "," + std::to_string(r.m) + ",";
                    if (ok) {
                        text += csv_number(r.est.p_hat) + "," + csv_number(r.est.wilson.lo) + "," + csv_number(r.est.wilson.hi) +
                                "," + csv_number(r.est.mean_steps) + "," + csv_number(r.est.median_steps) + "," + csv_number(cut);
                    } else {
                        text += ",,,,,";
                    }
                    text += "," + std::to_string(r.seed) + "," + status + "\n";
                }
                emit(text, common, out);
            }
            return kOk;
        }
        if (*verify) {
            if (suites.empty()) suites = suites::suite_names();
            json results = json::array();
            bool pass = true;
            for (const auto &name : suites) {
                json r = suites::run_suite(name);
                pass = pass && r.at("pass").get<bool>();
                results.push_back(std::move(r));
            }
            emit(report("verify", {{"suites", suites}}, std::nullopt, common, {{"pass", pass}, {"suites", results}}), common, out);
            return pass ? kOk : kNegative;
        }
    } catch (const Error &e) {
        err << "error: " << e.what() << "\n";
        return e.kind() == ErrorKind::Resource ? kResource : kUsage;
    } catch (const std::exception &e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    }
    return kUsage;
}

}  // namespace qcfa::cli
