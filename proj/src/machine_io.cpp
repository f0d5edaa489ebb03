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


#include <cstdio>
#include <fstream>
#include <sstream>

#include "qcfa/machine.hpp"

namespace qcfa::machine {

using nlohmann::json;

namespace {

json matrix_to_json(const qk::Matrix &m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back({m(r, c).real(), m(r, c).imag()});
        rows.push_back(std::move(row));
    }
    return rows;
}

qk::cplx complex_from_json(const json &v) {
    if (v.is_number()) return {v.get<double>(), 0.0};
    if (!v.is_array() || v.size() != 2) throw Error(ErrorKind::Format, "complex entries are [re, im] pairs");
    return {v[0].get<double>(), v[1].get<double>()};
}

qk::Matrix matrix_from_json(const json &j) {
    if (!j.is_array() || j.empty()) throw Error(ErrorKind::Format, "matrix must be a non-empty array of rows");
    auto rows = static_cast<Eigen::Index>(j.size());
    auto cols = static_cast<Eigen::Index>(j[0].size());
    qk::Matrix m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        if (static_cast<Eigen::Index>(j[static_cast<std::size_t>(r)].size()) != cols) {
            throw Error(ErrorKind::Format, "ragged matrix");
        }
        for (Eigen::Index c = 0; c < cols; ++c) {
            m(r, c) = complex_from_json(j[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)]);
        }
    }
    return m;
}

const json &field(const json &j, const char *name) {
    if (!j.contains(name)) throw Error(ErrorKind::Format, std::string("missing field '") + name + "'");
    return j.at(name);
}

}  // namespace

json spec_to_json(const MachineSpec &spec) {
    json j;
    j["format"] = "qsspec-1";
    j["kind"] = spec.kind == Kind::Classical ? "classical" : "quantum-classical";
    j["states"] = spec.states;
    j["q0"] = spec.states.at(static_cast<std::size_t>(spec.q0));
    j["q_acc"] = spec.states.at(static_cast<std::size_t>(spec.q_acc));
    j["q_rej"] = spec.states.at(static_cast<std::size_t>(spec.q_rej));
    j["register_dim"] = spec.register_dim;
    j["alphabet"] = spec.alphabet;
    json reg = json::array();
    qk::Vector r0 = spec.start_register();
    for (Eigen::Index k = 0; k < r0.size(); ++k) reg.push_back({r0(k).real(), r0(k).imag()});
    j["initial_register"] = reg;

    json pool = json::array();
    for (const auto &ch : spec.pool) {
        json branches = json::array();
        for (const auto &b : ch.branches()) branches.push_back({{"label", b.label}, {"matrix", matrix_to_json(b.op)}});
        pool.push_back({{"name", ch.name()}, {"branches", branches}});
    }
    json table = json::object();
    json classical = json::object();
    std::string syms = spec.symbols();
    for (std::size_t s = 0; s < spec.states.size(); ++s) {
        json trow = json::object();
        json crow = json::object();
        for (std::size_t y = 0; y < syms.size(); ++y) {
            const Entry &e = spec.table[s][y];
            if (!e.defined()) continue;
            std::string key(1, syms[y]);
            trow[key] = e.channel;
            json labels = json::object();
            const auto &ch = spec.pool[static_cast<std::size_t>(e.channel)];
            for (std::size_t b = 0; b < e.outcomes.size(); ++b) {
                labels[ch.branches()[b].label] =
                    json::array({spec.states[static_cast<std::size_t>(e.outcomes[b].next)], e.outcomes[b].move});
            }
            crow[key] = labels;
        }
        if (!trow.empty()) {
            table[spec.states[s]] = trow;
            classical[spec.states[s]] = crow;
        }
    }
    j["channels"] = {{"pool", pool}, {"table", table}};
    j["classical"] = classical;
    j["metadata"] = spec.metadata;
    return j;
}

MachineSpec spec_from_json(const json &j) {
    if (!j.is_object()) throw Error(ErrorKind::Format, "spec must be a JSON object");
    if (j.value("format", std::string("qsspec-1")) != "qsspec-1") {
        throw Error(ErrorKind::Format, "unsupported spec format '" + j.value("format", std::string()) + "'");
    }
    std::string kind = field(j, "kind").get<std::string>();
    Kind k;
    if (kind == "classical") {
        k = Kind::Classical;
    } else if (kind == "quantum-classical") {
        k = Kind::QuantumClassical;
    } else {
        throw Error(ErrorKind::Format, "unknown kind '" + kind + "'");
    }
    int dim = field(j, "register_dim").get<int>();
    if (dim < 1) throw Error(ErrorKind::Format, "register_dim must be positive");
    std::string alphabet = j.value("alphabet", std::string());
    SpecBuilder b(k, alphabet, dim);
    for (const auto &name : field(j, "states")) b.state(name.get<std::string>());
    b.set_start(field(j, "q0").get<std::string>());
    b.set_halting(field(j, "q_acc").get<std::string>(), field(j, "q_rej").get<std::string>());
    if (j.contains("initial_register")) {
        const json &r = j.at("initial_register");
        qk::Vector v(static_cast<Eigen::Index>(r.size()));
        for (std::size_t t = 0; t < r.size(); ++t) v(static_cast<Eigen::Index>(t)) = complex_from_json(r[t]);
        b.set_initial_register(v);
    }
    const json &channels = field(j, "channels");
    std::vector<int> ids;
    for (const auto &c : field(channels, "pool")) {
        std::vector<qk::Branch> branches;
        for (const auto &br : field(c, "branches")) {
            branches.push_back({field(br, "label").get<std::string>(), matrix_from_json(field(br, "matrix"))});
        }
        ids.push_back(b.channel(qk::QuantumChannel(field(c, "name").get<std::string>(), std::move(branches))));
    }
    const json &classical = field(j, "classical");
    for (const auto &[state, row] : field(channels, "table").items()) {
        int s = b.state(state);
        for (const auto &[sym, idx] : row.items()) {
            if (sym.size() != 1) throw Error(ErrorKind::Format, "symbols are single characters, got '" + sym + "'");
            int c = idx.get<int>();
            if (c < 0 || c >= static_cast<int>(ids.size())) throw Error(ErrorKind::Format, "channel index out of range");
            std::map<std::string, Transition> by_label;
            if (!classical.contains(state) || !classical.at(state).contains(sym)) {
                throw Error(ErrorKind::Totality, "no classical entry for state '" + state + "' on '" + sym + "'");
            }
            for (const auto &[label, t] : classical.at(state).at(sym).items()) {
                by_label[label] = Transition{b.state(t.at(0).get<std::string>()), t.at(1).get<int>()};
            }
            b.set(s, sym[0], ids[static_cast<std::size_t>(c)], by_label);
        }
    }
    if (j.contains("metadata")) b.metadata() = j.at("metadata");
    return b.finish();
}

MachineSpec load_spec(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::InvalidArgument, "cannot open '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception &e) {
        throw Error(ErrorKind::Format, std::string("JSON parse error: ") + e.what());
    }
    return spec_from_json(j);
}

void write_file_atomic(const std::string &path, const std::string &content) {
    std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorKind::InvalidArgument, "cannot write '" + tmp + "'");
        out << content;
        if (!out) throw Error(ErrorKind::Resource, "write failed for '" + tmp + "'");
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) {
        std::remove(tmp.c_str());
        throw Error(ErrorKind::Resource, "cannot rename onto '" + path + "'");
    }
}

void save_spec(const MachineSpec &spec, const std::string &path) {
    write_file_atomic(path, spec_to_json(spec).dump(1) + "\n");
}

}  // namespace qcfa::machine
