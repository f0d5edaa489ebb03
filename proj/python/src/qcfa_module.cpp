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


// Python bindings for the core library.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "qcfa/builders.hpp"
#include "qcfa/cli.hpp"
#include "qcfa/engines.hpp"
#include "qcfa/langkit.hpp"
#include "qcfa/machine.hpp"

namespace py = pybind11;
using namespace qcfa;

namespace {

py::object to_py(const nlohmann::json &j) {
    py::module_ json = py::module_::import("json");
    return json.attr("loads")(j.dump());
}

builders::Rational eps_of(const std::string &s) { return builders::Rational::parse(s); }

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Two-way quantum finite automata toolkit";

    static py::exception<Error> error(m, "QcfaError", PyExc_RuntimeError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error &e) {
            py::set_error(error, e.what());
        }
    });

    m.def("is_member", [](const std::string &family, std::optional<int> level, const std::string &s) {
        return lang::is_member(lang::parse_family(family), level, s);
    }, py::arg("family"), py::arg("level"), py::arg("s"));
    m.def("build_rl", &lang::build_rl, py::arg("level"), py::arg("w"));
    m.def("build_pppal", [](int level, const std::string &p) { return lang::build_pppal(lang::lang_params(level), p); },
          py::arg("level"), py::arg("p"));
    m.def("total_length", [](int level, int m) { return lang::total_length(lang::lang_params(level), m); },
          py::arg("level"), py::arg("m"));

    py::class_<machine::MachineSpec>(m, "MachineSpec")
        .def_property_readonly("num_states", [](const machine::MachineSpec &s) { return s.states.size(); })
        .def_property_readonly("register_dim", [](const machine::MachineSpec &s) { return s.register_dim; })
        .def_property_readonly("alphabet", [](const machine::MachineSpec &s) { return s.alphabet; })
        .def_property_readonly("metadata", [](const machine::MachineSpec &s) { return to_py(s.metadata); })
        .def("to_json", [](const machine::MachineSpec &s) { return machine::spec_to_json(s).dump(); })
        .def_static("from_json", [](const std::string &text) { return machine::spec_from_json(nlohmann::json::parse(text)); });

    m.def("compile_rpal", [](int level, const std::string &eps, int k) { return builders::compile_rpal(level, eps_of(eps), k); },
          py::arg("level"), py::arg("eps") = "1/5", py::arg("k_eps") = 9);
    m.def("compile_pppal", [](int level, const std::string &eps, int k) { return builders::compile_pppal(level, eps_of(eps), k); },
          py::arg("level"), py::arg("eps") = "1/5", py::arg("k_eps") = 9);
    m.def("eq_core", [](const std::string &eps) { return builders::build_eq_core(eps_of(eps)).spec; }, py::arg("eps") = "1/5");
    m.def("pal_core", [](const std::string &eps, int sweeps) { return builders::build_pal_core(eps_of(eps), sweeps).spec; },
          py::arg("eps") = "1/5", py::arg("sweeps") = 0);
    m.def("rw_gate", [](int k) { return builders::build_rw_gate(k).spec; }, py::arg("k_eps"));

    m.def("solve_exact", [](const machine::MachineSpec &spec, const std::string &input) {
        engines::AbsorptionSolution s;
        {
            py::gil_scoped_release release;
            s = engines::solve_exact(spec, input);
        }
        return to_py(engines::to_json(s));
    }, py::arg("spec"), py::arg("input"));
    m.def("estimate", [](const machine::MachineSpec &spec, const std::string &input, std::uint64_t trials, std::uint64_t seed,
                         std::uint64_t max_steps) {
        engines::EstimateOptions o;
        o.trials = trials;
        o.seed = seed;
        o.max_steps = max_steps;
        o.threads = 1;
        engines::EstimateReport r;
        {
            py::gil_scoped_release release;
            r = engines::estimate(spec, input, o);
        }
        return to_py(engines::to_json(r));
    }, py::arg("spec"), py::arg("input"), py::arg("trials"), py::arg("seed"), py::arg("max_steps") = 1'000'000);
    m.def("run", [](const machine::MachineSpec &spec, const std::string &input, std::uint64_t seed, std::uint64_t max_steps) {
        return to_py(engines::to_json(engines::run_trajectory(spec, input, seed, max_steps)));
    }, py::arg("spec"), py::arg("input"), py::arg("seed"), py::arg("max_steps") = 1'000'000);

    m.def("interpret_exact", [](const std::string &tmpl, int level, const std::string &eps, int k, const std::string &input) {
        builders::InterpretOptions o;
        o.tmpl = builders::parse_template(tmpl);
        o.level = level;
        o.eps = eps_of(eps);
        o.k_eps = k;
        return builders::interpret_exact(o, input);
    }, py::arg("template"), py::arg("level"), py::arg("eps"), py::arg("k_eps"), py::arg("input"));

    m.def("cli", [](const std::vector<std::string> &args) {
        std::ostringstream out, err;
        int code = cli::run(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
    }, py::arg("args"), "Run a qcfa command line; returns (exit code, stdout, stderr).");
}
