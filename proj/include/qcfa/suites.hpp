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


#ifndef QCFA_SUITES_HPP
#define QCFA_SUITES_HPP

#include <string>
#include <vector>

#include "json.hpp"

namespace qcfa::suites {

/// Names accepted by run_suite.
std::vector<std::string> suite_names();

/// Runs one invariant suite.  The result carries "suite", "pass", the
/// number of "checks" and up to 20 "failures".
nlohmann::json run_suite(const std::string &name);

}  // namespace qcfa::suites

#endif
