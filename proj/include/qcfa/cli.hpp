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


#ifndef QCFA_CLI_HPP
#define QCFA_CLI_HPP

#include <ostream>
#include <string>
#include <vector>

namespace qcfa::cli {

inline constexpr const char *kVersion = "0.1.0";
inline constexpr const char *kReportSchema = "qsreport-1";

/// Exit codes.
enum Exit : int { kOk = 0, kNegative = 1, kUsage = 2, kResource = 3 };

/// Runs one command line (args excludes the program name).  Reports go to
/// `out` unless --out names a file; diagnostics go to `err`.
int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

}  // namespace qcfa::cli

#endif
