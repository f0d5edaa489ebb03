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

#ifndef QCFA_ERROR_HPP
#define QCFA_ERROR_HPP

#include <stdexcept>
#include <string>

namespace qcfa {

enum class ErrorKind {
    InvalidLevel,
    InvalidDelimiter,
    InvalidArgument,
    InvalidInput,
    Length,
    MalformedInput,
    UndefinedSegl,
    Domain,
    Resource,
    Contraction,
    DimensionMismatch,
    IncompleteChannel,
    Totality,
    Format,
};

const char *error_kind_name(ErrorKind kind);

/// All recoverable failures in the library carry a machine-readable kind so
/// front ends can map them to exit codes without parsing messages.
class Error : public std::runtime_error {
   public:
    Error(ErrorKind kind, const std::string &message)
        : std::runtime_error(std::string(error_kind_name(kind)) + ": " + message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

   private:
    ErrorKind kind_;
};

}  // namespace qcfa

#endif
