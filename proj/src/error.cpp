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


#include "qcfa/error.hpp"

namespace qcfa {

const char *error_kind_name(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::InvalidLevel: return "InvalidLevel";
        case ErrorKind::InvalidDelimiter: return "InvalidDelimiter";
        case ErrorKind::InvalidArgument: return "InvalidArgument";
        case ErrorKind::InvalidInput: return "InvalidInput";
        case ErrorKind::Length: return "LengthError";
        case ErrorKind::MalformedInput: return "MalformedInput";
        case ErrorKind::UndefinedSegl: return "UndefinedSegl";
        case ErrorKind::Domain: return "DomainError";
        case ErrorKind::Resource: return "ResourceError";
        case ErrorKind::Contraction: return "ContractionError";
        case ErrorKind::DimensionMismatch: return "DimensionMismatch";
        case ErrorKind::IncompleteChannel: return "IncompleteChannel";
        case ErrorKind::Totality: return "TotalityError";
        case ErrorKind::Format: return "FormatError";
    }
    return "Error";
}

}  // namespace qcfa
