// SPDX-License-Identifier: Apache-2.0
//
// iox - wireless Internet-of-Experts over a JSON-RPC tool layer
// Copyright (C) 2026 The iox authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace iox
{
    // Every failure the library raises carries one of these kinds so callers
    // (CLI exit codes, the host pipeline, tests) can branch without string matching.
    enum class ErrorKind
    {
        parameter,
        shape,
        schema,
        format,
        io,
        pool_exhausted,
        unsupported_attribute,
        insufficient_data,
        training_diverged,
        conflict,
        protocol,
        transport,
        unsatisfiable_plan,
        parse_failure,
        pipeline,
        usage,
    };

    std::string_view to_string(ErrorKind kind);

    class Error : public std::runtime_error
    {
    public:
        Error(ErrorKind kind, const std::string &message)
            : std::runtime_error(message), kind_(kind) {}

        ErrorKind kind() const noexcept { return kind_; }

    private:
        ErrorKind kind_;
    };

    [[noreturn]] inline void fail(ErrorKind kind, const std::string &message)
    {
        throw Error(kind, message);
    }
}
