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

#include "iox/error.hpp"

std::string_view iox::to_string(ErrorKind kind)
{
    switch (kind)
    {
    case ErrorKind::parameter: return "parameter";
    case ErrorKind::shape: return "shape";
    case ErrorKind::schema: return "schema";
    case ErrorKind::format: return "format";
    case ErrorKind::io: return "io";
    case ErrorKind::pool_exhausted: return "pool-exhausted";
    case ErrorKind::unsupported_attribute: return "unsupported-attribute";
    case ErrorKind::insufficient_data: return "insufficient-data";
    case ErrorKind::training_diverged: return "training-diverged";
    case ErrorKind::conflict: return "conflict";
    case ErrorKind::protocol: return "protocol";
    case ErrorKind::transport: return "transport";
    case ErrorKind::unsatisfiable_plan: return "unsatisfiable-plan";
    case ErrorKind::parse_failure: return "parse-failure";
    case ErrorKind::pipeline: return "pipeline";
    case ErrorKind::usage: return "usage";
    }
    return "unknown";
}
