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

#include "iox/error.hpp"
#include "iox/mcp/registry.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

/// JSON-RPC 2.0 envelopes for the two tool-layer methods.
namespace iox::mcp
{
    namespace rpc_code
    {
        inline constexpr int parse_error = -32700;
        inline constexpr int invalid_request = -32600;
        inline constexpr int method_not_found = -32601;
        inline constexpr int invalid_params = -32602;
        inline constexpr int internal_error = -32603;
    }

    inline constexpr std::string_view kMethodList = "tools/list";
    inline constexpr std::string_view kMethodCall = "tools/call";

    enum class Method
    {
        tools_list,
        tools_call,
    };

    struct RpcRequest
    {
        std::int64_t id = 0;
        Method method = Method::tools_list;
        std::optional<ToolCallRequest> call; // set iff method == tools_call

        bool operator==(const RpcRequest &) const = default;
    };

    // Raised by the decoders; carries the JSON-RPC error code and, when it could
    // be read, the request id.
    class RpcError : public Error
    {
    public:
        RpcError(int code, const std::string &message, std::optional<std::int64_t> id = std::nullopt)
            : Error(ErrorKind::protocol, message), code_(code), id_(id) {}

        int code() const noexcept { return code_; }
        std::optional<std::int64_t> id() const noexcept { return id_; }

    private:
        int code_;
        std::optional<std::int64_t> id_;
    };

    struct RpcErrorObject
    {
        int code = 0;
        std::string message;

        bool operator==(const RpcErrorObject &) const = default;
    };

    struct RpcResponse
    {
        std::optional<std::int64_t> id; // null when the request id was unreadable
        std::variant<ToolCallResponse, std::vector<ExpertRegistration>, RpcErrorObject> body;

        bool operator==(const RpcResponse &) const = default;
    };

    std::string encode_rpc(const RpcRequest &request);

    std::string encode_call(const ToolCallRequest &call, std::int64_t id);

    std::string encode_list(std::int64_t id);

    // Throws RpcError: -32700 malformed body, -32600 bad envelope or version,
    // -32601 unknown method, -32602 bad params.
    RpcRequest decode_rpc(std::string_view bytes);

    std::string encode_response(const RpcResponse &response);

    // Client side. Throws iox::Error(protocol) on malformed envelopes.
    RpcResponse decode_response(std::string_view bytes);

    // Stable byte form of a tool result, used for equality across transports.
    std::string canonical(const ToolCallResponse &response);
}
