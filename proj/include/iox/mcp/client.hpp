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

#include "iox/mcp/protocol.hpp"

#include <atomic>
#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <sys/types.h>
#include <vector>

namespace iox::mcp
{
    inline constexpr std::chrono::milliseconds kDefaultTimeout{5000};

    /// What the host needs from the tool layer, whatever the transport.
    class ToolTransport
    {
    public:
        virtual ~ToolTransport() = default;

        virtual std::vector<ExpertRegistration> list_tools() = 0;

        // ERROR-status results are returned; transport failures throw
        // iox::Error(transport) and protocol violations iox::Error(protocol).
        virtual ToolCallResponse call(const ToolCallRequest &request) = 0;

        ToolCallResponse call_expert(const std::string &tool_name, std::span<const double> h)
        {
            return call(ToolCallRequest::with_features(tool_name, h));
        }
    };

    /// Calls straight into a registry in the same process.
    class InProcessTransport final : public ToolTransport
    {
    public:
        explicit InProcessTransport(std::shared_ptr<const Registry> registry) : registry_(std::move(registry)) {}

        std::vector<ExpertRegistration> list_tools() override { return registry_->list_tools(); }
        ToolCallResponse call(const ToolCallRequest &request) override { return registry_->handle_call(request); }

    private:
        std::shared_ptr<const Registry> registry_;
    };

    struct Endpoint
    {
        std::string host = "127.0.0.1";
        int port = 0;

        // Accepts "http://host:port", "host:port" or a bare port.
        static Endpoint parse(const std::string &text);
        std::string url() const;

        bool operator==(const Endpoint &) const = default;
    };

    /// HTTP client for one server. Safe to use from several threads: every
    /// call opens its own connection and ids come from an atomic counter.
    class HttpClient final : public ToolTransport
    {
    public:
        explicit HttpClient(Endpoint endpoint, std::chrono::milliseconds timeout = kDefaultTimeout);

        std::vector<ExpertRegistration> list_tools() override;
        ToolCallResponse call(const ToolCallRequest &request) override;

        // Sends one raw body and returns the raw reply.
        std::string post(const std::string &body);

        const Endpoint &endpoint() const { return endpoint_; }

    private:
        RpcResponse exchange(const std::string &body, std::int64_t id);

        Endpoint endpoint_;
        std::chrono::milliseconds timeout_;
        std::atomic<std::int64_t> next_id_{1};
    };

    /// Spawns a server process speaking the newline-delimited transport on its
    /// stdin/stdout. Calls are serialized.
    class StdioProcessClient final : public ToolTransport
    {
    public:
        StdioProcessClient(const std::vector<std::string> &argv,
                           std::chrono::milliseconds timeout = kDefaultTimeout);
        ~StdioProcessClient() override;

        StdioProcessClient(const StdioProcessClient &) = delete;
        StdioProcessClient &operator=(const StdioProcessClient &) = delete;

        std::vector<ExpertRegistration> list_tools() override;
        ToolCallResponse call(const ToolCallRequest &request) override;

    private:
        RpcResponse exchange(const std::string &body, std::int64_t id);
        std::string read_line();

        pid_t child_ = -1;
        int to_child_ = -1;
        int from_child_ = -1;
        std::string buffer_;
        std::chrono::milliseconds timeout_;
        std::int64_t next_id_ = 1;
        std::mutex mutex_;
    };

    /// Routes each tool to whichever endpoint listed it; supports one server
    /// per expert as well as one server for the whole pool.
    class RoutedTransport final : public ToolTransport
    {
    public:
        // Queries tools/list on every transport. Throws conflict when two
        // endpoints list the same tool name.
        explicit RoutedTransport(std::vector<std::shared_ptr<ToolTransport>> transports);

        std::vector<ExpertRegistration> list_tools() override { return listing_; }

        // Unknown tools are forwarded to the first transport, which answers with
        // its own not-found ERROR.
        ToolCallResponse call(const ToolCallRequest &request) override;

    private:
        std::vector<std::shared_ptr<ToolTransport>> transports_;
        std::map<std::string, std::size_t> routes_;
        std::vector<ExpertRegistration> listing_;
    };
}
