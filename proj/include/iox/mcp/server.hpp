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
#include "iox/mcp/registry.hpp"

#include <atomic>
#include <chrono>
#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <thread>

namespace httplib
{
    class Server;
}

namespace iox::mcp
{
    struct CallLog
    {
        std::string method;
        std::string tool; // empty for tools/list and protocol errors
        std::string status; // "OK", "ERROR" or "RPC <code>"
        std::chrono::microseconds latency{0};
    };

    using CallLogger = std::function<void(const CallLog &)>;

    /// Transport-independent request handling: one JSON-RPC body in, one out.
    class Dispatcher
    {
    public:
        explicit Dispatcher(std::shared_ptr<const Registry> registry, CallLogger logger = {});

        std::string handle(std::string_view body) const;

        const Registry &registry() const { return *registry_; }

    private:
        std::shared_ptr<const Registry> registry_;
        CallLogger logger_;
    };

    inline constexpr const char *kRpcPath = "/rpc";

    /// HTTP transport: each POST to /rpc carries one envelope.
    class HttpServer
    {
    public:
        explicit HttpServer(std::shared_ptr<const Registry> registry, CallLogger logger = {});
        ~HttpServer();

        HttpServer(const HttpServer &) = delete;
        HttpServer &operator=(const HttpServer &) = delete;

        // Binds and starts serving on a background thread. Port 0 picks a free
        // port. Throws transport error when the address cannot be bound.
        void start(const std::string &host = "127.0.0.1", int port = 0);

        // Stops accepting; requests already being handled finish first.
        void stop();

        int port() const { return port_; }
        bool running() const { return running_; }

    private:
        void bind(const std::string &host, int port);

        Dispatcher dispatcher_;
        std::unique_ptr<httplib::Server> server_;
        std::thread thread_;
        std::atomic<bool> running_{false};
        int port_ = 0;
    };

    // Newline-delimited transport: reads one envelope per line until EOF and
    // writes one response line for each.
    void serve_stdio(const Dispatcher &dispatcher, std::istream &in, std::ostream &out);
}
