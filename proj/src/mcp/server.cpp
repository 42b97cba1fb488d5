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

#include "iox/mcp/server.hpp"

#include <httplib.h>

#include <istream>
#include <ostream>

namespace iox::mcp
{
    Dispatcher::Dispatcher(std::shared_ptr<const Registry> registry, CallLogger logger)
        : registry_(std::move(registry)), logger_(std::move(logger))
    {
        if (!registry_)
            fail(ErrorKind::parameter, "dispatcher needs a registry");
    }

    std::string Dispatcher::handle(std::string_view body) const
    {
        const auto started = std::chrono::steady_clock::now();
        CallLog log;
        RpcResponse response;
        try
        {
            const RpcRequest req = decode_rpc(body);
            response.id = req.id;
            if (req.method == Method::tools_list)
            {
                log.method = kMethodList;
                log.status = "OK";
                response.body = registry_->list_tools();
            }
            else
            {
                log.method = kMethodCall;
                log.tool = req.call->tool_name;
                auto result = registry_->handle_call(*req.call);
                log.status = result.ok() ? "OK" : "ERROR";
                response.body = std::move(result);
            }
        }
        catch (const RpcError &e)
        {
            response.id = e.id();
            response.body = RpcErrorObject{e.code(), e.what()};
            log.status = "RPC " + std::to_string(e.code());
        }
        catch (const std::exception &e)
        {
            response.body = RpcErrorObject{rpc_code::internal_error, std::string("internal error: ") + e.what()};
            log.status = "RPC " + std::to_string(rpc_code::internal_error);
        }
        std::string out = encode_response(response);
        if (logger_)
        {
            log.latency = std::chrono::duration_cast<std::chrono::microseconds>(std::chrono::steady_clock::now() -
                                                                                started);
            logger_(log);
        }
        return out;
    }

    HttpServer::HttpServer(std::shared_ptr<const Registry> registry, CallLogger logger)
        : dispatcher_(std::move(registry), std::move(logger)), server_(std::make_unique<httplib::Server>())
    {
        // Without SO_REUSEPORT a second server on the same port fails to bind instead of sharing it.
        server_->set_socket_options([](socket_t sock) {
            int yes = 1;
            setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void *>(&yes), sizeof(yes));
        });
        server_->Post(kRpcPath, [this](const httplib::Request &req, httplib::Response &res) {
            res.set_content(dispatcher_.handle(req.body), "application/json");
        });
    }

    HttpServer::~HttpServer()
    {
        stop();
    }

    void HttpServer::bind(const std::string &host, int port)
    {
        if (running_)
            fail(ErrorKind::parameter, "server already running");
        if (port == 0)
            port_ = server_->bind_to_any_port(host);
        else
            port_ = server_->bind_to_port(host, port) ? port : -1;
        if (port_ <= 0)
            fail(ErrorKind::transport, "cannot bind " + host + ":" + std::to_string(port) + " (address in use?)");
        running_ = true;
    }

    void HttpServer::start(const std::string &host, int port)
    {
        bind(host, port);
        thread_ = std::thread([this] { server_->listen_after_bind(); });
        server_->wait_until_ready();
    }

    void HttpServer::stop()
    {
        if (server_->is_running() || running_)
            server_->stop();
        if (thread_.joinable())
            thread_.join();
        running_ = false;
    }

    void serve_stdio(const Dispatcher &dispatcher, std::istream &in, std::ostream &out)
    {
        for (std::string line; std::getline(in, line);)
        {
            if (line.empty() || line == "\r")
                continue;
            out << dispatcher.handle(line) << '\n';
            out.flush();
        }
    }
}
