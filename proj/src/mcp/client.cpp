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

#include "iox/mcp/client.hpp"
#include "iox/mcp/server.hpp"

#include <httplib.h>

#include <cerrno>
#include <csignal>
#include <cstring>
#include <fcntl.h>
#include <poll.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

extern char **environ;

namespace iox::mcp
{
    namespace
    {
        ToolCallResponse expect_tool_result(RpcResponse response)
        {
            if (auto *err = std::get_if<RpcErrorObject>(&response.body))
                fail(ErrorKind::protocol, "server error " + std::to_string(err->code) + ": " + err->message);
            if (auto *result = std::get_if<ToolCallResponse>(&response.body))
                return *result;
            fail(ErrorKind::protocol, "expected a tool result, got a tool listing");
        }

        std::vector<ExpertRegistration> expect_listing(RpcResponse response)
        {
            if (auto *err = std::get_if<RpcErrorObject>(&response.body))
                fail(ErrorKind::protocol, "server error " + std::to_string(err->code) + ": " + err->message);
            if (auto *tools = std::get_if<std::vector<ExpertRegistration>>(&response.body))
                return *tools;
            fail(ErrorKind::protocol, "expected a tool listing, got a tool result");
        }

        void check_id(const RpcResponse &response, std::int64_t id)
        {
            if (response.id != id)
                fail(ErrorKind::protocol, "response id does not match request id " + std::to_string(id));
        }
    }

    Endpoint Endpoint::parse(const std::string &text)
    {
        std::string rest = text;
        if (rest.rfind("http://", 0) == 0)
            rest = rest.substr(7);
        if (const auto slash = rest.find('/'); slash != std::string::npos)
            rest = rest.substr(0, slash);
        Endpoint ep;
        const auto colon = rest.rfind(':');
        std::string port_text = rest;
        if (colon != std::string::npos)
        {
            ep.host = rest.substr(0, colon);
            port_text = rest.substr(colon + 1);
        }
        try
        {
            std::size_t used = 0;
            ep.port = std::stoi(port_text, &used);
            if (used != port_text.size() || ep.port < 1 || ep.port > 65535 || ep.host.empty())
                throw std::invalid_argument("port");
        }
        catch (const std::exception &)
        {
            fail(ErrorKind::parameter, "malformed endpoint: " + text);
        }
        return ep;
    }

    std::string Endpoint::url() const
    {
        return "http://" + host + ":" + std::to_string(port);
    }

    HttpClient::HttpClient(Endpoint endpoint, std::chrono::milliseconds timeout)
        : endpoint_(std::move(endpoint)), timeout_(timeout)
    {
    }

    std::string HttpClient::post(const std::string &body)
    {
        httplib::Client cli(endpoint_.host, endpoint_.port);
        cli.set_connection_timeout(timeout_);
        cli.set_read_timeout(timeout_);
        cli.set_write_timeout(timeout_);
        auto res = cli.Post(kRpcPath, body, "application/json");
        if (!res)
            fail(ErrorKind::transport, endpoint_.url() + ": " + httplib::to_string(res.error()));
        if (res->status != 200)
            fail(ErrorKind::transport, endpoint_.url() + ": HTTP status " + std::to_string(res->status));
        return res->body;
    }

    RpcResponse HttpClient::exchange(const std::string &body, std::int64_t id)
    {
        RpcResponse response = decode_response(post(body));
        check_id(response, id);
        return response;
    }

    std::vector<ExpertRegistration> HttpClient::list_tools()
    {
        const auto id = next_id_++;
        return expect_listing(exchange(encode_list(id), id));
    }

    ToolCallResponse HttpClient::call(const ToolCallRequest &request)
    {
        const auto id = next_id_++;
        return expect_tool_result(exchange(encode_call(request, id), id));
    }

    StdioProcessClient::StdioProcessClient(const std::vector<std::string> &argv, std::chrono::milliseconds timeout)
        : timeout_(timeout)
    {
        if (argv.empty())
            fail(ErrorKind::parameter, "stdio client needs a command");
        int in_pipe[2], out_pipe[2];
        if (pipe2(in_pipe, O_CLOEXEC) != 0)
            fail(ErrorKind::transport, std::string("pipe: ") + std::strerror(errno));
        if (pipe2(out_pipe, O_CLOEXEC) != 0)
        {
            close(in_pipe[0]);
            close(in_pipe[1]);
            fail(ErrorKind::transport, std::string("pipe: ") + std::strerror(errno));
        }

        posix_spawn_file_actions_t actions;
        posix_spawn_file_actions_init(&actions);
        posix_spawn_file_actions_adddup2(&actions, in_pipe[0], STDIN_FILENO);
        posix_spawn_file_actions_adddup2(&actions, out_pipe[1], STDOUT_FILENO);

        std::vector<char *> args;
        for (const auto &a : argv)
            args.push_back(const_cast<char *>(a.c_str()));
        args.push_back(nullptr);

        const int rc = posix_spawnp(&child_, args[0], &actions, nullptr, args.data(), environ);
        posix_spawn_file_actions_destroy(&actions);
        close(in_pipe[0]);
        close(out_pipe[1]);
        if (rc != 0)
        {
            close(in_pipe[1]);
            close(out_pipe[0]);
            fail(ErrorKind::transport, "cannot spawn " + argv[0] + ": " + std::strerror(rc));
        }
        to_child_ = in_pipe[1];
        from_child_ = out_pipe[0];
        // A dead child must surface as EPIPE, not kill the host.
        std::signal(SIGPIPE, SIG_IGN);
    }

    StdioProcessClient::~StdioProcessClient()
    {
        if (to_child_ >= 0)
            close(to_child_);
        if (from_child_ >= 0)
            close(from_child_);
        if (child_ > 0)
        {
            int status = 0;
            // The child exits on EOF; give it a moment before forcing it.
            for (int i = 0; i < 50; ++i)
            {
                if (waitpid(child_, &status, WNOHANG) == child_)
                    return;
                usleep(10000);
            }
            kill(child_, SIGTERM);
            waitpid(child_, &status, 0);
        }
    }

    std::string StdioProcessClient::read_line()
    {
        const auto deadline = std::chrono::steady_clock::now() + timeout_;
        for (;;)
        {
            if (const auto nl = buffer_.find('\n'); nl != std::string::npos)
            {
                std::string line = buffer_.substr(0, nl);
                buffer_.erase(0, nl + 1);
                return line;
            }
            const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline -
                                                                                    std::chrono::steady_clock::now());
            if (left.count() <= 0)
                fail(ErrorKind::transport, "stdio server timed out");
            pollfd pfd{from_child_, POLLIN, 0};
            const int ready = poll(&pfd, 1, static_cast<int>(left.count()));
            if (ready < 0 && errno != EINTR)
                fail(ErrorKind::transport, std::string("poll: ") + std::strerror(errno));
            if (ready <= 0)
                continue;
            char chunk[4096];
            const ssize_t got = read(from_child_, chunk, sizeof(chunk));
            if (got == 0)
                fail(ErrorKind::transport, "stdio server closed its output");
            if (got < 0)
            {
                if (errno == EINTR)
                    continue;
                fail(ErrorKind::transport, std::string("read: ") + std::strerror(errno));
            }
            buffer_.append(chunk, static_cast<std::size_t>(got));
        }
    }

    RpcResponse StdioProcessClient::exchange(const std::string &body, std::int64_t id)
    {
        std::string line = body + "\n";
        std::size_t sent = 0;
        while (sent < line.size())
        {
            const ssize_t n = write(to_child_, line.data() + sent, line.size() - sent);
            if (n < 0)
            {
                if (errno == EINTR)
                    continue;
                fail(ErrorKind::transport, std::string("write: ") + std::strerror(errno));
            }
            sent += static_cast<std::size_t>(n);
        }
        RpcResponse response = decode_response(read_line());
        check_id(response, id);
        return response;
    }

    std::vector<ExpertRegistration> StdioProcessClient::list_tools()
    {
        std::lock_guard lock(mutex_);
        const auto id = next_id_++;
        return expect_listing(exchange(encode_list(id), id));
    }

    ToolCallResponse StdioProcessClient::call(const ToolCallRequest &request)
    {
        std::lock_guard lock(mutex_);
        const auto id = next_id_++;
        return expect_tool_result(exchange(encode_call(request, id), id));
    }

    RoutedTransport::RoutedTransport(std::vector<std::shared_ptr<ToolTransport>> transports)
        : transports_(std::move(transports))
    {
        if (transports_.empty())
            fail(ErrorKind::parameter, "routed transport needs at least one endpoint");
        for (std::size_t i = 0; i < transports_.size(); ++i)
        {
            for (auto &reg : transports_[i]->list_tools())
            {
                if (routes_.contains(reg.name))
                    fail(ErrorKind::conflict, "tool listed by two endpoints: " + reg.name);
                routes_[reg.name] = i;
                listing_.push_back(std::move(reg));
            }
        }
    }

    ToolCallResponse RoutedTransport::call(const ToolCallRequest &request)
    {
        const auto it = routes_.find(request.tool_name);
        return transports_[it == routes_.end() ? 0 : it->second]->call(request);
    }
}
