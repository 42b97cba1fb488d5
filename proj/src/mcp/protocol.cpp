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

#include "iox/mcp/protocol.hpp"

namespace iox::mcp
{
    namespace
    {
        json envelope(std::optional<std::int64_t> id)
        {
            json out;
            out["jsonrpc"] = "2.0";
            if (id)
                out["id"] = *id;
            else
                out["id"] = nullptr;
            return out;
        }

        std::optional<std::int64_t> read_id(const json &doc)
        {
            if (doc.is_object() && doc.contains("id") && doc["id"].is_number_integer())
                return doc["id"].get<std::int64_t>();
            return std::nullopt;
        }
    }

    std::string encode_rpc(const RpcRequest &request)
    {
        json out = envelope(request.id);
        if (request.method == Method::tools_list)
        {
            out["method"] = kMethodList;
            out["params"] = json::object();
        }
        else
        {
            if (!request.call)
                fail(ErrorKind::parameter, "tools/call request without a call payload");
            out["method"] = kMethodCall;
            json params;
            params["tool_name"] = request.call->tool_name;
            params["arguments"] = request.call->arguments;
            out["params"] = std::move(params);
        }
        return out.dump();
    }

    std::string encode_call(const ToolCallRequest &call, std::int64_t id)
    {
        return encode_rpc({id, Method::tools_call, call});
    }

    std::string encode_list(std::int64_t id)
    {
        return encode_rpc({id, Method::tools_list, std::nullopt});
    }

    RpcRequest decode_rpc(std::string_view bytes)
    {
        json doc;
        try
        {
            doc = json::parse(bytes);
        }
        catch (const json::parse_error &e)
        {
            throw RpcError(rpc_code::parse_error, std::string("parse error: ") + e.what());
        }
        if (!doc.is_object())
            throw RpcError(rpc_code::invalid_request, "invalid request: envelope must be an object");

        const auto id = read_id(doc);
        if (!doc.contains("jsonrpc") || doc["jsonrpc"] != "2.0")
            throw RpcError(rpc_code::invalid_request, "protocol error: jsonrpc must be \"2.0\"", id);
        if (!id)
            throw RpcError(rpc_code::invalid_request, "invalid request: id must be an integer");
        if (!doc.contains("method") || !doc["method"].is_string())
            throw RpcError(rpc_code::invalid_request, "invalid request: method must be a string", id);

        const auto method = doc["method"].get<std::string>();
        RpcRequest req;
        req.id = *id;
        if (method == kMethodList)
        {
            req.method = Method::tools_list;
            return req;
        }
        if (method != kMethodCall)
            throw RpcError(rpc_code::method_not_found, "method not found: " + method, id);

        req.method = Method::tools_call;
        if (!doc.contains("params") || !doc["params"].is_object())
            throw RpcError(rpc_code::invalid_params, "invalid params: tools/call needs a params object", id);
        const auto &params = doc["params"];
        if (!params.contains("tool_name") || !params["tool_name"].is_string())
            throw RpcError(rpc_code::invalid_params, "invalid params: tool_name must be a string", id);
        ToolCallRequest call;
        call.tool_name = params["tool_name"].get<std::string>();
        call.arguments = params.contains("arguments") ? params["arguments"] : json(nullptr);
        req.call = std::move(call);
        return req;
    }

    std::string encode_response(const RpcResponse &response)
    {
        json out = envelope(response.id);
        std::visit(
            [&out](const auto &body) {
                using T = std::decay_t<decltype(body)>;
                if constexpr (std::is_same_v<T, ToolCallResponse>)
                    out["result"] = to_json(body);
                else if constexpr (std::is_same_v<T, std::vector<ExpertRegistration>>)
                {
                    json tools = json::array();
                    for (const auto &r : body)
                        tools.push_back(to_json(r));
                    out["result"] = {{"tools", tools}};
                }
                else
                    out["error"] = {{"code", body.code}, {"message", body.message}};
            },
            response.body);
        return out.dump();
    }

    RpcResponse decode_response(std::string_view bytes)
    {
        json doc;
        try
        {
            doc = json::parse(bytes);
        }
        catch (const json::parse_error &e)
        {
            fail(ErrorKind::protocol, std::string("malformed response body: ") + e.what());
        }
        if (!doc.is_object() || !doc.contains("jsonrpc") || doc["jsonrpc"] != "2.0")
            fail(ErrorKind::protocol, "response envelope must carry jsonrpc \"2.0\"");
        if (!doc.contains("id") || !(doc["id"].is_null() || doc["id"].is_number_integer()))
            fail(ErrorKind::protocol, "response id must be an integer or null");

        RpcResponse r;
        r.id = read_id(doc);
        if (doc.contains("error"))
        {
            const auto &e = doc["error"];
            if (!e.is_object() || !e.contains("code") || !e["code"].is_number_integer() || !e.contains("message") ||
                !e["message"].is_string())
                fail(ErrorKind::protocol, "malformed error object");
            r.body = RpcErrorObject{e["code"].get<int>(), e["message"].get<std::string>()};
            return r;
        }
        if (!doc.contains("result") || !doc["result"].is_object())
            fail(ErrorKind::protocol, "response carries neither result nor error");
        const auto &result = doc["result"];
        if (result.contains("tools"))
        {
            if (!result["tools"].is_array())
                fail(ErrorKind::protocol, "tools listing must be an array");
            std::vector<ExpertRegistration> tools;
            for (const auto &t : result["tools"])
                tools.push_back(registration_from_json(t));
            r.body = std::move(tools);
        }
        else
            r.body = response_from_json(result);
        return r;
    }

    std::string canonical(const ToolCallResponse &response)
    {
        return to_json(response).dump();
    }
}
