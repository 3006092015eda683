#include "mofflow/mcp.hpp"

#include "mofflow/errors.hpp"

namespace mofflow {

namespace {

bool type_matches(const std::string& type, const json& value) {
    if (type == "string") return value.is_string();
    if (type == "number") return value.is_number();
    if (type == "integer") return value.is_number_integer();
    if (type == "boolean") return value.is_boolean();
    if (type == "array") return value.is_array();
    if (type == "object") return value.is_object();
    if (type == "null") return value.is_null();
    return true; // unknown type keyword: accept
}

struct MethodNotFound {
    std::string method;
};

json error_response(const json& id, int code, const std::string& message) {
    return {{"jsonrpc", "2.0"},
            {"id", id},
            {"error", {{"code", code}, {"message", message}}}};
}

json result_response(const json& id, json result) {
    return {{"jsonrpc", "2.0"}, {"id", id}, {"result", std::move(result)}};
}

} // namespace

std::optional<std::string> validate_schema(const json& schema, const json& value) {
    if (!schema.is_object()) return std::nullopt;
    if (schema.contains("type")) {
        const std::string type = schema.at("type").get<std::string>();
        if (!type_matches(type, value)) {
            return "expected " + type + ", got " + std::string(value.type_name());
        }
    }
    if (value.is_object()) {
        if (schema.contains("required")) {
            for (const auto& req : schema.at("required")) {
                if (!value.contains(req.get<std::string>())) {
                    return "missing required field: " + req.get<std::string>();
                }
            }
        }
        if (schema.contains("properties")) {
            for (const auto& [key, sub] : schema.at("properties").items()) {
                if (!value.contains(key)) continue;
                if (auto err = validate_schema(sub, value.at(key))) {
                    return key + ": " + *err;
                }
            }
        }
    }
    if (value.is_array()) {
        if (schema.contains("minItems") &&
            value.size() < schema.at("minItems").get<std::size_t>()) {
            return "array shorter than minItems";
        }
        if (schema.contains("items")) {
            for (std::size_t i = 0; i < value.size(); ++i) {
                if (auto err = validate_schema(schema.at("items"), value.at(i))) {
                    return "[" + std::to_string(i) + "]: " + *err;
                }
            }
        }
    }
    return std::nullopt;
}

McpServer::McpServer(std::string name) : name_(std::move(name)) {}

void McpServer::register_tool(ToolDescriptor descriptor, ToolFn fn) {
    std::lock_guard lock(mutex_);
    const std::string key = descriptor.name;
    tools_[key] = {std::move(descriptor), std::move(fn)};
}

std::vector<ToolDescriptor> McpServer::tools() const {
    std::lock_guard lock(mutex_);
    std::vector<ToolDescriptor> out;
    for (const auto& [name, entry] : tools_) out.push_back(entry.first);
    return out;
}

std::optional<std::string> McpServer::handle_line(const std::string& line) {
    json request;
    try {
        request = json::parse(line);
    } catch (const json::parse_error&) {
        return error_response(nullptr, kParseError, "parse error").dump();
    }
    json response = handle_request(request);
    if (response.is_null()) return std::nullopt; // notification
    return response.dump();
}

json McpServer::handle_request(const json& request) {
    json id = nullptr;
    bool has_id = false;
    if (request.is_object() && request.contains("id")) {
        id = request.at("id");
        has_id = true;
    }
    try {
        json result = dispatch(request);
        if (!has_id) return nullptr;
        return result_response(id, std::move(result));
    } catch (const MethodNotFound& e) {
        if (!has_id) return nullptr;
        return error_response(id, kMethodNotFound, "method not found: " + e.method);
    } catch (const ParseError& e) {
        if (!has_id) return nullptr;
        return error_response(id, kInvalidParams, e.what());
    } catch (const ToolError& e) {
        if (!has_id) return nullptr;
        return error_response(id, kToolDomainError, e.what());
    } catch (const std::exception& e) {
        // Any other failure is reported as a tool-domain error; the
        // server itself stays alive.
        if (!has_id) return nullptr;
        return error_response(id, kToolDomainError, e.what());
    }
}

json McpServer::dispatch(const json& request) {
    if (!request.is_object() || !request.contains("method") ||
        !request.at("method").is_string()) {
        throw ParseError("request must carry a method");
    }
    const std::string method = request.at("method").get<std::string>();
    const json params = request.value("params", json::object());

    if (method == "initialize") {
        return {{"protocolVersion", "2024-11-05"},
                {"capabilities", {{"tools", json::object()}}},
                {"serverInfo", {{"name", name_}, {"version", "1.0"}}}};
    }
    if (method == "tools/list") {
        json list = json::array();
        for (const auto& tool : tools()) {
            list.push_back({{"name", tool.name},
                            {"description", tool.description},
                            {"inputSchema", tool.input_schema}});
        }
        return {{"tools", list}};
    }
    if (method == "tools/call") {
        return call_tool(params);
    }
    // JSON-RPC method-not-found is signalled here, not via exceptions,
    // to keep the code distinct from invalid-params.
    throw MethodNotFound{method};
}

json McpServer::call_tool(const json& params) {
    if (!params.is_object() || !params.contains("name") || !params.at("name").is_string()) {
        throw ParseError("tools/call requires a tool name");
    }
    const std::string name = params.at("name").get<std::string>();
    const json arguments = params.value("arguments", json::object());

    ToolFn fn;
    json schema;
    {
        std::lock_guard lock(mutex_);
        auto it = tools_.find(name);
        if (it == tools_.end()) throw ParseError("unknown tool: " + name);
        fn = it->second.second;
        schema = it->second.first.input_schema;
    }
    if (auto err = validate_schema(schema, arguments)) {
        throw ParseError("invalid arguments for " + name + ": " + *err);
    }
    const json result = fn(arguments);
    return {{"content", json::array({{{"type", "text"}, {"text", result.dump()}}})},
            {"structuredContent", result},
            {"isError", false}};
}

json make_rpc_request(const json& id, const std::string& method, const json& params) {
    return {{"jsonrpc", "2.0"}, {"id", id}, {"method", method}, {"params", params}};
}

json make_tool_call(const json& id, const std::string& tool, const json& arguments) {
    return make_rpc_request(id, "tools/call",
                            {{"name", tool}, {"arguments", arguments}});
}

} // namespace mofflow
