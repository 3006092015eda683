#pragma once

#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace mofflow {

using json = nlohmann::json;

// JSON-RPC 2.0 error codes used on the wire.
inline constexpr int kParseError = -32700;
inline constexpr int kMethodNotFound = -32601;
inline constexpr int kInvalidParams = -32602;
inline constexpr int kToolDomainError = -32000;

struct ToolDescriptor {
    std::string name;
    std::string description;
    json input_schema; // JSON-Schema subset: type/properties/required/items/minItems
};

using ToolFn = std::function<json(const json& arguments)>;

// Checks `value` against the schema subset used by the tool registry.
// Returns an error message, or nullopt when valid.
std::optional<std::string> validate_schema(const json& schema, const json& value);

// Minimal MCP server: initialize, tools/list, tools/call over
// newline-delimited JSON-RPC 2.0 frames. Safe for interleaved calls from
// multiple clients; malformed input never terminates the server.
class McpServer {
  public:
    explicit McpServer(std::string name);

    void register_tool(ToolDescriptor descriptor, ToolFn fn);

    // One frame in, one frame out (none for notifications).
    std::optional<std::string> handle_line(const std::string& line);

    json handle_request(const json& request);

    std::vector<ToolDescriptor> tools() const;
    const std::string& name() const { return name_; }

  private:
    json dispatch(const json& request);
    json call_tool(const json& params);

    std::string name_;
    mutable std::mutex mutex_;
    std::map<std::string, std::pair<ToolDescriptor, ToolFn>> tools_;
};

json make_rpc_request(const json& id, const std::string& method, const json& params);
json make_tool_call(const json& id, const std::string& tool, const json& arguments);

} // namespace mofflow
