#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mofflow/mcp.hpp"

namespace mofflow {

struct ToolCallRequest {
    std::string id;
    std::string name;
    nlohmann::json arguments;
};

struct ChatMessage {
    std::string role; // system | user | assistant | tool
    std::string content;
    std::vector<ToolCallRequest> tool_calls;
    std::string tool_call_id; // tool-role replies only
};

struct ChatResponse {
    ChatMessage message;
    double latency_s = 0.0;
};

// Chat-with-tools interface shared by the scripted model and the HTTP
// client for OpenAI-compatible endpoints.
class ModelClient {
  public:
    virtual ~ModelClient() = default;
    virtual ChatResponse chat(const std::vector<ChatMessage>& messages,
                              const std::vector<ToolDescriptor>& tools) = 0;
};

// Deterministic decision rules replaying the planner / executor / analyst
// behavior. The role and its working context are read from the system
// message, which carries a JSON directive under a "ROLE:<name>" header.
// With corrupt_tool_args set, the first ensemble call is emitted with
// schema-invalid arguments (the observed real-model failure mode).
class ScriptedModel : public ModelClient {
  public:
    explicit ScriptedModel(bool corrupt_tool_args = false)
        : corrupt_tool_args_(corrupt_tool_args) {}

    ChatResponse chat(const std::vector<ChatMessage>& messages,
                      const std::vector<ToolDescriptor>& tools) override;

  private:
    ChatMessage plan_step(const std::vector<ChatMessage>& messages);
    ChatMessage executor_step(const std::vector<ChatMessage>& messages,
                              const nlohmann::json& directive);
    ChatMessage analyst_step(const std::vector<ChatMessage>& messages,
                             const nlohmann::json& directive);

    bool corrupt_tool_args_ = false;
    int next_call_ = 1;
};

// Client for an OpenAI-compatible chat-completions endpoint. Exercised by
// the optional smoke path only; scripted runs never touch the network.
class HttpModelClient : public ModelClient {
  public:
    struct Options {
        std::string base_url;      // e.g. http://localhost:8000
        std::string path = "/v1/chat/completions";
        std::string model = "gpt-oss-120b";
        std::string api_key;       // empty: no Authorization header
        double timeout_s = 120.0;
    };

    explicit HttpModelClient(Options options);

    ChatResponse chat(const std::vector<ChatMessage>& messages,
                      const std::vector<ToolDescriptor>& tools) override;

  private:
    Options options_;
};

nlohmann::json messages_to_json(const std::vector<ChatMessage>& messages);

} // namespace mofflow
