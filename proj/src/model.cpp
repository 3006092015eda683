#include "mofflow/model.hpp"

#include <chrono>

#include <httplib.h>

#include "mofflow/errors.hpp"
#include "mofflow/prompt.hpp"

namespace mofflow {

namespace {

// System messages carry "ROLE:<name>\n<json directive>".
std::pair<std::string, nlohmann::json> read_directive(
    const std::vector<ChatMessage>& messages) {
    for (const auto& msg : messages) {
        if (msg.role != "system") continue;
        if (msg.content.rfind("ROLE:", 0) != 0) continue;
        const auto newline = msg.content.find('\n');
        const std::string role = msg.content.substr(5, newline - 5);
        nlohmann::json directive;
        if (newline != std::string::npos) {
            const std::string body = msg.content.substr(newline + 1);
            if (!body.empty()) directive = nlohmann::json::parse(body);
        }
        return {role, directive};
    }
    throw CampaignFailure("scripted model: no ROLE system message");
}

const ChatMessage* last_tool_message(const std::vector<ChatMessage>& messages) {
    for (auto it = messages.rbegin(); it != messages.rend(); ++it) {
        if (it->role == "tool") return &*it;
    }
    return nullptr;
}

nlohmann::json parse_tool_content(const ChatMessage& msg) {
    // Tool replies carry the structuredContent of the MCP response.
    return nlohmann::json::parse(msg.content);
}

} // namespace

ChatResponse ScriptedModel::chat(const std::vector<ChatMessage>& messages,
                                 const std::vector<ToolDescriptor>&) {
    const auto [role, directive] = read_directive(messages);
    ChatResponse response;
    if (role == "planner") {
        response.message = plan_step(messages);
    } else if (role == "executor") {
        response.message = executor_step(messages, directive);
    } else if (role == "analyst") {
        response.message = analyst_step(messages, directive);
    } else {
        throw CampaignFailure("scripted model: unknown role " + role);
    }
    return response;
}

ChatMessage ScriptedModel::plan_step(const std::vector<ChatMessage>& messages) {
    const ChatMessage* query = nullptr;
    for (const auto& msg : messages) {
        if (msg.role == "user") query = &msg;
    }
    if (query == nullptr) throw CampaignFailure("planner: no user query");
    ChatMessage out;
    out.role = "assistant";
    out.content = parse_campaign_prompt(query->content).to_json().dump();
    return out;
}

ChatMessage ScriptedModel::executor_step(const std::vector<ChatMessage>& messages,
                                         const nlohmann::json& directive) {
    const nlohmann::json& assignment = directive.at("assignment");

    std::string job_id;
    for (const auto& msg : messages) {
        if (msg.role != "tool") continue;
        const nlohmann::json content = parse_tool_content(msg);
        if (content.contains("job_id")) job_id = content.at("job_id").get<std::string>();
    }

    ChatMessage out;
    out.role = "assistant";
    const ChatMessage* last = last_tool_message(messages);

    if (last == nullptr) {
        nlohmann::json args = {{"structure_ids", assignment.at("structure_ids")},
                               {"conditions", assignment.at("conditions")},
                               {"cycles", assignment.at("cycles")}};
        if (corrupt_tool_args_) {
            // Reproduces the observed failure mode: a required field is
            // simply missing from the generated arguments.
            args.erase("conditions");
        }
        out.tool_calls.push_back(
            {"call-" + std::to_string(next_call_++), "run_gcmc_ensemble", args});
        return out;
    }

    const nlohmann::json content = parse_tool_content(*last);
    if (content.contains("result_path")) {
        out.content = "Results collected at " + content.at("result_path").get<std::string>();
        return out;
    }
    if (job_id.empty()) throw CampaignFailure("executor: lost job id");
    const std::string status = content.value("status", "");
    if (status == "complete" || status == "failed") {
        out.tool_calls.push_back({"call-" + std::to_string(next_call_++),
                                  "collect_results",
                                  {{"job_id", job_id}}});
    } else {
        out.tool_calls.push_back({"call-" + std::to_string(next_call_++),
                                  "job_status",
                                  {{"job_id", job_id}}});
    }
    return out;
}

ChatMessage ScriptedModel::analyst_step(const std::vector<ChatMessage>& messages,
                                        const nlohmann::json& directive) {
    const nlohmann::json& objectives = directive.at("objectives");
    std::size_t done = 0;
    for (const auto& msg : messages) {
        if (msg.role == "tool") ++done;
    }
    ChatMessage out;
    out.role = "assistant";
    if (done < objectives.size()) {
        const nlohmann::json& obj = objectives.at(done);
        nlohmann::json args = {{"result_paths", obj.at("result_paths")},
                               {"adsorption_pressure", obj.at("adsorption_pressure")},
                               {"fraction", obj.at("fraction")}};
        if (obj.contains("desorption_pressure")) {
            args["desorption_pressure"] = obj.at("desorption_pressure");
        }
        out.tool_calls.push_back(
            {"call-" + std::to_string(next_call_++), "aggregate_and_rank", args});
        return out;
    }
    out.content = "Aggregation complete for " + std::to_string(objectives.size()) +
                  " objective(s).";
    return out;
}

nlohmann::json messages_to_json(const std::vector<ChatMessage>& messages) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& msg : messages) {
        nlohmann::json j = {{"role", msg.role}, {"content", msg.content}};
        if (!msg.tool_calls.empty()) {
            nlohmann::json calls = nlohmann::json::array();
            for (const auto& call : msg.tool_calls) {
                calls.push_back({{"id", call.id},
                                 {"type", "function"},
                                 {"function",
                                  {{"name", call.name},
                                   {"arguments", call.arguments.dump()}}}});
            }
            j["tool_calls"] = std::move(calls);
        }
        if (!msg.tool_call_id.empty()) j["tool_call_id"] = msg.tool_call_id;
        out.push_back(std::move(j));
    }
    return out;
}

HttpModelClient::HttpModelClient(Options options) : options_(std::move(options)) {}

ChatResponse HttpModelClient::chat(const std::vector<ChatMessage>& messages,
                                   const std::vector<ToolDescriptor>& tools) {
    nlohmann::json tool_schemas = nlohmann::json::array();
    for (const auto& tool : tools) {
        tool_schemas.push_back({{"type", "function"},
                                {"function",
                                 {{"name", tool.name},
                                  {"description", tool.description},
                                  {"parameters", tool.input_schema}}}});
    }
    nlohmann::json body = {{"model", options_.model},
                           {"messages", messages_to_json(messages)}};
    if (!tool_schemas.empty()) body["tools"] = tool_schemas;

    httplib::Client client(options_.base_url);
    client.set_read_timeout(static_cast<time_t>(options_.timeout_s), 0);
    httplib::Headers headers;
    if (!options_.api_key.empty()) {
        headers.emplace("Authorization", "Bearer " + options_.api_key);
    }

    const auto t0 = std::chrono::steady_clock::now();
    auto result = client.Post(options_.path, headers, body.dump(), "application/json");
    const auto t1 = std::chrono::steady_clock::now();
    if (!result || result->status != 200) {
        throw CampaignFailure("model endpoint error: " +
                              (result ? std::to_string(result->status) : "no response"));
    }

    const nlohmann::json reply = nlohmann::json::parse(result->body);
    const nlohmann::json& message = reply.at("choices").at(0).at("message");

    ChatResponse response;
    response.latency_s = std::chrono::duration<double>(t1 - t0).count();
    response.message.role = "assistant";
    if (message.contains("content") && message.at("content").is_string()) {
        response.message.content = message.at("content").get<std::string>();
    }
    if (message.contains("tool_calls")) {
        for (const auto& call : message.at("tool_calls")) {
            ToolCallRequest req;
            req.id = call.value("id", "");
            req.name = call.at("function").at("name").get<std::string>();
            try {
                req.arguments =
                    nlohmann::json::parse(call.at("function").at("arguments").get<std::string>());
            } catch (const nlohmann::json::parse_error&) {
                // Invalid generated arguments: surface them as-is and let
                // schema validation reject the call downstream.
                req.arguments = call.at("function").at("arguments");
            }
            response.message.tool_calls.push_back(std::move(req));
        }
    }
    return response;
}

} // namespace mofflow
