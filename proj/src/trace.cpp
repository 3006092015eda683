#include "mofflow/trace.hpp"

#include <istream>
#include <map>
#include <ostream>

#include "mofflow/errors.hpp"

namespace mofflow {

std::string to_string(TraceKind k) {
    switch (k) {
        case TraceKind::UserQuery: return "user_query";
        case TraceKind::Plan: return "plan";
        case TraceKind::ToolCall: return "tool_call";
        case TraceKind::ToolResult: return "tool_result";
        case TraceKind::LlmCall: return "llm_call";
        case TraceKind::FinalAnswer: return "final_answer";
        case TraceKind::Failure: return "failure";
        case TraceKind::Restart: return "restart";
    }
    return "unknown";
}

TraceKind trace_kind_from_string(const std::string& s) {
    if (s == "user_query") return TraceKind::UserQuery;
    if (s == "plan") return TraceKind::Plan;
    if (s == "tool_call") return TraceKind::ToolCall;
    if (s == "tool_result") return TraceKind::ToolResult;
    if (s == "llm_call") return TraceKind::LlmCall;
    if (s == "final_answer") return TraceKind::FinalAnswer;
    if (s == "failure") return TraceKind::Failure;
    if (s == "restart") return TraceKind::Restart;
    throw AuditError("unknown trace kind: " + s);
}

nlohmann::json TraceEvent::to_json() const {
    return {{"timestamp", timestamp},
            {"agent", agent},
            {"kind", to_string(kind)},
            {"payload", payload}};
}

TraceEvent TraceEvent::from_json(const nlohmann::json& j) {
    TraceEvent e;
    e.timestamp = j.at("timestamp").get<double>();
    e.agent = j.at("agent").get<std::string>();
    e.kind = trace_kind_from_string(j.at("kind").get<std::string>());
    e.payload = j.value("payload", nlohmann::json());
    return e;
}

void Transcript::append(TraceEvent event) {
    std::lock_guard lock(mutex_);
    events_.push_back(std::move(event));
}

std::vector<TraceEvent> Transcript::events() const {
    std::lock_guard lock(mutex_);
    return events_;
}

std::size_t Transcript::size() const {
    std::lock_guard lock(mutex_);
    return events_.size();
}

void Transcript::write_jsonl(std::ostream& os) const {
    for (const auto& e : events()) os << e.to_json().dump() << '\n';
}

std::vector<TraceEvent> Transcript::read_jsonl(std::istream& is) {
    std::vector<TraceEvent> out;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        out.push_back(TraceEvent::from_json(nlohmann::json::parse(line)));
    }
    return out;
}

OverheadReport overhead_report(const std::vector<TraceEvent>& events) {
    if (events.empty()) throw AuditError("empty transcript");
    const TraceEvent* final_answer = nullptr;
    for (const auto& e : events) {
        if (e.kind == TraceKind::FinalAnswer) final_answer = &e;
    }
    if (final_answer == nullptr) {
        throw AuditError("truncated transcript: no final_answer event");
    }
    double first = events.front().timestamp;
    double last = events.front().timestamp;
    for (const auto& e : events) {
        first = std::min(first, e.timestamp);
        last = std::max(last, e.timestamp);
    }
    OverheadReport report;
    report.task_time_s = final_answer->payload.value("task_time_s", 0.0);
    report.agent_overhead_s = (last - first) - report.task_time_s;
    if (report.task_time_s < 0.0 || report.agent_overhead_s < -1e-9) {
        throw AuditError("inconsistent transcript timing");
    }
    if (report.agent_overhead_s < 0.0) report.agent_overhead_s = 0.0;
    return report;
}

void audit_transcript(const std::vector<TraceEvent>& events, bool expect_success) {
    std::map<std::string, int> open; // correlation id -> calls minus replies
    bool saw_final = false;
    for (const auto& e : events) {
        if (e.kind == TraceKind::FinalAnswer) saw_final = true;
        if (e.kind != TraceKind::ToolCall && e.kind != TraceKind::ToolResult &&
            e.kind != TraceKind::Failure) {
            continue;
        }
        if (!e.payload.contains("correlation_id")) {
            if (e.kind == TraceKind::Failure) continue; // campaign-level failure
            throw AuditError("tool event without correlation id");
        }
        const std::string cid = e.payload.at("correlation_id").get<std::string>();
        if (e.kind == TraceKind::ToolCall) {
            if (open.count(cid) != 0) throw AuditError("duplicate correlation id " + cid);
            open[cid] = 1;
        } else {
            auto it = open.find(cid);
            if (it == open.end() || it->second != 1) {
                throw AuditError("reply without matching tool_call: " + cid);
            }
            it->second = 0;
        }
    }
    for (const auto& [cid, pending] : open) {
        if (pending != 0) throw AuditError("tool_call never answered: " + cid);
    }
    if (saw_final != expect_success) {
        throw AuditError(expect_success ? "missing final_answer"
                                        : "final_answer present in failed run");
    }
}

} // namespace mofflow
