#pragma once

#include <iosfwd>
#include <mutex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace mofflow {

enum class TraceKind {
    UserQuery,
    Plan,
    ToolCall,
    ToolResult,
    LlmCall,
    FinalAnswer,
    Failure,
    Restart,
};

std::string to_string(TraceKind k);
TraceKind trace_kind_from_string(const std::string& s);

// One line of the append-only campaign transcript.
struct TraceEvent {
    double timestamp = 0.0; // engine-clock seconds
    std::string agent;      // planner | executor-N | analyst | system
    TraceKind kind = TraceKind::UserQuery;
    nlohmann::json payload;

    nlohmann::json to_json() const;
    static TraceEvent from_json(const nlohmann::json& j);
};

class Transcript {
  public:
    void append(TraceEvent event);
    std::vector<TraceEvent> events() const;
    std::size_t size() const;
    void write_jsonl(std::ostream& os) const;
    static std::vector<TraceEvent> read_jsonl(std::istream& is);

  private:
    mutable std::mutex mutex_;
    std::vector<TraceEvent> events_;
};

struct OverheadReport {
    double agent_overhead_s = 0.0;
    double task_time_s = 0.0;
};

// Splits the transcript span into task time (as recorded on the
// final_answer payload) and agent overhead. Throws AuditError on a
// truncated transcript (no final_answer) or negative accounting.
OverheadReport overhead_report(const std::vector<TraceEvent>& events);

// Verifies every tool_call is matched by exactly one tool_result or
// failure with the same correlation id, and that a final_answer is
// present iff `expect_success`. Throws AuditError on violation.
void audit_transcript(const std::vector<TraceEvent>& events, bool expect_success);

} // namespace mofflow
