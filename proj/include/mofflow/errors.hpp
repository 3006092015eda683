#pragma once

#include <stdexcept>
#include <string>

namespace mofflow {

struct DomainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IngestError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct EngineError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Tool-domain failures surfaced over JSON-RPC as code -32000.
struct ToolError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct AuditError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Agent-level abort: the whole campaign restarts from the initial query.
struct CampaignFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace mofflow
