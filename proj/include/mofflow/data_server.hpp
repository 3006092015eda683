#pragma once

#include "mofflow/mcp.hpp"

namespace mofflow {

// Data tool server: joins JSONL simulation results by material, computes
// working capacities, and ranks the top fraction.
// Tool: aggregate_and_rank.
class DataServer {
  public:
    DataServer();

    McpServer& server() { return server_; }

  private:
    json tool_aggregate_and_rank(const json& args);

    McpServer server_;
};

} // namespace mofflow
