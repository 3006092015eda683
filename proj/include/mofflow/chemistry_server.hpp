#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "mofflow/engine.hpp"
#include "mofflow/mcp.hpp"

namespace mofflow {

// Chemistry tool server: turns run_gcmc_ensemble calls into task-engine
// submissions and serves job polling and JSONL result collection.
// Tools: run_gcmc_ensemble, job_status, collect_results.
class ChemistryServer {
  public:
    struct Options {
        double failure_rate = 0.0;
        std::uint64_t campaign_seed = 0;
        std::string output_dir = "."; // results land in <output_dir>/results/
    };

    ChemistryServer(std::vector<MaterialRecord> catalog, TaskEngine& engine,
                    Options options);

    McpServer& server() { return server_; }

  private:
    struct Job {
        std::string id;
        std::vector<TaskHandle> handles;
        double created_at = 0.0;
        std::string result_path;
    };

    json tool_run_ensemble(const json& args);
    json tool_job_status(const json& args);
    json tool_collect_results(const json& args);
    std::string job_state_locked(const Job& job, std::size_t& completed,
                                 std::size_t& failed) const;

    McpServer server_;
    TaskEngine& engine_;
    Options options_;
    std::unordered_map<std::string, MaterialRecord> catalog_;
    mutable std::mutex jobs_mutex_;
    std::map<std::string, Job> jobs_;
    int next_job_ = 1;
};

} // namespace mofflow
