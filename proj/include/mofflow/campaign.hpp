#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mofflow/engine.hpp"
#include "mofflow/model.hpp"
#include "mofflow/prompt.hpp"
#include "mofflow/trace.hpp"

namespace mofflow {

struct CampaignConfig {
    std::uint64_t seed = 42;
    ClockMode mode = ClockMode::Virtual;
    double compression = 1000.0;
    ResourcePool pool;
    std::size_t chunk_size = 1152;
    int max_retries = 2;
    double failure_rate = 0.0;      // task-level (simulation crashes)
    double invalid_args_rate = 0.0; // agent-level (bad tool arguments)
    std::string output_dir = "out";
    std::string database_path;      // overrides the prompt's path when set
    std::string extension = ".cif";
    std::size_t synthetic_count = 0; // > 0: generate a synthetic catalog
    std::optional<std::vector<MaterialRecord>> catalog; // explicit override
    std::shared_ptr<ModelClient> model; // null: scripted model per agent
    double poll_interval_s = 5.0;   // engine-clock seconds, real mode
};

struct FinalReport {
    nlohmann::json report;
    std::string text;
};

struct CampaignResult {
    FinalReport report;
    std::vector<TraceEvent> transcript;
    EngineMetrics metrics;
    CampaignPlan plan;
    std::vector<std::string> result_paths;
};

// Planner -> concurrent executors -> analyst, sharing one Chemistry
// server and one task engine. Throws CampaignFailure on agent-level
// failure. Events are appended to `external` when given, so restart
// wrappers can keep one transcript across attempts.
CampaignResult run_campaign(const std::string& query, const CampaignConfig& config,
                            Transcript* external = nullptr);

struct RestartOutcome {
    bool success = false;
    int attempts_used = 0;
    std::optional<CampaignResult> result;
    std::vector<TraceEvent> transcript;
};

// Campaign-level restart policy: on failure, the whole campaign restarts
// from the initial query with a fresh attempt-derived seed.
RestartOutcome run_with_restarts(const std::string& query, CampaignConfig config,
                                 int max_attempts);

} // namespace mofflow
