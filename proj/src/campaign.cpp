#include "mofflow/campaign.hpp"

#include <algorithm>
#include <atomic>
#include <sstream>
#include <thread>

#include "mofflow/chemistry_server.hpp"
#include "mofflow/data_server.hpp"
#include "mofflow/errors.hpp"
#include "mofflow/hash.hpp"

namespace mofflow {

namespace {

const std::uint64_t kInvalidArgsTag = fnv1a64("invalid-args");
const std::uint64_t kExecutorTag = fnv1a64("executor");

// One agent conversation against one MCP server. Drives the model a
// message at a time, dispatches its tool calls, and records every
// exchange in the transcript.
class AgentSession {
  public:
    AgentSession(std::string agent_name, ModelClient& model, McpServer& server,
                 Transcript& transcript, TaskEngine& engine)
        : agent_(std::move(agent_name)), model_(model), server_(server),
          transcript_(transcript), engine_(engine) {}

    void set_system(const std::string& content) {
        messages_.push_back({"system", content, {}, {}});
    }
    void add_user(const std::string& content) {
        messages_.push_back({"user", content, {}, {}});
    }

    bool done() const { return done_; }
    const std::string& final_content() const { return final_content_; }
    const std::vector<json>& tool_results() const { return tool_results_; }

    // One model consult plus dispatch of any tool calls it produced.
    void step() {
        const ChatResponse response = model_.chat(messages_, server_.tools());
        transcript_.append({engine_.now(), agent_, TraceKind::LlmCall,
                            {{"latency_s", response.latency_s},
                             {"tool_call_count", response.message.tool_calls.size()}}});
        messages_.push_back(response.message);

        if (response.message.tool_calls.empty()) {
            done_ = true;
            final_content_ = response.message.content;
            return;
        }
        for (const auto& call : response.message.tool_calls) {
            dispatch(call);
        }
    }

  private:
    void dispatch(const ToolCallRequest& call) {
        const std::string cid = agent_ + ":" + call.id;
        transcript_.append({engine_.now(), agent_, TraceKind::ToolCall,
                            {{"correlation_id", cid},
                             {"tool", call.name},
                             {"arguments", call.arguments}}});
        const json frame = make_tool_call(next_rpc_id_++, call.name, call.arguments);
        const auto reply_line = server_.handle_line(frame.dump());
        const json reply = json::parse(reply_line.value());
        if (reply.contains("error")) {
            transcript_.append({engine_.now(), agent_, TraceKind::Failure,
                                {{"correlation_id", cid}, {"error", reply.at("error")}}});
            throw CampaignFailure(agent_ + ": tool call " + call.name + " failed: " +
                                  reply.at("error").at("message").get<std::string>());
        }
        const json content = reply.at("result").value("structuredContent", json::object());
        transcript_.append({engine_.now(), agent_, TraceKind::ToolResult,
                            {{"correlation_id", cid}, {"result", content}}});
        tool_results_.push_back(content);
        messages_.push_back({"tool", content.dump(), {}, call.id});
    }

    std::string agent_;
    ModelClient& model_;
    McpServer& server_;
    Transcript& transcript_;
    TaskEngine& engine_;
    std::vector<ChatMessage> messages_;
    std::vector<json> tool_results_;
    bool done_ = false;
    std::string final_content_;
    int next_rpc_id_ = 1;
};

struct ExecutorFlow {
    std::unique_ptr<ModelClient> owned_model;
    std::unique_ptr<AgentSession> session;
    std::size_t objective_index = 0;

    bool submitted() const {
        for (const auto& result : session->tool_results()) {
            if (result.contains("job_id")) return true;
        }
        return false;
    }
    std::vector<std::string> result_paths() const {
        std::vector<std::string> out;
        for (const auto& result : session->tool_results()) {
            if (result.contains("result_path")) {
                out.push_back(result.at("result_path").get<std::string>());
            }
        }
        return out;
    }
};

json assignment_json(const PartitionAssignment& part, const Objective& obj,
                     std::uint64_t cycles) {
    json conditions = json::array();
    for (const Condition& c : obj.conditions(cycles)) {
        conditions.push_back({{"species", to_string(c.species)},
                              {"temperature_k", c.temperature_k},
                              {"pressure_pa", c.pressure_pa}});
    }
    return {{"structure_ids", part.structure_ids},
            {"conditions", conditions},
            {"cycles", cycles}};
}

std::string render_report_text(const json& report) {
    std::ostringstream os;
    os << "Campaign report\n===============\n";
    for (const auto& obj : report.at("objectives")) {
        const json& ranking = obj.at("ranking");
        os << "\nObjective: " << obj.at("label").get<std::string>() << "  ("
           << "T=" << obj.at("temperature_k").get<double>() << " K, "
           << "P_ads=" << obj.at("adsorption_pressure_pa").get<double>() << " Pa";
        if (obj.contains("desorption_pressure_pa")) {
            os << ", P_des=" << obj.at("desorption_pressure_pa").get<double>() << " Pa";
        }
        os << ")\n";
        os << "  population: " << ranking.at("population_size").get<std::size_t>()
           << ", selected: " << ranking.at("selected").size() << " (top "
           << ranking.at("fraction").get<double>() * 100.0 << "%)\n";
        if (!ranking.at("stats").is_null()) {
            const json& stats = ranking.at("stats");
            os << "  working capacity [mol/kg]  min=" << stats.at("min").get<double>()
               << "  mean=" << stats.at("mean").get<double>()
               << "  max=" << stats.at("max").get<double>()
               << "  p80=" << stats.at("p80").get<double>() << "\n";
        }
        os << "  incomplete materials: " << ranking.at("incomplete").size() << "\n";
        const auto& selected = ranking.at("selected");
        const std::size_t shown = std::min<std::size_t>(selected.size(), 10);
        for (std::size_t i = 0; i < shown; ++i) {
            os << "    " << (i + 1) << ". "
               << selected.at(i).at("material_id").get<std::string>() << "  "
               << selected.at(i).at("working_capacity").get<double>() << " mol/kg\n";
        }
        if (selected.size() > shown) {
            os << "    ... " << (selected.size() - shown) << " more\n";
        }
    }
    const json& engine = report.at("engine");
    const json& overhead = report.at("overhead");
    os << "\nExecution: makespan " << engine.at("makespan").get<double>() << " s, "
       << "utilization " << engine.at("utilization").get<double>() << ", tasks "
       << engine.at("task_count").get<std::size_t>() << "\n";
    os << "Overhead: agent " << overhead.at("agent_overhead_s").get<double>()
       << " s, task time " << overhead.at("task_time_s").get<double>() << " s\n";
    return os.str();
}

} // namespace

CampaignResult run_campaign(const std::string& query, const CampaignConfig& config,
                            Transcript* external) {
    Transcript local;
    Transcript& transcript = external != nullptr ? *external : local;

    TaskEngine engine({config.pool, config.mode, config.max_retries, config.compression});

    transcript.append({engine.now(), "system", TraceKind::UserQuery, {{"query", query}}});

    // Planner.
    auto make_model = [&](bool corrupt) -> std::unique_ptr<ModelClient> {
        if (config.model) return nullptr; // shared external model
        return std::make_unique<ScriptedModel>(corrupt);
    };
    std::unique_ptr<ModelClient> planner_owned = make_model(false);
    ModelClient& planner_model = config.model ? *config.model : *planner_owned;

    DataServer data; // also used as a no-tool target for the planner
    AgentSession planner("planner", planner_model, data.server(), transcript, engine);
    planner.set_system("ROLE:planner\n");
    planner.add_user(query);
    CampaignPlan plan;
    try {
        planner.step();
        if (!planner.done()) throw CampaignFailure("planner produced tool calls");
        plan = CampaignPlan::from_json(json::parse(planner.final_content()));
        if (plan.objectives.empty()) throw CampaignFailure("planner produced no objectives");
    } catch (const CampaignFailure&) {
        throw;
    } catch (const std::exception& e) {
        transcript.append({engine.now(), "planner", TraceKind::Failure,
                           {{"error", std::string(e.what())}}});
        throw CampaignFailure(std::string("invalid plan: ") + e.what());
    }
    transcript.append({engine.now(), "planner", TraceKind::Plan, {{"plan", plan.to_json()}}});

    // Catalog and partitions.
    std::vector<MaterialRecord> catalog;
    if (config.catalog) {
        catalog = *config.catalog;
    } else if (config.synthetic_count > 0) {
        catalog = make_synthetic_catalog(config.synthetic_count);
    } else {
        const std::string& path =
            config.database_path.empty() ? plan.database_path : config.database_path;
        catalog = scan_database(path, config.extension);
    }
    plan_partitions(plan, catalog, config.chunk_size);

    ChemistryServer chemistry(catalog, engine,
                              {config.failure_rate, config.seed, config.output_dir});

    // Agent-level failure injection: one Bernoulli draw per campaign
    // attempt; on failure one executor's generated arguments go bad.
    std::size_t victim = plan.partitions.size();
    if (config.invalid_args_rate > 0.0 && !config.model) {
        SplitMix rng(hash_combine(config.seed, kInvalidArgsTag));
        if (rng.uniform() < config.invalid_args_rate) {
            victim = static_cast<std::size_t>(rng.next() % plan.partitions.size());
        }
    }

    // Executors, one per partition.
    std::vector<ExecutorFlow> executors;
    executors.reserve(plan.partitions.size());
    for (std::size_t i = 0; i < plan.partitions.size(); ++i) {
        const PartitionAssignment& part = plan.partitions[i];
        const Objective& obj = plan.objectives.at(part.objective_index);
        ExecutorFlow flow;
        flow.objective_index = part.objective_index;
        flow.owned_model = make_model(i == victim);
        ModelClient& model = config.model ? *config.model : *flow.owned_model;
        flow.session = std::make_unique<AgentSession>(
            "executor-" + std::to_string(i), model, chemistry.server(), transcript, engine);
        flow.session->set_system(
            "ROLE:executor\n" +
            json({{"assignment", assignment_json(part, obj, plan.cycles)}}).dump());
        flow.session->add_user("Run your assigned ensemble and collect the results.");
        executors.push_back(std::move(flow));
    }

    EngineMetrics metrics;
    if (config.mode == ClockMode::Virtual) {
        // Deterministic schedule: all ensembles are submitted before the
        // event clock advances, matching concurrent executors whose
        // submissions consume no virtual time.
        for (auto& flow : executors) {
            while (!flow.submitted() && !flow.session->done()) flow.session->step();
        }
        metrics = engine.advance_to_idle();
        for (auto& flow : executors) {
            while (!flow.session->done()) flow.session->step();
        }
    } else {
        std::vector<std::thread> threads;
        std::atomic<bool> failed{false};
        std::string failure_message;
        std::mutex failure_mutex;
        threads.reserve(executors.size());
        for (auto& flow : executors) {
            threads.emplace_back([&flow, &config, &failed, &failure_message,
                                  &failure_mutex] {
                try {
                    while (!flow.session->done()) {
                        flow.session->step();
                        if (!flow.session->done()) {
                            std::this_thread::sleep_for(std::chrono::duration<double>(
                                config.poll_interval_s / config.compression));
                        }
                    }
                } catch (const std::exception& e) {
                    failed = true;
                    std::lock_guard lock(failure_mutex);
                    failure_message = e.what();
                }
            });
        }
        for (auto& t : threads) t.join();
        if (failed) throw CampaignFailure(failure_message);
        metrics = engine.metrics();
    }

    // Analyst: one aggregate_and_rank call per objective.
    json analyst_objectives = json::array();
    for (std::size_t obj_idx = 0; obj_idx < plan.objectives.size(); ++obj_idx) {
        const Objective& obj = plan.objectives[obj_idx];
        json paths = json::array();
        for (const auto& flow : executors) {
            if (flow.objective_index != obj_idx) continue;
            for (const auto& path : flow.result_paths()) paths.push_back(path);
        }
        json entry = {{"label", obj.label},
                      {"result_paths", paths},
                      {"adsorption_pressure", obj.adsorption_pressure_pa},
                      {"fraction", obj.fraction}};
        if (obj.desorption_pressure_pa) {
            entry["desorption_pressure"] = *obj.desorption_pressure_pa;
        }
        analyst_objectives.push_back(std::move(entry));
    }

    std::unique_ptr<ModelClient> analyst_owned = make_model(false);
    ModelClient& analyst_model = config.model ? *config.model : *analyst_owned;
    AgentSession analyst("analyst", analyst_model, data.server(), transcript, engine);
    analyst.set_system("ROLE:analyst\n" + json({{"objectives", analyst_objectives}}).dump());
    analyst.add_user("Aggregate all collected results and rank each objective.");
    while (!analyst.done()) analyst.step();

    // Report.
    json objectives_report = json::array();
    for (std::size_t i = 0; i < plan.objectives.size(); ++i) {
        const Objective& obj = plan.objectives[i];
        json entry = {{"label", obj.label},
                      {"species", to_string(obj.species)},
                      {"temperature_k", obj.temperature_k},
                      {"adsorption_pressure_pa", obj.adsorption_pressure_pa},
                      {"fraction", obj.fraction},
                      {"ranking", analyst.tool_results().at(i)}};
        if (obj.desorption_pressure_pa) {
            entry["desorption_pressure_pa"] = *obj.desorption_pressure_pa;
        }
        objectives_report.push_back(std::move(entry));
    }

    CampaignResult result;
    result.plan = plan;
    result.metrics = metrics;
    for (const auto& flow : executors) {
        for (const auto& path : flow.result_paths()) result.result_paths.push_back(path);
    }

    transcript.append({engine.now(), "analyst", TraceKind::FinalAnswer,
                       {{"task_time_s", metrics.makespan},
                        {"answer", analyst.final_content()}}});

    const OverheadReport overhead = overhead_report(transcript.events());
    result.report.report = {
        {"query", query},
        {"plan", plan.to_json()},
        {"objectives", objectives_report},
        {"engine",
         {{"makespan", metrics.makespan},
          {"total_busy", metrics.total_busy},
          {"utilization", metrics.utilization},
          {"total_slots", metrics.total_slots},
          {"task_count", metrics.tasks.size()}}},
        {"overhead",
         {{"agent_overhead_s", overhead.agent_overhead_s},
          {"task_time_s", overhead.task_time_s}}},
        {"config",
         {{"seed", config.seed},
          {"nodes", config.pool.nodes},
          {"slots_per_node", config.pool.slots_per_node},
          {"chunk_size", config.chunk_size},
          {"mode", config.mode == ClockMode::Virtual ? "virtual" : "real"}}}};
    result.report.text = render_report_text(result.report.report);
    result.transcript = transcript.events();
    return result;
}

RestartOutcome run_with_restarts(const std::string& query, CampaignConfig config,
                                 int max_attempts) {
    if (max_attempts < 1) throw DomainError("max_attempts must be >= 1");
    const std::uint64_t master_seed = config.seed;
    Transcript transcript;
    RestartOutcome outcome;
    for (int attempt = 1; attempt <= max_attempts; ++attempt) {
        config.seed = attempt == 1
                          ? master_seed
                          : hash_combine(master_seed, static_cast<std::uint64_t>(attempt));
        try {
            CampaignResult result = run_campaign(query, config, &transcript);
            outcome.success = true;
            outcome.attempts_used = attempt;
            outcome.result = std::move(result);
            outcome.transcript = transcript.events();
            return outcome;
        } catch (const CampaignFailure& e) {
            transcript.append({0.0, "system", TraceKind::Restart,
                               {{"attempt", attempt},
                                {"max_attempts", max_attempts},
                                {"error", std::string(e.what())}}});
        }
    }
    outcome.success = false;
    outcome.attempts_used = max_attempts;
    outcome.transcript = transcript.events();
    return outcome;
}

} // namespace mofflow
