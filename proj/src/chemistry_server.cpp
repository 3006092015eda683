#include "mofflow/chemistry_server.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "mofflow/errors.hpp"
#include "mofflow/hash.hpp"

namespace mofflow {

namespace {

Condition condition_from_json(const json& c, std::uint64_t cycles) {
    Condition cond;
    cond.species = species_from_string(c.at("species").get<std::string>());
    cond.temperature_k = c.at("temperature_k").get<double>();
    cond.pressure_pa = c.at("pressure_pa").get<double>();
    cond.cycles = cycles;
    cond.validate();
    return cond;
}

const json kConditionSchema = {
    {"type", "object"},
    {"properties",
     {{"species", {{"type", "string"}}},
      {"temperature_k", {{"type", "number"}}},
      {"pressure_pa", {{"type", "number"}}}}},
    {"required", {"species", "temperature_k", "pressure_pa"}}};

} // namespace

ChemistryServer::ChemistryServer(std::vector<MaterialRecord> catalog, TaskEngine& engine,
                                 Options options)
    : server_("chemistry"), engine_(engine), options_(std::move(options)) {
    for (auto& rec : catalog) catalog_.emplace(rec.id, std::move(rec));

    server_.register_tool(
        ToolDescriptor{
            "run_gcmc_ensemble",
            "Launch an ensemble of GCMC simulations (one task per "
            "structure x condition) and return a job id immediately.",
            {{"type", "object"},
             {"properties",
              {{"structure_ids",
                {{"type", "array"}, {"items", {{"type", "string"}}}, {"minItems", 1}}},
               {"conditions",
                {{"type", "array"}, {"items", kConditionSchema}, {"minItems", 1}}},
               {"cycles", {{"type", "integer"}}}}},
             {"required", {"structure_ids", "conditions", "cycles"}}}},
        [this](const json& args) { return tool_run_ensemble(args); });

    server_.register_tool(
        ToolDescriptor{
            "job_status",
            "Non-blocking snapshot of a submitted ensemble job.",
            {{"type", "object"},
             {"properties", {{"job_id", {{"type", "string"}}}}},
             {"required", {"job_id"}}}},
        [this](const json& args) { return tool_job_status(args); });

    server_.register_tool(
        ToolDescriptor{
            "collect_results",
            "Write the finished job's outcomes to a JSONL file and return its path.",
            {{"type", "object"},
             {"properties", {{"job_id", {{"type", "string"}}}}},
             {"required", {"job_id"}}}},
        [this](const json& args) { return tool_collect_results(args); });
}

json ChemistryServer::tool_run_ensemble(const json& args) {
    const auto& ids = args.at("structure_ids");
    const auto cycles = args.at("cycles").get<std::int64_t>();
    if (cycles < 1) throw ToolError("cycles must be >= 1");

    std::vector<std::string> unknown;
    for (const auto& id : ids) {
        if (!catalog_.contains(id.get<std::string>())) unknown.push_back(id);
    }
    if (!unknown.empty()) {
        std::string msg = "unknown structure ids:";
        for (const auto& id : unknown) msg += " " + id;
        throw ToolError(msg);
    }

    std::vector<Condition> conditions;
    for (const auto& c : args.at("conditions")) {
        conditions.push_back(condition_from_json(c, static_cast<std::uint64_t>(cycles)));
    }

    Job job;
    {
        std::lock_guard lock(jobs_mutex_);
        char buf[16];
        std::snprintf(buf, sizeof(buf), "job-%04d", next_job_++);
        job.id = buf;
    }
    job.created_at = engine_.now();

    const double failure_rate = options_.failure_rate;
    for (const auto& id : ids) {
        const MaterialRecord& material = catalog_.at(id.get<std::string>());
        for (const Condition& cond : conditions) {
            SimulationSpec spec = make_spec(material, cond, options_.campaign_seed);
            job.handles.push_back(engine_.submit(
                spec, [spec, failure_rate](int attempt) {
                    SimulationSpec s = spec;
                    if (attempt > 0) {
                        s.run_seed = hash_combine(s.run_seed,
                                                  static_cast<std::uint64_t>(attempt));
                    }
                    return execute(s, failure_rate);
                }));
        }
    }

    json out = {{"job_id", job.id}, {"task_count", job.handles.size()}};
    {
        std::lock_guard lock(jobs_mutex_);
        jobs_.emplace(job.id, std::move(job));
    }
    return out;
}

std::string ChemistryServer::job_state_locked(const Job& job, std::size_t& completed,
                                              std::size_t& failed) const {
    completed = failed = 0;
    bool any_open = false;
    for (const auto& h : job.handles) {
        switch (engine_.poll(h)) {
            case TaskState::Completed: ++completed; break;
            case TaskState::Failed: ++failed; break;
            default: any_open = true; break;
        }
    }
    if (any_open) return "running";
    return failed > 0 ? "failed" : "complete";
}

json ChemistryServer::tool_job_status(const json& args) {
    const std::string job_id = args.at("job_id").get<std::string>();
    std::lock_guard lock(jobs_mutex_);
    auto it = jobs_.find(job_id);
    if (it == jobs_.end()) throw ToolError("unknown job_id: " + job_id);
    std::size_t completed = 0, failed = 0;
    const std::string status = job_state_locked(it->second, completed, failed);
    return {{"status", status},
            {"completed_count", completed},
            {"failed_count", failed},
            {"total", it->second.handles.size()}};
}

json ChemistryServer::tool_collect_results(const json& args) {
    const std::string job_id = args.at("job_id").get<std::string>();
    std::vector<TaskHandle> handles;
    {
        std::lock_guard lock(jobs_mutex_);
        auto it = jobs_.find(job_id);
        if (it == jobs_.end()) throw ToolError("unknown job_id: " + job_id);
        std::size_t completed = 0, failed = 0;
        if (job_state_locked(it->second, completed, failed) == "running") {
            throw ToolError("job " + job_id + " not ready: still running");
        }
        handles = it->second.handles;
    }

    struct Row {
        std::string material_id;
        std::string label;
        json line;
    };
    std::vector<Row> rows;
    rows.reserve(handles.size());
    for (const auto& h : handles) {
        const SimulationOutcome oc = engine_.outcome(h);
        Row row;
        row.material_id = oc.material_id;
        row.label = oc.condition.label();
        row.line = {{"material_id", oc.material_id},
                    {"species", to_string(oc.condition.species)},
                    {"temperature_k", oc.condition.temperature_k},
                    {"pressure_pa", oc.condition.pressure_pa},
                    {"cycles", oc.condition.cycles},
                    {"uptake_mol_per_kg", oc.uptake_mol_per_kg},
                    {"duration_s", oc.duration_s},
                    {"status", oc.status == RunStatus::Ok ? "ok" : "failed"},
                    {"task_id", "task-" + std::to_string(h.id)}};
        rows.push_back(std::move(row));
    }
    std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
        if (a.material_id != b.material_id) return a.material_id < b.material_id;
        return a.label < b.label;
    });

    namespace fs = std::filesystem;
    const fs::path dir = fs::path(options_.output_dir) / "results";
    fs::create_directories(dir);
    const fs::path path = dir / (job_id + ".jsonl");
    {
        std::ofstream os(path);
        if (!os) throw ToolError("cannot open result file: " + path.string());
        for (const auto& row : rows) os << row.line.dump() << '\n';
    }
    {
        std::lock_guard lock(jobs_mutex_);
        jobs_.at(job_id).result_path = path.string();
    }
    return {{"result_path", path.string()}, {"record_count", rows.size()}};
}

} // namespace mofflow
