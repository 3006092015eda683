#include "mofflow/bench.hpp"

#include <cmath>
#include <ostream>
#include <sstream>

#include "mofflow/errors.hpp"
#include "mofflow/hash.hpp"

namespace mofflow {

namespace {

void check_node_counts(const BenchConfig& config) {
    if (config.node_counts.empty()) throw DomainError("bench: node_counts empty");
    for (std::size_t i = 1; i < config.node_counts.size(); ++i) {
        if (config.node_counts[i] <= config.node_counts[i - 1]) {
            throw DomainError("bench: node_counts must be strictly increasing");
        }
    }
    if (config.node_counts.front() < 1) throw DomainError("bench: node count < 1");
}

CampaignConfig campaign_config_for(const BenchConfig& config, int nodes,
                                   std::vector<MaterialRecord> materials,
                                   const std::string& run_dir) {
    CampaignConfig cc;
    cc.seed = config.seed;
    cc.mode = ClockMode::Virtual;
    cc.pool = ResourcePool{nodes, config.slots_per_node};
    cc.chunk_size = config.chunk_size;
    cc.catalog = std::move(materials);
    cc.output_dir = run_dir;
    return cc;
}

} // namespace

std::string awh_prompt(std::uint64_t cycles) {
    std::ostringstream os;
    os << "Role: You are coordinating a delegated workflow.\n"
       << "Data Source: The CoRE MOF database is located at: synthetic://catalog\n"
       << "Objective: Identify the top 20% best-performing MOFs for atmospheric "
          "water harvesting by calculating the working capacity between "
          "adsorption and desorption conditions.\n"
       << "Simulation Parameters:\n"
       << "- Temperature: 298 K\n"
       << "- Water Saturation Pressure at 298K: 3200 Pa\n"
       << "- Adsorption condition: 60% relative humidity\n"
       << "- Desorption condition: 10% relative humidity\n"
       << "- Duration: " << cycles << " cycles per run\n";
    return os.str();
}

std::string multi_objective_prompt(std::uint64_t cycles) {
    std::ostringstream os;
    os << "Role: You are coordinating a delegated workflow.\n"
       << "Data Source: The CoRE MOF database is located at: synthetic://catalog\n"
       << "Objective: I want to run the following simulations:\n"
       << "- Water adsorption at 60% RH, 298K\n"
       << "- CO2 adsorption at 0.15 bar, 298K\n"
       << "- N2 adsorption at 1 bar, 77K\n"
       << "- Identify the top 20% best-performing MOFs for each application.\n"
       << "Simulation Parameters:\n"
       << "- Water Saturation Pressure at 298K: 3200 Pa\n"
       << "- Duration: " << cycles << " cycles per simulation\n";
    return os.str();
}

std::vector<WeakRow> bench_weak(const BenchConfig& config) {
    check_node_counts(config);
    if (config.mofs_per_node == 0) throw DomainError("bench-weak: mofs_per_node unset");
    if (config.total_mofs != 0) {
        throw DomainError("bench-weak: total_mofs must be unset for weak scaling");
    }
    const std::size_t max_materials =
        static_cast<std::size_t>(config.node_counts.back()) * config.mofs_per_node;
    const std::vector<MaterialRecord> catalog = make_synthetic_catalog(max_materials);
    const std::string query = awh_prompt(config.cycles);

    std::vector<WeakRow> rows;
    for (int nodes : config.node_counts) {
        const std::size_t count = static_cast<std::size_t>(nodes) * config.mofs_per_node;
        auto materials = select_materials(catalog, count, config.sampling, config.seed,
                                          static_cast<std::uint64_t>(nodes));
        const std::string run_dir =
            config.output_dir + "/weak-n" + std::to_string(nodes);
        const CampaignResult result =
            run_campaign(query, campaign_config_for(config, nodes, std::move(materials),
                                                    run_dir));
        WeakRow row;
        row.nodes = nodes;
        row.materials = count;
        row.tasks = result.metrics.tasks.size();
        row.makespan = result.metrics.makespan;
        row.utilization = result.metrics.utilization;
        rows.push_back(row);
    }
    return rows;
}

std::vector<StrongRow> bench_strong(const BenchConfig& config) {
    check_node_counts(config);
    if (config.total_mofs == 0) throw DomainError("bench-strong: total_mofs unset");
    if (config.mofs_per_node != 0) {
        throw DomainError("bench-strong: mofs_per_node must be unset for strong scaling");
    }
    const std::vector<MaterialRecord> catalog = make_synthetic_catalog(config.total_mofs);
    const std::string query = awh_prompt(config.cycles);

    std::vector<StrongRow> rows;
    double baseline_makespan = 0.0;
    for (int nodes : config.node_counts) {
        const std::string run_dir =
            config.output_dir + "/strong-n" + std::to_string(nodes);
        const CampaignResult result =
            run_campaign(query, campaign_config_for(config, nodes, catalog, run_dir));
        StrongRow row;
        row.nodes = nodes;
        row.tasks = result.metrics.tasks.size();
        row.makespan = result.metrics.makespan;
        if (rows.empty()) baseline_makespan = row.makespan;
        row.speedup = baseline_makespan / row.makespan;
        row.efficiency = scaling_efficiency(config.node_counts.front(), baseline_makespan,
                                            nodes, row.makespan);
        rows.push_back(row);
    }
    return rows;
}

ReliabilityResult bench_reliability(const BenchConfig& config) {
    if (config.trials < 1) throw DomainError("bench-reliability: trials must be >= 1");
    const std::string query = awh_prompt(config.cycles);

    ReliabilityResult result;
    result.invalid_args_rate = config.invalid_args_rate;
    result.max_attempts = config.max_attempts;
    result.trials = config.trials;
    for (int trial = 1; trial <= config.trials; ++trial) {
        CampaignConfig cc;
        // Pre-mix the master seed so nearby (seed, trial) pairs do not
        // alias to overlapping draw sets.
        cc.seed = hash_combine(splitmix64_mix(config.seed),
                               static_cast<std::uint64_t>(trial));
        cc.mode = ClockMode::Virtual;
        cc.pool = ResourcePool{1, config.slots_per_node};
        cc.chunk_size = config.reliability_mofs;
        cc.synthetic_count = config.reliability_mofs;
        cc.invalid_args_rate = config.invalid_args_rate;
        cc.output_dir = config.output_dir + "/reliability-t" + std::to_string(trial);
        const RestartOutcome outcome = run_with_restarts(query, cc, config.max_attempts);
        if (outcome.success) ++result.successes;
    }
    result.fraction = static_cast<double>(result.successes) /
                      static_cast<double>(result.trials);
    const double sigma = std::sqrt(result.fraction * (1.0 - result.fraction) /
                                   static_cast<double>(result.trials));
    result.ci_low = std::max(0.0, result.fraction - 3.0 * sigma);
    result.ci_high = std::min(1.0, result.fraction + 3.0 * sigma);
    return result;
}

void write_weak_csv(std::ostream& os, const std::vector<WeakRow>& rows) {
    os << "nodes,materials,tasks,makespan_s,utilization\n";
    for (const auto& r : rows) {
        os << r.nodes << ',' << r.materials << ',' << r.tasks << ',' << r.makespan
           << ',' << r.utilization << '\n';
    }
}

void write_strong_csv(std::ostream& os, const std::vector<StrongRow>& rows) {
    os << "nodes,tasks,makespan_s,speedup,efficiency\n";
    for (const auto& r : rows) {
        os << r.nodes << ',' << r.tasks << ',' << r.makespan << ',' << r.speedup << ','
           << r.efficiency << '\n';
    }
}

void write_reliability_csv(std::ostream& os, const ReliabilityResult& result) {
    os << "invalid_args_rate,max_attempts,trials,successes,fraction,ci_low,ci_high\n";
    os << result.invalid_args_rate << ',' << result.max_attempts << ',' << result.trials
       << ',' << result.successes << ',' << result.fraction << ',' << result.ci_low
       << ',' << result.ci_high << '\n';
}

} // namespace mofflow
