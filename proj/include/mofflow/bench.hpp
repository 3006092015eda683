#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "mofflow/campaign.hpp"

namespace mofflow {

struct BenchConfig {
    std::vector<int> node_counts;
    std::size_t mofs_per_node = 0; // weak scaling
    std::size_t total_mofs = 0;    // strong scaling
    std::uint64_t cycles = 2'000'000;
    Sampling sampling = Sampling::Random;
    std::uint64_t seed = 42;
    int slots_per_node = 12;
    std::size_t chunk_size = 1152;
    double invalid_args_rate = 0.0;
    int trials = 25;
    int max_attempts = 1;
    std::size_t reliability_mofs = 8; // catalog size per reliability trial
    std::string output_dir = "bench-out";
};

struct WeakRow {
    int nodes = 0;
    std::size_t materials = 0;
    std::size_t tasks = 0;
    double makespan = 0.0;
    double utilization = 0.0;
};

struct StrongRow {
    int nodes = 0;
    std::size_t tasks = 0;
    double makespan = 0.0;
    double speedup = 0.0;
    double efficiency = 0.0;
};

struct ReliabilityResult {
    double invalid_args_rate = 0.0;
    int max_attempts = 1;
    int trials = 0;
    int successes = 0;
    double fraction = 0.0;
    double ci_low = 0.0; // binomial normal-approx 3 sigma
    double ci_high = 0.0;
};

// The structured water-harvesting campaign prompt at the given cycle count.
std::string awh_prompt(std::uint64_t cycles);
// The three-objective screening prompt (water / CO2 / N2).
std::string multi_objective_prompt(std::uint64_t cycles);

// Fixed 9-MOFs-per-node workload swept over node_counts, virtual time.
std::vector<WeakRow> bench_weak(const BenchConfig& config);

// Fixed total workload swept over node_counts; efficiency against the
// smallest node count.
std::vector<StrongRow> bench_strong(const BenchConfig& config);

// Independent seeded campaigns through the restart policy.
ReliabilityResult bench_reliability(const BenchConfig& config);

void write_weak_csv(std::ostream& os, const std::vector<WeakRow>& rows);
void write_strong_csv(std::ostream& os, const std::vector<StrongRow>& rows);
void write_reliability_csv(std::ostream& os, const ReliabilityResult& result);

} // namespace mofflow
