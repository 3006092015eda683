#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mofflow/domain.hpp"

namespace mofflow {

struct Objective {
    std::string label;
    Species species = Species::Water;
    double temperature_k = 0.0;
    double adsorption_pressure_pa = 0.0;
    std::optional<double> desorption_pressure_pa; // absent: rank by plain uptake
    double fraction = 0.2;

    std::vector<Condition> conditions(std::uint64_t cycles) const;
};

struct PartitionAssignment {
    int executor_index = 0;
    std::size_t objective_index = 0;
    std::vector<std::string> structure_ids;
};

// Planner output. Partitions are filled in by plan_partitions.
struct CampaignPlan {
    std::vector<Objective> objectives;
    std::string database_path;
    std::uint64_t cycles = 1;
    std::vector<PartitionAssignment> partitions;

    nlohmann::json to_json() const;
    static CampaignPlan from_json(const nlohmann::json& j);
};

// Parses the structured campaign prompt (Role / Data Source / Objective /
// Simulation Parameters). Serves as the scripted planner's decision rule
// and as the validator for model-produced plans. Throws ParseError
// naming the missing field.
CampaignPlan parse_campaign_prompt(const std::string& text);

// Contiguous chunks of size chunk_size over the id-sorted catalog, one
// partition set per objective; executor indices are global.
void plan_partitions(CampaignPlan& plan, const std::vector<MaterialRecord>& catalog,
                     std::size_t chunk_size);

enum class Sampling { Random, Nested };

Sampling sampling_from_string(const std::string& s);
std::string to_string(Sampling s);

// Selects `count` materials from the catalog. Nested sampling uses a
// permutation fixed by the seed alone, so smaller selections are subsets
// of larger ones; random sampling folds `scale_tag` into the seed.
std::vector<MaterialRecord> select_materials(const std::vector<MaterialRecord>& catalog,
                                             std::size_t count, Sampling sampling,
                                             std::uint64_t seed, std::uint64_t scale_tag);

} // namespace mofflow
