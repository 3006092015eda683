#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace mofflow {

enum class Species { Water, CO2, N2 };

std::string to_string(Species s);
Species species_from_string(const std::string& name);
std::uint64_t species_tag(Species s);

// One screened structure. Geometry is opaque; all surrogate physics is
// driven by the deterministic seed.
struct MaterialRecord {
    std::string id;
    std::string source_path;
    std::uint64_t seed = 0;
};

struct Condition {
    Species species = Species::Water;
    double temperature_k = 0.0;
    double pressure_pa = 0.0;
    std::uint64_t cycles = 1;

    void validate() const; // throws DomainError
    // Canonical label, e.g. "water_298K_1920Pa". Stable across runs; used
    // as the join key in result aggregation.
    std::string label() const;
};

struct WorkingCapacityRecord {
    std::string material_id;
    double uptake_adsorption = 0.0;
    double uptake_desorption = 0.0;
    double working_capacity = 0.0;
};

struct RankingResult {
    std::vector<WorkingCapacityRecord> selected; // descending, ties by id asc
    double cutoff_value = 0.0;
    double fraction = 0.0;
    std::size_t population_size = 0;
};

// Directory scan, extension-filtered, id = file stem, sorted by id.
// seed = FNV-1a of id. Throws IngestError on missing path or empty result.
std::vector<MaterialRecord> scan_database(const std::string& path,
                                          const std::string& extension = ".cif");

// In-memory catalog with ids "mof-000001"... for data-free experiments.
std::vector<MaterialRecord> make_synthetic_catalog(std::size_t count);

// relative_humidity in [0,1], saturation_pressure > 0.
double rh_to_pressure(double relative_humidity, double saturation_pressure);

double working_capacity(double uptake_adsorption, double uptake_desorption);

RankingResult rank_top_fraction(const std::vector<WorkingCapacityRecord>& records,
                                double fraction);

} // namespace mofflow
