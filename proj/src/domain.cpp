#include "mofflow/domain.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>

#include "mofflow/errors.hpp"
#include "mofflow/hash.hpp"

namespace fs = std::filesystem;

namespace mofflow {

std::string to_string(Species s) {
    switch (s) {
        case Species::Water: return "water";
        case Species::CO2: return "co2";
        case Species::N2: return "n2";
    }
    return "unknown";
}

Species species_from_string(const std::string& name) {
    if (name == "water" || name == "h2o") return Species::Water;
    if (name == "co2") return Species::CO2;
    if (name == "n2") return Species::N2;
    throw DomainError("unknown species: " + name);
}

std::uint64_t species_tag(Species s) {
    // FNV of the canonical name, computed once.
    static const std::uint64_t tags[3] = {fnv1a64("water"), fnv1a64("co2"), fnv1a64("n2")};
    return tags[static_cast<int>(s)];
}

namespace {

std::string fmt_compact(double v) {
    if (std::isfinite(v) && v == std::floor(v) && std::fabs(v) < 1e15) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.0f", v);
        return buf;
    }
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

} // namespace

void Condition::validate() const {
    if (!(temperature_k > 0.0)) throw DomainError("temperature must be > 0 K");
    if (!(pressure_pa >= 0.0)) throw DomainError("pressure must be >= 0 Pa");
    if (cycles < 1) throw DomainError("cycles must be >= 1");
}

std::string Condition::label() const {
    return to_string(species) + "_" + fmt_compact(temperature_k) + "K_" +
           fmt_compact(pressure_pa) + "Pa";
}

std::vector<MaterialRecord> scan_database(const std::string& path,
                                          const std::string& extension) {
    std::error_code ec;
    if (!fs::is_directory(path, ec)) {
        throw IngestError("database path missing or unreadable: " + path);
    }
    std::vector<MaterialRecord> out;
    for (const auto& entry : fs::directory_iterator(path, ec)) {
        if (!entry.is_regular_file()) continue;
        const fs::path& p = entry.path();
        if (p.extension() != extension) continue;
        MaterialRecord rec;
        rec.id = p.stem().string();
        rec.source_path = p.string();
        rec.seed = fnv1a64(rec.id);
        out.push_back(std::move(rec));
    }
    if (ec) throw IngestError("failed reading database directory: " + ec.message());
    if (out.empty()) throw IngestError("empty database: no *" + extension + " files in " + path);
    std::sort(out.begin(), out.end(),
              [](const MaterialRecord& a, const MaterialRecord& b) { return a.id < b.id; });
    return out;
}

std::vector<MaterialRecord> make_synthetic_catalog(std::size_t count) {
    std::vector<MaterialRecord> out;
    out.reserve(count);
    for (std::size_t i = 1; i <= count; ++i) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "mof-%06zu", i);
        MaterialRecord rec;
        rec.id = buf;
        rec.source_path = "synthetic://" + rec.id;
        rec.seed = fnv1a64(rec.id);
        out.push_back(std::move(rec));
    }
    return out;
}

double rh_to_pressure(double relative_humidity, double saturation_pressure) {
    if (!(relative_humidity >= 0.0 && relative_humidity <= 1.0)) {
        throw DomainError("relative humidity must lie in [0,1]");
    }
    if (!(saturation_pressure > 0.0)) {
        throw DomainError("saturation pressure must be > 0");
    }
    return relative_humidity * saturation_pressure;
}

double working_capacity(double uptake_adsorption, double uptake_desorption) {
    if (!std::isfinite(uptake_adsorption) || !std::isfinite(uptake_desorption)) {
        throw DomainError("non-finite uptake");
    }
    return uptake_adsorption - uptake_desorption;
}

RankingResult rank_top_fraction(const std::vector<WorkingCapacityRecord>& records,
                                double fraction) {
    if (records.empty()) throw DomainError("rank_top_fraction: empty record set");
    if (!(fraction > 0.0 && fraction <= 1.0)) {
        throw DomainError("fraction must lie in (0,1]");
    }
    RankingResult result;
    result.fraction = fraction;
    result.population_size = records.size();

    std::vector<WorkingCapacityRecord> sorted = records;
    std::sort(sorted.begin(), sorted.end(),
              [](const WorkingCapacityRecord& a, const WorkingCapacityRecord& b) {
                  if (a.working_capacity != b.working_capacity)
                      return a.working_capacity > b.working_capacity;
                  return a.material_id < b.material_id;
              });

    const auto count = static_cast<std::size_t>(
        std::ceil(fraction * static_cast<double>(records.size())));
    sorted.resize(std::min(count, sorted.size()));
    result.cutoff_value = sorted.back().working_capacity;
    result.selected = std::move(sorted);
    return result;
}

} // namespace mofflow
