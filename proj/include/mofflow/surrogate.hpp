#pragma once

#include <cstdint>
#include <string>

#include "mofflow/domain.hpp"

namespace mofflow {

enum class RunStatus { Ok, Failed };

// One surrogate GCMC run request. run_seed is a pure function of
// (material.seed, condition fields, campaign seed); see make_run_seed.
struct SimulationSpec {
    MaterialRecord material;
    Condition condition;
    std::uint64_t run_seed = 0;
};

struct SimulationOutcome {
    std::string material_id;
    Condition condition;
    double uptake_mol_per_kg = 0.0;
    double duration_s = 0.0;
    RunStatus status = RunStatus::Ok;
};

// Langmuir parameters derived deterministically from the material seed.
// q_sat in [0.05, 12.0] mol/kg (right-skewed), k_affinity log-uniform in
// [1e-6, 1e-1] 1/Pa.
struct SurrogateParams {
    double q_sat = 0.0;
    double k_affinity = 0.0;
};

std::uint64_t make_run_seed(std::uint64_t material_seed, const Condition& condition,
                            std::uint64_t campaign_seed);

SimulationSpec make_spec(const MaterialRecord& material, const Condition& condition,
                         std::uint64_t campaign_seed);

SurrogateParams derive_params(const MaterialRecord& material, Species species,
                              double temperature_k);

// q_sat * kP / (1 + kP). Throws DomainError for negative pressure.
double uptake(const SurrogateParams& params, double pressure_pa);

// Uniform on [1600, 4400] s at the 2,000,000-cycle reference, scaled
// linearly by cycles.
double sample_duration(const SimulationSpec& spec, std::uint64_t cycles);

inline constexpr std::uint64_t kReferenceCycles = 2'000'000;
inline constexpr double kDurationMinS = 1600.0;
inline constexpr double kDurationMaxS = 4400.0;

SimulationOutcome execute(const SimulationSpec& spec, double failure_rate);

} // namespace mofflow
