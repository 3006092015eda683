#include "mofflow/surrogate.hpp"

#include <cmath>

#include "mofflow/errors.hpp"
#include "mofflow/hash.hpp"

namespace mofflow {

namespace {
// Stream separators so duration and failure draws never alias.
const std::uint64_t kDurationTag = fnv1a64("duration");
const std::uint64_t kFailureTag = fnv1a64("failure");
} // namespace

std::uint64_t make_run_seed(std::uint64_t material_seed, const Condition& condition,
                            std::uint64_t campaign_seed) {
    std::uint64_t h = splitmix64_mix(material_seed ^ campaign_seed);
    h = hash_combine(h, species_tag(condition.species));
    h = hash_combine(h, double_bits(condition.temperature_k));
    h = hash_combine(h, double_bits(condition.pressure_pa));
    h = hash_combine(h, condition.cycles);
    return h;
}

SimulationSpec make_spec(const MaterialRecord& material, const Condition& condition,
                         std::uint64_t campaign_seed) {
    return SimulationSpec{material, condition,
                          make_run_seed(material.seed, condition, campaign_seed)};
}

SurrogateParams derive_params(const MaterialRecord& material, Species species,
                              double temperature_k) {
    if (!(temperature_k > 0.0)) throw DomainError("temperature must be > 0 K");
    // Quantize T to millikelvin so equality of conditions means equality of seeds.
    const auto t_mk = static_cast<std::uint64_t>(std::llround(temperature_k * 1000.0));
    SplitMix rng(material.seed ^ species_tag(species) ^ t_mk);
    const double u1 = rng.uniform();
    const double u2 = rng.uniform();
    SurrogateParams p;
    // Square of a uniform variate: most materials land at low capacity,
    // with a long high tail.
    p.q_sat = 0.05 + (12.0 - 0.05) * u1 * u1;
    p.k_affinity = std::pow(10.0, -6.0 + 5.0 * u2);
    return p;
}

double uptake(const SurrogateParams& params, double pressure_pa) {
    if (pressure_pa < 0.0) throw DomainError("pressure must be >= 0");
    const double kp = params.k_affinity * pressure_pa;
    return params.q_sat * kp / (1.0 + kp);
}

double sample_duration(const SimulationSpec& spec, std::uint64_t cycles) {
    if (cycles < 1) throw DomainError("cycles must be >= 1");
    SplitMix rng(spec.run_seed ^ kDurationTag);
    const double base = kDurationMinS + (kDurationMaxS - kDurationMinS) * rng.uniform();
    return base * static_cast<double>(cycles) / static_cast<double>(kReferenceCycles);
}

SimulationOutcome execute(const SimulationSpec& spec, double failure_rate) {
    if (!(failure_rate >= 0.0 && failure_rate < 1.0)) {
        throw DomainError("failure_rate must lie in [0,1)");
    }
    SimulationOutcome out;
    out.material_id = spec.material.id;
    out.condition = spec.condition;
    out.duration_s = sample_duration(spec, spec.condition.cycles);

    SplitMix rng(spec.run_seed ^ kFailureTag);
    if (rng.uniform() < failure_rate) {
        out.status = RunStatus::Failed;
        return out;
    }
    const SurrogateParams params =
        derive_params(spec.material, spec.condition.species, spec.condition.temperature_k);
    out.uptake_mol_per_kg = uptake(params, spec.condition.pressure_pa);
    out.status = RunStatus::Ok;
    return out;
}

} // namespace mofflow
