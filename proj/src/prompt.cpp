#include "mofflow/prompt.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <regex>
#include <sstream>

#include "mofflow/errors.hpp"
#include "mofflow/hash.hpp"

namespace mofflow {

std::vector<Condition> Objective::conditions(std::uint64_t cycles) const {
    std::vector<Condition> out;
    Condition ads{species, temperature_k, adsorption_pressure_pa, cycles};
    ads.validate();
    out.push_back(ads);
    if (desorption_pressure_pa) {
        Condition des{species, temperature_k, *desorption_pressure_pa, cycles};
        des.validate();
        out.push_back(des);
    }
    return out;
}

nlohmann::json CampaignPlan::to_json() const {
    nlohmann::json objs = nlohmann::json::array();
    for (const auto& o : objectives) {
        nlohmann::json j = {{"label", o.label},
                            {"species", to_string(o.species)},
                            {"temperature_k", o.temperature_k},
                            {"adsorption_pressure_pa", o.adsorption_pressure_pa},
                            {"fraction", o.fraction}};
        if (o.desorption_pressure_pa) {
            j["desorption_pressure_pa"] = *o.desorption_pressure_pa;
        }
        objs.push_back(std::move(j));
    }
    nlohmann::json parts = nlohmann::json::array();
    for (const auto& p : partitions) {
        parts.push_back({{"executor_index", p.executor_index},
                         {"objective_index", p.objective_index},
                         {"structure_ids", p.structure_ids}});
    }
    return {{"objectives", objs},
            {"database_path", database_path},
            {"cycles", cycles},
            {"partitions", parts}};
}

CampaignPlan CampaignPlan::from_json(const nlohmann::json& j) {
    CampaignPlan plan;
    plan.database_path = j.at("database_path").get<std::string>();
    plan.cycles = j.at("cycles").get<std::uint64_t>();
    for (const auto& o : j.at("objectives")) {
        Objective obj;
        obj.label = o.at("label").get<std::string>();
        obj.species = species_from_string(o.at("species").get<std::string>());
        obj.temperature_k = o.at("temperature_k").get<double>();
        obj.adsorption_pressure_pa = o.at("adsorption_pressure_pa").get<double>();
        if (o.contains("desorption_pressure_pa")) {
            obj.desorption_pressure_pa = o.at("desorption_pressure_pa").get<double>();
        }
        obj.fraction = o.at("fraction").get<double>();
        plan.objectives.push_back(std::move(obj));
    }
    if (j.contains("partitions")) {
        for (const auto& p : j.at("partitions")) {
            PartitionAssignment pa;
            pa.executor_index = p.at("executor_index").get<int>();
            pa.objective_index = p.at("objective_index").get<std::size_t>();
            pa.structure_ids = p.at("structure_ids").get<std::vector<std::string>>();
            plan.partitions.push_back(std::move(pa));
        }
    }
    return plan;
}

namespace {

// "2,000,000" -> 2000000
double parse_number(std::string s) {
    s.erase(std::remove(s.begin(), s.end(), ','), s.end());
    return std::stod(s);
}

std::optional<double> find_value(const std::string& text, const std::regex& re,
                                 int group = 1) {
    std::smatch m;
    if (std::regex_search(text, m, re)) return parse_number(m[group].str());
    return std::nullopt;
}

std::string normalize(const std::string& text) {
    // Strip the LaTeX-ish subscripts so "CO$_2$" and "CO2" parse alike.
    std::string out;
    out.reserve(text.size());
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (c == '$' || c == '_' || c == '\\') continue;
        out.push_back(c);
    }
    return out;
}

} // namespace

CampaignPlan parse_campaign_prompt(const std::string& raw_text) {
    const std::string text = normalize(raw_text);
    CampaignPlan plan;

    static const std::regex re_num(R"(([0-9][0-9,]*(?:\.[0-9]+)?))");
    static const std::regex re_path(R"(located at:\s*(\S+))", std::regex::icase);
    static const std::regex re_temp(R"(Temperature:\s*([0-9,.]+)\s*K)", std::regex::icase);
    static const std::regex re_psat(R"(Saturation Pressure[^:]*:\s*([0-9,.]+)\s*Pa)",
                                    std::regex::icase);
    static const std::regex re_ads(R"(Adsorption condition:\s*([0-9,.]+)\s*%)",
                                   std::regex::icase);
    static const std::regex re_des(R"(Desorption condition:\s*([0-9,.]+)\s*%)",
                                   std::regex::icase);
    static const std::regex re_cycles(R"(Duration:\s*([0-9,]+))", std::regex::icase);
    static const std::regex re_top(R"(top\s*([0-9,.]+)\s*%)", std::regex::icase);
    static const std::regex re_objective(
        R"((Water|CO2|N2|H2O)\s+adsorption\s+at\s+([0-9,.]+)\s*(%\s*RH|bar|kPa|Pa)\s*,?\s*([0-9,.]+)\s*K)",
        std::regex::icase);

    std::smatch m;
    if (std::regex_search(text, m, re_path)) plan.database_path = m[1].str();

    const auto temperature = find_value(text, re_temp);
    const auto psat = find_value(text, re_psat);
    const auto cycles = find_value(text, re_cycles);
    const auto fraction_pct = find_value(text, re_top);
    const double fraction = fraction_pct ? *fraction_pct / 100.0 : 0.2;

    if (!cycles) throw ParseError("prompt missing required parameter: cycles (Duration)");
    plan.cycles = static_cast<std::uint64_t>(std::llround(*cycles));

    // Multi-objective form: explicit "<species> adsorption at ..." lines.
    auto begin = std::sregex_iterator(text.begin(), text.end(), re_objective);
    auto end = std::sregex_iterator();
    std::vector<std::string> used_labels;
    for (auto it = begin; it != end; ++it) {
        const std::smatch& om = *it;
        Objective obj;
        std::string species_name = om[1].str();
        std::transform(species_name.begin(), species_name.end(), species_name.begin(),
                       [](unsigned char c) { return std::tolower(c); });
        obj.species = species_from_string(species_name);
        obj.temperature_k = parse_number(om[4].str());
        const double value = parse_number(om[2].str());
        std::string unit = om[3].str();
        std::transform(unit.begin(), unit.end(), unit.begin(),
                       [](unsigned char c) { return std::tolower(c); });
        if (unit.find('%') != std::string::npos) {
            if (!psat) {
                throw ParseError(
                    "prompt missing required parameter: saturation pressure "
                    "(needed for RH conditions)");
            }
            obj.adsorption_pressure_pa = rh_to_pressure(value / 100.0, *psat);
        } else if (unit == "bar") {
            obj.adsorption_pressure_pa = value * 1e5; // 1 bar = 10^5 Pa exactly
        } else if (unit == "kpa") {
            obj.adsorption_pressure_pa = value * 1e3;
        } else {
            obj.adsorption_pressure_pa = value;
        }
        obj.fraction = fraction;
        obj.label = to_string(obj.species);
        if (std::count(used_labels.begin(), used_labels.end(), obj.label) > 0) {
            obj.label += "-" + std::to_string(used_labels.size() + 1);
        }
        used_labels.push_back(obj.label);
        plan.objectives.push_back(std::move(obj));
    }

    if (plan.objectives.empty()) {
        // Single-objective working-capacity form (adsorption + desorption RH).
        if (!temperature) throw ParseError("prompt missing required parameter: temperature");
        if (!psat) {
            throw ParseError("prompt missing required parameter: saturation pressure");
        }
        const auto rh_ads = find_value(text, re_ads);
        const auto rh_des = find_value(text, re_des);
        if (!rh_ads) {
            throw ParseError("prompt missing required parameter: adsorption condition");
        }
        if (!rh_des) {
            throw ParseError("prompt missing required parameter: desorption condition");
        }
        Objective obj;
        obj.label = "water";
        obj.species = Species::Water;
        obj.temperature_k = *temperature;
        obj.adsorption_pressure_pa = rh_to_pressure(*rh_ads / 100.0, *psat);
        obj.desorption_pressure_pa = rh_to_pressure(*rh_des / 100.0, *psat);
        obj.fraction = fraction;
        plan.objectives.push_back(std::move(obj));
    }
    return plan;
}

void plan_partitions(CampaignPlan& plan, const std::vector<MaterialRecord>& catalog,
                     std::size_t chunk_size) {
    if (catalog.empty()) throw DomainError("plan_partitions: empty catalog");
    if (chunk_size < 1) throw DomainError("plan_partitions: chunk_size must be >= 1");

    std::vector<std::string> ids;
    ids.reserve(catalog.size());
    for (const auto& rec : catalog) ids.push_back(rec.id);
    std::sort(ids.begin(), ids.end());

    plan.partitions.clear();
    int executor = 0;
    for (std::size_t obj = 0; obj < plan.objectives.size(); ++obj) {
        for (std::size_t offset = 0; offset < ids.size(); offset += chunk_size) {
            PartitionAssignment pa;
            pa.executor_index = executor++;
            pa.objective_index = obj;
            const std::size_t count = std::min(chunk_size, ids.size() - offset);
            pa.structure_ids.assign(ids.begin() + static_cast<std::ptrdiff_t>(offset),
                                    ids.begin() + static_cast<std::ptrdiff_t>(offset + count));
            plan.partitions.push_back(std::move(pa));
        }
    }
}

Sampling sampling_from_string(const std::string& s) {
    if (s == "random") return Sampling::Random;
    if (s == "nested") return Sampling::Nested;
    throw DomainError("unknown sampling strategy: " + s);
}

std::string to_string(Sampling s) {
    return s == Sampling::Random ? "random" : "nested";
}

std::vector<MaterialRecord> select_materials(const std::vector<MaterialRecord>& catalog,
                                             std::size_t count, Sampling sampling,
                                             std::uint64_t seed, std::uint64_t scale_tag) {
    if (count > catalog.size()) {
        throw DomainError("select_materials: count exceeds catalog size");
    }
    std::vector<MaterialRecord> pool = catalog;
    std::sort(pool.begin(), pool.end(),
              [](const MaterialRecord& a, const MaterialRecord& b) { return a.id < b.id; });

    const std::uint64_t mix_seed = sampling == Sampling::Nested
                                       ? seed
                                       : hash_combine(splitmix64_mix(seed), scale_tag);
    SplitMix rng(mix_seed);
    // Fisher-Yates with our own stream, not std::shuffle, so the
    // permutation is identical on every platform.
    for (std::size_t i = pool.size() - 1; i > 0; --i) {
        const std::size_t j = static_cast<std::size_t>(rng.next() % (i + 1));
        std::swap(pool[i], pool[j]);
    }
    pool.resize(count);
    std::sort(pool.begin(), pool.end(),
              [](const MaterialRecord& a, const MaterialRecord& b) { return a.id < b.id; });
    return pool;
}

} // namespace mofflow
