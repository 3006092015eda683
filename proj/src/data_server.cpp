#include "mofflow/data_server.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>

#include "mofflow/domain.hpp"
#include "mofflow/errors.hpp"

namespace mofflow {

DataServer::DataServer() : server_("data-tool") {
    server_.register_tool(
        ToolDescriptor{
            "aggregate_and_rank",
            "Join JSONL simulation results by material, compute working "
            "capacities between the two pressures (desorption omitted: "
            "rank by plain uptake), and return the top fraction.",
            {{"type", "object"},
             {"properties",
              {{"result_paths",
                {{"type", "array"}, {"items", {{"type", "string"}}}, {"minItems", 1}}},
               {"adsorption_pressure", {{"type", "number"}}},
               {"desorption_pressure", {{"type", "number"}}},
               {"fraction", {{"type", "number"}}}}},
             {"required", {"result_paths", "adsorption_pressure", "fraction"}}}},
        [this](const json& args) { return tool_aggregate_and_rank(args); });
}

json DataServer::tool_aggregate_and_rank(const json& args) {
    const double ads_p = args.at("adsorption_pressure").get<double>();
    std::optional<double> des_p;
    if (args.contains("desorption_pressure") && !args.at("desorption_pressure").is_null()) {
        des_p = args.at("desorption_pressure").get<double>();
    }
    const double fraction = args.at("fraction").get<double>();
    if (!(fraction > 0.0 && fraction <= 1.0)) {
        throw ToolError("fraction must lie in (0,1]");
    }

    struct Legs {
        std::optional<double> ads;
        std::optional<double> des;
    };
    std::map<std::string, Legs> by_material;

    for (const auto& path_json : args.at("result_paths")) {
        const std::string path = path_json.get<std::string>();
        std::ifstream is(path);
        if (!is) throw ToolError("cannot read result file: " + path);
        std::string line;
        while (std::getline(is, line)) {
            if (line.empty()) continue;
            json rec;
            try {
                rec = json::parse(line);
            } catch (const json::parse_error&) {
                throw ToolError("malformed JSONL line in " + path);
            }
            if (rec.value("status", "") != "ok") continue;
            const double p = rec.at("pressure_pa").get<double>();
            const double uptake = rec.at("uptake_mol_per_kg").get<double>();
            Legs& legs = by_material[rec.at("material_id").get<std::string>()];
            if (p == ads_p && !legs.ads) legs.ads = uptake;
            if (des_p && p == *des_p && !legs.des) legs.des = uptake;
        }
    }

    std::vector<WorkingCapacityRecord> complete;
    json incomplete = json::array();
    for (const auto& [id, legs] : by_material) {
        const bool need_des = des_p.has_value();
        if (!legs.ads || (need_des && !legs.des)) {
            json missing = json::array();
            if (!legs.ads) missing.push_back("adsorption");
            if (need_des && !legs.des) missing.push_back("desorption");
            incomplete.push_back({{"material_id", id}, {"missing", missing}});
            continue;
        }
        WorkingCapacityRecord rec;
        rec.material_id = id;
        rec.uptake_adsorption = *legs.ads;
        rec.uptake_desorption = need_des ? *legs.des : 0.0;
        rec.working_capacity = working_capacity(rec.uptake_adsorption, rec.uptake_desorption);
        complete.push_back(std::move(rec));
    }

    json out;
    out["incomplete"] = incomplete;
    if (complete.empty()) {
        out["selected"] = json::array();
        out["cutoff_value"] = nullptr;
        out["fraction"] = fraction;
        out["population_size"] = 0;
        out["stats"] = nullptr;
        return out;
    }

    const RankingResult ranking = rank_top_fraction(complete, fraction);
    json selected = json::array();
    for (const auto& rec : ranking.selected) {
        selected.push_back({{"material_id", rec.material_id},
                            {"uptake_adsorption", rec.uptake_adsorption},
                            {"uptake_desorption", rec.uptake_desorption},
                            {"working_capacity", rec.working_capacity}});
    }
    out["selected"] = std::move(selected);
    out["cutoff_value"] = ranking.cutoff_value;
    out["fraction"] = ranking.fraction;
    out["population_size"] = ranking.population_size;

    std::vector<double> values;
    values.reserve(complete.size());
    for (const auto& rec : complete) values.push_back(rec.working_capacity);
    std::sort(values.begin(), values.end());
    double sum = 0.0;
    for (double v : values) sum += v;
    // 80th percentile as the value at ceil(0.8 N) in ascending order, the
    // same rounding rule the ranking uses.
    const auto p80_index = static_cast<std::size_t>(
        std::ceil(0.8 * static_cast<double>(values.size())));
    out["stats"] = {{"min", values.front()},
                    {"max", values.back()},
                    {"mean", sum / static_cast<double>(values.size())},
                    {"p80", values[std::min(p80_index, values.size()) - 1]}};
    return out;
}

} // namespace mofflow
