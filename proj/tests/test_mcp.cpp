#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "mofflow/chemistry_server.hpp"
#include "mofflow/data_server.hpp"
#include "mofflow/engine.hpp"
#include "mofflow/errors.hpp"
#include "mofflow/hash.hpp"
#include "mofflow/transport.hpp"

using namespace mofflow;
namespace fs = std::filesystem;

namespace {

fs::path make_temp_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

json call(McpServer& server, const json& id, const std::string& tool, const json& args) {
    return server.handle_request(make_tool_call(id, tool, args));
}

// Unwraps a successful tools/call response down to structuredContent.
json result_of(const json& response) {
    REQUIRE(response.contains("result"));
    const json& result = response.at("result");
    CHECK(result.at("isError") == false);
    CHECK(result.at("content").at(0).at("type") == "text");
    return result.at("structuredContent");
}

json water_condition(double pressure_pa) {
    return {{"species", "water"}, {"temperature_k", 298.0}, {"pressure_pa", pressure_pa}};
}

} // namespace

TEST_CASE("initialize and tools/list") {
    DataServer data;
    const json init = data.server().handle_request(
        make_rpc_request(1, "initialize", json::object()));
    CHECK(init.at("jsonrpc") == "2.0");
    CHECK(init.at("id") == 1);
    CHECK(init.at("result").at("serverInfo").at("name") == "data-tool");

    const json listing = data.server().handle_request(
        make_rpc_request(7, "tools/list", json::object()));
    CHECK(listing.at("id") == 7); // id echoed verbatim
    const auto& tools = listing.at("result").at("tools");
    REQUIRE(tools.size() == 1);
    CHECK(tools.at(0).at("name") == "aggregate_and_rank");
    CHECK(tools.at(0).contains("inputSchema"));
}

TEST_CASE("protocol error codes") {
    DataServer data;
    McpServer& server = data.server();

    const json unknown = server.handle_request(
        make_rpc_request(2, "tools/nope", json::object()));
    CHECK(unknown.at("error").at("code") == kMethodNotFound);

    const auto parse = server.handle_line("{not json");
    REQUIRE(parse.has_value());
    const json parsed = json::parse(*parse);
    CHECK(parsed.at("error").at("code") == kParseError);
    CHECK(parsed.at("id").is_null());

    // Schema violation: result_paths must be a non-empty array.
    const json invalid = call(server, 3, "aggregate_and_rank",
                              {{"result_paths", json::array()},
                               {"adsorption_pressure", 1920.0},
                               {"fraction", 0.2}});
    CHECK(invalid.at("error").at("code") == kInvalidParams);

    const json missing = call(server, 4, "aggregate_and_rank",
                              {{"adsorption_pressure", 1920.0}, {"fraction", 0.2}});
    CHECK(missing.at("error").at("code") == kInvalidParams);

    const json no_tool = server.handle_request(
        make_tool_call(5, "no_such_tool", json::object()));
    CHECK(no_tool.at("error").at("code") == kInvalidParams);

    // Notifications (no id) produce no frame.
    json note = make_rpc_request(0, "tools/list", json::object());
    note.erase("id");
    CHECK_FALSE(server.handle_line(note.dump()).has_value());
}

TEST_CASE("schema validator subset") {
    const json schema = {{"type", "object"},
                         {"properties",
                          {{"ids",
                            {{"type", "array"},
                             {"items", {{"type", "string"}}},
                             {"minItems", 1}}},
                           {"n", {{"type", "integer"}}}}},
                         {"required", {"ids"}}};
    CHECK_FALSE(validate_schema(schema, {{"ids", {"a"}}, {"n", 3}}).has_value());
    CHECK(validate_schema(schema, {{"n", 3}}).has_value());               // missing required
    CHECK(validate_schema(schema, {{"ids", {"a"}}, {"n", 3.5}}).has_value()); // not integer
    CHECK(validate_schema(schema, {{"ids", {1}}}).has_value());           // wrong item type
    CHECK(validate_schema(schema, {{"ids", json::array()}}).has_value()); // minItems
    CHECK(validate_schema(schema, json::array()).has_value());            // not an object
}

TEST_CASE("chemistry server: submit, poll, collect") {
    const fs::path dir = make_temp_dir("mofflow-chem");
    TaskEngine engine({ResourcePool{1, 12}, ClockMode::Virtual});
    ChemistryServer chem(make_synthetic_catalog(9), engine,
                         {0.0, 42, dir.string()});
    McpServer& server = chem.server();

    json ids = json::array();
    for (int i = 1; i <= 9; ++i) {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "mof-%06d", i);
        ids.push_back(buf);
    }
    const json submit_args = {{"structure_ids", ids},
                              {"conditions", {water_condition(1920.0), water_condition(320.0)}},
                              {"cycles", 2'000'000}};
    const json submitted = result_of(call(server, 1, "run_gcmc_ensemble", submit_args));
    const std::string job_id = submitted.at("job_id").get<std::string>();
    CHECK(job_id == "job-0001");
    CHECK(submitted.at("task_count") == 18);
    CHECK(engine.now() == 0.0); // submission is asynchronous

    json status = result_of(call(server, 2, "job_status", {{"job_id", job_id}}));
    CHECK(status.at("status") == "running");
    CHECK(status.at("total") == 18);

    // Collecting a running job is a tool-domain error, not a crash.
    const json early = call(server, 3, "collect_results", {{"job_id", job_id}});
    CHECK(early.at("error").at("code") == kToolDomainError);

    engine.advance_to_idle();
    status = result_of(call(server, 4, "job_status", {{"job_id", job_id}}));
    CHECK(status.at("status") == "complete");
    CHECK(status.at("completed_count") == 18);

    const json collected =
        result_of(call(server, 5, "collect_results", {{"job_id", job_id}}));
    const std::string path = collected.at("result_path").get<std::string>();
    CHECK(collected.at("record_count") == 18);
    CHECK(fs::exists(path));

    // JSONL is sorted by (material_id, condition label) and schema-stable.
    std::ifstream is(path);
    std::string line, prev_key;
    std::size_t lines = 0;
    while (std::getline(is, line)) {
        const json rec = json::parse(line);
        for (const char* field :
             {"material_id", "species", "temperature_k", "pressure_pa", "cycles",
              "uptake_mol_per_kg", "duration_s", "status", "task_id"}) {
            CHECK(rec.contains(field));
        }
        CHECK(rec.at("status") == "ok");
        // Same collation as the label sort for these two pressures.
        const std::string key = rec.at("material_id").get<std::string>() + "|" +
                                rec.at("species").get<std::string>() + "_" +
                                std::to_string(rec.at("pressure_pa").get<double>());
        if (lines > 0) CHECK(prev_key < key);
        ++lines;
        prev_key = key;
    }
    CHECK(lines == 18);

    // Collect is idempotent: identical bytes on a second call.
    std::stringstream first;
    first << std::ifstream(path).rdbuf();
    result_of(call(server, 6, "collect_results", {{"job_id", job_id}}));
    std::stringstream second;
    second << std::ifstream(path).rdbuf();
    CHECK(first.str() == second.str());
}

TEST_CASE("chemistry server argument errors") {
    const fs::path dir = make_temp_dir("mofflow-chem-err");
    TaskEngine engine({ResourcePool{1, 12}, ClockMode::Virtual});
    ChemistryServer chem(make_synthetic_catalog(2), engine, {0.0, 1, dir.string()});
    McpServer& server = chem.server();

    // Empty conditions violates minItems -> invalid params.
    const json bad = call(server, 1, "run_gcmc_ensemble",
                          {{"structure_ids", {"mof-000001"}},
                           {"conditions", json::array()},
                           {"cycles", 1000}});
    CHECK(bad.at("error").at("code") == kInvalidParams);

    // Unknown structure ids -> tool-domain error.
    const json unknown = call(server, 2, "run_gcmc_ensemble",
                              {{"structure_ids", {"mof-000001", "nope"}},
                               {"conditions", {water_condition(1.0)}},
                               {"cycles", 1000}});
    CHECK(unknown.at("error").at("code") == kToolDomainError);

    const json nojob = call(server, 3, "job_status", {{"job_id", "job-9999"}});
    CHECK(nojob.at("error").at("code") == kToolDomainError);
}

TEST_CASE("data server: aggregate and rank from JSONL") {
    const fs::path dir = make_temp_dir("mofflow-data");
    const fs::path path = dir / "r.jsonl";
    {
        std::ofstream os(path);
        auto row = [&](const std::string& id, double p, double u,
                       const std::string& status = "ok") {
            os << json{{"material_id", id}, {"species", "water"},
                       {"temperature_k", 298.0}, {"pressure_pa", p},
                       {"cycles", 1000}, {"uptake_mol_per_kg", u},
                       {"duration_s", 1.0}, {"status", status},
                       {"task_id", "t"}}.dump()
               << '\n';
        };
        row("a", 1920.0, 5.0);
        row("a", 320.0, 1.0);
        row("b", 1920.0, 4.0);
        row("b", 320.0, 3.5);
        row("c", 1920.0, 9.0);
        row("c", 320.0, 1.0, "failed"); // failed leg -> incomplete
        row("d", 1920.0, 2.0);
        row("d", 320.0, 0.5);
    }
    DataServer data;
    const json out = result_of(call(data.server(), 1, "aggregate_and_rank",
                                    {{"result_paths", {path.string()}},
                                     {"adsorption_pressure", 1920.0},
                                     {"desorption_pressure", 320.0},
                                     {"fraction", 0.5}}));
    // Working capacities: a=4.0, b=0.5, d=1.5; c incomplete.
    REQUIRE(out.at("selected").size() == 2);
    CHECK(out.at("selected").at(0).at("material_id") == "a");
    CHECK(out.at("selected").at(0).at("working_capacity") == 4.0);
    CHECK(out.at("selected").at(1).at("material_id") == "d");
    CHECK(out.at("cutoff_value") == 1.5);
    CHECK(out.at("population_size") == 3);
    REQUIRE(out.at("incomplete").size() == 1);
    CHECK(out.at("incomplete").at(0).at("material_id") == "c");
    CHECK(out.at("stats").at("min") == 0.5);
    CHECK(out.at("stats").at("max") == 4.0);
    CHECK(out.at("stats").at("mean") == doctest::Approx(2.0));

    // Without desorption_pressure the ranking uses plain uptake.
    const json plain = result_of(call(data.server(), 2, "aggregate_and_rank",
                                      {{"result_paths", {path.string()}},
                                       {"adsorption_pressure", 1920.0},
                                       {"fraction", 0.25}}));
    REQUIRE(plain.at("selected").size() == 1);
    CHECK(plain.at("selected").at(0).at("material_id") == "c");
    CHECK(plain.at("selected").at(0).at("working_capacity") == 9.0);
    CHECK(plain.at("incomplete").empty());

    // Missing file and bad fraction are tool-domain errors.
    CHECK(call(data.server(), 3, "aggregate_and_rank",
               {{"result_paths", {(dir / "nope.jsonl").string()}},
                {"adsorption_pressure", 1.0}, {"fraction", 0.2}})
              .at("error").at("code") == kToolDomainError);
    CHECK(call(data.server(), 4, "aggregate_and_rank",
               {{"result_paths", {path.string()}},
                {"adsorption_pressure", 1.0}, {"fraction", 0.0}})
              .at("error").at("code") == kToolDomainError);
}

TEST_CASE("malformed frames never kill the server") {
    DataServer data;
    McpServer& server = data.server();
    SplitMix rng(31337);
    const std::string alphabet = "{}[]\",:truefalsenull0123456789 \\n";
    for (int i = 0; i < 500; ++i) {
        std::string frame;
        const std::size_t len = 1 + rng.next() % 60;
        for (std::size_t j = 0; j < len; ++j) {
            frame.push_back(alphabet[rng.next() % alphabet.size()]);
        }
        const auto reply = server.handle_line(frame);
        if (reply) {
            const json parsed = json::parse(*reply);
            CHECK(parsed.contains("jsonrpc"));
        }
    }
    // Still alive and well-behaved afterwards.
    const json listing =
        server.handle_request(make_rpc_request(1, "tools/list", json::object()));
    CHECK(listing.contains("result"));
}

TEST_CASE("stream and unix socket transports") {
    DataServer data;

    std::istringstream in(make_rpc_request(1, "initialize", json::object()).dump() + "\n" +
                          make_rpc_request(2, "tools/list", json::object()).dump() + "\n");
    std::ostringstream out;
    serve_stream(data.server(), in, out);
    std::istringstream replies(out.str());
    std::string line;
    REQUIRE(std::getline(replies, line));
    CHECK(json::parse(line).at("id") == 1);
    REQUIRE(std::getline(replies, line));
    CHECK(json::parse(line).at("result").at("tools").size() == 1);

    const std::string sock =
        (fs::temp_directory_path() / "mofflow-test-mcp.sock").string();
    fs::remove(sock);
    UnixSocketServer listener(data.server(), sock);
    listener.start();
    {
        UnixSocketClient client(sock);
        const json reply =
            client.request(make_rpc_request(5, "tools/list", json::object()));
        CHECK(reply.at("id") == 5);
        CHECK(reply.at("result").at("tools").at(0).at("name") == "aggregate_and_rank");

        UnixSocketClient second(sock); // concurrent connections are fine
        CHECK(second.request(make_rpc_request(6, "initialize", json::object()))
                  .at("id") == 6);
    }
    listener.stop();
}
