#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "mofflow/bench.hpp"
#include "mofflow/campaign.hpp"
#include "mofflow/chemistry_server.hpp"
#include "mofflow/data_server.hpp"
#include "mofflow/errors.hpp"
#include "mofflow/transport.hpp"

namespace fs = std::filesystem;
using namespace mofflow;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitExhausted = 3;
constexpr int kExitRuntime = 4;

struct CommonOpts {
    std::uint64_t seed = 42;
    int nodes = 1;
    int slots_per_node = 12;
    std::size_t chunk_size = 1152;
    std::string out_dir = "out";
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--seed", opts.seed, "Master seed");
    cmd->add_option("--nodes", opts.nodes, "Node count");
    cmd->add_option("--slots-per-node", opts.slots_per_node, "Concurrent tasks per node");
    cmd->add_option("--chunk-size", opts.chunk_size, "Materials per executor");
    cmd->add_option("--out", opts.out_dir, "Output directory");
}

int cmd_run(const std::string& prompt_file, const CommonOpts& common, bool real_mode,
            double compression, std::size_t synthetic, const std::string& database,
            double failure_rate, double invalid_args_rate, int max_attempts,
            const std::string& endpoint, const std::string& model_name) {
    std::ifstream is(prompt_file);
    if (!is) {
        std::cerr << "error: cannot read prompt file " << prompt_file << "\n";
        return kExitUsage;
    }
    std::stringstream buffer;
    buffer << is.rdbuf();

    CampaignConfig config;
    config.seed = common.seed;
    config.mode = real_mode ? ClockMode::RealTime : ClockMode::Virtual;
    config.compression = compression;
    config.pool = ResourcePool{common.nodes, common.slots_per_node};
    config.chunk_size = common.chunk_size;
    config.output_dir = common.out_dir;
    config.synthetic_count = synthetic;
    config.database_path = database;
    config.failure_rate = failure_rate;
    config.invalid_args_rate = invalid_args_rate;
    if (!endpoint.empty()) {
        HttpModelClient::Options mo;
        mo.base_url = endpoint;
        if (!model_name.empty()) mo.model = model_name;
        if (const char* key = std::getenv("MOFFLOW_API_KEY")) mo.api_key = key;
        config.model = std::make_shared<HttpModelClient>(mo);
    }

    const RestartOutcome outcome =
        run_with_restarts(buffer.str(), config, max_attempts);

    fs::create_directories(common.out_dir);
    {
        std::ofstream os(fs::path(common.out_dir) / "transcript.jsonl");
        for (const auto& e : outcome.transcript) os << e.to_json().dump() << '\n';
    }
    if (!outcome.success) {
        std::cerr << "campaign exhausted after " << outcome.attempts_used
                  << " attempt(s)\n";
        return kExitExhausted;
    }
    const CampaignResult& result = *outcome.result;
    {
        std::ofstream os(fs::path(common.out_dir) / "report.json");
        os << result.report.report.dump(2) << '\n';
    }
    {
        std::ofstream os(fs::path(common.out_dir) / "report.txt");
        os << result.report.text;
    }
    std::cout << result.report.text;
    return kExitOk;
}

int cmd_serve(const std::string& which, const std::string& socket_path, bool stdio,
              const CommonOpts& common, std::size_t synthetic,
              const std::string& database, double failure_rate, double compression) {
    DataServer data;
    std::unique_ptr<TaskEngine> engine;
    std::unique_ptr<ChemistryServer> chemistry;
    McpServer* server = nullptr;

    if (which == "data") {
        server = &data.server();
    } else {
        std::vector<MaterialRecord> catalog =
            synthetic > 0 ? make_synthetic_catalog(synthetic)
                          : scan_database(database);
        engine = std::make_unique<TaskEngine>(TaskEngine::Options{
            ResourcePool{common.nodes, common.slots_per_node}, ClockMode::RealTime, 2,
            compression});
        chemistry = std::make_unique<ChemistryServer>(
            std::move(catalog), *engine,
            ChemistryServer::Options{failure_rate, common.seed, common.out_dir});
        server = &chemistry->server();
    }

    if (stdio) {
        serve_stream(*server, std::cin, std::cout);
        return kExitOk;
    }
    UnixSocketServer listener(*server, socket_path);
    listener.start();
    std::cerr << "serving " << which << " on " << socket_path << " (ctrl-c to stop)\n";
    for (;;) std::this_thread::sleep_for(std::chrono::seconds(1));
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Agent-orchestrated high-throughput adsorption screening harness"};
    app.require_subcommand(1);

    // run
    auto* run = app.add_subcommand("run", "Run a campaign from a prompt file");
    std::string prompt_file;
    run->add_option("prompt", prompt_file, "Prompt file")->required();
    CommonOpts run_common;
    add_common(run, run_common);
    bool real_mode = false;
    bool virtual_mode = false;
    double compression = 1000.0;
    std::size_t synthetic = 0;
    std::string database;
    double failure_rate = 0.0;
    double invalid_args_rate = 0.0;
    int max_attempts = 1;
    std::string endpoint;
    std::string model_name;
    run->add_flag("--real", real_mode, "Real-time mode (compressed wall clock)");
    run->add_flag("--virtual", virtual_mode, "Virtual-time mode (default)");
    run->add_option("--compress", compression, "Time compression factor for --real");
    run->add_option("--synthetic", synthetic, "Generate a synthetic catalog of N materials");
    run->add_option("--database", database, "Override the prompt's database path");
    run->add_option("--failure-rate", failure_rate, "Task-level failure rate");
    run->add_option("--invalid-args-rate", invalid_args_rate,
                    "Agent-level invalid-argument rate");
    run->add_option("--max-attempts", max_attempts, "Campaign restart budget");
    run->add_option("--endpoint", endpoint, "OpenAI-compatible model endpoint URL");
    run->add_option("--model", model_name, "Model name for --endpoint");

    // bench-*
    BenchConfig bench;
    std::string sampling = "random";
    auto add_bench_common = [&](CLI::App* cmd) {
        cmd->add_option("--nodes", bench.node_counts, "Node counts (repeat or comma-sep)")
            ->delimiter(',');
        cmd->add_option("--seed", bench.seed, "Master seed");
        cmd->add_option("--slots-per-node", bench.slots_per_node, "Slots per node");
        cmd->add_option("--chunk-size", bench.chunk_size, "Materials per executor");
        cmd->add_option("--cycles", bench.cycles, "GCMC cycles per simulation");
        cmd->add_option("--sampling", sampling, "random|nested");
        cmd->add_option("--out", bench.output_dir, "Output directory");
    };
    auto* weak = app.add_subcommand("bench-weak", "Weak-scaling sweep (virtual time)");
    add_bench_common(weak);
    weak->add_option("--mofs-per-node", bench.mofs_per_node, "Materials per node");

    auto* strong = app.add_subcommand("bench-strong", "Strong-scaling sweep (virtual time)");
    add_bench_common(strong);
    strong->add_option("--total-mofs", bench.total_mofs, "Fixed total materials");

    auto* reliability =
        app.add_subcommand("bench-reliability", "Seeded restart-policy trials");
    add_bench_common(reliability);
    reliability->add_option("--invalid-args-rate", bench.invalid_args_rate,
                            "Agent-level invalid-argument rate");
    reliability->add_option("--trials", bench.trials, "Independent campaigns");
    reliability->add_option("--max-attempts", bench.max_attempts, "Restart budget");
    reliability->add_option("--reliability-mofs", bench.reliability_mofs,
                            "Catalog size per trial");

    // serve
    auto* serve = app.add_subcommand("serve", "Expose an MCP server on a local socket");
    std::string which = "chemistry";
    std::string socket_path = "/tmp/mofflow-mcp.sock";
    bool stdio = false;
    CommonOpts serve_common;
    add_common(serve, serve_common);
    serve->add_option("--server", which, "chemistry|data");
    serve->add_option("--socket", socket_path, "Unix socket path");
    serve->add_flag("--stdio", stdio, "Serve over stdin/stdout instead");
    std::size_t serve_synthetic = 0;
    std::string serve_database;
    double serve_failure_rate = 0.0;
    double serve_compression = 1000.0;
    serve->add_option("--synthetic", serve_synthetic, "Synthetic catalog size");
    serve->add_option("--database", serve_database, "Structure database directory");
    serve->add_option("--failure-rate", serve_failure_rate, "Task-level failure rate");
    serve->add_option("--compress", serve_compression, "Time compression factor");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (run->parsed()) {
            if (bench.cycles == 0) return kExitUsage;
            return cmd_run(prompt_file, run_common, real_mode, compression, synthetic,
                           database, failure_rate, invalid_args_rate, max_attempts,
                           endpoint, model_name);
        }
        bench.sampling = sampling_from_string(sampling);
        if (weak->parsed()) {
            const auto rows = bench_weak(bench);
            fs::create_directories(bench.output_dir);
            std::ofstream os(fs::path(bench.output_dir) / "weak.csv");
            write_weak_csv(os, rows);
            write_weak_csv(std::cout, rows);
            return kExitOk;
        }
        if (strong->parsed()) {
            const auto rows = bench_strong(bench);
            fs::create_directories(bench.output_dir);
            std::ofstream os(fs::path(bench.output_dir) / "strong.csv");
            write_strong_csv(os, rows);
            write_strong_csv(std::cout, rows);
            return kExitOk;
        }
        if (reliability->parsed()) {
            const auto result = bench_reliability(bench);
            fs::create_directories(bench.output_dir);
            std::ofstream os(fs::path(bench.output_dir) / "reliability.csv");
            write_reliability_csv(os, result);
            write_reliability_csv(std::cout, result);
            return kExitOk;
        }
        if (serve->parsed()) {
            return cmd_serve(which, socket_path, stdio, serve_common, serve_synthetic,
                             serve_database, serve_failure_rate, serve_compression);
        }
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const IngestError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitUsage;
}
