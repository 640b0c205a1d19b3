#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "geontd/bench.hpp"
#include "geontd/pipeline.hpp"
#include "geontd/server.hpp"

namespace {

using namespace geontd;

struct Settings {
    fs::path output_dir = "out";
    fs::path data_dir = "samples";
    std::map<std::string, fs::path> datasets;
    std::uint64_t seed = 0;
};

// default < env < config file < command line
Settings resolve_settings(const std::string& config_path, const std::string& out_flag) {
    Settings s;
    if (const char* env = std::getenv("GEONTD_OUTPUT_DIR"); env && *env) s.output_dir = env;
    if (const char* env = std::getenv("GEONTD_DATA_DIR"); env && *env) s.data_dir = env;
    json cfg = json::object();
    if (!config_path.empty()) {
        try {
            cfg = json::parse(read_file(config_path));
        } catch (const json::parse_error& e) {
            throw InputError(config_path + ": invalid JSON: " + e.what());
        }
        if (!cfg.is_object()) throw InputError(config_path + ": config must be a JSON object");
        const fs::path base = fs::path(config_path).parent_path();
        if (cfg.contains("output_dir")) s.output_dir = base / cfg["output_dir"].get<std::string>();
        if (cfg.contains("data_dir")) s.data_dir = base / cfg["data_dir"].get<std::string>();
        if (cfg.contains("seed")) s.seed = cfg["seed"].get<std::uint64_t>();
        s.datasets = discover_datasets(s.data_dir);
        if (cfg.contains("datasets"))
            for (const auto& [name, path] : cfg["datasets"].items()) s.datasets[name] = base / path.get<std::string>();
    } else {
        s.datasets = discover_datasets(s.data_dir);
    }
    if (!out_flag.empty()) s.output_dir = out_flag;
    return s;
}

fs::path resolve_dataset(const Settings& s, const std::string& d) {
    if (auto it = s.datasets.find(d); it != s.datasets.end()) return it->second;
    if (fs::is_directory(d) && fs::exists(fs::path(d) / "manifest.json")) return fs::path(d) / "manifest.json";
    if (fs::is_regular_file(d)) return d;
    throw InputError("dataset '" + d + "' is neither registered nor a manifest path");
}

std::pair<std::string, int> split_bind(const std::string& bind) {
    const auto colon = bind.rfind(':');
    if (colon == std::string::npos) throw InputError("--bind expects HOST:PORT, got '" + bind + "'");
    int port = -1;
    try {
        std::size_t used = 0;
        port = std::stoi(bind.substr(colon + 1), &used);
        if (used != bind.size() - colon - 1) port = -1;
    } catch (const std::exception&) {
    }
    if (port < 0 || port > 65535) throw InputError("invalid port in '" + bind + "'");
    return {bind.substr(0, colon), port};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"geontd: geospatial pattern mining with non-negative Tucker decomposition"};
    app.require_subcommand(1);
    std::string config_path, out_flag;
    app.add_option("--config", config_path, "JSON config file (output_dir, data_dir, datasets, seed)");
    app.add_option("--out", out_flag, "output directory (overrides config and GEONTD_OUTPUT_DIR)");

    auto* ingest_cmd = app.add_subcommand("ingest", "load a manifest and summarize the tensor it yields");
    std::string manifest_arg;
    std::optional<double> radius;
    ingest_cmd->add_option("manifest", manifest_arg, "manifest path or registered dataset")->required();
    ingest_cmd->add_option("--radius", radius, "ROI radius in meters");

    auto* extract_cmd = app.add_subcommand("extract", "run the full pipeline and write a pattern report");
    std::string dataset;
    std::size_t rank = 3, clusters = 3, max_iters = 500, top_k = 512;
    std::optional<std::uint64_t> seed;
    double tol = 1e-6, threshold = 1e-6;
    extract_cmd->add_option("--dataset", dataset, "registered dataset name or manifest path")->required();
    extract_cmd->add_option("--rank", rank, "core rank J per mode")->check(CLI::PositiveNumber);
    extract_cmd->add_option("--clusters", clusters, "number of patterns M")->check(CLI::PositiveNumber);
    extract_cmd->add_option("--seed", seed, "solver seed");
    extract_cmd->add_option("--radius", radius, "ROI radius in meters");
    extract_cmd->add_option("--max-iters", max_iters)->check(CLI::PositiveNumber);
    extract_cmd->add_option("--tol", tol)->check(CLI::PositiveNumber);
    extract_cmd->add_option("--top-k", top_k)->check(CLI::PositiveNumber);
    extract_cmd->add_option("--threshold", threshold, "minimum core entry relative to the largest");

    auto* bench_cmd = app.add_subcommand("bench", "run a synthetic benchmark suite");
    std::string suite;
    BenchConfig bcfg;
    bool seeds_set = false;
    bench_cmd->add_option("--suite", suite)->required()->check(CLI::IsMember({"gaussian", "boxes"}));
    bench_cmd->add_option("--seeds", bcfg.seeds, "number of seeds")->check(CLI::PositiveNumber)->each([&](const std::string&) {
        seeds_set = true;
    });
    bench_cmd->add_option("--first-seed", bcfg.first_seed);

    auto* serve_cmd = app.add_subcommand("serve", "serve the JSON API");
    std::string bind = "127.0.0.1:8080";
    serve_cmd->add_option("--bind", bind, "HOST:PORT");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        const Settings s = resolve_settings(config_path, out_flag);
        if (*ingest_cmd) {
            Manifest m = load_manifest(resolve_dataset(s, manifest_arg));
            IngestResult r = ingest(m, radius);
            std::cout << dataset_summary(r).dump(2) << "\n";
        } else if (*extract_cmd) {
            PipelineConfig pc;
            pc.manifest = resolve_dataset(s, dataset);
            pc.rank = rank;
            pc.clusters = clusters;
            pc.seed = seed.value_or(s.seed);
            pc.max_iters = max_iters;
            pc.tol = tol;
            pc.top_k = top_k;
            pc.threshold = threshold;
            pc.radius_m = radius;
            pc.output_dir = s.output_dir;
            PipelineResult r = run_pipeline(pc, &std::cerr);
            std::cout << json{{"run_id", r.run_id}, {"report", r.report_path.string()}}.dump() << "\n";
        } else if (*bench_cmd) {
            if (suite == "boxes" && !seeds_set) bcfg.seeds = 5;
            BenchResult r = suite == "gaussian" ? run_gaussian_suite(bcfg) : run_box_suite(bcfg);
            BenchFiles f = write_bench(r, bcfg, s.output_dir);
            std::cout << r.summary.dump(2) << "\n";
            std::cerr << "wrote " << f.csv.string() << " and " << f.json_path.string() << "\n";
        } else if (*serve_cmd) {
            auto [host, port] = split_bind(bind);
            ServiceConfig sc;
            sc.datasets = s.datasets;
            sc.output_dir = s.output_dir;
            sc.default_seed = s.seed;
            if (sc.datasets.empty()) throw InputError("no datasets registered (set data_dir or datasets in --config)");
            HttpService http(sc);
            const int bound = http.bind(host, port);
            if (bound < 0) throw PipelineError("serve", "cannot bind " + bind, false);
            std::cerr << "listening on " << host << ":" << bound << " with " << sc.datasets.size() << " dataset(s)\n";
            http.listen_after_bind();
        }
    } catch (const PipelineError& e) {
        std::cerr << "error [" << e.stage() << "]: " << e.what() << "\n";
        return e.input_caused() ? 1 : 2;
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
