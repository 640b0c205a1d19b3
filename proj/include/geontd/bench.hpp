#pragma once

#include <chrono>
#include <cmath>
#include <random>
#include <filesystem>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "geontd/eval.hpp"
#include "geontd/pipeline.hpp"

namespace geontd {

// Three targets in R^7. Each dimension uses the levels {0, 76, 80} with the roles of the
// targets permuted from one dimension to the next, so every target differs from every other.
inline std::vector<std::vector<double>> gaussian_targets() {
    static const int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
    static const double levels[3] = {0.0, 76.0, 80.0};
    std::vector<std::vector<double>> mus(3, std::vector<double>(7));
    for (int d = 0; d < 7; ++d)
        for (int r = 0; r < 3; ++r) mus[perms[d % 6][r]][d] = levels[r];
    return mus;
}

struct GaussianPanel {
    std::string name;
    std::vector<std::size_t> counts;
    std::vector<double> noise;
};

inline std::vector<GaussianPanel> gaussian_panels() {
    return {{"gaussian-a", {500, 500, 500}, {0.10, 0.13, 0.15}},
            {"gaussian-b", {500, 1000, 1500}, {0.10, 0.10, 0.10}},
            {"gaussian-c", {500, 1000, 1500}, {0.16, 0.11, 0.13}}};
}

struct BenchConfig {
    std::size_t seeds = 10;
    std::uint64_t first_seed = 0;
    // signatures below this share of the largest core entry are not treated as patterns
    double threshold = 0.05;
    std::size_t gaussian_bins = 4;
    std::size_t gaussian_clusters = 3;
    std::vector<std::size_t> gaussian_ranks{1, 2, 3, 4};
    std::size_t box_bins = 8;
    std::size_t box_rank = 5;
    std::size_t box_clusters = 10;
    std::size_t kmeans_restarts = 10;
};

struct BenchRow {
    std::string dataset;
    std::string method;
    std::size_t rank = 0;
    std::size_t clusters = 0;
    std::uint64_t seed = 0;
    std::vector<double> target_errors;
    ScoreReport scores;
    double seconds = 0.0;
};

struct BenchResult {
    std::string suite;
    std::vector<BenchRow> rows;
    json summary;
};

inline std::string format_number(double v) {
    if (std::isinf(v)) return "inf";
    std::ostringstream os;
    os.precision(10);
    os << v;
    return os.str();
}

inline std::string bench_csv(const BenchResult& r) {
    std::ostringstream os;
    os << "dataset,method,J,M,seed,target_errors,fmi,ari,v_measure,mutual_info,normalized_mi\n";
    for (const auto& row : r.rows) {
        std::string errs;
        for (std::size_t i = 0; i < row.target_errors.size(); ++i) errs += (i ? ";" : "") + format_number(row.target_errors[i]);
        os << row.dataset << ',' << row.method << ',' << row.rank << ',' << row.clusters << ',' << row.seed << ','
           << errs << ',' << format_number(row.scores.fmi) << ',' << format_number(row.scores.ari) << ','
           << format_number(row.scores.v_measure) << ',' << format_number(row.scores.mutual_info) << ','
           << format_number(row.scores.normalized_mi) << '\n';
    }
    return os.str();
}

inline json errors_json(const std::vector<double>& errs) {
    json a = json::array();
    for (double e : errs) a.push_back(std::isinf(e) ? json(nullptr) : json(e));
    return a;
}

inline json scores_json(const ScoreReport& s) {
    return {{"fmi", s.fmi},
            {"ari", s.ari},
            {"v_measure", s.v_measure},
            {"homogeneity", s.homogeneity},
            {"completeness", s.completeness},
            {"mutual_info", s.mutual_info},
            {"normalized_mi", s.normalized_mi}};
}

inline json bench_json(const BenchResult& r, const BenchConfig& cfg) {
    json rows = json::array();
    for (const auto& row : r.rows)
        rows.push_back({{"dataset", row.dataset},
                        {"method", row.method},
                        {"J", row.rank},
                        {"M", row.clusters},
                        {"seed", row.seed},
                        {"target_errors", errors_json(row.target_errors)},
                        {"scores", scores_json(row.scores)},
                        {"seconds", row.seconds}});
    return {{"schema_version", kSchemaVersion},
            {"suite", r.suite},
            {"created_at", utc_timestamp()},
            {"config",
             {{"seeds", cfg.seeds},
              {"first_seed", cfg.first_seed},
              {"threshold", cfg.threshold},
              {"gaussian_bins", cfg.gaussian_bins},
              {"gaussian_ranks", cfg.gaussian_ranks},
              {"box_bins", cfg.box_bins},
              {"box_rank", cfg.box_rank},
              {"box_clusters", cfg.box_clusters}}},
            {"rows", rows},
            {"summary", r.summary}};
}

namespace detail {
inline double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}
}  // namespace detail

inline BenchRow gaussian_run(const GaussianPanel& panel, std::size_t rank, std::uint64_t seed, const BenchConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    GaussianPatternSpec spec{gaussian_targets(), panel.counts, panel.noise};
    LabeledPoints pts = sample_gaussian_patterns(spec, seed);
    PointPipelineConfig pc;
    pc.bins = cfg.gaussian_bins;
    pc.rank = rank;
    pc.clusters = cfg.gaussian_clusters;
    pc.threshold = cfg.threshold;
    pc.seed = seed;
    PointPipelineResult res = run_point_pipeline(pts, pc);
    std::vector<std::vector<int>> tsig, rsig;
    for (const auto& t : spec.means) tsig.push_back(signature_of_point(res.dataset, t));
    for (const auto& m : res.patterns.medoids) rsig.push_back(m.ids);
    BenchRow row{panel.name, "ntd", rank, cfg.gaussian_clusters, seed, recovery_error(tsig, rsig),
                 clustering_scores(pts.labels, res.labels), 0.0};
    row.seconds = detail::seconds_since(t0);
    return row;
}

inline BenchResult run_gaussian_suite(const BenchConfig& cfg) {
    BenchResult out;
    out.suite = "gaussian";
    json summary = json::object();
    for (const auto& panel : gaussian_panels()) {
        json per_rank = json::array();
        for (std::size_t j : cfg.gaussian_ranks) {
            if (j > cfg.gaussian_bins) {
                summary["diagnostics"].push_back("rank " + std::to_string(j) + " exceeds the mode size " +
                                                 std::to_string(cfg.gaussian_bins) + "; skipped");
                continue;
            }
            std::size_t exact = 0;
            double total = 0.0;
            std::size_t finite_runs = 0;
            for (std::size_t s = 0; s < cfg.seeds; ++s) {
                BenchRow row = gaussian_run(panel, j, cfg.first_seed + s, cfg);
                double mean = 0.0;
                bool all_zero = true;
                for (double e : row.target_errors) {
                    mean += e;
                    all_zero = all_zero && e == 0.0;
                }
                mean /= static_cast<double>(row.target_errors.size());
                if (all_zero) ++exact;
                if (std::isfinite(mean)) {
                    total += mean;
                    ++finite_runs;
                }
                out.rows.push_back(std::move(row));
            }
            per_rank.push_back({{"J", j},
                                {"exact_recoveries", exact},
                                {"runs", cfg.seeds},
                                {"mean_error", finite_runs == cfg.seeds && cfg.seeds ? json(total / cfg.seeds) : json(nullptr)}});
        }
        summary[panel.name] = per_rank;
    }
    out.summary = summary;
    return out;
}

inline BenchResult run_box_suite(const BenchConfig& cfg) {
    BenchResult out;
    out.suite = "boxes";
    const BoxClusterSpec spec = box_benchmark_spec();
    std::map<std::string, std::vector<ScoreReport>> by_method;
    for (std::size_t s = 0; s < cfg.seeds; ++s) {
        const std::uint64_t seed = cfg.first_seed + s;
        LabeledPoints pts = generate_box_clusters(spec, seed);

        auto t0 = std::chrono::steady_clock::now();
        PointPipelineConfig pc;
        pc.bins = cfg.box_bins;
        pc.rank = cfg.box_rank;
        pc.clusters = cfg.box_clusters;
        pc.threshold = cfg.threshold;
        pc.seed = seed;
        PointPipelineResult res = run_point_pipeline(pts, pc);
        BenchRow ntd{"boxes", "ntd", cfg.box_rank, cfg.box_clusters, seed, {}, clustering_scores(pts.labels, res.labels),
                     detail::seconds_since(t0)};

        t0 = std::chrono::steady_clock::now();
        auto km = kmeans(pts.points, cfg.box_clusters, seed, cfg.kmeans_restarts);
        BenchRow kmr{"boxes", "kmeans", 0, cfg.box_clusters, seed, {}, clustering_scores(pts.labels, km),
                     detail::seconds_since(t0)};

        t0 = std::chrono::steady_clock::now();
        auto ahc = ward_clustering(pts.points, cfg.box_clusters);
        BenchRow ahr{"boxes", "ahc", 0, cfg.box_clusters, seed, {}, clustering_scores(pts.labels, ahc),
                     detail::seconds_since(t0)};

        for (BenchRow* r : {&ntd, &kmr, &ahr}) {
            by_method[r->method].push_back(r->scores);
            out.rows.push_back(std::move(*r));
        }
    }
    json summary = json::object();
    for (const auto& [method, scores] : by_method) {
        ScoreReport mean;
        for (const auto& s : scores) {
            mean.fmi += s.fmi;
            mean.ari += s.ari;
            mean.v_measure += s.v_measure;
            mean.homogeneity += s.homogeneity;
            mean.completeness += s.completeness;
            mean.mutual_info += s.mutual_info;
            mean.normalized_mi += s.normalized_mi;
        }
        const double n = static_cast<double>(scores.size());
        mean.fmi /= n;
        mean.ari /= n;
        mean.v_measure /= n;
        mean.homogeneity /= n;
        mean.completeness /= n;
        mean.mutual_info /= n;
        mean.normalized_mi /= n;
        summary[method] = scores_json(mean);
    }
    out.summary = summary;
    return out;
}

// Synthetic city at case-study scale: sites in a square around (lat0, lon0), four
// count-with-period event sources and two categorical site attributes, i.e. ten modes
// of size at most five with the default four bins.
struct CityConfig {
    std::size_t sites = 5000;
    std::size_t events_per_source = 20000;
    double extent_deg = 0.6;
    double lat0 = -23.55;
    double lon0 = -46.63;
    std::uint64_t seed = 0;
};

inline fs::path write_synthetic_city(const fs::path& dir, const CityConfig& cfg) {
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::normal_distribution<double> jitter(0.0, 0.002);
    static const char* kinds[] = {"state", "municipal", "private"};
    static const char* income[] = {"low", "middle", "high", "very_high"};
    static const char* sources[] = {"robbery", "theft", "homicide", "bus_stops"};

    std::ostringstream sites;
    sites << "site_id,lat,lon,school_type,income\n";
    std::vector<std::pair<double, double>> centers;
    for (std::size_t i = 0; i < cfg.sites; ++i) {
        const double lat = cfg.lat0 + cfg.extent_deg * (u(rng) - 0.5);
        const double lon = cfg.lon0 + cfg.extent_deg * (u(rng) - 0.5);
        centers.emplace_back(lat, lon);
        sites.precision(9);
        sites << i + 1 << ',' << lat << ',' << lon << ',' << kinds[rng() % 3] << ',' << income[rng() % 4] << '\n';
    }
    write_file_atomic(dir / "sites.csv", sites.str());

    json manifest = {{"version", 1}, {"name", "synthetic-city"}, {"sites", "sites.csv"}, {"radius_m", 200}, {"bins", 4}};
    manifest["sources"] = json::array();
    for (std::size_t s = 0; s < 4; ++s) {
        std::ostringstream ev;
        ev.precision(9);
        ev << "lat,lon,period\n";
        // events cluster around a random subset of sites so counts vary between ROIs
        for (std::size_t e = 0; e < cfg.events_per_source; ++e) {
            const auto& c = centers[static_cast<std::size_t>(std::pow(u(rng), 2.0) * static_cast<double>(centers.size()))];
            ev << c.first + jitter(rng) << ',' << c.second + jitter(rng) << ',' << period_names()[(rng() % 4 + s) % 4] << '\n';
        }
        write_file_atomic(dir / (std::string(sources[s]) + ".csv"), ev.str());
        manifest["sources"].push_back(
            {{"name", sources[s]}, {"path", std::string(sources[s]) + ".csv"}, {"kind", "count-with-period"}});
    }
    manifest["site_attributes"] = {{{"name", "school_type"}, {"categories", {"state", "municipal", "private"}}},
                                   {{"name", "income"}, {"categories", {"low", "middle", "high", "very_high"}}}};
    write_file_atomic(dir / "manifest.json", manifest.dump(2) + "\n");
    return dir / "manifest.json";
}

struct BenchFiles {
    fs::path csv;
    fs::path json_path;
};

inline BenchFiles write_bench(const BenchResult& r, const BenchConfig& cfg, const fs::path& output_dir) {
    BenchFiles f{output_dir / "bench" / (r.suite + ".csv"), output_dir / "bench" / (r.suite + ".json")};
    const std::string body = bench_json(r, cfg).dump(2) + "\n";
    write_file_atomic(f.csv, bench_csv(r));
    write_file_atomic(f.json_path, body);
    write_file_atomic(output_dir / "bench" / "latest.json", body);
    return f;
}

}  // namespace geontd
