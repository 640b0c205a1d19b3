#pragma once

#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "geontd/encoding.hpp"
#include "geontd/errors.hpp"
#include "geontd/geo.hpp"
#include "geontd/ntd.hpp"
#include "geontd/patterns.hpp"

namespace geontd {

using json = nlohmann::json;
namespace fs = std::filesystem;

inline constexpr int kSchemaVersion = 1;

// ---- hashing and files -------------------------------------------------------------------

inline std::uint64_t fnv1a(const std::string& bytes, std::uint64_t h = 1469598103934665603ULL) {
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << v;
    return os.str();
}

inline std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw InputError("cannot open " + p.string());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

// Writes through a temporary sibling and renames, so readers never see a partial file.
inline void write_file_atomic(const fs::path& p, const std::string& content) {
    fs::create_directories(p.parent_path());
    fs::path tmp = p;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw PipelineError("report", "cannot write " + tmp.string(), false);
        out << content;
        if (!out) throw PipelineError("report", "short write to " + tmp.string(), false);
    }
    fs::rename(tmp, p);
}

inline std::string utc_timestamp() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

// ---- manifest ----------------------------------------------------------------------------

struct SourceDecl {
    std::string name;
    fs::path path;
    EventKind kind = EventKind::Count;
    std::size_t bins = 4;
    std::vector<std::string> categories;
};

struct AttributeDecl {
    std::string name;
    std::vector<std::string> categories;
};

struct Manifest {
    std::string name;
    fs::path path;
    fs::path sites;
    double radius_m = 200.0;
    std::size_t bins = 4;
    std::vector<SourceDecl> sources;
    std::vector<AttributeDecl> attributes;
    std::string content_hash;  // over the manifest and every file it references
};

inline Manifest load_manifest(const fs::path& path) {
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw InputError(path.string() + ": invalid JSON: " + e.what());
    }
    if (!j.is_object()) throw InputError(path.string() + ": manifest must be a JSON object");
    if (!j.contains("version") || j["version"] != 1)
        throw InputError(path.string() + ": unsupported manifest version (expected \"version\": 1)");
    const fs::path base = path.parent_path();
    auto need_string = [&](const json& o, const char* key) -> std::string {
        if (!o.contains(key) || !o[key].is_string())
            throw InputError(path.string() + ": missing string field '" + key + "'");
        return o[key].get<std::string>();
    };
    Manifest m;
    m.path = path;
    m.name = j.contains("name") && j["name"].is_string() ? j["name"].get<std::string>() : path.stem().string();
    m.sites = base / need_string(j, "sites");
    if (j.contains("radius_m")) {
        if (!j["radius_m"].is_number() || !(j["radius_m"].get<double>() > 0.0))
            throw InputError(path.string() + ": radius_m must be a positive number");
        m.radius_m = j["radius_m"].get<double>();
    }
    if (j.contains("bins")) {
        if (!j["bins"].is_number_integer() || j["bins"].get<long long>() < 1)
            throw InputError(path.string() + ": bins must be a positive integer");
        m.bins = j["bins"].get<std::size_t>();
    }
    if (j.contains("sources") && !j["sources"].is_array()) throw InputError(path.string() + ": 'sources' must be an array");
    for (const auto& s : j.value("sources", json::array())) {
        SourceDecl d;
        d.name = need_string(s, "name");
        d.path = base / need_string(s, "path");
        d.kind = parse_event_kind(need_string(s, "kind"));
        d.bins = s.value("bins", m.bins);
        if (d.bins == 0) throw InputError(path.string() + ": source " + d.name + " has zero bins");
        if (s.contains("categories")) d.categories = s["categories"].get<std::vector<std::string>>();
        m.sources.push_back(std::move(d));
    }
    if (j.contains("site_attributes"))
        for (const auto& a : j["site_attributes"]) {
            AttributeDecl d;
            d.name = need_string(a, "name");
            if (a.contains("categories")) d.categories = a["categories"].get<std::vector<std::string>>();
            m.attributes.push_back(std::move(d));
        }
    if (m.sources.empty() && m.attributes.empty()) throw InputError(path.string() + ": no tensor modes declared");

    std::uint64_t h = fnv1a(read_file(path));
    h = fnv1a(read_file(m.sites), h);
    for (const auto& s : m.sources) h = fnv1a(read_file(s.path), h);
    m.content_hash = hex64(h);
    return m;
}

// ---- ingest ------------------------------------------------------------------------------

struct IngestResult {
    Manifest manifest;
    std::vector<SiteRecord> sites;
    std::vector<ROI> rois;
    std::vector<ModeSpec> specs;
    TensorDataset dataset;
    std::vector<Diagnostic> diagnostics;
};

inline IngestResult ingest(const Manifest& m, std::optional<double> radius_override = std::nullopt) {
    IngestResult r;
    r.manifest = m;
    SiteLoad sl;
    std::vector<EventSource> sources;
    try {
        sl = load_sites(m.sites.string());
        for (const auto& d : m.sources) {
            EventLoad el = load_events(d.path.string(), d.name, d.kind);
            r.diagnostics.insert(r.diagnostics.end(), el.diagnostics.begin(), el.diagnostics.end());
            sources.push_back(std::move(el.source));
        }
    } catch (const InputError& e) {
        throw PipelineError("ingest", e.what());
    }
    r.diagnostics.insert(r.diagnostics.begin(), sl.diagnostics.begin(), sl.diagnostics.end());
    if (sl.sites.empty()) throw PipelineError("ingest", m.sites.string() + ": no valid sites");
    r.sites = sl.sites;
    const double radius = radius_override.value_or(m.radius_m);
    try {
        r.rois = build_rois(std::move(sl.sites), radius);
    } catch (const InputError& e) {
        throw PipelineError("ingest", e.what());
    }

    std::vector<std::string> attr_names;
    for (std::size_t i = 0; i < m.sources.size(); ++i) {
        const SourceDecl& d = m.sources[i];
        switch (d.kind) {
            case EventKind::Count: r.specs.push_back({d.name, ModeKind::BinnedCount, d.bins, {}, {}}); break;
            case EventKind::Categorical: {
                // undeclared vocabularies come from the whole source, not only the categories that win a ROI
                std::vector<std::string> cats = d.categories;
                if (cats.empty()) {
                    std::set<std::string> seen;
                    for (const auto& e : sources[i].records)
                        if (!e.category.empty() && e.category != kNoneCategory) seen.insert(e.category);
                    cats.assign(seen.begin(), seen.end());
                }
                r.specs.push_back({d.name, ModeKind::Categorical, 0, std::move(cats), {}});
                break;
            }
            case EventKind::CountWithPeriod:
                r.specs.push_back({d.name, ModeKind::BinnedCount, d.bins, {}, {}});
                r.specs.push_back({d.name + ".period", ModeKind::Period, 0, {}, {}});
                break;
        }
    }
    for (const auto& a : m.attributes) {
        r.specs.push_back({a.name, ModeKind::Categorical, 0, a.categories, {}});
        attr_names.push_back(a.name);
    }
    try {
        r.dataset = build_tensor(aggregate(r.rois, sources, attr_names), r.specs);
    } catch (const InputError& e) {
        throw PipelineError("tensorize", e.what());
    }
    return r;
}

inline json dataset_summary(const IngestResult& r) {
    std::size_t absorbed = 0;
    for (const auto& roi : r.rois) absorbed += roi.absorbed.size();
    json modes = json::array();
    for (const auto& m : r.dataset.modes)
        modes.push_back({{"name", m.name}, {"kind", to_string(m.kind)}, {"labels", m.labels}, {"ids", m.ids}, {"edges", m.edges}});
    json diags = json::array();
    for (const auto& d : r.diagnostics) diags.push_back(to_string(d));
    return {{"name", r.manifest.name},
            {"manifest_hash", r.manifest.content_hash},
            {"sites_loaded", r.sites.size()},
            {"rois", r.rois.size()},
            {"absorbed_sites", absorbed},
            {"radius_m", r.rois.empty() ? r.manifest.radius_m : r.rois.front().radius_m},
            {"tensor_shape", r.dataset.shape()},
            {"nonzero_cells", r.dataset.tensor.nnz()},
            {"tensor_total", std::accumulate(r.dataset.tensor.values().begin(), r.dataset.tensor.values().end(), 0.0)},
            {"modes", modes},
            {"diagnostics", diags}};
}

// ---- extraction --------------------------------------------------------------------------

struct PipelineConfig {
    fs::path manifest;
    std::size_t rank = 3;
    std::size_t clusters = 3;
    std::uint64_t seed = 0;
    std::size_t max_iters = 500;
    double tol = 1e-6;
    std::size_t top_k = 512;
    double threshold = 1e-6;
    std::optional<double> radius_m;
    fs::path output_dir = "out";
};

struct PipelineResult {
    std::string run_id;
    json report;           // includes created_at
    std::string report_text;
    fs::path report_path;
};

inline json params_json(const PipelineConfig& c, const std::vector<std::size_t>& ranks, double radius) {
    return {{"rank", c.rank},   {"ranks", ranks},         {"clusters", c.clusters}, {"seed", c.seed},
            {"max_iters", c.max_iters}, {"tol", c.tol}, {"top_k", c.top_k},     {"threshold", c.threshold},
            {"radius_m", radius}};
}

inline std::string compute_run_id(const std::string& manifest_hash, const json& params) {
    return hex64(fnv1a(params.dump(), fnv1a(manifest_hash)));
}

// Report JSON without the timestamp; the bytes of dump() are the determinism contract.
inline json build_report(const IngestResult& in, const PipelineConfig& cfg, const std::vector<std::size_t>& ranks,
                         const NTDModel& model, const PatternSet& ps, const std::vector<std::string>& diagnostics) {
    const TensorDataset& ds = in.dataset;
    const double radius = in.rois.empty() ? in.manifest.radius_m : in.rois.front().radius_m;
    json params = params_json(cfg, ranks, radius);

    std::vector<std::size_t> site_counts(ps.medoids.size(), 0);
    for (std::size_t p : ps.site_pattern) ++site_counts[p];

    json patterns = json::array();
    for (std::size_t i = 0; i < ps.medoids.size(); ++i) {
        const Signature& m = ps.medoids[i];
        json labels = json::array();
        for (std::size_t k = 0; k < m.ids.size(); ++k) labels.push_back(ds.modes[k].labels[ds.modes[k].position_of_id(m.ids[k])]);
        json members = json::array();
        for (std::size_t idx : ps.clusters[i])
            members.push_back({{"ids", ps.core_signatures[idx].ids}, {"weight", ps.core_signatures[idx].weight}});
        patterns.push_back({{"index", i},
                            {"ids", m.ids},
                            {"labels", labels},
                            {"weight", m.weight},
                            {"cluster_size", ps.clusters[i].size()},
                            {"site_count", site_counts[i]},
                            {"members", members}});
    }

    json sites = json::array();
    for (std::size_t s = 0; s < ds.site_ids.size(); ++s) {
        const ROI& roi = in.rois[s];
        json ids = json::array();
        for (std::size_t k = 0; k < ds.site_cells[s].size(); ++k) ids.push_back(ds.modes[k].id_of(ds.site_cells[s][k]));
        sites.push_back({{"site_id", roi.site_id},
                         {"lat", roi.lat},
                         {"lon", roi.lon},
                         {"pattern", ps.site_pattern.empty() ? json(nullptr) : json(ps.site_pattern[s])},
                         {"ids", ids},
                         {"absorbed", roi.absorbed}});
    }

    json report;
    report["schema_version"] = kSchemaVersion;
    report["run_id"] = compute_run_id(in.manifest.content_hash, params);
    report["dataset"] = dataset_summary(in);
    report["params"] = params;
    report["solver"] = {{"iterations", model.iterations},
                        {"converged", model.converged},
                        {"relative_error", model.relative_error()},
                        {"objective_trace", model.objective_trace}};
    report["patterns"] = patterns;
    report["sites"] = sites;
    report["diagnostics"] = diagnostics;
    return report;
}

inline PipelineResult run_pipeline(const PipelineConfig& cfg, std::ostream* log = nullptr) {
    std::ostringstream run_log;
    auto stamp = [&](const std::string& msg) {
        const std::string line = utc_timestamp() + " " + msg + "\n";
        run_log << line;
        if (log) *log << line;
    };
    if (cfg.rank == 0) throw InputError("rank must be at least 1");
    if (cfg.clusters == 0) throw InputError("clusters must be at least 1");

    Manifest manifest;
    try {
        manifest = load_manifest(cfg.manifest);
    } catch (const InputError& e) {
        throw PipelineError("ingest", e.what());
    }
    stamp("ingest " + manifest.name);
    IngestResult in = ingest(manifest, cfg.radius_m);
    stamp("tensor " + shape_string(in.dataset.shape()) + " with " + std::to_string(in.dataset.tensor.nnz()) + " cells");

    std::vector<std::string> diagnostics;
    for (const auto& d : in.diagnostics) diagnostics.push_back(to_string(d));
    NTDConfig nc;
    for (std::size_t k = 0; k < in.dataset.modes.size(); ++k) {
        const std::size_t size = in.dataset.modes[k].size();
        if (cfg.rank > size)
            diagnostics.push_back("rank " + std::to_string(cfg.rank) + " clamped to " + std::to_string(size) +
                                  " for mode " + in.dataset.modes[k].name);
        nc.ranks.push_back(std::min(cfg.rank, size));
    }
    nc.seed = cfg.seed;
    nc.max_iters = cfg.max_iters;
    nc.tol = cfg.tol;

    NTDModel model;
    try {
        model = fit_ntd(in.dataset.tensor, nc);
    } catch (const InputError& e) {
        throw PipelineError("solve", e.what());
    }
    stamp("solve " + std::to_string(model.iterations) + " iterations, relative error " +
          std::to_string(model.relative_error()));

    PatternSet ps;
    try {
        ps = extract_patterns(model, in.dataset, {cfg.clusters, cfg.top_k, cfg.threshold});
    } catch (const InputError& e) {
        throw PipelineError("patterns", e.what());
    }
    diagnostics.insert(diagnostics.end(), ps.diagnostics.begin(), ps.diagnostics.end());
    if (ps.medoids.empty()) throw PipelineError("patterns", "the core yielded no signatures");
    stamp("patterns " + std::to_string(ps.medoids.size()));

    PipelineResult out;
    json body = build_report(in, cfg, nc.ranks, model, ps, diagnostics);
    out.run_id = body["run_id"].get<std::string>();
    out.report = body;
    out.report["created_at"] = utc_timestamp();
    out.report_text = out.report.dump(2) + "\n";
    out.report_path = cfg.output_dir / "runs" / out.run_id / "report.json";
    stamp("report " + out.report_path.string());
    write_file_atomic(out.report_path.parent_path() / "run.log", run_log.str());
    write_file_atomic(out.report_path, out.report_text);
    return out;
}

inline json strip_timestamps(json report) {
    report.erase("created_at");
    return report;
}

}  // namespace geontd
