#pragma once

#include <chrono>
#include <future>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <tuple>

#include <httplib.h>

#include "geontd/pipeline.hpp"

namespace geontd {

struct ServiceConfig {
    std::map<std::string, fs::path> datasets;  // name -> manifest
    fs::path output_dir = "out";
    std::uint64_t default_seed = 0;
    std::size_t max_iters = 500;
    double tol = 1e-6;
    std::size_t top_k = 512;
    double threshold = 1e-6;
    std::chrono::milliseconds sync_budget{30000};
};

// Every subdirectory of `dir` holding a manifest.json registers under its directory name.
inline std::map<std::string, fs::path> discover_datasets(const fs::path& dir) {
    std::map<std::string, fs::path> out;
    std::error_code ec;
    if (!fs::is_directory(dir, ec)) return out;
    for (const auto& entry : fs::directory_iterator(dir, ec))
        if (entry.is_directory() && fs::exists(entry.path() / "manifest.json"))
            out[entry.path().filename().string()] = entry.path() / "manifest.json";
    return out;
}

struct ApiResponse {
    int status = 200;
    std::string body;
    std::string cache = "";  // "hit" / "miss" for extraction responses
};

inline ApiResponse api_error(int status, const std::string& code, const std::string& message,
                             const std::string& stage = "") {
    json err = {{"code", code}, {"message", message}};
    err["stage"] = stage.empty() ? json(nullptr) : json(stage);
    return {status, json{{"schema_version", kSchemaVersion}, {"error", err}}.dump() + "\n"};
}

inline ApiResponse api_json(const json& j, int status = 200) { return {status, j.dump() + "\n"}; }

// Request handling without the socket layer; HttpService binds these to routes.
class Service {
public:
    explicit Service(ServiceConfig cfg) : cfg_(std::move(cfg)) {}

    const ServiceConfig& config() const noexcept { return cfg_; }

    ApiResponse datasets() const {
        json names = json::array();
        for (const auto& [name, path] : cfg_.datasets) names.push_back(name);
        return api_json({{"schema_version", kSchemaVersion}, {"datasets", names}});
    }

    ApiResponse extract(const std::string& body) {
        json req;
        try {
            req = json::parse(body);
        } catch (const json::parse_error&) {
            return api_error(400, "bad_request", "request body is not valid JSON");
        }
        if (!req.is_object()) return api_error(400, "bad_request", "request body must be a JSON object");
        if (!req.contains("dataset") || !req["dataset"].is_string())
            return api_error(400, "bad_request", "missing string field 'dataset'");
        auto positive = [&](const char* key, std::optional<std::size_t> fallback) -> std::optional<std::size_t> {
            if (!req.contains(key)) return fallback;
            if (!req[key].is_number_integer() || req[key].get<long long>() < 1) return std::nullopt;
            return req[key].get<std::size_t>();
        };
        const std::string dataset = req["dataset"].get<std::string>();
        auto rank = positive("rank", std::nullopt);
        auto clusters = positive("clusters", std::nullopt);
        if (!rank) return api_error(400, "bad_request", "'rank' must be a positive integer");
        if (!clusters) return api_error(400, "bad_request", "'clusters' must be a positive integer");
        std::uint64_t seed = cfg_.default_seed;
        if (req.contains("seed")) {
            if (!req["seed"].is_number_unsigned()) return api_error(400, "bad_request", "'seed' must be a non-negative integer");
            seed = req["seed"].get<std::uint64_t>();
        }
        auto ds = cfg_.datasets.find(dataset);
        if (ds == cfg_.datasets.end()) return api_error(404, "unknown_dataset", "dataset '" + dataset + "' is not registered");

        const Key key{dataset, *rank, *clusters, seed};
        const std::string job = job_id(key);
        std::shared_future<Outcome> fut;
        bool hit = true;
        {
            std::lock_guard<std::mutex> lock(mu_);
            auto it = jobs_.find(key);
            if (it == jobs_.end()) {
                hit = false;
                PipelineConfig pc;
                pc.manifest = ds->second;
                pc.rank = *rank;
                pc.clusters = *clusters;
                pc.seed = seed;
                pc.max_iters = cfg_.max_iters;
                pc.tol = cfg_.tol;
                pc.top_k = cfg_.top_k;
                pc.threshold = cfg_.threshold;
                pc.output_dir = cfg_.output_dir;
                fut = std::async(std::launch::async, [pc] { return run(pc); }).share();
                jobs_.emplace(key, fut);
                job_keys_.emplace(job, key);
            } else {
                fut = it->second;
            }
        }
        if (fut.wait_for(cfg_.sync_budget) != std::future_status::ready)
            return api_json({{"schema_version", kSchemaVersion}, {"status", "running"}, {"job", job}}, 202);
        ApiResponse r = finish(key, fut.get());
        if (r.status == 200) r.cache = hit ? "hit" : "miss";
        return r;
    }

    // `id` is either a finished run id or a job id handed out by a 202 response.
    ApiResponse run_status(const std::string& id) {
        std::optional<std::shared_future<Outcome>> fut;
        std::optional<Key> key;
        {
            std::lock_guard<std::mutex> lock(mu_);
            auto jk = job_keys_.find(id);
            if (jk != job_keys_.end()) {
                key = jk->second;
                auto it = jobs_.find(jk->second);
                if (it != jobs_.end()) fut = it->second;
            }
        }
        if (fut) {
            if (fut->wait_for(std::chrono::milliseconds(0)) != std::future_status::ready)
                return api_json({{"schema_version", kSchemaVersion}, {"status", "running"}, {"job", id}});
            const Outcome& o = fut->get();
            if (!o.error) return run_summary(o.run_id);
            return finish(*key, o);
        }
        if (!valid_run_id(id) || !fs::exists(report_path(id))) return api_error(404, "unknown_run", "no run '" + id + "'");
        return run_summary(id);
    }

    ApiResponse patterns(const std::string& run) const {
        if (!valid_run_id(run) || !fs::exists(report_path(run))) return api_error(404, "unknown_run", "no run '" + run + "'");
        return {200, read_file(report_path(run))};
    }

    ApiResponse sites(const std::string& run, const std::string& pattern) const {
        if (!valid_run_id(run) || !fs::exists(report_path(run))) return api_error(404, "unknown_run", "no run '" + run + "'");
        json report = json::parse(read_file(report_path(run)));
        std::optional<std::size_t> want;
        if (!pattern.empty()) {
            std::size_t pos = 0;
            long long p = -1;
            try {
                p = std::stoll(pattern, &pos);
            } catch (const std::exception&) {
                pos = 0;
            }
            if (pos != pattern.size() || p < 0 || static_cast<std::size_t>(p) >= report["patterns"].size())
                return api_error(400, "bad_request", "pattern must be an index below " + std::to_string(report["patterns"].size()));
            want = static_cast<std::size_t>(p);
        }
        json out = json::array();
        for (const auto& s : report["sites"])
            if (!want || (s["pattern"].is_number() && s["pattern"].get<std::size_t>() == *want)) out.push_back(s);
        return api_json({{"schema_version", kSchemaVersion},
                         {"run_id", run},
                         {"pattern", want ? json(*want) : json(nullptr)},
                         {"sites", out}});
    }

    ApiResponse bench_latest() const {
        const fs::path p = cfg_.output_dir / "bench" / "latest.json";
        if (!fs::exists(p)) return api_error(404, "no_bench", "no benchmark has been run yet");
        return {200, read_file(p)};
    }

private:
    using Key = std::tuple<std::string, std::size_t, std::size_t, std::uint64_t>;

    struct Outcome {
        std::string run_id;
        std::optional<PipelineError> error;
        bool internal = false;
    };

    static Outcome run(const PipelineConfig& pc) {
        try {
            return {run_pipeline(pc).run_id, std::nullopt, false};
        } catch (const PipelineError& e) {
            return {"", e, !e.input_caused()};
        } catch (const InputError& e) {
            return {"", PipelineError("request", e.what()), false};
        } catch (const std::exception& e) {
            return {"", PipelineError("internal", e.what(), false), true};
        }
    }

    static std::string job_id(const Key& k) {
        const auto& [d, j, m, s] = k;
        return "job-" + hex64(fnv1a(d + "|" + std::to_string(j) + "|" + std::to_string(m) + "|" + std::to_string(s)));
    }

    static bool valid_run_id(const std::string& id) {
        if (id.size() != 16) return false;
        for (char c : id)
            if (!std::isxdigit(static_cast<unsigned char>(c))) return false;
        return true;
    }

    fs::path report_path(const std::string& run) const { return cfg_.output_dir / "runs" / run / "report.json"; }

    ApiResponse finish(const Key& key, const Outcome& o) {
        if (!o.error) return patterns(o.run_id);
        {
            // failed extractions are not cached, so a retry recomputes
            std::lock_guard<std::mutex> lock(mu_);
            jobs_.erase(key);
        }
        return api_error(o.internal ? 500 : 422, o.internal ? "internal" : "extraction_failed", o.error->what(),
                         o.error->stage());
    }

    ApiResponse run_summary(const std::string& run) const {
        json report = json::parse(read_file(report_path(run)));
        return api_json({{"schema_version", kSchemaVersion},
                         {"status", "done"},
                         {"run_id", run},
                         {"dataset", report["dataset"]["name"]},
                         {"params", report["params"]},
                         {"solver", report["solver"]},
                         {"created_at", report.value("created_at", "")},
                         {"patterns_url", "/api/patterns?run=" + run}});
    }

    ServiceConfig cfg_;
    std::mutex mu_;
    std::map<Key, std::shared_future<Outcome>> jobs_;
    std::map<std::string, Key> job_keys_;
};

class HttpService {
public:
    explicit HttpService(ServiceConfig cfg) : svc_(std::move(cfg)) {
        auto send = [](httplib::Response& res, const ApiResponse& r) {
            res.status = r.status;
            if (!r.cache.empty()) res.set_header("X-Cache", r.cache);
            res.set_content(r.body, "application/json; charset=utf-8");
        };
        srv_.Get("/api/datasets", [this, send](const httplib::Request&, httplib::Response& res) { send(res, svc_.datasets()); });
        srv_.Post("/api/extract", [this, send](const httplib::Request& req, httplib::Response& res) {
            send(res, svc_.extract(req.body));
        });
        srv_.Get(R"(/api/runs/([A-Za-z0-9\-]+))", [this, send](const httplib::Request& req, httplib::Response& res) {
            send(res, svc_.run_status(req.matches[1]));
        });
        srv_.Get("/api/patterns", [this, send](const httplib::Request& req, httplib::Response& res) {
            if (!req.has_param("run")) return send(res, api_error(400, "bad_request", "missing query parameter 'run'"));
            send(res, svc_.patterns(req.get_param_value("run")));
        });
        srv_.Get("/api/sites", [this, send](const httplib::Request& req, httplib::Response& res) {
            if (!req.has_param("run")) return send(res, api_error(400, "bad_request", "missing query parameter 'run'"));
            send(res, svc_.sites(req.get_param_value("run"), req.get_param_value("pattern")));
        });
        srv_.Get("/api/bench/latest", [this, send](const httplib::Request&, httplib::Response& res) {
            send(res, svc_.bench_latest());
        });
        srv_.set_error_handler([send](const httplib::Request&, httplib::Response& res) {
            if (res.body.empty()) {
                const bool missing = res.status == 404;
                send(res, api_error(res.status, missing ? "not_found" : "http_error",
                                    missing ? "no such endpoint" : "HTTP status " + std::to_string(res.status)));
            }
        });
        srv_.set_exception_handler([send](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
            std::string what = "unknown failure";
            try {
                std::rethrow_exception(ep);
            } catch (const std::exception& e) {
                what = e.what();
            } catch (...) {
            }
            send(res, api_error(500, "internal", what));
        });
    }

    Service& service() noexcept { return svc_; }

    // Returns the bound port; port 0 picks a free one.
    int bind(const std::string& host, int port) {
        if (port == 0) return srv_.bind_to_any_port(host);
        return srv_.bind_to_port(host, port) ? port : -1;
    }
    bool listen_after_bind() { return srv_.listen_after_bind(); }
    void stop() { srv_.stop(); }
    void wait_until_ready() { srv_.wait_until_ready(); }

private:
    Service svc_;
    httplib::Server srv_;
};

}  // namespace geontd
