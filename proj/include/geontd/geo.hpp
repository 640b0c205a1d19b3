#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "geontd/errors.hpp"

namespace geontd {

inline constexpr double kEarthRadiusM = 6371000.0;

inline double haversine_m(double lat1, double lon1, double lat2, double lon2) {
    constexpr double rad = std::numbers::pi / 180.0;
    const double dlat = (lat2 - lat1) * rad;
    const double dlon = (lon2 - lon1) * rad;
    const double a = std::sin(dlat / 2) * std::sin(dlat / 2) +
                     std::cos(lat1 * rad) * std::cos(lat2 * rad) * std::sin(dlon / 2) * std::sin(dlon / 2);
    return 2.0 * kEarthRadiusM * std::asin(std::min(1.0, std::sqrt(a)));
}

struct Diagnostic {
    std::string file;
    std::size_t row = 0;  // 1-based line number in the file, header is line 1
    std::string message;
};

inline std::string to_string(const Diagnostic& d) {
    return d.file + ":" + std::to_string(d.row) + ": " + d.message;
}

// ---- CSV ---------------------------------------------------------------------------------

namespace csv {

inline std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

inline std::string trim(std::string s) {
    auto not_space = [](unsigned char c) { return !std::isspace(c); };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
    s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
    return s;
}

inline std::optional<double> parse_double(const std::string& raw) {
    std::string s = trim(raw);
    if (s.empty()) return std::nullopt;
    double v = 0.0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

struct Table {
    std::vector<std::string> header;
    std::vector<std::pair<std::size_t, std::vector<std::string>>> rows;  // (line number, fields)

    std::optional<std::size_t> column(const std::string& name) const {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return i;
        return std::nullopt;
    }
};

inline Table read(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path);
    Table t;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        auto fields = split_line(line);
        for (auto& f : fields) f = trim(f);
        if (t.header.empty()) {
            for (auto& f : fields) {
                std::transform(f.begin(), f.end(), f.begin(), [](unsigned char c) { return std::tolower(c); });
            }
            t.header = std::move(fields);
        } else {
            t.rows.emplace_back(lineno, std::move(fields));
        }
    }
    if (t.header.empty()) throw InputError(path + ": empty file, expected a header row");
    return t;
}

}  // namespace csv

// ---- sites and events --------------------------------------------------------------------

struct SiteRecord {
    std::string site_id;
    double lat = 0.0;
    double lon = 0.0;
    std::map<std::string, std::string> attributes;
};

// Numeric ids compare numerically, anything else lexicographically; numeric ids sort first.
inline bool site_id_less(const std::string& a, const std::string& b) {
    auto numeric = [](const std::string& s) {
        return !s.empty() && s.size() < 19 && std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); });
    };
    const bool na = numeric(a), nb = numeric(b);
    if (na && nb) {
        const long long x = std::stoll(a), y = std::stoll(b);
        return x != y ? x < y : a < b;
    }
    if (na != nb) return na;
    return a < b;
}

inline bool valid_coordinate(double lat, double lon) {
    return lat >= -90.0 && lat <= 90.0 && lon >= -180.0 && lon <= 180.0;
}

struct SiteLoad {
    std::vector<SiteRecord> sites;
    std::vector<Diagnostic> diagnostics;
};

inline SiteLoad load_sites(const std::string& path) {
    csv::Table t = csv::read(path);
    auto id_col = t.column("site_id"), lat_col = t.column("lat"), lon_col = t.column("lon");
    if (!id_col || !lat_col || !lon_col)
        throw InputError(path + ": sites header must contain site_id, lat and lon");
    SiteLoad out;
    std::map<std::string, bool> seen;
    for (auto& [lineno, f] : t.rows) {
        if (f.size() != t.header.size()) {
            out.diagnostics.push_back({path, lineno, "expected " + std::to_string(t.header.size()) + " fields, found " +
                                                         std::to_string(f.size())});
            continue;
        }
        const std::string& id = f[*id_col];
        auto lat = csv::parse_double(f[*lat_col]);
        auto lon = csv::parse_double(f[*lon_col]);
        if (id.empty()) {
            out.diagnostics.push_back({path, lineno, "empty site_id"});
            continue;
        }
        if (!lat || !lon || !valid_coordinate(*lat, *lon)) {
            out.diagnostics.push_back({path, lineno, "site " + id + ": invalid coordinates"});
            continue;
        }
        if (seen[id]) {
            out.diagnostics.push_back({path, lineno, "duplicate site_id " + id + ", row skipped"});
            continue;
        }
        seen[id] = true;
        SiteRecord s{id, *lat, *lon, {}};
        for (std::size_t c = 0; c < f.size(); ++c)
            if (c != *id_col && c != *lat_col && c != *lon_col) s.attributes[t.header[c]] = f[c];
        out.sites.push_back(std::move(s));
    }
    return out;
}

enum class EventKind { Count, Categorical, CountWithPeriod };

inline const char* to_string(EventKind k) {
    switch (k) {
        case EventKind::Count: return "count";
        case EventKind::Categorical: return "categorical-indicator";
        case EventKind::CountWithPeriod: return "count-with-period";
    }
    return "?";
}

inline EventKind parse_event_kind(const std::string& s) {
    if (s == "count") return EventKind::Count;
    if (s == "categorical-indicator" || s == "categorical") return EventKind::Categorical;
    if (s == "count-with-period") return EventKind::CountWithPeriod;
    throw InputError("unknown event source kind '" + s + "'");
}

// Fixed period vocabulary; ids are position + 1.
inline const std::array<std::string, 5>& period_names() {
    static const std::array<std::string, 5> names{"dawn", "morning", "afternoon", "night", "none"};
    return names;
}

inline std::optional<int> parse_period(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    const auto& names = period_names();
    for (int i = 0; i < 4; ++i)
        if (s == names[i] || s == std::to_string(i + 1)) return i;
    return std::nullopt;
}

struct EventRecord {
    double lat = 0.0;
    double lon = 0.0;
    std::string category;
    int period = -1;  // index into period_names(), -1 when absent
};

struct EventSource {
    std::string name;
    EventKind kind = EventKind::Count;
    std::vector<EventRecord> records;
};

struct EventLoad {
    EventSource source;
    std::vector<Diagnostic> diagnostics;
};

// Schema is inferred from the header: lat,lon[,category][,period].
// A declared kind must be consistent with the columns that are present.
inline EventLoad load_events(const std::string& path, const std::string& name,
                             std::optional<EventKind> declared = std::nullopt) {
    csv::Table t = csv::read(path);
    auto lat_col = t.column("lat"), lon_col = t.column("lon");
    auto cat_col = t.column("category"), per_col = t.column("period");
    if (!lat_col || !lon_col) throw InputError(path + ": events header must contain lat and lon");
    EventKind kind = per_col ? EventKind::CountWithPeriod : (cat_col ? EventKind::Categorical : EventKind::Count);
    if (declared) {
        if (*declared == EventKind::Categorical && !cat_col)
            throw InputError(path + ": categorical-indicator source needs a category column");
        if (*declared == EventKind::CountWithPeriod && !per_col)
            throw InputError(path + ": count-with-period source needs a period column");
        kind = *declared;
    }
    EventLoad out;
    out.source.name = name;
    out.source.kind = kind;
    for (auto& [lineno, f] : t.rows) {
        if (f.size() != t.header.size()) {
            out.diagnostics.push_back({path, lineno, "expected " + std::to_string(t.header.size()) + " fields, found " +
                                                         std::to_string(f.size())});
            continue;
        }
        auto lat = csv::parse_double(f[*lat_col]);
        auto lon = csv::parse_double(f[*lon_col]);
        if (!lat || !lon || !valid_coordinate(*lat, *lon)) {
            out.diagnostics.push_back({path, lineno, "invalid coordinates"});
            continue;
        }
        EventRecord r{*lat, *lon, {}, -1};
        if (kind == EventKind::Categorical) {
            r.category = f[*cat_col];
            if (r.category.empty()) {
                out.diagnostics.push_back({path, lineno, "empty category"});
                continue;
            }
        }
        if (kind == EventKind::CountWithPeriod) {
            auto p = parse_period(f[*per_col]);
            if (!p) {
                out.diagnostics.push_back({path, lineno, "unknown period '" + f[*per_col] + "'"});
                continue;
            }
            r.period = *p;
        }
        out.source.records.push_back(std::move(r));
    }
    return out;
}

// ---- spatial lookup ----------------------------------------------------------------------

// Uniform grid over 3-D unit-sphere coordinates; chord length is monotone in arc length,
// so neighbour-cell queries are exact everywhere including near the poles.
class SpatialIndex {
public:
    explicit SpatialIndex(double radius_m) : cell_(chord(std::max(radius_m, 1e-3))) {}

    void insert(std::size_t id, double lat, double lon) {
        pts_.push_back({lat, lon});
        ids_.push_back(id);
        buckets_[key(cell_of(lat, lon))].push_back(pts_.size() - 1);
    }

    // Calls fn(id, distance) for every point within radius_m (inclusive), in insertion order.
    template <class Fn>
    void query(double lat, double lon, double radius_m, Fn&& fn) const {
        const int span = static_cast<int>(std::ceil(chord(radius_m) / cell_));
        auto c = cell_of(lat, lon);
        std::vector<std::size_t> hits;
        for (int dx = -span; dx <= span; ++dx)
            for (int dy = -span; dy <= span; ++dy)
                for (int dz = -span; dz <= span; ++dz) {
                    auto it = buckets_.find(key({c[0] + dx, c[1] + dy, c[2] + dz}));
                    if (it == buckets_.end()) continue;
                    for (std::size_t p : it->second) hits.push_back(p);
                }
        std::sort(hits.begin(), hits.end());
        for (std::size_t p : hits) {
            const double d = haversine_m(lat, lon, pts_[p][0], pts_[p][1]);
            if (d <= radius_m) fn(ids_[p], d);
        }
    }

private:
    static double chord(double arc_m) { return 2.0 * std::sin(std::min(arc_m / (2.0 * kEarthRadiusM), 1.5)); }

    std::array<long long, 3> cell_of(double lat, double lon) const {
        constexpr double rad = std::numbers::pi / 180.0;
        const double x = std::cos(lat * rad) * std::cos(lon * rad);
        const double y = std::cos(lat * rad) * std::sin(lon * rad);
        const double z = std::sin(lat * rad);
        return {static_cast<long long>(std::floor(x / cell_)), static_cast<long long>(std::floor(y / cell_)),
                static_cast<long long>(std::floor(z / cell_))};
    }
    static std::string key(const std::array<long long, 3>& c) {
        return std::to_string(c[0]) + "," + std::to_string(c[1]) + "," + std::to_string(c[2]);
    }

    double cell_;
    std::vector<std::array<double, 2>> pts_;
    std::vector<std::size_t> ids_;
    std::unordered_map<std::string, std::vector<std::size_t>> buckets_;
};

// ---- regions of interest -----------------------------------------------------------------

struct ROI {
    std::string site_id;
    double lat = 0.0;
    double lon = 0.0;
    double radius_m = 200.0;
    std::map<std::string, std::string> attributes;
    std::vector<std::string> absorbed;  // later sites whose circle overlapped this one
};

// Sweep sites in ascending site_id. A site whose circle overlaps an accepted ROI
// (center distance < 2r) is absorbed by the nearest such ROI, earliest on ties.
inline std::vector<ROI> build_rois(std::vector<SiteRecord> sites, double radius_m = 200.0) {
    if (!(radius_m > 0.0) || !std::isfinite(radius_m)) throw InputError("ROI radius must be positive");
    std::stable_sort(sites.begin(), sites.end(),
                     [](const SiteRecord& a, const SiteRecord& b) { return site_id_less(a.site_id, b.site_id); });
    std::vector<ROI> rois;
    SpatialIndex index(2.0 * radius_m);
    for (auto& s : sites) {
        std::optional<std::size_t> host;
        double best = 0.0;
        index.query(s.lat, s.lon, 2.0 * radius_m, [&](std::size_t id, double d) {
            if (d >= 2.0 * radius_m) return;
            if (!host || d < best) {
                host = id;
                best = d;
            }
        });
        if (host) {
            rois[*host].absorbed.push_back(s.site_id);
            continue;
        }
        index.insert(rois.size(), s.lat, s.lon);
        rois.push_back(ROI{s.site_id, s.lat, s.lon, radius_m, std::move(s.attributes), {}});
    }
    return rois;
}

}  // namespace geontd
