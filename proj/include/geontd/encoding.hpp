#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "geontd/errors.hpp"
#include "geontd/geo.hpp"
#include "geontd/tensor.hpp"

namespace geontd {

inline const std::string kNoneCategory = "none";

// Interior quantile edges at levels 1/B .. (B-1)/B using the inverse empirical CDF, so every
// edge is an observed value. Bins are right-closed: (e_{i-1}, e_i]. Duplicate edges collapse
// and an edge at the maximum is dropped, which keeps every bin non-empty.
inline std::vector<double> equalize_bins(std::vector<double> values, std::size_t bins = 4) {
    if (bins == 0) throw InputError("equalize_bins: need at least one bin");
    std::vector<double> edges;
    if (values.empty() || bins == 1) return edges;
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    for (std::size_t i = 1; i < bins; ++i) {
        const std::size_t rank = (i * n + bins - 1) / bins;  // ceil(i n / B), >= 1
        const double e = values[rank - 1];
        if (e >= values.back()) break;
        if (edges.empty() || e > edges.back()) edges.push_back(e);
    }
    return edges;
}

inline std::size_t bin_of(const std::vector<double>& edges, double v) {
    return static_cast<std::size_t>(std::lower_bound(edges.begin(), edges.end(), v) - edges.begin());
}

enum class ModeKind { BinnedCount, Categorical, Period };

inline const char* to_string(ModeKind k) {
    switch (k) {
        case ModeKind::BinnedCount: return "binned-count";
        case ModeKind::Categorical: return "categorical";
        case ModeKind::Period: return "period";
    }
    return "?";
}

struct ModeSpec {
    std::string name;
    ModeKind kind = ModeKind::BinnedCount;
    std::size_t bins = 4;
    std::vector<std::string> categories;       // declared order; inferred (sorted) when empty
    std::optional<std::vector<double>> edges;  // fixed edges instead of equalized ones
};

// Bijection between tensor positions (0-based) and semantic ids (1-based, ordered).
struct ModeEncoding {
    std::string name;
    ModeKind kind = ModeKind::BinnedCount;
    std::vector<double> edges;
    std::vector<std::string> labels;
    std::vector<int> ids;

    std::size_t size() const noexcept { return labels.size(); }
    int id_of(std::size_t position) const { return ids.at(position); }
    std::size_t position_of_id(int id) const {
        for (std::size_t i = 0; i < ids.size(); ++i)
            if (ids[i] == id) return i;
        throw InputError("mode " + name + ": unknown id " + std::to_string(id));
    }
};

namespace detail {
inline std::string fmt_num(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}
}  // namespace detail

inline ModeEncoding binned_encoding(const std::string& name, std::vector<double> edges) {
    ModeEncoding m{name, ModeKind::BinnedCount, std::move(edges), {}, {}};
    const std::size_t nb = m.edges.size() + 1;
    for (std::size_t i = 0; i < nb; ++i) {
        std::string label;
        if (nb == 1)
            label = "all";
        else if (i == 0)
            label = "<=" + detail::fmt_num(m.edges[0]);
        else if (i + 1 == nb)
            label = ">" + detail::fmt_num(m.edges.back());
        else
            label = "(" + detail::fmt_num(m.edges[i - 1]) + "," + detail::fmt_num(m.edges[i]) + "]";
        m.labels.push_back(label);
        m.ids.push_back(static_cast<int>(i + 1));
    }
    return m;
}

inline ModeEncoding categorical_encoding(const std::string& name, std::vector<std::string> categories) {
    ModeEncoding m{name, ModeKind::Categorical, {}, {}, {}};
    for (auto& c : categories)
        if (c != kNoneCategory) m.labels.push_back(c);
    m.labels.push_back(kNoneCategory);
    for (std::size_t i = 0; i < m.labels.size(); ++i) m.ids.push_back(static_cast<int>(i + 1));
    return m;
}

inline ModeEncoding period_encoding(const std::string& name) {
    ModeEncoding m{name, ModeKind::Period, {}, {}, {}};
    for (std::size_t i = 0; i < period_names().size(); ++i) {
        m.labels.push_back(period_names()[i]);
        m.ids.push_back(static_cast<int>(i + 1));
    }
    return m;
}

using FeatureValue = std::variant<double, std::string>;

// One retained site (or synthetic sample) with one raw value per mode.
struct FeatureRow {
    std::string id;
    std::vector<FeatureValue> values;
};

using Cell = std::vector<std::uint32_t>;

struct TensorDataset {
    std::vector<ModeEncoding> modes;
    SparseTensor tensor;
    std::vector<std::string> site_ids;         // in input order
    std::vector<Cell> site_cells;              // parallel to site_ids
    std::map<Cell, std::vector<std::string>> site_index;

    Shape shape() const { return tensor.shape(); }
};

inline std::size_t encode_value(const ModeEncoding& m, const FeatureValue& v, const std::string& row_id) {
    auto fail = [&](const std::string& why) -> std::size_t {
        throw InputError("site " + row_id + ", mode " + m.name + ": " + why);
    };
    switch (m.kind) {
        case ModeKind::BinnedCount: {
            if (!std::holds_alternative<double>(v)) return fail("expected a numeric value");
            return bin_of(m.edges, std::get<double>(v));
        }
        case ModeKind::Categorical:
        case ModeKind::Period: {
            if (!std::holds_alternative<std::string>(v)) return fail("expected a category");
            const std::string& s = std::get<std::string>(v).empty() ? kNoneCategory : std::get<std::string>(v);
            for (std::size_t i = 0; i < m.labels.size(); ++i)
                if (m.labels[i] == s) return i;
            return fail("category '" + s + "' is not in the declared vocabulary");
        }
    }
    return fail("unknown mode kind");
}

inline TensorDataset build_tensor(const std::vector<FeatureRow>& rows, const std::vector<ModeSpec>& specs) {
    if (specs.empty()) throw InputError("build_tensor: no modes declared");
    TensorDataset ds;
    for (std::size_t k = 0; k < specs.size(); ++k) {
        const ModeSpec& spec = specs[k];
        switch (spec.kind) {
            case ModeKind::BinnedCount: {
                if (spec.edges) {
                    ds.modes.push_back(binned_encoding(spec.name, *spec.edges));
                    break;
                }
                std::vector<double> vals;
                for (const auto& r : rows) {
                    if (r.values.size() != specs.size())
                        throw InputError("site " + r.id + ": has " + std::to_string(r.values.size()) +
                                         " values for " + std::to_string(specs.size()) + " modes");
                    if (!std::holds_alternative<double>(r.values[k]))
                        throw InputError("site " + r.id + ", mode " + spec.name + ": expected a numeric value");
                    vals.push_back(std::get<double>(r.values[k]));
                }
                ds.modes.push_back(binned_encoding(spec.name, equalize_bins(std::move(vals), spec.bins)));
                break;
            }
            case ModeKind::Categorical: {
                std::vector<std::string> cats = spec.categories;
                if (cats.empty()) {
                    std::set<std::string> seen;
                    for (const auto& r : rows)
                        if (k < r.values.size() && std::holds_alternative<std::string>(r.values[k])) {
                            const auto& s = std::get<std::string>(r.values[k]);
                            if (!s.empty() && s != kNoneCategory) seen.insert(s);
                        }
                    cats.assign(seen.begin(), seen.end());
                }
                ds.modes.push_back(categorical_encoding(spec.name, std::move(cats)));
                break;
            }
            case ModeKind::Period: ds.modes.push_back(period_encoding(spec.name)); break;
        }
    }

    Shape shape;
    for (const auto& m : ds.modes) shape.push_back(m.size());
    std::map<Cell, double> counts;
    for (const auto& r : rows) {
        if (r.values.size() != specs.size())
            throw InputError("site " + r.id + ": has " + std::to_string(r.values.size()) + " values for " +
                             std::to_string(specs.size()) + " modes");
        Cell cell(specs.size());
        for (std::size_t k = 0; k < specs.size(); ++k)
            cell[k] = static_cast<std::uint32_t>(encode_value(ds.modes[k], r.values[k], r.id));
        counts[cell] += 1.0;
        ds.site_ids.push_back(r.id);
        ds.site_cells.push_back(cell);
        ds.site_index[cell].push_back(r.id);
    }
    ds.tensor = SparseTensor(shape);
    for (const auto& [cell, c] : counts) ds.tensor.push(std::vector<std::size_t>(cell.begin(), cell.end()), c);
    return ds;
}

// ---- ROI aggregation ---------------------------------------------------------------------

// Raw per-ROI values in mode order: for each source, a count (count kinds), the modal
// category (categorical) and then the modal period (count-with-period); site attributes last.
inline std::vector<FeatureRow> aggregate(const std::vector<ROI>& rois, const std::vector<EventSource>& sources,
                                         const std::vector<std::string>& attribute_modes = {}) {
    std::vector<FeatureRow> rows(rois.size());
    for (std::size_t r = 0; r < rois.size(); ++r) rows[r].id = rois[r].site_id;
    for (const auto& src : sources) {
        const double radius = rois.empty() ? 200.0 : rois.front().radius_m;
        SpatialIndex index(radius);
        for (std::size_t e = 0; e < src.records.size(); ++e) index.insert(e, src.records[e].lat, src.records[e].lon);
        for (std::size_t r = 0; r < rois.size(); ++r) {
            std::size_t count = 0;
            std::map<std::string, std::size_t> cats;
            std::array<std::size_t, 4> periods{};
            index.query(rois[r].lat, rois[r].lon, rois[r].radius_m, [&](std::size_t e, double) {
                ++count;
                const EventRecord& rec = src.records[e];
                if (src.kind == EventKind::Categorical) ++cats[rec.category];
                if (src.kind == EventKind::CountWithPeriod && rec.period >= 0) ++periods[rec.period];
            });
            switch (src.kind) {
                case EventKind::Count: rows[r].values.emplace_back(static_cast<double>(count)); break;
                case EventKind::Categorical: {
                    std::string best = kNoneCategory;
                    std::size_t best_n = 0;
                    for (const auto& [c, k] : cats)  // std::map iterates lexicographically
                        if (k > best_n) {
                            best = c;
                            best_n = k;
                        }
                    rows[r].values.emplace_back(best);
                    break;
                }
                case EventKind::CountWithPeriod: {
                    rows[r].values.emplace_back(static_cast<double>(count));
                    int best = -1;
                    std::size_t best_n = 0;
                    for (int p = 0; p < 4; ++p)
                        if (periods[p] > best_n) {
                            best = p;
                            best_n = periods[p];
                        }
                    rows[r].values.emplace_back(best < 0 ? kNoneCategory : period_names()[best]);
                    break;
                }
            }
        }
    }
    for (const auto& attr : attribute_modes)
        for (std::size_t r = 0; r < rois.size(); ++r) {
            auto it = rois[r].attributes.find(attr);
            rows[r].values.emplace_back(it == rois[r].attributes.end() ? std::string() : it->second);
        }
    return rows;
}

}  // namespace geontd
