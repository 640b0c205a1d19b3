#include <gtest/gtest.h>

#include <random>

#include "geontd/encoding.hpp"

using namespace geontd;

namespace {

// Inverse empirical CDF by counting: smallest observed v with #{x <= v} >= q n.
std::vector<double> counting_edges(const std::vector<double>& values, std::size_t bins) {
    std::vector<double> uniq(values);
    std::sort(uniq.begin(), uniq.end());
    uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
    const double n = static_cast<double>(values.size());
    std::vector<double> edges;
    for (std::size_t i = 1; i < bins; ++i) {
        for (double v : uniq) {
            const auto le = std::count_if(values.begin(), values.end(), [&](double x) { return x <= v; });
            if (static_cast<double>(le) * static_cast<double>(bins) >= static_cast<double>(i) * n) {
                if (v < uniq.back() && (edges.empty() || v > edges.back())) edges.push_back(v);
                break;
            }
        }
    }
    return edges;
}

}  // namespace

TEST(Bins, OneToHundredSplitsIntoQuarters) {
    std::vector<double> v;
    for (int i = 1; i <= 100; ++i) v.push_back(i);
    auto edges = equalize_bins(v, 4);
    EXPECT_EQ(edges, (std::vector<double>{25, 50, 75}));
    std::vector<int> count(4, 0);
    for (double x : v) ++count[bin_of(edges, x)];
    EXPECT_EQ(count, (std::vector<int>{25, 25, 25, 25}));
}

TEST(Bins, MatchesCountingOracleOnRandomCounts) {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 300; ++trial) {
        std::poisson_distribution<int> pois(0.5 + trial % 7);
        std::vector<double> v(1 + rng() % 60);
        for (double& x : v) x = pois(rng);
        const std::size_t b = 1 + trial % 6;
        auto edges = equalize_bins(v, b);
        EXPECT_EQ(edges, counting_edges(v, b)) << "trial " << trial;
        // right-closed bins are all non-empty
        std::vector<int> count(edges.size() + 1, 0);
        for (double x : v) ++count[bin_of(edges, x)];
        for (int c : count) EXPECT_GT(c, 0);
    }
}

TEST(Bins, DegenerateInputs) {
    EXPECT_TRUE(equalize_bins({}, 4).empty());
    EXPECT_TRUE(equalize_bins({3, 3, 3}, 4).empty());
    EXPECT_THROW(equalize_bins({1, 2}, 0), InputError);
    EXPECT_EQ(equalize_bins({0, 0, 0, 5}, 4), std::vector<double>{0});
}

TEST(Encoding, LabelsAndIds) {
    auto b = binned_encoding("crime", {1, 4});
    EXPECT_EQ(b.labels, (std::vector<std::string>{"<=1", "(1,4]", ">4"}));
    EXPECT_EQ(b.ids, (std::vector<int>{1, 2, 3}));
    EXPECT_EQ(binned_encoding("x", {}).labels, std::vector<std::string>{"all"});

    auto c = categorical_encoding("class", {"low", "none", "high"});
    EXPECT_EQ(c.labels, (std::vector<std::string>{"low", "high", "none"}));
    EXPECT_EQ(c.position_of_id(3), 2u);
    EXPECT_THROW(c.position_of_id(4), InputError);

    auto p = period_encoding("crime.period");
    EXPECT_EQ(p.labels, (std::vector<std::string>{"dawn", "morning", "afternoon", "night", "none"}));
    EXPECT_EQ(p.ids.back(), 5);
}

TEST(Encoding, BuildTensorCountsRowsPerCell) {
    std::vector<FeatureRow> rows{{"a", {0.0, std::string("low")}},
                                 {"b", {3.0, std::string("high")}},
                                 {"c", {0.0, std::string("low")}},
                                 {"d", {9.0, std::string("")}}};
    std::vector<ModeSpec> specs{{"n", ModeKind::BinnedCount, 2, {}, {}}, {"cls", ModeKind::Categorical, 0, {}, {}}};
    TensorDataset ds = build_tensor(rows, specs);
    EXPECT_EQ(ds.shape(), (Shape{2, 3}));
    EXPECT_EQ(ds.modes[1].labels, (std::vector<std::string>{"high", "low", "none"}));
    DenseTensor d = ds.tensor.to_dense();
    EXPECT_DOUBLE_EQ(d.sum(), 4.0);
    EXPECT_DOUBLE_EQ(d.at({0, 1}), 2.0);
    EXPECT_DOUBLE_EQ(d.at({1, 2}), 1.0);
    EXPECT_EQ(ds.site_index.at(Cell{0, 1}), (std::vector<std::string>{"a", "c"}));
    EXPECT_EQ(ds.site_cells[3], (Cell{1, 2}));
}

TEST(Encoding, ErrorsNameSiteAndMode) {
    std::vector<ModeSpec> specs{{"cls", ModeKind::Categorical, 0, {"low"}, {}}};
    try {
        build_tensor({{"s9", {std::string("mid")}}}, specs);
        FAIL() << "expected InputError";
    } catch (const InputError& e) {
        EXPECT_NE(std::string(e.what()).find("s9"), std::string::npos);
        EXPECT_NE(std::string(e.what()).find("cls"), std::string::npos);
    }
    EXPECT_THROW(build_tensor({{"s", {1.0, 2.0}}}, {{"n", ModeKind::BinnedCount, 2, {}, {}}}), InputError);
    EXPECT_THROW(build_tensor({}, {}), InputError);
}

TEST(Aggregate, CountsModesAndTieBreaks) {
    std::vector<ROI> rois{{"1", 0.0, 0.0, 200.0, {{"class", "low"}}, {}}, {"2", 0.1, 0.0, 200.0, {}, {}}};
    EventSource crimes{"crime", EventKind::CountWithPeriod,
                       {{0.0, 0.0, "", 3}, {0.001, 0.0, "", 1}, {0.0017, 0.0, "", 1}, {0.0, 0.001, "", 3}, {0.1, 0.0, "", 0},
                        {0.0019, 0.0, "", 0}}};
    EventSource kinds{"kind", EventKind::Categorical, {{0.0, 0.0, "theft", -1}, {0.0, 0.0, "assault", -1}}};
    auto rows = aggregate(rois, {crimes, kinds}, {"class"});
    ASSERT_EQ(rows.size(), 2u);
    // 0.0019 deg is about 211 m: outside; morning and night tie at 2, morning comes first
    EXPECT_EQ(std::get<double>(rows[0].values[0]), 4.0);
    EXPECT_EQ(std::get<std::string>(rows[0].values[1]), "morning");
    EXPECT_EQ(std::get<std::string>(rows[0].values[2]), "assault");
    EXPECT_EQ(std::get<std::string>(rows[0].values[3]), "low");
    EXPECT_EQ(std::get<double>(rows[1].values[0]), 1.0);
    EXPECT_EQ(std::get<std::string>(rows[1].values[1]), "dawn");
    EXPECT_EQ(std::get<std::string>(rows[1].values[2]), kNoneCategory);
    EXPECT_EQ(std::get<std::string>(rows[1].values[3]), "");
}

TEST(Aggregate, RadiusIsInclusive) {
    const double lat = 200.0 / kEarthRadiusM * 180.0 / std::numbers::pi;  // exactly 200 m north
    std::vector<ROI> rois{{"1", 0.0, 0.0, haversine_m(0, 0, lat, 0), {}, {}}};
    auto rows = aggregate(rois, {{"e", EventKind::Count, {{lat, 0.0, "", -1}}}});
    EXPECT_EQ(std::get<double>(rows[0].values[0]), 1.0);
}
