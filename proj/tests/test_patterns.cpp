#include <gtest/gtest.h>

#include <random>

#include "geontd/patterns.hpp"
#include "oracles.hpp"

using namespace geontd;

namespace {

Signature sig(std::vector<int> ids, double w = 1.0) { return Signature{std::move(ids), w, {}}; }

}  // namespace

TEST(Emd, CumulativeDifferenceExamples) {
    EXPECT_DOUBLE_EQ(emd(std::vector<int>{1, 0, 0}, std::vector<int>{0, 0, 1}), 2.0);
    EXPECT_DOUBLE_EQ(emd(std::vector<int>{2, 2}, std::vector<int>{2, 2}), 0.0);
    EXPECT_DOUBLE_EQ(emd(std::vector<int>{3, 1}, std::vector<int>{1, 3}), 2.0);
    EXPECT_THROW(emd(std::vector<int>{1}, std::vector<int>{1, 2}), InputError);
}

TEST(Emd, EqualsTransportLpOnRandomEqualMassPairs) {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t len = 1 + rng() % 10;
        std::vector<int> a(len, 0), b(len, 0);
        const int mass = static_cast<int>(rng() % 20);
        for (int u = 0; u < mass; ++u) {
            ++a[rng() % len];
            ++b[rng() % len];
        }
        EXPECT_EQ(emd(a, b), static_cast<double>(oracle::transport_cost(a, b))) << "trial " << trial;
    }
}

TEST(Emd, IsAMetric) {
    std::mt19937_64 rng(1);
    for (int t = 0; t < 200; ++t) {
        std::vector<int> a(5), b(5), c(5);
        for (std::size_t i = 0; i < 5; ++i) {
            a[i] = static_cast<int>(rng() % 5);
            b[i] = static_cast<int>(rng() % 5);
            c[i] = static_cast<int>(rng() % 5);
        }
        EXPECT_EQ(emd(a, b), emd(b, a));
        EXPECT_LE(emd(a, c), emd(a, b) + emd(b, c));
        EXPECT_EQ(emd(a, a), 0.0);
    }
}

TEST(CoreSignatures, ArgmaxThresholdAndOrdering) {
    NTDModel m;
    m.core = DenseTensor(Shape{2, 2}, std::vector<double>{5.0, 0.0, 1.0, 5.0});
    m.factors = {DenseMatrix(3, 2, {0.1, 0.7, 0.8, 0.2, 0.1, 0.1}), DenseMatrix(2, 2, {0.5, 0.9, 0.5, 0.1})};
    std::vector<ModeEncoding> modes{binned_encoding("a", {1, 2}), binned_encoding("b", {1})};
    auto sigs = core_signatures(m, modes, 512, 1e-6);
    ASSERT_EQ(sigs.size(), 3u);
    // equal weights keep core order; factor ties pick the first row
    EXPECT_EQ(sigs[0].ids, (std::vector<int>{2, 1}));
    EXPECT_EQ(sigs[1].ids, (std::vector<int>{1, 1}));
    EXPECT_EQ(sigs[2].ids, (std::vector<int>{1, 1}));
    EXPECT_DOUBLE_EQ(sigs[2].weight, 1.0);
    EXPECT_EQ(core_signatures(m, modes, 512, 0.5).size(), 2u);
    EXPECT_EQ(core_signatures(m, modes, 1, 1e-6).size(), 1u);
    EXPECT_THROW(core_signatures(m, {modes[0]}, 512), InputError);
}

TEST(Clustering, MatchesNaiveAverageLinkage) {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 60; ++trial) {
        const std::size_t n = 2 + rng() % 25;
        std::vector<Signature> sigs;
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<int> ids(6);
            for (int& v : ids) v = 1 + static_cast<int>(rng() % 1000);
            sigs.push_back(sig(ids));
        }
        const std::size_t m = 1 + rng() % n;
        auto got = cluster_signatures(sigs, m);
        auto want = oracle::naive_average_linkage(n, m, [&](std::size_t a, std::size_t b) { return emd(sigs[a], sigs[b]); });
        EXPECT_EQ(got.clusters, want) << "trial " << trial;
    }
}

TEST(Clustering, TiesMergeSmallestSlotsFirst) {
    // d(0,1) == d(1,2) == 2: the pair (0,1) goes first
    std::vector<Signature> sigs{sig({0}), sig({2}), sig({4})};
    auto r = cluster_signatures(sigs, 2);
    ASSERT_EQ(r.clusters.size(), 2u);
    EXPECT_EQ(r.clusters[0], (std::vector<std::size_t>{0, 1}));
    EXPECT_EQ(r.clusters[1], (std::vector<std::size_t>{2}));
    // the merged cluster keeps slot 0, so later ties against it still prefer it
    std::vector<Signature> more{sig({0}), sig({2}), sig({7}), sig({9})};
    auto q = cluster_signatures(more, 2);
    EXPECT_EQ(q.clusters, (std::vector<std::vector<std::size_t>>{{0, 1}, {2, 3}}));
}

TEST(Clustering, MoreClustersThanSignaturesGivesSingletons) {
    std::vector<Signature> sigs{sig({1}), sig({2})};
    auto r = cluster_signatures(sigs, 5);
    EXPECT_EQ(r.clusters.size(), 2u);
    EXPECT_EQ(r.diagnostics.size(), 1u);
    EXPECT_TRUE(cluster_signatures({}, 2).clusters.empty());
    EXPECT_THROW(cluster_signatures(sigs, 0), InputError);
}

TEST(Medoid, MinimizesTotalEmdWithTieBreaks) {
    std::vector<Signature> s{sig({1, 1}, 1.0), sig({2, 2}, 1.0), sig({3, 3}, 1.0)};
    EXPECT_EQ(medoid(s, {0, 1, 2}), 1u);
    std::vector<Signature> t{sig({1, 1}, 1.0), sig({3, 3}, 2.0)};
    EXPECT_EQ(medoid(t, {0, 1}), 1u);
    std::vector<Signature> u{sig({3, 1}, 1.0), sig({1, 3}, 1.0)};
    EXPECT_EQ(medoid(u, {0, 1}), 1u);
    EXPECT_THROW(medoid(u, {}), InputError);
}

TEST(Assign, NearestMedoidLowestIndexOnTies) {
    std::vector<Signature> meds{sig({1, 1}), sig({3, 3})};
    auto a = assign({sig({1, 1}), sig({2, 2}), sig({3, 2}), sig({4, 4})}, meds);
    EXPECT_EQ(a, (std::vector<std::size_t>{0, 0, 1, 1}));
    EXPECT_THROW(nearest(sig({1}), {}), InputError);
}

TEST(ExtractPatterns, EverySiteGetsAPattern) {
    std::vector<FeatureRow> rows;
    std::mt19937_64 rng(4);
    for (int i = 0; i < 200; ++i) {
        const bool hi = i % 2 == 0;
        rows.push_back({std::to_string(i), {double(hi ? 5 + rng() % 3 : rng() % 2), double(hi ? 5 + rng() % 3 : rng() % 2),
                                            std::string(hi ? "a" : "b")}});
    }
    TensorDataset ds = build_tensor(rows, {{"x", ModeKind::BinnedCount, 3, {}, {}},
                                           {"y", ModeKind::BinnedCount, 3, {}, {}},
                                           {"c", ModeKind::Categorical, 0, {}, {}}});
    NTDConfig nc;
    nc.ranks = {2, 2, 2};
    NTDModel m = fit_ntd(ds.tensor, nc);
    for (std::size_t clusters : {1u, 2u}) {
        PatternSet ps = extract_patterns(m, ds, {clusters, 512, 1e-6});
        EXPECT_EQ(ps.medoids.size(), std::min(clusters, ps.core_signatures.size()));
        ASSERT_EQ(ps.site_pattern.size(), 200u);
        for (std::size_t p : ps.site_pattern) EXPECT_LT(p, ps.medoids.size());
        if (clusters == 1)
            for (std::size_t p : ps.site_pattern) EXPECT_EQ(p, 0u);
    }
}
