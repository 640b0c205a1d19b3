#include <gtest/gtest.h>

#include <numbers>

#include "geontd/geo.hpp"
#include "support.hpp"

using namespace geontd;
using testing_support::scratch;
using testing_support::write_text;

namespace {

// Great-circle distance from the angle between unit vectors.
double vector_angle_m(double lat1, double lon1, double lat2, double lon2) {
    constexpr double r = std::numbers::pi / 180.0;
    const double a[3] = {std::cos(lat1 * r) * std::cos(lon1 * r), std::cos(lat1 * r) * std::sin(lon1 * r), std::sin(lat1 * r)};
    const double b[3] = {std::cos(lat2 * r) * std::cos(lon2 * r), std::cos(lat2 * r) * std::sin(lon2 * r), std::sin(lat2 * r)};
    const double cx = a[1] * b[2] - a[2] * b[1], cy = a[2] * b[0] - a[0] * b[2], cz = a[0] * b[1] - a[1] * b[0];
    const double dot = a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    return kEarthRadiusM * std::atan2(std::sqrt(cx * cx + cy * cy + cz * cz), dot);
}

}  // namespace

TEST(Haversine, KnownDistances) {
    const double deg = kEarthRadiusM * std::numbers::pi / 180.0;
    EXPECT_NEAR(haversine_m(0, 0, 1, 0), deg, 1e-6);
    EXPECT_NEAR(haversine_m(0, 0, 0, 90), kEarthRadiusM * std::numbers::pi / 2, 1e-6);
    EXPECT_NEAR(haversine_m(0, 0, 0, 180), kEarthRadiusM * std::numbers::pi, 1e-3);
    EXPECT_NEAR(haversine_m(90, 0, -90, 0), kEarthRadiusM * std::numbers::pi, 1e-3);
    EXPECT_DOUBLE_EQ(haversine_m(-22.9, -43.2, -22.9, -43.2), 0.0);
    EXPECT_NEAR(haversine_m(10, 179.9, 10, -179.9), haversine_m(10, -0.1, 10, 0.1), 1e-6);
}

TEST(Haversine, MatchesVectorAngleOracle) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> la(-90, 90), lo(-180, 180);
    for (int i = 0; i < 2000; ++i) {
        const double a = la(rng), b = lo(rng), c = la(rng), d = lo(rng);
        EXPECT_NEAR(haversine_m(a, b, c, d), vector_angle_m(a, b, c, d), 1e-3);
        EXPECT_DOUBLE_EQ(haversine_m(a, b, c, d), haversine_m(c, d, a, b));
    }
}

TEST(SpatialIndex, QueryMatchesBruteForce) {
    std::mt19937_64 rng(5);
    struct Region {
        double lat, lon;
    };
    // mid-latitude city, the antimeridian and a polar cap
    for (Region c : {Region{-22.9, -43.2}, Region{0.0, 179.99}, Region{89.99, 0.0}}) {
        std::uniform_real_distribution<double> jitter(-0.02, 0.02);
        std::vector<std::pair<double, double>> pts;
        SpatialIndex idx(300.0);
        for (std::size_t i = 0; i < 1500; ++i) {
            double lat = std::clamp(c.lat + jitter(rng), -90.0, 90.0);
            double lon = c.lon + jitter(rng);
            if (lon > 180) lon -= 360;
            pts.emplace_back(lat, lon);
            idx.insert(i, lat, lon);
        }
        for (int q = 0; q < 50; ++q) {
            const auto [qa, qo] = pts[static_cast<std::size_t>(q) * 7];
            for (double r : {100.0, 300.0, 750.0}) {
                std::vector<std::size_t> got, want;
                idx.query(qa, qo, r, [&](std::size_t id, double) { got.push_back(id); });
                for (std::size_t i = 0; i < pts.size(); ++i)
                    if (haversine_m(qa, qo, pts[i].first, pts[i].second) <= r) want.push_back(i);
                EXPECT_EQ(got, want) << "center " << c.lat << "," << c.lon << " r=" << r;
            }
        }
    }
}

TEST(Csv, SplitsQuotedFields) {
    EXPECT_EQ(csv::split_line("a,\"b,c\",\"d\"\"e\",,"),
              (std::vector<std::string>{"a", "b,c", "d\"e", "", ""}));
    EXPECT_EQ(csv::split_line("x\r"), std::vector<std::string>{"x"});
    EXPECT_FALSE(csv::parse_double("1.5x"));
    EXPECT_FALSE(csv::parse_double(""));
    EXPECT_FALSE(csv::parse_double("inf"));
    EXPECT_DOUBLE_EQ(*csv::parse_double(" -2.25 "), -2.25);
}

TEST(Sites, NumericIdsSortNumericallyBeforeText) {
    std::vector<std::string> ids{"b", "10", "2", "a", "1"};
    std::sort(ids.begin(), ids.end(), site_id_less);
    EXPECT_EQ(ids, (std::vector<std::string>{"1", "2", "10", "a", "b"}));
}

TEST(Sites, LoadReportsRowDiagnostics) {
    auto dir = scratch("geo_sites");
    auto p = write_text(dir / "sites.csv",
                        "Site_ID,Lat,Lon,Class\n"
                        "1,-22.9,-43.2,low\n"
                        "2,95,-43.2,low\n"
                        "3,-22.9\n"
                        ",-22.9,-43.2,low\n"
                        "1,-22.8,-43.2,high\n"
                        "\n"
                        "4,abc,-43.2,low\n"
                        "5,-22.7,-43.1,high\n");
    SiteLoad s = load_sites(p.string());
    ASSERT_EQ(s.sites.size(), 2u);
    EXPECT_EQ(s.sites[1].site_id, "5");
    EXPECT_EQ(s.sites[1].attributes.at("class"), "high");
    std::vector<std::size_t> rows;
    for (const auto& d : s.diagnostics) rows.push_back(d.row);
    EXPECT_EQ(rows, (std::vector<std::size_t>{3, 4, 5, 6, 8}));
    EXPECT_THROW(load_sites((dir / "missing.csv").string()), InputError);
    EXPECT_THROW(load_sites(write_text(dir / "bad.csv", "id,lat,lon\n").string()), InputError);
}

TEST(Events, SchemaInferenceAndPeriods) {
    auto dir = scratch("geo_events");
    auto plain = load_events(write_text(dir / "a.csv", "lat,lon\n1,2\n3,4\n").string(), "a");
    EXPECT_EQ(plain.source.kind, EventKind::Count);
    EXPECT_EQ(plain.source.records.size(), 2u);

    auto cat = load_events(write_text(dir / "b.csv", "lat,lon,category\n1,2,x\n1,2,\n").string(), "b");
    EXPECT_EQ(cat.source.kind, EventKind::Categorical);
    EXPECT_EQ(cat.source.records.size(), 1u);
    EXPECT_EQ(cat.diagnostics.size(), 1u);

    auto per = load_events(write_text(dir / "c.csv", "lat,lon,period\n1,2,Night\n1,2,2\n1,2,noon\n").string(), "c");
    EXPECT_EQ(per.source.kind, EventKind::CountWithPeriod);
    ASSERT_EQ(per.source.records.size(), 2u);
    EXPECT_EQ(per.source.records[0].period, 3);
    EXPECT_EQ(per.source.records[1].period, 1);
    EXPECT_EQ(per.diagnostics.size(), 1u);

    EXPECT_THROW(load_events((dir / "a.csv").string(), "a", EventKind::Categorical), InputError);
    EXPECT_THROW(parse_event_kind("histogram"), InputError);
}

TEST(Rois, OverlappingSitesAreAbsorbedByNearestEarlierRoi) {
    // 0.001 degree of latitude is about 111 m
    std::vector<SiteRecord> sites{{"3", 0.0030, 0.0, {}}, {"1", 0.0, 0.0, {}}, {"2", 0.0040, 0.0, {}},
                                  {"10", 0.0100, 0.0, {}}, {"4", 0.0050, 0.0, {}}};
    auto rois = build_rois(sites, 200.0);
    std::vector<std::string> kept;
    for (const auto& r : rois) kept.push_back(r.site_id);
    // 1 kept; 2 is 444 m from 1 and kept; 3 is 111 m from 2 and 333 m from 1: absorbed by 2;
    // 4 is 111 m from 2; 10 is 667 m from 2 and kept
    EXPECT_EQ(kept, (std::vector<std::string>{"1", "2", "10"}));
    EXPECT_EQ(rois[1].absorbed, (std::vector<std::string>{"3", "4"}));
    EXPECT_TRUE(rois[0].absorbed.empty());
    EXPECT_THROW(build_rois(sites, 0.0), InputError);
}

TEST(Rois, MatchesQuadraticSweepOracle) {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> u(-0.03, 0.03);
    std::vector<SiteRecord> sites;
    for (int i = 0; i < 600; ++i) sites.push_back({std::to_string(i), -22.9 + u(rng), -43.2 + u(rng), {}});
    const double r = 200.0;
    auto rois = build_rois(sites, r);

    std::vector<const SiteRecord*> accepted;
    std::map<std::string, std::vector<std::string>> absorbed;
    for (const auto& s : sites) {  // already in ascending numeric id order
        const SiteRecord* host = nullptr;
        double best = 0;
        for (const SiteRecord* a : accepted) {
            const double d = haversine_m(s.lat, s.lon, a->lat, a->lon);
            if (d < 2 * r && (!host || d < best)) {
                host = a;
                best = d;
            }
        }
        if (host)
            absorbed[host->site_id].push_back(s.site_id);
        else
            accepted.push_back(&s);
    }
    ASSERT_EQ(rois.size(), accepted.size());
    for (std::size_t i = 0; i < rois.size(); ++i) {
        EXPECT_EQ(rois[i].site_id, accepted[i]->site_id);
        EXPECT_EQ(rois[i].absorbed, absorbed[rois[i].site_id]);
    }
}
