#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "blockage/residence.hpp"
#include "blockage/renewal.hpp"
#include "oracles.hpp"

using namespace blockage;
using namespace blockage::residence;

namespace {

geometry::BlockageZone baseline_zone() { return geometry::build_zone(geometry::LinkGeometry{}); }

void expect_valid(const DistributionTable& t) {
  EXPECT_NO_THROW(t.validate());
  EXPECT_DOUBLE_EQ(t(0.0), 0.0);
  EXPECT_NEAR(t(t.support_max()), 1.0, 1e-9);
}

}  // namespace

TEST(DistanceS1, BaselineShape) {
  const auto t = distance_cdf_s1(baseline_zone());
  EXPECT_NEAR(t.support_max(), 0.5774, 1e-4);
  EXPECT_NEAR(t.left_limit(t.support_max()), 0.356, 1e-3);
  ASSERT_EQ(t.atoms().size(), 1u);
  EXPECT_NEAR(t.atoms()[0].mass, 0.644, 1e-3);
  EXPECT_NEAR(t.atoms()[0].location, 1.0 / std::sqrt(3.0), 1e-12);
  EXPECT_DOUBLE_EQ(t(0.0), 0.0);
  expect_valid(t);
}

TEST(DistanceS1, ZeroAngleIsOneAtomAtTheWidth) {
  // blockers walk along X and the zone stands along Y: every crossing is d_m long
  geometry::LinkGeometry l;
  l.alpha = 0.0;
  const auto t = distance_cdf_s1(geometry::build_zone(l));
  ASSERT_EQ(t.atoms().size(), 1u);
  EXPECT_NEAR(t.atoms()[0].location, l.blocker_diameter, 1e-12);
  EXPECT_NEAR(t.atoms()[0].mass, 1.0, 1e-12);
  EXPECT_NEAR(mean_of(t), l.blocker_diameter, 1e-12);
}

TEST(DistanceS1, SteepAngleConcentratesAtTheLength) {
  geometry::LinkGeometry l;
  l.distance = 1.0;
  l.alpha = std::numbers::pi / 2.0 - 1e-6;
  const auto z = geometry::build_zone(l);
  const auto t = distance_cdf_s1(z);
  EXPECT_NEAR(t.support_max(), z.length, 1e-5);
  EXPECT_GT(t.atom_mass(), 0.999);
}

TEST(DistanceS1, MatchesEntrySamplingOracle) {
  const auto z = baseline_zone();
  const auto t = distance_cdf_s1(z);
  const auto samples = oracle::sidewalk_chords(z, 5.0, false, 0.0, 1'000'000, 21);
  EXPECT_LT(ks_statistic(samples, t), 0.01);
}

TEST(DistanceS2, TriangularLawAtMode) {
  for (double c : {0.5, 2.5, 4.0}) EXPECT_NEAR(triangular_cdf(c, 5.0, c), c / 5.0, 1e-14);
}

TEST(DistanceS2, CaseSelectionFollowsModePosition) {
  const auto z = baseline_zone();
  EXPECT_EQ(s2_case(z, 2.5), S2Case::zone_below_mode);
  EXPECT_EQ(s2_case(z, 2.2), S2Case::mode_near_top);
  EXPECT_EQ(s2_case(z, 1.6), S2Case::mode_inside);
  EXPECT_EQ(s2_case(z, 1.0), S2Case::mode_near_bottom);
  EXPECT_EQ(s2_case(z, 0.5), S2Case::zone_above_mode);
}

TEST(DistanceS2, MatchesTriangularSamplingOracleInEveryCase) {
  const auto z = baseline_zone();
  std::uint64_t seed = 100;
  for (double c : {2.5, 2.2, 1.6, 1.0, 0.5}) {
    const auto t = distance_cdf_s2(z, 5.0, c);
    expect_valid(t);
    const auto samples = oracle::sidewalk_chords(z, 5.0, true, c, 1'000'000, ++seed);
    for (double x : {0.1, 0.2, 0.3, 0.45, 0.55}) {
      EXPECT_NEAR(t(x), oracle::ecdf(samples, x), 0.01) << "c=" << c << " x=" << x;
    }
    EXPECT_LT(ks_statistic(samples, t), 0.01) << "c=" << c;
  }
}

TEST(DistanceS2, OuterCasesReduceToUniform) {
  const auto z = baseline_zone();
  const auto s1 = distance_cdf_s1(z);
  for (double c : {z.y_high(), 3.0, 4.9, z.y_low() * 0.999, 0.3}) {
    const auto s2 = distance_cdf_s2(z, 5.0, c);
    for (std::size_t i = 0; i < s1.size(); i += 37) EXPECT_NEAR(s2.cdf()[i], s1.cdf()[i], 1e-6) << "c=" << c;
    EXPECT_NEAR(s2.atom_mass(), s1.atom_mass(), 1e-6);
  }
}

TEST(DistanceS2, ContinuousAcrossCaseBoundaries) {
  const auto z = baseline_zone();
  const double y_min = full_crossing_length(z) * std::cos(z.alpha) * std::sin(z.alpha);
  for (double b : {z.y_low(), z.y_low() + y_min, z.y_high() - y_min, z.y_high()}) {
    const auto below = distance_cdf_s2(z, 5.0, b - 1e-9);
    const auto at = distance_cdf_s2(z, 5.0, b);
    for (std::size_t i = 0; i < at.size(); i += 101) EXPECT_NEAR(below.cdf()[i], at.cdf()[i], 1e-7);
  }
}

TEST(DistanceS2, RejectsBadModeAndZonesOffTheSidewalk) {
  const auto z = baseline_zone();
  EXPECT_THROW(distance_cdf_s2(z, 5.0, 0.0), DomainError);
  EXPECT_THROW(distance_cdf_s2(z, 5.0, 5.0), DomainError);
  geometry::LinkGeometry l;
  l.distance = 6.0;  // Rx beyond the curb
  EXPECT_THROW(distance_cdf_s2(geometry::build_zone(l), 5.0, 2.5), DomainError);
}

TEST(DistanceS3, Weights) {
  for (auto [d, r] : {std::pair{0.5, 1.3324}, std::pair{2.0, 0.3}, std::pair{1.0, 1.0}}) {
    const auto w = s3_weights(d, r);
    EXPECT_NEAR(w.adjacent + w.opposite, 1.0, 1e-15);
  }
  const auto eq = s3_weights(1.0, 1.0);
  EXPECT_NEAR(eq.adjacent, 4.0 / 6.0, 1e-15);
  EXPECT_NEAR(eq.opposite, 2.0 / 6.0, 1e-15);
}

TEST(DistanceS3, MatchesChordSamplingOracleBothOrderings) {
  std::uint64_t seed = 7;
  for (auto [d, r] : {std::pair{0.5, 1.3324}, std::pair{1.5, 0.6}}) {
    const auto t = distance_cdf_s3(d, r);
    expect_valid(t);
    EXPECT_TRUE(t.atoms().empty());
    EXPECT_NEAR(t.support_max(), std::hypot(d, r), 1e-12);
    const auto samples = oracle::square_chords(d, r, 1'000'000, ++seed);
    for (int k = 1; k <= 10; ++k) {
      const double x = t.support_max() * k / 10.5;
      EXPECT_NEAR(t(x), oracle::ecdf(samples, x), 0.01) << "d=" << d << " r=" << r << " x=" << x;
    }
    EXPECT_LT(ks_statistic(samples, t), 0.01);
  }
}

TEST(ResidenceTime, ScalesWithSpeed) {
  const auto l = distance_cdf_s1(baseline_zone());
  const auto same = residence_time_cdf(l, 1.0);
  EXPECT_EQ(same.grid(), l.grid());
  EXPECT_EQ(same.cdf(), l.cdf());
  const auto fast = residence_time_cdf(l, 2.0);
  EXPECT_NEAR(mean_of(fast), 0.5 * mean_of(l), 1e-12);
  EXPECT_DOUBLE_EQ(fast.support_max(), l.support_max() / 2.0);
  EXPECT_NEAR(mean_of(l), 0.474, 1e-3);
}

TEST(EntryIntensity, Scenarios) {
  const auto z = baseline_zone();
  ScenarioConfig cfg;
  cfg.initial_rate = 0.0;
  EXPECT_EQ(entry_intensity(cfg, z), 0.0);
  cfg.initial_rate = 1.0;
  EXPECT_NEAR(entry_intensity(cfg, z), 0.281, 1e-3);
  cfg.kind = Scenario::s3;
  cfg.initial_rate = 0.7;
  EXPECT_DOUBLE_EQ(entry_intensity(cfg, z), 0.7);
  cfg.kind = Scenario::s2;
  cfg.initial_rate = 1.0;
  const double tri = triangular_cdf(z.y_high(), 5.0, 2.5) - triangular_cdf(z.y_low(), 5.0, 2.5);
  EXPECT_NEAR(entry_intensity(cfg, z), tri, 1e-15);
}

TEST(EntryIntensity, ZoneOffTheSidewalkIsAnError) {
  geometry::LinkGeometry l;
  l.distance = 6.0;
  ScenarioConfig cfg;
  cfg.link = l;
  EXPECT_THROW(entry_intensity(cfg, geometry::build_zone(l)), DomainError);
}

TEST(MeanOf, KnownLaws) {
  EXPECT_DOUBLE_EQ(mean_of(DistributionTable::point_mass(2.5)), 2.5);
  EXPECT_NEAR(mean_of(renewal::nonblocked_cdf(2.0)), 0.5, 1e-3);
}

TEST(DistributionTable, InvariantsOnRandomSweeps) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 300; ++k) {
    ScenarioConfig cfg;
    cfg.kind = static_cast<Scenario>(k % 3);
    cfg.link.alpha = 1.5 * u(rng);
    cfg.link.distance = 0.3 + 3.0 * u(rng);
    cfg.link.blocker_diameter = 0.2 + 0.6 * u(rng);
    cfg.link.sidewalk_width = 12.0;
    cfg.speed = 0.5 + u(rng);
    if (cfg.kind == Scenario::s2) cfg.mode = 0.5 + 11.0 * u(rng);
    const auto z = geometry::build_zone(cfg.link);
    if (z.y_low() < 0.0 || z.y_high() > cfg.link.sidewalk_width) continue;
    const auto t = residence_time_cdf(distance_cdf(cfg, z, 500), cfg.speed);
    ASSERT_NO_THROW(t.validate()) << "draw " << k;
    EXPECT_LE(t.atom_mass(), 1.0 + 1e-12);
    for (const auto& a : t.atoms()) {
      EXPECT_GT(a.mass, 0.0);
      EXPECT_LE(a.mass, 1.0);
    }
  }
}

TEST(DistributionTable, QuantileInvertsTheCdf) {
  const auto t = distance_cdf_s1(baseline_zone());
  EXPECT_NEAR(t.quantile(0.2), 0.2 / t(0.1) * 0.1, 1e-6);
  EXPECT_NEAR(t.quantile(0.9), t.support_max(), 1e-9);
}

TEST(DistributionTable, CsvCarriesAtomsAndHeader) {
  std::ostringstream os;
  write_csv(os, distance_cdf_s1(baseline_zone(), 5));
  const std::string s = os.str();
  EXPECT_EQ(s.rfind("# atoms: 0.57735", 0), 0u);
  EXPECT_NE(s.find("\nx,cdf\n"), std::string::npos);
}
