#include "msde/experiments.hpp"
#include "msde/trajectory_io.hpp"

#if __has_include(<nlohmann/json.hpp>)
#include <nlohmann/json.hpp>
#else
#include <json.hpp>
#endif

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t data_rows(const fs::path& csv) {
  std::istringstream in(slurp(csv));
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) ++n;
  return n - 1;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("msde_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string config_error(const std::string& text) {
  try {
    msde::ExperimentConfig::from_json(text);
  } catch (const msde::ConfigError& e) {
    return e.what();
  }
  return "";
}

TEST(ExperimentConfig, ParsesAndRoundTrips) {
  const auto c = msde::ExperimentConfig::from_json(R"({
    "experiment": "error_table",
    "manifold": {"kind": "ellipsoid", "a": 2, "b": 1.5, "c": 1},
    "n": 1000, "delta": 0.01, "seed": 7,
    "bandwidth": {"rule": "explicit", "h": 0.2},
    "base_points": {"scheme": "uniform_sphere", "count": 10}
  })");
  EXPECT_EQ(c.experiment, msde::ExperimentKind::ErrorTable);
  EXPECT_EQ(c.n, 1000u);
  EXPECT_EQ(c.bandwidth.kind, msde::BandwidthRule::Kind::Explicit);
  EXPECT_DOUBLE_EQ(c.bandwidth.h, 0.2);
  EXPECT_EQ(c.radius_law, msde::RadiusLaw::Chi);
  const auto again = msde::ExperimentConfig::from_json(c.to_json());
  EXPECT_EQ(again.to_json(), c.to_json());
  EXPECT_TRUE(again.manifold == c.manifold);
}

TEST(ExperimentConfig, RejectsMalformedInput) {
  EXPECT_FALSE(config_error("{").empty());
  EXPECT_FALSE(config_error(R"({"manifold": {"kind": "sphere"}})").empty());
  EXPECT_FALSE(config_error(R"({"experiment": "error_table", "bogus": 1})").empty());
  EXPECT_FALSE(config_error(R"({"experiment": "nope"})").empty());
  EXPECT_FALSE(config_error(R"({"experiment": "error_table", "n": -5})").empty());
  EXPECT_FALSE(config_error(R"({"experiment": "error_table", "delta": 0})").empty());
  EXPECT_FALSE(config_error(R"({"experiment": "error_table", "manifold": {"kind": "torus"}})").empty());
  EXPECT_FALSE(config_error(R"({"experiment": "clt_mc", "replicates": 4, "point": [0, 0, 1]})").empty());
  EXPECT_FALSE(config_error(R"({"experiment": "density_convergence", "ladder": []})").empty());
  EXPECT_FALSE(config_error(R"({"experiment": "error_table", "manifold": {"kind": "klein_bottle"}, "base_points": {"scheme": "uniform_sphere"}})").empty());
  EXPECT_FALSE(config_error(R"({"experiment": "error_table", "radius_law": "gamma"})").empty());
  EXPECT_TRUE(config_error(R"({"experiment": "error_table"})").empty());
  EXPECT_EQ(msde::ExperimentConfig::from_json(R"({"experiment": "error_table", "manifold": {"kind": "klein_bottle"}})")
                .base_points.kind,
            msde::BasePointScheme::Kind::UniformGrid);
}

TEST(BasePoints, SchemesProduceValidPoints) {
  msde::BasePointScheme grid;
  grid.kind = msde::BasePointScheme::Kind::UniformGrid;
  grid.rows = 4;
  grid.cols = 5;
  const auto k = msde::ManifoldSpec::klein_bottle(2.0, 1.0);
  const auto qs = msde::make_base_points(grid, k, 1);
  EXPECT_EQ(qs.size(), 20u);
  const auto w = msde::surface_weights(k, qs);
  for (double v : w) EXPECT_GT(v, 0.0);

  msde::BasePointScheme sph;
  sph.count = 50;
  const auto s = msde::ManifoldSpec::sphere();
  const auto ps = msde::make_base_points(sph, s, 2);
  ASSERT_EQ(ps.size(), 50u);
  for (const auto& q : ps) EXPECT_NEAR(q.coords.norm(), 1.0, 1e-12);
  const auto ws = msde::surface_weights(s, ps);
  double total = 0.0;
  for (double v : ws) total += v;
  EXPECT_NEAR(total, 4.0 * std::numbers::pi, 1e-12);
  EXPECT_EQ(msde::make_base_points(sph, s, 2).size(), ps.size());
  EXPECT_EQ(msde::make_base_points(sph, s, 2)[7].coords, ps[7].coords);
}

msde::ExperimentConfig smoke_error_table() {
  msde::ExperimentConfig c;
  c.experiment = msde::ExperimentKind::ErrorTable;
  c.manifold = msde::ManifoldSpec::sphere();
  c.n = 1000;
  c.seed = 5;
  c.bandwidth.kind = msde::BandwidthRule::Kind::Explicit;
  c.bandwidth.h = 0.3;
  c.base_points.count = 10;
  return c;
}

TEST(ErrorTable, SmokeRunWritesTenRows) {
  auto c = smoke_error_table();
  c.output_dir = scratch("error_table");
  const auto r = msde::run_error_table(c);
  EXPECT_EQ(r.points, 10u);
  EXPECT_EQ(data_rows(c.output_dir / "error_table.csv"), 10u);
  const auto j = nlohmann::json::parse(slurp(c.output_dir / "summary.json"));
  EXPECT_TRUE(j.contains("config"));
  EXPECT_DOUBLE_EQ(j.at("resolved").at("h").get<double>(), 0.3);
  EXPECT_EQ(j.at("resolved").at("radius_law").get<std::string>(), "chi");
  std::istringstream rows(slurp(c.output_dir / "error_table.csv"));
  std::string line;
  std::getline(rows, line);
  std::getline(rows, line);
  EXPECT_NE(line.find(",ok,"), std::string::npos) << line;
  fs::remove_all(c.output_dir);
}

TEST(ErrorTable, KleinSmokeRun) {
  auto c = smoke_error_table();
  c.manifold = msde::ManifoldSpec::klein_bottle(2.0, 1.0);
  c.base_points.kind = msde::BasePointScheme::Kind::UniformGrid;
  c.base_points.rows = 3;
  c.base_points.cols = 3;
  c.n = 5000;
  c.bandwidth.h = 0.5;
  const auto r = msde::run_error_table(c);
  EXPECT_EQ(r.points, 9u);
  EXPECT_EQ(r.failures + r.mu_E.count, 9u);
}

TEST(ErrorTable, OutputsIndependentOfWorkerCount) {
  auto c = smoke_error_table();
  c.n = 20000;
  c.base_points.count = 60;
  c.bandwidth.kind = msde::BandwidthRule::Kind::NeighborFraction;
  c.output_dir = scratch("det_1");
  c.threads = 1;
  msde::run_error_table(c);
  auto c4 = c;
  c4.output_dir = scratch("det_4");
  c4.threads = 4;
  msde::run_error_table(c4);
  for (const char* f : {"error_table.csv", "summary.json"})
    EXPECT_EQ(slurp(c.output_dir / f), slurp(c4.output_dir / f)) << f;
  fs::remove_all(c.output_dir);
  fs::remove_all(c4.output_dir);
}

TEST(Simulate, WritesReadableTrajectory) {
  msde::ExperimentConfig c;
  c.experiment = msde::ExperimentKind::Simulate;
  c.n = 500;
  c.stride = 3;
  c.seed = 9;
  c.output_dir = scratch("simulate");
  const auto r = msde::run_simulate(c);
  EXPECT_EQ(r.trajectory.size(), 501u);
  EXPECT_DOUBLE_EQ(r.trajectory.delta(), 0.03);
  EXPECT_TRUE(msde::read_trajectory(c.output_dir / "trajectory.bin") == r.trajectory);
  fs::remove_all(c.output_dir);
}

TEST(DensityConvergence, SmokeRunAndDegenerateLadder) {
  msde::ExperimentConfig c;
  c.experiment = msde::ExperimentKind::DensityConvergence;
  c.seed = 3;
  c.base_points.count = 50;
  c.ladder = {2000, 5000, 20000};
  c.output_dir = scratch("density");
  const auto r = msde::run_density_convergence(c);
  ASSERT_EQ(r.l2_error.size(), 3u);
  EXPECT_EQ(data_rows(c.output_dir / "density_convergence.csv"), 3u);
  EXPECT_EQ(r.l2_error[2], 0.0);  // the reference itself
  EXPECT_FALSE(r.in_fit[2]);
  EXPECT_GT(r.l2_error[0], r.l2_error[1]);
  fs::remove_all(c.output_dir);

  auto same = c;
  same.output_dir.clear();
  same.ladder = {20000};
  const auto d = msde::run_density_convergence(same);
  ASSERT_EQ(d.l2_error.size(), 1u);
  EXPECT_EQ(d.l2_error[0], 0.0);
}

TEST(CltMonteCarlo, SmokeRunWritesOneRowPerReplicate) {
  msde::ExperimentConfig c;
  c.experiment = msde::ExperimentKind::CltMonteCarlo;
  c.n = 5000;
  c.seed = 4;
  c.replicates = 8;
  c.point = {0, 0, 1};
  c.bandwidth.kind = msde::BandwidthRule::Kind::Explicit;
  c.bandwidth.h = 0.2;
  c.output_dir = scratch("clt");
  c.threads = 2;
  const auto r = msde::run_clt_mc(c);
  EXPECT_EQ(r.replicates, 8u);
  EXPECT_EQ(r.failures, 0u);
  EXPECT_EQ(data_rows(c.output_dir / "clt_replicates.csv"), 8u);
  EXPECT_EQ(data_rows(c.output_dir / "clt_qq.csv"), 8u);
  ASSERT_EQ(r.drift_z.size(), 2u);
  EXPECT_EQ(r.drift_z[0].size(), 8u);
  const std::string first = slurp(c.output_dir / "clt_replicates.csv");
  auto c1 = c;
  c1.threads = 1;
  c1.output_dir = scratch("clt_1");
  msde::run_clt_mc(c1);
  EXPECT_EQ(slurp(c1.output_dir / "clt_replicates.csv"), first);
  EXPECT_EQ(slurp(c1.output_dir / "summary.json"), slurp(c.output_dir / "summary.json"));
  fs::remove_all(c.output_dir);
  fs::remove_all(c1.output_dir);
}

TEST(Estimate, ExplicitAmbientPoints) {
  msde::ExperimentConfig c;
  c.experiment = msde::ExperimentKind::Simulate;
  c.n = 20000;
  c.seed = 6;
  const auto sim = msde::run_simulate(c);
  c.bandwidth.kind = msde::BandwidthRule::Kind::Explicit;
  c.bandwidth.h = 0.1;
  c.output_dir = scratch("estimate");
  msde::Vector x(3), far(3);
  x << 0, 0, 1;
  far << 9, 9, 9;
  const auto files = msde::run_estimate(sim.trajectory, c, {x, far});
  EXPECT_FALSE(files.empty());
  EXPECT_EQ(data_rows(c.output_dir / "estimates.csv"), 2u);
  fs::remove_all(c.output_dir);
}

}  // namespace
