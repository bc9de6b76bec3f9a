#include "msde/kernels.hpp"
#include "msde/simulate.hpp"

#include "support/oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

namespace {

TEST(BumpKernel, Examples) {
  const msde::BumpKernel k;
  EXPECT_NEAR(k(0.0), 0.3678794412, 1e-10);
  EXPECT_EQ(k(3.0), 0.0);
  EXPECT_EQ(k(5.0), 0.0);
  EXPECT_NEAR(k(1.5), std::exp(-4.0 / 3.0), 1e-15);
  EXPECT_NEAR(k(1.5), 0.2635971, 1e-7);
}

TEST(BumpKernel, NonNegativeDecreasingAndSmoothAtTheEdge) {
  const msde::BumpKernel k;
  double prev = k(0.0);
  for (double s = 0.01; s < 4.0; s += 0.01) {
    const double v = k(s);
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, prev + 1e-300);
    prev = v;
  }
  // Value and slope both vanish approaching the support edge.
  EXPECT_LT(k(2.999), 1e-100);
  EXPECT_LT((k(2.99) - k(2.98)) / 0.01, 1e-50);
  EXPECT_DOUBLE_EQ(k.from_squared(2.25), k(1.5));
}

TEST(BumpKernel, AmplitudeScalesLinearly) {
  const msde::BumpKernel k{3.0, 4.0};
  EXPECT_DOUBLE_EQ(k(1.0), 4.0 * msde::BumpKernel{}(1.0));
}

TEST(KernelMoment, MatchesSimpsonOracle) {
  const msde::BumpKernel k;
  const double k10 = msde::kernel_moment(k, 1, 0, 1);
  const double simpson = oracle::simpson([](double s) { return oracle::bump(s); }, -3.0, 3.0, 20000);
  EXPECT_NEAR(k10, simpson, 1e-9);
  EXPECT_NEAR(k10, 1.3319814, 1e-6);
}

TEST(KernelMoment, TwoDimensionalMomentsMatchPolarSimpson) {
  const msde::BumpKernel k;
  for (auto [pe, qe] : {std::pair{1, 0}, std::pair{2, 0}, std::pair{1, 2}, std::pair{2, 2}}) {
    const auto radial = [&](double r) { return std::pow(oracle::bump(r), pe) * std::pow(r, qe) * r; };
    const double expected = 2.0 * std::numbers::pi * oracle::simpson(radial, 0.0, 3.0, 20000);
    const double got = msde::kernel_moment(k, pe, qe, 2);
    EXPECT_NEAR(got, expected, 1e-9 * expected) << pe << "," << qe;
    EXPECT_GT(got, 0.0);
    EXPECT_TRUE(std::isfinite(got));
  }
  EXPECT_NEAR(msde::kernel_moment(k, 1, 0, 2), 4.1986115386, 1e-8);
  EXPECT_NEAR(msde::kernel_moment(k, 2, 0, 2), 1.0612562507, 1e-8);
}

TEST(KernelMoment, MonteCarloCrossCheck) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  const int n = 400000;
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = u(rng), y = u(rng);
    acc += oracle::bump(std::hypot(x, y));
  }
  const double mc = 36.0 * acc / n;
  EXPECT_NEAR(msde::kernel_moment(msde::BumpKernel{}, 1, 0, 2), mc, 0.02);
}

msde::Trajectory segment(std::size_t n) {
  std::vector<double> coords;
  for (std::size_t k = 0; k < n; ++k) {
    coords.push_back(static_cast<double>(k) / static_cast<double>(n - 1));
    coords.push_back(0.0);
    coords.push_back(0.0);
  }
  return msde::Trajectory(msde::ManifoldSpec::sphere(), 0.1, 0, "test", coords);
}

TEST(BandwidthHeuristic, StraightSegment) {
  const auto t = segment(101);
  EXPECT_NEAR(msde::bandwidth_heuristic(t, 0.01), 0.01 / 3.0, 1e-15);
  EXPECT_NEAR(msde::bandwidth_heuristic(t, 0.02), 2.0 * msde::bandwidth_heuristic(t, 0.01), 1e-15);
}

TEST(BandwidthHeuristic, DegenerateTrajectoryIsRejected) {
  const msde::Trajectory t(msde::ManifoldSpec::sphere(), 0.1, 0, "test", std::vector<double>(30, 0.0));
  EXPECT_THROW(msde::bandwidth_heuristic(t, 0.01), msde::KernelError);
}

TEST(BandwidthHeuristic, DownsamplingNeverIncreasesTheBandwidth) {
  msde::SimConfig cfg;
  cfg.n_steps = 20000;
  cfg.seed = 4;
  const auto t = msde::simulate(cfg);
  for (std::size_t stride : {2u, 10u, 100u})
    EXPECT_LE(msde::bandwidth_heuristic(msde::downsample(t, stride), 0.01), msde::bandwidth_heuristic(t, 0.01));
}

TEST(NeighborFractionBandwidth, SupportBallHoldsTheRequestedShare) {
  msde::SimConfig cfg;
  cfg.n_steps = 100000;
  cfg.seed = 8;
  const auto t = msde::simulate(cfg);
  const msde::BumpKernel k;
  const double h = msde::neighbor_fraction_bandwidth(t, 0.01, k);
  // Uniform density on the unit sphere: cap of chord radius r has area pi r^2.
  const double expected_share = (k.support * h) * (k.support * h) / 4.0;
  EXPECT_NEAR(expected_share, 0.01, 0.003);
  EXPECT_EQ(h, msde::neighbor_fraction_bandwidth(t, 0.01, k));
  EXPECT_LT(msde::neighbor_fraction_bandwidth(t, 0.005, k), h);
}

}  // namespace
