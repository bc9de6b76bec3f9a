#include "msde/metrics.hpp"

#include "support/oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

namespace {

msde::Vector vec3(double a, double b, double c) {
  msde::Vector v(3);
  v << a, b, c;
  return v;
}

TEST(DriftErrors, Examples) {
  auto r = msde::drift_errors(vec3(1, 0, 0), vec3(1, 0, 0), 1.0);
  EXPECT_EQ(r.stratum, msde::Stratum::Above);
  EXPECT_EQ(*r.nrmse, 0.0);
  EXPECT_EQ(*r.rel_norm_err, 0.0);
  EXPECT_EQ(*r.angle_err, 0.0);

  r = msde::drift_errors(vec3(0, 1, 0), vec3(1, 0, 0), 1.0);
  EXPECT_NEAR(*r.nrmse, std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(*r.rel_norm_err, 0.0, 1e-15);
  EXPECT_NEAR(*r.angle_err, std::numbers::pi / 2, 1e-15);

  r = msde::drift_errors(vec3(0.02, 0, 0), vec3(0.01, 0, 0), 1.0, 0.05);
  EXPECT_EQ(r.stratum, msde::Stratum::Below);
  EXPECT_NEAR(r.abs_err, 0.01, 1e-15);
  EXPECT_FALSE(r.nrmse.has_value());
  EXPECT_FALSE(r.angle_err.has_value());
}

TEST(DriftErrors, AngleIsSymmetricAndScaleInvariant) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g;
  for (int i = 0; i < 100; ++i) {
    const auto a = vec3(g(rng), g(rng), g(rng));
    const auto b = vec3(g(rng), g(rng), g(rng));
    const double ab = *msde::drift_errors(a, b, 1e-3).angle_err;
    EXPECT_NEAR(ab, *msde::drift_errors(b, a, 1e-3).angle_err, 1e-12);
    EXPECT_NEAR(ab, *msde::drift_errors(3.5 * a, 0.2 * b, 1e-3).angle_err, 1e-7);
    EXPECT_GE(ab, 0.0);
    EXPECT_LE(ab, std::numbers::pi);
  }
  EXPECT_THROW(msde::drift_errors(vec3(1, 0, 0), vec3(1, 0, 0), 0.0), msde::MetricsError);
}

TEST(DiffusionErrors, Examples) {
  msde::Matrix pi = msde::Matrix::Zero(4, 4);
  pi.diagonal() << 2, 1, 0, 0;
  auto r = msde::diffusion_errors(pi, pi, 2);
  EXPECT_EQ(r.frob_rel_err, 0.0);
  EXPECT_NEAR(r.sin_theta, 0.0, 1e-15);

  msde::Matrix other = msde::Matrix::Zero(4, 4);
  other.diagonal() << 0, 0, 2, 1;
  EXPECT_NEAR(msde::diffusion_errors(other, pi, 2).sin_theta, std::sqrt(2.0), 1e-14);

  const double theta = 0.4;
  msde::Matrix rot = msde::Matrix::Identity(4, 4);
  rot(1, 1) = rot(2, 2) = std::cos(theta);
  rot(2, 1) = std::sin(theta);
  rot(1, 2) = -std::sin(theta);
  EXPECT_NEAR(msde::diffusion_errors(rot * pi * rot.transpose(), pi, 2).sin_theta, std::sin(theta), 1e-12);
}

TEST(Wilcoxon, AllBelowGivesSmallestExactP) {
  const auto r = msde::wilcoxon_one_sided({1, 2, 3, 4, 5}, {2, 3, 4, 5, 6});
  EXPECT_TRUE(r.exact);
  EXPECT_NEAR(r.p_value, 1.0 / 32.0, 1e-15);
  EXPECT_EQ(r.w_plus, 0.0);
}

TEST(Wilcoxon, Errors) {
  EXPECT_THROW(msde::wilcoxon_one_sided({1, 2, 3, 4, 5}, {1, 2, 3, 4, 5}), msde::MetricsError);
  EXPECT_THROW(msde::wilcoxon_one_sided({1, 2, 3, 4}, {2, 3, 4, 5}), msde::MetricsError);
}

TEST(Wilcoxon, ExactMatchesEnumeration) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 200; ++trial) {
    const int m = 5 + trial % 6;
    std::vector<double> a(m), b(m);
    for (int i = 0; i < m; ++i) {
      a[i] = g(rng);
      b[i] = a[i] + g(rng) + 0.3;
    }
    if (trial % 3 == 0) {  // ties in |difference| and a zero difference
      b[1] = a[1] + (b[0] - a[0]);
      b[2] = a[2];
    }
    const auto r = msde::wilcoxon_one_sided(a, b, msde::WilcoxonMethod::Exact);
    EXPECT_NEAR(r.p_value, oracle::wilcoxon_enumerate(a, b), 1e-12);
  }
}

TEST(Wilcoxon, NormalApproximationTracksExactForLargeSamples) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> a(40), b(40);
    for (int i = 0; i < 40; ++i) {
      a[i] = g(rng);
      b[i] = a[i] + g(rng) + 0.2;
    }
    const auto ex = msde::wilcoxon_one_sided(a, b, msde::WilcoxonMethod::Exact);
    const auto nm = msde::wilcoxon_one_sided(a, b, msde::WilcoxonMethod::Normal);
    EXPECT_FALSE(nm.exact);
    EXPECT_NEAR(ex.p_value, nm.p_value, 0.01);
    EXPECT_EQ(ex.w_plus, nm.w_plus);
  }
}

TEST(Wilcoxon, AutoSwitchesMethodAboveTwentyFive) {
  std::vector<double> a(26), b(26);
  for (int i = 0; i < 26; ++i) {
    a[i] = i;
    b[i] = i + 1.0 + 0.01 * i;
  }
  EXPECT_FALSE(msde::wilcoxon_one_sided(a, b).exact);
  a.pop_back();
  b.pop_back();
  EXPECT_TRUE(msde::wilcoxon_one_sided(a, b).exact);
}

TEST(Wilcoxon, PValueIsMonotoneInTheShift) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  std::vector<double> a(30), noise(30);
  for (int i = 0; i < 30; ++i) {
    a[i] = g(rng);
    noise[i] = g(rng);
  }
  double prev = 1.0;
  for (double shift = -1.0; shift <= 1.0; shift += 0.25) {
    std::vector<double> b(30);
    for (int i = 0; i < 30; ++i) b[i] = a[i] + noise[i] + shift;
    const double p = msde::wilcoxon_one_sided(a, b).p_value;
    EXPECT_LE(p, prev + 1e-15);
    prev = p;
  }
}

TEST(L2DensityError, Examples) {
  EXPECT_EQ(msde::l2_density_error({1, 2, 3}, {1, 2, 3}, {0.2, 0.3, 0.5}), 0.0);
  EXPECT_NEAR(msde::l2_density_error({1.5, 2.5, 3.5}, {1, 2, 3}, {0.2, 0.3, 0.5}), 0.5, 1e-15);
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u;
  std::vector<double> e(50), r(50), w(50);
  double acc = 0.0;
  for (int i = 0; i < 50; ++i) {
    e[i] = u(rng);
    r[i] = u(rng);
    w[i] = u(rng);
    acc += w[i] * (e[i] - r[i]) * (e[i] - r[i]);
  }
  EXPECT_NEAR(msde::l2_density_error(e, r, w), std::sqrt(acc), 1e-14);
  EXPECT_THROW(msde::l2_density_error({1}, {1, 2}, {1}), msde::MetricsError);
}

TEST(StandardizeDrift, EqualErrorsGiveZeros) {
  msde::Matrix p = msde::Matrix::Zero(3, 3);
  p(0, 0) = p(1, 1) = 1.0;
  const std::vector<msde::Vector> errs(10, vec3(0.3, -0.2, 0.1));
  for (const auto& z : msde::standardize_drift_errors(errs, p, p, 1.0, 0.1, 2, std::vector<double>(10, 2.0)))
    EXPECT_LT(z.norm(), 1e-12);
}

TEST(StandardizeDrift, IdentityWhiteningOnTheTangentPlane) {
  msde::Matrix p = msde::Matrix::Zero(3, 3);
  p(0, 0) = p(1, 1) = 1.0;
  // h^d L = 1 with h = 1, d = 2.
  const std::vector<msde::Vector> errs = {vec3(1, 2, 5), vec3(-1, -2, -5)};
  const auto z = msde::standardize_drift_errors(errs, p, p, 1.0, 1.0, 2, {1.0, 1.0});
  ASSERT_EQ(z[0].size(), 2);
  // Eigenbasis of diag(1, 1, 0) restricted to the plane is e1, e2 up to sign and rotation.
  EXPECT_NEAR(z[0].norm(), std::sqrt(5.0), 1e-12);
  EXPECT_NEAR(z[1].norm(), std::sqrt(5.0), 1e-12);
}

TEST(StandardizeDrift, MonteCarloSelfTest) {
  // pi with eigenvalues 2 and 0.5 on a tilted plane.
  const oracle::Vec u1 = oracle::Vec(Eigen::Vector3d(1, 1, 0).normalized());
  const oracle::Vec u2 = oracle::Vec(Eigen::Vector3d(-1, 1, 1).normalized());
  const oracle::Mat pi = 2.0 * u1 * u1.transpose() + 0.5 * u2 * u2.transpose();
  const oracle::Mat p = u1 * u1.transpose() + u2 * u2.transpose();
  const double kappa20 = 1.06, h = 0.1;
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> lu(0.5, 2.0);
  const int n = 10000;
  std::vector<msde::Vector> errs;
  std::vector<double> ls;
  for (int i = 0; i < n; ++i) {
    const double l = lu(rng);
    const double s = std::sqrt(kappa20 / (h * h * l));
    errs.push_back(s * (std::sqrt(2.0) * g(rng) * u1 + std::sqrt(0.5) * g(rng) * u2) + oracle::Vec::Constant(3, 0.7));
    ls.push_back(l);
  }
  const auto z = msde::standardize_drift_errors(errs, p, pi, kappa20, h, 2, ls);
  oracle::Mat cov = oracle::Mat::Zero(2, 2);
  for (const auto& v : z) cov += v * v.transpose();
  cov /= n;
  EXPECT_LT((cov - oracle::Mat::Identity(2, 2)).cwiseAbs().maxCoeff(), 0.1);
}

TEST(StandardizeDrift, RankDeficientTruthIsRejected) {
  msde::Matrix p = msde::Matrix::Zero(3, 3);
  p(0, 0) = 1.0;
  EXPECT_THROW(msde::standardize_drift_errors({vec3(1, 0, 0), vec3(0, 1, 0)}, p, p, 1.0, 0.1, 2, {1, 1}),
               msde::MetricsError);
}

TEST(StandardizeDiffusion, MonteCarloSelfTest) {
  const oracle::Vec u1 = oracle::Vec::Unit(3, 0), u2 = oracle::Vec::Unit(3, 1);
  const double l1 = 2.0, l2 = 0.5;
  const oracle::Mat pi = l1 * u1 * u1.transpose() + l2 * u2 * u2.transpose();
  const double kappa20 = 1.06, h = 0.1, delta = 0.01;
  std::mt19937_64 rng(8);
  std::normal_distribution<double> g;
  const int n = 10000;
  std::vector<msde::Matrix> errs;
  std::vector<double> ls;
  for (int i = 0; i < n; ++i) {
    const double l = 1.0 + (i % 3);
    const double c = delta / (h * h * l);
    const double s11 = std::sqrt(2 * kappa20 * c) * l1 * g(rng);
    const double s22 = std::sqrt(2 * kappa20 * c) * l2 * g(rng);
    const double s12 = std::sqrt(kappa20 * c * l1 * l2) * g(rng);
    oracle::Mat e = s11 * u1 * u1.transpose() + s22 * u2 * u2.transpose() +
                    s12 * (u1 * u2.transpose() + u2 * u1.transpose());
    errs.push_back(e);
    ls.push_back(l);
  }
  const auto z = msde::standardize_diffusion_errors(errs, pi, kappa20, h, 2, delta, ls);
  ASSERT_EQ(z[0].size(), 3);
  for (int j = 0; j < 3; ++j) {
    std::vector<double> col;
    for (const auto& v : z) col.push_back(v(j));
    EXPECT_NEAR(msde::stddev(col), 1.0, 0.05) << j;
  }
}

TEST(QQ, Examples) {
  const auto pts = msde::qq_points({1.0, -1.0});
  ASSERT_EQ(pts.size(), 2u);
  EXPECT_NEAR(pts[0].first, -0.6744897502, 1e-9);
  EXPECT_NEAR(pts[1].first, 0.6744897502, 1e-9);
  EXPECT_EQ(pts[0].second, -1.0);
  EXPECT_EQ(pts[1].second, 1.0);
}

TEST(QQ, StandardNormalSampleHugsTheDiagonal) {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> g;
  std::vector<double> s(10000);
  for (auto& v : s) v = g(rng);
  EXPECT_LT(msde::qq_max_deviation(msde::qq_points(s)), 0.1);
  EXPECT_LT(msde::qq_max_deviation(msde::qq_points(s), 0.0, 1.0), 0.5);
}

TEST(Normality, TwoPointSample) {
  std::vector<double> s;
  for (int i = 0; i < 10; ++i) {
    s.push_back(-1.0);
    s.push_back(1.0);
  }
  const auto n = msde::moment_normality(s);
  EXPECT_NEAR(n.skewness, 0.0, 1e-15);
  EXPECT_NEAR(n.excess_kurtosis, -2.0, 1e-14);
}

TEST(Normality, ConstantSampleIsRejected) {
  EXPECT_THROW(msde::moment_normality(std::vector<double>(10, 3.0)), msde::MetricsError);
}

TEST(Normality, CalibratedOnStandardNormalSamples) {
  std::mt19937_64 rng(10);
  std::normal_distribution<double> g;
  int passes = 0;
  const int trials = 200;
  for (int t = 0; t < trials; ++t) {
    std::vector<double> s(10000);
    for (auto& v : s) v = g(rng);
    const auto n = msde::moment_normality(s);
    if (std::abs(n.skewness) < 0.1 && std::abs(n.excess_kurtosis) < 0.2) ++passes;
  }
  EXPECT_GE(passes, 198);
}

TEST(Summaries, BasicStatistics) {
  EXPECT_EQ(msde::median({3, 1, 2}), 2.0);
  EXPECT_EQ(msde::median({4, 1, 2, 3}), 2.5);
  EXPECT_EQ(msde::mean({1, 2, 3}), 2.0);
  EXPECT_NEAR(msde::stddev({1, 2, 3, 4}), std::sqrt(5.0 / 3.0), 1e-15);
  EXPECT_NEAR(msde::normal_cdf(0.0), 0.5, 1e-15);
  EXPECT_NEAR(msde::normal_quantile(0.975), 1.959963984540054, 1e-12);
  EXPECT_THROW(msde::median({}), msde::MetricsError);
}

}  // namespace
