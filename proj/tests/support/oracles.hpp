#pragma once

// Reference implementations used only by tests. They are written directly from
// the defining formulas, with no shared code paths into msde::core.

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <random>
#include <vector>

namespace oracle {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline double bump(double s) {
  const double t = s / 3.0;
  if (std::abs(t) >= 1.0) return 0.0;
  return std::exp(-1.0 / (1.0 - t * t));
}

struct Estimates {
  double L = 0.0;
  Mat pi;
  Vec mu_E;
  Mat P;
  Vec mu_o;
};

// pts: N x p, one point per row.
inline Estimates brute_force(const Mat& pts, const Vec& x, double delta, double h, int d) {
  const int n = static_cast<int>(pts.rows());
  const int p = static_cast<int>(pts.cols());
  double wsum = 0.0;
  Mat s2 = Mat::Zero(p, p);
  Vec s1 = Vec::Zero(p);
  for (int k = 0; k + 1 < n; ++k) {
    const double w = bump((pts.row(k).transpose() - x).norm() / h);
    const Vec dx = (pts.row(k + 1) - pts.row(k)).transpose();
    wsum += w;
    s1 += w * dx;
    s2 += w * dx * dx.transpose();
  }
  Estimates e;
  e.L = delta / std::pow(h, d) * wsum;
  e.pi = s2 / (delta * wsum);
  e.mu_E = s1 / (delta * wsum);
  Eigen::SelfAdjointEigenSolver<Mat> es(e.pi);
  // Eigen sorts ascending: the top d eigenvectors are the last d columns.
  const Mat top = es.eigenvectors().rightCols(d);
  e.P = top * top.transpose();
  e.mu_o = e.P * e.mu_E;
  return e;
}

// Central finite-difference Jacobian of f: R^m -> R^p.
inline Mat fd_jacobian(const std::function<Vec(const Vec&)>& f, const Vec& q, double step = 1e-6) {
  const Vec f0 = f(q);
  Mat j(f0.size(), q.size());
  for (int i = 0; i < q.size(); ++i) {
    Vec a = q, b = q;
    a(i) += step;
    b(i) -= step;
    j.col(i) = (f(a) - f(b)) / (2.0 * step);
  }
  return j;
}

// Second derivative d^2 f / dq_i^2 by central differences.
inline Vec fd_second(const std::function<Vec(const Vec&)>& f, const Vec& q, int i, double step = 1e-4) {
  Vec a = q, b = q;
  a(i) += step;
  b(i) -= step;
  return (f(a) - 2.0 * f(q) + f(b)) / (step * step);
}

// Orthogonal projector onto the column span of j (full column rank assumed).
inline Mat span_projector(const Mat& j) {
  Eigen::HouseholderQR<Mat> qr(j);
  const Mat q = qr.householderQ() * Mat::Identity(j.rows(), j.cols());
  return q * q.transpose();
}

inline Mat random_symmetric(int n, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  Mat a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= i; ++j) a(i, j) = a(j, i) = g(rng);
  return a;
}

// One-sided signed-rank p-value P(W+ <= observed) by enumerating all 2^m sign
// assignments of the (average) ranks of |a_i - b_i|, zero differences dropped.
inline double wilcoxon_enumerate(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> diff;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] != b[i]) diff.push_back(a[i] - b[i]);
  const std::size_t m = diff.size();
  std::vector<double> rank(m);
  for (std::size_t i = 0; i < m; ++i) {
    double less = 0.0, equal = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      if (std::abs(diff[j]) < std::abs(diff[i])) less += 1.0;
      if (std::abs(diff[j]) == std::abs(diff[i])) equal += 1.0;
    }
    rank[i] = less + (equal + 1.0) / 2.0;
  }
  double observed = 0.0;
  for (std::size_t i = 0; i < m; ++i)
    if (diff[i] > 0) observed += rank[i];
  std::size_t hits = 0;
  const std::size_t total = std::size_t{1} << m;
  for (std::size_t mask = 0; mask < total; ++mask) {
    double w = 0.0;
    for (std::size_t i = 0; i < m; ++i)
      if (mask >> i & 1U) w += rank[i];
    if (w <= observed + 1e-9) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(total);
}

// Composite Simpson rule on [lo, hi] with n (even) panels.
inline double simpson(const std::function<double(double)>& f, double lo, double hi, int n) {
  const double step = (hi - lo) / n;
  double s = f(lo) + f(hi);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(lo + i * step);
  return s * step / 3.0;
}

}  // namespace oracle
