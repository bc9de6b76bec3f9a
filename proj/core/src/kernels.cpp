#include "msde/kernels.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

namespace msde {

double BumpKernel::operator()(double s) const {
  if (s < 0.0) throw KernelError("negative argument");
  if (s >= support) return 0.0;
  const double t = s / support;
  return amplitude * std::exp(-1.0 / (1.0 - t * t));
}

double kernel_moment(const BumpKernel& k, int pexp, int qexp, int d) {
  if (pexp < 1 || qexp < 0 || d < 1) throw KernelError("kernel_moment: parameter out of range");
  const double sphere_area =
      2.0 * std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d);
  auto integrand = [&](double t) {
    return std::pow(k(t), pexp) * std::pow(t, qexp + d - 1);
  };
  double error = 0.0;
  const double radial = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      integrand, 0.0, k.support, 15, 1e-14, &error);
  return sphere_area * radial;
}

double bandwidth_heuristic(const Trajectory& t, double fraction, const BumpKernel& k) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw KernelError("fraction must lie in (0, 1)");
  if (t.size() < 2) throw KernelError("degenerate trajectory");
  double length = 0.0;
  for (std::size_t i = 0; i + 1 < t.size(); ++i) length += (t.point(i + 1) - t.point(i)).norm();
  if (length <= 0.0) throw KernelError("degenerate trajectory");
  return fraction * length / k.support;
}

double neighbor_fraction_bandwidth(const Trajectory& t, double fraction, const BumpKernel& k,
                                   std::size_t anchors, std::size_t max_reference) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw KernelError("fraction must lie in (0, 1)");
  const std::size_t n = t.size();
  if (n < 2) throw KernelError("degenerate trajectory");

  const std::size_t ref_stride = std::max<std::size_t>(1, (n + max_reference - 1) / max_reference);
  std::vector<std::size_t> reference;
  for (std::size_t i = 0; i < n; i += ref_stride) reference.push_back(i);
  const std::size_t rank = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(reference.size()))));

  const std::size_t anchor_count = std::min(anchors, n);
  std::vector<double> radii;
  radii.reserve(anchor_count);
  std::vector<double> dist(reference.size());
  const int p = t.dim();
  for (std::size_t a = 0; a < anchor_count; ++a) {
    const std::size_t idx = a * (n - 1) / std::max<std::size_t>(1, anchor_count - 1);
    const auto x = t.point_span(idx);
    for (std::size_t j = 0; j < reference.size(); ++j) {
      const auto y = t.point_span(reference[j]);
      double s = 0.0;
      for (int c = 0; c < p; ++c) s += (x[c] - y[c]) * (x[c] - y[c]);
      dist[j] = s;
    }
    // rank-th nearest, counting the anchor itself when it is a reference point
    std::nth_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(rank - 1), dist.end());
    radii.push_back(std::sqrt(dist[rank - 1]));
  }
  std::nth_element(radii.begin(), radii.begin() + static_cast<std::ptrdiff_t>(radii.size() / 2),
                   radii.end());
  const double radius = radii[radii.size() / 2];
  if (radius <= 0.0) throw KernelError("degenerate trajectory");
  return radius / k.support;
}

}  // namespace msde
