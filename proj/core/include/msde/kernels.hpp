#pragma once

#include "msde/trajectory.hpp"

#include <cmath>
#include <stdexcept>

namespace msde {

class KernelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Compactly supported bump kernel K(s) = amplitude * exp(-1 / (1 - (s/L)^2))
/// on [0, L), zero beyond. The default (L = 3, amplitude = 1) is the
/// unnormalised experiment kernel; ratio estimators do not depend on amplitude.
struct BumpKernel {
  double support = 3.0;
  double amplitude = 1.0;

  double operator()(double s) const;

  /// Evaluation from a squared, already-scaled distance (s^2); skips the sqrt.
  double from_squared(double s2) const {
    const double t = s2 / (support * support);
    if (t >= 1.0) return 0.0;
    return amplitude * std::exp(-1.0 / (1.0 - t));
  }
};

/// kappa_{p,q}(d) = integral over R^d of K(|u|)^p |u|^q du, by adaptive
/// Gauss-Kronrod quadrature of the radial integral.
double kernel_moment(const BumpKernel& k, int pexp, int qexp, int d);

/// h = fraction * (ambient path length) / L. Throws KernelError("degenerate
/// trajectory") when the path length is zero.
double bandwidth_heuristic(const Trajectory& t, double fraction, const BumpKernel& k = {});

/// h such that the kernel support ball of radius L*h around a typical
/// trajectory point holds `fraction` of the trajectory: the median, over up to
/// `anchors` evenly spaced trajectory points, of the distance to the
/// ceil(fraction * M)-th nearest of M evenly spaced reference points, divided by L.
double neighbor_fraction_bandwidth(const Trajectory& t, double fraction, const BumpKernel& k = {},
                                   std::size_t anchors = 256,
                                   std::size_t max_reference = 50000);

}  // namespace msde
