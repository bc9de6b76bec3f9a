#pragma once

// Nadaraya-Watson estimators at a base point x from one trajectory
// x_0, ..., x_{N-1} with time step Delta. With w_k = K(|x_k - x| / h) and all
// sums over k = 0, ..., N-2:
//
//   L_hat  = Delta / h^d * sum w_k
//   pi_hat = sum w_k dx_k dx_k^T / (Delta * sum w_k),   dx_k = x_{k+1} - x_k
//   mu_E   = sum w_k dx_k / (Delta * sum w_k)
//   P_hat  = projector onto the top-d eigenvectors of pi_hat
//   mu_o   = P_hat mu_E

#include "msde/kernels.hpp"
#include "msde/linalg.hpp"
#include "msde/trajectory.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace msde {

class EstimationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

/// Uniform grid over a point cloud in R^p (p <= 4) for fixed-radius queries.
/// Falls back to reporting every point when the grid would be too large.
class CellIndex {
 public:
  void build(const double* data, std::size_t count, int p, double cell);
  /// Appends the indices of all points in the 3^p cells around x (unordered).
  void candidates(const double* x, std::vector<std::uint32_t>& out) const;

 private:
  int p_ = 0;
  double cell_ = 1.0;
  std::size_t count_ = 0;
  bool grid_ = false;
  double lo_[4] = {0, 0, 0, 0};
  std::int64_t extent_[4] = {0, 0, 0, 0};
  std::vector<std::uint64_t> keys_;
  std::vector<std::uint32_t> ids_;
};

}  // namespace detail

struct EstimatorConfig {
  double h = 0.1;
  int d = 2;
  BumpKernel kernel{};
  std::size_t min_neighbors = 5;

  void validate(int ambient_dim) const;
};

struct PointEstimates {
  Vector base;
  double L_hat = 0.0;
  Matrix pi_hat;
  Vector mu_E;
  Matrix P_hat;
  Vector mu_o;
  std::size_t n_active = 0;
  /// lambda_d - lambda_{d+1} of pi_hat is (numerically) zero.
  bool gap_flag = false;
  /// Fewer than min_neighbors nonzero weights.
  bool sparse_flag = false;
};

/// Estimator bound to one trajectory. Builds a uniform-grid neighbour index
/// over x_0, ..., x_{N-2} with cell size L*h, so each query only visits points
/// inside the kernel support. Summation order is always increasing k. The
/// trajectory must outlive the estimator.
class KernelEstimator {
 public:
  KernelEstimator(const Trajectory& t, EstimatorConfig cfg);

  const EstimatorConfig& config() const { return cfg_; }
  const Trajectory& trajectory() const { return *t_; }

  double occupation_density(const Vector& x) const;
  /// Throws EstimationError("insufficient local data") when every weight is zero.
  PointEstimates estimate(const Vector& x) const;

  /// Indices k <= N-2 with |x_k - x| < L*h, ascending.
  std::vector<std::uint32_t> neighbors(const Vector& x) const;

 private:
  const Trajectory* t_;
  EstimatorConfig cfg_;
  detail::CellIndex index_;
};

double occupation_density(const Trajectory& t, const Vector& x, const EstimatorConfig& c);
Matrix diffusion_estimate(const Trajectory& t, const Vector& x, const EstimatorConfig& c);
Vector euclidean_drift_estimate(const Trajectory& t, const Vector& x, const EstimatorConfig& c);
Projector tangent_projector_estimate(const Matrix& pi_hat, int d);
PointEstimates drift_estimate(const Trajectory& t, const Vector& x, const EstimatorConfig& c);

struct BatchEntry {
  std::optional<PointEstimates> estimates;
  std::string error;
  bool ok() const { return estimates.has_value(); }
};

/// Per-point estimates in input order; failures are stored in their slot.
std::vector<BatchEntry> batch_estimate(const Trajectory& t, const std::vector<Vector>& xs,
                                       const EstimatorConfig& c, unsigned threads = 1);

/// Running kernel sums sum_k w_k(x_b) at fixed base points, fed one trajectory
/// point at a time. Used for occupation densities on many prefixes of one long
/// path without storing it.
class OccupationAccumulator {
 public:
  OccupationAccumulator(std::vector<Vector> bases, double h, BumpKernel kernel = {});
  void add(const Vector& x);
  void add(const double* x);
  std::size_t count() const { return count_; }
  /// Raw kernel sums per base point, summed in insertion order.
  std::vector<double> sums() const;
  const std::vector<Vector>& bases() const { return bases_; }

 private:
  std::vector<Vector> bases_;
  double h_;
  BumpKernel kernel_;
  int p_;
  std::vector<long double> acc_;
  std::size_t count_ = 0;
  std::vector<double> flat_;
  detail::CellIndex index_;
  std::vector<std::uint32_t> scratch_;
};

/// L_hat at each base point for every prefix of `prefix_points` points
/// (each >= 2 and <= N). Row i corresponds to prefix_points[i].
std::vector<std::vector<double>> occupation_density_prefixes(
    const Trajectory& t, const std::vector<Vector>& bases, const EstimatorConfig& c,
    const std::vector<std::size_t>& prefix_points);

}  // namespace msde
