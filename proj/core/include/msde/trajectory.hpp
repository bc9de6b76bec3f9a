#pragma once

#include "msde/geometry.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace msde {

/// Ambient observations x_0, ..., x_{N-1} on a uniform time grid t_k = k * delta.
/// Coordinates are stored point-major (N x p, row-major).
class Trajectory {
 public:
  Trajectory(ManifoldSpec manifold, double delta, std::uint64_t seed, std::string scheme_id,
             std::vector<double> coords);

  std::size_t size() const { return coords_.size() / static_cast<std::size_t>(dim_); }
  int dim() const { return dim_; }
  double delta() const { return delta_; }
  std::uint64_t seed() const { return seed_; }
  const ManifoldSpec& manifold() const { return manifold_; }
  const std::string& scheme_id() const { return scheme_id_; }

  std::span<const double> coords() const { return coords_; }
  std::span<const double> point_span(std::size_t k) const {
    return {coords_.data() + k * static_cast<std::size_t>(dim_), static_cast<std::size_t>(dim_)};
  }
  Vector point(std::size_t k) const {
    return Eigen::Map<const Eigen::VectorXd>(coords_.data() + k * static_cast<std::size_t>(dim_), dim_);
  }

  /// First n points (n >= 2), same time step.
  Trajectory prefix(std::size_t n) const;

  friend bool operator==(const Trajectory&, const Trajectory&) = default;

 private:
  ManifoldSpec manifold_;
  int dim_;
  double delta_;
  std::uint64_t seed_;
  std::string scheme_id_;
  std::vector<double> coords_;
};

/// Canonical scheme identifier for simulated trajectories of a manifold kind.
std::string scheme_id_for(ManifoldKind kind);

}  // namespace msde
