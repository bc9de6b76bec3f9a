#pragma once

// Discretised SDE trajectories:
//   * sphere: retraction-based Euler scheme. Each step draws a random unit
//     direction, projects it to the tangent plane at Y_k, scales it by a random
//     radius r_k, adds Delta * mu(Y_k) with mu(x, y, z) = (y, -x, 0) and
//     retracts by radial projection. The sphere path is mapped to the ellipsoid.
//   * plane: plain Euler steps in (u, v), reduced to [0, 2pi)^2 and mapped to
//     the Klein bottle.
//
// Randomness comes from std::mt19937_64 seeded through splitmix64; equal
// configurations give bit-identical trajectories within one build.

#include "msde/geometry.hpp"
#include "msde/trajectory.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>

namespace msde {

class SimulationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Distribution of the sphere step radius r_k. Chi2 is a chi-squared(2) draw
/// (E r^2 = 8); Chi is its square root (E r^2 = 2, planar Brownian increments).
enum class RadiusLaw { Chi2, Chi };

std::string to_string(RadiusLaw law);
RadiusLaw radius_law_from_string(const std::string& s);

/// E r^2 / 2: the factor by which the simulated diffusion exceeds unit Brownian motion.
double diffusion_scale(RadiusLaw law);

struct SimConfig {
  ManifoldSpec manifold = ManifoldSpec::sphere();
  std::size_t n_steps = 1000;
  double delta = 1e-2;
  std::uint64_t seed = 0;
  /// Starting point; drawn uniformly when empty.
  std::optional<IntrinsicPoint> initial;
  RadiusLaw radius_law = RadiusLaw::Chi;
  /// Keep every `record_every`-th state. Equivalent to downsampling afterwards.
  std::size_t record_every = 1;
  // Diagnostic knobs: multiply the drift and the noise of every step.
  double drift_scale = 1.0;
  double noise_scale = 1.0;
};

std::uint64_t splitmix64(std::uint64_t x);

/// Seed for Monte-Carlo replicate i: splitmix64(base ^ (i + 1)).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t replicate);

using Rng = std::mt19937_64;
Rng make_rng(std::uint64_t seed);

class SphereStepper {
 public:
  SphereStepper(const SimConfig& cfg, Vector initial, Rng& rng);
  const Vector& state() const { return y_; }
  void advance();
  std::size_t resamples() const { return resamples_; }

 private:
  const SimConfig& cfg_;
  Rng& rng_;
  Vector y_;
  std::normal_distribution<double> normal_;
  std::chi_squared_distribution<double> radius2_{2.0};
  std::size_t resamples_ = 0;
};

class PlaneStepper {
 public:
  PlaneStepper(const SimConfig& cfg, std::array<double, 2> initial, Rng& rng);
  const std::array<double, 2>& state() const { return uv_; }
  /// Increment of the last step before reduction to the fundamental domain.
  const std::array<double, 2>& last_increment() const { return increment_; }
  void advance();

 private:
  const SimConfig& cfg_;
  Rng& rng_;
  std::array<double, 2> uv_;
  std::array<double, 2> increment_{0.0, 0.0};
  std::normal_distribution<double> normal_;
};

using PointSink = std::function<void(std::span<const double>)>;

/// Streams every recorded ambient point (n_steps / record_every + 1 of them)
/// to `sink` without storing the path. Same points as simulate(cfg).
void simulate_visit(const SimConfig& cfg, const PointSink& sink);

Trajectory simulate_sphere(const SimConfig& cfg);
Trajectory simulate_plane(const SimConfig& cfg);
/// Dispatches on cfg.manifold.kind().
Trajectory simulate(const SimConfig& cfg);

/// Keeps points 0, stride, 2*stride, ...; the time step grows by `stride`.
/// Throws SimulationError("stride exceeds length") if fewer than two points survive.
Trajectory downsample(const Trajectory& t, std::size_t stride);

/// Uniform point on the unit sphere (normalised Gaussian vector).
Vector uniform_sphere_point(Rng& rng);

}  // namespace msde
