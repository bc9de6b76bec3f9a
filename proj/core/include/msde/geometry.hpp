#pragma once

// Manifold families used by the simulator and the truth fields:
//   * ellipsoids in R^3, parameterised as the image of the unit sphere under
//     x -> scale * diag(a, b, c) x;
//   * the Klein bottle in R^4, the image of [0, 2pi)^2 under
//     (u, v) -> (cos u (a + r sin v), sin u (a + r sin v), r cos(u/2) sin v, r sin(u/2) sin v).
//
// Truth fields are evaluated in observed (scaled) ambient coordinates.

#include "msde/linalg.hpp"

#include <array>
#include <stdexcept>
#include <string>

namespace msde {

class GeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ManifoldKind { Ellipsoid, KleinBottle };

class ManifoldSpec {
 public:
  /// Ellipsoid with the global normalisation sqrt(3 / (a^2 + b^2 + c^2)).
  static ManifoldSpec ellipsoid(double a, double b, double c);
  static ManifoldSpec ellipsoid(double a, double b, double c, double scale);
  static ManifoldSpec sphere() { return ellipsoid(1.0, 1.0, 1.0); }
  static ManifoldSpec klein_bottle(double a, double r);

  ManifoldKind kind() const { return kind_; }
  int intrinsic_dim() const { return 2; }
  int ambient_dim() const { return kind_ == ManifoldKind::Ellipsoid ? 3 : 4; }
  /// Dimension of the intrinsic coordinate vector (3 for the sphere, 2 for (u, v)).
  int coordinate_dim() const { return kind_ == ManifoldKind::Ellipsoid ? 3 : 2; }

  // Ellipsoid
  double a() const { return p_[0]; }
  double b() const { return p_[1]; }
  double c() const { return p_[2]; }
  double scale() const { return p_[3]; }
  /// Scaled semi-axes (scale * a, scale * b, scale * c).
  Vector semi_axes() const;

  // Klein bottle
  double major_radius() const { return p_[0]; }
  double minor_radius() const { return p_[1]; }

  /// The five-slot parameter block persisted in trajectory files.
  const std::array<double, 5>& parameters() const { return p_; }
  static ManifoldSpec from_parameters(ManifoldKind kind, const std::array<double, 5>& params);

  std::string name() const;

  friend bool operator==(const ManifoldSpec&, const ManifoldSpec&) = default;

 private:
  ManifoldSpec(ManifoldKind kind, std::array<double, 5> p) : kind_(kind), p_(p) {}
  ManifoldKind kind_ = ManifoldKind::Ellipsoid;
  std::array<double, 5> p_{};
};

/// A point in intrinsic coordinates: a unit 3-vector for the ellipsoid family,
/// (u, v) for the Klein bottle.
struct IntrinsicPoint {
  Vector coords;
};

IntrinsicPoint sphere_point(double x, double y, double z);
IntrinsicPoint angle_point(double u, double v);

Vector embed(const ManifoldSpec& m, const IntrinsicPoint& q);

/// p x 2 Jacobian of the embedding (ellipsoid: with respect to an orthonormal
/// frame of the sphere tangent plane at q; Klein bottle: columns d/du, d/dv).
Matrix embedding_jacobian(const ManifoldSpec& m, const IntrinsicPoint& q);

/// Recovers intrinsic coordinates for an ambient point. For the Klein bottle
/// the returned v satisfies cos v >= 0 (the embedding identifies v and pi - v).
/// Throws GeometryError("off-manifold point") if x is farther than `tol` from M.
IntrinsicPoint to_intrinsic(const ManifoldSpec& m, const Vector& x, double tol = 1e-8);

/// Distance-like residual of the manifold equation at x (0 on M).
double manifold_residual(const ManifoldSpec& m, const Vector& x);

/// Orthogonal projector onto the embedded tangent space at x.
Matrix tangent_projector(const ManifoldSpec& m, const Vector& x);
Matrix tangent_projector(const ManifoldSpec& m, const IntrinsicPoint& q);

/// p x 2 orthonormal basis of the tangent space (modified Gram-Schmidt of the
/// Jacobian columns, first d/du then d/dv for the Klein bottle).
Matrix tangent_basis(const ManifoldSpec& m, const IntrinsicPoint& q);

/// Tangent ("observed") drift of the embedded process.
Vector true_drift(const ManifoldSpec& m, const IntrinsicPoint& q);

/// Diffusion matrix of the embedded process.
Matrix true_diffusion(const ManifoldSpec& m, const IntrinsicPoint& q);

/// Intrinsic drift used by the simulators: (y, -x, 0) on the sphere and
/// (1 + cos(u/2) sin(v) / 2, sin(2v) / 2) on the plane.
Vector intrinsic_drift(const ManifoldSpec& m, const IntrinsicPoint& q);

/// Maps (u, v) in R^2 to its representative in [0, 2pi)^2 under the group
/// generated by (u, v) -> (u, v + 2pi) and (u, v) -> (u + 2pi, -v).
std::array<double, 2> reduce_fundamental_domain(double u, double v);

}  // namespace msde
