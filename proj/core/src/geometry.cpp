#include "msde/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace msde {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap_two_pi(double x) {
  double r = std::fmod(x, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  if (r >= kTwoPi) r -= kTwoPi;
  return r;
}

void require_coords(const ManifoldSpec& m, const IntrinsicPoint& q) {
  if (q.coords.size() != m.coordinate_dim())
    throw GeometryError("intrinsic point has the wrong number of coordinates");
}

// Derivatives of the Klein bottle embedding at (u, v). d/dv = cos(v) * fold,
// where `fold` never vanishes, so span{du, fold} is the tangent plane even on
// the fold lines cos v = 0.
struct KleinFrame {
  Vector du, dv, fold, duu, dvv;
};

KleinFrame klein_frame(const ManifoldSpec& m, double u, double v) {
  const double a = m.major_radius();
  const double r = m.minor_radius();
  const double su = std::sin(u), cu = std::cos(u);
  const double sh = std::sin(0.5 * u), ch = std::cos(0.5 * u);
  const double sv = std::sin(v), cv = std::cos(v);
  const double ring = a + r * sv;

  KleinFrame f;
  f.du.resize(4);
  f.du << -su * ring, cu * ring, -0.5 * r * sh * sv, 0.5 * r * ch * sv;
  f.fold.resize(4);
  f.fold << r * cu, r * su, r * ch, r * sh;
  f.dv = cv * f.fold;
  f.duu.resize(4);
  f.duu << -cu * ring, -su * ring, -0.25 * r * ch * sv, -0.25 * r * sh * sv;
  f.dvv = -sv * f.fold;
  return f;
}

Matrix gram_schmidt(const Vector& first, const Vector& second) {
  Matrix q(first.size(), 2);
  q.col(0) = first / first.norm();
  Vector w = second - q.col(0).dot(second) * q.col(0);
  q.col(1) = w / w.norm();
  return q;
}

// Orthonormal frame of T_q S^2.
Matrix sphere_frame(const Vector& q) {
  Eigen::Index k = 0;
  q.cwiseAbs().minCoeff(&k);
  Vector e = Vector::Zero(3);
  e(k) = 1.0;
  Vector t1 = e - e.dot(q) * q;
  t1.normalize();
  Vector t2(3);
  t2 << q(1) * t1(2) - q(2) * t1(1), q(2) * t1(0) - q(0) * t1(2), q(0) * t1(1) - q(1) * t1(0);
  Matrix frame(3, 2);
  frame.col(0) = t1;
  frame.col(1) = t2;
  return frame;
}

Vector ellipsoid_normal(const ManifoldSpec& m, const Vector& x) {
  const Vector axes = m.semi_axes();
  return x.cwiseQuotient(axes.cwiseProduct(axes));
}

Matrix ellipsoid_projector(const ManifoldSpec& m, const Vector& x) {
  const Vector n = ellipsoid_normal(m, x);
  return Matrix::Identity(3, 3) - n * n.transpose() / n.squaredNorm();
}

}  // namespace

ManifoldSpec ManifoldSpec::ellipsoid(double a, double b, double c) {
  return ellipsoid(a, b, c, std::sqrt(3.0 / (a * a + b * b + c * c)));
}

ManifoldSpec ManifoldSpec::ellipsoid(double a, double b, double c, double scale) {
  if (!(a > 0.0 && b > 0.0 && c > 0.0 && scale > 0.0))
    throw GeometryError("ellipsoid semi-axes and scale must be positive");
  return ManifoldSpec(ManifoldKind::Ellipsoid, {a, b, c, scale, 0.0});
}

ManifoldSpec ManifoldSpec::klein_bottle(double a, double r) {
  if (!(r > 0.0 && a > r)) throw GeometryError("Klein bottle radii must satisfy a > r > 0");
  return ManifoldSpec(ManifoldKind::KleinBottle, {a, r, 0.0, 0.0, 0.0});
}

ManifoldSpec ManifoldSpec::from_parameters(ManifoldKind kind, const std::array<double, 5>& p) {
  return kind == ManifoldKind::Ellipsoid ? ellipsoid(p[0], p[1], p[2], p[3])
                                         : klein_bottle(p[0], p[1]);
}

Vector ManifoldSpec::semi_axes() const {
  Vector axes(3);
  axes << scale() * a(), scale() * b(), scale() * c();
  return axes;
}

std::string ManifoldSpec::name() const {
  std::ostringstream os;
  if (kind_ == ManifoldKind::Ellipsoid)
    os << "ellipsoid(" << a() << "," << b() << "," << c() << ")";
  else
    os << "klein_bottle(" << major_radius() << "," << minor_radius() << ")";
  return os.str();
}

IntrinsicPoint sphere_point(double x, double y, double z) {
  IntrinsicPoint q{Vector(3)};
  q.coords << x, y, z;
  return q;
}

IntrinsicPoint angle_point(double u, double v) {
  IntrinsicPoint q{Vector(2)};
  q.coords << u, v;
  return q;
}

Vector embed(const ManifoldSpec& m, const IntrinsicPoint& q) {
  require_coords(m, q);
  if (m.kind() == ManifoldKind::Ellipsoid) return m.semi_axes().cwiseProduct(q.coords);

  const double u = q.coords(0), v = q.coords(1);
  const double a = m.major_radius(), r = m.minor_radius();
  const double ring = a + r * std::sin(v);
  Vector x(4);
  x << std::cos(u) * ring, std::sin(u) * ring, r * std::cos(0.5 * u) * std::sin(v),
      r * std::sin(0.5 * u) * std::sin(v);
  return x;
}

Matrix embedding_jacobian(const ManifoldSpec& m, const IntrinsicPoint& q) {
  require_coords(m, q);
  if (m.kind() == ManifoldKind::Ellipsoid)
    return m.semi_axes().asDiagonal() * sphere_frame(q.coords);
  const KleinFrame f = klein_frame(m, q.coords(0), q.coords(1));
  Matrix j(4, 2);
  j.col(0) = f.du;
  j.col(1) = f.dv;
  return j;
}

double manifold_residual(const ManifoldSpec& m, const Vector& x) {
  if (x.size() != m.ambient_dim()) throw GeometryError("ambient point has the wrong dimension");
  if (m.kind() == ManifoldKind::Ellipsoid)
    return std::abs(x.cwiseQuotient(m.semi_axes()).squaredNorm() - 1.0);

  const double r = m.minor_radius();
  const double u = wrap_two_pi(std::atan2(x(1), x(0)));
  const double sin_v = (x(2) * std::cos(0.5 * u) + x(3) * std::sin(0.5 * u)) / r;
  const double v = wrap_two_pi(std::asin(std::clamp(sin_v, -1.0, 1.0)));
  return (embed(m, angle_point(u, v)) - x).norm();
}

IntrinsicPoint to_intrinsic(const ManifoldSpec& m, const Vector& x, double tol) {
  if (manifold_residual(m, x) > tol) throw GeometryError("off-manifold point");
  if (m.kind() == ManifoldKind::Ellipsoid) {
    Vector q = x.cwiseQuotient(m.semi_axes());
    q.normalize();
    return IntrinsicPoint{q};
  }
  const double r = m.minor_radius();
  const double u = wrap_two_pi(std::atan2(x(1), x(0)));
  const double sin_v = (x(2) * std::cos(0.5 * u) + x(3) * std::sin(0.5 * u)) / r;
  return angle_point(u, wrap_two_pi(std::asin(std::clamp(sin_v, -1.0, 1.0))));
}

Matrix tangent_basis(const ManifoldSpec& m, const IntrinsicPoint& q) {
  require_coords(m, q);
  if (m.kind() == ManifoldKind::Ellipsoid) {
    const Matrix j = embedding_jacobian(m, q);
    return gram_schmidt(j.col(0), j.col(1));
  }
  const KleinFrame f = klein_frame(m, q.coords(0), q.coords(1));
  return gram_schmidt(f.du, f.fold);
}

Matrix tangent_projector(const ManifoldSpec& m, const IntrinsicPoint& q) {
  if (m.kind() == ManifoldKind::Ellipsoid) return ellipsoid_projector(m, embed(m, q));
  const Matrix basis = tangent_basis(m, q);
  return basis * basis.transpose();
}

Matrix tangent_projector(const ManifoldSpec& m, const Vector& x) {
  if (m.kind() == ManifoldKind::Ellipsoid) {
    if (manifold_residual(m, x) > 1e-8) throw GeometryError("off-manifold point");
    return ellipsoid_projector(m, x);
  }
  return tangent_projector(m, to_intrinsic(m, x));
}

Vector intrinsic_drift(const ManifoldSpec& m, const IntrinsicPoint& q) {
  require_coords(m, q);
  if (m.kind() == ManifoldKind::Ellipsoid) {
    Vector mu(3);
    mu << q.coords(1), -q.coords(0), 0.0;
    return mu;
  }
  const double u = q.coords(0), v = q.coords(1);
  Vector mu(2);
  mu << 1.0 + 0.5 * std::cos(0.5 * u) * std::sin(v), 0.5 * std::sin(2.0 * v);
  return mu;
}

Vector true_drift(const ManifoldSpec& m, const IntrinsicPoint& q) {
  require_coords(m, q);
  if (m.kind() == ManifoldKind::Ellipsoid) {
    const Vector x = embed(m, q);
    Vector rotation(3);
    rotation << m.a() * x(1) / m.b(), -m.b() * x(0) / m.a(), 0.0;
    return rotation + ellipsoid_projector(m, x) * (-x);
  }
  const KleinFrame f = klein_frame(m, q.coords(0), q.coords(1));
  const Vector mu = intrinsic_drift(m, q);
  const Matrix basis = gram_schmidt(f.du, f.fold);
  const Vector curvature = f.duu + f.dvv;
  return f.du * mu(0) + f.dv * mu(1) + 0.5 * basis * (basis.transpose() * curvature);
}

Matrix true_diffusion(const ManifoldSpec& m, const IntrinsicPoint& q) {
  require_coords(m, q);
  if (m.kind() == ManifoldKind::Ellipsoid) {
    const Vector x = embed(m, q);
    const Vector axes = m.semi_axes();
    Matrix pi = axes.cwiseProduct(axes).asDiagonal();
    pi -= x * x.transpose();
    return pi;
  }
  const KleinFrame f = klein_frame(m, q.coords(0), q.coords(1));
  return f.du * f.du.transpose() + f.dv * f.dv.transpose();
}

std::array<double, 2> reduce_fundamental_domain(double u, double v) {
  double turns = std::floor(u / kTwoPi);
  double ur = u - kTwoPi * turns;
  if (ur >= kTwoPi) {
    ur -= kTwoPi;
    turns += 1.0;
  }
  if (ur < 0.0) {
    ur += kTwoPi;
    turns -= 1.0;
    if (ur >= kTwoPi) {
      ur = 0.0;
      turns += 1.0;
    }
  }
  const bool odd = std::fmod(turns, 2.0) != 0.0;
  return {ur, wrap_two_pi(odd ? -v : v)};
}

}  // namespace msde
