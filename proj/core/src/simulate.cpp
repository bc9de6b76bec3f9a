#include "msde/simulate.hpp"

#include <cmath>
#include <numbers>

namespace msde {

namespace {

constexpr int kMaxConsecutiveResamples = 100;

void check_config(const SimConfig& cfg) {
  if (!(cfg.delta > 0.0)) throw SimulationError("time step must be positive");
  if (cfg.n_steps < 1) throw SimulationError("n_steps must be at least 1");
  if (cfg.record_every < 1) throw SimulationError("record_every must be at least 1");
  if (cfg.n_steps / cfg.record_every < 1) throw SimulationError("stride exceeds length");
}

}  // namespace

std::string to_string(RadiusLaw law) { return law == RadiusLaw::Chi2 ? "chi2" : "chi"; }

RadiusLaw radius_law_from_string(const std::string& s) {
  if (s == "chi2") return RadiusLaw::Chi2;
  if (s == "chi") return RadiusLaw::Chi;
  throw SimulationError("unknown radius law: " + s);
}

double diffusion_scale(RadiusLaw law) { return law == RadiusLaw::Chi2 ? 4.0 : 1.0; }

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t replicate) {
  return splitmix64(base ^ (replicate + 1));
}

Rng make_rng(std::uint64_t seed) { return Rng(splitmix64(seed)); }

Vector uniform_sphere_point(Rng& rng) {
  std::normal_distribution<double> normal;
  Vector q(3);
  do {
    q << normal(rng), normal(rng), normal(rng);
  } while (q.norm() < 1e-12);
  return q / q.norm();
}

SphereStepper::SphereStepper(const SimConfig& cfg, Vector initial, Rng& rng)
    : cfg_(cfg), rng_(rng), y_(std::move(initial)) {
  if (y_.size() != 3) throw SimulationError("sphere stepper needs a 3-vector");
  y_.normalize();
}

void SphereStepper::advance() {
  Vector direction(3);
  int attempts = 0;
  for (;;) {
    Vector w(3);
    w << normal_(rng_), normal_(rng_), normal_(rng_);
    const double wn = w.norm();
    if (wn > 0.0) {
      w /= wn;
      direction = w - w.dot(y_) * y_;
      const double dn = direction.norm();
      if (dn >= 1e-12) {
        direction /= dn;
        break;
      }
    }
    ++resamples_;
    if (++attempts >= kMaxConsecutiveResamples) throw SimulationError("degenerate direction");
  }

  const double chi2 = radius2_(rng_);
  const double radius = cfg_.radius_law == RadiusLaw::Chi2 ? chi2 : std::sqrt(chi2);

  Vector drift(3);
  drift << y_(1), -y_(0), 0.0;
  const Vector step = std::sqrt(cfg_.delta) * cfg_.noise_scale * radius * direction +
                      cfg_.delta * cfg_.drift_scale * drift;
  const Vector moved = y_ + step;
  y_ = moved / moved.norm();
}

PlaneStepper::PlaneStepper(const SimConfig& cfg, std::array<double, 2> initial, Rng& rng)
    : cfg_(cfg), rng_(rng), uv_(reduce_fundamental_domain(initial[0], initial[1])) {}

void PlaneStepper::advance() {
  const double u = uv_[0], v = uv_[1];
  const double mu_u = 1.0 + 0.5 * std::cos(0.5 * u) * std::sin(v);
  const double mu_v = 0.5 * std::sin(2.0 * v);
  const double sd = std::sqrt(cfg_.delta) * cfg_.noise_scale;
  const double g1 = normal_(rng_);
  const double g2 = normal_(rng_);
  increment_ = {cfg_.delta * cfg_.drift_scale * mu_u + sd * g1,
                cfg_.delta * cfg_.drift_scale * mu_v + sd * g2};
  uv_ = reduce_fundamental_domain(u + increment_[0], v + increment_[1]);
}

namespace {

Vector initial_sphere_point(const SimConfig& cfg, Rng& rng) {
  Vector y0 = cfg.initial ? cfg.initial->coords : uniform_sphere_point(rng);
  if (y0.size() != 3) throw SimulationError("sphere initial point must be a 3-vector");
  return y0;
}

std::array<double, 2> initial_plane_point(const SimConfig& cfg, Rng& rng) {
  if (cfg.initial) {
    if (cfg.initial->coords.size() != 2) throw SimulationError("plane initial point must be (u, v)");
    return {cfg.initial->coords(0), cfg.initial->coords(1)};
  }
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  const double u = angle(rng);
  return {u, angle(rng)};
}

void visit_sphere(const SimConfig& cfg, const PointSink& sink) {
  Rng rng = make_rng(cfg.seed);
  SphereStepper stepper(cfg, initial_sphere_point(cfg, rng), rng);
  const Vector axes = cfg.manifold.semi_axes();
  double x[3];
  auto emit = [&] {
    const Vector& y = stepper.state();
    for (int i = 0; i < 3; ++i) x[i] = axes(i) * y(i);
    sink(std::span<const double>(x, 3));
  };
  const std::size_t steps = cfg.n_steps / cfg.record_every * cfg.record_every;
  emit();
  for (std::size_t k = 1; k <= steps; ++k) {
    stepper.advance();
    if (k % cfg.record_every == 0) emit();
  }
}

void visit_plane(const SimConfig& cfg, const PointSink& sink) {
  Rng rng = make_rng(cfg.seed);
  PlaneStepper stepper(cfg, initial_plane_point(cfg, rng), rng);
  auto emit = [&] {
    const Vector x = embed(cfg.manifold, angle_point(stepper.state()[0], stepper.state()[1]));
    sink(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())));
  };
  const std::size_t steps = cfg.n_steps / cfg.record_every * cfg.record_every;
  emit();
  for (std::size_t k = 1; k <= steps; ++k) {
    stepper.advance();
    if (k % cfg.record_every == 0) emit();
  }
}

Trajectory collect(const SimConfig& cfg) {
  const std::size_t kept = cfg.n_steps / cfg.record_every;
  const int p = cfg.manifold.ambient_dim();
  std::vector<double> coords;
  coords.reserve((kept + 1) * static_cast<std::size_t>(p));
  simulate_visit(cfg, [&](std::span<const double> x) { coords.insert(coords.end(), x.begin(), x.end()); });
  return Trajectory(cfg.manifold, cfg.delta * static_cast<double>(cfg.record_every), cfg.seed,
                    scheme_id_for(cfg.manifold.kind()), std::move(coords));
}

}  // namespace

void simulate_visit(const SimConfig& cfg, const PointSink& sink) {
  check_config(cfg);
  if (cfg.manifold.kind() == ManifoldKind::Ellipsoid)
    visit_sphere(cfg, sink);
  else
    visit_plane(cfg, sink);
}

Trajectory simulate_sphere(const SimConfig& cfg) {
  if (cfg.manifold.kind() != ManifoldKind::Ellipsoid)
    throw SimulationError("simulate_sphere needs an ellipsoid manifold");
  return collect(cfg);
}

Trajectory simulate_plane(const SimConfig& cfg) {
  if (cfg.manifold.kind() != ManifoldKind::KleinBottle)
    throw SimulationError("simulate_plane needs a Klein bottle manifold");
  return collect(cfg);
}

Trajectory simulate(const SimConfig& cfg) { return collect(cfg); }

Trajectory downsample(const Trajectory& t, std::size_t stride) {
  if (stride < 1) throw SimulationError("stride must be at least 1");
  const std::size_t kept = (t.size() - 1) / stride + 1;
  if (kept < 2) throw SimulationError("stride exceeds length");
  std::vector<double> coords;
  coords.reserve(kept * static_cast<std::size_t>(t.dim()));
  for (std::size_t i = 0; i < kept; ++i) {
    const auto x = t.point_span(i * stride);
    coords.insert(coords.end(), x.begin(), x.end());
  }
  return Trajectory(t.manifold(), t.delta() * static_cast<double>(stride), t.seed(), t.scheme_id(),
                    std::move(coords));
}

}  // namespace msde
