#include "msde/experiments.hpp"

#include "msde/csv.hpp"
#include "msde/parallel.hpp"
#include "msde/trajectory_io.hpp"

#if __has_include(<nlohmann/json.hpp>)
#include <nlohmann/json.hpp>
#else
#include <json.hpp>
#endif

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>

namespace msde {

using Json = nlohmann::ordered_json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr std::uint64_t kBasePointSalt = 0x626173652d707473ULL;
constexpr std::size_t kBandwidthSampleSteps = 100000;

// ---------------------------------------------------------------------------
// JSON helpers

Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

template <class T>
T required(const Json& j, const char* key) {
  if (!j.contains(key)) throw ConfigError(std::string("missing required field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(std::string("field '") + key + "' has the wrong type");
  }
}

template <class T>
T optional_field(const Json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(std::string("field '") + key + "' has the wrong type");
  }
}

std::uint64_t parse_u64(const Json& j, const char* key) {
  const Json& v = j.at(key);
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return v.get<std::uint64_t>();
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    std::size_t used = 0;
    try {
      const auto value = std::stoull(s, &used, 0);
      if (used == s.size()) return value;
    } catch (const std::exception&) {
    }
  }
  throw ConfigError(std::string("field '") + key + "' must be an unsigned 64-bit integer");
}

std::size_t parse_count(const Json& j, const char* key) {
  const Json& v = j.at(key);
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (d >= 0.0 && std::floor(d) == d && d < 9.0e15) return static_cast<std::size_t>(d);
    throw ConfigError(std::string("field '") + key + "' must be a nonnegative integer");
  }
  return static_cast<std::size_t>(parse_u64(j, key));
}

void reject_unknown(const Json& j, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& item : j.items())
    if (!allowed.count(item.key())) throw ConfigError("unknown field '" + item.key() + "' in " + where);
}

ManifoldSpec parse_manifold(const Json& j) {
  if (!j.is_object()) throw ConfigError("'manifold' must be an object");
  const auto kind = required<std::string>(j, "kind");
  try {
    if (kind == "sphere") {
      reject_unknown(j, {"kind"}, "manifold");
      return ManifoldSpec::sphere();
    }
    if (kind == "ellipsoid") {
      reject_unknown(j, {"kind", "a", "b", "c", "scale"}, "manifold");
      const double a = required<double>(j, "a"), b = required<double>(j, "b"), c = required<double>(j, "c");
      if (j.contains("scale")) return ManifoldSpec::ellipsoid(a, b, c, required<double>(j, "scale"));
      return ManifoldSpec::ellipsoid(a, b, c);
    }
    if (kind == "klein_bottle") {
      reject_unknown(j, {"kind", "a", "r"}, "manifold");
      return ManifoldSpec::klein_bottle(optional_field<double>(j, "a", 2.0),
                                        optional_field<double>(j, "r", 1.0));
    }
  } catch (const GeometryError& e) {
    throw ConfigError(std::string("invalid manifold: ") + e.what());
  }
  throw ConfigError("unknown manifold kind '" + kind + "'");
}

Json manifold_json(const ManifoldSpec& m) {
  Json j;
  if (m.kind() == ManifoldKind::Ellipsoid) {
    j["kind"] = "ellipsoid";
    j["a"] = m.a();
    j["b"] = m.b();
    j["c"] = m.c();
    j["scale"] = m.scale();
  } else {
    j["kind"] = "klein_bottle";
    j["a"] = m.major_radius();
    j["r"] = m.minor_radius();
  }
  return j;
}

BandwidthRule parse_bandwidth(const Json& j) {
  if (!j.is_object()) throw ConfigError("'bandwidth' must be an object");
  reject_unknown(j, {"rule", "fraction", "h"}, "bandwidth");
  BandwidthRule r;
  const std::string rule = optional_field<std::string>(j, "rule", j.contains("h") ? "explicit" : "neighbor_fraction");
  if (rule == "neighbor_fraction")
    r.kind = BandwidthRule::Kind::NeighborFraction;
  else if (rule == "path_length")
    r.kind = BandwidthRule::Kind::PathLength;
  else if (rule == "explicit")
    r.kind = BandwidthRule::Kind::Explicit;
  else
    throw ConfigError("unknown bandwidth rule '" + rule + "'");
  r.fraction = optional_field<double>(j, "fraction", 0.01);
  if (r.kind == BandwidthRule::Kind::Explicit) r.h = required<double>(j, "h");
  return r;
}

std::string rule_name(BandwidthRule::Kind k) {
  switch (k) {
    case BandwidthRule::Kind::NeighborFraction: return "neighbor_fraction";
    case BandwidthRule::Kind::PathLength: return "path_length";
    case BandwidthRule::Kind::Explicit: return "explicit";
  }
  return "";
}

Json bandwidth_json(const BandwidthRule& r) {
  Json j;
  j["rule"] = rule_name(r.kind);
  if (r.kind == BandwidthRule::Kind::Explicit)
    j["h"] = r.h;
  else
    j["fraction"] = r.fraction;
  return j;
}

BasePointScheme parse_base_points(const Json& j) {
  if (!j.is_object()) throw ConfigError("'base_points' must be an object");
  reject_unknown(j, {"scheme", "count", "rows", "cols", "points", "seed"}, "base_points");
  BasePointScheme s;
  const auto scheme = required<std::string>(j, "scheme");
  if (scheme == "uniform_sphere") {
    s.kind = BasePointScheme::Kind::UniformSphere;
    if (j.contains("count")) s.count = parse_count(j, "count");
  } else if (scheme == "uniform_grid") {
    s.kind = BasePointScheme::Kind::UniformGrid;
    if (j.contains("rows")) s.rows = parse_count(j, "rows");
    if (j.contains("cols")) s.cols = parse_count(j, "cols");
  } else if (scheme == "explicit") {
    s.kind = BasePointScheme::Kind::Explicit;
    s.points = required<std::vector<std::vector<double>>>(j, "points");
  } else {
    throw ConfigError("unknown base-point scheme '" + scheme + "'");
  }
  if (j.contains("seed")) s.seed = parse_u64(j, "seed");
  return s;
}

Json base_points_json(const BasePointScheme& s) {
  Json j;
  switch (s.kind) {
    case BasePointScheme::Kind::UniformSphere:
      j["scheme"] = "uniform_sphere";
      j["count"] = s.count;
      break;
    case BasePointScheme::Kind::UniformGrid:
      j["scheme"] = "uniform_grid";
      j["rows"] = s.rows;
      j["cols"] = s.cols;
      break;
    case BasePointScheme::Kind::Explicit:
      j["scheme"] = "explicit";
      j["points"] = s.points;
      break;
  }
  if (s.seed) j["seed"] = *s.seed;
  return j;
}

ExperimentKind parse_kind(const std::string& s) {
  if (s == "simulate") return ExperimentKind::Simulate;
  if (s == "density_convergence") return ExperimentKind::DensityConvergence;
  if (s == "error_table") return ExperimentKind::ErrorTable;
  if (s == "clt_mc") return ExperimentKind::CltMonteCarlo;
  throw ConfigError("unknown experiment '" + s + "'");
}

Json config_json(const ExperimentConfig& c) {
  Json j;
  j["experiment"] = to_string(c.experiment);
  j["manifold"] = manifold_json(c.manifold);
  j["n"] = c.n;
  j["delta"] = c.delta;
  j["stride"] = c.stride;
  j["seed"] = c.seed;
  j["radius_law"] = to_string(c.radius_law);
  j["bandwidth"] = bandwidth_json(c.bandwidth);
  j["base_points"] = base_points_json(c.base_points);
  j["d"] = c.d;
  j["min_neighbors"] = c.min_neighbors;
  j["threshold"] = c.threshold;
  if (c.experiment == ExperimentKind::DensityConvergence) {
    j["ladder"] = c.ladder;
    j["reference_n"] = c.reference_n;
  }
  if (c.experiment == ExperimentKind::CltMonteCarlo) {
    j["replicates"] = c.replicates;
    j["point"] = c.point;
  }
  return j;
}

// ---------------------------------------------------------------------------
// Output helpers

struct OutputDir {
  std::filesystem::path dir;
  std::vector<std::filesystem::path> files;

  bool enabled() const { return !dir.empty(); }

  std::filesystem::path path(const std::string& name) {
    std::filesystem::create_directories(dir);
    files.push_back(dir / name);
    return files.back();
  }

  void write_text(const std::string& name, const std::string& text) {
    std::ofstream out(path(name), std::ios::binary | std::ios::trunc);
    out << text;
    if (!out) throw std::runtime_error("cannot write " + (dir / name).string());
  }
};

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

std::vector<std::string> numbered(const std::string& prefix, int count) {
  std::vector<std::string> out;
  for (int i = 1; i <= count; ++i) out.push_back(prefix + std::to_string(i));
  return out;
}

void append(std::vector<std::string>& a, const std::vector<std::string>& b) { a.insert(a.end(), b.begin(), b.end()); }

void put_vector(CsvWriter& w, const Vector& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) w.field(v(i));
}

void put_empty(CsvWriter& w, std::size_t count) {
  for (std::size_t i = 0; i < count; ++i) w.field(std::string_view());
}

void put_upper(CsvWriter& w, const Matrix& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = i; j < m.cols(); ++j) w.field(m(i, j));
}

std::vector<std::string> upper_names(const std::string& prefix, int p) {
  std::vector<std::string> out;
  for (int i = 1; i <= p; ++i)
    for (int j = i; j <= p; ++j) out.push_back(prefix + std::to_string(i) + std::to_string(j));
  return out;
}

std::vector<std::string> intrinsic_names(const ManifoldSpec& m) {
  if (m.kind() == ManifoldKind::Ellipsoid) return {"q1", "q2", "q3"};
  return {"u", "v"};
}

EstimatorConfig estimator_config(const ExperimentConfig& cfg, double h) {
  EstimatorConfig ec;
  ec.h = h;
  ec.d = cfg.d;
  ec.min_neighbors = cfg.min_neighbors;
  return ec;
}

Json resolved_json(const ExperimentConfig& cfg, double h) {
  const BumpKernel k;
  Json j;
  j["h"] = h;
  j["bandwidth_rule"] = rule_name(cfg.bandwidth.kind);
  j["kernel"] = "bump";
  j["kernel_support"] = k.support;
  j["kappa10"] = kernel_moment(k, 1, 0, cfg.d);
  j["kappa20"] = kernel_moment(k, 2, 0, cfg.d);
  j["radius_law"] = to_string(cfg.radius_law);
  j["observed_delta"] = cfg.delta * static_cast<double>(cfg.stride);
  j["trajectory_points"] = cfg.n + 1;
  j["summation"] = "k = 0 .. N-2";
  return j;
}

struct Moments {
  double mean = kNaN, sd = kNaN, median = kNaN;
  std::size_t count = 0;
};

Moments moments_of(const std::vector<double>& v) {
  Moments m;
  m.count = v.size();
  if (v.empty()) return m;
  m.mean = mean(v);
  m.sd = stddev(v);
  m.median = median(v);
  return m;
}

Json moments_json(const Moments& m) {
  Json j;
  j["count"] = m.count;
  j["mean"] = number_or_null(m.mean);
  j["std"] = number_or_null(m.sd);
  j["median"] = number_or_null(m.median);
  return j;
}

double adjusted_p(const std::vector<double>& a, const std::vector<double>& b, double factor) {
  try {
    const double p = wilcoxon_one_sided(a, b).p_value;
    return std::min(1.0, p * factor);
  } catch (const MetricsError&) {
    return kNaN;
  }
}

double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() < 2) return kNaN;
  const double mx = mean(x), my = mean(y);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  return sxx > 0.0 ? sxy / sxx : kNaN;
}

}  // namespace

// ---------------------------------------------------------------------------
// Configuration

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::Simulate: return "simulate";
    case ExperimentKind::DensityConvergence: return "density_convergence";
    case ExperimentKind::ErrorTable: return "error_table";
    case ExperimentKind::CltMonteCarlo: return "clt_mc";
  }
  return "";
}

ExperimentConfig ExperimentConfig::from_json(const std::string& text, bool require_experiment) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  reject_unknown(j,
                 {"experiment", "manifold", "n", "delta", "stride", "seed", "radius_law", "bandwidth",
                  "base_points", "d", "min_neighbors", "threshold", "ladder", "reference_n",
                  "replicates", "point", "output_dir", "threads", "trajectory"},
                 "config");

  ExperimentConfig c;
  if (require_experiment || j.contains("experiment"))
    c.experiment = parse_kind(required<std::string>(j, "experiment"));
  if (j.contains("manifold")) c.manifold = parse_manifold(j.at("manifold"));
  if (j.contains("n")) c.n = parse_count(j, "n");
  c.delta = optional_field<double>(j, "delta", c.delta);
  if (j.contains("stride")) c.stride = parse_count(j, "stride");
  if (j.contains("seed")) c.seed = parse_u64(j, "seed");
  if (j.contains("radius_law")) {
    try {
      c.radius_law = radius_law_from_string(required<std::string>(j, "radius_law"));
    } catch (const SimulationError& e) {
      throw ConfigError(e.what());
    }
  }
  if (j.contains("bandwidth")) c.bandwidth = parse_bandwidth(j.at("bandwidth"));
  if (j.contains("base_points")) {
    c.base_points = parse_base_points(j.at("base_points"));
  } else if (c.manifold.kind() == ManifoldKind::KleinBottle) {
    c.base_points.kind = BasePointScheme::Kind::UniformGrid;
  }
  c.d = optional_field<int>(j, "d", c.d);
  if (j.contains("min_neighbors")) c.min_neighbors = parse_count(j, "min_neighbors");
  c.threshold = optional_field<double>(j, "threshold", c.threshold);
  if (j.contains("ladder")) {
    for (std::size_t i = 0; i < j.at("ladder").size(); ++i) {
      const Json wrapper = {{"v", j.at("ladder").at(i)}};
      c.ladder.push_back(parse_count(wrapper, "v"));
    }
  }
  if (j.contains("reference_n")) c.reference_n = parse_count(j, "reference_n");
  if (j.contains("replicates")) c.replicates = parse_count(j, "replicates");
  if (j.contains("point")) c.point = required<std::vector<double>>(j, "point");
  if (c.point.empty() && c.experiment == ExperimentKind::CltMonteCarlo &&
      c.manifold.kind() == ManifoldKind::Ellipsoid)
    c.point = {0.0, 0.0, 1.0};
  if (j.contains("output_dir")) c.output_dir = required<std::string>(j, "output_dir");
  if (j.contains("trajectory")) c.trajectory = required<std::string>(j, "trajectory");
  if (j.contains("threads")) c.threads = static_cast<unsigned>(parse_count(j, "threads"));
  c.validate();
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path, bool require_experiment) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str(), require_experiment);
}

std::string ExperimentConfig::to_json() const { return config_json(*this).dump(2); }

void ExperimentConfig::validate() const {
  if (n < 1) throw ConfigError("n must be positive");
  if (!(delta > 0.0)) throw ConfigError("delta must be positive");
  if (stride < 1) throw ConfigError("stride must be positive");
  if (d < 1 || d > manifold.ambient_dim()) throw ConfigError("d out of range");
  if (!(threshold >= 0.0)) throw ConfigError("threshold must be nonnegative");
  if (bandwidth.kind == BandwidthRule::Kind::Explicit) {
    if (!(bandwidth.h > 0.0)) throw ConfigError("explicit bandwidth must be positive");
  } else if (!(bandwidth.fraction > 0.0 && bandwidth.fraction < 1.0)) {
    throw ConfigError("bandwidth fraction must lie in (0, 1)");
  }
  const bool ellipsoid = manifold.kind() == ManifoldKind::Ellipsoid;
  switch (base_points.kind) {
    case BasePointScheme::Kind::UniformSphere:
      if (!ellipsoid) throw ConfigError("uniform_sphere base points need an ellipsoid");
      if (base_points.count < 1) throw ConfigError("base point count must be positive");
      break;
    case BasePointScheme::Kind::UniformGrid:
      if (ellipsoid) throw ConfigError("uniform_grid base points need the Klein bottle");
      if (base_points.rows < 1 || base_points.cols < 1) throw ConfigError("grid must be nonempty");
      break;
    case BasePointScheme::Kind::Explicit:
      if (base_points.points.empty()) throw ConfigError("explicit base points must be nonempty");
      for (const auto& q : base_points.points)
        if (static_cast<int>(q.size()) != manifold.coordinate_dim())
          throw ConfigError("explicit base point has the wrong dimension");
      break;
  }
  if (experiment == ExperimentKind::DensityConvergence) {
    if (ladder.empty()) throw ConfigError("density_convergence needs a ladder");
    for (const std::size_t v : ladder)
      if (v < 1) throw ConfigError("ladder entries must be positive");
    const std::size_t top = *std::max_element(ladder.begin(), ladder.end());
    if (reference_n != 0 && reference_n < top) throw ConfigError("reference_n below the largest ladder entry");
    if (base_points.kind == BasePointScheme::Kind::Explicit)
      throw ConfigError("density_convergence needs a uniform base-point scheme");
  }
  if (experiment == ExperimentKind::CltMonteCarlo) {
    if (replicates < 8) throw ConfigError("clt_mc needs at least 8 replicates");
    if (static_cast<int>(point.size()) != manifold.coordinate_dim())
      throw ConfigError("clt_mc needs 'point' in intrinsic coordinates");
  }
}

SimConfig ExperimentConfig::sim_config(std::uint64_t run_seed) const {
  SimConfig s;
  s.manifold = manifold;
  s.n_steps = n * stride;
  s.delta = delta;
  s.seed = run_seed;
  s.radius_law = radius_law;
  s.record_every = stride;
  return s;
}

double resolve_bandwidth(const BandwidthRule& rule, const Trajectory& t, const BumpKernel& k) {
  switch (rule.kind) {
    case BandwidthRule::Kind::Explicit: return rule.h;
    case BandwidthRule::Kind::PathLength: return bandwidth_heuristic(t, rule.fraction, k);
    case BandwidthRule::Kind::NeighborFraction: return neighbor_fraction_bandwidth(t, rule.fraction, k);
  }
  throw ConfigError("unknown bandwidth rule");
}

std::vector<IntrinsicPoint> make_base_points(const BasePointScheme& scheme, const ManifoldSpec& m,
                                             std::uint64_t run_seed) {
  std::vector<IntrinsicPoint> out;
  switch (scheme.kind) {
    case BasePointScheme::Kind::UniformSphere: {
      if (m.kind() != ManifoldKind::Ellipsoid) throw ConfigError("uniform_sphere base points need an ellipsoid");
      Rng rng = make_rng(scheme.seed.value_or(splitmix64(run_seed ^ kBasePointSalt)));
      for (std::size_t i = 0; i < scheme.count; ++i) out.push_back({uniform_sphere_point(rng)});
      break;
    }
    case BasePointScheme::Kind::UniformGrid: {
      if (m.kind() != ManifoldKind::KleinBottle) throw ConfigError("uniform_grid base points need the Klein bottle");
      const double two_pi = 2.0 * std::numbers::pi;
      for (std::size_t i = 0; i < scheme.rows; ++i)
        for (std::size_t j = 0; j < scheme.cols; ++j)
          out.push_back(angle_point(two_pi * (static_cast<double>(i) + 0.5) / static_cast<double>(scheme.rows),
                                    two_pi * (static_cast<double>(j) + 0.5) / static_cast<double>(scheme.cols)));
      break;
    }
    case BasePointScheme::Kind::Explicit:
      for (const auto& q : scheme.points) {
        if (m.kind() == ManifoldKind::Ellipsoid) {
          if (q.size() != 3) throw ConfigError("explicit ellipsoid points need 3 coordinates");
          out.push_back(sphere_point(q[0], q[1], q[2]));
        } else {
          if (q.size() != 2) throw ConfigError("explicit Klein-bottle points need (u, v)");
          const auto uv = reduce_fundamental_domain(q[0], q[1]);
          out.push_back(angle_point(uv[0], uv[1]));
        }
      }
      break;
  }
  return out;
}

std::vector<double> surface_weights(const ManifoldSpec& m, const std::vector<IntrinsicPoint>& qs) {
  std::vector<double> w;
  w.reserve(qs.size());
  const double count = static_cast<double>(qs.size());
  if (m.kind() == ManifoldKind::Ellipsoid) {
    // area element of y -> A y on the unit sphere: det(A) |A^{-1} y|
    const Vector axes = m.semi_axes();
    const double det = axes.prod();
    for (const auto& q : qs) {
      const Vector y = q.coords / q.coords.norm();
      w.push_back(4.0 * std::numbers::pi * det * y.cwiseQuotient(axes).norm() / count);
    }
  } else {
    // the parameterisation covers the image twice ((u, v) ~ (u, pi - v))
    const double domain = 4.0 * std::numbers::pi * std::numbers::pi;
    for (const auto& q : qs) {
      const Matrix j = embedding_jacobian(m, q);
      const Matrix g = j.transpose() * j;
      const double area = std::sqrt(std::max(0.0, g(0, 0) * g(1, 1) - g(0, 1) * g(1, 0)));
      w.push_back(0.5 * domain * area / count);
    }
  }
  return w;
}

// ---------------------------------------------------------------------------
// simulate

SimulateResult run_simulate(const ExperimentConfig& cfg) {
  cfg.validate();
  SimulateResult r{simulate(cfg.sim_config(cfg.seed)), {}};
  OutputDir out{cfg.output_dir, {}};
  if (out.enabled()) {
    write_trajectory(r.trajectory, out.path("trajectory.bin"));
    Json s;
    s["config"] = config_json(cfg);
    Json res;
    res["points"] = r.trajectory.size();
    res["ambient_dim"] = r.trajectory.dim();
    res["delta"] = r.trajectory.delta();
    res["scheme_id"] = r.trajectory.scheme_id();
    res["radius_law"] = to_string(cfg.radius_law);
    double worst = 0.0;
    for (std::size_t k = 0; k < r.trajectory.size(); ++k)
      worst = std::max(worst, manifold_residual(cfg.manifold, r.trajectory.point(k)));
    res["max_manifold_residual"] = worst;
    s["results"] = res;
    out.write_text("summary.json", dump(s));
  }
  r.files = out.files;
  return r;
}

// ---------------------------------------------------------------------------
// density convergence

DensityConvergenceResult run_density_convergence(const ExperimentConfig& cfg) {
  cfg.validate();
  DensityConvergenceResult r;
  r.ladder = cfg.ladder;
  const std::size_t top = *std::max_element(cfg.ladder.begin(), cfg.ladder.end());
  r.reference_n = cfg.reference_n == 0 ? top : cfg.reference_n;

  ExperimentConfig ref_cfg = cfg;
  ref_cfg.n = r.reference_n;
  const SimConfig sim = ref_cfg.sim_config(cfg.seed);

  const BumpKernel kernel;
  if (cfg.bandwidth.kind == BandwidthRule::Kind::Explicit) {
    r.h = cfg.bandwidth.h;
  } else {
    // same seed: this is a prefix of the reference path
    ExperimentConfig sample_cfg = cfg;
    sample_cfg.n = std::min(r.reference_n, kBandwidthSampleSteps);
    r.h = resolve_bandwidth(cfg.bandwidth, simulate(sample_cfg.sim_config(cfg.seed)), kernel);
  }

  const std::vector<IntrinsicPoint> qs = make_base_points(cfg.base_points, cfg.manifold, cfg.seed);
  std::vector<Vector> bases;
  bases.reserve(qs.size());
  for (const auto& q : qs) bases.push_back(embed(cfg.manifold, q));
  const std::vector<double> weights = surface_weights(cfg.manifold, qs);

  std::vector<std::size_t> checkpoints = cfg.ladder;
  checkpoints.push_back(r.reference_n);
  std::sort(checkpoints.begin(), checkpoints.end());
  checkpoints.erase(std::unique(checkpoints.begin(), checkpoints.end()), checkpoints.end());

  // Running kernel sums; a prefix with n steps sums over points 0 .. n-1.
  OccupationAccumulator acc(bases, r.h, kernel);
  std::vector<std::vector<double>> snapshots(checkpoints.size());
  std::size_t next = 0;
  simulate_visit(sim, [&](std::span<const double> x) {
    while (next < checkpoints.size() && acc.count() == checkpoints[next]) snapshots[next++] = acc.sums();
    if (acc.count() < r.reference_n) acc.add(x.data());
  });
  while (next < checkpoints.size() && acc.count() == checkpoints[next]) snapshots[next++] = acc.sums();

  const double kappa10 = kernel_moment(kernel, 1, 0, cfg.d);
  const double hd = std::pow(r.h, cfg.d);
  auto density = [&](std::size_t n) {
    const auto pos = static_cast<std::size_t>(std::lower_bound(checkpoints.begin(), checkpoints.end(), n) -
                                              checkpoints.begin());
    std::vector<double> f = snapshots[pos];
    for (double& v : f) v /= static_cast<double>(n) * hd * kappa10;
    return f;
  };
  const std::vector<double> reference = density(r.reference_n);

  std::vector<double> fit_x, fit_y;
  std::vector<std::vector<double>> per_rung;
  for (const std::size_t n : cfg.ladder) {
    per_rung.push_back(density(n));
    const double err = l2_density_error(per_rung.back(), reference, weights);
    r.l2_error.push_back(err);
    const bool fit = n < r.reference_n && err > 0.0;
    r.in_fit.push_back(fit);
    if (fit) {
      fit_x.push_back(std::log10(static_cast<double>(n)));
      fit_y.push_back(std::log10(err));
    }
  }
  r.slope = least_squares_slope(fit_x, fit_y);

  OutputDir out{cfg.output_dir, {}};
  if (out.enabled()) {
    {
      std::ofstream f(out.path("density_convergence.csv"), std::ios::binary);
      CsvWriter w(f, {"n", "l2_error", "in_fit"});
      for (std::size_t i = 0; i < cfg.ladder.size(); ++i) {
        w.field(static_cast<std::uint64_t>(cfg.ladder[i])).field(r.l2_error[i]).field(static_cast<bool>(r.in_fit[i]));
        w.end_row();
      }
    }
    {
      std::ofstream f(out.path("density_grid.csv"), std::ios::binary);
      std::vector<std::string> header{"index"};
      append(header, intrinsic_names(cfg.manifold));
      append(header, numbered("x", cfg.manifold.ambient_dim()));
      header.push_back("weight");
      header.push_back("reference");
      for (const std::size_t n : cfg.ladder) header.push_back("n_" + std::to_string(n));
      CsvWriter w(f, header);
      for (std::size_t b = 0; b < qs.size(); ++b) {
        w.field(static_cast<std::uint64_t>(b));
        put_vector(w, qs[b].coords);
        put_vector(w, bases[b]);
        w.field(weights[b]).field(reference[b]);
        for (const auto& rung : per_rung) w.field(rung[b]);
        w.end_row();
      }
    }
    Json s;
    s["config"] = config_json(cfg);
    Json resolved = resolved_json(ref_cfg, r.h);
    resolved["reference_n"] = r.reference_n;
    resolved["bandwidth_sample_n"] = std::min(r.reference_n, kBandwidthSampleSteps);
    resolved["density_normalisation"] = "kernel sum / (n h^d kappa10)";
    resolved["quadrature"] = "area element x parameter measure / grid size";
    s["resolved"] = resolved;
    Json res;
    Json rows = Json::array();
    for (std::size_t i = 0; i < cfg.ladder.size(); ++i)
      rows.push_back({{"n", cfg.ladder[i]}, {"l2_error", r.l2_error[i]}, {"in_fit", static_cast<bool>(r.in_fit[i])}});
    res["ladder"] = rows;
    res["slope"] = number_or_null(r.slope);
    s["results"] = res;
    out.write_text("summary.json", dump(s));
  }
  r.files = out.files;
  return r;
}

// ---------------------------------------------------------------------------
// error table

namespace {

struct PointRecord {
  bool ok = false;
  std::string error;
  PointEstimates est;
  Vector mu_true;
  Matrix pi_true;
  Vector p_mu_E;
  ErrorRecord e_mu_E, e_mu_o, e_p_mu_E;
  DiffusionErrorRecord diff;
};

EstimatorSummary summarise(const std::vector<PointRecord>& recs, ErrorRecord PointRecord::*field,
                           Json& out) {
  std::vector<double> nrmse, rel, angle, below;
  for (const auto& r : recs) {
    if (!r.ok) continue;
    const ErrorRecord& e = r.*field;
    if (e.stratum == Stratum::Below) {
      below.push_back(e.abs_err);
      continue;
    }
    nrmse.push_back(*e.nrmse);
    rel.push_back(*e.rel_norm_err);
    if (e.angle_err) angle.push_back(*e.angle_err);
  }
  const Moments mn = moments_of(nrmse), mr = moments_of(rel), ma = moments_of(angle), mb = moments_of(below);
  out["above"] = {{"nrmse", moments_json(mn)}, {"rel_norm_err", moments_json(mr)}, {"angle_err", moments_json(ma)}};
  out["below"] = {{"abs_err", moments_json(mb)}};
  EstimatorSummary s;
  s.count = nrmse.size();
  s.median_nrmse = mn.median;
  s.mean_nrmse = mn.mean;
  s.std_nrmse = mn.sd;
  s.mean_rel_norm = mr.mean;
  s.std_rel_norm = mr.sd;
  s.mean_angle = ma.mean;
  s.std_angle = ma.sd;
  s.mean_abs_below = mb.mean;
  s.std_abs_below = mb.sd;
  return s;
}

}  // namespace

ErrorTableResult run_error_table(const ExperimentConfig& cfg) {
  cfg.validate();
  ErrorTableResult r;
  const Trajectory t = simulate(cfg.sim_config(cfg.seed));
  r.h = resolve_bandwidth(cfg.bandwidth, t);
  const EstimatorConfig ec = estimator_config(cfg, r.h);

  const std::vector<IntrinsicPoint> qs = make_base_points(cfg.base_points, cfg.manifold, cfg.seed);
  std::vector<Vector> xs;
  xs.reserve(qs.size());
  for (const auto& q : qs) xs.push_back(embed(cfg.manifold, q));
  const std::vector<BatchEntry> batch = batch_estimate(t, xs, ec, cfg.threads);

  std::vector<PointRecord> recs(qs.size());
  double sup = 0.0;
  for (std::size_t i = 0; i < qs.size(); ++i) {
    recs[i].mu_true = true_drift(cfg.manifold, qs[i]);
    recs[i].pi_true = true_diffusion(cfg.manifold, qs[i]);
    sup = std::max(sup, recs[i].mu_true.norm());
  }
  if (!(sup > 0.0)) throw std::runtime_error("true drift vanishes at every base point");

  for (std::size_t i = 0; i < qs.size(); ++i) {
    PointRecord& rec = recs[i];
    if (!batch[i].ok()) {
      rec.error = batch[i].error;
      ++r.failures;
      continue;
    }
    rec.ok = true;
    rec.est = *batch[i].estimates;
    rec.p_mu_E = tangent_projector(cfg.manifold, qs[i]) * rec.est.mu_E;
    rec.e_mu_E = drift_errors(rec.est.mu_E, rec.mu_true, sup, cfg.threshold);
    rec.e_mu_o = drift_errors(rec.est.mu_o, rec.mu_true, sup, cfg.threshold);
    rec.e_p_mu_E = drift_errors(rec.p_mu_E, rec.mu_true, sup, cfg.threshold);
    rec.diff = diffusion_errors(rec.est.pi_hat, rec.pi_true, cfg.d);
    (rec.e_mu_E.stratum == Stratum::Above ? r.above : r.below) += 1;
  }
  r.points = qs.size();

  Json s_mu_E, s_mu_o, s_p_mu_E;
  r.mu_E = summarise(recs, &PointRecord::e_mu_E, s_mu_E);
  r.mu_o = summarise(recs, &PointRecord::e_mu_o, s_mu_o);
  r.p_mu_E = summarise(recs, &PointRecord::e_p_mu_E, s_p_mu_E);

  std::vector<double> frob, sines, n_E, n_o, n_P;
  std::size_t sparse = 0, gaps = 0;
  for (const auto& rec : recs) {
    if (!rec.ok) continue;
    frob.push_back(rec.diff.frob_rel_err);
    sines.push_back(rec.diff.sin_theta);
    sparse += rec.est.sparse_flag ? 1 : 0;
    gaps += rec.est.gap_flag ? 1 : 0;
    if (rec.e_mu_E.stratum == Stratum::Above) {
      n_E.push_back(*rec.e_mu_E.nrmse);
      n_o.push_back(*rec.e_mu_o.nrmse);
      n_P.push_back(*rec.e_p_mu_E.nrmse);
    }
  }
  const Moments mf = moments_of(frob), ms = moments_of(sines);
  r.median_frob = mf.median;
  r.mean_frob = mf.mean;
  r.std_frob = mf.sd;
  r.median_sin_theta = ms.median;
  r.mean_sin_theta = ms.mean;
  r.std_sin_theta = ms.sd;
  constexpr double kComparisons = 3.0;
  r.p_mu_o_lt_mu_E = adjusted_p(n_o, n_E, kComparisons);
  r.p_p_mu_E_lt_mu_o = adjusted_p(n_P, n_o, kComparisons);
  r.p_p_mu_E_lt_mu_E = adjusted_p(n_P, n_E, kComparisons);

  OutputDir out{cfg.output_dir, {}};
  if (out.enabled()) {
    const int p = cfg.manifold.ambient_dim();
    {
      std::ofstream f(out.path("error_table.csv"), std::ios::binary);
      std::vector<std::string> header{"index"};
      append(header, intrinsic_names(cfg.manifold));
      append(header, numbered("x", p));
      append(header, {"status", "error", "stratum", "n_active", "sparse", "gap", "L_hat"});
      append(header, numbered("mu_true_", p));
      append(header, numbered("mu_E_", p));
      append(header, numbered("mu_o_", p));
      append(header, numbered("P_mu_E_", p));
      for (const char* name : {"mu_E", "mu_o", "P_mu_E"})
        for (const char* metric : {"nrmse", "rel_norm_err", "angle_err", "abs_err"})
          header.push_back(std::string(name) + "_" + metric);
      append(header, {"frob_rel_err", "sin_theta"});
      const std::size_t tail = 4 + 4 * static_cast<std::size_t>(p) + 12 + 2;
      CsvWriter w(f, header);
      for (std::size_t i = 0; i < recs.size(); ++i) {
        const PointRecord& rec = recs[i];
        w.field(static_cast<std::uint64_t>(i));
        put_vector(w, qs[i].coords);
        put_vector(w, xs[i]);
        if (!rec.ok) {
          w.field("error").field(rec.error);
          put_empty(w, tail);
          w.end_row();
          continue;
        }
        w.field("ok").field("").field(rec.e_mu_E.stratum == Stratum::Above ? "above" : "below");
        w.field(static_cast<std::uint64_t>(rec.est.n_active)).field(rec.est.sparse_flag).field(rec.est.gap_flag);
        w.field(rec.est.L_hat);
        put_vector(w, rec.mu_true);
        put_vector(w, rec.est.mu_E);
        put_vector(w, rec.est.mu_o);
        put_vector(w, rec.p_mu_E);
        for (const ErrorRecord* e : {&rec.e_mu_E, &rec.e_mu_o, &rec.e_p_mu_E})
          w.field(e->nrmse).field(e->rel_norm_err).field(e->angle_err).field(e->abs_err);
        w.field(rec.diff.frob_rel_err).field(rec.diff.sin_theta);
        w.end_row();
      }
    }
    Json s;
    s["config"] = config_json(cfg);
    Json resolved = resolved_json(cfg, r.h);
    resolved["drift_sup_norm"] = sup;
    resolved["bonferroni_factor"] = kComparisons;
    s["resolved"] = resolved;
    Json res;
    res["points"] = r.points;
    res["failures"] = r.failures;
    res["above"] = r.above;
    res["below"] = r.below;
    res["sparse_flags"] = sparse;
    res["gap_flags"] = gaps;
    res["mu_E"] = s_mu_E;
    res["mu_o"] = s_mu_o;
    res["P_mu_E"] = s_p_mu_E;
    res["diffusion"] = {{"frob_rel_err", moments_json(mf)}, {"sin_theta", moments_json(ms)}};
    res["wilcoxon_adjusted_p"] = {{"mu_o < mu_E", number_or_null(r.p_mu_o_lt_mu_E)},
                                  {"P_mu_E < mu_o", number_or_null(r.p_p_mu_E_lt_mu_o)},
                                  {"P_mu_E < mu_E", number_or_null(r.p_p_mu_E_lt_mu_E)}};
    s["results"] = res;
    out.write_text("summary.json", dump(s));
  }
  r.files = out.files;
  return r;
}

// ---------------------------------------------------------------------------
// CLT Monte Carlo

CltResult run_clt_mc(const ExperimentConfig& cfg) {
  cfg.validate();
  CltResult r;
  r.replicates = cfg.replicates;
  const BumpKernel kernel;

  IntrinsicPoint q;
  if (cfg.manifold.kind() == ManifoldKind::Ellipsoid) {
    q = sphere_point(cfg.point[0], cfg.point[1], cfg.point[2]);
  } else {
    const auto uv = reduce_fundamental_domain(cfg.point[0], cfg.point[1]);
    q = angle_point(uv[0], uv[1]);
  }
  const Vector x = embed(cfg.manifold, q);
  const Vector mu_true = true_drift(cfg.manifold, q);
  const Matrix pi_true = true_diffusion(cfg.manifold, q);
  const Matrix p_true = tangent_projector(cfg.manifold, q);

  std::vector<std::uint64_t> seeds(cfg.replicates);
  for (std::size_t i = 0; i < cfg.replicates; ++i) seeds[i] = derive_seed(cfg.seed, i);
  r.h = resolve_bandwidth(cfg.bandwidth, simulate(cfg.sim_config(seeds[0])), kernel);
  const EstimatorConfig ec = estimator_config(cfg, r.h);

  std::vector<std::optional<PointEstimates>> est(cfg.replicates);
  std::vector<std::string> errors(cfg.replicates);
  parallel_for(cfg.replicates, cfg.threads, [&](std::size_t i) {
    try {
      const Trajectory t = simulate(cfg.sim_config(seeds[i]));
      est[i] = KernelEstimator(t, ec).estimate(x);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });

  const double kappa10 = kernel_moment(kernel, 1, 0, cfg.d);
  const double kappa20 = kernel_moment(kernel, 2, 0, cfg.d) / (kappa10 * kappa10);
  const double observed_delta = cfg.delta * static_cast<double>(cfg.stride);
  std::vector<Vector> drift_err;
  std::vector<Matrix> diff_err;
  std::vector<double> l_norm;
  std::vector<std::size_t> ok_index;
  for (std::size_t i = 0; i < cfg.replicates; ++i) {
    if (!est[i]) {
      ++r.failures;
      continue;
    }
    ok_index.push_back(i);
    drift_err.push_back(est[i]->mu_o - mu_true);
    diff_err.push_back(est[i]->pi_hat - pi_true);
    l_norm.push_back(est[i]->L_hat / kappa10);
  }

  std::vector<Vector> zd, zp;
  if (!drift_err.empty()) {
    zd = standardize_drift_errors(drift_err, p_true, pi_true, kappa20, r.h, cfg.d, l_norm);
    zp = standardize_diffusion_errors(diff_err, pi_true, kappa20, r.h, cfg.d, observed_delta, l_norm);
  }
  const int nd = cfg.d;
  const int np = cfg.d * (cfg.d + 1) / 2;
  r.drift_z.assign(static_cast<std::size_t>(nd), {});
  r.diffusion_z.assign(static_cast<std::size_t>(np), {});
  for (std::size_t k = 0; k < zd.size(); ++k) {
    for (int a = 0; a < nd; ++a) r.drift_z[a].push_back(zd[k](a));
    for (int a = 0; a < np; ++a) r.diffusion_z[a].push_back(zp[k](a));
  }
  std::vector<std::string> drift_names = numbered("drift_", nd);
  std::vector<std::string> diff_names;
  for (int a = 1; a <= cfg.d; ++a)
    for (int b = a; b <= cfg.d; ++b) diff_names.push_back("diff_" + std::to_string(a) + std::to_string(b));

  auto assess = [](const std::string& name, const std::vector<double>& z) {
    CoordinateNormality c;
    c.name = name;
    c.moments.skewness = kNaN;
    c.moments.excess_kurtosis = kNaN;
    c.qq_max_deviation = kNaN;
    try {
      c.moments = moment_normality(z);
      c.qq_max_deviation = qq_max_deviation(qq_points(z));
    } catch (const MetricsError&) {
    }
    return c;
  };
  for (int a = 0; a < nd; ++a) r.drift.push_back(assess(drift_names[a], r.drift_z[a]));
  for (int a = 0; a < np; ++a) r.diffusion.push_back(assess(diff_names[a], r.diffusion_z[a]));

  OutputDir out{cfg.output_dir, {}};
  if (out.enabled()) {
    const int p = cfg.manifold.ambient_dim();
    {
      std::ofstream f(out.path("clt_replicates.csv"), std::ios::binary);
      std::vector<std::string> header{"replicate", "seed", "status", "error", "n_active", "L_hat"};
      append(header, numbered("mu_E_", p));
      append(header, numbered("mu_o_", p));
      append(header, upper_names("pi_hat_", p));
      append(header, numbered("z_drift_", nd));
      for (const auto& n : diff_names) header.push_back("z_" + n);
      CsvWriter w(f, header);
      const std::size_t tail = 2 + 2 * static_cast<std::size_t>(p) + static_cast<std::size_t>(p * (p + 1) / 2) +
                               static_cast<std::size_t>(nd + np);
      std::size_t k = 0;
      for (std::size_t i = 0; i < cfg.replicates; ++i) {
        w.field(static_cast<std::uint64_t>(i)).field(seeds[i]);
        if (!est[i]) {
          w.field("error").field(errors[i]);
          put_empty(w, tail);
          w.end_row();
          continue;
        }
        w.field("ok").field("");
        w.field(static_cast<std::uint64_t>(est[i]->n_active)).field(est[i]->L_hat);
        put_vector(w, est[i]->mu_E);
        put_vector(w, est[i]->mu_o);
        put_upper(w, est[i]->pi_hat);
        put_vector(w, zd[k]);
        put_vector(w, zp[k]);
        ++k;
        w.end_row();
      }
    }
    {
      std::ofstream f(out.path("clt_qq.csv"), std::ios::binary);
      std::vector<std::string> header{"rank", "theoretical"};
      append(header, drift_names);
      append(header, diff_names);
      CsvWriter w(f, header);
      std::vector<std::vector<std::pair<double, double>>> qq;
      if (ok_index.size() >= 2) {
        for (const auto& z : r.drift_z) qq.push_back(qq_points(z));
        for (const auto& z : r.diffusion_z) qq.push_back(qq_points(z));
        for (std::size_t i = 0; i < ok_index.size(); ++i) {
          w.field(static_cast<std::uint64_t>(i + 1)).field(qq.front()[i].first);
          for (const auto& c : qq) w.field(c[i].second);
          w.end_row();
        }
      }
    }
    Json s;
    s["config"] = config_json(cfg);
    Json resolved = resolved_json(cfg, r.h);
    resolved["bandwidth_source"] = "replicate 0";
    resolved["replicate_seed"] = "splitmix64(seed ^ (i + 1))";
    resolved["kappa20_normalised"] = kappa20;
    resolved["centering"] = "Monte-Carlo mean";
    resolved["drift_scaling"] = "sqrt(h^d L_hat / kappa10), whitened by (kappa20 P pi P)^(-1/2)";
    resolved["diffusion_scaling"] = "sqrt(h^d L_hat / (kappa10 delta)) in the eigenbasis of pi";
    resolved["qq_positions"] = "(i - 0.5) / n";
    resolved["qq_band"] = {0.05, 0.95};
    resolved["base_point_ambient"] = std::vector<double>(x.data(), x.data() + x.size());
    resolved["true_drift"] = std::vector<double>(mu_true.data(), mu_true.data() + mu_true.size());
    s["resolved"] = resolved;
    Json res;
    res["replicates"] = r.replicates;
    res["failures"] = r.failures;
    auto coord_json = [](const CoordinateNormality& c) {
      return Json{{"coordinate", c.name},
                  {"skewness", number_or_null(c.moments.skewness)},
                  {"excess_kurtosis", number_or_null(c.moments.excess_kurtosis)},
                  {"qq_max_deviation", number_or_null(c.qq_max_deviation)}};
    };
    Json drift = Json::array(), diff = Json::array();
    for (const auto& c : r.drift) drift.push_back(coord_json(c));
    for (const auto& c : r.diffusion) diff.push_back(coord_json(c));
    res["drift"] = drift;
    res["diffusion"] = diff;
    s["results"] = res;
    out.write_text("summary.json", dump(s));
  }
  r.files = out.files;
  return r;
}

// ---------------------------------------------------------------------------

std::vector<std::filesystem::path> run_experiment(const ExperimentConfig& cfg) {
  switch (cfg.experiment) {
    case ExperimentKind::Simulate: return run_simulate(cfg).files;
    case ExperimentKind::DensityConvergence: return run_density_convergence(cfg).files;
    case ExperimentKind::ErrorTable: return run_error_table(cfg).files;
    case ExperimentKind::CltMonteCarlo: return run_clt_mc(cfg).files;
  }
  throw ConfigError("unknown experiment");
}

std::vector<std::filesystem::path> run_estimate(const Trajectory& t, const ExperimentConfig& cfg,
                                                const std::vector<Vector>& ambient_points) {
  const double h = resolve_bandwidth(cfg.bandwidth, t);
  EstimatorConfig ec = estimator_config(cfg, h);
  std::vector<Vector> xs = ambient_points;
  if (xs.empty()) {
    for (const auto& q : make_base_points(cfg.base_points, t.manifold(), t.seed()))
      xs.push_back(embed(t.manifold(), q));
  }
  const std::vector<BatchEntry> batch = batch_estimate(t, xs, ec, cfg.threads);

  OutputDir out{cfg.output_dir, {}};
  if (!out.enabled()) throw ConfigError("estimate needs an output directory");
  const int p = t.dim();
  std::size_t failures = 0, sparse = 0, gaps = 0;
  {
    std::ofstream f(out.path("estimates.csv"), std::ios::binary);
    std::vector<std::string> header{"index"};
    append(header, numbered("x", p));
    append(header, {"status", "error", "n_active", "sparse", "gap", "L_hat"});
    append(header, numbered("mu_E_", p));
    append(header, numbered("mu_o_", p));
    append(header, upper_names("pi_hat_", p));
    append(header, upper_names("P_hat_", p));
    CsvWriter w(f, header);
    const std::size_t tail = 4 + 2 * static_cast<std::size_t>(p) + static_cast<std::size_t>(p * (p + 1));
    for (std::size_t i = 0; i < xs.size(); ++i) {
      w.field(static_cast<std::uint64_t>(i));
      put_vector(w, xs[i]);
      if (!batch[i].ok()) {
        ++failures;
        w.field("error").field(batch[i].error);
        put_empty(w, tail);
        w.end_row();
        continue;
      }
      const PointEstimates& e = *batch[i].estimates;
      sparse += e.sparse_flag ? 1 : 0;
      gaps += e.gap_flag ? 1 : 0;
      w.field("ok").field("");
      w.field(static_cast<std::uint64_t>(e.n_active)).field(e.sparse_flag).field(e.gap_flag).field(e.L_hat);
      put_vector(w, e.mu_E);
      put_vector(w, e.mu_o);
      put_upper(w, e.pi_hat);
      put_upper(w, e.P_hat);
      w.end_row();
    }
  }
  Json s;
  s["config"] = {{"bandwidth", bandwidth_json(cfg.bandwidth)},
                 {"d", cfg.d},
                 {"min_neighbors", cfg.min_neighbors},
                 {"base_points", ambient_points.empty() ? base_points_json(cfg.base_points) : Json("explicit ambient")}};
  s["trajectory"] = {{"manifold", manifold_json(t.manifold())},
                     {"points", t.size()},
                     {"delta", t.delta()},
                     {"seed", t.seed()},
                     {"scheme_id", t.scheme_id()}};
  s["resolved"] = {{"h", h}, {"kappa10", kernel_moment(ec.kernel, 1, 0, ec.d)}};
  s["results"] = {{"points", xs.size()}, {"failures", failures}, {"sparse_flags", sparse}, {"gap_flags", gaps}};
  out.write_text("summary.json", dump(s));
  return out.files;
}

}  // namespace msde
