#pragma once

// Declarative experiments: a JSON document describes the manifold, the
// simulation, the bandwidth rule, the base points and where to write results.
//
//   {
//     "experiment": "error_table",          // simulate | density_convergence |
//                                           // error_table | clt_mc
//     "manifold": {"kind": "ellipsoid", "a": 2, "b": 1.5, "c": 1},
//     "n": 100000, "delta": 0.01, "stride": 1, "seed": 7,
//     "radius_law": "chi",
//     "bandwidth": {"rule": "neighbor_fraction", "fraction": 0.01},
//     "base_points": {"scheme": "uniform_sphere", "count": 200},
//     "output_dir": "out", "threads": 4
//   }
//
// The simulator takes n * stride steps of size delta and keeps every stride-th
// state, so the observed trajectory has n + 1 points spaced stride * delta.

#include "msde/estimators.hpp"
#include "msde/geometry.hpp"
#include "msde/metrics.hpp"
#include "msde/simulate.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace msde {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ExperimentKind { Simulate, DensityConvergence, ErrorTable, CltMonteCarlo };

std::string to_string(ExperimentKind kind);

struct BandwidthRule {
  enum class Kind { NeighborFraction, PathLength, Explicit };
  Kind kind = Kind::NeighborFraction;
  double fraction = 0.01;
  double h = 0.0;
};

struct BasePointScheme {
  enum class Kind { UniformSphere, UniformGrid, Explicit };
  Kind kind = Kind::UniformSphere;
  std::size_t count = 200;
  std::size_t rows = 20;
  std::size_t cols = 20;
  /// Intrinsic coordinates: unit 3-vectors (ellipsoid) or (u, v) (Klein bottle).
  std::vector<std::vector<double>> points;
  /// Seed for random schemes; derived from the run seed when empty.
  std::optional<std::uint64_t> seed;
};

struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::ErrorTable;
  ManifoldSpec manifold = ManifoldSpec::sphere();
  std::size_t n = 100000;
  double delta = 1e-2;
  std::size_t stride = 1;
  std::uint64_t seed = 0;
  RadiusLaw radius_law = RadiusLaw::Chi;
  BandwidthRule bandwidth;
  BasePointScheme base_points;
  int d = 2;
  std::size_t min_neighbors = 5;
  /// Stratification threshold on |mu| / sup |mu|.
  double threshold = 0.05;
  // density_convergence
  std::vector<std::size_t> ladder;
  std::size_t reference_n = 0;  // 0: largest ladder entry
  // clt_mc
  std::size_t replicates = 0;
  std::vector<double> point;  // intrinsic coordinates of the fixed point
  // estimate: stored trajectory file
  std::filesystem::path trajectory;
  // output
  std::filesystem::path output_dir;
  unsigned threads = 1;

  /// Throws ConfigError on malformed input or missing required fields.
  /// `require_experiment = false` accepts documents without "experiment"
  /// (used by the estimate command).
  static ExperimentConfig from_json(const std::string& text, bool require_experiment = true);
  static ExperimentConfig load(const std::filesystem::path& path, bool require_experiment = true);
  /// Canonical JSON of every field except output_dir and threads.
  std::string to_json() const;
  void validate() const;
  SimConfig sim_config(std::uint64_t seed) const;
};

/// Bandwidth from the configured rule, evaluated on `t` when data-driven.
double resolve_bandwidth(const BandwidthRule& rule, const Trajectory& t, const BumpKernel& k = {});

std::vector<IntrinsicPoint> make_base_points(const BasePointScheme& scheme, const ManifoldSpec& m,
                                             std::uint64_t run_seed);

/// Quadrature weights for the L2 norm on the embedded surface: area element
/// at each base point times (parameter-domain measure / count). Ellipsoid base
/// points must be uniform on the sphere, Klein-bottle points a uniform grid.
std::vector<double> surface_weights(const ManifoldSpec& m, const std::vector<IntrinsicPoint>& qs);

struct SimulateResult {
  Trajectory trajectory;
  std::vector<std::filesystem::path> files;
};

struct DensityConvergenceResult {
  double h = 0.0;
  std::vector<std::size_t> ladder;
  std::vector<double> l2_error;
  std::vector<bool> in_fit;
  double slope = 0.0;
  std::size_t reference_n = 0;
  std::vector<std::filesystem::path> files;
};

struct EstimatorSummary {
  std::size_t count = 0;
  double median_nrmse = 0.0, mean_nrmse = 0.0, std_nrmse = 0.0;
  double mean_rel_norm = 0.0, std_rel_norm = 0.0;
  double mean_angle = 0.0, std_angle = 0.0;
  double mean_abs_below = 0.0, std_abs_below = 0.0;
};

struct ErrorTableResult {
  double h = 0.0;
  std::size_t points = 0;
  std::size_t failures = 0;
  std::size_t above = 0;
  std::size_t below = 0;
  EstimatorSummary mu_E, mu_o, p_mu_E;
  double median_frob = 0.0, mean_frob = 0.0, std_frob = 0.0;
  double median_sin_theta = 0.0, mean_sin_theta = 0.0, std_sin_theta = 0.0;
  /// Bonferroni-adjusted one-sided p-values on Above-stratum NRMSE.
  double p_mu_o_lt_mu_E = 1.0;
  double p_p_mu_E_lt_mu_o = 1.0;
  double p_p_mu_E_lt_mu_E = 1.0;
  std::vector<std::filesystem::path> files;
};

struct CoordinateNormality {
  std::string name;
  Normality moments;
  double qq_max_deviation = 0.0;
};

struct CltResult {
  double h = 0.0;
  std::size_t replicates = 0;
  std::size_t failures = 0;
  std::vector<std::vector<double>> drift_z;      // per coordinate
  std::vector<std::vector<double>> diffusion_z;  // per coordinate
  std::vector<CoordinateNormality> drift;
  std::vector<CoordinateNormality> diffusion;
  std::vector<std::filesystem::path> files;
};

// Each runner writes its CSV files and summary.json to cfg.output_dir when it
// is set, and returns the numbers in any case.
SimulateResult run_simulate(const ExperimentConfig& cfg);
DensityConvergenceResult run_density_convergence(const ExperimentConfig& cfg);
ErrorTableResult run_error_table(const ExperimentConfig& cfg);
CltResult run_clt_mc(const ExperimentConfig& cfg);

/// Dispatches on cfg.experiment; returns the files written.
std::vector<std::filesystem::path> run_experiment(const ExperimentConfig& cfg);

/// Estimates at explicit ambient base points (or the configured scheme) on a
/// stored trajectory and writes estimates.csv + summary.json.
std::vector<std::filesystem::path> run_estimate(const Trajectory& t, const ExperimentConfig& cfg,
                                                const std::vector<Vector>& ambient_points);

}  // namespace msde
