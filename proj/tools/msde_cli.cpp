// msde: simulate trajectories, estimate coefficients on stored trajectories and
// run the experiment suite from JSON configs.

#include "msde/experiments.hpp"
#include "msde/trajectory_io.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

struct CommonFlags {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config, "JSON configuration file")->required()->check(CLI::ExistingFile);
  cmd->add_option("--out", f.out, "Output directory (overrides output_dir)");
  cmd->add_option("--seed", f.seed, "Base seed (overrides seed)");
  cmd->add_option("--threads", f.threads, "Worker count; 0 uses all cores");
}

msde::ExperimentConfig load(const CommonFlags& f, bool require_experiment) {
  msde::ExperimentConfig cfg = msde::ExperimentConfig::load(f.config, require_experiment);
  if (!f.out.empty()) cfg.output_dir = f.out;
  if (f.seed) cfg.seed = *f.seed;
  if (f.threads) cfg.threads = *f.threads;
  return cfg;
}

// One point per line, comma or whitespace separated; lines that do not start
// with a number (headers, comments) are skipped.
std::vector<msde::Vector> read_points(const std::string& path, int p) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read points file " + path);
  std::vector<msde::Vector> out;
  std::string line;
  while (std::getline(in, line)) {
    for (char& c : line)
      if (c == ',' || c == ';' || c == '\t') c = ' ';
    std::istringstream ss(line);
    std::vector<double> vals;
    std::string tok;
    while (ss >> tok) {
      double v = 0.0;
      const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
      if (res.ec != std::errc() || res.ptr != tok.data() + tok.size()) {
        vals.clear();
        break;
      }
      vals.push_back(v);
    }
    if (vals.empty()) continue;
    if (static_cast<int>(vals.size()) != p)
      throw std::runtime_error("points file: expected " + std::to_string(p) + " coordinates per line");
    out.push_back(Eigen::Map<const Eigen::VectorXd>(vals.data(), p));
  }
  if (out.empty()) throw std::runtime_error("points file has no points");
  return out;
}

void report(const std::vector<std::filesystem::path>& files) {
  for (const auto& f : files) std::cout << f.string() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulation and kernel estimation of diffusions on embedded manifolds"};
  app.require_subcommand(1);

  CommonFlags sim_flags, est_flags, exp_flags;
  auto* sim = app.add_subcommand("simulate", "Simulate a trajectory and write trajectory.bin");
  add_common(sim, sim_flags);

  auto* est = app.add_subcommand("estimate", "Estimate at base points on a stored trajectory");
  add_common(est, est_flags);
  std::string trajectory_path, points_path;
  est->add_option("--trajectory", trajectory_path, "Trajectory file (overrides the config's trajectory)");
  est->add_option("--points", points_path, "Ambient base points, one per line")->check(CLI::ExistingFile);

  auto* exp = app.add_subcommand("experiment", "Run the experiment named in the config");
  add_common(exp, exp_flags);

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) {
      msde::ExperimentConfig cfg = load(sim_flags, false);
      cfg.experiment = msde::ExperimentKind::Simulate;
      if (cfg.output_dir.empty()) throw msde::ConfigError("simulate needs --out or output_dir");
      report(msde::run_simulate(cfg).files);
    } else if (est->parsed()) {
      msde::ExperimentConfig cfg = load(est_flags, false);
      if (!trajectory_path.empty()) cfg.trajectory = trajectory_path;
      if (cfg.trajectory.empty()) throw msde::ConfigError("estimate needs --trajectory or a 'trajectory' field");
      const msde::Trajectory t = msde::read_trajectory(cfg.trajectory);
      std::vector<msde::Vector> points;
      if (!points_path.empty()) points = read_points(points_path, t.dim());
      report(msde::run_estimate(t, cfg, points));
    } else if (exp->parsed()) {
      const msde::ExperimentConfig cfg = load(exp_flags, true);
      if (cfg.output_dir.empty()) throw msde::ConfigError("experiment needs --out or output_dir");
      report(msde::run_experiment(cfg));
    }
  } catch (const std::exception& e) {
    std::cerr << "msde: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
