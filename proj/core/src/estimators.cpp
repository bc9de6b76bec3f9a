#include "msde/estimators.hpp"

#include "msde/parallel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>

namespace msde {

namespace detail {

namespace {

constexpr int kMaxGridDim = 4;
constexpr std::int64_t kMaxExtent = 1 << 16;

std::uint64_t pack(const std::int64_t* cell, int p) {
  std::uint64_t key = 0;
  for (int i = 0; i < p; ++i) key = (key << 16) | static_cast<std::uint64_t>(cell[i]);
  return key;
}

}  // namespace

void CellIndex::build(const double* data, std::size_t count, int p, double cell) {
  p_ = p;
  cell_ = cell;
  count_ = count;
  grid_ = false;
  keys_.clear();
  ids_.clear();
  if (count == 0 || p > kMaxGridDim || !(cell > 0.0) || !std::isfinite(cell)) return;
  if (count > std::numeric_limits<std::uint32_t>::max()) return;

  double hi[kMaxGridDim];
  for (int i = 0; i < p; ++i) lo_[i] = hi[i] = data[i];
  for (std::size_t k = 1; k < count; ++k) {
    for (int i = 0; i < p; ++i) {
      lo_[i] = std::min(lo_[i], data[k * p + i]);
      hi[i] = std::max(hi[i], data[k * p + i]);
    }
  }
  for (int i = 0; i < p; ++i) {
    const double cells = std::floor((hi[i] - lo_[i]) / cell) + 1.0;
    if (!(cells < static_cast<double>(kMaxExtent))) return;
    extent_[i] = static_cast<std::int64_t>(cells);
  }

  std::vector<std::pair<std::uint64_t, std::uint32_t>> entries(count);
  std::int64_t c[kMaxGridDim];
  for (std::size_t k = 0; k < count; ++k) {
    for (int i = 0; i < p; ++i) {
      c[i] = std::clamp<std::int64_t>(
          static_cast<std::int64_t>(std::floor((data[k * p + i] - lo_[i]) / cell)), 0,
          extent_[i] - 1);
    }
    entries[k] = {pack(c, p), static_cast<std::uint32_t>(k)};
  }
  std::sort(entries.begin(), entries.end());
  keys_.resize(count);
  ids_.resize(count);
  for (std::size_t k = 0; k < count; ++k) {
    keys_[k] = entries[k].first;
    ids_[k] = entries[k].second;
  }
  grid_ = true;
}

void CellIndex::candidates(const double* x, std::vector<std::uint32_t>& out) const {
  if (!grid_) {
    for (std::size_t k = 0; k < count_; ++k) out.push_back(static_cast<std::uint32_t>(k));
    return;
  }
  std::int64_t lo[kMaxGridDim], hi[kMaxGridDim];
  for (int i = 0; i < p_; ++i) {
    const double f = std::floor((x[i] - lo_[i]) / cell_);
    if (!(f >= -1.0 && f <= static_cast<double>(extent_[i]))) return;
    const auto c = static_cast<std::int64_t>(f);
    lo[i] = std::max<std::int64_t>(c - 1, 0);
    hi[i] = std::min<std::int64_t>(c + 1, extent_[i] - 1);
    if (lo[i] > hi[i]) return;
  }
  std::int64_t cur[kMaxGridDim];
  for (int i = 0; i < p_; ++i) cur[i] = lo[i];
  for (;;) {
    const std::uint64_t key = pack(cur, p_);
    const auto range = std::equal_range(keys_.begin(), keys_.end(), key);
    for (auto it = range.first; it != range.second; ++it)
      out.push_back(ids_[static_cast<std::size_t>(it - keys_.begin())]);
    int i = p_ - 1;
    while (i >= 0 && cur[i] == hi[i]) {
      cur[i] = lo[i];
      --i;
    }
    if (i < 0) break;
    ++cur[i];
  }
}

}  // namespace detail

namespace {

struct Sums {
  long double s0 = 0.0L;
  std::array<long double, kMaxDim> s1{};
  std::array<long double, kMaxDim * kMaxDim> s2{};
  std::size_t active = 0;
};

}  // namespace

void EstimatorConfig::validate(int ambient_dim) const {
  if (!(h > 0.0) || !std::isfinite(h)) throw EstimationError("bandwidth must be positive");
  if (d < 1 || d > ambient_dim) throw EstimationError("intrinsic dimension out of range");
  if (!(kernel.support > 0.0)) throw EstimationError("kernel support must be positive");
}

KernelEstimator::KernelEstimator(const Trajectory& t, EstimatorConfig cfg) : t_(&t), cfg_(cfg) {
  if (t.dim() > kMaxDim) throw EstimationError("ambient dimension exceeds 8");
  cfg_.validate(t.dim());
  index_.build(t.coords().data(), t.size() - 1, t.dim(), cfg_.kernel.support * cfg_.h);
}

std::vector<std::uint32_t> KernelEstimator::neighbors(const Vector& x) const {
  const int p = t_->dim();
  if (x.size() != p) throw EstimationError("base point dimension mismatch");
  std::vector<std::uint32_t> cand;
  index_.candidates(x.data(), cand);
  std::sort(cand.begin(), cand.end());
  const double r2 = std::pow(cfg_.kernel.support * cfg_.h, 2);
  std::erase_if(cand, [&](std::uint32_t k) {
    const auto xk = t_->point_span(k);
    double s = 0.0;
    for (int i = 0; i < p; ++i) s += (xk[i] - x(i)) * (xk[i] - x(i));
    return !(s < r2);
  });
  return cand;
}

namespace {

Sums accumulate(const Trajectory& t, const std::vector<std::uint32_t>& ks, const Vector& x,
                const EstimatorConfig& cfg, bool moments) {
  const int p = t.dim();
  const double inv_h2 = 1.0 / (cfg.h * cfg.h);
  Sums s;
  double dx[kMaxDim];
  for (const std::uint32_t k : ks) {
    const auto xk = t.point_span(k);
    double d2 = 0.0;
    for (int i = 0; i < p; ++i) d2 += (xk[i] - x(i)) * (xk[i] - x(i));
    const double w = cfg.kernel.from_squared(d2 * inv_h2);
    if (w == 0.0) continue;
    ++s.active;
    s.s0 += w;
    if (!moments) continue;
    const auto xn = t.point_span(k + 1);
    for (int i = 0; i < p; ++i) dx[i] = xn[i] - xk[i];
    for (int i = 0; i < p; ++i) {
      s.s1[i] += static_cast<long double>(w) * dx[i];
      for (int j = i; j < p; ++j) s.s2[i * p + j] += static_cast<long double>(w) * dx[i] * dx[j];
    }
  }
  return s;
}

}  // namespace

double KernelEstimator::occupation_density(const Vector& x) const {
  const Sums s = accumulate(*t_, neighbors(x), x, cfg_, false);
  return static_cast<double>(static_cast<long double>(t_->delta()) * s.s0 /
                             std::pow(static_cast<long double>(cfg_.h), cfg_.d));
}

PointEstimates KernelEstimator::estimate(const Vector& x) const {
  const Sums s = accumulate(*t_, neighbors(x), x, cfg_, true);
  if (s.s0 == 0.0L) throw EstimationError("insufficient local data");
  const int p = t_->dim();
  const long double delta = t_->delta();
  const long double denom = delta * s.s0;

  PointEstimates e;
  e.base = x;
  e.L_hat = static_cast<double>(delta * s.s0 / std::pow(static_cast<long double>(cfg_.h), cfg_.d));
  e.mu_E.resize(p);
  e.pi_hat.resize(p, p);
  for (int i = 0; i < p; ++i) {
    e.mu_E(i) = static_cast<double>(s.s1[i] / denom);
    for (int j = i; j < p; ++j) {
      const double v = static_cast<double>(s.s2[i * p + j] / denom);
      e.pi_hat(i, j) = v;
      e.pi_hat(j, i) = v;
    }
  }
  const Projector proj = tangent_projector_estimate(e.pi_hat, cfg_.d);
  e.P_hat = proj.matrix;
  e.gap_flag = proj.small_gap;
  e.mu_o = e.P_hat * e.mu_E;
  e.n_active = s.active;
  e.sparse_flag = s.active < cfg_.min_neighbors;
  return e;
}

double occupation_density(const Trajectory& t, const Vector& x, const EstimatorConfig& c) {
  return KernelEstimator(t, c).occupation_density(x);
}

Matrix diffusion_estimate(const Trajectory& t, const Vector& x, const EstimatorConfig& c) {
  return KernelEstimator(t, c).estimate(x).pi_hat;
}

Vector euclidean_drift_estimate(const Trajectory& t, const Vector& x, const EstimatorConfig& c) {
  return KernelEstimator(t, c).estimate(x).mu_E;
}

Projector tangent_projector_estimate(const Matrix& pi_hat, int d) {
  return top_d_projector(sym_eig(pi_hat), d);
}

PointEstimates drift_estimate(const Trajectory& t, const Vector& x, const EstimatorConfig& c) {
  return KernelEstimator(t, c).estimate(x);
}

std::vector<BatchEntry> batch_estimate(const Trajectory& t, const std::vector<Vector>& xs,
                                       const EstimatorConfig& c, unsigned threads) {
  if (xs.empty()) throw EstimationError("empty base-point set");
  const KernelEstimator est(t, c);
  std::vector<BatchEntry> out(xs.size());
  parallel_for(xs.size(), threads, [&](std::size_t i) {
    try {
      out[i].estimates = est.estimate(xs[i]);
    } catch (const std::exception& ex) {
      out[i].error = ex.what();
    }
  });
  return out;
}

OccupationAccumulator::OccupationAccumulator(std::vector<Vector> bases, double h, BumpKernel kernel)
    : bases_(std::move(bases)), h_(h), kernel_(kernel) {
  if (bases_.empty()) throw EstimationError("empty base-point set");
  if (!(h > 0.0)) throw EstimationError("bandwidth must be positive");
  p_ = static_cast<int>(bases_.front().size());
  flat_.reserve(bases_.size() * static_cast<std::size_t>(p_));
  for (const Vector& b : bases_) {
    if (b.size() != p_) throw EstimationError("base point dimension mismatch");
    for (int i = 0; i < p_; ++i) flat_.push_back(b(i));
  }
  acc_.assign(bases_.size(), 0.0L);
  index_.build(flat_.data(), bases_.size(), p_, kernel_.support * h_);
}

void OccupationAccumulator::add(const Vector& x) {
  if (x.size() != p_) throw EstimationError("point dimension mismatch");
  add(x.data());
}

void OccupationAccumulator::add(const double* x) {
  scratch_.clear();
  index_.candidates(x, scratch_);
  const double inv_h2 = 1.0 / (h_ * h_);
  for (const std::uint32_t b : scratch_) {
    double d2 = 0.0;
    for (int i = 0; i < p_; ++i) {
      const double diff = flat_[b * static_cast<std::size_t>(p_) + i] - x[i];
      d2 += diff * diff;
    }
    acc_[b] += kernel_.from_squared(d2 * inv_h2);
  }
  ++count_;
}

std::vector<double> OccupationAccumulator::sums() const {
  std::vector<double> out(acc_.size());
  for (std::size_t i = 0; i < acc_.size(); ++i) out[i] = static_cast<double>(acc_[i]);
  return out;
}

std::vector<std::vector<double>> occupation_density_prefixes(
    const Trajectory& t, const std::vector<Vector>& bases, const EstimatorConfig& c,
    const std::vector<std::size_t>& prefix_points) {
  c.validate(t.dim());
  std::vector<std::size_t> order(prefix_points.size());
  std::iota(order.begin(), order.end(), 0);
  for (const std::size_t n : prefix_points)
    if (n < 2 || n > t.size()) throw EstimationError("prefix length out of range");
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return prefix_points[a] < prefix_points[b]; });

  OccupationAccumulator acc(bases, c.h, c.kernel);
  const double scale = t.delta() / std::pow(c.h, c.d);
  std::vector<std::vector<double>> out(prefix_points.size());
  std::size_t next = 0;
  for (std::size_t k = 0; next < order.size(); ++k) {
    // a prefix of n points sums over k = 0, ..., n-2
    while (next < order.size() && prefix_points[order[next]] - 1 == k) {
      std::vector<double> s = acc.sums();
      for (double& v : s) v *= scale;
      out[order[next]] = std::move(s);
      ++next;
    }
    if (next < order.size()) acc.add(t.point_span(k).data());
  }
  return out;
}

}  // namespace msde
