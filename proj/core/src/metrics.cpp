#include "msde/metrics.hpp"

#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace msde {

ErrorRecord drift_errors(const Vector& mu_hat, const Vector& mu_true, double sup_norm, double c) {
  if (!(sup_norm > 0.0)) throw MetricsError("sup norm must be positive");
  if (mu_hat.size() != mu_true.size()) throw MetricsError("dimension mismatch");
  ErrorRecord r;
  const double true_norm = mu_true.norm();
  const double est_norm = mu_hat.norm();
  r.abs_err = (mu_hat - mu_true).norm();
  if (true_norm / sup_norm < c) {
    r.stratum = Stratum::Below;
    return r;
  }
  r.stratum = Stratum::Above;
  r.nrmse = r.abs_err / true_norm;
  r.rel_norm_err = std::abs(est_norm - true_norm) / true_norm;
  if (est_norm > 0.0) {
    const double cosine = std::clamp(mu_hat.dot(mu_true) / (est_norm * true_norm), -1.0, 1.0);
    r.angle_err = std::acos(cosine);
  }
  return r;
}

DiffusionErrorRecord diffusion_errors(const Matrix& pi_hat, const Matrix& pi_true, int d) {
  const double ref = pi_true.norm();
  if (!(ref > 0.0)) throw MetricsError("zero reference diffusion");
  DiffusionErrorRecord r;
  r.frob_rel_err = (pi_hat - pi_true).norm() / ref;
  r.sin_theta = sin_theta_distance(leading_subspace(pi_hat, d), leading_subspace(pi_true, d));
  return r;
}

namespace {

double wilcoxon_exact_lower(const std::vector<double>& ranks, double w_plus) {
  // Ranks are multiples of 1/2, so doubled ranks are integers and the null
  // distribution of 2 W+ is a subset-sum count.
  std::vector<long> doubled(ranks.size());
  long total = 0;
  for (std::size_t i = 0; i < ranks.size(); ++i) {
    doubled[i] = std::lround(2.0 * ranks[i]);
    total += doubled[i];
  }
  std::vector<double> count(static_cast<std::size_t>(total) + 1, 0.0);
  count[0] = 1.0;
  long reach = 0;
  for (const long r : doubled) {
    for (long s = reach; s >= 0; --s)
      if (count[s] != 0.0) count[s + r] += count[s];
    reach += r;
  }
  const long observed = std::lround(2.0 * w_plus);
  double below = 0.0;
  for (long s = 0; s <= std::min(observed, total); ++s) below += count[s];
  return below / std::ldexp(1.0, static_cast<int>(ranks.size()));
}

}  // namespace

WilcoxonResult wilcoxon_one_sided(const std::vector<double>& a, const std::vector<double>& b,
                                  WilcoxonMethod method) {
  if (a.size() != b.size()) throw MetricsError("length mismatch");
  if (a.size() < 5) throw MetricsError("at least 5 pairs required");
  std::vector<double> diff;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] != b[i]) diff.push_back(a[i] - b[i]);
  if (diff.empty()) throw MetricsError("all differences zero");
  const std::size_t m = diff.size();

  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return std::abs(diff[i]) < std::abs(diff[j]); });
  std::vector<double> ranks(m);
  double tie_term = 0.0;
  for (std::size_t i = 0; i < m;) {
    std::size_t j = i;
    while (j + 1 < m && std::abs(diff[order[j + 1]]) == std::abs(diff[order[i]])) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    const double t = static_cast<double>(j - i + 1);
    tie_term += t * t * t - t;
    i = j + 1;
  }

  WilcoxonResult r;
  r.m = m;
  for (std::size_t i = 0; i < m; ++i)
    if (diff[i] > 0.0) r.w_plus += ranks[i];

  const bool exact = method == WilcoxonMethod::Exact || (method == WilcoxonMethod::Auto && m <= 25);
  r.exact = exact;
  if (exact) {
    if (m > 60) throw MetricsError("exact test limited to 60 differences");
    r.p_value = wilcoxon_exact_lower(ranks, r.w_plus);
  } else {
    const double md = static_cast<double>(m);
    const double mean_w = md * (md + 1.0) / 4.0;
    const double var_w = md * (md + 1.0) * (2.0 * md + 1.0) / 24.0 - tie_term / 48.0;
    if (!(var_w > 0.0)) throw MetricsError("degenerate rank variance");
    r.p_value = normal_cdf((r.w_plus - mean_w + 0.5) / std::sqrt(var_w));
  }
  r.p_value = std::clamp(r.p_value, 0.0, 1.0);
  return r;
}

double l2_density_error(const std::vector<double>& est, const std::vector<double>& ref,
                        const std::vector<double>& weights) {
  if (est.size() != ref.size() || est.size() != weights.size())
    throw MetricsError("length mismatch");
  long double s = 0.0L;
  for (std::size_t i = 0; i < est.size(); ++i) {
    if (weights[i] < 0.0) throw MetricsError("negative quadrature weight");
    const long double e = static_cast<long double>(est[i]) - ref[i];
    s += weights[i] * e * e;
  }
  return static_cast<double>(std::sqrt(s));
}

std::vector<Vector> standardize_drift_errors(const std::vector<Vector>& errors, const Matrix& p_true,
                                             const Matrix& pi_true, double kappa20, double h, int d,
                                             const std::vector<double>& l_hats) {
  if (errors.empty()) throw MetricsError("no errors to standardize");
  if (l_hats.size() != errors.size()) throw MetricsError("length mismatch");
  if (!(kappa20 > 0.0) || !(h > 0.0)) throw MetricsError("kappa20 and h must be positive");
  const Eigen::Index p = errors.front().size();

  const Matrix target = kappa20 * p_true * pi_true * p_true.transpose();
  const SymEigResult eig = sym_eig(0.5 * (target + target.transpose()));
  const double top = std::max(std::abs(eig.values(0)), 1e-300);
  if (d > p || !(eig.values(d - 1) > 1e-10 * top)) throw MetricsError("rank deficient");
  const Matrix u = eig.vectors.leftCols(d);

  Vector centre = Vector::Zero(p);
  for (const Vector& e : errors) centre += e;
  centre /= static_cast<double>(errors.size());

  const double hd = std::pow(h, d);
  std::vector<Vector> out;
  out.reserve(errors.size());
  for (std::size_t i = 0; i < errors.size(); ++i) {
    const Vector scaled = std::sqrt(hd * l_hats[i]) * (errors[i] - centre);
    Vector z = u.transpose() * scaled;
    for (int a = 0; a < d; ++a) z(a) /= std::sqrt(eig.values(a));
    out.push_back(z);
  }
  return out;
}

std::vector<Vector> standardize_diffusion_errors(const std::vector<Matrix>& errors,
                                                 const Matrix& pi_true, double kappa20, double h,
                                                 int d, double delta,
                                                 const std::vector<double>& l_hats) {
  if (errors.empty()) throw MetricsError("no errors to standardize");
  if (l_hats.size() != errors.size()) throw MetricsError("length mismatch");
  if (!(kappa20 > 0.0) || !(h > 0.0) || !(delta > 0.0))
    throw MetricsError("kappa20, h and delta must be positive");
  const SymEigResult eig = sym_eig(pi_true);
  const double top = std::max(std::abs(eig.values(0)), 1e-300);
  if (!(eig.values(d - 1) > 1e-10 * top)) throw MetricsError("rank deficient");
  const Matrix u = eig.vectors.leftCols(d);

  Matrix centre = Matrix::Zero(pi_true.rows(), pi_true.cols());
  for (const Matrix& e : errors) centre += e;
  centre /= static_cast<double>(errors.size());

  const double hd = std::pow(h, d);
  std::vector<Vector> out;
  out.reserve(errors.size());
  for (std::size_t i = 0; i < errors.size(); ++i) {
    const Matrix c = u.transpose() * (errors[i] - centre) * u * std::sqrt(hd * l_hats[i] / delta);
    Vector z(d * (d + 1) / 2);
    int idx = 0;
    for (int a = 0; a < d; ++a) {
      for (int b = a; b < d; ++b) {
        const double sd = a == b ? std::sqrt(2.0 * kappa20) * eig.values(a)
                                 : std::sqrt(kappa20 * eig.values(a) * eig.values(b));
        z(idx++) = c(a, b) / sd;
      }
    }
    out.push_back(z);
  }
  return out;
}

std::vector<std::pair<double, double>> qq_points(const std::vector<double>& samples) {
  if (samples.size() < 2) throw MetricsError("at least 2 samples required");
  std::vector<double> sorted = samples;
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  std::vector<std::pair<double, double>> out;
  out.reserve(sorted.size());
  for (std::size_t i = 0; i < sorted.size(); ++i)
    out.emplace_back(normal_quantile((static_cast<double>(i) + 0.5) / n), sorted[i]);
  return out;
}

double qq_max_deviation(const std::vector<std::pair<double, double>>& points, double lo, double hi) {
  const double n = static_cast<double>(points.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double position = (static_cast<double>(i) + 0.5) / n;
    if (position < lo || position > hi) continue;
    worst = std::max(worst, std::abs(points[i].first - points[i].second));
  }
  return worst;
}

Normality moment_normality(const std::vector<double>& samples) {
  if (samples.size() < 8) throw MetricsError("at least 8 samples required");
  const double n = static_cast<double>(samples.size());
  const double m = mean(samples);
  long double m2 = 0.0L, m3 = 0.0L, m4 = 0.0L;
  for (const double x : samples) {
    const long double c = x - m;
    m2 += c * c;
    m3 += c * c * c;
    m4 += c * c * c * c;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  if (!(m2 > 0.0L) || !(m2 > 1e-28L * static_cast<long double>(m * m))) throw MetricsError("zero variance");
  Normality r;
  r.skewness = static_cast<double>(m3 / std::pow(m2, 1.5L));
  r.excess_kurtosis = static_cast<double>(m4 / (m2 * m2) - 3.0L);
  return r;
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw MetricsError("probability must lie in (0, 1)");
  return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

double median(std::vector<double> v) {
  if (v.empty()) throw MetricsError("median of empty sample");
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double upper = v[mid];
  if (v.size() % 2 == 1) return upper;
  const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

double mean(const std::vector<double>& v) {
  if (v.empty()) throw MetricsError("mean of empty sample");
  long double s = 0.0L;
  for (const double x : v) s += x;
  return static_cast<double>(s / static_cast<long double>(v.size()));
}

double stddev(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  long double s = 0.0L;
  for (const double x : v) s += (x - m) * (x - m);
  return static_cast<double>(std::sqrt(s / static_cast<long double>(v.size() - 1)));
}

}  // namespace msde
