#pragma once

#include "msde/linalg.hpp"

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

namespace msde {

class MetricsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Stratum { Above, Below };

/// Drift errors at one base point. Relative fields are empty (not applicable)
/// in the Below stratum; angle_err is also empty when the estimate is zero.
struct ErrorRecord {
  std::optional<double> nrmse;
  std::optional<double> rel_norm_err;
  std::optional<double> angle_err;
  double abs_err = 0.0;
  Stratum stratum = Stratum::Above;
};

/// Stratum is Above when |mu_true| / sup_norm >= c.
ErrorRecord drift_errors(const Vector& mu_hat, const Vector& mu_true, double sup_norm,
                         double c = 0.05);

struct DiffusionErrorRecord {
  double frob_rel_err = 0.0;
  double sin_theta = 0.0;
};

DiffusionErrorRecord diffusion_errors(const Matrix& pi_hat, const Matrix& pi_true, int d);

enum class WilcoxonMethod { Auto, Exact, Normal };

struct WilcoxonResult {
  double p_value = 1.0;
  /// Sum of the ranks of positive differences a_i - b_i.
  double w_plus = 0.0;
  /// Number of nonzero differences.
  std::size_t m = 0;
  bool exact = false;
};

/// Paired signed-rank test of H1: a tends to be smaller than b. Zero
/// differences are dropped and tied |differences| get average ranks. Auto uses
/// the exact null distribution for m <= 25 and the tie-corrected normal
/// approximation with continuity correction above.
WilcoxonResult wilcoxon_one_sided(const std::vector<double>& a, const std::vector<double>& b,
                                  WilcoxonMethod method = WilcoxonMethod::Auto);

double l2_density_error(const std::vector<double>& est, const std::vector<double>& ref,
                        const std::vector<double>& weights);

/// Standardised drift errors: centre by the sample mean, multiply error i by
/// sqrt(h^d * L_hats[i]) and whiten inside the tangent space by
/// (kappa20 P pi P)^{-1/2}. Returns d-vectors in the eigenbasis of P pi P.
std::vector<Vector> standardize_drift_errors(const std::vector<Vector>& errors, const Matrix& p_true,
                                             const Matrix& pi_true, double kappa20, double h, int d,
                                             const std::vector<double>& l_hats);

/// Standardised diffusion errors in the top-d eigenbasis (lambda_i, u_i) of
/// pi_true: the centred error E_i is scaled by sqrt(h^d L_i / Delta) and the
/// coordinates u_a^T E u_b (a <= b) are divided by sqrt(2 kappa20) lambda_a on
/// the diagonal and sqrt(kappa20 lambda_a lambda_b) off it. Order: (1,1), (1,2),
/// ..., (1,d), (2,2), ...
std::vector<Vector> standardize_diffusion_errors(const std::vector<Matrix>& errors,
                                                 const Matrix& pi_true, double kappa20, double h,
                                                 int d, double delta,
                                                 const std::vector<double>& l_hats);

/// (theoretical, empirical) pairs: sorted samples against standard normal
/// quantiles at (i - 0.5) / n.
std::vector<std::pair<double, double>> qq_points(const std::vector<double>& samples);

/// Largest |theoretical - empirical| over QQ pairs whose plotting position lies
/// in [lo, hi].
double qq_max_deviation(const std::vector<std::pair<double, double>>& points, double lo = 0.05,
                        double hi = 0.95);

struct Normality {
  double skewness = 0.0;
  double excess_kurtosis = 0.0;
};

/// Moment estimators m3 / m2^1.5 and m4 / m2^2 - 3 (central moments with 1/n).
Normality moment_normality(const std::vector<double>& samples);

double normal_cdf(double z);
double normal_quantile(double p);

double median(std::vector<double> v);
double mean(const std::vector<double>& v);
/// Sample standard deviation (1 / (n - 1)).
double stddev(const std::vector<double>& v);

}  // namespace msde
