#pragma once

// Small dense linear algebra used by the estimators and metrics.
//
// All matrices here are at most 8x8. Vector and Matrix are Eigen types with a
// fixed maximum size so they never touch the heap.

#include <Eigen/Core>

#include <stdexcept>
#include <string>

namespace msde {

inline constexpr int kMaxDim = 8;

using Vector = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1>;
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;

class NumericsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Eigen-decomposition of a symmetric matrix. Column j of `vectors` pairs with
/// `values[j]`; values are sorted nonincreasing.
struct SymEigResult {
  Vector values;
  Matrix vectors;
  int sweeps = 0;
};

/// Cyclic Jacobi eigen-solver for symmetric matrices up to 8x8.
///
/// Converges when every off-diagonal entry is below 1e-14 * ||A||_F. Equal
/// eigenvalues keep the order in which the sweep leaves them (stable sort).
/// Throws NumericsError("not symmetric") or NumericsError("no convergence").
SymEigResult sym_eig(const Matrix& a, int max_sweeps = 50);

struct Projector {
  Matrix matrix;
  /// Set when lambda_d - lambda_{d+1} < 1e-8 * lambda_1 (or the spectrum is zero).
  bool small_gap = false;
};

/// Orthogonal projector onto the span of the leading `d` eigenvectors.
Projector top_d_projector(const SymEigResult& eig, int d);

/// Singular values of U^T V for two p x d matrices with orthonormal columns,
/// each clamped to [0, 1] and sorted nonincreasing.
Vector principal_cosines(const Matrix& u, const Matrix& v);

/// Frobenius norm of sin(Theta) between span(U) and span(V), computed as
/// ||(I - U U^T) V||_F, which stays accurate for nearly equal subspaces.
double sin_theta_distance(const Matrix& u, const Matrix& v);

/// Leading `d` eigenvectors of a symmetric matrix as a p x d basis.
Matrix leading_subspace(const Matrix& a, int d);

bool is_orthonormal(const Matrix& u, double tol = 1e-8);

}  // namespace msde
