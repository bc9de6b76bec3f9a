#include "msde/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace msde {

namespace {

double max_off_diagonal(const Matrix& a) {
  double m = 0.0;
  const auto n = a.rows();
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) m = std::max(m, std::abs(a(i, j)));
  return m;
}

// One Jacobi rotation zeroing a(p, q); accumulates the rotation into v.
void rotate(Matrix& a, Matrix& v, Eigen::Index p, Eigen::Index q) {
  const double apq = a(p, q);
  if (apq == 0.0) return;
  const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
  const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
  const double c = 1.0 / std::sqrt(t * t + 1.0);
  const double s = t * c;
  const auto n = a.rows();

  for (Eigen::Index k = 0; k < n; ++k) {
    const double akp = a(k, p);
    const double akq = a(k, q);
    a(k, p) = c * akp - s * akq;
    a(k, q) = s * akp + c * akq;
  }
  for (Eigen::Index k = 0; k < n; ++k) {
    const double apk = a(p, k);
    const double aqk = a(q, k);
    a(p, k) = c * apk - s * aqk;
    a(q, k) = s * apk + c * aqk;
  }
  a(p, q) = 0.0;
  a(q, p) = 0.0;

  for (Eigen::Index k = 0; k < n; ++k) {
    const double vkp = v(k, p);
    const double vkq = v(k, q);
    v(k, p) = c * vkp - s * vkq;
    v(k, q) = s * vkp + c * vkq;
  }
}

}  // namespace

SymEigResult sym_eig(const Matrix& input, int max_sweeps) {
  if (input.rows() != input.cols() || input.rows() == 0 || input.rows() > kMaxDim)
    throw NumericsError("sym_eig: expected a square matrix of size 1..8");
  const double norm = input.norm();
  if ((input - input.transpose()).norm() >= 1e-8 * std::max(1.0, norm))
    throw NumericsError("not symmetric");

  const auto n = input.rows();
  Matrix a = 0.5 * (input + input.transpose());
  Matrix v = Matrix::Identity(n, n);
  const double tol = 1e-14 * norm;

  int sweep = 0;
  while (max_off_diagonal(a) > tol) {
    if (sweep == max_sweeps) throw NumericsError("no convergence");
    for (Eigen::Index p = 0; p < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q) rotate(a, v, p, q);
    ++sweep;
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index i, Eigen::Index j) { return a(i, i) > a(j, j); });

  SymEigResult out;
  out.values.resize(n);
  out.vectors.resize(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    out.values(j) = a(order[j], order[j]);
    out.vectors.col(j) = v.col(order[j]);
  }
  out.sweeps = sweep;
  return out;
}

Projector top_d_projector(const SymEigResult& eig, int d) {
  const auto n = eig.values.size();
  if (d < 1 || d > n) throw NumericsError("top_d_projector: d out of range");
  const Matrix basis = eig.vectors.leftCols(d);
  Projector out;
  out.matrix = basis * basis.transpose();
  out.matrix = 0.5 * (out.matrix + out.matrix.transpose()).eval();
  if (d < n) {
    const double gap = eig.values(d - 1) - eig.values(d);
    out.small_gap = !(gap > 1e-8 * std::abs(eig.values(0)));
  } else {
    out.small_gap = false;
  }
  return out;
}

bool is_orthonormal(const Matrix& u, double tol) {
  const Matrix gram = u.transpose() * u;
  return (gram - Matrix::Identity(gram.rows(), gram.cols())).norm() < tol;
}

Vector principal_cosines(const Matrix& u, const Matrix& v) {
  if (u.rows() != v.rows() || u.cols() != v.cols())
    throw NumericsError("principal_cosines: shape mismatch");
  if (!is_orthonormal(u) || !is_orthonormal(v)) throw NumericsError("not orthonormal");
  const Matrix m = u.transpose() * v;
  const SymEigResult eig = sym_eig(m.transpose() * m);
  Vector cosines(eig.values.size());
  for (Eigen::Index i = 0; i < cosines.size(); ++i)
    cosines(i) = std::clamp(std::sqrt(std::max(0.0, eig.values(i))), 0.0, 1.0);
  return cosines;
}

double sin_theta_distance(const Matrix& u, const Matrix& v) {
  if (u.rows() != v.rows() || u.cols() != v.cols())
    throw NumericsError("sin_theta_distance: shape mismatch");
  if (!is_orthonormal(u) || !is_orthonormal(v)) throw NumericsError("not orthonormal");
  const Matrix residual = v - u * (u.transpose() * v);
  return residual.norm();
}

Matrix leading_subspace(const Matrix& a, int d) {
  const SymEigResult eig = sym_eig(a);
  if (d < 1 || d > eig.values.size()) throw NumericsError("leading_subspace: d out of range");
  return eig.vectors.leftCols(d);
}

}  // namespace msde
