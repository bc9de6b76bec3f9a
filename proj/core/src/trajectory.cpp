#include "msde/trajectory.hpp"

#include <stdexcept>
#include <utility>

namespace msde {

Trajectory::Trajectory(ManifoldSpec manifold, double delta, std::uint64_t seed,
                       std::string scheme_id, std::vector<double> coords)
    : manifold_(manifold),
      dim_(manifold.ambient_dim()),
      delta_(delta),
      seed_(seed),
      scheme_id_(std::move(scheme_id)),
      coords_(std::move(coords)) {
  if (!(delta_ > 0.0)) throw std::invalid_argument("trajectory time step must be positive");
  if (coords_.size() % static_cast<std::size_t>(dim_) != 0)
    throw std::invalid_argument("trajectory coordinates are not a multiple of the dimension");
  if (size() < 2) throw std::invalid_argument("trajectory needs at least two points");
}

Trajectory Trajectory::prefix(std::size_t n) const {
  if (n < 2 || n > size()) throw std::out_of_range("trajectory prefix length out of range");
  std::vector<double> head(coords_.begin(),
                           coords_.begin() + static_cast<std::ptrdiff_t>(n * static_cast<std::size_t>(dim_)));
  return Trajectory(manifold_, delta_, seed_, scheme_id_, std::move(head));
}

std::string scheme_id_for(ManifoldKind kind) {
  return kind == ManifoldKind::Ellipsoid ? "retraction-euler-sphere" : "euler-plane-reduced";
}

}  // namespace msde
