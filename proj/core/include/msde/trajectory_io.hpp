#pragma once

// Binary trajectory files. Layout (all little-endian):
//
//   offset  size  field
//        0     4  magic "MSDE"
//        4     4  u32 version (= 1)
//        8     4  u32 ambient dimension p
//       12     8  u64 point count N
//       20     8  f64 time step
//       28     8  u64 seed
//       36     4  u32 manifold id (0 ellipsoid, 1 Klein bottle)
//       40    40  5 x f64 manifold parameters
//       80  8N*p  f64 coordinates, point-major
//
// The scheme id is not stored; it is implied by the manifold kind.

#include "msde/trajectory.hpp"

#include <filesystem>
#include <stdexcept>
#include <string>

namespace msde {

class TrajectoryIoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::size_t kTrajectoryHeaderBytes = 80;

void write_trajectory(const Trajectory& t, const std::filesystem::path& path);

/// Throws TrajectoryIoError("bad magic"), ("unsupported version") or
/// ("truncated file"); trailing bytes are also rejected as a length mismatch.
Trajectory read_trajectory(const std::filesystem::path& path);

std::string encode_trajectory(const Trajectory& t);
Trajectory decode_trajectory(const std::string& bytes);

}  // namespace msde
