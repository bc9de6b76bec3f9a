#include "msde/trajectory_io.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

namespace msde {

namespace {

constexpr char kMagic[4] = {'M', 'S', 'D', 'E'};
constexpr std::uint32_t kVersion = 1;

template <class T>
void put(std::string& out, T value) {
  static_assert(sizeof(T) == 4 || sizeof(T) == 8);
  using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
  const U bits = std::bit_cast<U>(value);
  for (std::size_t i = 0; i < sizeof(U); ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xFF));
}

template <class T>
T get(const std::string& in, std::size_t offset) {
  using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
  U bits = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i)
    bits |= static_cast<U>(static_cast<unsigned char>(in[offset + i])) << (8 * i);
  return std::bit_cast<T>(bits);
}

}  // namespace

std::string encode_trajectory(const Trajectory& t) {
  std::string out;
  out.reserve(kTrajectoryHeaderBytes + 8 * t.coords().size());
  out.append(kMagic, 4);
  put(out, kVersion);
  put(out, static_cast<std::uint32_t>(t.dim()));
  put(out, static_cast<std::uint64_t>(t.size()));
  put(out, t.delta());
  put(out, t.seed());
  put(out, static_cast<std::uint32_t>(t.manifold().kind() == ManifoldKind::Ellipsoid ? 0 : 1));
  for (const double v : t.manifold().parameters()) put(out, v);
  for (const double v : t.coords()) put(out, v);
  return out;
}

Trajectory decode_trajectory(const std::string& bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) throw TrajectoryIoError("bad magic");
  if (bytes.size() < 8) throw TrajectoryIoError("truncated file");
  if (get<std::uint32_t>(bytes, 4) != kVersion) throw TrajectoryIoError("unsupported version");
  if (bytes.size() < kTrajectoryHeaderBytes) throw TrajectoryIoError("truncated file");

  const auto p = get<std::uint32_t>(bytes, 8);
  const auto n = get<std::uint64_t>(bytes, 12);
  const double delta = get<double>(bytes, 20);
  const auto seed = get<std::uint64_t>(bytes, 28);
  const auto id = get<std::uint32_t>(bytes, 36);
  std::array<double, 5> params{};
  for (std::size_t i = 0; i < 5; ++i) params[i] = get<double>(bytes, 40 + 8 * i);

  if (id > 1) throw TrajectoryIoError("unknown manifold id");
  const ManifoldKind kind = id == 0 ? ManifoldKind::Ellipsoid : ManifoldKind::KleinBottle;
  const ManifoldSpec manifold = [&] {
    try {
      return ManifoldSpec::from_parameters(kind, params);
    } catch (const GeometryError& e) {
      throw TrajectoryIoError(std::string("invalid manifold parameters: ") + e.what());
    }
  }();
  if (static_cast<int>(p) != manifold.ambient_dim()) throw TrajectoryIoError("dimension mismatch");
  if (n > (bytes.size() - kTrajectoryHeaderBytes) / (8 * static_cast<std::uint64_t>(p)))
    throw TrajectoryIoError("truncated file");

  const std::uint64_t values = n * p;
  const std::uint64_t expected = kTrajectoryHeaderBytes + 8 * values;
  if (bytes.size() < expected) throw TrajectoryIoError("truncated file");
  if (bytes.size() > expected) throw TrajectoryIoError("trailing bytes");

  std::vector<double> coords(values);
  for (std::uint64_t i = 0; i < values; ++i) coords[i] = get<double>(bytes, kTrajectoryHeaderBytes + 8 * i);
  try {
    return Trajectory(manifold, delta, seed, scheme_id_for(kind), std::move(coords));
  } catch (const std::invalid_argument& e) {
    throw TrajectoryIoError(std::string("invalid trajectory: ") + e.what());
  }
}

void write_trajectory(const Trajectory& t, const std::filesystem::path& path) {
  const std::string bytes = encode_trajectory(t);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw TrajectoryIoError("cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw TrajectoryIoError("write failed: " + path.string());
}

Trajectory read_trajectory(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw TrajectoryIoError("cannot open " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_trajectory(bytes);
}

}  // namespace msde
