#ifndef GSDA_INGESTION_HPP
#define GSDA_INGESTION_HPP

#include "gsda/types.hpp"

#include <array>
#include <filesystem>
#include <iosfwd>
#include <random>
#include <string_view>
#include <vector>

namespace gsda {

struct TriangleMesh {
  Points vertices;
  std::vector<std::array<int, 3>> faces;
};

/// Parses an OFF mesh. Comments (`#`) and blank lines are skipped, extra
/// per-vertex / per-face tokens (colors) are ignored and polygons with more
/// than three corners are fan-triangulated.
TriangleMesh parse_off(std::istream& in);
TriangleMesh parse_off(std::string_view text);
TriangleMesh load_off(const std::filesystem::path& path);

/// Raw area-weighted surface sample. `face[i]` is the face point `i` was drawn from.
struct SurfaceSample {
  Points points;
  std::vector<int> face;
};

SurfaceSample sample_surface_raw(const TriangleMesh& mesh, Eigen::Index n, std::mt19937_64& rng);

/// Samples `n` points uniformly (by area) over the mesh surface and rescales
/// the result into the unit ball.
PointCloud sample_surface(const TriangleMesh& mesh, Eigen::Index n, std::uint64_t seed);

/// Subtracts the centroid and divides by the largest remaining point norm.
Points normalize_unit_ball(const Points& points);
PointCloud normalize_unit_ball(const PointCloud& cloud);

/// XYZ text: one "x y z" line per point. Values are written with 17
/// significant digits so a save/load round trip is exact.
Points load_xyz(std::istream& in);
Points load_xyz(const std::filesystem::path& path);
void save_xyz(std::ostream& out, const Points& points);
void save_xyz(const std::filesystem::path& path, const Points& points);

}  // namespace gsda

#endif  // GSDA_INGESTION_HPP
