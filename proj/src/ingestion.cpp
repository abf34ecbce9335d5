#include "gsda/ingestion.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace gsda {
namespace {

std::vector<std::string_view> tokenize(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

template <typename T>
T parse_number(std::string_view tok, std::size_t line_no) {
  T value{};
  const char* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw ParseError("non-numeric token '" + std::string(tok) + "'", line_no);
  }
  return value;
}

// Yields non-blank, comment-stripped lines with their 1-based line numbers.
class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  bool next(std::vector<std::string_view>& tokens, std::size_t& line_no) {
    while (std::getline(in_, buffer_)) {
      ++line_;
      if (auto hash = buffer_.find('#'); hash != std::string::npos) buffer_.resize(hash);
      tokens = tokenize(buffer_);
      if (!tokens.empty()) {
        line_no = line_;
        return true;
      }
    }
    return false;
  }

 private:
  std::istream& in_;
  std::string buffer_;
  std::size_t line_ = 0;
};

}  // namespace

TriangleMesh parse_off(std::istream& in) {
  LineReader reader(in);
  std::vector<std::string_view> tok;
  std::size_t line = 0;

  if (!reader.next(tok, line)) throw ParseError("empty OFF input", 0);
  // Some ModelNet files glue the counts to the header ("OFF490 518 0").
  std::string_view head = tok[0];
  if (head.substr(0, 3) != "OFF") throw ParseError("missing OFF header", line);
  std::vector<std::string_view> counts;
  if (head.size() > 3) counts.push_back(head.substr(3));
  counts.insert(counts.end(), tok.begin() + 1, tok.end());
  if (counts.empty()) {
    if (!reader.next(tok, line)) throw ParseError("missing counts line", line);
    counts = tok;
  }
  if (counts.size() < 2) throw ParseError("malformed counts line", line);
  const long nv = parse_number<long>(counts[0], line);
  const long nf = parse_number<long>(counts[1], line);
  if (nv < 0 || nf < 0) throw ParseError("negative element count", line);

  TriangleMesh mesh;
  mesh.vertices.resize(nv, 3);
  for (long v = 0; v < nv; ++v) {
    if (!reader.next(tok, line)) throw ParseError("count mismatch: expected " + std::to_string(nv) + " vertices", line);
    if (tok.size() < 3) throw ParseError("vertex line needs 3 coordinates", line);
    for (int c = 0; c < 3; ++c) mesh.vertices(v, c) = parse_number<double>(tok[c], line);
  }
  for (long f = 0; f < nf; ++f) {
    if (!reader.next(tok, line)) throw ParseError("count mismatch: expected " + std::to_string(nf) + " faces", line);
    const long m = parse_number<long>(tok[0], line);
    if (m < 3) throw ParseError("face with fewer than 3 vertices", line);
    if (static_cast<long>(tok.size()) < m + 1) throw ParseError("face line shorter than its vertex count", line);
    std::vector<int> idx(m);
    for (long j = 0; j < m; ++j) {
      const long id = parse_number<long>(tok[j + 1], line);
      if (id < 0 || id >= nv) throw ParseError("face index out of range", line);
      idx[j] = static_cast<int>(id);
    }
    for (long j = 1; j + 1 < m; ++j) {
      std::array<int, 3> tri{idx[0], idx[j], idx[j + 1]};
      if (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2]) {
        throw ParseError("face with repeated vertex indices", line);
      }
      mesh.faces.push_back(tri);
    }
  }
  if (reader.next(tok, line)) throw ParseError("count mismatch: trailing data after declared elements", line);
  return mesh;
}

TriangleMesh parse_off(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_off(in);
}

TriangleMesh load_off(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return parse_off(in);
}

SurfaceSample sample_surface_raw(const TriangleMesh& mesh, Eigen::Index n, std::mt19937_64& rng) {
  if (n < 1) throw std::invalid_argument("sample count must be positive");
  std::vector<double> cumulative;
  cumulative.reserve(mesh.faces.size());
  double total = 0.0;
  for (const auto& f : mesh.faces) {
    const Eigen::Vector3d a = mesh.vertices.row(f[0]);
    const Eigen::Vector3d b = mesh.vertices.row(f[1]);
    const Eigen::Vector3d c = mesh.vertices.row(f[2]);
    total += 0.5 * (b - a).cross(c - a).norm();
    cumulative.push_back(total);
  }
  if (!(total > 0.0)) throw std::invalid_argument("mesh has zero surface area");

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  SurfaceSample out;
  out.points.resize(n, 3);
  out.face.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double pick = unit(rng) * total;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), pick);
    if (it == cumulative.end()) --it;
    const auto fi = static_cast<int>(it - cumulative.begin());
    const auto& f = mesh.faces[fi];
    const double u = std::sqrt(unit(rng));
    const double v = unit(rng);
    out.points.row(i) = (1.0 - u) * mesh.vertices.row(f[0]) + u * (1.0 - v) * mesh.vertices.row(f[1]) +
                        u * v * mesh.vertices.row(f[2]);
    out.face[i] = fi;
  }
  return out;
}

PointCloud sample_surface(const TriangleMesh& mesh, Eigen::Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return PointCloud{normalize_unit_ball(sample_surface_raw(mesh, n, rng).points), std::nullopt};
}

Points normalize_unit_ball(const Points& points) {
  if (points.rows() < 2) throw std::invalid_argument("normalization needs at least 2 points");
  if (!points.allFinite()) throw std::invalid_argument("point cloud has non-finite coordinates");
  const Eigen::RowVector3d centroid = points.colwise().mean();
  Points centered = points.rowwise() - centroid;
  const double radius = centered.rowwise().norm().maxCoeff();
  if (!(radius > 0.0)) throw std::invalid_argument("degenerate point cloud: all points coincide");
  centered /= radius;
  return centered;
}

PointCloud normalize_unit_ball(const PointCloud& cloud) {
  return PointCloud{normalize_unit_ball(cloud.points), cloud.label};
}

Points load_xyz(std::istream& in) {
  std::vector<double> values;
  std::string buffer;
  std::size_t line = 0;
  while (std::getline(in, buffer)) {
    ++line;
    const auto tok = tokenize(buffer);
    if (tok.empty()) continue;
    if (tok.size() != 3) {
      throw ParseError("expected 3 fields, found " + std::to_string(tok.size()), line);
    }
    for (const auto t : tok) values.push_back(parse_number<double>(t, line));
  }
  const auto n = static_cast<Eigen::Index>(values.size() / 3);
  if (n < 2) throw ParseError("point cloud needs at least 2 points", 0);
  Points out(n, 3);
  for (Eigen::Index i = 0; i < n; ++i)
    for (int c = 0; c < 3; ++c) out(i, c) = values[3 * i + c];
  if (!out.allFinite()) throw ParseError("non-finite coordinate", 0);
  return out;
}

Points load_xyz(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return load_xyz(in);
}

void save_xyz(std::ostream& out, const Points& points) {
  char buf[96];
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    const int len = std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g\n", points(i, 0), points(i, 1), points(i, 2));
    out.write(buf, len);
  }
}

void save_xyz(const std::filesystem::path& path, const Points& points) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  save_xyz(out, points);
}

}  // namespace gsda
