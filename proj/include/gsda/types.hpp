#ifndef GSDA_TYPES_HPP
#define GSDA_TYPES_HPP

#include <Eigen/Dense>

#include <optional>
#include <stdexcept>
#include <string>

namespace gsda {

/// n x 3 coordinate matrix, one point per row.
template <typename Scalar>
using PointsX = Eigen::Matrix<Scalar, Eigen::Dynamic, 3>;

using Points = PointsX<double>;
using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// A point cloud with an optional class label.
struct PointCloud {
  Points points;
  std::optional<int> label;

  Eigen::Index size() const { return points.rows(); }
};

/// Thrown when an iterative numerical routine fails (e.g. eigensolver
/// non-convergence). The CLI maps it to exit code 2.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text. `line` is 1-based, 0 when not applicable.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error(line ? what + " (line " + std::to_string(line) + ")" : what),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

}  // namespace gsda

#endif  // GSDA_TYPES_HPP
