#ifndef GSDA_GRAPH_HPP
#define GSDA_GRAPH_HPP

#include "gsda/types.hpp"

#include <iosfwd>
#include <utility>
#include <vector>

namespace gsda {

/// Unweighted, undirected K-NN graph. An edge i-j exists when either point
/// is among the other's k nearest neighbours (union symmetrization).
struct KnnGraph {
  Eigen::Index n = 0;
  int k = 0;
  Eigen::MatrixXi adjacency;
  Eigen::VectorXi degrees;

  /// Undirected edges (i, j) with i < j in row-major order.
  std::vector<std::pair<int, int>> edges() const;
  Eigen::Index edge_count() const { return degrees.sum() / 2; }
};

/// Indices of the k nearest neighbours of every point (self excluded),
/// ordered by distance with ties broken by the smaller index.
/// Exhaustive O(n^2) search.
std::vector<std::vector<int>> knn_indices(const Points& points, int k);

KnnGraph build_knn_graph(const Points& points, int k);

/// Combinatorial Laplacian D - A, assembled in integers.
Eigen::MatrixXi laplacian_int(const KnnGraph& graph);
Mat laplacian(const KnnGraph& graph);

/// Header "i,j", then one row per undirected edge with i < j.
void write_edge_csv(std::ostream& out, const KnnGraph& graph);

}  // namespace gsda

#endif  // GSDA_GRAPH_HPP
