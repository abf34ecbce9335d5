#include "gsda/graph.hpp"

#include <algorithm>
#include <numeric>
#include <ostream>
#include <string>

namespace gsda {

std::vector<std::pair<int, int>> KnnGraph::edges() const {
  std::vector<std::pair<int, int>> out;
  out.reserve(static_cast<std::size_t>(edge_count()));
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j)
      if (adjacency(i, j)) out.emplace_back(static_cast<int>(i), static_cast<int>(j));
  return out;
}

std::vector<std::vector<int>> knn_indices(const Points& points, int k) {
  const auto n = points.rows();
  if (k < 1 || k >= n) {
    throw std::invalid_argument("knn requires 1 <= k < n (k=" + std::to_string(k) + ", n=" + std::to_string(n) + ")");
  }
  std::vector<std::vector<int>> out(n);
  std::vector<int> order(n - 1);
  std::vector<double> dist(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) dist[j] = (points.row(j) - points.row(i)).squaredNorm();
    int w = 0;
    for (int j = 0; j < n; ++j)
      if (j != i) order[w++] = j;
    std::partial_sort(order.begin(), order.begin() + k, order.end(), [&](int a, int b) {
      return dist[a] < dist[b] || (dist[a] == dist[b] && a < b);
    });
    out[i].assign(order.begin(), order.begin() + k);
  }
  return out;
}

KnnGraph build_knn_graph(const Points& points, int k) {
  KnnGraph g;
  g.n = points.rows();
  g.k = k;
  g.adjacency = Eigen::MatrixXi::Zero(g.n, g.n);
  const auto nbrs = knn_indices(points, k);
  for (Eigen::Index i = 0; i < g.n; ++i) {
    for (int j : nbrs[i]) {
      g.adjacency(i, j) = 1;
      g.adjacency(j, i) = 1;
    }
  }
  g.degrees = g.adjacency.rowwise().sum();
  return g;
}

Eigen::MatrixXi laplacian_int(const KnnGraph& graph) {
  Eigen::MatrixXi lap = -graph.adjacency;
  lap.diagonal() = graph.degrees;
  return lap;
}

Mat laplacian(const KnnGraph& graph) { return laplacian_int(graph).cast<double>(); }

void write_edge_csv(std::ostream& out, const KnnGraph& graph) {
  out << "i,j\n";
  for (const auto& [i, j] : graph.edges()) out << i << ',' << j << '\n';
}

}  // namespace gsda
