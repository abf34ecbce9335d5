#include "gsda/metrics.hpp"

#include "gsda/graph.hpp"

#include <cmath>
#include <limits>

namespace gsda {
namespace {

void require_nonempty(const Points& a, const Points& b) {
  if (a.rows() == 0 || b.rows() == 0) throw std::invalid_argument("distance between empty point clouds");
}

}  // namespace

NearestNeighbors nearest_neighbors(const Points& from, const Points& to) {
  require_nonempty(from, to);
  NearestNeighbors nn;
  nn.index.resize(from.rows());
  nn.sq_dist.resize(from.rows());
  for (Eigen::Index i = 0; i < from.rows(); ++i) {
    const double x = from(i, 0), y = from(i, 1), z = from(i, 2);
    double best = std::numeric_limits<double>::infinity();
    int arg = 0;
    for (Eigen::Index j = 0; j < to.rows(); ++j) {
      const double dx = to(j, 0) - x, dy = to(j, 1) - y, dz = to(j, 2) - z;
      const double d = dx * dx + dy * dy + dz * dz;
      if (d < best) {
        best = d;
        arg = static_cast<int>(j);
      }
    }
    nn.index[i] = arg;
    nn.sq_dist(i) = best;
  }
  return nn;
}

BidirectionalNeighbors bidirectional_neighbors(const Points& adversarial, const Points& clean) {
  require_nonempty(adversarial, clean);
  const auto na = adversarial.rows(), nb = clean.rows();
  const double inf = std::numeric_limits<double>::infinity();
  BidirectionalNeighbors nn;
  nn.forward.index.assign(na, 0);
  nn.forward.sq_dist = Vec::Constant(na, inf);
  nn.backward.index.assign(nb, 0);
  nn.backward.sq_dist = Vec::Constant(nb, inf);
  for (Eigen::Index i = 0; i < na; ++i) {
    const double x = adversarial(i, 0), y = adversarial(i, 1), z = adversarial(i, 2);
    double best = inf;
    int arg = 0;
    for (Eigen::Index j = 0; j < nb; ++j) {
      const double dx = clean(j, 0) - x, dy = clean(j, 1) - y, dz = clean(j, 2) - z;
      const double d = dx * dx + dy * dy + dz * dz;
      if (d < best) {
        best = d;
        arg = static_cast<int>(j);
      }
      // i ascends, so strict '<' keeps the lowest adversarial index on ties.
      if (d < nn.backward.sq_dist(j)) {
        nn.backward.sq_dist(j) = d;
        nn.backward.index[j] = static_cast<int>(i);
      }
    }
    nn.forward.index[i] = arg;
    nn.forward.sq_dist(i) = best;
  }
  return nn;
}

double l2_distance(const Points& adversarial, const Points& clean) {
  if (adversarial.rows() != clean.rows()) throw std::invalid_argument("l2_distance: size mismatch");
  return (adversarial - clean).norm();
}

double chamfer(const Points& adversarial, const Points& clean) {
  return chamfer_with_grad(adversarial, clean).value;
}

double hausdorff(const Points& adversarial, const Points& clean) {
  require_nonempty(adversarial, clean);
  const double forward = nearest_neighbors(adversarial, clean).sq_dist.maxCoeff();
  const double backward = nearest_neighbors(clean, adversarial).sq_dist.maxCoeff();
  return std::sqrt(std::max(forward, backward));
}

ValueGrad chamfer_with_grad(const Points& adversarial, const Points& clean) {
  return chamfer_with_grad(adversarial, clean, bidirectional_neighbors(adversarial, clean));
}

ValueGrad hausdorff_with_grad(const Points& adversarial, const Points& clean) {
  return hausdorff_with_grad(adversarial, clean, bidirectional_neighbors(adversarial, clean));
}

ValueGrad chamfer_with_grad(const Points& adversarial, const Points& clean, const BidirectionalNeighbors& nn) {
  const auto& fwd = nn.forward;
  const auto& bwd = nn.backward;
  const double na = static_cast<double>(adversarial.rows());
  const double nb = static_cast<double>(clean.rows());
  ValueGrad out;
  out.value = 0.5 * (fwd.sq_dist.sum() / na + bwd.sq_dist.sum() / nb);
  out.grad = Points::Zero(adversarial.rows(), 3);
  for (Eigen::Index i = 0; i < adversarial.rows(); ++i)
    out.grad.row(i) += (adversarial.row(i) - clean.row(fwd.index[i])) / na;
  for (Eigen::Index j = 0; j < clean.rows(); ++j) {
    const int a = bwd.index[j];
    out.grad.row(a) += (adversarial.row(a) - clean.row(j)) / nb;
  }
  return out;
}

ValueGrad hausdorff_with_grad(const Points& adversarial, const Points& clean, const BidirectionalNeighbors& nn) {
  const auto& fwd = nn.forward;
  const auto& bwd = nn.backward;
  Eigen::Index fi = 0, bi = 0;
  const double fmax = fwd.sq_dist.maxCoeff(&fi);
  const double bmax = bwd.sq_dist.maxCoeff(&bi);
  ValueGrad out;
  out.grad = Points::Zero(adversarial.rows(), 3);
  if (fmax >= bmax) {
    out.value = std::sqrt(fmax);
    if (out.value > 0.0) out.grad.row(fi) = (adversarial.row(fi) - clean.row(fwd.index[fi])) / out.value;
  } else {
    out.value = std::sqrt(bmax);
    const int a = bwd.index[bi];
    out.grad.row(a) = (adversarial.row(a) - clean.row(bi)) / out.value;
  }
  return out;
}

Vec local_curvature(const Points& points, int k) {
  const auto nbrs = knn_indices(points, k);
  Vec kappa(points.rows());
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    Eigen::Matrix<double, Eigen::Dynamic, 3> hood(k + 1, 3);
    hood.row(0) = points.row(i);
    for (int j = 0; j < k; ++j) hood.row(j + 1) = points.row(nbrs[i][j]);
    const Eigen::RowVector3d mean = hood.colwise().mean();
    const Eigen::Matrix<double, Eigen::Dynamic, 3> centered = hood.rowwise() - mean;
    const Eigen::Matrix3d cov = centered.transpose() * centered;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(cov);
    const Eigen::Vector3d normal = solver.eigenvectors().col(0);

    double sum = 0.0;
    int used = 0;
    for (int j = 0; j < k; ++j) {
      const Eigen::Vector3d d = (points.row(nbrs[i][j]) - points.row(i)).transpose();
      const double len = d.norm();
      if (len == 0.0) continue;
      sum += 1.0 - std::abs(normal.dot(d) / len);
      ++used;
    }
    if (used == 0) throw std::invalid_argument("geo_regularity: degenerate neighbourhood (all neighbours coincide)");
    kappa(i) = sum / used;
  }
  return kappa;
}

double geo_regularity(const Points& adversarial, const Points& clean, int k) {
  require_nonempty(adversarial, clean);
  const Vec ka = local_curvature(adversarial, k);
  const Vec kc = local_curvature(clean, k);
  const auto nn = nearest_neighbors(adversarial, clean);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < adversarial.rows(); ++i) sum += std::abs(ka(i) - kc(nn.index[i]));
  return sum / static_cast<double>(adversarial.rows());
}

double spectral_perturbation_energy(const SpectralCoefficients<double>& adversarial,
                                    const SpectralCoefficients<double>& clean) {
  if (adversarial.basis != clean.basis) throw std::invalid_argument("spectral_perturbation_energy: basis mismatch");
  if (adversarial.coeffs.rows() != clean.coeffs.rows()) throw std::invalid_argument("spectral_perturbation_energy: size mismatch");
  return (adversarial.coeffs - clean.coeffs).norm();
}

DistortionReport distortion_report(const Points& adversarial, const Points& clean, const Basis<double>& basis,
                                   int geo_k) {
  DistortionReport r;
  r.d_norm = l2_distance(adversarial, clean);
  r.d_chamfer = chamfer(adversarial, clean);
  r.d_hausdorff = hausdorff(adversarial, clean);
  r.d_geo = geo_regularity(adversarial, clean, geo_k);
  r.e_delta = spectral_perturbation_energy(gft(adversarial, basis), gft(clean, basis));
  return r;
}

}  // namespace gsda
