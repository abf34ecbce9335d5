#ifndef GSDA_METRICS_HPP
#define GSDA_METRICS_HPP

#include "gsda/spectral.hpp"
#include "gsda/types.hpp"

#include <vector>

namespace gsda {

/// Distortion between a clean cloud and its adversarial counterpart.
/// d_geo is this library's curvature-consistency variant and is not
/// comparable with geometric-regularity numbers computed elsewhere.
struct DistortionReport {
  double d_norm = 0.0;
  double d_chamfer = 0.0;
  double d_hausdorff = 0.0;
  double d_geo = 0.0;
  double e_delta = 0.0;
};

/// Nearest neighbour in `to` for every row of `from`: index and squared
/// distance. Exhaustive search, ties resolved to the lowest index.
struct NearestNeighbors {
  std::vector<int> index;
  Vec sq_dist;
};
NearestNeighbors nearest_neighbors(const Points& from, const Points& to);

/// Both directions from a single pass over all pairs.
struct BidirectionalNeighbors {
  NearestNeighbors forward;   // adversarial -> clean
  NearestNeighbors backward;  // clean -> adversarial
};
BidirectionalNeighbors bidirectional_neighbors(const Points& adversarial, const Points& clean);

/// Frobenius norm of the index-wise difference.
double l2_distance(const Points& adversarial, const Points& clean);

/// Symmetric mean of squared nearest-neighbour distances:
/// 0.5 * (mean_a min_b |a-b|^2 + mean_b min_a |a-b|^2).
double chamfer(const Points& adversarial, const Points& clean);

/// max over both directions of max_a min_b |a-b| (unsquared).
double hausdorff(const Points& adversarial, const Points& clean);

/// Local curvature proxy per point: mean over its k neighbours of
/// 1 - |<n, (q-p)/|q-p|>|, n being the PCA normal of the neighbourhood.
Vec local_curvature(const Points& points, int k);

/// Directed (adversarial -> clean) mean absolute difference of the curvature
/// proxy between every adversarial point and its nearest clean point.
double geo_regularity(const Points& adversarial, const Points& clean, int k);

/// |C' - C|_F; both coefficient sets must share the same basis object.
double spectral_perturbation_energy(const SpectralCoefficients<double>& adversarial,
                                    const SpectralCoefficients<double>& clean);

/// All five measures; E_delta is taken in `basis` (the clean cloud's).
DistortionReport distortion_report(const Points& adversarial, const Points& clean, const Basis<double>& basis,
                                   int geo_k = 10);

/// Value and gradient with respect to the first argument; nearest-neighbour
/// correspondences are frozen at the current point (subgradient).
struct ValueGrad {
  double value = 0.0;
  Points grad;
};
ValueGrad chamfer_with_grad(const Points& adversarial, const Points& clean);
ValueGrad hausdorff_with_grad(const Points& adversarial, const Points& clean);
ValueGrad chamfer_with_grad(const Points& adversarial, const Points& clean, const BidirectionalNeighbors& nn);
ValueGrad hausdorff_with_grad(const Points& adversarial, const Points& clean, const BidirectionalNeighbors& nn);

}  // namespace gsda

#endif  // GSDA_METRICS_HPP
