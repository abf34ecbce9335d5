#ifndef GSDA_SPECTRAL_HPP
#define GSDA_SPECTRAL_HPP

#include "gsda/eigen_solver.hpp"
#include "gsda/types.hpp"

#include <cmath>
#include <iosfwd>
#include <memory>
#include <numbers>
#include <type_traits>
#include <utility>
#include <vector>

namespace gsda {

template <typename Scalar>
using Basis = std::shared_ptr<const Eigensystem<Scalar>>;

/// GFT coefficients of the x, y, z graph signals (one column each), tied to
/// the basis they were computed in.
template <typename Scalar>
struct SpectralCoefficients {
  PointsX<Scalar> coeffs;
  Basis<Scalar> basis;

  Eigen::Index size() const { return coeffs.rows(); }
};

/// Per-frequency multipliers h(lambda_i).
template <typename Scalar>
using FilterResponse = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

// Vector argument whose scalar is taken from the other arguments, so fixed-size
// vectors and expressions convert instead of failing deduction.
template <typename Scalar>
using VectorArg = std::type_identity_t<Eigen::Matrix<Scalar, Eigen::Dynamic, 1>>;

/// Frequency bands by index: low [0, low_end), mid [low_end, mid_end),
/// high [mid_end, n).
struct BandSplit {
  Eigen::Index low_end = 0;
  Eigen::Index mid_end = 0;
};

struct BandEnergy {
  double low = 0.0;
  double mid = 0.0;
  double high = 0.0;
  double total() const { return low + mid + high; }
};

/// Half-open index range [begin, end).
using IndexRange = std::pair<Eigen::Index, Eigen::Index>;

template <typename Scalar>
Basis<Scalar> share(Eigensystem<Scalar> eig) {
  return std::make_shared<const Eigensystem<Scalar>>(std::move(eig));
}

template <typename Scalar>
SpectralCoefficients<Scalar> gft(const PointsX<Scalar>& points, Basis<Scalar> basis) {
  if (!basis || basis->size() != points.rows()) throw std::invalid_argument("gft: cloud size does not match basis");
  PointsX<Scalar> c = basis->eigenvectors.transpose() * points;
  return {std::move(c), std::move(basis)};
}

template <typename Scalar>
PointsX<Scalar> igft(const SpectralCoefficients<Scalar>& coeffs) {
  if (!coeffs.basis || coeffs.basis->size() != coeffs.coeffs.rows()) {
    throw std::invalid_argument("igft: coefficient size does not match basis");
  }
  return coeffs.basis->eigenvectors * coeffs.coeffs;
}

template <typename Scalar = double>
FilterResponse<Scalar> ideal_band_response(Eigen::Index n, const std::vector<IndexRange>& keep) {
  FilterResponse<Scalar> g = FilterResponse<Scalar>::Zero(n);
  for (const auto& [begin, end] : keep) {
    if (begin < 0 || end > n || begin > end) throw std::invalid_argument("ideal_band_response: range outside [0, n)");
    g.segment(begin, end - begin).setOnes();
  }
  return g;
}

/// Haar-like low-pass response 1 - lambda / lambda_max.
template <typename Scalar>
FilterResponse<Scalar> haar_lowpass_response(const Eigensystem<Scalar>& eig) {
  if (!(eig.lambda_max() > Scalar(0))) throw std::invalid_argument("haar_lowpass_response: lambda_max is zero");
  return FilterResponse<Scalar>::Ones(eig.size()) - eig.eigenvalues / eig.lambda_max();
}

/// Evaluates sum_l coeffs[l] * x^l at every entry of `x` (Horner).
template <typename Scalar>
FilterResponse<Scalar> polynomial_response(const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& x,
                                           const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& coeffs) {
  FilterResponse<Scalar> g = FilterResponse<Scalar>::Zero(x.size());
  for (Eigen::Index l = coeffs.size() - 1; l >= 0; --l) g = (g.array() * x.array() + coeffs(l)).matrix();
  return g;
}

/// Polynomial filter response on the normalized spectrum lambda / lambda_max.
template <typename Scalar>
FilterResponse<Scalar> polynomial_response(const Eigensystem<Scalar>& eig, const VectorArg<Scalar>& coeffs) {
  return polynomial_response<Scalar>(eig.normalized_eigenvalues(), coeffs);
}

/// Picks `count` eigenvalue indices whose normalized eigenvalues sit closest
/// to Chebyshev-Lobatto nodes on [0, 1], skipping repeated eigenvalues.
template <typename Scalar>
std::vector<Eigen::Index> chebyshev_sample_indices(const Eigensystem<Scalar>& eig, int count,
                                                   Scalar distinct_tol = Scalar(1e-9)) {
  const auto x = eig.normalized_eigenvalues();
  std::vector<Eigen::Index> distinct;
  for (Eigen::Index i = 0; i < x.size(); ++i)
    if (distinct.empty() || x(i) - x(distinct.back()) > distinct_tol) distinct.push_back(i);
  if (count < 1 || static_cast<std::size_t>(count) > distinct.size()) {
    throw std::invalid_argument("not enough distinct eigenvalues for the requested polynomial length");
  }
  std::vector<bool> used(distinct.size(), false);
  std::vector<Eigen::Index> out;
  for (int k = 0; k < count; ++k) {
    const Scalar node = count == 1 ? Scalar(0)
                                   : (Scalar(1) - std::cos(std::numbers::pi_v<Scalar> * k / (count - 1))) / Scalar(2);
    std::size_t best = distinct.size();
    for (std::size_t j = 0; j < distinct.size(); ++j) {
      if (used[j]) continue;
      if (best == distinct.size() || std::abs(x(distinct[j]) - node) < std::abs(x(distinct[best]) - node)) best = j;
    }
    used[best] = true;
    out.push_back(distinct[best]);
  }
  return out;
}

/// Solves the Vandermonde system sum_k h_k x_i^k = c_i at the sampled
/// normalized eigenvalues x_i. Throws when two samples coincide.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> fit_polynomial_filter(const Eigensystem<Scalar>& eig,
                                                               const std::vector<Eigen::Index>& sample_indices,
                                                               const VectorArg<Scalar>& targets,
                                                               Scalar distinct_tol = Scalar(1e-9)) {
  const auto length = static_cast<Eigen::Index>(sample_indices.size());
  if (length == 0 || targets.size() != length) throw std::invalid_argument("fit_polynomial_filter: size mismatch");
  const auto x = eig.normalized_eigenvalues();
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> xs(length);
  for (Eigen::Index i = 0; i < length; ++i) {
    if (sample_indices[i] < 0 || sample_indices[i] >= x.size()) throw std::invalid_argument("sample index out of range");
    xs(i) = x(sample_indices[i]);
  }
  for (Eigen::Index i = 0; i < length; ++i)
    for (Eigen::Index j = i + 1; j < length; ++j)
      if (std::abs(xs(i) - xs(j)) <= distinct_tol) {
        throw std::invalid_argument("fit_polynomial_filter: repeated eigenvalues among samples");
      }

  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> vander(length, length);
  for (Eigen::Index i = 0; i < length; ++i) {
    Scalar p(1);
    for (Eigen::Index k = 0; k < length; ++k, p *= xs(i)) vander(i, k) = p;
  }
  Eigen::FullPivLU<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>> lu(vander);
  if (!lu.isInvertible()) throw std::invalid_argument("fit_polynomial_filter: singular Vandermonde system");
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> h = lu.solve(targets);
  if (!h.allFinite()) throw std::invalid_argument("fit_polynomial_filter: ill-conditioned Vandermonde system");
  return h;
}

template <typename Scalar>
SpectralCoefficients<Scalar> apply_response(const SpectralCoefficients<Scalar>& coeffs, const VectorArg<Scalar>& g) {
  if (g.size() != coeffs.coeffs.rows()) throw std::invalid_argument("apply_response: size mismatch");
  return {g.asDiagonal() * coeffs.coeffs, coeffs.basis};
}

/// U diag(g) U^T P in one call.
template <typename Scalar>
PointsX<Scalar> spectral_filter(const PointsX<Scalar>& points, const Eigensystem<Scalar>& eig,
                                const VectorArg<Scalar>& g) {
  if (g.size() != points.rows() || eig.size() != points.rows()) throw std::invalid_argument("spectral_filter: size mismatch");
  return eig.eigenvectors * (g.asDiagonal() * (eig.eigenvectors.transpose() * points));
}

inline BandSplit make_band_split(Eigen::Index n, Eigen::Index low_end, Eigen::Index mid_end) {
  if (!(0 < low_end && low_end < mid_end && mid_end <= n)) throw std::invalid_argument("invalid band split");
  return {low_end, mid_end};
}

/// Scales the 100 / 400 of 1024 band edges proportionally to `n`.
inline BandSplit default_band_split(Eigen::Index n) {
  if (n < 16) throw std::invalid_argument("default_band_split needs n >= 16");
  const auto low = static_cast<Eigen::Index>(std::lround(static_cast<double>(n) * 100.0 / 1024.0));
  const auto mid = static_cast<Eigen::Index>(std::lround(static_cast<double>(n) * 400.0 / 1024.0));
  return make_band_split(n, low, mid);
}

/// Number of leading frequencies covering `fraction` of the spectrum,
/// rounded to nearest.
inline Eigen::Index band_bound(Eigen::Index n, double fraction) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) throw std::invalid_argument("band fraction must lie in [0, 1]");
  return static_cast<Eigen::Index>(std::lround(static_cast<double>(n) * fraction));
}

/// Squared coefficient magnitude per frequency and axis.
template <typename Scalar>
PointsX<Scalar> frequency_energies(const SpectralCoefficients<Scalar>& coeffs) {
  return coeffs.coeffs.array().square().matrix();
}

template <typename Scalar>
BandEnergy band_energy(const SpectralCoefficients<Scalar>& coeffs, const BandSplit& split) {
  const auto n = coeffs.coeffs.rows();
  make_band_split(n, split.low_end, split.mid_end);
  const auto& c = coeffs.coeffs;
  return {static_cast<double>(c.topRows(split.low_end).squaredNorm()),
          static_cast<double>(c.middleRows(split.low_end, split.mid_end - split.low_end).squaredNorm()),
          static_cast<double>(c.bottomRows(n - split.mid_end).squaredNorm())};
}

/// Fraction of the total energy held by the first `count` frequencies.
template <typename Scalar>
double leading_energy_fraction(const SpectralCoefficients<Scalar>& coeffs, Eigen::Index count) {
  const double total = static_cast<double>(coeffs.coeffs.squaredNorm());
  if (total == 0.0) return 0.0;
  return static_cast<double>(coeffs.coeffs.topRows(count).squaredNorm()) / total;
}

/// Convenience: K-NN graph, Laplacian and its eigensystem for one cloud.
Basis<double> graph_basis(const Points& points, int k);

/// "index,lambda,energy_x,energy_y,energy_z,energy_total" per frequency.
void write_spectrum_csv(std::ostream& out, const SpectralCoefficients<double>& coeffs);

}  // namespace gsda

#endif  // GSDA_SPECTRAL_HPP
