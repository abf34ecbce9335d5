#ifndef GSDA_DEFENSE_HPP
#define GSDA_DEFENSE_HPP

#include "gsda/spectral.hpp"
#include "gsda/victim.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace gsda {

/// Low band bound used by the low-pass defense, as a fraction of n.
inline constexpr double kDefaultLowpassFraction = 400.0 / 1024.0;

/// Keeps the first `bound` graph frequencies of P on its own K-NN graph.
Points lowpass_reconstruct(const Points& points, int k, Eigen::Index bound);
Points lowpass_reconstruct_fraction(const Points& points, int k, double fraction);

/// Training pool = originals followed by their low-pass reconstructions.
Dataset lowpass_augment(const Dataset& data, int k, double fraction, int jobs = 1);

struct DefendedTraining {
  ToyClassifier model;
  TrainReport report;  // holdout accuracy measured with low-pass inference
};

DefendedTraining train_with_lowpass_augmentation(const Dataset& train_set, const Dataset& holdout,
                                                 const TrainConfig& cfg, int k, double fraction, int jobs = 1);

int lowpass_inference(const ToyClassifier& model, const Points& points, int k, double fraction);

/// Uniform subsample without replacement keeping round((1 - drop) * n) points.
Points srs(const Points& points, double drop_fraction, std::uint64_t seed);

struct SorResult {
  Points points;
  Eigen::Index dropped = 0;
};

/// Statistical outlier removal: drop points whose mean distance to their k
/// nearest neighbours exceeds mean + m * stddev of that statistic (sample
/// standard deviation).
SorResult sor(const Points& points, int k = 2, double m = 1.0);

/// Adds N(0, sigma^2) per coordinate, sigma = fraction * bounding-sphere
/// radius (largest distance from the centroid).
Points gaussian_noise(const Points& points, double fraction, std::uint64_t seed);

enum class DefenseKind { none, lowpass_retrain, srs, sor, gaussian };

struct DefenseConfig {
  DefenseKind kind = DefenseKind::none;
  double fraction = 0.0;  // srs drop / gaussian noise / lowpass band
  int k = 2;  // sor neighbours
  double sigma_mult = 1.0;
  int graph_k = 10;  // K-NN graph for lowpass_retrain
  std::uint64_t seed = 0;

  void validate() const;
  std::string label() const;
};

/// Input transformation for the data-space defenses (identity for none and
/// lowpass_retrain). `index` decorrelates per-sample randomness.
Points apply_defense(const DefenseConfig& cfg, const Points& points, std::uint64_t index = 0);

/// One attack outcome as seen by a defense evaluation.
struct TransferSample {
  Points clean;
  Points adversarial;
  int label = 0;
  std::optional<int> target;
  bool success = false;
};

using DefendedPredictor = std::function<int(const TransferSample&, std::size_t index)>;

/// Fraction of all samples whose attack succeeded and still succeeds after
/// the defense: prediction != label (untargeted) or == target (targeted).
double evaluate_under_defense(const std::vector<TransferSample>& samples, const DefendedPredictor& predictor);

/// Predictor for `cfg`: data-space transform + `model`, or low-pass inference
/// for lowpass_retrain (where `model` should be the retrained one). `model`
/// is captured by reference and must outlive the predictor.
DefendedPredictor make_predictor(const DefenseConfig& cfg, const ToyClassifier& model);

}  // namespace gsda

#endif  // GSDA_DEFENSE_HPP
