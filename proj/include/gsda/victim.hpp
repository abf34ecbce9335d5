#ifndef GSDA_VICTIM_HPP
#define GSDA_VICTIM_HPP

#include "gsda/types.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace gsda {

/// PointNet-style classifier: a shared per-point MLP (3 -> h -> h, ReLU),
/// channel-wise max pooling over points, and a linear head (h -> c).
struct ToyClassifier {
  Mat w1;  // h x 3
  Vec b1;
  Mat w2;  // h x h
  Vec b2;
  Mat w3;  // c x h
  Vec b3;

  int hidden() const { return static_cast<int>(w1.rows()); }
  int classes() const { return static_cast<int>(w3.rows()); }

  static ToyClassifier zeros(int hidden, int classes);
  /// He-normal weights, zero biases.
  static ToyClassifier random(int hidden, int classes, std::uint64_t seed);

  bool operator==(const ToyClassifier&) const = default;
};

Vec forward(const ToyClassifier& model, const Points& points);
int predict(const ToyClassifier& model, const Points& points);
Vec softmax(const Vec& logits);
Vec log_softmax(const Vec& logits);

/// Cross-entropy objective used by the attack: targeted minimizes
/// -log p_target, untargeted minimizes +log p_label.
struct ClassLoss {
  bool targeted = false;
  int label = 0;

  static ClassLoss untargeted(int true_label) { return {false, true_label}; }
  static ClassLoss toward(int target_label) { return {true, target_label}; }
};

struct LossGrad {
  double loss = 0.0;
  Points grad;
  Vec logits;
};

/// Loss and its exact gradient with respect to every input coordinate. The
/// max-pool routes each channel's gradient to its argmax point (lowest index
/// on ties).
LossGrad loss_grad_points(const ToyClassifier& model, const Points& points, const ClassLoss& loss);

// ---------------------------------------------------------------------------
// Synthetic data

enum class ShapeClass { sphere = 0, cube, cylinder, torus, cone, plane };
inline constexpr int kShapeClassCount = 6;
std::string_view shape_name(ShapeClass s);

struct LabeledCloud {
  Points points;
  int label = 0;
};
using Dataset = std::vector<LabeledCloud>;

/// Canonical (unrotated, unit-size) surface sample of one shape family with
/// i.i.d. Gaussian jitter of standard deviation `jitter`. Family parameters
/// such as torus tube radius or cone height are drawn from `rng`.
Points sample_shape(ShapeClass shape, Eigen::Index n, std::mt19937_64& rng, double jitter);

/// Uniformly random rotation (Haar measure on SO(3)).
Eigen::Matrix3d random_rotation(std::mt19937_64& rng);

/// Random yaw about z followed by a tilt of at most `max_tilt` radians about
/// a random horizontal axis.
Eigen::Matrix3d random_orientation(std::mt19937_64& rng, double max_tilt);

/// `per_class` samples of every class, interleaved by class, each randomly
/// oriented (yaw plus a tilt of up to 0.35 rad), scaled and unit-ball
/// normalized. Deterministic in `seed`.
Dataset gen_synthetic(int per_class, Eigen::Index n, std::uint64_t seed, double jitter = 0.01);

// ---------------------------------------------------------------------------
// Training

struct TrainConfig {
  int hidden = 64;
  int epochs = 30;
  int batch_size = 16;
  double lr = 0.01;
  double momentum = 0.9;
  std::uint64_t seed = 0;
};

struct TrainReport {
  double train_accuracy = 0.0;
  double holdout_accuracy = 0.0;
  std::vector<double> epoch_loss;
};

double accuracy(const ToyClassifier& model, const Dataset& data);

/// Minibatch SGD with momentum on the mean cross-entropy. Deterministic in
/// `cfg.seed`. `holdout` may be empty.
ToyClassifier train(const Dataset& train_set, const Dataset& holdout, const TrainConfig& cfg, TrainReport* report = nullptr);

/// Continues training an existing model in place.
void train_epochs(ToyClassifier& model, const Dataset& train_set, const TrainConfig& cfg, TrainReport* report = nullptr);

// ---------------------------------------------------------------------------
// Checkpoints: versioned JSON with shape header; doubles round-trip exactly.

std::string save_model_json(const ToyClassifier& model);
ToyClassifier load_model_json(std::string_view text);
void save_model(const std::filesystem::path& path, const ToyClassifier& model);
ToyClassifier load_model(const std::filesystem::path& path);

}  // namespace gsda

#endif  // GSDA_VICTIM_HPP
