#include "gsda/defense.hpp"

#include "gsda/graph.hpp"
#include "gsda/parallel.hpp"
#include "gsda/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

namespace gsda {

Points lowpass_reconstruct(const Points& points, int k, Eigen::Index bound) {
  if (bound < 0 || bound > points.rows()) throw std::invalid_argument("low-pass bound must lie in [0, n]");
  const auto basis = graph_basis(points, k);
  const auto lead = basis->eigenvectors.leftCols(bound);
  return lead * (lead.transpose() * points);
}

Points lowpass_reconstruct_fraction(const Points& points, int k, double fraction) {
  return lowpass_reconstruct(points, k, std::max<Eigen::Index>(1, band_bound(points.rows(), fraction)));
}

Dataset lowpass_augment(const Dataset& data, int k, double fraction, int jobs) {
  Dataset out(data.size() * 2);
  std::copy(data.begin(), data.end(), out.begin());
  parallel_for(data.size(), jobs, [&](std::size_t i) {
    out[data.size() + i] = {lowpass_reconstruct_fraction(data[i].points, k, fraction), data[i].label};
  });
  return out;
}

DefendedTraining train_with_lowpass_augmentation(const Dataset& train_set, const Dataset& holdout,
                                                 const TrainConfig& cfg, int k, double fraction, int jobs) {
  DefendedTraining out;
  const Dataset pool = lowpass_augment(train_set, k, fraction, jobs);
  out.model = train(pool, {}, cfg, &out.report);
  out.report.train_accuracy = accuracy(out.model, train_set);
  if (!holdout.empty()) {
    std::vector<int> correct(holdout.size(), 0);
    parallel_for(holdout.size(), jobs, [&](std::size_t i) {
      correct[i] = lowpass_inference(out.model, holdout[i].points, k, fraction) == holdout[i].label;
    });
    out.report.holdout_accuracy =
        static_cast<double>(std::accumulate(correct.begin(), correct.end(), 0)) / static_cast<double>(holdout.size());
  }
  return out;
}

int lowpass_inference(const ToyClassifier& model, const Points& points, int k, double fraction) {
  return predict(model, lowpass_reconstruct_fraction(points, k, fraction));
}

Points srs(const Points& points, double drop_fraction, std::uint64_t seed) {
  if (!(drop_fraction >= 0.0 && drop_fraction < 1.0)) throw std::invalid_argument("srs drop fraction must lie in [0, 1)");
  const auto n = points.rows();
  const auto keep = static_cast<Eigen::Index>(std::lround(static_cast<double>(n) * (1.0 - drop_fraction)));
  if (keep < 2) throw std::invalid_argument("srs would leave fewer than 2 points");
  if (keep == n) return points;
  std::vector<Eigen::Index> idx(n);
  std::iota(idx.begin(), idx.end(), Eigen::Index(0));
  auto rng = SeedTree(seed).child("srs").engine();
  std::shuffle(idx.begin(), idx.end(), rng);
  idx.resize(keep);
  std::sort(idx.begin(), idx.end());
  Points out(keep, 3);
  for (Eigen::Index i = 0; i < keep; ++i) out.row(i) = points.row(idx[i]);
  return out;
}

SorResult sor(const Points& points, int k, double m) {
  if (k < 1) throw std::invalid_argument("sor needs k >= 1");
  const auto n = points.rows();
  const auto nbrs = knn_indices(points, k);
  Vec mean_dist(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double s = 0.0;
    for (int j : nbrs[i]) s += (points.row(j) - points.row(i)).norm();
    mean_dist(i) = s / k;
  }
  const double mu = mean_dist.mean();
  const double sd = n > 1 ? std::sqrt((mean_dist.array() - mu).square().sum() / static_cast<double>(n - 1)) : 0.0;
  const double threshold = mu + m * sd;

  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < n; ++i)
    if (mean_dist(i) <= threshold) keep.push_back(i);
  if (keep.size() < 2) throw std::invalid_argument("sor would leave fewer than 2 points");
  SorResult out;
  out.points.resize(static_cast<Eigen::Index>(keep.size()), 3);
  for (std::size_t i = 0; i < keep.size(); ++i) out.points.row(static_cast<Eigen::Index>(i)) = points.row(keep[i]);
  out.dropped = n - static_cast<Eigen::Index>(keep.size());
  return out;
}

Points gaussian_noise(const Points& points, double fraction, std::uint64_t seed) {
  if (!(fraction >= 0.0 && fraction < 1.0)) throw std::invalid_argument("gaussian noise fraction must lie in [0, 1)");
  if (fraction == 0.0) return points;
  const Eigen::RowVector3d centroid = points.colwise().mean();
  const double radius = (points.rowwise() - centroid).rowwise().norm().maxCoeff();
  std::normal_distribution<double> noise(0.0, fraction * radius);
  auto rng = SeedTree(seed).child("gaussian").engine();
  Points out = points;
  for (Eigen::Index i = 0; i < out.rows(); ++i)
    for (int c = 0; c < 3; ++c) out(i, c) += noise(rng);
  return out;
}

void DefenseConfig::validate() const {
  switch (kind) {
    case DefenseKind::none: break;
    case DefenseKind::lowpass_retrain:
      if (!(fraction > 0.0 && fraction <= 1.0)) throw std::invalid_argument("low-pass band fraction must lie in (0, 1]");
      if (graph_k < 1) throw std::invalid_argument("graph k must be >= 1");
      break;
    case DefenseKind::srs:
    case DefenseKind::gaussian:
      if (!(fraction >= 0.0 && fraction < 1.0)) throw std::invalid_argument("defense fraction must lie in [0, 1)");
      break;
    case DefenseKind::sor:
      if (k < 1) throw std::invalid_argument("sor k must be >= 1");
      if (sigma_mult < 0.0) throw std::invalid_argument("sor multiplier must be non-negative");
      break;
  }
}

std::string DefenseConfig::label() const {
  std::ostringstream os;
  switch (kind) {
    case DefenseKind::none: os << "none"; break;
    case DefenseKind::lowpass_retrain: os << "lowpass"; break;
    case DefenseKind::srs: os << "srs"; break;
    case DefenseKind::sor: os << "sor"; break;
    case DefenseKind::gaussian: os << "gaussian"; break;
  }
  return os.str();
}

Points apply_defense(const DefenseConfig& cfg, const Points& points, std::uint64_t index) {
  const std::uint64_t seed = SeedTree(cfg.seed).child(index).seed();
  switch (cfg.kind) {
    case DefenseKind::none:
    case DefenseKind::lowpass_retrain: return points;
    case DefenseKind::srs: return srs(points, cfg.fraction, seed);
    case DefenseKind::sor: return sor(points, cfg.k, cfg.sigma_mult).points;
    case DefenseKind::gaussian: return gaussian_noise(points, cfg.fraction, seed);
  }
  return points;
}

double evaluate_under_defense(const std::vector<TransferSample>& samples, const DefendedPredictor& predictor) {
  if (samples.empty()) return 0.0;
  std::size_t fooled = 0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    if (!s.success) continue;
    const int pred = predictor(s, i);
    fooled += s.target ? pred == *s.target : pred != s.label;
  }
  return static_cast<double>(fooled) / static_cast<double>(samples.size());
}

DefendedPredictor make_predictor(const DefenseConfig& cfg, const ToyClassifier& model) {
  cfg.validate();
  if (cfg.kind == DefenseKind::lowpass_retrain) {
    return [cfg, &model](const TransferSample& s, std::size_t) {
      return lowpass_inference(model, s.adversarial, cfg.graph_k, cfg.fraction);
    };
  }
  return [cfg, &model](const TransferSample& s, std::size_t index) {
    return predict(model, apply_defense(cfg, s.adversarial, index));
  };
}

}  // namespace gsda
