#include "gsda/defense.hpp"
#include "gsda/metrics.hpp"
#include "support.hpp"

#include <doctest.h>

using namespace gsda;

TEST_SUITE("defense") {

TEST_CASE("low-pass reconstruction") {
  const Points p = test::random_cloud(64, 1);
  CHECK((lowpass_reconstruct(p, 10, 64) - p).cwiseAbs().maxCoeff() < 1e-8);

  // DC only: every point collapses onto the centroid.
  const Points dc = lowpass_reconstruct(p, 10, 1);
  const Eigen::RowVector3d centroid = p.colwise().mean();
  CHECK((dc.rowwise() - centroid).cwiseAbs().maxCoeff() < 1e-12);

  const auto basis = graph_basis(p, 10);
  const auto split = default_band_split(64);
  const auto before = band_energy(gft(p, basis), split);
  const auto after = band_energy(gft(lowpass_reconstruct(p, 10, split.low_end), basis), split);
  CHECK(std::abs(after.low - before.low) < 1e-9);
  CHECK(after.mid < 1e-9);
  CHECK(after.high < 1e-9);
  CHECK_THROWS(lowpass_reconstruct(p, 10, 65));
}

TEST_CASE("low band reconstructs a sphere better than the high band") {
  std::mt19937_64 rng(3);
  const Points sphere = sample_shape(ShapeClass::sphere, 256, rng, 0.0);
  const auto basis = graph_basis(sphere, 10);
  const Eigen::Index b = band_bound(256, kDefaultLowpassFraction);
  const Points low = lowpass_reconstruct(sphere, 10, b);
  const Points high = spectral_filter(sphere, *basis, ideal_band_response(256, {{b, 256}}));
  CHECK(chamfer(low, sphere) < chamfer(high, sphere));
}

TEST_CASE("fraction 1 reduces low-pass inference to plain inference") {
  const auto model = ToyClassifier::random(16, 6, 2);
  const Points p = test::random_cloud(40, 3);
  CHECK(lowpass_inference(model, p, 10, 1.0) == predict(model, p));
  const Dataset data{{p, 1}};
  const Dataset aug = lowpass_augment(data, 10, 1.0);
  REQUIRE(aug.size() == 2);
  CHECK(aug[0].points == p);
  CHECK((aug[1].points - p).cwiseAbs().maxCoeff() < 1e-8);
  CHECK(aug[1].label == 1);
}

TEST_CASE("augmented training is deterministic") {
  const Dataset train_set = gen_synthetic(4, 48, 1);
  const Dataset holdout = gen_synthetic(2, 48, 2);
  TrainConfig cfg;
  cfg.hidden = 8;
  cfg.epochs = 2;
  const auto a = train_with_lowpass_augmentation(train_set, holdout, cfg, 8, kDefaultLowpassFraction);
  const auto b = train_with_lowpass_augmentation(train_set, holdout, cfg, 8, kDefaultLowpassFraction, 2);
  CHECK(a.model == b.model);
  CHECK(a.report.holdout_accuracy == b.report.holdout_accuracy);
}

TEST_CASE("simple random sampling") {
  const Points p = test::random_cloud(100, 4);
  CHECK(srs(p, 0.0, 1) == p);
  const Points q = srs(p, 0.3, 1);
  CHECK(q.rows() == 70);
  CHECK(srs(p, 0.3, 1) == q);
  CHECK(srs(p, 0.3, 2) != q);
  // Every kept row is an original row.
  for (Eigen::Index i = 0; i < q.rows(); ++i) {
    bool found = false;
    for (Eigen::Index j = 0; j < p.rows() && !found; ++j) found = q.row(i) == p.row(j);
    CHECK(found);
  }
  CHECK_THROWS(srs(p, 0.99, 1));
  CHECK_THROWS(srs(p, 1.0, 1));
}

TEST_CASE("statistical outlier removal drops the lone outlier") {
  // 3x3 unit grid plus one point far away.
  Points p(10, 3);
  int r = 0;
  for (int x = 0; x < 3; ++x)
    for (int y = 0; y < 3; ++y) p.row(r++) << x, y, 0;
  p.row(9) << 10, 10, 0;

  // Grid points: both nearest neighbours at distance 1. Outlier: (2,2) and
  // then (1,2)/(2,1) at sqrt(128) and sqrt(145).
  const double outlier_stat = 0.5 * (std::sqrt(128.0) + std::sqrt(145.0));
  const double mu = (9.0 + outlier_stat) / 10.0;
  const double sd = std::sqrt((9.0 * (1.0 - mu) * (1.0 - mu) + (outlier_stat - mu) * (outlier_stat - mu)) / 9.0);
  REQUIRE(outlier_stat > mu + sd);
  REQUIRE(1.0 <= mu + sd);

  const auto res = sor(p, 2, 1.0);
  CHECK(res.dropped == 1);
  CHECK(res.points == p.topRows(9));
  CHECK(sor(p.topRows(9), 2, 1.0).dropped == 0);
}

TEST_CASE("gaussian noise") {
  const Points p = test::random_cloud(2000, 5);
  CHECK(gaussian_noise(p, 0.0, 1) == p);
  const Points q = gaussian_noise(p, 0.02, 1);
  CHECK(gaussian_noise(p, 0.02, 1) == q);
  const double radius = (p.rowwise() - p.colwise().mean()).rowwise().norm().maxCoeff();
  const double sd = std::sqrt((q - p).squaredNorm() / (3.0 * 2000.0));
  CHECK(std::abs(sd / (0.02 * radius) - 1.0) < 0.05);
  CHECK_THROWS(gaussian_noise(p, 1.0, 1));
}

TEST_CASE("transfer evaluation") {
  const auto model = ToyClassifier::random(8, 6, 9);
  std::vector<TransferSample> samples;
  for (std::uint64_t i = 0; i < 10; ++i) {
    TransferSample s;
    s.clean = test::random_cloud(20, i);
    s.adversarial = test::random_cloud(20, 100 + i);
    s.label = predict(model, s.clean);
    s.success = predict(model, s.adversarial) != s.label;
    samples.push_back(s);
  }
  double raw = 0.0;
  for (const auto& s : samples) raw += s.success;
  raw /= 10.0;
  CHECK(evaluate_under_defense(samples, make_predictor(DefenseConfig{}, model)) == doctest::Approx(raw));
  // Oracle defense that restores the clean cloud.
  const auto oracle = [&](const TransferSample& s, std::size_t) { return predict(model, s.clean); };
  CHECK(evaluate_under_defense(samples, oracle) == 0.0);

  TransferSample targeted;
  targeted.label = 0;
  targeted.target = 3;
  targeted.success = true;
  CHECK(evaluate_under_defense({targeted}, [](const TransferSample&, std::size_t) { return 2; }) == 0.0);
  CHECK(evaluate_under_defense({targeted}, [](const TransferSample&, std::size_t) { return 3; }) == 1.0);
  CHECK(evaluate_under_defense({}, oracle) == 0.0);
}

TEST_CASE("defense configuration") {
  DefenseConfig cfg;
  cfg.kind = DefenseKind::srs;
  cfg.fraction = 1.0;
  CHECK_THROWS(cfg.validate());
  cfg.fraction = 0.2;
  CHECK_NOTHROW(cfg.validate());
  CHECK(cfg.label() == "srs");
  cfg.kind = DefenseKind::sor;
  cfg.k = 0;
  CHECK_THROWS(cfg.validate());
  cfg = DefenseConfig{};
  cfg.kind = DefenseKind::lowpass_retrain;
  CHECK_THROWS(cfg.validate());
  const Points p = test::random_cloud(30, 1);
  cfg.fraction = 0.4;
  CHECK(apply_defense(cfg, p) == p);
}

}
