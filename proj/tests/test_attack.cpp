#include "gsda/attack.hpp"
#include "gsda/defense.hpp"
#include "support.hpp"

#include <doctest.h>

using namespace gsda;

namespace {

SpectralFilterParams random_params(Eigen::Index n, int len, std::uint64_t seed, double spread) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, spread);
  auto p = SpectralFilterParams::identity(n, len);
  for (Eigen::Index i = 0; i < n; ++i) p.delta_w(i) += g(rng);
  for (int l = 0; l < len; ++l) p.delta_h(l) += g(rng);
  return p;
}

// Victim whose logits ignore the input: class `winner` always wins.
ToyClassifier constant_victim(int winner) {
  auto m = ToyClassifier::zeros(4, 6);
  m.b3(winner) = 10.0;
  return m;
}

// True when the nearest-neighbour structure and Hausdorff argmax are the same
// for both clouds, i.e. the finite difference does not straddle a tie.
bool same_correspondence(const Points& a, const Points& b, const Points& clean) {
  const auto na = bidirectional_neighbors(a, clean);
  const auto nb = bidirectional_neighbors(b, clean);
  if (na.forward.index != nb.forward.index || na.backward.index != nb.backward.index) return false;
  Eigen::Index fa, fb, ba, bb;
  na.forward.sq_dist.maxCoeff(&fa);
  nb.forward.sq_dist.maxCoeff(&fb);
  na.backward.sq_dist.maxCoeff(&ba);
  nb.backward.sq_dist.maxCoeff(&bb);
  return fa == fb && ba == bb;
}

}  // namespace

TEST_SUITE("attack") {

TEST_CASE("perturb: identity, zero, low-pass, rotation equivariance") {
  const Points p = test::random_cloud(48, 1);
  AttackConfig cfg;
  cfg.k = 8;
  const auto ctx = AttackContext::build(p, cfg);
  const auto id = SpectralFilterParams::identity(48, 5);
  CHECK((perturb(ctx, id) - p).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((perturb(p, *ctx.basis, id) - p).cwiseAbs().maxCoeff() < 1e-12);

  auto zero = id;
  zero.delta_w.setZero();
  CHECK(perturb(ctx, zero).isZero());

  auto low = id;
  const Eigen::Index b = band_bound(48, 400.0 / 1024.0);
  low.delta_w = ideal_band_response(48, {{0, b}});
  CHECK((perturb(ctx, low) - lowpass_reconstruct(p, 8, b)).cwiseAbs().maxCoeff() < 1e-12);

  const auto params = random_params(48, 5, 3, 0.2);
  const Eigen::Matrix3d r = test::rotation_about(Eigen::Vector3d(0.2, -1, 0.4), 1.1);
  const Points pr = p * r;
  CHECK((perturb(pr, *ctx.basis, params) - perturb(p, *ctx.basis, params) * r).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("low-frequency constraint") {
  const Points p = test::random_cloud(40, 2);
  const auto basis = graph_basis(p, 6);
  const Eigen::Index b = 16;
  CHECK(lfc_loss(p, p, *basis, b) == 0.0);

  SpectralCoefficients<double> high{gft(p, basis).coeffs, basis};
  high.coeffs.bottomRows(40 - b) += 0.3 * test::random_cloud(40 - b, 9);
  CHECK(lfc_loss(igft(high), p, *basis, b) < 1e-12);

  SpectralCoefficients<double> one{gft(p, basis).coeffs, basis};
  const Eigen::RowVector3d delta(0.1, -0.2, 0.05);
  one.coeffs.row(3) += delta;
  CHECK(std::abs(lfc_loss(igft(one), p, *basis, b) - delta.norm()) < 1e-12);
  CHECK_THROWS(lfc_loss(p, p, *basis, 41));
}

TEST_CASE("adversarial loss: baseline and reductions") {
  const Points p = test::random_cloud(32, 4);
  const auto victim = ToyClassifier::random(8, 6, 5);
  AttackConfig cfg;
  cfg.k = 6;
  const auto ctx = AttackContext::build(p, cfg);
  const auto base = adv_loss(p, ctx, cfg, victim, 2);
  CHECK(base.regularization == 0.0);
  CHECK(base.constraint == 0.0);
  CHECK(base.total == doctest::Approx(log_softmax(forward(victim, p))(2)).epsilon(1e-14));

  cfg.beta1 = 0.0;
  cfg.beta2 = 0.0;
  const Points q = p + 0.05 * test::random_cloud(32, 6);
  const auto reduced = adv_loss(q, ctx, cfg, victim, 2);
  CHECK(reduced.grad == loss_grad_points(victim, q, ClassLoss::untargeted(2)).grad);
}

TEST_CASE("adversarial loss gradient matches finite differences") {
  int compared = 0;
  for (std::uint64_t trial = 0; trial < 10; ++trial) {
    const Points p = test::random_cloud(16, 10 + trial);
    const auto victim = ToyClassifier::random(8, 6, 20 + trial);
    AttackConfig cfg;
    cfg.k = 5;
    if (trial % 2) {
      cfg.mode = AttackMode::targeted;
      cfg.target = 4;
    }
    const auto ctx = AttackContext::build(p, cfg);
    const Points q = p + 0.03 * test::random_cloud(16, 30 + trial);
    const auto loss = adv_loss(q, ctx, cfg, victim, 1);
    const double h = 1e-6;
    for (Eigen::Index i = 0; i < 16; ++i)
      for (int c = 0; c < 3; ++c) {
        Points a = q, b = q;
        a(i, c) += h;
        b(i, c) -= h;
        if (!same_correspondence(a, b, p)) continue;
        const double fd = (adv_loss(a, ctx, cfg, victim, 1).total - adv_loss(b, ctx, cfg, victim, 1).total) / (2 * h);
        CAPTURE(trial);
        CHECK(test::rel_err(loss.grad(i, c), fd, 1e-6) < 1e-4);
        ++compared;
      }
  }
  CHECK(compared > 400);
}

TEST_CASE("parameter gradient") {
  const Points p = test::random_cloud(16, 40);
  AttackConfig cfg;
  cfg.k = 5;
  cfg.poly_len = 3;
  const auto ctx = AttackContext::build(p, cfg);
  const auto victim = ToyClassifier::random(8, 6, 41);

  SUBCASE("zero upstream gradient") {
    const auto g = grad_params(Points::Zero(16, 3), ctx, random_params(16, 3, 1, 0.1));
    CHECK(g.delta_w.isZero());
    CHECK(g.delta_h.isZero());
  }
  SUBCASE("L = 1 reduction") {
    AttackConfig one = cfg;
    one.poly_len = 1;
    const auto c1 = AttackContext::build(p, one, ctx.basis);
    const auto params = random_params(16, 1, 2, 0.1);
    const Points up = test::random_cloud(16, 3);
    const auto g = grad_params(up, c1, params);
    const PointsX<double> g_hat = ctx.basis->eigenvectors.transpose() * up;
    double expected = 0.0;
    for (Eigen::Index i = 0; i < 16; ++i) expected += params.delta_w(i) * g_hat.row(i).dot(ctx.clean_coeffs.row(i));
    CHECK(g.delta_h(0) == doctest::Approx(expected).epsilon(1e-12));
  }
  SUBCASE("central finite differences") {
    for (std::uint64_t trial = 0; trial < 10; ++trial) {
      const auto params = random_params(16, 3, 50 + trial, 0.05);
      auto objective = [&](const SpectralFilterParams& q) { return adv_loss(perturb(ctx, q), ctx, cfg, victim, 0).total; };
      const auto loss = adv_loss(perturb(ctx, params), ctx, cfg, victim, 0);
      const auto g = grad_params(loss.grad, ctx, params);
      const double h = 1e-6;
      auto check = [&](Vec SpectralFilterParams::*field, const Vec& analytic) {
        for (Eigen::Index i = 0; i < analytic.size(); ++i) {
          auto a = params, b = params;
          (a.*field)(i) += h;
          (b.*field)(i) -= h;
          if (!same_correspondence(perturb(ctx, a), perturb(ctx, b), p)) continue;
          const double fd = (objective(a) - objective(b)) / (2 * h);
          CAPTURE(trial);
          CAPTURE(i);
          CHECK(test::rel_err(analytic(i), fd, 1e-6) < 1e-4);
        }
      };
      check(&SpectralFilterParams::delta_w, g.delta_w);
      check(&SpectralFilterParams::delta_h, g.delta_h);
    }
  }
}

TEST_CASE("epsilon projection") {
  const Points p = test::random_cloud(40, 60);
  AttackConfig cfg;
  cfg.k = 6;
  const auto ctx = AttackContext::build(p, cfg);
  const double eps = 0.2;

  const auto small = random_params(40, 5, 1, 1e-4);
  REQUIRE(spectral_budget_used(ctx, small) < eps);
  const auto kept = project_epsilon(small, ctx, eps);
  CHECK(kept.delta_w == small.delta_w);
  CHECK(kept.delta_h == small.delta_h);

  // g = 1 + 2u with |delta| = 2 eps.
  Vec u = test::random_cloud(40, 61).col(0);
  u *= eps / (u.cwiseProduct(ctx.row_norms)).norm();
  auto doubled = SpectralFilterParams::identity(40, 5);
  doubled.delta_w = (1.0 + 2.0 * u.array()).matrix();
  CHECK(std::abs(spectral_budget_used(ctx, doubled) - 2 * eps) < 1e-12);
  const auto projected = project_epsilon(doubled, ctx, eps);
  CHECK(std::abs(spectral_budget_used(ctx, projected) - eps) < 1e-9);
  CHECK((projected.response(ctx.powers) - (1.0 + u.array()).matrix()).cwiseAbs().maxCoeff() < 1e-12);

  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto wild = random_params(40, 5, 100 + seed, 0.5);
    const auto once = project_epsilon(wild, ctx, eps);
    const auto twice = project_epsilon(once, ctx, eps);
    CHECK(spectral_budget_used(ctx, once) <= eps + 1e-9);
    CHECK((twice.response(ctx.powers) - once.response(ctx.powers)).cwiseAbs().maxCoeff() < 1e-12);
    const Points adv = perturb(ctx, once);
    CHECK((ctx.basis->eigenvectors.transpose() * adv - ctx.clean_coeffs).norm() <= eps + 1e-9);
  }

  // Vanishing polynomial factor falls back to a pure per-frequency response.
  auto degenerate = random_params(40, 5, 7, 0.5);
  degenerate.delta_h.setZero();
  const auto fallback = project_epsilon(degenerate, ctx, eps);
  CHECK(spectral_budget_used(ctx, fallback) <= eps + 1e-9);
  CHECK(fallback.delta_h(0) == 1.0);
}

TEST_CASE("configuration validation") {
  AttackConfig cfg;
  cfg.mode = AttackMode::targeted;
  cfg.target = 3;
  CHECK_THROWS_AS(cfg.validate(3, 6), std::invalid_argument);
  CHECK_NOTHROW(cfg.validate(2, 6));
  cfg.target = 6;
  CHECK_THROWS_AS(cfg.validate(2, 6), std::invalid_argument);
  AttackConfig bad;
  bad.epsilon = 0.0;
  CHECK_THROWS(bad.validate(0, 6));
  bad = AttackConfig{};
  bad.beta1 = -1.0;
  CHECK_THROWS(bad.validate(0, 6));
  const auto victim = ToyClassifier::random(8, 6, 1);
  AttackConfig same;
  same.mode = AttackMode::targeted;
  same.target = 0;
  CHECK_THROWS(run_attack(test::random_cloud(20, 1), 0, same, victim));
}

TEST_CASE("attack runs") {
  const Points p = test::random_cloud(32, 70);

  SUBCASE("zero iterations fails with zero distortion") {
    AttackConfig cfg;
    cfg.iters = 0;
    cfg.k = 6;
    const auto r = run_attack(p, 0, cfg, constant_victim(0));
    CHECK_FALSE(r.success);
    CHECK(r.adversarial == p);
    CHECK(r.report.d_norm == 0.0);
    CHECK(r.report.d_chamfer == 0.0);
    CHECK(r.report.d_hausdorff == 0.0);
    CHECK(r.report.d_geo == 0.0);
    CHECK(r.report.e_delta == 0.0);
  }
  SUBCASE("already misclassified returns the clean cloud") {
    AttackConfig cfg;
    cfg.k = 6;
    const auto r = binary_search_beta(p, 0, cfg, constant_victim(3));
    CHECK(r.success);
    CHECK(r.adversarial == p);
    CHECK(r.report.d_norm == 0.0);
  }
  SUBCASE("input-independent victim cannot be fooled") {
    AttackConfig cfg;
    cfg.k = 6;
    cfg.iters = 20;
    cfg.binary_search_steps = 3;
    const auto r = binary_search_beta(p, 2, cfg, constant_victim(2));
    CHECK_FALSE(r.success);
    CHECK(r.report.e_delta <= cfg.epsilon + 1e-6);
  }
  SUBCASE("trace respects the budget and starts at the identity") {
    const auto victim = ToyClassifier::random(16, 6, 71);
    const int y = predict(victim, p);
    AttackConfig cfg;
    cfg.k = 6;
    cfg.iters = 60;
    cfg.epsilon = 0.3;
    cfg.lr = 0.05;
    const auto r = run_attack(p, y, cfg, victim);
    REQUIRE(r.trace.size() == 60);
    CHECK(r.trace[0].e_delta < 1e-12);
    for (const auto& t : r.trace) CHECK(t.e_delta <= cfg.epsilon + 1e-9);
    if (r.success) CHECK(r.report.e_delta <= cfg.epsilon + 1e-6);
    const auto again = run_attack(p, y, cfg, victim);
    CHECK(again.adversarial == r.adversarial);
  }
}

}
