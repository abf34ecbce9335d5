#include "gsda/metrics.hpp"
#include "support.hpp"

#include <doctest.h>

#include <algorithm>

using namespace gsda;

namespace {

double brute_directed_mean_sq(const Points& a, const Points& b) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < b.rows(); ++j) best = std::min(best, (a.row(i) - b.row(j)).squaredNorm());
    sum += best;
  }
  return sum / static_cast<double>(a.rows());
}

double brute_directed_max(const Points& a, const Points& b) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < b.rows(); ++j) best = std::min(best, (a.row(i) - b.row(j)).norm());
    worst = std::max(worst, best);
  }
  return worst;
}

// Straight-line duplicate of the curvature proxy: brute-force neighbours and
// an SVD normal instead of the covariance eigensolver.
double oracle_geo(const Points& adv, const Points& clean, int k) {
  auto kappa = [k](const Points& p) {
    std::vector<double> out(static_cast<std::size_t>(p.rows()));
    for (Eigen::Index i = 0; i < p.rows(); ++i) {
      std::vector<std::pair<double, Eigen::Index>> d;
      for (Eigen::Index j = 0; j < p.rows(); ++j)
        if (j != i) d.emplace_back((p.row(i) - p.row(j)).squaredNorm(), j);
      std::sort(d.begin(), d.end());
      Eigen::MatrixXd hood(k + 1, 3);
      hood.row(0) = p.row(i);
      for (int t = 0; t < k; ++t) hood.row(t + 1) = p.row(d[t].second);
      const Eigen::MatrixXd centered = hood.rowwise() - hood.colwise().mean();
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeFullV);
      const Eigen::Vector3d normal = svd.matrixV().col(2);
      double s = 0.0;
      for (int t = 0; t < k; ++t) {
        const Eigen::Vector3d dir = (p.row(d[t].second) - p.row(i)).transpose().normalized();
        s += 1.0 - std::abs(normal.dot(dir));
      }
      out[static_cast<std::size_t>(i)] = s / k;
    }
    return out;
  };
  const auto ka = kappa(adv);
  const auto kc = kappa(clean);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < adv.rows(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index j = 1; j < clean.rows(); ++j)
      if ((adv.row(i) - clean.row(j)).squaredNorm() < (adv.row(i) - clean.row(best)).squaredNorm()) best = j;
    sum += std::abs(ka[static_cast<std::size_t>(i)] - kc[static_cast<std::size_t>(best)]);
  }
  return sum / static_cast<double>(adv.rows());
}

template <typename F>
Points central_difference(const Points& p, F f, double h) {
  Points g(p.rows(), 3);
  for (Eigen::Index i = 0; i < p.rows(); ++i)
    for (int c = 0; c < 3; ++c) {
      Points a = p, b = p;
      a(i, c) += h;
      b(i, c) -= h;
      g(i, c) = (f(a) - f(b)) / (2 * h);
    }
  return g;
}

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("l2 distance") {
  const Points p = test::random_cloud(20, 1);
  CHECK(l2_distance(p, p) == 0.0);
  Points q = p;
  q.row(3) += Eigen::RowVector3d(3, 4, 0);
  CHECK(l2_distance(q, p) == doctest::Approx(5.0).epsilon(1e-14));
  const Points r = test::random_cloud(20, 2);
  double s = 0.0;
  for (Eigen::Index i = 0; i < 20; ++i)
    for (int c = 0; c < 3; ++c) s += (r(i, c) - p(i, c)) * (r(i, c) - p(i, c));
  CHECK(test::rel_err(l2_distance(r, p), std::sqrt(s)) < 1e-14);
  CHECK_THROWS(l2_distance(r, test::random_cloud(19, 1)));
}

TEST_CASE("chamfer and hausdorff") {
  Points a(1, 3), b(1, 3);
  a << 0, 0, 0;
  b << 1, 0, 0;
  CHECK(chamfer(a, b) == 1.0);
  Points two(2, 3), one(1, 3);
  two << 0, 0, 0, 2, 0, 0;
  one << 0, 0, 0;
  CHECK(hausdorff(two, one) == 2.0);
  CHECK(hausdorff(one, two) == 2.0);
  CHECK_THROWS(chamfer(Points(0, 3), one));
  CHECK_THROWS(hausdorff(one, Points(0, 3)));

  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Points p = test::random_cloud(8, seed);
    const Points q = test::random_cloud(8 + seed % 3, seed + 50);
    CHECK(chamfer(p, p) == 0.0);
    CHECK(hausdorff(p, p) == 0.0);
    const double c_oracle = 0.5 * (brute_directed_mean_sq(p, q) + brute_directed_mean_sq(q, p));
    const double h_oracle = std::max(brute_directed_max(p, q), brute_directed_max(q, p));
    CHECK(test::rel_err(chamfer(p, q), c_oracle) < 1e-14);
    CHECK(test::rel_err(hausdorff(p, q), h_oracle) < 1e-14);
    CHECK(chamfer(p, q) == chamfer(q, p));
    CHECK(hausdorff(p, q) == hausdorff(q, p));
  }
}

TEST_CASE("nearest neighbours prefer the lowest index on ties") {
  Points from(1, 3), to(3, 3);
  from << 0, 0, 0;
  to << 1, 0, 0, -1, 0, 0, 0, 1, 0;
  const auto nn = nearest_neighbors(from, to);
  CHECK(nn.index[0] == 0);
  CHECK(nn.sq_dist(0) == 1.0);
}

TEST_CASE("value/gradient pairs match finite differences") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Points clean = test::random_cloud(12, seed);
    const Points adv = clean + 0.05 * test::random_cloud(12, seed + 1000);
    const auto cg = chamfer_with_grad(adv, clean);
    CHECK(cg.value == doctest::Approx(chamfer(adv, clean)).epsilon(1e-14));
    const Points cfd = central_difference(adv, [&](const Points& x) { return chamfer(x, clean); }, 1e-6);
    CHECK((cg.grad - cfd).cwiseAbs().maxCoeff() < 1e-7);

    const auto hg = hausdorff_with_grad(adv, clean);
    CHECK(hg.value == doctest::Approx(hausdorff(adv, clean)).epsilon(1e-14));
    const Points hfd = central_difference(adv, [&](const Points& x) { return hausdorff(x, clean); }, 1e-7);
    CHECK((hg.grad - hfd).cwiseAbs().maxCoeff() < 1e-6);

    const auto nn = bidirectional_neighbors(adv, clean);
    CHECK(chamfer_with_grad(adv, clean, nn).grad == cg.grad);
    CHECK(hausdorff_with_grad(adv, clean, nn).grad == hg.grad);
  }
  const Points p = test::random_cloud(6, 3);
  CHECK(hausdorff_with_grad(p, p).grad.isZero());
  CHECK(chamfer_with_grad(p, p).grad.isZero());
}

TEST_CASE("geometric regularity variant") {
  const Points p = test::random_cloud(16, 21);
  CHECK(geo_regularity(p, p, 5) == 0.0);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Points clean = test::random_cloud(16, seed + 30);
    const Points adv = clean + 0.1 * test::random_cloud(16, seed + 60);
    CHECK(std::abs(geo_regularity(adv, clean, 5) - oracle_geo(adv, clean, 5)) < 1e-10);
  }

  // Planar cloud jittered within its plane keeps the curvature proxy at 0.
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1, 1);
  Points plane(64, 3), moved(64, 3);
  for (int i = 0; i < 64; ++i) {
    plane.row(i) << u(rng), u(rng), 0.0;
    moved.row(i) = plane.row(i) + Eigen::RowVector3d(0.01 * u(rng), 0.01 * u(rng), 0.0);
  }
  const Eigen::Matrix3d r = test::rotation_about(Eigen::Vector3d(1, 1, 0), 0.7);
  CHECK(geo_regularity(Points(moved * r), Points(plane * r), 10) <= 1e-6);

  Points dup = Points::Zero(6, 3);
  dup.row(5) << 1, 0, 0;
  CHECK_THROWS(geo_regularity(dup, dup, 3));
}

TEST_CASE("spectral perturbation energy") {
  const Points p = test::random_cloud(40, 4);
  const auto basis = graph_basis(p, 6);
  const auto c = gft(p, basis);
  CHECK(spectral_perturbation_energy(c, c) == 0.0);

  Eigen::VectorXd g = Eigen::VectorXd::Ones(40);
  g(9) = 1.0 + 0.37;
  const Points filtered = spectral_filter(p, *basis, g);
  const auto cf = gft(filtered, basis);
  CHECK(std::abs(spectral_perturbation_energy(cf, c) - 0.37 * c.coeffs.row(9).norm()) < 1e-12);
  CHECK(std::abs(spectral_perturbation_energy(cf, c) - l2_distance(filtered, p)) < 1e-9);

  const auto other = graph_basis(p, 6);
  CHECK_THROWS_AS(spectral_perturbation_energy(gft(p, other), c), std::invalid_argument);
}

TEST_CASE("distortion report") {
  const Points p = test::random_cloud(32, 6);
  const auto basis = graph_basis(p, 10);
  const auto zero = distortion_report(p, p, basis);
  CHECK(zero.d_norm == 0.0);
  CHECK(zero.d_chamfer == 0.0);
  CHECK(zero.d_hausdorff == 0.0);
  CHECK(zero.d_geo == 0.0);
  CHECK(zero.e_delta == 0.0);
  const Points q = p + 0.02 * test::random_cloud(32, 7);
  const auto r = distortion_report(q, p, basis);
  CHECK(r.d_norm > 0.0);
  CHECK(r.d_chamfer > 0.0);
  CHECK(r.d_hausdorff > 0.0);
  CHECK(r.d_geo >= 0.0);
  CHECK(std::abs(r.e_delta - r.d_norm) < 1e-12);
}

}
