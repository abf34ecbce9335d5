#include "gsda/attack.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace gsda {
namespace {

Mat vandermonde(const Vec& x, int poly_len) {
  Mat v(x.size(), poly_len);
  if (poly_len > 0) v.col(0).setOnes();
  for (int l = 1; l < poly_len; ++l) v.col(l) = v.col(l - 1).cwiseProduct(x);
  return v;
}

struct Adam {
  Vec m, v;
  explicit Adam(Eigen::Index n) : m(Vec::Zero(n)), v(Vec::Zero(n)) {}

  void step(Vec& theta, const Vec& grad, const AttackConfig& cfg, int t) {
    m = cfg.adam_beta1 * m + (1.0 - cfg.adam_beta1) * grad;
    v = cfg.adam_beta2 * v + (1.0 - cfg.adam_beta2) * grad.cwiseAbs2();
    const double c1 = 1.0 - std::pow(cfg.adam_beta1, t);
    const double c2 = 1.0 - std::pow(cfg.adam_beta2, t);
    theta.array() -= cfg.lr * (m.array() / c1) / ((v.array() / c2).sqrt() + cfg.adam_eps);
  }
};

}  // namespace

SpectralFilterParams SpectralFilterParams::identity(Eigen::Index n, int poly_len) {
  if (poly_len < 1) throw std::invalid_argument("polynomial length must be at least 1");
  SpectralFilterParams p;
  p.delta_w = Vec::Ones(n);
  p.delta_h = Vec::Zero(poly_len);
  p.delta_h(0) = 1.0;
  return p;
}

void AttackConfig::validate(int true_label, int classes) const {
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  if (iters < 0) throw std::invalid_argument("iters must be non-negative");
  if (beta1 < 0.0 || beta2 < 0.0 || chamfer_weight < 0.0 || hausdorff_weight < 0.0) {
    throw std::invalid_argument("loss weights must be non-negative");
  }
  if (!(lfc_fraction >= 0.0 && lfc_fraction <= 1.0)) throw std::invalid_argument("lfc_fraction must lie in [0, 1]");
  if (poly_len < 1) throw std::invalid_argument("poly_len must be at least 1");
  if (true_label < 0 || true_label >= classes) throw std::invalid_argument("true label out of range");
  if (mode == AttackMode::targeted) {
    if (target < 0 || target >= classes) throw std::invalid_argument("target label out of range");
    if (target == true_label) throw std::invalid_argument("targeted attack requires target != true label");
  }
}

AttackContext AttackContext::build(const Points& clean, const AttackConfig& cfg, Basis<double> basis) {
  AttackContext ctx;
  ctx.clean = clean;
  ctx.basis = basis ? std::move(basis) : graph_basis(clean, cfg.k);
  if (ctx.basis->size() != clean.rows()) throw std::invalid_argument("basis size does not match the cloud");
  ctx.clean_coeffs = ctx.basis->eigenvectors.transpose() * clean;
  ctx.row_norms = ctx.clean_coeffs.rowwise().norm();
  ctx.powers = vandermonde(ctx.basis->normalized_eigenvalues(), cfg.poly_len);
  ctx.lfc_bound = band_bound(clean.rows(), cfg.lfc_fraction);
  return ctx;
}

Points perturb(const AttackContext& ctx, const SpectralFilterParams& params) {
  const Vec g = params.response(ctx.powers);
  return ctx.basis->eigenvectors * (g.asDiagonal() * ctx.clean_coeffs);
}

Points perturb(const Points& clean, const Eigensystem<double>& eig, const SpectralFilterParams& params) {
  if (clean.rows() != eig.size() || params.delta_w.size() != eig.size()) throw std::invalid_argument("perturb: size mismatch");
  const Vec g = params.response(vandermonde(eig.normalized_eigenvalues(), params.poly_len()));
  return spectral_filter<double>(clean, eig, g);
}

double lfc_loss(const Points& adversarial, const Points& clean, const Eigensystem<double>& eig, Eigen::Index bound) {
  if (bound < 0 || bound > eig.size()) throw std::invalid_argument("lfc bound must lie in [0, n]");
  const auto lead = eig.eigenvectors.leftCols(bound);
  return (lead * (lead.transpose() * (clean - adversarial))).norm();
}

ClassLoss class_loss_for(const AttackConfig& cfg, int true_label) {
  return cfg.mode == AttackMode::targeted ? ClassLoss::toward(cfg.target) : ClassLoss::untargeted(true_label);
}

AdvLoss adv_loss(const Points& adversarial, const AttackContext& ctx, const AttackConfig& cfg,
                 const ToyClassifier& victim, int true_label) {
  AdvLoss out;
  auto cls = loss_grad_points(victim, adversarial, class_loss_for(cfg, true_label));
  out.classification = cls.loss;
  out.logits = std::move(cls.logits);
  out.grad = std::move(cls.grad);

  if (cfg.beta1 > 0.0) {
    const auto nn = bidirectional_neighbors(adversarial, ctx.clean);
    const auto ch = chamfer_with_grad(adversarial, ctx.clean, nn);
    const auto hd = hausdorff_with_grad(adversarial, ctx.clean, nn);
    out.regularization = cfg.chamfer_weight * ch.value + cfg.hausdorff_weight * hd.value;
    out.grad += cfg.beta1 * (cfg.chamfer_weight * ch.grad + cfg.hausdorff_weight * hd.grad);
  }
  if (cfg.beta2 > 0.0 && ctx.lfc_bound > 0) {
    const auto lead = ctx.basis->eigenvectors.leftCols(ctx.lfc_bound);
    const Points low_diff = lead * (lead.transpose() * (adversarial - ctx.clean));
    out.constraint = low_diff.norm();
    if (out.constraint > 0.0) out.grad += (cfg.beta2 / out.constraint) * low_diff;
  }
  out.total = out.classification + cfg.beta1 * out.regularization + cfg.beta2 * out.constraint;
  return out;
}

ParamGrad grad_params(const Points& grad_adversarial, const AttackContext& ctx, const SpectralFilterParams& params) {
  const PointsX<double> g_hat = ctx.basis->eigenvectors.transpose() * grad_adversarial;
  const Vec s = g_hat.cwiseProduct(ctx.clean_coeffs).rowwise().sum();
  ParamGrad out;
  out.delta_w = params.polynomial(ctx.powers).cwiseProduct(s);
  out.delta_h = ctx.powers.transpose() * params.delta_w.cwiseProduct(s);
  return out;
}

double spectral_budget_used(const AttackContext& ctx, const SpectralFilterParams& params) {
  const Vec g = params.response(ctx.powers);
  return (g.array() - 1.0).matrix().cwiseProduct(ctx.row_norms).norm();
}

SpectralFilterParams project_epsilon(const SpectralFilterParams& params, const AttackContext& ctx, double epsilon) {
  const double used = spectral_budget_used(ctx, params);
  if (used <= epsilon) return params;
  const double alpha = epsilon / used;
  const Vec poly = params.polynomial(ctx.powers);
  const Vec g = params.delta_w.cwiseProduct(poly);
  const Vec scaled = (1.0 + alpha * (g.array() - 1.0)).matrix();

  SpectralFilterParams out = params;
  if (poly.cwiseAbs().minCoeff() > 1e-12) {
    out.delta_w = scaled.cwiseQuotient(poly);
  } else {
    out = SpectralFilterParams::identity(ctx.size(), params.poly_len());
    out.delta_w = scaled;
  }
  return out;
}

bool attack_succeeded(const AttackConfig& cfg, int true_label, int predicted) {
  return cfg.mode == AttackMode::targeted ? predicted == cfg.target : predicted != true_label;
}

AttackResult run_attack(const Points& clean, int true_label, const AttackConfig& cfg, const ToyClassifier& victim,
                        Basis<double> basis) {
  cfg.validate(true_label, victim.classes());
  AttackResult result;
  result.beta1 = cfg.beta1;

  const int clean_pred = predict(victim, clean);
  if (attack_succeeded(cfg, true_label, clean_pred)) {
    result.adversarial = clean;
    result.success = true;
    result.predicted = clean_pred;
    return result;
  }

  const AttackContext ctx = AttackContext::build(clean, cfg, std::move(basis));
  SpectralFilterParams params = SpectralFilterParams::identity(ctx.size(), cfg.poly_len);
  Adam adam_w(ctx.size()), adam_h(cfg.poly_len);

  double best_norm = std::numeric_limits<double>::infinity();
  auto consider = [&](const Points& candidate, int predicted) {
    if (!attack_succeeded(cfg, true_label, predicted)) return;
    const double d = l2_distance(candidate, clean);
    if (d < best_norm) {
      best_norm = d;
      result.adversarial = candidate;
      result.predicted = predicted;
      result.success = true;
    }
  };

  for (int t = 0; t < cfg.iters; ++t) {
    const Points adv = perturb(ctx, params);
    const AdvLoss loss = adv_loss(adv, ctx, cfg, victim, true_label);
    Eigen::Index pred = 0;
    loss.logits.maxCoeff(&pred);
    consider(adv, static_cast<int>(pred));
    if (cfg.record_trace) {
      const double e_delta = (ctx.basis->eigenvectors.transpose() * adv - ctx.clean_coeffs).norm();
      result.trace.push_back({loss.total, e_delta});
    }

    const ParamGrad grad = grad_params(loss.grad, ctx, params);
    adam_w.step(params.delta_w, grad.delta_w, cfg, t + 1);
    adam_h.step(params.delta_h, grad.delta_h, cfg, t + 1);
    params = project_epsilon(params, ctx, cfg.epsilon);
    result.iterations_used = t + 1;
  }

  // With no iterations the parameters are still the identity filter.
  const Points last = cfg.iters == 0 ? clean : perturb(ctx, params);
  const int last_pred = predict(victim, last);
  consider(last, last_pred);
  if (!result.success) {
    result.adversarial = last;
    result.predicted = last_pred;
  }
  result.report = distortion_report(result.adversarial, clean, ctx.basis, cfg.k);
  return result;
}

AttackResult binary_search_beta(const Points& clean, int true_label, const AttackConfig& cfg,
                                const ToyClassifier& victim, Basis<double> basis) {
  if (cfg.binary_search_steps < 1) throw std::invalid_argument("binary_search_steps must be at least 1");
  cfg.validate(true_label, victim.classes());
  if (attack_succeeded(cfg, true_label, predict(victim, clean))) return run_attack(clean, true_label, cfg, victim);

  if (!basis) basis = graph_basis(clean, cfg.k);
  AttackConfig run_cfg = cfg;
  double lo = cfg.beta1_min, hi = cfg.beta1_max;
  bool upper_found = false;
  std::optional<AttackResult> best;
  AttackResult last;
  for (int step = 0; step < cfg.binary_search_steps; ++step) {
    last = run_attack(clean, true_label, run_cfg, victim, basis);
    if (last.success) {
      if (!best || last.report.d_norm < best->report.d_norm) best = last;
      lo = run_cfg.beta1;
      run_cfg.beta1 = upper_found ? 0.5 * (lo + hi) : std::min(2.0 * run_cfg.beta1, cfg.beta1_max);
    } else {
      hi = run_cfg.beta1;
      upper_found = true;
      run_cfg.beta1 = 0.5 * (lo + hi);
    }
  }
  return best ? *best : last;
}

}  // namespace gsda
