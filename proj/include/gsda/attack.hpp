#ifndef GSDA_ATTACK_HPP
#define GSDA_ATTACK_HPP

#include "gsda/metrics.hpp"
#include "gsda/spectral.hpp"
#include "gsda/victim.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace gsda {

/// Learnable spectral filter. The effective response at frequency i is
///   g_i = delta_w[i] * sum_l delta_h[l] * x_i^l,  x = lambda / lambda_max.
struct SpectralFilterParams {
  Vec delta_w;
  Vec delta_h;

  /// g = 1 everywhere: delta_w = 1, delta_h = (1, 0, ..., 0).
  static SpectralFilterParams identity(Eigen::Index n, int poly_len);

  int poly_len() const { return static_cast<int>(delta_h.size()); }
  Vec polynomial(const Mat& powers) const { return powers * delta_h; }
  Vec response(const Mat& powers) const { return delta_w.cwiseProduct(polynomial(powers)); }
};

enum class AttackMode { untargeted, targeted };

struct AttackConfig {
  AttackMode mode = AttackMode::untargeted;
  int target = -1;  // required for targeted mode
  double epsilon = 1.5;
  int iters = 500;
  double lr = 0.01;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  double beta1 = 10.0;  // weight of the data-domain regularizer
  double beta2 = 1.0;   // weight of the low-frequency constraint
  double chamfer_weight = 5.0;
  double hausdorff_weight = 0.5;
  double lfc_fraction = 400.0 / 1024.0;  // low band as a fraction of n
  int k = 10;
  int poly_len = 5;
  int binary_search_steps = 10;
  double beta1_min = 0.0;
  double beta1_max = 1e4;
  std::uint64_t seed = 0;
  bool record_trace = true;

  void validate(int true_label, int classes) const;
};

/// Everything derived from the clean cloud once and frozen for the attack.
struct AttackContext {
  Points clean;
  Basis<double> basis;
  PointsX<double> clean_coeffs;  // U^T P
  Vec row_norms;                 // |C_i|
  Mat powers;                    // n x L, x_i^l
  Eigen::Index lfc_bound = 0;

  static AttackContext build(const Points& clean, const AttackConfig& cfg, Basis<double> basis = nullptr);
  Eigen::Index size() const { return clean.rows(); }
};

/// P' = U diag(g) U^T P.
Points perturb(const AttackContext& ctx, const SpectralFilterParams& params);
Points perturb(const Points& clean, const Eigensystem<double>& eig, const SpectralFilterParams& params);

/// |U H_b U^T (P - P')|_F with H_b keeping the first `bound` frequencies.
double lfc_loss(const Points& adversarial, const Points& clean, const Eigensystem<double>& eig, Eigen::Index bound);

struct AdvLoss {
  double total = 0.0;
  double classification = 0.0;
  double regularization = 0.0;  // chamfer_weight * D_c + hausdorff_weight * D_h
  double constraint = 0.0;      // LFC
  Points grad;                  // d total / d P'
  Vec logits;
};

ClassLoss class_loss_for(const AttackConfig& cfg, int true_label);

/// L_class + beta1 * L_reg + beta2 * L_constrain and its gradient w.r.t. P'.
AdvLoss adv_loss(const Points& adversarial, const AttackContext& ctx, const AttackConfig& cfg,
                 const ToyClassifier& victim, int true_label);

struct ParamGrad {
  Vec delta_w;
  Vec delta_h;
};

/// Chain rule from dL/dP' to the filter parameters.
ParamGrad grad_params(const Points& grad_adversarial, const AttackContext& ctx, const SpectralFilterParams& params);

/// Spectral perturbation energy |diag(g - 1) C|_F implied by `params`.
double spectral_budget_used(const AttackContext& ctx, const SpectralFilterParams& params);

/// Shrinks g toward 1 so the perturbation energy is at most `epsilon`.
/// delta_h is kept and delta_w refit to the scaled response; if the
/// polynomial vanishes somewhere, the factorization is reset to
/// delta_h = (1, 0, ...), delta_w = g.
SpectralFilterParams project_epsilon(const SpectralFilterParams& params, const AttackContext& ctx, double epsilon);

struct TraceEntry {
  double loss = 0.0;
  double e_delta = 0.0;
};

struct AttackResult {
  Points adversarial;
  bool success = false;
  int predicted = -1;
  DistortionReport report;
  int iterations_used = 0;
  double beta1 = 0.0;  // regularizer weight of the run that produced this result
  std::vector<TraceEntry> trace;
};

bool attack_succeeded(const AttackConfig& cfg, int true_label, int predicted);

/// One optimization run: perturb, loss, parameter gradient, Adam descent,
/// epsilon projection. Keeps the successful iterate with the lowest D_norm.
/// `basis` may carry a precomputed eigensystem of the clean cloud.
AttackResult run_attack(const Points& clean, int true_label, const AttackConfig& cfg, const ToyClassifier& victim,
                        Basis<double> basis = nullptr);

/// Outer search on beta1 (cfg.binary_search_steps runs starting at cfg.beta1):
/// success raises beta1, failure lowers it. Returns the lowest-D_norm success
/// over all runs, or the last failed run.
AttackResult binary_search_beta(const Points& clean, int true_label, const AttackConfig& cfg,
                                const ToyClassifier& victim, Basis<double> basis = nullptr);

}  // namespace gsda

#endif  // GSDA_ATTACK_HPP
