#pragma once

#include "transfer/hypotheses.hpp"

namespace transfer {

struct MlpArchitecture {
  int input_dim = 2;
  std::vector<int> hidden = {64, 64};
  int feature_dim = 16;
  int num_labels = 2;
  double clamp = 1e-6;
};

// Featurizer g (dense + rectifier stack) with an affine probability head
// h = q(theta, .). Forward outputs are softmax probabilities clamped into
// [clamp, 1 - clamp]; the flat parameter views round-trip losslessly.
class MlpModel {
 public:
  MlpModel(MlpArchitecture arch, std::uint64_t seed);

  const MlpArchitecture& arch() const { return arch_; }
  int feature_dim() const { return arch_.feature_dim; }
  int num_labels() const { return arch_.num_labels; }

  std::size_t head_param_count() const;
  std::size_t featurizer_param_count() const;
  std::vector<double> head_params() const;
  std::vector<double> featurizer_params() const;
  void set_head_params(std::span<const double> theta);
  void set_featurizer_params(std::span<const double> theta_g);

  void features(std::span<const double> x, std::span<double> out) const;
  void forward(std::span<const double> x, std::span<double> probs) const;
  // Probabilities from a cached feature vector.
  void head_forward(std::span<const double> feature, std::span<double> probs) const;
  int predict(std::span<const double> x) const;

 private:
  friend std::pair<double, std::vector<double>> loss_and_grad(
      const MlpModel&, const SampleSet&, const LossKind&, bool);
  friend double head_ce_risk_and_grad(const MlpModel&, const std::vector<double>&,
                                      const std::vector<int>&,
                                      std::span<double>, double);
  friend std::vector<double> featurizer_grad_for_head(const MlpModel&,
                                                      std::span<const double>,
                                                      const SampleSet&);

  struct Dense {
    int in = 0, out = 0;
    std::vector<double> w;  // row-major out x in
    std::vector<double> b;
  };

  MlpArchitecture arch_;
  std::vector<Dense> featurizer_;
  Dense head_;
};

// Empirical risk of the model on a sample set (0-1 via argmax, or clamped
// base-2 CE).
double model_risk(const MlpModel& model, const SampleSet& sample,
                  const LossKind& loss);
inline double model_accuracy(const MlpModel& model, const SampleSet& sample) {
  return 1.0 - model_risk(model, sample, LossKind::zero_one());
}

// Cached features (row-major m x feature_dim) for head-only phases.
std::vector<double> compute_features(const MlpModel& model, const SampleSet& sample);
double head_risk(const MlpModel& model, const std::vector<double>& features,
                 const std::vector<int>& ys, const LossKind& loss);

// Mean CE loss and its flat gradient; layout is [head | featurizer] when
// include_featurizer is set. The 0-1 loss has no gradient and is rejected.
std::pair<double, std::vector<double>> loss_and_grad(const MlpModel& model,
                                                     const SampleSet& sample,
                                                     const LossKind& loss,
                                                     bool include_featurizer);

// Adds weight * grad(mean CE over the cached-feature batch) w.r.t. the head
// parameters into grad_accum; returns the mean CE.
double head_ce_risk_and_grad(const MlpModel& model,
                             const std::vector<double>& features,
                             const std::vector<int>& ys,
                             std::span<double> grad_accum, double weight);

// Featurizer gradient of the mean CE when the head is evaluated at
// `head_theta` instead of the model's own head parameters.
std::vector<double> featurizer_grad_for_head(const MlpModel& model,
                                             std::span<const double> head_theta,
                                             const SampleSet& sample);

struct BallConstraint {
  std::vector<double> center;
  double radius = 0.0;
};

std::vector<double> project_to_ball(std::span<const double> theta,
                                    const BallConstraint& ball);

struct OptimizerSpec {
  enum Kind { kGradientAscent, kGradientDescent, kAdam };
  Kind kind = kGradientDescent;
  double lr = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  int steps = 100;
};

class Optimizer {
 public:
  Optimizer(const OptimizerSpec& spec, std::size_t dim, bool maximize);
  void step(std::span<double> params, std::span<const double> grad);

 private:
  OptimizerSpec spec_;
  double direction_;
  std::vector<double> m_, v_;
  long t_ = 0;
};

// Max over sampled head-parameter pairs of ||h - h'||_{1,mu} / ||theta -
// theta'||; a lower estimate of the parametrization Lipschitz constant.
double param_lipschitz_probe(const MlpModel& model, const SampleSet& mu,
                             int n_pairs, std::uint64_t seed,
                             double perturbation_scale = 0.5);

// Mean over mu of ||p(x; theta_a) - p(x; theta_b)||_2 (the L1 function norm
// of the head output distance).
double head_function_l1_distance(const MlpModel& model,
                                 std::span<const double> theta_a,
                                 std::span<const double> theta_b,
                                 const SampleSet& mu);

// Functional probes for the clamped base-2 CE: Lipschitz constant
// 1/(ln2 * clamp) and strong convexity 1/(4 ln2) (binary, +-1 output scale)
// or 1/ln2 (multiclass, true-class coordinate).
struct CeProbeReport {
  int n_pairs = 0;
  double lipschitz_constant = 0.0;
  double lambda = 0.0;
  double worst_lipschitz_slack = 0.0;   // min over pairs of rhs - lhs
  double worst_convexity_slack = 0.0;   // min over pairs/alphas of rhs - lhs
  bool ok(double tol = 1e-9) const {
    return worst_lipschitz_slack >= -tol && worst_convexity_slack >= -tol;
  }
};
CeProbeReport ce_functional_probes(const SampleSet& mu, double clamp,
                                   int n_pairs, std::uint64_t seed);

}  // namespace transfer
