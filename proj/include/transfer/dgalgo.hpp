#pragma once

#include "transfer/nnet.hpp"

namespace transfer {

struct DomainMetrics {
  double loss = 0.0;
  double accuracy = 0.0;
};

struct AttackConfig {
  double radius = 1.0;
  OptimizerSpec ascent{OptimizerSpec::kAdam, 0.01, 0.9, 0.999, 1e-8, 1};
  int iterations = 100;
  // Ascent steps between re-selections of the (max, min) domain pair; the
  // evaluation listing re-selects every outer iteration.
  int steps_per_selection = 1;
};

struct AttackIterate {
  int iter = 0;
  int max_index = 0;
  int min_index = 0;
  double gap = 0.0;
  std::vector<DomainMetrics> domains;
};

// Adversarial transferability evaluation: best recorded loss gap between the
// worst and best domain over head perturbations inside the radius ball.
struct AttackResult {
  double best_gap = 0.0;
  int best_max_index = 0;
  int best_min_index = 0;
  std::vector<double> best_theta;
  std::vector<DomainMetrics> best_domains;
  std::vector<AttackIterate> trajectory;
  std::vector<double> reference_loss;      // per-domain CE at the trained head
  std::vector<double> reference_accuracy;
  double radius = 0.0;
};

// Domain 0 is the target; it participates in the max/min selection like any
// other domain. The head is perturbed with the featurizer frozen.
AttackResult attack_transferability(const MlpModel& model,
                                    std::span<const SampleSet> domains,
                                    const AttackConfig& cfg, std::uint64_t seed);

struct ErmResult {
  MlpModel model;
  std::vector<double> objective;  // mean source CE per step, pre-update
};

ErmResult erm_train(std::span<const SampleSet> sources,
                    const MlpArchitecture& arch, const OptimizerSpec& opt,
                    std::uint64_t seed);

struct TransferTrainConfig {
  double radius = 10.0;
  int inner_steps = 30;  // N
  double lambda_weight = 1.0;
  OptimizerSpec ascent{OptimizerSpec::kGradientAscent, 0.01, 0.9, 0.999, 1e-8, 1};
  OptimizerSpec descent{OptimizerSpec::kAdam, 0.01, 0.9, 0.999, 1e-8, 1};
  int epochs = 100;  // T
};

struct EpochRecord {
  int epoch = 0;
  double mean_loss = 0.0;  // at the epoch's start
  double max_loss = 0.0;
  double min_loss = 0.0;
  double gap_after_inner = 0.0;
  double objective = 0.0;  // mean + lambda * gap, after the inner loop
  std::vector<double> domain_loss;
  std::vector<double> domain_accuracy;
};

struct TrainResult {
  MlpModel model;
  std::vector<EpochRecord> epochs;
  // Final outer objective (mean source CE + adversarial gap, unweighted),
  // measured with a fresh inner ascent after the last descent step. A
  // gradient inner solver only lower-bounds the ball supremum, so this is an
  // empirical eta.
  double eta = 0.0;
};

TrainResult transfer_train(std::span<const SampleSet> sources,
                           const MlpArchitecture& arch,
                           const TransferTrainConfig& cfg, std::uint64_t seed);

struct GuaranteeConfig {
  int n_mixture_pairs = 50;
  int n_ball_samples = 20;
  int lipschitz_pairs = 32;
  double tolerance = 1e-9;
};

// Certificate for the optimization guarantee on the trained model: the
// mixture primitive |eps_T1(h') - eps_T2(h')| <= max_i - min_i holds to
// 1e-12, and the three consequences hold against the measured empirical eta
// and Lipschitz constants. eta and L_theta are sample maxima, i.e. honest
// lower bounds of the analytic quantities; the flag records that.
struct GuaranteeCertificate {
  double eta_train = 0.0;
  double eta_empirical = 0.0;
  bool eta_is_empirical_lower_bound = true;
  double l_loss = 0.0;
  double l_theta = 0.0;
  double radius = 0.0;
  double worst_realizable_slack = 0.0;
  double worst_source_slack = 0.0;
  double worst_target_slack = 0.0;
  double worst_mixture_primitive_slack = 0.0;
  int n_checks = 0;
  bool ok(double tol = 1e-9) const {
    return worst_realizable_slack >= -tol && worst_source_slack >= -tol &&
           worst_target_slack >= -tol &&
           worst_mixture_primitive_slack >= -1e-12;
  }
};

GuaranteeCertificate verify_optimization_guarantee(const TrainResult& result,
                                                   std::span<const SampleSet> sources,
                                                   double radius,
                                                   const GuaranteeConfig& cfg,
                                                   std::uint64_t seed);

}  // namespace transfer
