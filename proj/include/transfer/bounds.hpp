#pragma once

#include <optional>

#include "transfer/measures.hpp"

namespace transfer {

struct RademacherEstimate {
  double estimate = 0.0;
  double std_err = 0.0;
  int n_draws = 0;
};

// Monte Carlo estimate of the empirical Rademacher complexity of the 0-1
// loss class F_Gamma = {(x, y) -> 1(h(x) != y)} on one sample set.
RademacherEstimate empirical_rademacher(const HypothesisSpec& gamma,
                                        const SampleSet& sample,
                                        int n_sign_draws, std::uint64_t seed);

// Same for the raw +-1 classifier outputs (binary families); satisfies
// 2 R_m(F_Gamma) = R_m(Gamma) in expectation.
RademacherEstimate empirical_rademacher_signs(const HypothesisSpec& gamma,
                                              const SampleSet& sample,
                                              int n_sign_draws, std::uint64_t seed);

struct BoundInputs {
  std::size_t m = 0;
  std::size_t k = 0;
  double confidence = 0.05;  // the bound's delta
  std::optional<int> d_vc;
  std::optional<int> d_nat;
  int num_labels = 2;
  double natarajan_const = 1.0;  // the unspecified absolute constant C
  double r_m = 0.0, r_k = 0.0;   // Rademacher estimates
  double r_m_std_err = 0.0, r_k_std_err = 0.0;
};

// Additive estimation slack (everything after the empirical measure) for the
// three measure variants; the realizable variant has half of every
// coefficient. Natural logarithms throughout.
struct BoundSlacks {
  double one_sided = 0.0;
  double symmetric = 0.0;
  double realizable = 0.0;
};

BoundSlacks rademacher_bound_value(const BoundInputs& inputs);

// sqrt((2d/m) log(em/d)) for m >= d, otherwise the log-sum-of-binomials form.
double vc_bound_value(int d, std::size_t m);

// C sqrt((d log K + log(1/delta)) / m).
double natarajan_bound_value(int d, int num_labels, std::size_t m,
                             double confidence, double c);

// Assembled two-domain Natarajan slacks; each per-domain term carries
// log(2/delta).
BoundSlacks natarajan_two_domain_slacks(int d, int num_labels, std::size_t m,
                                        std::size_t k, double confidence, double c);

// Draw samples of size m from both analytic domains and verify the
// estimation-reduction inequality (one-sided, symmetric, realizable) over a
// single shared enumeration of Gamma.
struct EstimationCheck {
  std::size_t m = 0;
  double t_true_one_sided = 0.0;
  double t_hat_one_sided = 0.0;
  double est_s = 0.0;
  double est_t = 0.0;
  double slack_one_sided = 0.0;   // rhs - lhs, must be >= 0
  double slack_symmetric = 0.0;
  double slack_realizable = 0.0;
  bool ok(double tol = 1e-9) const {
    return slack_one_sided >= -tol && slack_symmetric >= -tol &&
           slack_realizable >= -tol;
  }
};

std::vector<EstimationCheck> estimation_reduction_check(
    const LabeledJoint& s, const LabeledJoint& t, const HypothesisSpec& gamma,
    std::span<const std::size_t> m_values, std::uint64_t seed);

// Coverage experiment for the high-probability bound: fraction of trials in
// which T(S||T) <= T(S_hat||T_hat) + slack with per-trial Rademacher
// estimates plugged in.
double coverage_experiment(const LabeledJoint& s, const LabeledJoint& t,
                           const HypothesisSpec& gamma, std::size_t m,
                           std::size_t k, int n_trials, double confidence,
                           int n_sign_draws, std::uint64_t seed);

}  // namespace transfer
