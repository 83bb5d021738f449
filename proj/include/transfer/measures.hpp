#pragma once

#include <optional>

#include "transfer/hypotheses.hpp"

namespace transfer {

struct SupWitness {
  double value = 0.0;
  std::size_t index = 0;
  std::string descriptor;
};

// The three transfer measures over an enumerated Gamma, with the optimal
// errors and a witness per sup. t_symmetric == max of the two one-sided
// values and never exceeds twice t_realizable (checked on every call).
struct TransferReport {
  double t_one_sided_st = 0.0;  // T(S || T)
  double t_one_sided_ts = 0.0;  // T(T || S)
  double t_symmetric = 0.0;
  double t_realizable = 0.0;
  double eps_star_s = 0.0;
  double eps_star_t = 0.0;
  SupWitness witness_st, witness_ts, witness_realizable;
  std::string gamma;
  LossKind loss;
};

// Shared core over precomputed per-classifier risks (also used by the
// estimation checks, which must reuse one enumeration for all four sups).
TransferReport measures_from_risks(const std::vector<double>& risks_s,
                                   const std::vector<double>& risks_t,
                                   const GammaEnumeration& gamma,
                                   const LossKind& loss);

TransferReport transfer_measures(const LabeledJoint& s, const LabeledJoint& t,
                                 const HypothesisSpec& gamma, const LossKind& loss);
TransferReport transfer_measures(const SampleSet& s, const SampleSet& t,
                                 const HypothesisSpec& gamma, const LossKind& loss);

// Sum_y integral |p_S - p_T| dx over the common refinement; range [0, 2].
double tv_unnormalized(const LabeledJoint& s, const LabeledJoint& t);
// Halved convention, range [0, 1].
inline double tv_half(const LabeledJoint& s, const LabeledJoint& t) {
  return 0.5 * tv_unnormalized(s, t);
}

// The extremal cell-wise classifiers (with abstention) of the TV-equivalence
// proof: h_plus maximizes eps_S - eps_T, h_minus maximizes eps_T - eps_S over
// all cell-wise assignments on the common refinement. Binary labels only.
struct ExtremalResult {
  CellwiseClassifier h_plus;
  CellwiseClassifier h_minus;
  double gap_plus = 0.0;
  double gap_minus = 0.0;
  double realizable_all() const { return std::max(gap_plus, gap_minus); }
};
ExtremalResult extremal_classifiers(const LabeledJoint& s, const LabeledJoint& t);

// T^r over all cell-wise classifiers <= d_TV <= 4 T^r.
struct SandwichResult {
  double t_realizable_all = 0.0;
  double tv = 0.0;
  double slack_lower = 0.0;  // tv - T^r
  double slack_upper = 0.0;  // 4 T^r - tv
  bool lhs_ok = false;
  bool rhs_ok = false;
};
SandwichResult check_tv_sandwich(const LabeledJoint& s, const LabeledJoint& t,
                                 double tol = 1e-9);

// Certified chain eps_T(h) <= eps_S(h) + eps*_T - eps*_S + T(S||T)
//                        <= eps_S(h) + eps*_T - eps*_S + T(S,T).
struct BoundCertificate {
  double eps_t_h = 0.0;
  double eps_s_h = 0.0;
  double eps_star_s = 0.0;
  double eps_star_t = 0.0;
  double t_one_sided = 0.0;
  double t_symmetric = 0.0;
  double rhs_one_sided = 0.0;
  double rhs_symmetric = 0.0;
  double slack_one_sided = 0.0;  // rhs_one_sided - eps_t_h
  double slack_symmetric = 0.0;  // rhs_symmetric - rhs_one_sided
  bool ok(double tol = 1e-9) const {
    return slack_one_sided >= -tol && slack_symmetric >= -tol;
  }
};
BoundCertificate target_bound(const LabeledJoint& s, const LabeledJoint& t,
                              const HypothesisSpec& gamma, const Classifier& h,
                              const LossKind& loss);

// delta_T_min = sup over the delta_S-minimal set of the target excess risk
// (target optimum taken over the full family). containment_ok re-verifies the
// minimal-set inclusion; gamma_covers_target_optimum reports whether the
// minimal set already contains a target-optimal classifier (the side
// condition under which the equivalence result applies).
struct CertificateResult {
  double delta_t_min = 0.0;
  bool containment_ok = false;
  bool gamma_covers_target_optimum = false;
  double eps_star_s = 0.0;
  double eps_star_t = 0.0;
  SupWitness witness;
};
CertificateResult transferability_certificate(const LabeledJoint& s,
                                              const LabeledJoint& t,
                                              const HypothesisSpec& hypothesis_space,
                                              double delta_s, const LossKind& loss);

// 2 sup over threshold pairs of |P_S[h != h'] - P_T[h != h']| on the input
// marginals, exact over the kink grid. Piecewise-uniform 1D joints only.
double hdh_divergence_1d(const LabeledJoint& s, const LabeledJoint& t,
                         double rho_lo = -1.0, double rho_hi = 1.0);

// Pseudo-metric axioms for T^r plus the one-sided triangle inequality over
// every ordered triple of domains.
struct PseudoMetricReport {
  std::size_t n = 0;
  std::vector<double> realizable;  // n x n, row-major
  std::vector<double> one_sided;   // n x n
  double max_self_distance = 0.0;
  double max_asymmetry = 0.0;
  double worst_triangle_slack = 0.0;   // min over triples of T(S,P)+T(P,T)-T(S,T)
  double worst_one_sided_slack = 0.0;  // same for the one-sided analog
  bool ok(double tol = 1e-9) const {
    return max_self_distance <= tol && max_asymmetry <= tol &&
           worst_triangle_slack >= -tol && worst_one_sided_slack >= -tol;
  }
};
PseudoMetricReport pseudo_metric_suite(std::span<const LabeledJoint> domains,
                                       const HypothesisSpec& gamma,
                                       const LossKind& loss);

// Independent route for T^r as an integral probability metric: per
// classifier, accumulate the signed indicator-weighted mass differences on
// the refined cells and take the sup of absolute values.
double realizable_measure_ipm_route(const LabeledJoint& s, const LabeledJoint& t,
                                    const HypothesisSpec& gamma);

}  // namespace transfer
