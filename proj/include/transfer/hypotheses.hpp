#pragma once

#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "transfer/domains.hpp"

namespace transfer {

// A classifier may abstain ("garbage value"); an abstain costs 1 under the
// 0-1 loss on every label and is rejected by the cross-entropy loss.
constexpr int kAbstain = -1;

struct LossKind {
  enum Kind { kZeroOne, kCrossEntropy };
  Kind kind = kZeroOne;
  double clamp = 1e-6;  // CE output clamp delta_c in (0, 0.5)

  static LossKind zero_one() { return {kZeroOne, 1e-6}; }
  static LossKind cross_entropy(double clamp = 1e-6) {
    require(clamp > 0.0 && clamp < 0.5, "CE clamp must lie in (0, 0.5)");
    return {kCrossEntropy, clamp};
  }
  std::string describe() const;
};

// Loss of predicting `pred` (label index or kAbstain) when the truth is `y`.
double point_loss(int pred, int y, const LossKind& loss);

// A constant-prediction piece covering a fraction of a 1D interval.
struct PredictionPiece {
  double fraction = 0.0;
  int label = 0;
};

class Classifier {
 public:
  virtual ~Classifier() = default;
  virtual int predict(std::span<const double> x) const = 0;
  // Partition of [lo, hi) into constant-prediction fractions; used for exact
  // integration against piecewise-uniform joints.
  virtual std::vector<PredictionPiece> prediction_pieces(double lo,
                                                         double hi) const = 0;
  virtual std::string describe() const = 0;
};

// h_rho: predicts label 1 (the paper's +1) on x < rho, label 0 (the paper's
// -1) on x >= rho.
class ThresholdClassifier final : public Classifier {
 public:
  explicit ThresholdClassifier(double rho) : rho_(rho) {}
  double rho() const { return rho_; }
  int predict(std::span<const double> x) const override {
    return x[0] < rho_ ? 1 : 0;
  }
  std::vector<PredictionPiece> prediction_pieces(double lo,
                                                 double hi) const override;
  std::string describe() const override;

 private:
  double rho_;
};

// Cell-wise label assignment over a fixed 1D partition (or atom set), with
// optional abstentions.
class CellwiseClassifier final : public Classifier {
 public:
  // 1D form: region r is [breaks[r], breaks[r+1]); assignments.size() + 1 ==
  // breaks.size(). Points outside are clamped into the edge regions.
  static CellwiseClassifier piecewise(std::vector<double> breaks,
                                      std::vector<int> assignments);
  // Discrete form over sorted atoms.
  static CellwiseClassifier atoms(std::vector<int> atoms,
                                  std::vector<int> assignments);

  int predict(std::span<const double> x) const override;
  std::vector<PredictionPiece> prediction_pieces(double lo,
                                                 double hi) const override;
  std::string describe() const override;
  const std::vector<int>& assignments() const { return assignments_; }

 private:
  bool discrete_ = false;
  std::vector<double> breaks_;
  std::vector<int> atoms_;
  std::vector<int> assignments_;
};

// Exact risk on an analytic joint (closed-form integration per cell) and the
// empirical mean risk on a sample set.
double risk(const Classifier& h, const LabeledJoint& domain, const LossKind& loss);
double risk(const Classifier& h, const SampleSet& sample, const LossKind& loss);

struct ThresholdGrid {
  double lo = -1.0;
  double hi = 1.0;
  int n = 4001;
};

struct ParamBall {
  std::vector<double> center;
  double radius = 0.0;
};

struct ExplicitList {
  std::vector<std::shared_ptr<const Classifier>> items;
};

struct HypothesisSpec {
  std::variant<ThresholdGrid, ParamBall, ExplicitList> shape;

  static HypothesisSpec grid(double lo, double hi, int n = 4001);
  static HypothesisSpec ball(std::vector<double> center, double radius);
  static HypothesisSpec list(std::vector<std::shared_ptr<const Classifier>> items);
  bool enumerable() const;
  std::string describe() const;
};

// Finite enumeration of a hypothesis spec. For threshold grids the candidate
// set is the uniform grid joined with the supplied kinks (cell boundaries)
// and the midpoints of consecutive candidates, which makes finite sups exact
// on piecewise-uniform joints and piecewise-constant empirical risks.
struct GammaEnumeration {
  std::vector<double> rhos;
  std::vector<std::shared_ptr<const Classifier>> items;

  bool thresholds() const { return items.empty(); }
  std::size_t size() const { return thresholds() ? rhos.size() : items.size(); }
  std::string describe(std::size_t i) const;
};

GammaEnumeration enumerate_gamma(const HypothesisSpec& spec,
                                 std::span<const double> kinks = {});

// Sorted unique threshold kink positions contributed by a domain.
std::vector<double> domain_kinks(const LabeledJoint& domain);

// Risks of every enumerated classifier on one domain.
std::vector<double> enumeration_risks(const GammaEnumeration& gamma,
                                      const LabeledJoint& domain,
                                      const LossKind& loss);
std::vector<double> enumeration_risks(const GammaEnumeration& gamma,
                                      const SampleSet& sample,
                                      const LossKind& loss);

struct MinimalSet {
  std::string base_spec;
  LossKind loss;
  double delta = 0.0;
  double eps_star = 0.0;
  GammaEnumeration enumeration;
  std::vector<std::size_t> members;  // indices into the enumeration
};

// All enumerated classifiers within delta of the enumerated minimum risk.
MinimalSet delta_minimal_set(const HypothesisSpec& spec, const LabeledJoint& domain,
                             const LossKind& loss, double delta);
MinimalSet delta_minimal_set(const HypothesisSpec& spec, const SampleSet& sample,
                             const LossKind& loss, double delta);

// Whether the clamped base-2 CE risk dominates the 0-1 risk for h on D
// (analytically always true; computed from both risks).
bool surrogate_dominates_zero_one(const Classifier& h, const LabeledJoint& domain,
                                  double clamp = 1e-6);
bool surrogate_dominates_zero_one(const Classifier& h, const SampleSet& sample,
                                  double clamp = 1e-6);

}  // namespace transfer
