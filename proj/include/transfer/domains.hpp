#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "transfer/common.hpp"

namespace transfer {

enum class JointVariant { kDiscreteCells, kPiecewiseUniform1D };

// One (region, label, mass) entry of an analytic joint. For the
// piecewise-uniform variant the region is the interval [lo, hi); for the
// discrete variant it is the atom index.
struct Cell {
  double lo = 0.0;
  double hi = 0.0;
  int atom = 0;
  int label = 0;
  double mass = 0.0;
};

// An analytic joint distribution over inputs x labels. Immutable after
// construction; masses are validated to be nonnegative and to sum to 1
// within 1e-12, and intervals of one label must be pairwise disjoint.
class LabeledJoint {
 public:
  static LabeledJoint piecewise_uniform(int num_labels, std::vector<Cell> cells);
  static LabeledJoint discrete(int num_labels, std::vector<Cell> cells);

  JointVariant variant() const { return variant_; }
  int num_labels() const { return num_labels_; }
  const std::vector<Cell>& cells() const { return cells_; }

  // P(y) for y in [0, K).
  std::vector<double> label_marginal() const;
  // Sorted unique interval endpoints (piecewise-uniform variant only).
  std::vector<double> breakpoints() const;
  // Sorted unique atom ids (discrete variant only).
  std::vector<int> atoms() const;

 private:
  LabeledJoint(JointVariant variant, int num_labels, std::vector<Cell> cells);

  JointVariant variant_;
  int num_labels_;
  std::vector<Cell> cells_;
};

struct MixtureSpec {
  std::vector<double> weights;
};

// Finite i.i.d. draws from one domain. xs is row-major m x dim.
struct SampleSet {
  int domain_id = 0;
  std::uint64_t seed = 0;
  int dim = 1;
  int num_labels = 2;
  std::vector<double> xs;
  std::vector<int> ys;

  std::size_t size() const { return ys.size(); }
  std::span<const double> x(std::size_t i) const {
    return {xs.data() + i * static_cast<std::size_t>(dim),
            static_cast<std::size_t>(dim)};
  }
  void validate() const;
};

// The two-interval pair of Example 1 / Fig. 2; intensity 0.1 reproduces the
// figure. Label 1 stands for +1 and label 0 for -1.
std::pair<LabeledJoint, LabeledJoint> example1_pair(double intensity);

LabeledJoint mixture(std::span<const LabeledJoint> domains,
                     const MixtureSpec& spec);

SampleSet sample(const LabeledJoint& domain, std::size_t m, std::uint64_t seed,
                 int domain_id = 0);

struct RotatedGaussianConfig {
  double sigma = 0.3;
  int num_labels = 2;
  double mean_radius = 1.0;
};

// Synthetic multi-domain suite: per domain, a K-class mixture of isotropic 2D
// Gaussians whose class means sit on a circle rotated by the domain's angle.
// Domain 0 is the designated target. This benchmark is our own desk-scale
// construction (there is no canonical published analog at this scale).
std::vector<SampleSet> rotated_gaussian_suite(std::span<const double> angles,
                                              std::size_t n_per,
                                              std::uint64_t seed,
                                              const RotatedGaussianConfig& cfg = {});

// Half total variation between marginal label distributions, in [0, 1].
double label_marginal_tv(const LabeledJoint& a, const LabeledJoint& b);
double label_marginal_tv(const SampleSet& a, const SampleSet& b);

// Common refinement of two joints: elementary regions on which both domains
// have constant density (or atoms), with per-(region, label) masses.
struct RefinedPair {
  JointVariant variant = JointVariant::kPiecewiseUniform1D;
  int num_labels = 2;
  // Piecewise-uniform: region r is [breaks[r], breaks[r+1]); discrete:
  // region r is atoms[r].
  std::vector<double> breaks;
  std::vector<int> atoms;
  // mass_a[r * K + y], mass_b[r * K + y].
  std::vector<double> mass_a, mass_b;

  std::size_t num_regions() const {
    return variant == JointVariant::kDiscreteCells ? atoms.size()
                                                   : breaks.empty() ? 0 : breaks.size() - 1;
  }
  double mass(bool first, std::size_t region, int label) const {
    const auto& m = first ? mass_a : mass_b;
    return m[region * static_cast<std::size_t>(num_labels) + label];
  }
};

RefinedPair refine_pair(const LabeledJoint& a, const LabeledJoint& b);

// Fuzz-suite generators (deterministic in the supplied RNG).
LabeledJoint random_discrete_joint(int num_atoms, int num_labels, Rng& rng);
LabeledJoint random_piecewise_joint(int max_cells, int num_labels, Rng& rng);

}  // namespace transfer
