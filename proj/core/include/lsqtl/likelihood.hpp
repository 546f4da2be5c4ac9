#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "lsqtl/kernel.hpp"

namespace lsqtl {

/// Phenotypes split by flanking-marker genotype:
///   group 1 ~ f1, group 2 ~ theta f1 + (1-theta) f2,
///   group 3 ~ (1-theta) f1 + theta f2, group 4 ~ f2.
/// Groups 1 and 4 must be non-empty; groups 2 and 3 may be empty.
class PhenotypeGroups {
 public:
  PhenotypeGroups(std::vector<double> g1, std::vector<double> g2, std::vector<double> g3,
                  std::vector<double> g4);

  // index in 1..4
  std::span<const double> group(int index) const;
  std::size_t size(int index) const { return group(index).size(); }
  std::size_t n() const;

  // n1 >= 2 and n4 >= 2, required by the mixture fits.
  bool anchored() const { return size(1) >= 2 && size(4) >= 2; }

  std::vector<double> pooled() const;

  PhenotypeGroups with_middle_swapped() const;   // g2 <-> g3
  PhenotypeGroups with_labels_swapped() const;   // g1 <-> g4 and g2 <-> g3
  PhenotypeGroups affine(double scale, double shift) const;

 private:
  std::array<std::vector<double>, 4> g_;
};

/// Haldane map: recombination frequency for a distance in centiMorgans.
double haldane(double d_cm);

struct IntervalConfig {
  double r = 0.0;
  std::optional<double> d_cm;

  static IntervalConfig from_r(double r);
  static IntervalConfig from_distance(double d_cm);
};

struct MixtureParams {
  double theta = 0.5;
  LocScale comp1;
  LocScale comp2;
};

void require_valid(const MixtureParams& p);

/// Mixture log-likelihood of the four-group model.
double loglik(const PhenotypeGroups& groups, const Kernel& kernel, const MixtureParams& params);

/// Null log-likelihood: both components equal to `params`.
double null_loglik(const PhenotypeGroups& groups, const Kernel& kernel, const LocScale& params);

namespace detail {

// log(w1 exp(a) + w2 exp(b)) with zero weights handled exactly.
inline double log_mix(double log_w1, double a, double log_w2, double b) noexcept {
  const double x = log_w1 + a;
  const double y = log_w2 + b;
  const double hi = x > y ? x : y;
  if (hi == -std::numeric_limits<double>::infinity()) return hi;
  return hi + std::log1p(std::exp((x > y ? y : x) - hi));
}

// Sum of log f(y; p) over a sample.
double component_loglik(std::span<const double> y, const Kernel& kernel, const LocScale& p);

// Sum over a sample of log{w1 f(y;p1) + w2 f(y;p2)}. Weights are passed
// separately (not as w, 1-w) so that mirrored calls are bit-identical.
double mixture_loglik(std::span<const double> y, const Kernel& kernel, double w1,
                      const LocScale& p1, double w2, const LocScale& p2);

}  // namespace detail

}  // namespace lsqtl
