#include "lsqtl/likelihood.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "lsqtl/error.hpp"

namespace lsqtl {

PhenotypeGroups::PhenotypeGroups(std::vector<double> g1, std::vector<double> g2,
                                 std::vector<double> g3, std::vector<double> g4)
    : g_{std::move(g1), std::move(g2), std::move(g3), std::move(g4)} {
  if (g_[0].empty() || g_[3].empty()) {
    throw InvalidInput("groups 1 and 4 must be non-empty (n1=" + std::to_string(g_[0].size()) +
                       ", n4=" + std::to_string(g_[3].size()) + ")");
  }
  for (const auto& g : g_) {
    for (double y : g) {
      if (!std::isfinite(y)) throw InvalidInput("phenotype values must be finite");
    }
  }
}

std::span<const double> PhenotypeGroups::group(int index) const {
  if (index < 1 || index > 4) throw InvalidInput("group index must be in 1..4");
  return g_[static_cast<std::size_t>(index - 1)];
}

std::size_t PhenotypeGroups::n() const {
  return g_[0].size() + g_[1].size() + g_[2].size() + g_[3].size();
}

std::vector<double> PhenotypeGroups::pooled() const {
  std::vector<double> all;
  all.reserve(n());
  for (const auto& g : g_) all.insert(all.end(), g.begin(), g.end());
  return all;
}

PhenotypeGroups PhenotypeGroups::with_middle_swapped() const {
  return {g_[0], g_[2], g_[1], g_[3]};
}

PhenotypeGroups PhenotypeGroups::with_labels_swapped() const {
  return {g_[3], g_[2], g_[1], g_[0]};
}

PhenotypeGroups PhenotypeGroups::affine(double scale, double shift) const {
  if (!(scale > 0.0)) throw DomainError("affine scale must be positive");
  auto map = [&](const std::vector<double>& g) {
    std::vector<double> out(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) out[i] = scale * g[i] + shift;
    return out;
  };
  return {map(g_[0]), map(g_[1]), map(g_[2]), map(g_[3])};
}

double haldane(double d_cm) {
  if (!(d_cm > 0.0) || !std::isfinite(d_cm)) {
    throw DomainError("inter-marker distance must be positive (got " + std::to_string(d_cm) + ")");
  }
  return 0.5 * -std::expm1(-2.0 * d_cm / 100.0);
}

IntervalConfig IntervalConfig::from_r(double r) {
  if (!(r > 0.0 && r <= 1.0)) {
    throw DomainError("recombination frequency must lie in (0, 1] (got " + std::to_string(r) + ")");
  }
  return {r, std::nullopt};
}

IntervalConfig IntervalConfig::from_distance(double d_cm) { return {haldane(d_cm), d_cm}; }

void require_valid(const MixtureParams& p) {
  if (!(p.theta >= 0.0 && p.theta <= 1.0)) {
    throw DomainError("theta must lie in [0, 1] (got " + std::to_string(p.theta) + ")");
  }
  require_valid(p.comp1);
  require_valid(p.comp2);
}

namespace detail {

double component_loglik(std::span<const double> y, const Kernel& kernel, const LocScale& p) {
  const double log_sigma = std::log(p.sigma);
  double sum = 0.0;
  for (double v : y) sum += kernel.log_pdf_std((v - p.mu) / p.sigma);
  return sum - static_cast<double>(y.size()) * log_sigma;
}

double mixture_loglik(std::span<const double> y, const Kernel& kernel, double w1,
                      const LocScale& p1, double w2, const LocScale& p2) {
  // Identical components collapse the mixture whatever the weights.
  if (w2 == 0.0 || (p1.mu == p2.mu && p1.sigma == p2.sigma)) {
    return component_loglik(y, kernel, p1);
  }
  if (w1 == 0.0) return component_loglik(y, kernel, p2);
  const double lw1 = std::log(w1) - std::log(p1.sigma);
  const double lw2 = std::log(w2) - std::log(p2.sigma);
  double sum = 0.0;
  for (double v : y) {
    sum += log_mix(lw1, kernel.log_pdf_std((v - p1.mu) / p1.sigma), lw2,
                   kernel.log_pdf_std((v - p2.mu) / p2.sigma));
  }
  return sum;
}

}  // namespace detail

double loglik(const PhenotypeGroups& groups, const Kernel& kernel, const MixtureParams& params) {
  require_valid(params);
  const double theta = params.theta;
  const double l1 = detail::component_loglik(groups.group(1), kernel, params.comp1);
  const double l4 = detail::component_loglik(groups.group(4), kernel, params.comp2);
  const double l2 = detail::mixture_loglik(groups.group(2), kernel, theta, params.comp1,
                                           1.0 - theta, params.comp2);
  const double l3 = detail::mixture_loglik(groups.group(3), kernel, 1.0 - theta, params.comp1,
                                           theta, params.comp2);
  return (l1 + l4) + (l2 + l3);
}

double null_loglik(const PhenotypeGroups& groups, const Kernel& kernel, const LocScale& params) {
  require_valid(params);
  double parts[4];
  for (int i = 1; i <= 4; ++i) {
    parts[i - 1] = detail::component_loglik(groups.group(i), kernel, params);
  }
  return (parts[0] + parts[3]) + (parts[1] + parts[2]);
}

}  // namespace lsqtl
