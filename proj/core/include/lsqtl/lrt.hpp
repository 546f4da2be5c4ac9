#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

#include "lsqtl/asymptotics.hpp"
#include "lsqtl/estimate.hpp"
#include "lsqtl/likelihood.hpp"

namespace lsqtl {

enum class TestKind { full, equal_scale, score_form };
std::string_view to_string(TestKind kind);

struct TestOutcome {
  double statistic = 0.0;
  TestKind kind = TestKind::full;
  double p_value_rep = 1.0;
  std::optional<double> p_value_davies;
  double theta_hat = 0.5;
  MixtureFit fit;
  MixtureFit null_fit;
  bool clamped = false;  // a slightly negative raw statistic was set to 0
};

/// {statistic, kind, p_value_rep, p_value_davies, theta_hat, mu1, mu2,
/// sigma1, sigma2, mu0, sigma0, converged}
std::string to_json(const TestOutcome& outcome);

struct TestOptions {
  bool davies = false;
};

/// 2 (full loglik - null loglik), p-value from a table of R.
TestOutcome lrt_full(const PhenotypeGroups& groups, const Kernel& kernel,
                     const IntervalConfig& interval, const FitConfig& cfg,
                     const NullDistTable& nulldist, TestOptions opts = {});

/// Same with the equal-scale fit and a table of R*.
TestOutcome lrt_equal_scale(const PhenotypeGroups& groups, const Kernel& kernel,
                            const IntervalConfig& interval, const FitConfig& cfg,
                            const NullDistTable& nulldist, TestOptions opts = {});

/// Both tests from one null fit and one shared pair of profiles, which
/// guarantees R_n >= R_n* on every dataset.
struct TestPair {
  TestOutcome full;
  TestOutcome equal_scale;
};
TestPair lrt_both(const PhenotypeGroups& groups, const Kernel& kernel,
                  const IntervalConfig& interval, const FitConfig& cfg,
                  const NullDistTable& full_table, const NullDistTable& star_table,
                  TestOptions opts = {});

/// Statistics only, no tables: {R_n, R_n*}.
struct Statistics {
  double full = 0.0;
  double equal_scale = 0.0;
  bool converged = true;
  AlternativeFits fits;
  MixtureFit null_fit;
};
Statistics lrt_statistics(const PhenotypeGroups& groups, const Kernel& kernel,
                          const FitConfig& cfg);

/// Per-group sums of (T, U) at residuals standardized by `null_params`.
struct ScoreVectors {
  std::array<std::array<double, 2>, 4> a{};

  // a1 - a4 + (2 theta - 1)(a2 - a3)
  std::array<double, 2> b(double theta) const;
};
ScoreVectors score_vectors(const PhenotypeGroups& groups, const Kernel& kernel,
                           const LocScale& null_params);

/// sup over the theta grid of b(theta)' {n tau(theta) A}^{-1} b(theta), with
/// scores at the fitted-null standardized residuals.
double score_form_statistic(const PhenotypeGroups& groups, const Kernel& kernel,
                            const IntervalConfig& interval, int theta_grid_size = 101);

}  // namespace lsqtl
