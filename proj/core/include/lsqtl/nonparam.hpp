#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "lsqtl/likelihood.hpp"
#include "lsqtl/parallel.hpp"
#include "lsqtl/rng.hpp"

namespace lsqtl {

enum class NonparamTest { ks, ad };
std::string_view to_string(NonparamTest test);

struct NonparamResult {
  double statistic = 0.0;
  NonparamTest test = NonparamTest::ks;
  std::optional<double> critical_value;
  std::optional<bool> reject;
};

using SampleList = std::vector<std::span<const double>>;

// The four phenotype groups as a sample list (empty groups included).
SampleList as_samples(const PhenotypeGroups& groups);

/// k-sample Kolmogorov-Smirnov (Kiefer):
/// sup_y sum_i n_i (F_i(y) - F(y))^2 over the pooled order statistics.
/// Empty samples are dropped; fewer than two remaining is an error.
double ks_ksample(const SampleList& samples);
double ks_ksample(const PhenotypeGroups& groups);

/// Unstandardized k-sample Anderson-Darling statistic. Without ties this is
/// the continuous-data A2_kN; with ties the midrank A2_akN.
struct AdRaw {
  double a2 = 0.0;
  bool midrank = false;
  int k = 0;          // samples kept
  std::size_t n = 0;  // pooled size
};
AdRaw ad_ksample_raw(const SampleList& samples);

/// Standardized statistic (A2 - (k - 1)) / sigma_N; needs a pooled size of
/// at least 4.
double ad_ksample(const SampleList& samples);
double ad_ksample(const PhenotypeGroups& groups);

/// Variance of A2_kN under the null for the given sample sizes.
double ad_variance(std::span<const std::size_t> sizes);

/// Asymptotic critical value of the standardized statistic for k samples,
/// interpolated in log(alpha) over the tabulated levels 0.25 ... 0.001.
double ad_asymptotic_critical(int k, double alpha);

using NullSampler = std::function<PhenotypeGroups(StreamRng&)>;
using StatisticFn = std::function<double(const PhenotypeGroups&)>;

/// Sorted statistic values over n_reps null datasets; replicate i draws
/// from stream (seed, i).
std::vector<double> mc_null_statistics(const StatisticFn& test_fn, const NullSampler& sampler,
                                       std::size_t n_reps, std::uint64_t seed,
                                       unsigned workers = default_workers());

/// Empirical (1 - alpha) quantile of the statistic over n_reps >= 1000 null
/// datasets.
double mc_calibrate(const StatisticFn& test_fn, const NullSampler& sampler, std::size_t n_reps,
                    double alpha, std::uint64_t seed, unsigned workers = default_workers());

/// Null samples of (KS, AD) for fixed group sizes. Both statistics are rank
/// based, so uniform data give their exact permutation-null law for
/// continuous phenotypes.
struct RankNull {
  std::vector<double> ks;
  std::vector<double> ad;
};
RankNull rank_null_statistics(const std::array<std::size_t, 4>& sizes, std::size_t n_reps,
                              std::uint64_t seed, unsigned workers = default_workers());

/// Kolmogorov limiting survival function Q(x) = 2 sum (-1)^(k-1) exp(-2 k^2 x^2).
double kolmogorov_survival(double x);

/// One-sample KS distance to N(mu, sigma^2) and its asymptotic p-value
/// Q(sqrt(n) D). Parameters are taken as given (no Lilliefors correction).
struct OneSampleKs {
  double distance = 0.0;
  double p_value = 1.0;
};
OneSampleKs ks_one_sample_normal(std::span<const double> y, double mu, double sigma);

}  // namespace lsqtl
