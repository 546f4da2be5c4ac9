#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "lsqtl/error.hpp"
#include "lsqtl/nonparam.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace lsqtl;

namespace {

std::vector<oracle::Sample> to_samples(const PhenotypeGroups& g) {
  const auto a = test_support::arrays(g);
  std::vector<oracle::Sample> out;
  for (const auto& s : a)
    if (!s.empty()) out.push_back(s);
  return out;
}

SampleList list_of(const std::vector<std::vector<double>>& v) {
  SampleList out;
  for (const auto& s : v) out.emplace_back(s);
  return out;
}

// Paper smoothness measurements from four laboratories, the worked example of
// the k-sample Anderson-Darling paper (eight values each, with ties).
const std::vector<std::vector<double>> kLabs = {
    {38.7, 41.5, 43.8, 44.5, 45.5, 46.0, 47.7, 58.0},
    {39.2, 39.3, 39.7, 41.4, 41.8, 42.9, 43.3, 45.8},
    {34.0, 35.0, 39.0, 40.0, 43.0, 43.0, 44.0, 45.0},
    {34.0, 34.8, 34.8, 35.4, 37.2, 37.8, 41.2, 42.8},
};

}  // namespace

TEST(Ks, HandExample) {
  const PhenotypeGroups g({0.0}, {0.0}, {0.0}, {1.0});
  EXPECT_NEAR(ks_ksample(g), 0.75, 1e-15);
}

TEST(Ks, MatchesOracle) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto g = test_support::draw(seed, 60 + seed, 0.2, {kNormal, {0, 1}}, {kNormal, {0.7, 1.3}});
    EXPECT_NEAR(ks_ksample(g), oracle::ks_ksample(to_samples(g)), 1e-10) << seed;
  }
}

TEST(Ks, EmptySamplesDroppedAndTooFewRejected) {
  const PhenotypeGroups g({0.1, 0.4}, {}, {}, {0.2, 0.9});
  EXPECT_NEAR(ks_ksample(g), oracle::ks_ksample({{0.1, 0.4}, {0.2, 0.9}}), 1e-15);
  const std::vector<double> a{1.0, 2.0};
  EXPECT_THROW(ks_ksample(SampleList{std::span<const double>(a)}), InvalidInput);
}

TEST(Ad, ContinuousMatchesOracle) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto g = test_support::draw(seed, 40 + 3 * seed, 0.3, {kNormal, {0, 1}}, {kNormal, {0.5, 1}});
    const auto raw = ad_ksample_raw(as_samples(g));
    EXPECT_FALSE(raw.midrank);
    EXPECT_NEAR(raw.a2, oracle::ad_kn(to_samples(g)), 1e-9 * std::max(1.0, raw.a2)) << seed;
  }
}

TEST(Ad, MidrankVersionOnPublishedExample) {
  const auto raw = ad_ksample_raw(list_of(kLabs));
  EXPECT_TRUE(raw.midrank);
  EXPECT_EQ(raw.k, 4);
  EXPECT_EQ(raw.n, 32u);
  EXPECT_NEAR(raw.a2, oracle::ad_akn(kLabs), 1e-10);
  EXPECT_NEAR(raw.a2, 8.3926, 5e-4);
  EXPECT_NEAR(ad_ksample(list_of(kLabs)), 4.4798, 2e-3);
}

TEST(Ad, VarianceMatchesOracle) {
  const std::vector<std::vector<std::size_t>> cases = {
      {8, 8, 8, 8}, {2, 3, 4, 50}, {10, 1, 1, 10}, {100, 7, 9, 120}, {5, 5}};
  for (const auto& c : cases) {
    EXPECT_NEAR(ad_variance(c), oracle::ad_variance(c), 1e-10 * oracle::ad_variance(c));
  }
  EXPECT_NEAR(ad_variance(std::vector<std::size_t>{8, 8, 8, 8}), 1.2038 * 1.2038, 2e-3);
}

TEST(RankTests, InvariantUnderMonotoneMapsAndPermutations) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto g = test_support::draw(seed, 80, 0.25, {kNormal, {0, 1}}, {kNormal, {1, 1}});
    const auto s = test_support::arrays(g);
    std::array<std::vector<double>, 4> mapped, shuffled;
    for (int i = 0; i < 4; ++i) {
      for (double y : s[i]) mapped[i].push_back(std::exp(0.7 * y) + 3.0);
      shuffled[i] = s[i];
      std::reverse(shuffled[i].begin(), shuffled[i].end());
    }
    const PhenotypeGroups gm(mapped[0], mapped[1], mapped[2], mapped[3]);
    const PhenotypeGroups gs(shuffled[0], shuffled[1], shuffled[2], shuffled[3]);
    EXPECT_NEAR(ks_ksample(gm), ks_ksample(g), 1e-12);
    EXPECT_NEAR(ad_ksample(gm), ad_ksample(g), 1e-10);
    EXPECT_DOUBLE_EQ(ks_ksample(gs), ks_ksample(g));
    EXPECT_NEAR(ad_ksample(gs), ad_ksample(g), 1e-12);
    // Reordering the samples themselves leaves both statistics unchanged.
    const PhenotypeGroups gr(s[3], s[2], s[1], s[0]);
    EXPECT_NEAR(ks_ksample(gr), ks_ksample(g), 1e-12);
    EXPECT_NEAR(ad_ksample(gr), ad_ksample(g), 1e-10);
  }
}

TEST(Calibration, KsRejectsAtNominalRateUnderNull) {
  const std::array<std::size_t, 4> sizes{45, 5, 5, 45};
  const auto null = rank_null_statistics(sizes, 10000, 11, 2);
  const double crit = sorted_quantile(null.ks, 0.95);
  const double crit_ad = sorted_quantile(null.ad, 0.95);
  std::size_t rej = 0, rej_ad = 0;
  const std::size_t reps = 10000;
  for (std::size_t i = 0; i < reps; ++i) {
    StreamRng rng(12, i);
    std::array<std::vector<double>, 4> v;
    for (int j = 0; j < 4; ++j)
      for (std::size_t m = 0; m < sizes[j]; ++m) v[j].push_back(rng.normal());
    const PhenotypeGroups g(v[0], v[1], v[2], v[3]);
    rej += ks_ksample(g) > crit;
    rej_ad += ad_ksample(g) > crit_ad;
  }
  EXPECT_NEAR(static_cast<double>(rej) / reps, 0.05, 0.007);
  EXPECT_NEAR(static_cast<double>(rej_ad) / reps, 0.05, 0.007);
}

TEST(Calibration, AdAsymptoticCriticalValues) {
  // k = 4 entries of the published asymptotic percentile table.
  EXPECT_NEAR(ad_asymptotic_critical(4, 0.05), 1.9, 0.1);
  EXPECT_NEAR(ad_asymptotic_critical(2, 0.05), 1.96, 0.05);
  double prev = -10.0;
  for (double a : {0.25, 0.1, 0.05, 0.025, 0.01, 0.005, 0.001}) {
    const double c = ad_asymptotic_critical(4, a);
    EXPECT_GT(c, prev);
    prev = c;
  }
  EXPECT_THROW(ad_asymptotic_critical(4, 0.5), DomainError);
  EXPECT_THROW(ad_asymptotic_critical(1, 0.05), InvalidInput);
  // The Monte Carlo 95% point for moderate samples sits near the asymptote.
  const auto null = rank_null_statistics({60, 20, 20, 60}, 8000, 3, 2);
  EXPECT_NEAR(sorted_quantile(null.ad, 0.95), ad_asymptotic_critical(4, 0.05), 0.2);
}

TEST(Calibration, McCalibrateConstantStatistic) {
  const NullSampler sampler = [](StreamRng& rng) {
    return PhenotypeGroups({rng.normal(), rng.normal()}, {}, {}, {rng.normal(), rng.normal()});
  };
  EXPECT_DOUBLE_EQ(mc_calibrate([](const PhenotypeGroups&) { return 2.5; }, sampler, 1000, 0.05, 1, 2),
                   2.5);
  EXPECT_THROW(mc_calibrate([](const PhenotypeGroups&) { return 2.5; }, sampler, 999, 0.05, 1, 2),
               InvalidInput);
  const auto a = mc_null_statistics([](const PhenotypeGroups& g) { return g.group(1)[0]; }, sampler,
                                    2000, 4, 1);
  const auto b = mc_null_statistics([](const PhenotypeGroups& g) { return g.group(1)[0]; }, sampler,
                                    2000, 4, 3);
  EXPECT_EQ(a, b);
  EXPECT_TRUE(std::is_sorted(a.begin(), a.end()));
}

TEST(Kolmogorov, SurvivalMatchesOracle) {
  for (double x = 0.2; x < 3.0; x += 0.05) {
    EXPECT_NEAR(kolmogorov_survival(x), oracle::kolmogorov_q(x), 1e-12) << x;
  }
  EXPECT_NEAR(kolmogorov_survival(std::nextafter(1.18, 0.0)), kolmogorov_survival(1.18), 1e-13);
  EXPECT_NEAR(kolmogorov_survival(1.3581), 0.05, 1e-4);
  EXPECT_DOUBLE_EQ(kolmogorov_survival(0.0), 1.0);
}

TEST(Kolmogorov, OneSampleNormal) {
  const std::vector<double> y{0.0};
  const auto r = ks_one_sample_normal(y, 0.0, 1.0);
  EXPECT_NEAR(r.distance, 0.5, 1e-15);
  std::vector<double> z;
  StreamRng rng(9, 0);
  for (int i = 0; i < 2000; ++i) z.push_back(rng.normal());
  const auto ok = ks_one_sample_normal(z, 0.0, 1.0);
  EXPECT_LT(ok.distance, 0.05);
  const auto shifted = ks_one_sample_normal(z, 0.5, 1.0);
  EXPECT_LT(shifted.p_value, 1e-6);
}
