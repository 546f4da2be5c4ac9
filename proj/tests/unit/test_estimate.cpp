#include <gtest/gtest.h>

#include <cmath>

#include "lsqtl/error.hpp"
#include "lsqtl/estimate.hpp"
#include "support.hpp"

using namespace lsqtl;
using test_support::arrays;
using test_support::draw;

namespace {

void expect_rel(double a, double b, double rel) {
  EXPECT_NEAR(a, b, rel * std::max(1.0, std::fabs(b)));
}

}  // namespace

TEST(FitNull, NormalExamples) {
  auto f = fit_null(PhenotypeGroups({-1.0}, {0.0}, {}, {1.0}), kNormal);
  EXPECT_NEAR(f.params.comp1.mu, 0.0, 1e-14);
  EXPECT_NEAR(f.params.comp1.sigma, 0.816497, 1e-6);
  EXPECT_EQ(f.model, ModelKind::null);
  EXPECT_EQ(f.params.theta, 0.5);
  f = fit_null(PhenotypeGroups({0.0, 0.0}, {}, {}, {1.0, 1.0}), kNormal);
  EXPECT_NEAR(f.params.comp1.mu, 0.5, 1e-14);
  EXPECT_NEAR(f.params.comp1.sigma, 0.5, 1e-14);
}

TEST(FitNull, LogisticSymmetricSample) {
  const double c = 3.7;
  const PhenotypeGroups g({c - 2.0, c + 2.0}, {c - 0.5}, {c + 0.5}, {c - 1.1, c + 1.1});
  const auto f = fit_null(g, kLogistic);
  EXPECT_NEAR(f.params.comp1.mu, c, 1e-9);
}

TEST(FitNull, LogisticMatchesOracleSearch) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto g = test_support::draw_null(seed, 150, 0.1, kLogistic);
    const auto f = fit_null(g, kLogistic);
    const auto o = oracle::location_scale_mle(g.pooled(), "logistic");
    EXPECT_NEAR(f.params.comp1.mu, o[0], 1e-5);
    EXPECT_NEAR(f.params.comp1.sigma, o[1], 1e-5);
    const double start = null_loglik(g, kLogistic, {0.0, 1.0});
    EXPECT_GE(f.loglik, start);
  }
}

TEST(FitNull, ConstantSampleIsDegenerate) {
  EXPECT_THROW(fit_null(PhenotypeGroups({1.0, 1.0}, {}, {}, {1.0, 1.0}), kNormal), DegenerateData);
  EXPECT_THROW(fit_null(PhenotypeGroups({1.0, 1.0}, {}, {}, {1.0, 1.0}), kLogistic),
               DegenerateData);
}

TEST(FitFull, DecouplesWithoutMiddleGroups) {
  for (const Kernel& k : {kNormal, kLogistic}) {
    const auto g = draw(5, 60, 1e-9, {k, {0, 1}}, {k, {1, 2}});
    ASSERT_EQ(g.size(2) + g.size(3), 0u);
    const auto fit = fit_full(g, k, FitConfig{});
    const LocScale m1 = fit_location_scale(k, g.group(1));
    const LocScale m4 = fit_location_scale(k, g.group(4));
    EXPECT_NEAR(fit.params.comp1.mu, m1.mu, 1e-5);
    EXPECT_NEAR(fit.params.comp1.sigma, m1.sigma, 1e-5);
    EXPECT_NEAR(fit.params.comp2.mu, m4.mu, 1e-5);
    EXPECT_NEAR(fit.params.comp2.sigma, m4.sigma, 1e-5);
    const double separate = null_loglik(PhenotypeGroups({g.group(1).begin(), g.group(1).end()}, {},
                                                        {}, {g.group(1).begin(), g.group(1).end()}),
                                         k, m1) / 2.0 +
                            null_loglik(PhenotypeGroups({g.group(4).begin(), g.group(4).end()}, {},
                                                        {}, {g.group(4).begin(), g.group(4).end()}),
                                        k, m4) / 2.0;
    EXPECT_NEAR(fit.loglik, separate, 1e-8);
  }
}

TEST(FitEqualScale, DecouplesWithPooledScale) {
  const auto g = draw(6, 80, 1e-9, {kNormal, {0, 1}}, {kNormal, {1, 1}});
  const auto fit = fit_equal_scale(g, kNormal, FitConfig{});
  const LocScale m1 = fit_location_scale(kNormal, g.group(1));
  const LocScale m4 = fit_location_scale(kNormal, g.group(4));
  const double n1 = g.size(1), n4 = g.size(4);
  const double pooled = std::sqrt((n1 * m1.sigma * m1.sigma + n4 * m4.sigma * m4.sigma) / (n1 + n4));
  EXPECT_NEAR(fit.params.comp1.mu, m1.mu, 1e-6);
  EXPECT_NEAR(fit.params.comp2.mu, m4.mu, 1e-6);
  EXPECT_NEAR(fit.params.comp1.sigma, pooled, 1e-6);
  EXPECT_EQ(fit.params.comp1.sigma, fit.params.comp2.sigma);
}

TEST(FitFull, IdenticalGroupsGiveSmallGain) {
  int small = 0;
  const int seeds = 20;
  for (int seed = 1; seed <= seeds; ++seed) {
    StreamRng rng(seed, 9);
    std::vector<double> y(100);
    for (double& v : y) v = rng.normal();
    const PhenotypeGroups g(y, y, y, y);
    const auto full = fit_full(g, kNormal, FitConfig{});
    const auto null = fit_null(g, kNormal);
    small += (full.loglik - null.loglik < 0.5) ? 1 : 0;
  }
  EXPECT_GE(small, 19);
}

TEST(FitFull, ConsistentAtLargeN) {
  int ok_full = 0, ok_equal = 0;
  const int seeds = 10;
  for (int seed = 1; seed <= seeds; ++seed) {
    const auto g = draw(seed, 5000, haldane(5), {kNormal, {0, 1}}, {kNormal, {0.5, 1}}, 0.7);
    const auto full = fit_full(g, kNormal, FitConfig{});
    ok_full += (std::fabs(full.params.comp1.mu) < 0.1 &&
                std::fabs(full.params.comp2.mu - 0.5) < 0.1) ? 1 : 0;
    const auto eq = fit_equal_scale(g, kNormal, FitConfig{});
    ok_equal += std::fabs(eq.params.comp2.mu - eq.params.comp1.mu - 0.5) < 0.1 ? 1 : 0;
  }
  EXPECT_GE(ok_full, 9);
  EXPECT_GE(ok_equal, 9);
}

TEST(FitFull, ProfileMatchesDirectMaximisation) {
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    const Kernel k = seed % 2 ? kNormal : kLogistic;
    const auto g = draw(seed, 120, 0.2, {k, {0, 1}}, {k, {0.8, 1.4}}, 0.3);
    const auto full = fit_full(g, k, FitConfig{});
    const auto eq = fit_equal_scale(g, k, FitConfig{});
    for (int j : {10, 50, 90}) {
      const double theta = full.theta_profile[j].theta;
      const double direct = oracle::profile_loglik(arrays(g), std::string(k.name()), theta, false);
      EXPECT_NEAR(full.theta_profile[j].loglik, direct, 1e-4) << k.name() << " theta=" << theta;
      const double direct_eq =
          oracle::profile_loglik(arrays(g), std::string(k.name()), theta, true);
      EXPECT_NEAR(eq.theta_profile[j].loglik, direct_eq, 1e-4) << k.name() << " theta=" << theta;
    }
  }
}

TEST(FitFull, EmAscent) {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    const Kernel k = seed % 3 ? kNormal : kLogistic;
    const auto g = draw(seed, 100, 0.15, {k, {0, 1}}, {k, {0.6, 1.3}}, 0.5);
    const FitConfig cfg;
    const double floor = sigma_floor(g, cfg);
    const MixtureParams start{0.5, {-1.0, 2.0}, {2.0, 0.5}};
    for (ModelKind model : {ModelKind::full, ModelKind::equal_scale}) {
      std::vector<double> trace;
      MixtureParams s = start;
      if (model == ModelKind::equal_scale) s.comp2.sigma = s.comp1.sigma;
      const EmRun run = run_em(g, k, model, ThetaPoint::on_grid(37, 101), s, cfg, floor, &trace);
      if (run.on_floor) continue;
      for (std::size_t i = 1; i < trace.size(); ++i) {
        EXPECT_GE(trace[i] - trace[i - 1], -1e-9) << "seed " << seed << " step " << i;
      }
    }
  }
}

TEST(FitFull, NestingAndAffineEquivariance) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const Kernel k = seed % 2 ? kNormal : kLogistic;
    const auto g = draw(seed, 150, 0.1, {k, {0, 1}}, {k, {0.5, 1.5}}, 0.5);
    const FitConfig cfg;
    const auto null = fit_null(g, k);
    const auto alt = fit_alternatives(g, k, cfg, null);
    EXPECT_LE(null.loglik, alt.equal_scale.loglik + 1e-6);
    EXPECT_LE(alt.equal_scale.loglik, alt.full.loglik + 1e-6);

    const double a = 3.0, b = 10.0;
    const auto g2 = g.affine(a, b);
    const auto full = fit_full(g, k, cfg);
    const auto full2 = fit_full(g2, k, cfg);
    EXPECT_EQ(full.theta_index, full2.theta_index);
    expect_rel(full2.params.comp1.mu, a * full.params.comp1.mu + b, 1e-6);
    expect_rel(full2.params.comp2.mu, a * full.params.comp2.mu + b, 1e-6);
    expect_rel(full2.params.comp1.sigma, a * full.params.comp1.sigma, 1e-6);
    expect_rel(full2.params.comp2.sigma, a * full.params.comp2.sigma, 1e-6);
  }
}

TEST(FitFull, MiddleSwapMirrorsThetaHat) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const Kernel k = seed % 2 ? kNormal : kLogistic;
    const auto g = draw(seed, 120, 0.2, {k, {0, 1}}, {k, {1, 1}}, 0.25);
    const FitConfig cfg;
    const auto a = fit_full(g, k, cfg);
    const auto b = fit_full(g.with_middle_swapped(), k, cfg);
    EXPECT_EQ(a.loglik, b.loglik);
    // Ties go to the smaller theta, so only check the mirror when the
    // profile maximum is unique.
    int ties = 0;
    for (const auto& p : a.theta_profile) ties += p.loglik == a.loglik ? 1 : 0;
    if (ties == 1) {
      EXPECT_EQ(b.theta_index, cfg.theta_grid_size - 1 - a.theta_index);
    }
  }
}

TEST(FitFull, InputChecks) {
  FitConfig bad;
  bad.theta_grid_size = 1;
  EXPECT_THROW(bad.validate(), InvalidInput);
  bad = FitConfig{};
  bad.em_tol = 0.0;
  EXPECT_THROW(bad.validate(), InvalidInput);
  const PhenotypeGroups thin({0.0}, {1.0}, {2.0}, {3.0, 4.0});
  EXPECT_THROW(fit_full(thin, kNormal, FitConfig{}), InvalidInput);
  EXPECT_THROW(fit_equal_scale(thin, kNormal, FitConfig{}), InvalidInput);
}

TEST(ThetaGrid, MirrorPointsAreExact) {
  for (int g : {2, 11, 101, 201}) {
    for (int j = 0; j < g; ++j) {
      const ThetaPoint a = ThetaPoint::on_grid(j, g);
      const ThetaPoint b = ThetaPoint::on_grid(g - 1 - j, g);
      EXPECT_EQ(a.theta, b.complement);
      EXPECT_EQ(a.complement, b.theta);
    }
  }
}
