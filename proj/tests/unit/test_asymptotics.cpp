#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "lsqtl/asymptotics.hpp"
#include "lsqtl/error.hpp"
#include "lsqtl/likelihood.hpp"
#include "oracles.hpp"

using namespace lsqtl;
constexpr double kPi = std::numbers::pi;

TEST(Angles, ClassifyExamples) {
  const auto geom = AngleGeometry::from_r(0.047581);
  EXPECT_NEAR(geom.gamma, std::acos(std::sqrt(1.0 - 0.047581)), 1e-14);
  EXPECT_EQ(classify_angle(0.0, geom), AngleSet::A1);
  EXPECT_EQ(classify_angle(kPi / 4, geom), AngleSet::A2);
  EXPECT_EQ(classify_angle(-kPi, geom), AngleSet::A1);
  EXPECT_EQ(classify_angle(kPi, geom), AngleSet::A1);
  EXPECT_EQ(classify_angle(-kPi / 4, geom), AngleSet::A3);
  EXPECT_EQ(classify_angle(geom.gamma, geom), AngleSet::A1);
  EXPECT_EQ(classify_angle(kPi / 2, geom), AngleSet::A2);
  EXPECT_THROW(classify_angle(3.2, geom), DomainError);
  EXPECT_THROW(AngleGeometry::from_r(0.0), DomainError);
}

TEST(Angles, SetsCoverTheCircle) {
  const auto geom = AngleGeometry::from_r(0.3);
  int counts[3] = {0, 0, 0};
  for (int i = 0; i <= 100000; ++i) {
    const double eta = -kPi + 2 * kPi * i / 100000.0;
    ++counts[static_cast<int>(classify_angle(eta, geom))];
  }
  // Each set has total length 2 gamma (A1) or pi - 2 gamma over two halves.
  EXPECT_NEAR(counts[0] / 100000.0, 4 * geom.gamma / (2 * kPi), 1e-3);
  EXPECT_NEAR(counts[1] / 100000.0, (kPi - 2 * geom.gamma) / (2 * kPi), 1e-3);
}

TEST(Representation, FixedDrawExamples) {
  const auto g = AngleGeometry::from_r(0.047581);
  EXPECT_DOUBLE_EQ(rep_full(2.0, 2.0, 0.0, g), 4.0);
  EXPECT_NEAR(rep_full(2.0, 2.0, kPi / 4, g), 2.0 + 2.0 * std::cos(kPi / 2 - 2 * g.gamma), 1e-12);
  EXPECT_NEAR(rep_full(2.0, 2.0, kPi / 4, g), 2.8515, 1e-3);
  EXPECT_DOUBLE_EQ(rep_star(5.0, 0.0, g), 5.0);
  const auto h = AngleGeometry::from_r(0.164840);
  EXPECT_NEAR(rep_star(5.0, kPi / 2, h), 0.82420, 1e-10);
}

TEST(Representation, BoundaryContinuity) {
  for (double r : {0.0475813, 0.16484, 0.5, 0.9}) {
    const auto g = AngleGeometry::from_r(r);
    const double bounds[] = {g.gamma, -g.gamma, kPi / 2, -kPi / 2, kPi - g.gamma, -kPi + g.gamma};
    for (double b : bounds) {
      for (double rho : {0.3, 2.0, 7.5}) {
        const double at = rep_full(rho, 2.0 * rho, b, g);
        const double below = rep_full(rho, 2.0 * rho, std::nextafter(b, -4.0), g);
        const double above = rep_full(rho, 2.0 * rho, std::nextafter(b, 4.0), g);
        EXPECT_NEAR(at, below, 1e-12 * std::max(1.0, at)) << "r=" << r << " b=" << b;
        EXPECT_NEAR(at, above, 1e-12 * std::max(1.0, at)) << "r=" << r << " b=" << b;
        const double s_at = rep_star(rho, b, g);
        EXPECT_NEAR(s_at, rep_star(rho, std::nextafter(b, -4.0), g), 1e-12 * std::max(1.0, s_at));
        EXPECT_NEAR(s_at, rep_star(rho, std::nextafter(b, 4.0), g), 1e-12 * std::max(1.0, s_at));
      }
      // The set formulas themselves agree at the boundary.
      const double c2 = std::cos(2 * b - 2 * g.gamma), c3 = std::cos(2 * b + 2 * g.gamma);
      const bool a12 = std::fabs(b - g.gamma) < 1e-12 || std::fabs(b + kPi - g.gamma) < 1e-12;
      const bool a13 = std::fabs(b + g.gamma) < 1e-12 || std::fabs(b - kPi + g.gamma) < 1e-12;
      if (a12) EXPECT_NEAR(c2, 1.0, 1e-12);
      if (a13) EXPECT_NEAR(c3, 1.0, 1e-12);
      if (!a12 && !a13) EXPECT_NEAR(c2, c3, 1e-12);
    }
  }
}

TEST(Representation, QuantileBounds) {
  for (double r : {0.01, 0.0475813, 0.16484, 0.4}) {
    const auto full = sample_R(r, 40000, 5, 1);
    EXPECT_GE(quantile(full, 0.95), 5.99146 * 0.99) << r;
    const auto star = sample_Rstar(r, 40000, 6, 1);
    EXPECT_GE(quantile(star, 0.95), 3.84146 * 0.98) << r;
    EXPECT_LE(quantile(star, 0.95), 5.99146 * 1.02) << r;
    for (double p : {0.5, 0.9, 0.95, 0.99}) EXPECT_GT(quantile(full, p), quantile(star, p));
  }
}

TEST(Representation, MonotoneInR) {
  // 95% quantile with its Monte Carlo error from the order-statistic spread.
  double prev = 0.0, prev_se = 0.0;
  for (double r : {0.01, 0.05, 0.1648, 0.3}) {
    const auto t = sample_R(r, 50000, 17, 1);
    const double q = quantile(t, 0.95);
    const double se = (quantile(t, 0.955) - quantile(t, 0.945)) / 2.0 *
                      std::sqrt(0.95 * 0.05 / 50000) / 0.005;
    EXPECT_GE(q, prev - 2.0 * std::hypot(se, prev_se)) << r;
    prev = q;
    prev_se = se;
  }
}

TEST(Representation, DeterministicAcrossWorkers) {
  const auto a = sample_R(0.1, 20000, 99, 1);
  const auto b = sample_R(0.1, 20000, 99, 3);
  EXPECT_EQ(a.samples, b.samples);
  const auto c = oracle_sup_process(0.1, StatKind::star, 101, 5000, 4, 1);
  const auto d = oracle_sup_process(0.1, StatKind::star, 101, 5000, 4, 4);
  EXPECT_EQ(c.samples, d.samples);
  EXPECT_NE(a.samples, sample_R(0.1, 20000, 100, 1).samples);
  EXPECT_NO_THROW(a.validate());
}

TEST(Oracle, MatchesNaiveEvaluationOnSameDraws) {
  const double r = 0.16484;
  const auto t = oracle_sup_process(r, StatKind::full, 201, 2000, 21, 1);
  std::vector<double> naive;
  for (std::size_t i = 0; i < 2000; ++i) {
    StreamRng rng(21, i);
    const double z11 = rng.normal(), z12 = rng.normal(), z21 = rng.normal(), z22 = rng.normal();
    naive.push_back(oracle::sup_process(r, z11, z12, z21, z22, 201, true));
  }
  std::sort(naive.begin(), naive.end());
  for (std::size_t i = 0; i < naive.size(); ++i) EXPECT_NEAR(t.samples[i], naive[i], 1e-12);
}

TEST(Oracle, FixedDrawAndVariance) {
  EXPECT_NEAR(oracle::sup_process(0.2, 1.0, 0.0, 0.0, 0.0, 201, false), 1.0, 1e-12);
  for (double t : {0.0, 0.2, 0.5, 0.9}) EXPECT_NEAR(process_covariance(0.3, t, t), 1.0, 1e-14);
}

TEST(Oracle, EmpiricalCovariance) {
  const double r = 0.16484, t1 = 0.2, t2 = 0.8;
  const std::size_t n = 100000;
  double s1 = 0, s2 = 0, s12 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    StreamRng rng(5, i);
    const double a = rng.normal(), b = rng.normal();
    const double z1 = (std::sqrt(1 - r) * a + std::sqrt(r) * (2 * t1 - 1) * b) / std::sqrt(tau(r, t1));
    const double z2 = (std::sqrt(1 - r) * a + std::sqrt(r) * (2 * t2 - 1) * b) / std::sqrt(tau(r, t2));
    s1 += z1;
    s2 += z2;
    s12 += z1 * z2;
  }
  const double cov = s12 / n - (s1 / n) * (s2 / n);
  const double closed = (1 + r * (4 * 0.16 - 2)) / std::sqrt(tau(r, t1) * tau(r, t2));
  EXPECT_NEAR(process_covariance(r, t1, t2), closed, 1e-14);
  const double se = std::sqrt((1 + closed * closed) / n);
  EXPECT_NEAR(cov, closed, 3 * se);
}

TEST(PValue, Examples) {
  NullDistTable t;
  t.samples = {0.5, 1.0, 2.0, 3.0, 4.0};
  EXPECT_DOUBLE_EQ(pvalue(-0.0, t), 1.0);
  EXPECT_DOUBLE_EQ(pvalue(10.0, t), 1.0 / 6.0);
  EXPECT_DOUBLE_EQ(pvalue(2.0, t), 4.0 / 6.0);
  double prev = 1.0;
  for (double s = 0.0; s < 5.0; s += 0.01) {
    EXPECT_LE(pvalue(s, t), prev);
    prev = pvalue(s, t);
  }
  const auto big = sample_R(0.1, 20000, 3, 1);
  EXPECT_NEAR(pvalue(quantile(big, 0.5), big), 0.5, 1.0 / 20000 + 1e-12);
}

TEST(PValue, QuantileIsLinearInterpolation) {
  const std::vector<double> v{1.0, 2.0, 3.0, 4.0};
  EXPECT_DOUBLE_EQ(sorted_quantile(v, 0.5), 2.5);
  EXPECT_DOUBLE_EQ(sorted_quantile(v, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(sorted_quantile(v, 1.0), 4.0);
  EXPECT_NEAR(sorted_quantile(v, 0.9), 3.7, 1e-15);
  NullDistTable t;
  t.samples = v;
  EXPECT_DOUBLE_EQ(critical_value(t, 0.1), sorted_quantile(v, 0.9));
  EXPECT_THROW(sorted_quantile(v, 1.5), DomainError);
}

TEST(Davies, PsiAndTotalVariation) {
  for (double r : {0.0476, 0.1648, 0.4}) {
    for (double t = 0.01; t < 1.0; t += 0.07) EXPECT_GT(davies_psi(r, t), 0.0);
    EXPECT_NEAR(davies_total_variation(r), 2.0 * std::acos(std::sqrt(1.0 - r)), 1e-6) << r;
  }
}

TEST(Davies, PValueMatchesOracle) {
  const double r = haldane(5);
  EXPECT_DOUBLE_EQ(davies_pvalue(0.0, r, StatKind::full), 1.0);
  for (double u : {2.0, 5.0, 8.0, 12.0, 20.0}) {
    EXPECT_NEAR(davies_pvalue(u, r, StatKind::full), std::min(1.0, oracle::davies_pvalue(u, r, 2)),
                1e-7);
    EXPECT_NEAR(davies_pvalue(u, r, StatKind::star), std::min(1.0, oracle::davies_pvalue(u, r, 1)),
                1e-7);
  }
  const double c = davies_critical_value(r, StatKind::full, 0.05);
  EXPECT_NEAR(davies_pvalue(c, r, StatKind::full), 0.05, 1e-6);
}

TEST(LocalPower, DriftForNormalKernel) {
  LocalAlternative alt;
  alt.theta0 = 0.3;
  alt.delta_mu = 2.0;
  alt.delta_sigma = 1.5;
  alt.sigma0 = 1.7;
  const double r = 0.1;
  for (double t : {0.0, 0.25, 0.8}) {
    const double lead = -(1 + 2 * r * (2 * 0.3 * t - 0.3 - t)) / std::sqrt(tau(r, t)) / 1.7;
    const auto d = local_drift(r, alt, StatKind::full, t);
    EXPECT_NEAR(d[0], lead * 2.0, 1e-12);
    EXPECT_NEAR(d[1], lead * std::sqrt(2.0) * 1.5, 1e-12);
    EXPECT_NEAR(local_drift(r, alt, StatKind::star, t)[0], lead * 2.0, 1e-12);
  }
}

TEST(LocalPower, NullAndScaleOnlyCases) {
  LocalPowerConfig cfg;
  cfg.n_samples = 40000;
  cfg.workers = 1;
  const double tol = 4.0 * std::sqrt(0.05 * 0.95 / 40000);
  LocalAlternative none;
  EXPECT_NEAR(local_power_limit(0.0476, none, StatKind::full, cfg), 0.05, tol);
  EXPECT_NEAR(local_power_limit(0.0476, none, StatKind::star, cfg), 0.05, tol);
  LocalAlternative scale_only;
  scale_only.delta_sigma = 3.0;
  EXPECT_NEAR(local_power_limit(0.0476, scale_only, StatKind::star, cfg), 0.05, tol);
  EXPECT_GT(local_power_limit(0.0476, scale_only, StatKind::full, cfg), 0.2);
  double prev = 0.0;
  for (double dm : {0.0, 1.0, 2.0, 3.0}) {
    LocalAlternative a;
    a.delta_mu = dm;
    const double p = local_power_limit(0.0476, a, StatKind::full, cfg);
    EXPECT_GE(p, prev - tol);
    prev = p;
  }
}

TEST(Kl, ZeroWhenComponentsAgree) {
  const Component f{kLogistic, {0.3, 1.2}};
  const auto kl = kl_information(group_probabilities(0.1), f, f, 0.5, kLogistic);
  EXPECT_NEAR(kl.kl, 0.0, 1e-9);
  EXPECT_NEAR(kl.null_params.mu, 0.3, 1e-6);
  EXPECT_NEAR(kl.null_params.sigma, 1.2, 1e-6);
}

TEST(Kl, MatchesOracleAndPublishedColumn) {
  struct Case {
    const char* name;
    Kernel k;
    LocScale f1, f2;
    double expected_x100, tol;
  };
  const Case cases[] = {
      {"I", kNormal, {0, 1}, {0.5, 1}, 2.89, 0.02},
      {"II", kNormal, {0, 1}, {0.5, 1.25}, -1, 0},
      {"III", kNormal, {0.5, std::sqrt(0.75)}, {0.5, std::sqrt(1.25)}, -1, 0},
      {"IV", kLogistic, {0, 1}, {1, 1}, 3.83, 0.05},
      {"V", kLogistic, {0, 1}, {0.8, 1.35}, -1, 0},
      {"VI", kLogistic, {0.5, 1}, {0.5, 1.5}, 2.78, 0.05},
  };
  const double r = haldane(5);
  for (const Case& c : cases) {
    const auto kl = kl_information(group_probabilities(r), {c.k, c.f1}, {c.k, c.f2}, 0.5, c.k);
    const auto o = oracle::kl_information(r, std::string(c.k.name()), c.f1.mu, c.f1.sigma, c.f2.mu,
                                          c.f2.sigma, 0.5);
    EXPECT_NEAR(kl.kl, o.kl, 1e-6) << c.name;
    EXPECT_NEAR(kl.null_params.mu, o.mu0, 1e-4) << c.name;
    EXPECT_NEAR(kl.null_params.sigma, o.sigma0, 1e-4) << c.name;
    if (c.expected_x100 > 0) EXPECT_NEAR(100 * kl.kl, c.expected_x100, c.tol) << c.name;
  }
}

TEST(Kl, GroupProbabilities) {
  const auto p = group_probabilities(0.2);
  EXPECT_DOUBLE_EQ(p[0] + p[1] + p[2] + p[3], 1.0);
  EXPECT_DOUBLE_EQ(p[1], 0.1);
}

TEST(TableIo, RoundTripWithSidecar) {
  const auto dir = std::filesystem::temp_directory_path() / "lsqtl_table_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / "r.csv";
  const auto t = sample_Rstar(0.2, 12000, 8, 1);
  write_table(t, path);
  EXPECT_TRUE(std::filesystem::exists(sidecar_path(path)));
  const auto back = read_table(path);
  EXPECT_EQ(back.samples, t.samples);
  EXPECT_EQ(back.kind, StatKind::star);
  EXPECT_EQ(back.seed, 8u);
  EXPECT_EQ(back.r, 0.2);
  {
    std::ofstream bad(path);
    bad << "sample\n1.0\nnot-a-number\n";
  }
  EXPECT_THROW(read_table(path), ParseError);
  std::filesystem::remove_all(dir);
}

TEST(TableIo, ValidateRejectsBadTables) {
  NullDistTable t;
  t.samples = {2.0, 1.0};
  EXPECT_THROW(t.validate(1), InvalidInput);
  t.samples = {-1.0, 1.0};
  EXPECT_THROW(t.validate(1), InvalidInput);
  t.samples = {1.0, 2.0};
  EXPECT_THROW(t.validate(), InvalidInput);
}
