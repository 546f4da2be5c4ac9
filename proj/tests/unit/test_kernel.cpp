#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "lsqtl/error.hpp"
#include "lsqtl/kernel.hpp"
#include "oracles.hpp"

using namespace lsqtl;

namespace {

const Kernel kKernels[] = {kNormal, kLogistic};

// Trapezoid integral of fn(z) f(z) on [-60, 60] with the oracle density.
template <class Fn>
double expect_under(const Kernel& k, Fn&& fn) {
  const std::string name(k.name());
  const int m = 240000;
  const double lo = -60.0, dz = 120.0 / m;
  double s = 0.0;
  for (int i = 0; i <= m; ++i) {
    const double z = lo + i * dz;
    const double w = (i == 0 || i == m) ? 0.5 : 1.0;
    s += w * fn(z) * std::exp(oracle::logpdf(name, z, 0.0, 1.0));
  }
  return s * dz;
}

}  // namespace

TEST(Kernel, LogDensityExamples) {
  EXPECT_NEAR(kNormal.log_density(0.0, {0.0, 1.0}), -0.918938533, 1e-9);
  EXPECT_NEAR(kLogistic.log_density(0.0, {0.0, 1.0}), std::log(0.25), 1e-12);
  EXPECT_NEAR(kNormal.log_density(1.0, {0.0, 2.0}),
              -std::log(2.0) - 0.5 * std::log(2.0 * std::numbers::pi) - 0.125, 1e-14);
  EXPECT_NEAR(kNormal.log_density(1.0, {0.0, 2.0}), -1.7370857138, 1e-10);
}

TEST(Kernel, LogDensityRejectsBadScale) {
  EXPECT_THROW(kNormal.log_density(0.0, {0.0, 0.0}), DomainError);
  EXPECT_THROW(kLogistic.log_density(0.0, {0.0, -1.0}), DomainError);
}

TEST(Kernel, LogDensityMatchesOracle) {
  for (const Kernel& k : kKernels) {
    for (double y = -30.0; y <= 30.0; y += 0.37) {
      EXPECT_NEAR(k.log_density(y, {0.3, 1.7}), oracle::logpdf(std::string(k.name()), y, 0.3, 1.7),
                  1e-11);
    }
  }
}

TEST(Kernel, ScoreExamples) {
  EXPECT_DOUBLE_EQ(kNormal.score(0.0).T, 0.0);
  EXPECT_DOUBLE_EQ(kNormal.score(0.0).U, -1.0);
  EXPECT_DOUBLE_EQ(kLogistic.score(0.0).T, 0.0);
  EXPECT_DOUBLE_EQ(kLogistic.score(0.0).U, -1.0);
  EXPECT_DOUBLE_EQ(kNormal.score(1.0).T, 1.0);
  EXPECT_DOUBLE_EQ(kNormal.score(1.0).U, 0.0);
}

TEST(Kernel, ScoresMatchFiniteDifferences) {
  const double h = 1e-5;
  for (const Kernel& k : kKernels) {
    for (int i = -5; i <= 5; ++i) {
      const double y = i;
      const double fd_t = -(k.log_pdf_std(y + h) - k.log_pdf_std(y - h)) / (2 * h);
      EXPECT_NEAR(k.score(y).T, fd_t, 1e-5) << k.name() << " y=" << y;
      // d/dsigma log f(y; 0, sigma) at sigma = 1
      const double fd_u =
          (k.log_density(y, {0.0, 1.0 + h}) - k.log_density(y, {0.0, 1.0 - h})) / (2 * h);
      EXPECT_NEAR(k.score(y).U, fd_u, 1e-5) << k.name() << " y=" << y;
    }
  }
}

TEST(Kernel, FusedDerivativesAgree) {
  for (const Kernel& k : kKernels) {
    for (double z = -40.0; z <= 40.0; z += 0.173) {
      const auto d = k.derivatives_std(z);
      EXPECT_NEAR(d.log_pdf, k.log_pdf_std(z), 1e-12);
      EXPECT_NEAR(d.d1, k.dlog_pdf_std(z), 1e-12);
      EXPECT_NEAR(d.d2, k.d2log_pdf_std(z), 1e-12);
    }
  }
}

TEST(Kernel, DensityIntegratesToOne) {
  for (const Kernel& k : kKernels) {
    const double total = integrate_real_line([&](double z) { return std::exp(k.log_pdf_std(z)); });
    EXPECT_NEAR(total, 1.0, 1e-8) << k.name();
  }
}

TEST(Kernel, ScoresHaveZeroMean) {
  for (const Kernel& k : kKernels) {
    EXPECT_NEAR(expect_under(k, [&](double z) { return k.score(z).T; }), 0.0, 1e-6);
    EXPECT_NEAR(expect_under(k, [&](double z) { return k.score(z).U; }), 0.0, 1e-6);
  }
}

TEST(Kernel, InfoMatrixNormal) {
  const InfoMatrix a = kNormal.info_matrix();
  EXPECT_NEAR(a.sigma_T2, 1.0, 1e-12);
  EXPECT_NEAR(a.sigma_U2, 2.0, 1e-12);
  EXPECT_NEAR(a.sigma_TU, 0.0, 1e-12);
}

TEST(Kernel, InfoMatrixLogisticMatchesOracleQuadrature) {
  const InfoMatrix a = kLogistic.info_matrix();
  const auto t2 = expect_under(kLogistic, [](double z) { return std::pow(std::tanh(z / 2), 2); });
  const auto u2 =
      expect_under(kLogistic, [](double z) { return std::pow(z * std::tanh(z / 2) - 1.0, 2); });
  EXPECT_NEAR(a.sigma_T2, 1.0 / 3.0, 1e-10);
  EXPECT_NEAR(a.sigma_T2, t2, 1e-7);
  EXPECT_NEAR(a.sigma_U2, u2, 1e-7);
  EXPECT_NEAR(a.sigma_TU, 0.0, 1e-12);
  EXPECT_TRUE(a.positive_definite());

  const InfoMatrix q = kLogistic.info_matrix_quadrature();
  EXPECT_NEAR(q.sigma_T2, a.sigma_T2, 1e-8);
  EXPECT_NEAR(q.sigma_U2, a.sigma_U2, 1e-8);
  EXPECT_NEAR(q.sigma_TU, a.sigma_TU, 1e-8);
}

TEST(Kernel, InfoMatrixSqrtAndInverse) {
  for (const Kernel& k : kKernels) {
    const InfoMatrix a = k.info_matrix();
    const auto s = a.sqrt();
    // s * s == A
    EXPECT_NEAR(s[0] * s[0] + s[1] * s[2], a.sigma_T2, 1e-12);
    EXPECT_NEAR(s[0] * s[1] + s[1] * s[3], a.sigma_TU, 1e-12);
    EXPECT_NEAR(s[2] * s[1] + s[3] * s[3], a.sigma_U2, 1e-12);
    const auto inv = a.inverse();
    EXPECT_NEAR(inv[0] * a.sigma_T2 + inv[1] * a.sigma_TU, 1.0, 1e-12);
    EXPECT_NEAR(inv[2] * a.sigma_TU + inv[3] * a.sigma_U2, 1.0, 1e-12);
  }
}

TEST(Kernel, MonteCarloScoreCovariance) {
  const std::size_t n = 1000000;
  for (const Kernel& k : kKernels) {
    StreamRng rng(42, static_cast<std::uint64_t>(k.id()));
    double st = 0, su = 0, stt = 0, suu = 0, stu = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const Score s = k.score(k.sample_std(rng));
      st += s.T;
      su += s.U;
      stt += s.T * s.T;
      suu += s.U * s.U;
      stu += s.T * s.U;
    }
    const InfoMatrix a = k.info_matrix();
    const double cov_tu = stu / n - (st / n) * (su / n);
    // se of a sample covariance of uncorrelated T, U: sqrt(E T^2 U^2 / n)
    const double se = std::sqrt(a.sigma_T2 * a.sigma_U2 * 3.0 / n);
    EXPECT_NEAR(cov_tu, a.sigma_TU, 3 * se) << k.name();
    EXPECT_NEAR(stt / n - (st / n) * (st / n), a.sigma_T2, 0.01 * a.sigma_T2) << k.name();
    EXPECT_NEAR(suu / n - (su / n) * (su / n), a.sigma_U2, 0.02 * a.sigma_U2) << k.name();
  }
}

TEST(Kernel, QuantileInvertsCdf) {
  for (const Kernel& k : kKernels) {
    for (double u = 0.001; u < 1.0; u += 0.0371) {
      EXPECT_NEAR(k.cdf_std(k.quantile_std(u)), u, 1e-10);
    }
  }
  EXPECT_NEAR(kLogistic.quantile_std(0.75), std::log(3.0), 1e-12);
}

TEST(Kernel, Registry) {
  EXPECT_EQ(Kernel::from_name("normal"), kNormal);
  EXPECT_EQ(Kernel::from_name("logistic"), kLogistic);
  EXPECT_THROW(Kernel::from_name("cauchy"), InvalidInput);
  EXPECT_EQ(Kernel::registry().size(), 2u);
}
