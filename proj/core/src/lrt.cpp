#include "lsqtl/lrt.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"

#include "lsqtl/error.hpp"

namespace lsqtl {

namespace {

// Tolerance for matching a table to an interval; tables are cached by r
// rounded to four decimals.
constexpr double kTableRTolerance = 5e-5 + 1e-12;

// Larger negative values indicate a fitting failure rather than rounding.
constexpr double kClampTolerance = 1e-6;

void require_table(const NullDistTable& table, StatKind kind, double r) {
  table.validate(kMinCalibrationSamples);
  if (table.kind != kind) {
    throw InvalidInput("null table is for kind '" + std::string(to_string(table.kind)) +
                       "', expected '" + std::string(to_string(kind)) + "'");
  }
  if (std::fabs(table.r - r) > kTableRTolerance) {
    throw InvalidInput("null table built for r=" + std::to_string(table.r) +
                       " but the interval has r=" + std::to_string(r));
  }
}

struct Clamped {
  double value;
  bool clamped;
};

Clamped clamp_statistic(double raw) {
  if (raw >= 0.0) return {raw, false};
  if (raw < -kClampTolerance) {
    throw NumericalError("alternative fit fell below the null fit (statistic " +
                         std::to_string(raw) + ")");
  }
  return {0.0, true};
}

TestOutcome make_outcome(TestKind kind, double raw, const MixtureFit& fit,
                         const MixtureFit& null_fit, const NullDistTable& table,
                         const IntervalConfig& interval, const TestOptions& opts) {
  const Clamped c = clamp_statistic(raw);
  TestOutcome out;
  out.kind = kind;
  out.statistic = c.value;
  out.clamped = c.clamped;
  out.p_value_rep = pvalue(c.value, table);
  if (opts.davies) {
    out.p_value_davies = davies_pvalue(
        c.value, interval.r, kind == TestKind::full ? StatKind::full : StatKind::star);
  }
  out.theta_hat = fit.params.theta;
  out.fit = fit;
  out.null_fit = null_fit;
  return out;
}

}  // namespace

std::string_view to_string(TestKind kind) {
  switch (kind) {
    case TestKind::full:
      return "full";
    case TestKind::equal_scale:
      return "equal_scale";
    case TestKind::score_form:
      return "score_form";
  }
  return "?";
}

std::string to_json(const TestOutcome& o) {
  nlohmann::json j{{"statistic", o.statistic},
                   {"kind", std::string(to_string(o.kind))},
                   {"p_value_rep", o.p_value_rep},
                   {"p_value_davies", nullptr},
                   {"theta_hat", o.theta_hat},
                   {"mu1", o.fit.params.comp1.mu},
                   {"mu2", o.fit.params.comp2.mu},
                   {"sigma1", o.fit.params.comp1.sigma},
                   {"sigma2", o.fit.params.comp2.sigma},
                   {"mu0", o.null_fit.params.comp1.mu},
                   {"sigma0", o.null_fit.params.comp1.sigma},
                   {"converged", o.fit.converged}};
  if (o.p_value_davies) j["p_value_davies"] = *o.p_value_davies;
  return j.dump();
}

TestOutcome lrt_full(const PhenotypeGroups& groups, const Kernel& kernel,
                     const IntervalConfig& interval, const FitConfig& cfg,
                     const NullDistTable& nulldist, TestOptions opts) {
  require_table(nulldist, StatKind::full, interval.r);
  const MixtureFit null_fit = fit_null(groups, kernel);
  const MixtureFit fit = fit_full(groups, kernel, cfg);
  return make_outcome(TestKind::full, 2.0 * (fit.loglik - null_fit.loglik), fit, null_fit,
                      nulldist, interval, opts);
}

TestOutcome lrt_equal_scale(const PhenotypeGroups& groups, const Kernel& kernel,
                            const IntervalConfig& interval, const FitConfig& cfg,
                            const NullDistTable& nulldist, TestOptions opts) {
  require_table(nulldist, StatKind::star, interval.r);
  const MixtureFit null_fit = fit_null(groups, kernel);
  const MixtureFit fit = fit_equal_scale(groups, kernel, cfg);
  return make_outcome(TestKind::equal_scale, 2.0 * (fit.loglik - null_fit.loglik), fit,
                      null_fit, nulldist, interval, opts);
}

Statistics lrt_statistics(const PhenotypeGroups& groups, const Kernel& kernel,
                          const FitConfig& cfg) {
  Statistics s;
  s.null_fit = fit_null(groups, kernel);
  s.fits = fit_alternatives(groups, kernel, cfg, s.null_fit);
  s.full = clamp_statistic(2.0 * (s.fits.full.loglik - s.null_fit.loglik)).value;
  s.equal_scale = clamp_statistic(2.0 * (s.fits.equal_scale.loglik - s.null_fit.loglik)).value;
  s.converged = s.fits.full.converged && s.fits.equal_scale.converged;
  return s;
}

TestPair lrt_both(const PhenotypeGroups& groups, const Kernel& kernel,
                  const IntervalConfig& interval, const FitConfig& cfg,
                  const NullDistTable& full_table, const NullDistTable& star_table,
                  TestOptions opts) {
  require_table(full_table, StatKind::full, interval.r);
  require_table(star_table, StatKind::star, interval.r);
  const MixtureFit null_fit = fit_null(groups, kernel);
  const AlternativeFits fits = fit_alternatives(groups, kernel, cfg, null_fit);
  return {make_outcome(TestKind::full, 2.0 * (fits.full.loglik - null_fit.loglik), fits.full,
                       null_fit, full_table, interval, opts),
          make_outcome(TestKind::equal_scale, 2.0 * (fits.equal_scale.loglik - null_fit.loglik),
                       fits.equal_scale, null_fit, star_table, interval, opts)};
}

std::array<double, 2> ScoreVectors::b(double theta) const {
  const double w = 2.0 * theta - 1.0;
  return {a[0][0] - a[3][0] + w * (a[1][0] - a[2][0]),
          a[0][1] - a[3][1] + w * (a[1][1] - a[2][1])};
}

ScoreVectors score_vectors(const PhenotypeGroups& groups, const Kernel& kernel,
                           const LocScale& null_params) {
  require_valid(null_params);
  ScoreVectors sv;
  for (int i = 0; i < 4; ++i) {
    double t = 0.0;
    double u = 0.0;
    for (double y : groups.group(i + 1)) {
      const Score s = kernel.score((y - null_params.mu) / null_params.sigma);
      t += s.T;
      u += s.U;
    }
    sv.a[static_cast<std::size_t>(i)] = {t, u};
  }
  return sv;
}

double score_form_statistic(const PhenotypeGroups& groups, const Kernel& kernel,
                            const IntervalConfig& interval, int theta_grid_size) {
  if (theta_grid_size < 2) throw InvalidInput("theta_grid_size must be >= 2");
  const InfoMatrix info = kernel.info_matrix();
  if (!info.positive_definite()) throw NumericalError("information matrix is singular");
  const auto inv = info.inverse();
  const MixtureFit null_fit = fit_null(groups, kernel);
  const ScoreVectors sv = score_vectors(groups, kernel, null_fit.params.comp1);
  const double n = static_cast<double>(groups.n());
  double best = 0.0;
  for (int j = 0; j < theta_grid_size; ++j) {
    const double theta = ThetaPoint::on_grid(j, theta_grid_size).theta;
    const double t = tau(interval.r, theta);
    if (!(t > 0.0)) throw DomainError("tau(theta) must be positive");
    const auto b = sv.b(theta);
    const double q = b[0] * (inv[0] * b[0] + inv[1] * b[1]) + b[1] * (inv[2] * b[0] + inv[3] * b[1]);
    best = std::max(best, q / (n * t));
  }
  return best;
}

}  // namespace lsqtl
