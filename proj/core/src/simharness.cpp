#include "lsqtl/simharness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "lsqtl/csv.hpp"
#include "lsqtl/error.hpp"
#include "lsqtl/lrt.hpp"
#include "lsqtl/nonparam.hpp"

namespace lsqtl {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Independent seeds for the auxiliary random streams of an experiment.
std::uint64_t derived_seed(std::uint64_t seed, std::uint64_t purpose) {
  return mix64(seed ^ mix64(purpose + 0x51A7E5EEDULL));
}

enum : std::uint64_t { kTableFull = 1, kTableStar = 2, kNullData = 3 };

bool same(const Component& a, const Component& b) {
  return a.kernel == b.kernel && a.params.mu == b.params.mu && a.params.sigma == b.params.sigma;
}

MethodRate finish(std::string method, double crit, std::size_t rejections, std::size_t reps) {
  MethodRate m;
  m.method = std::move(method);
  m.critical_value = crit;
  m.rejections = rejections;
  m.rate = reps == 0 ? 0.0 : static_cast<double>(rejections) / static_cast<double>(reps);
  m.std_error = reps == 0 ? 0.0 : std::sqrt(m.rate * (1.0 - m.rate) / static_cast<double>(reps));
  return m;
}

std::vector<double> sorted_finite(std::vector<double> v) {
  v.erase(std::remove_if(v.begin(), v.end(), [](double x) { return !std::isfinite(x); }), v.end());
  std::sort(v.begin(), v.end());
  return v;
}

struct Replicate {
  ReplicateStats stats;
  int redraws = 0;
  int k = 0;  // non-empty groups
};

std::vector<Replicate> run_replicates(const SimScenario& s, const Kernel& kernel,
                                      const FitConfig& fit, const Methods& methods,
                                      unsigned workers) {
  std::vector<Replicate> reps(s.n_reps);
  parallel_for(s.n_reps, workers, [&](std::size_t i) {
    StreamRng rng(s.seed, i);
    Replicate& rep = reps[i];
    const PhenotypeGroups groups = gen_data(s, rng, &rep.redraws);
    for (int g = 1; g <= 4; ++g) rep.k += groups.size(g) > 0 ? 1 : 0;
    rep.stats = replicate_statistics(groups, kernel, fit, methods);
  });
  return reps;
}

// Fit failures are tolerated below 1% of the replicates.
void tally(ExperimentRow& row, const std::vector<Replicate>& reps) {
  row.reps = reps.size();
  for (const Replicate& r : reps) {
    row.failures += r.stats.failed ? 1 : 0;
    row.nonconverged += (!r.stats.failed && !r.stats.converged) ? 1 : 0;
    row.size_redraws += static_cast<std::size_t>(r.redraws);
  }
  if (row.failures * 100 >= row.reps && row.failures > 0) {
    throw NumericalError(std::to_string(row.failures) + " of " + std::to_string(row.reps) +
                         " replicates failed to fit");
  }
}

// Rejections of a statistic against a critical value. Failed replicates
// never reject, nor do likelihood ratio tests whose fit did not converge.
template <class Get, class Crit>
std::size_t count_rejections(const std::vector<Replicate>& reps, bool needs_fit, Get&& get,
                             Crit&& crit) {
  std::size_t count = 0;
  for (const Replicate& r : reps) {
    if (r.stats.failed || (needs_fit && !r.stats.converged)) continue;
    const double v = get(r.stats);
    if (std::isfinite(v) && v > crit(r)) ++count;
  }
  return count;
}

}  // namespace

void SimScenario::validate() const {
  if (n < 8) throw InvalidInput("scenario n must be >= 8");
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0, 1)");
  if (!(theta >= 0.0 && theta <= 1.0)) throw DomainError("theta must lie in [0, 1]");
  if (!(interval.r > 0.0 && interval.r <= 1.0)) throw DomainError("r must lie in (0, 1]");
  require_valid(f1.params);
  require_valid(f2.params);
}

bool SimScenario::is_null() const { return same(f1, f2); }

std::array<int, 4> gen_group_sizes(int n, double r, StreamRng& rng) {
  if (n < 1) throw InvalidInput("n must be >= 1");
  const auto p = group_probabilities(r);
  const double c1 = p[0];
  const double c2 = c1 + p[1];
  const double c3 = c2 + p[2];
  std::array<int, 4> sizes{0, 0, 0, 0};
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    ++sizes[u < c1 ? 0 : (u < c2 ? 1 : (u < c3 ? 2 : 3))];
  }
  return sizes;
}

std::array<int, 4> gen_group_sizes(int n, double r, std::uint64_t seed) {
  StreamRng rng(seed, 0);
  return gen_group_sizes(n, r, rng);
}

PhenotypeGroups gen_data(const SimScenario& s, StreamRng& rng, int* redraws) {
  std::array<int, 4> sizes{};
  int attempts = 0;
  for (;;) {
    sizes = gen_group_sizes(s.n, s.interval.r, rng);
    if (sizes[0] >= 2 && sizes[3] >= 2) break;
    if (++attempts >= 100) {
      throw DegenerateData("could not draw group sizes with n1 >= 2 and n4 >= 2");
    }
  }
  if (redraws != nullptr) *redraws = attempts;

  const auto draw = [&](const Component& c) { return c.kernel.sample(rng, c.params); };
  std::array<std::vector<double>, 4> g;
  for (std::size_t i = 0; i < 4; ++i) g[i].reserve(static_cast<std::size_t>(sizes[i]));
  for (int j = 0; j < sizes[0]; ++j) g[0].push_back(draw(s.f1));
  for (int j = 0; j < sizes[1]; ++j) g[1].push_back(rng.uniform() < s.theta ? draw(s.f1) : draw(s.f2));
  for (int j = 0; j < sizes[2]; ++j) g[2].push_back(rng.uniform() < s.theta ? draw(s.f2) : draw(s.f1));
  for (int j = 0; j < sizes[3]; ++j) g[3].push_back(draw(s.f2));
  return PhenotypeGroups(std::move(g[0]), std::move(g[1]), std::move(g[2]), std::move(g[3]));
}

SimScenario local_alternative_scenario(int n, double r, const LocalAlternative& alt,
                                       double mu0) {
  alt.validate();
  const double step = 1.0 / std::sqrt(static_cast<double>(n));
  SimScenario s;
  s.n = n;
  s.interval = IntervalConfig::from_r(r);
  s.theta = alt.theta0;
  s.f1 = {alt.kernel, {mu0 - step * alt.delta_mu, alt.sigma0 - step * alt.delta_sigma}};
  s.f2 = {alt.kernel, {mu0 + step * alt.delta_mu, alt.sigma0 + step * alt.delta_sigma}};
  return s;
}

const MethodRate& ExperimentRow::rate(std::string_view method) const {
  for (const MethodRate& m : rates) {
    if (m.method == method) return m;
  }
  throw InvalidInput("no rate for method '" + std::string(method) + "'");
}

ReplicateStats replicate_statistics(const PhenotypeGroups& groups, const Kernel& kernel,
                                    const FitConfig& fit, const Methods& methods) {
  ReplicateStats st{kNaN, kNaN, kNaN, kNaN, true, false};
  try {
    if (methods.full || methods.star || methods.davies) {
      const Statistics s = lrt_statistics(groups, kernel, fit);
      st.full = s.full;
      st.star = s.equal_scale;
      st.converged = s.converged;
    }
    if (methods.ks) st.ks = ks_ksample(groups);
    if (methods.ad) st.ad = ad_ksample(groups);
  } catch (const std::exception&) {
    st.failed = true;
  }
  return st;
}

double NullCalibration::critical(std::string_view method, double alpha) const {
  const std::vector<double>* v = nullptr;
  if (method == "full") v = &full;
  if (method == "star") v = &star;
  if (method == "ks") v = &ks;
  if (method == "ad") v = &ad;
  if (v == nullptr) throw InvalidInput("unknown method '" + std::string(method) + "'");
  if (v->empty()) return std::numeric_limits<double>::infinity();
  return sorted_quantile(*v, 1.0 - alpha);
}

NullCalibration calibrate_null(const Component& null_density, const Kernel& fit_kernel, int n,
                               double r, const FitConfig& fit, const Methods& methods,
                               std::size_t n_reps, std::uint64_t seed, unsigned workers) {
  SimScenario s;
  s.n = n;
  s.interval = IntervalConfig::from_r(r);
  s.f1 = null_density;
  s.f2 = null_density;
  s.n_reps = n_reps;
  s.seed = seed;
  s.validate();
  Methods m = methods;
  m.full = m.full || m.davies;
  const auto reps = run_replicates(s, fit_kernel, fit, m, workers);
  NullCalibration cal;
  std::vector<double> full, star, ks, ad;
  for (const Replicate& r_ : reps) {
    if (r_.stats.failed) {
      ++cal.failures;
      continue;
    }
    full.push_back(r_.stats.full);
    star.push_back(r_.stats.star);
    ks.push_back(r_.stats.ks);
    ad.push_back(r_.stats.ad);
  }
  if (m.full) cal.full = sorted_finite(std::move(full));
  if (m.star) cal.star = sorted_finite(std::move(star));
  if (m.ks) cal.ks = sorted_finite(std::move(ks));
  if (m.ad) cal.ad = sorted_finite(std::move(ad));
  return cal;
}

Component calibration_null(const SimScenario& s) {
  const KlResult kl = kl_information(group_probabilities(s.interval.r), s.f1, s.f2, s.theta,
                                     s.f1.kernel);
  return {s.f1.kernel, kl.null_params};
}

ExperimentRow type1_experiment(const SimScenario& s, const Methods& methods,
                               const FitConfig& fit, const CalibrationConfig& calib) {
  s.validate();
  if (!s.is_null()) throw InvalidInput("type I experiments need f1 == f2");
  return asymptotic_experiment(s, methods, fit, calib);
}

ExperimentRow asymptotic_experiment(const SimScenario& s, const Methods& methods,
                                    const FitConfig& fit, const CalibrationConfig& calib) {
  s.validate();
  const Kernel kernel = s.f1.kernel;
  const double r = s.interval.r;
  ExperimentRow row;
  row.scenario = s;
  row.calibration = "representation";

  const auto reps = run_replicates(s, kernel, fit, methods, calib.workers);
  tally(row, reps);

  if (methods.full) {
    const double crit = critical_value(
        sample_R(r, calib.table_samples, derived_seed(s.seed, kTableFull), calib.workers),
        s.alpha);
    row.rates.push_back(finish("full", crit,
                               count_rejections(reps, true, [](const auto& st) { return st.full; },
                                                [&](const Replicate&) { return crit; }),
                               reps.size()));
  }
  if (methods.star) {
    const double crit = critical_value(
        sample_Rstar(r, calib.table_samples, derived_seed(s.seed, kTableStar), calib.workers),
        s.alpha);
    row.rates.push_back(finish("star", crit,
                               count_rejections(reps, true, [](const auto& st) { return st.star; },
                                                [&](const Replicate&) { return crit; }),
                               reps.size()));
  }
  if (methods.davies) {
    const double crit = davies_critical_value(r, StatKind::full, s.alpha);
    row.rates.push_back(finish("davies", crit,
                               count_rejections(reps, true, [](const auto& st) { return st.full; },
                                                [&](const Replicate&) { return crit; }),
                               reps.size()));
  }
  if (methods.ks) {
    Methods only_ks;
    only_ks.full = only_ks.star = false;
    only_ks.ks = true;
    const Component null_density = s.is_null() ? s.f1 : calibration_null(s);
    const NullCalibration cal =
        calibrate_null(null_density, kernel, s.n, r, fit, only_ks, calib.null_reps,
                       derived_seed(s.seed, kNullData), calib.workers);
    const double crit = cal.critical("ks", s.alpha);
    row.rates.push_back(finish("ks", crit,
                               count_rejections(reps, false, [](const auto& st) { return st.ks; },
                                                [&](const Replicate&) { return crit; }),
                               reps.size()));
  }
  if (methods.ad) {
    const double crit4 = ad_asymptotic_critical(4, s.alpha);
    row.rates.push_back(finish("ad", crit4,
                               count_rejections(reps, false, [](const auto& st) { return st.ad; },
                                                [&](const Replicate& r_) {
                                                  return ad_asymptotic_critical(r_.k, s.alpha);
                                                }),
                               reps.size()));
  }
  return row;
}

ExperimentRow power_experiment(const SimScenario& s, const Methods& methods,
                               const FitConfig& fit, const CalibrationConfig& calib,
                               const NullCalibration* shared) {
  s.validate();
  const Kernel kernel = s.f1.kernel;
  ExperimentRow row;
  row.scenario = s;
  row.calibration = "null-monte-carlo";

  NullCalibration own;
  if (shared == nullptr) {
    own = calibrate_null(calibration_null(s), kernel, s.n, s.interval.r, fit, methods,
                         calib.null_reps, derived_seed(s.seed, kNullData), calib.workers);
    shared = &own;
  }
  const auto reps = run_replicates(s, kernel, fit, methods, calib.workers);
  tally(row, reps);

  const auto add = [&](const char* name, bool enabled, bool needs_fit, auto get) {
    if (!enabled) return;
    const double crit = shared->critical(name, s.alpha);
    row.rates.push_back(finish(
        name, crit,
        count_rejections(reps, needs_fit, get, [&](const Replicate&) { return crit; }),
        reps.size()));
  };
  add("full", methods.full, true, [](const ReplicateStats& st) { return st.full; });
  add("star", methods.star, true, [](const ReplicateStats& st) { return st.star; });
  add("ks", methods.ks, false, [](const ReplicateStats& st) { return st.ks; });
  add("ad", methods.ad, false, [](const ReplicateStats& st) { return st.ad; });
  return row;
}

void write_rows_csv(std::ostream& out, const std::vector<ExperimentRow>& rows) {
  using csv::format_double;
  out << "n,r,d_cm,theta,kernel,mu1,sigma1,mu2,sigma2,alpha,reps,seed,calibration,method,"
         "critical_value,rejections,rate,std_error,failures,nonconverged,size_redraws\n";
  for (const ExperimentRow& row : rows) {
    const SimScenario& s = row.scenario;
    for (const MethodRate& m : row.rates) {
      out << s.n << ',' << format_double(s.interval.r) << ','
          << (s.interval.d_cm ? format_double(*s.interval.d_cm) : std::string()) << ','
          << format_double(s.theta) << ',' << s.f1.kernel.name() << ','
          << format_double(s.f1.params.mu) << ',' << format_double(s.f1.params.sigma) << ','
          << format_double(s.f2.params.mu) << ',' << format_double(s.f2.params.sigma) << ','
          << format_double(s.alpha) << ',' << row.reps << ',' << s.seed << ','
          << row.calibration << ',' << m.method << ',' << format_double(m.critical_value) << ','
          << m.rejections << ',' << format_double(m.rate) << ',' << format_double(m.std_error)
          << ',' << row.failures << ',' << row.nonconverged << ',' << row.size_redraws << '\n';
    }
  }
}

}  // namespace lsqtl
