#include "lsqtl/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <string>

#include <boost/math/special_functions/gamma.hpp>
#include "json.hpp"

#include "lsqtl/csv.hpp"
#include "lsqtl/error.hpp"
#include "lsqtl/likelihood.hpp"

namespace lsqtl {

namespace {

constexpr double kPi = std::numbers::pi;

void require_r(double r) {
  if (!(r > 0.0 && r < 1.0)) throw DomainError("r must lie in (0, 1), got " + std::to_string(r));
}

void require_samples(std::size_t n) {
  if (n == 0) throw InvalidInput("number of samples must be >= 1");
}

// Coefficients of Z_h(theta) = a(theta) z_h1 + b(theta) z_h2 on a grid.
struct ProcessGrid {
  std::vector<double> a;
  std::vector<double> b;

  ProcessGrid(double r, int grid_size) {
    if (grid_size < 2) throw InvalidInput("theta grid needs >= 2 points");
    a.resize(static_cast<std::size_t>(grid_size));
    b.resize(static_cast<std::size_t>(grid_size));
    const double sr = std::sqrt(r);
    const double sq = std::sqrt(1.0 - r);
    for (int j = 0; j < grid_size; ++j) {
      const double theta = static_cast<double>(j) / static_cast<double>(grid_size - 1);
      const double st = std::sqrt(tau(r, theta));
      a[static_cast<std::size_t>(j)] = sq / st;
      b[static_cast<std::size_t>(j)] = sr * (2.0 * theta - 1.0) / st;
    }
  }
};

}  // namespace

std::string_view to_string(StatKind kind) { return kind == StatKind::full ? "full" : "star"; }

StatKind stat_kind_from_name(std::string_view name) {
  if (name == "full") return StatKind::full;
  if (name == "star") return StatKind::star;
  throw InvalidInput("unknown statistic kind '" + std::string(name) + "' (expected full|star)");
}

std::string_view to_string(TableMethod method) {
  return method == TableMethod::representation ? "representation" : "oracle";
}

AngleGeometry AngleGeometry::from_r(double r) {
  require_r(r);
  return {r, std::acos(std::sqrt(1.0 - r))};
}

AngleSet classify_angle(double eta, const AngleGeometry& geom) {
  if (!(eta >= -kPi && eta <= kPi)) {
    throw DomainError("angle must lie in [-pi, pi], got " + std::to_string(eta));
  }
  const double g = geom.gamma;
  if ((eta >= -g && eta <= g) || eta >= kPi - g || eta <= -kPi + g) return AngleSet::A1;
  if ((eta >= g && eta <= kPi / 2) || (eta >= -kPi + g && eta <= -kPi / 2)) return AngleSet::A2;
  return AngleSet::A3;
}

double rep_full(double rho1_sq, double rho2_sq, double eta, const AngleGeometry& geom) {
  double factor = 1.0;
  switch (classify_angle(eta, geom)) {
    case AngleSet::A1:
      break;
    case AngleSet::A2:
      factor = std::cos(2.0 * eta - 2.0 * geom.gamma);
      break;
    case AngleSet::A3:
      factor = std::cos(2.0 * eta + 2.0 * geom.gamma);
      break;
  }
  return 0.5 * (rho1_sq + rho2_sq) + std::sqrt(rho1_sq * rho2_sq) * factor;
}

double rep_star(double rho_sq, double eta, const AngleGeometry& geom) {
  double c = 1.0;
  switch (classify_angle(eta, geom)) {
    case AngleSet::A1:
      break;
    case AngleSet::A2:
      c = std::cos(eta - geom.gamma);
      break;
    case AngleSet::A3:
      c = std::cos(eta + geom.gamma);
      break;
  }
  return rho_sq * c * c;
}

void NullDistTable::validate(std::size_t min_size) const {
  if (samples.empty()) throw InvalidInput("null distribution table is empty");
  if (samples.size() < min_size) {
    throw InvalidInput("null distribution table has " + std::to_string(samples.size()) +
                       " samples, at least " + std::to_string(min_size) + " required");
  }
  if (!std::is_sorted(samples.begin(), samples.end())) {
    throw InvalidInput("null distribution samples are not sorted");
  }
  if (samples.front() < 0.0) throw InvalidInput("null distribution has negative samples");
}

NullDistTable sample_representation(double r, StatKind kind, std::size_t n_samples,
                                    std::uint64_t seed, unsigned workers) {
  const AngleGeometry geom = AngleGeometry::from_r(r);
  require_samples(n_samples);
  NullDistTable table{r, kind, TableMethod::representation, seed, 0, {}};
  table.samples.resize(n_samples);
  parallel_for(n_samples, workers, [&](std::size_t i) {
    StreamRng rng(seed, i);
    if (kind == StatKind::full) {
      const double rho1 = rng.chi_square2();
      const double rho2 = rng.chi_square2();
      const double u1 = rng.uniform(-0.75 * kPi, 1.25 * kPi);
      const double u2 = rng.uniform(-0.75 * kPi, 1.25 * kPi);
      const double eta = std::clamp(0.5 * (u1 + u2) - 0.25 * kPi, -kPi, kPi);
      table.samples[i] = rep_full(rho1, rho2, eta, geom);
    } else {
      const double rho = rng.chi_square2();
      const double eta = rng.uniform(-kPi, kPi);
      table.samples[i] = rep_star(rho, eta, geom);
    }
  });
  for (double& v : table.samples) v = std::max(v, 0.0);
  std::sort(table.samples.begin(), table.samples.end());
  return table;
}

NullDistTable sample_R(double r, std::size_t n_samples, std::uint64_t seed, unsigned workers) {
  return sample_representation(r, StatKind::full, n_samples, seed, workers);
}

NullDistTable sample_Rstar(double r, std::size_t n_samples, std::uint64_t seed,
                           unsigned workers) {
  return sample_representation(r, StatKind::star, n_samples, seed, workers);
}

NullDistTable oracle_sup_process(double r, StatKind kind, int theta_grid_size,
                                 std::size_t n_samples, std::uint64_t seed, unsigned workers) {
  require_r(r);
  require_samples(n_samples);
  const ProcessGrid grid(r, theta_grid_size);
  NullDistTable table{r, kind, TableMethod::oracle, seed, theta_grid_size, {}};
  table.samples.resize(n_samples);
  parallel_for(n_samples, workers, [&](std::size_t i) {
    StreamRng rng(seed, i);
    const double z11 = rng.normal();
    const double z12 = rng.normal();
    const double z21 = rng.normal();
    const double z22 = rng.normal();
    double best = 0.0;
    for (std::size_t j = 0; j < grid.a.size(); ++j) {
      const double z1 = grid.a[j] * z11 + grid.b[j] * z12;
      double v = z1 * z1;
      if (kind == StatKind::full) {
        const double z2 = grid.a[j] * z21 + grid.b[j] * z22;
        v += z2 * z2;
      }
      best = std::max(best, v);
    }
    table.samples[i] = best;
  });
  std::sort(table.samples.begin(), table.samples.end());
  return table;
}

double pvalue(double stat, const NullDistTable& table) {
  if (table.samples.empty()) throw InvalidInput("null distribution table is empty");
  const auto first = std::lower_bound(table.samples.begin(), table.samples.end(), stat);
  const auto at_least = static_cast<double>(table.samples.end() - first);
  return (1.0 + at_least) / (static_cast<double>(table.samples.size()) + 1.0);
}

double sorted_quantile(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw InvalidInput("cannot take a quantile of no data");
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("probability must lie in [0, 1]");
  const double h = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = h - static_cast<double>(lo);
  if (frac == 0.0) return sorted[lo];
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

double quantile(const NullDistTable& table, double p) {
  if (table.samples.empty()) throw InvalidInput("null distribution table is empty");
  return sorted_quantile(table.samples, p);
}

double critical_value(const NullDistTable& table, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0, 1)");
  return quantile(table, 1.0 - alpha);
}

double tau(double r, double theta) { return 1.0 + 4.0 * r * theta * (theta - 1.0); }

double process_covariance(double r, double t1, double t2) {
  return (1.0 + r * (4.0 * t1 * t2 - 2.0 * (t1 + t2))) / std::sqrt(tau(r, t1) * tau(r, t2));
}

double davies_psi(double r, double theta) {
  constexpr double h = 1e-4;
  const double pp = process_covariance(r, theta + h, theta + h);
  const double pm = process_covariance(r, theta + h, theta - h);
  const double mp = process_covariance(r, theta - h, theta + h);
  const double mm = process_covariance(r, theta - h, theta - h);
  return (pp - pm - mp + mm) / (4.0 * h * h);
}

double davies_total_variation(double r) {
  require_r(r);
  constexpr int intervals = 1000;
  const double step = 1.0 / intervals;
  double sum = 0.0;
  for (int i = 0; i <= intervals; ++i) {
    const double v = std::sqrt(std::max(davies_psi(r, i * step), 0.0));
    const double w = (i == 0 || i == intervals) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    sum += w * v;
  }
  return sum * step / 3.0;
}

double davies_pvalue(double stat, double r, StatKind kind) {
  if (!(stat >= 0.0)) return 1.0;
  const double s = kind == StatKind::full ? 2.0 : 1.0;
  const double v = davies_total_variation(r);
  const double tail = boost::math::gamma_q(0.5 * s, 0.5 * stat);
  const double crossing = v * std::pow(stat, 0.5 * (s - 1.0)) * std::exp(-0.5 * stat) *
                          std::pow(2.0, -0.5 * s) /
                          (std::tgamma(0.5 * s + 0.5) * std::sqrt(kPi));
  return std::clamp(tail + crossing, 0.0, 1.0);
}

double davies_critical_value(double r, StatKind kind, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0, 1)");
  double lo = 0.0;
  double hi = 1.0;
  while (davies_pvalue(hi, r, kind) > alpha) {
    hi *= 2.0;
    if (hi > 1e4) throw NumericalError("Davies critical value bracket failed");
  }
  for (int it = 0; it < 200 && hi - lo > 1e-12 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (davies_pvalue(mid, r, kind) > alpha ? lo : hi) = mid;
  }
  return hi;
}

void LocalAlternative::validate() const {
  if (!(theta0 >= 0.0 && theta0 <= 1.0)) throw DomainError("theta0 must lie in [0, 1]");
  if (!(delta_mu >= 0.0) || !(delta_sigma >= 0.0)) {
    throw DomainError("delta_mu and delta_sigma must be >= 0");
  }
  if (!(sigma0 > 0.0)) throw DomainError("sigma0 must be > 0");
}

std::array<double, 2> local_drift(double r, const LocalAlternative& alt, StatKind kind,
                                  double theta) {
  const double lead = -(1.0 + 2.0 * r * (2.0 * alt.theta0 * theta - alt.theta0 - theta)) /
                      (std::sqrt(tau(r, theta)) * alt.sigma0);
  const InfoMatrix info = alt.kernel.info_matrix();
  if (kind == StatKind::star) return {lead * std::sqrt(info.sigma_T2) * alt.delta_mu, 0.0};
  const auto root = info.sqrt();
  return {lead * (root[0] * alt.delta_mu + root[1] * alt.delta_sigma),
          lead * (root[2] * alt.delta_mu + root[3] * alt.delta_sigma)};
}

double local_power_limit(double r, const LocalAlternative& alt, StatKind kind,
                         const LocalPowerConfig& cfg) {
  require_r(r);
  alt.validate();
  if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) throw DomainError("alpha must lie in (0, 1)");
  require_samples(cfg.n_samples);
  const double crit =
      critical_value(sample_representation(r, kind, cfg.n_samples, cfg.seed, cfg.workers),
                     cfg.alpha);

  const ProcessGrid grid(r, cfg.theta_grid_size);
  std::vector<std::array<double, 2>> drift(grid.a.size());
  for (std::size_t j = 0; j < drift.size(); ++j) {
    const double theta = static_cast<double>(j) / static_cast<double>(drift.size() - 1);
    drift[j] = local_drift(r, alt, kind, theta);
  }

  // Streams offset past the ones used for the null table.
  const std::uint64_t base = static_cast<std::uint64_t>(cfg.n_samples);
  std::vector<unsigned char> hit(cfg.n_samples, 0);
  parallel_for(cfg.n_samples, cfg.workers, [&](std::size_t i) {
    StreamRng rng(cfg.seed, base + i);
    const double z11 = rng.normal();
    const double z12 = rng.normal();
    const double z21 = rng.normal();
    const double z22 = rng.normal();
    double best = 0.0;
    for (std::size_t j = 0; j < drift.size(); ++j) {
      const double w1 = drift[j][0] + grid.a[j] * z11 + grid.b[j] * z12;
      double v = w1 * w1;
      if (kind == StatKind::full) {
        const double w2 = drift[j][1] + grid.a[j] * z21 + grid.b[j] * z22;
        v += w2 * w2;
      }
      best = std::max(best, v);
    }
    hit[i] = best > crit ? 1 : 0;
  });
  std::size_t count = 0;
  for (unsigned char h : hit) count += h;
  return static_cast<double>(count) / static_cast<double>(cfg.n_samples);
}

std::array<double, 4> group_probabilities(double r) {
  if (!(r > 0.0 && r <= 1.0)) throw DomainError("r must lie in (0, 1]");
  return {0.5 * (1.0 - r), 0.5 * r, 0.5 * r, 0.5 * (1.0 - r)};
}

namespace {

double component_log_density(const Component& c, double y) {
  return c.kernel.log_density_unchecked(y, c.params.mu, c.params.sigma);
}

double log_mixture(double w1, const Component& f1, double w2, const Component& f2, double y) {
  if (w2 == 0.0) return component_log_density(f1, y);
  if (w1 == 0.0) return component_log_density(f2, y);
  return detail::log_mix(std::log(w1), component_log_density(f1, y), std::log(w2),
                         component_log_density(f2, y));
}

// Integral of fn(y) against the density exp(log_g(y)); non-finite tail
// evaluations contribute nothing.
template <class LogG, class Fn>
double expect(LogG&& log_g, Fn&& fn) {
  return integrate_real_line([&](double y) {
    const double lg = log_g(y);
    if (!std::isfinite(lg) || lg < -745.0) return 0.0;
    const double v = std::exp(lg) * fn(y, lg);
    return std::isfinite(v) ? v : 0.0;
  });
}

}  // namespace

KlResult kl_information(const std::array<double, 4>& p_groups, const Component& f1,
                        const Component& f2, double theta, const Kernel& kernel_null) {
  require_valid(f1.params);
  require_valid(f2.params);
  if (!(theta >= 0.0 && theta <= 1.0)) throw DomainError("theta must lie in [0, 1]");
  double total = 0.0;
  for (double p : p_groups) {
    if (!(p >= 0.0)) throw DomainError("group probabilities must be >= 0");
    total += p;
  }
  if (std::fabs(total - 1.0) > 1e-9) throw DomainError("group probabilities must sum to 1");

  // Group densities: f1, theta f1 + (1-theta) f2, (1-theta) f1 + theta f2, f2.
  const std::array<std::array<double, 2>, 4> weights{
      {{1.0, 0.0}, {theta, 1.0 - theta}, {1.0 - theta, theta}, {0.0, 1.0}}};

  // Sum_i p_i E_i log g_i, and moments of the averaged density.
  double entropy_term = 0.0;
  double mean = 0.0;
  double second = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    if (p_groups[i] == 0.0) continue;
    const auto log_g = [&](double y) {
      return log_mixture(weights[i][0], f1, weights[i][1], f2, y);
    };
    entropy_term += p_groups[i] * expect(log_g, [](double, double lg) { return lg; });
    mean += p_groups[i] * expect(log_g, [](double y, double) { return y; });
    second += p_groups[i] * expect(log_g, [](double y, double) { return y * y; });
  }
  const double variance = second - mean * mean;
  if (!(variance > 0.0)) throw NumericalError("averaged density has no spread");

  // log of the averaged density gbar = sum_i p_i g_i = a f1 + b f2.
  double a = 0.0;
  double b = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    a += p_groups[i] * weights[i][0];
    b += p_groups[i] * weights[i][1];
  }
  const auto log_gbar = [&](double y) { return log_mixture(a, f1, b, f2, y); };

  // Maximise E_gbar log f0(y; mu, sigma) by Newton in (mu, log sigma).
  double mu = mean;
  double sigma = std::sqrt(variance);
  if (kernel_null.id() == KernelId::logistic) sigma *= std::sqrt(3.0) / kPi;
  const auto cross = [&](double m, double s) {
    return expect(log_gbar, [&](double y, double) {
      return kernel_null.log_pdf_std((y - m) / s) - std::log(s);
    });
  };
  double q = cross(mu, sigma);
  int it = 0;
  for (; it < 100; ++it) {
    const auto moment = [&](auto fn) {
      return expect(log_gbar, [&](double y, double) { return fn((y - mu) / sigma); });
    };
    const double eg = moment([&](double z) { return kernel_null.dlog_pdf_std(z); });
    const double ezg = moment([&](double z) { return z * kernel_null.dlog_pdf_std(z); });
    const double eh = moment([&](double z) { return kernel_null.d2log_pdf_std(z); });
    const double ezh = moment([&](double z) { return z * kernel_null.d2log_pdf_std(z); });
    const double ez2h = moment([&](double z) { return z * z * kernel_null.d2log_pdf_std(z); });
    const double g_mu = -eg / sigma;
    const double g_s = -1.0 - ezg;
    const double h_mumu = eh / (sigma * sigma);
    const double h_mus = (ezh + eg) / sigma;
    const double h_ss = ezg + ez2h;
    const double det = h_mumu * h_ss - h_mus * h_mus;
    if (!(h_mumu < 0.0 && det > 0.0)) throw NumericalError("KL minimisation lost concavity");
    const double dmu = -(h_ss * g_mu - h_mus * g_s) / det;
    const double ds = -(-h_mus * g_mu + h_mumu * g_s) / det;
    if (std::fabs(dmu) < 1e-10 * sigma && std::fabs(ds) < 1e-10) break;
    double t = 1.0;
    bool moved = false;
    for (int halving = 0; halving < 30; ++halving, t *= 0.5) {
      const double m = mu + t * dmu;
      const double s = sigma * std::exp(t * ds);
      const double qn = cross(m, s);
      if (qn >= q) {
        mu = m;
        sigma = s;
        q = qn;
        moved = true;
        break;
      }
    }
    if (!moved) break;
  }
  return {std::max(entropy_term - q, 0.0), {mu, sigma}, it};
}

std::filesystem::path sidecar_path(const std::filesystem::path& csv_path) {
  std::filesystem::path p = csv_path;
  p.replace_extension(".json");
  return p;
}

void write_table(const NullDistTable& table, const std::filesystem::path& csv_path) {
  table.validate(1);
  {
    std::ofstream out(csv_path);
    if (!out) throw InvalidInput("cannot write " + csv_path.string());
    out << "sample\n";
    for (double v : table.samples) out << csv::format_double(v) << '\n';
    if (!out) throw InvalidInput("write failed for " + csv_path.string());
  }
  nlohmann::json meta{{"r", table.r},
                      {"kind", std::string(to_string(table.kind))},
                      {"N", table.samples.size()},
                      {"seed", table.seed},
                      {"method", std::string(to_string(table.method))}};
  if (table.method == TableMethod::oracle) meta["grid_size"] = table.grid_size;
  std::ofstream side(sidecar_path(csv_path));
  if (!side) throw InvalidInput("cannot write " + sidecar_path(csv_path).string());
  side << meta.dump(2) << '\n';
}

NullDistTable read_table(const std::filesystem::path& csv_path) {
  const std::filesystem::path meta_path = sidecar_path(csv_path);
  std::ifstream side(meta_path);
  if (!side) throw ParseError("cannot open " + meta_path.string(), 0);
  nlohmann::json meta;
  try {
    side >> meta;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(meta_path.string() + ": " + e.what(), 0);
  }
  NullDistTable table;
  try {
    table.r = meta.at("r").get<double>();
    table.kind = stat_kind_from_name(meta.at("kind").get<std::string>());
    table.seed = meta.at("seed").get<std::uint64_t>();
    const auto method = meta.at("method").get<std::string>();
    if (method == "representation") {
      table.method = TableMethod::representation;
    } else if (method == "oracle") {
      table.method = TableMethod::oracle;
      table.grid_size = meta.value("grid_size", 0);
    } else {
      throw ParseError(meta_path.string() + ": unknown method '" + method + "'", 0);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(meta_path.string() + ": " + e.what(), 0);
  }
  const csv::Table rows = csv::read_file(csv_path);
  const std::size_t col = rows.column("sample");
  table.samples.reserve(rows.rows.size());
  for (const auto& row : rows.rows) {
    table.samples.push_back(csv::parse_double(row.fields[col], row.line, "sample"));
  }
  const auto n = meta.at("N").get<std::size_t>();
  if (n != table.samples.size()) {
    throw ValidationError(csv_path.string() + ": sidecar N=" + std::to_string(n) + " but " +
                          std::to_string(table.samples.size()) + " rows");
  }
  table.validate(1);
  return table;
}

}  // namespace lsqtl
