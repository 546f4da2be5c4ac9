#include "lsqtl/nonparam.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <utility>

#include "lsqtl/asymptotics.hpp"
#include "lsqtl/error.hpp"

namespace lsqtl {

namespace {

// Pooled sample sorted by value, each entry tagged with its sample index.
struct Pooled {
  std::vector<std::pair<double, int>> items;
  std::vector<double> sizes;
  int k = 0;
};

Pooled pool(const SampleList& samples) {
  Pooled p;
  for (const auto& s : samples) {
    if (s.empty()) continue;
    for (double v : s) {
      if (!std::isfinite(v)) throw InvalidInput("non-finite observation");
      p.items.emplace_back(v, p.k);
    }
    p.sizes.push_back(static_cast<double>(s.size()));
    ++p.k;
  }
  if (p.k < 2) throw InvalidInput("k-sample tests need at least two non-empty samples");
  std::sort(p.items.begin(), p.items.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  return p;
}

// Calls fn(count_le, total_le, tie_counts, tie_size) once per distinct pooled
// value, after all observations equal to it are counted.
template <class Fn>
void for_each_distinct(const Pooled& p, Fn&& fn) {
  std::vector<double> count(static_cast<std::size_t>(p.k), 0.0);
  std::vector<double> ties(static_cast<std::size_t>(p.k), 0.0);
  std::size_t i = 0;
  double total = 0.0;
  while (i < p.items.size()) {
    std::fill(ties.begin(), ties.end(), 0.0);
    const double value = p.items[i].first;
    double run = 0.0;
    while (i < p.items.size() && p.items[i].first == value) {
      const auto s = static_cast<std::size_t>(p.items[i].second);
      count[s] += 1.0;
      ties[s] += 1.0;
      run += 1.0;
      ++i;
    }
    total += run;
    fn(count, total, ties, run);
  }
}

struct CriticalRow {
  double alpha;
  double b0, b1, b2;
};

// Asymptotic percentiles of the standardized statistic:
// b0 + b1 / sqrt(m) + b2 / m with m = k - 1.
constexpr std::array<CriticalRow, 7> kAdTable{{
    {0.25, 0.675, -0.245, -0.105},
    {0.10, 1.281, 0.250, -0.305},
    {0.05, 1.645, 0.678, -0.362},
    {0.025, 1.960, 1.149, -0.391},
    {0.01, 2.326, 1.822, -0.396},
    {0.005, 2.573, 2.364, -0.345},
    {0.001, 3.085, 3.615, -0.154},
}};

}  // namespace

std::string_view to_string(NonparamTest test) { return test == NonparamTest::ks ? "ks" : "ad"; }

SampleList as_samples(const PhenotypeGroups& groups) {
  return {groups.group(1), groups.group(2), groups.group(3), groups.group(4)};
}

double ks_ksample(const SampleList& samples) {
  const Pooled p = pool(samples);
  const double n = static_cast<double>(p.items.size());
  double best = 0.0;
  for_each_distinct(p, [&](const std::vector<double>& count, double total,
                           const std::vector<double>&, double) {
    const double pooled_cdf = total / n;
    double sum = 0.0;
    for (std::size_t i = 0; i < count.size(); ++i) {
      const double d = count[i] / p.sizes[i] - pooled_cdf;
      sum += p.sizes[i] * d * d;
    }
    best = std::max(best, sum);
  });
  return best;
}

double ks_ksample(const PhenotypeGroups& groups) { return ks_ksample(as_samples(groups)); }

AdRaw ad_ksample_raw(const SampleList& samples) {
  const Pooled p = pool(samples);
  const double n = static_cast<double>(p.items.size());
  AdRaw out;
  out.k = p.k;
  out.n = p.items.size();

  std::size_t distinct = 0;
  for_each_distinct(p, [&](const auto&, double, const auto&, double) { ++distinct; });
  out.midrank = distinct < p.items.size();

  double sum = 0.0;
  if (!out.midrank) {
    for_each_distinct(p, [&](const std::vector<double>& count, double total,
                             const std::vector<double>&, double) {
      if (total >= n) return;
      const double denom = total * (n - total);
      for (std::size_t i = 0; i < count.size(); ++i) {
        const double d = n * count[i] - total * p.sizes[i];
        sum += d * d / (denom * p.sizes[i]);
      }
    });
    out.a2 = sum / n;
  } else {
    for_each_distinct(p, [&](const std::vector<double>& count, double total,
                             const std::vector<double>& ties, double run) {
      const double b = total - 0.5 * run;
      const double denom = b * (n - b) - n * run / 4.0;
      if (!(denom > 0.0)) return;  // single distinct value: numerator is 0 too
      for (std::size_t i = 0; i < count.size(); ++i) {
        const double m = count[i] - 0.5 * ties[i];
        const double d = n * m - p.sizes[i] * b;
        sum += run * d * d / (denom * p.sizes[i]);
      }
    });
    out.a2 = sum * (n - 1.0) / (n * n);
  }
  return out;
}

double ad_variance(std::span<const std::size_t> sizes) {
  double big_h = 0.0;
  double n = 0.0;
  double k = 0.0;
  for (std::size_t s : sizes) {
    if (s == 0) continue;
    big_h += 1.0 / static_cast<double>(s);
    n += static_cast<double>(s);
    k += 1.0;
  }
  if (k < 2.0) throw InvalidInput("k-sample tests need at least two non-empty samples");
  if (n < 4.0) throw InvalidInput("Anderson-Darling variance needs a pooled size >= 4");
  const auto total = static_cast<std::size_t>(n);
  // h = sum_{i<N} 1/i;  g = sum_{i=1}^{N-2} sum_{j=i+1}^{N-1} 1/((N-i) j)
  double h = 0.0;
  for (std::size_t i = 1; i < total; ++i) h += 1.0 / static_cast<double>(i);
  double g = 0.0;
  double tail = 0.0;  // sum_{j=i+1}^{N-1} 1/j, built from the top
  for (std::size_t i = total - 2; i >= 1; --i) {
    tail += 1.0 / static_cast<double>(i + 1);
    g += tail / (n - static_cast<double>(i));
  }
  const double a = (4 * g - 6) * (k - 1) + (10 - 6 * g) * big_h;
  const double b = (2 * g - 4) * k * k + 8 * h * k + (2 * g - 14 * h - 4) * big_h - 8 * h +
                   4 * g - 6;
  const double c = (6 * h + 2 * g - 2) * k * k + (4 * h - 4 * g + 6) * k + (2 * h - 6) * big_h +
                   4 * h;
  const double d = (2 * h + 6) * k * k - 4 * h * k;
  return (a * n * n * n + b * n * n + c * n + d) / ((n - 1) * (n - 2) * (n - 3));
}

double ad_ksample(const SampleList& samples) {
  const AdRaw raw = ad_ksample_raw(samples);
  std::vector<std::size_t> sizes;
  for (const auto& s : samples) sizes.push_back(s.size());
  const double var = ad_variance(sizes);
  if (!(var > 0.0)) throw NumericalError("Anderson-Darling variance is not positive");
  return (raw.a2 - static_cast<double>(raw.k - 1)) / std::sqrt(var);
}

double ad_ksample(const PhenotypeGroups& groups) { return ad_ksample(as_samples(groups)); }

double ad_asymptotic_critical(int k, double alpha) {
  if (k < 2) throw InvalidInput("k must be >= 2");
  const double lo = kAdTable.back().alpha;
  const double hi = kAdTable.front().alpha;
  if (!(alpha >= lo && alpha <= hi)) {
    throw DomainError("alpha outside the tabulated range [0.001, 0.25]");
  }
  const double m = static_cast<double>(k - 1);
  const auto crit = [m](const CriticalRow& row) {
    return row.b0 + row.b1 / std::sqrt(m) + row.b2 / m;
  };
  for (std::size_t i = 0; i + 1 < kAdTable.size(); ++i) {
    const CriticalRow& a = kAdTable[i];
    const CriticalRow& b = kAdTable[i + 1];
    if (alpha <= a.alpha && alpha >= b.alpha) {
      const double t = (std::log(alpha) - std::log(a.alpha)) / (std::log(b.alpha) - std::log(a.alpha));
      return crit(a) + t * (crit(b) - crit(a));
    }
  }
  return crit(kAdTable.back());
}

std::vector<double> mc_null_statistics(const StatisticFn& test_fn, const NullSampler& sampler,
                                       std::size_t n_reps, std::uint64_t seed,
                                       unsigned workers) {
  if (n_reps == 0) throw InvalidInput("n_reps must be >= 1");
  std::vector<double> values(n_reps);
  parallel_for(n_reps, workers, [&](std::size_t i) {
    StreamRng rng(seed, i);
    values[i] = test_fn(sampler(rng));
  });
  std::sort(values.begin(), values.end());
  return values;
}

double mc_calibrate(const StatisticFn& test_fn, const NullSampler& sampler, std::size_t n_reps,
                    double alpha, std::uint64_t seed, unsigned workers) {
  if (n_reps < 1000) throw InvalidInput("Monte Carlo calibration needs n_reps >= 1000");
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0, 1)");
  const std::vector<double> values = mc_null_statistics(test_fn, sampler, n_reps, seed, workers);
  return sorted_quantile(values, 1.0 - alpha);
}

RankNull rank_null_statistics(const std::array<std::size_t, 4>& sizes, std::size_t n_reps,
                              std::uint64_t seed, unsigned workers) {
  if (n_reps == 0) throw InvalidInput("n_reps must be >= 1");
  RankNull out{std::vector<double>(n_reps), std::vector<double>(n_reps)};
  parallel_for(n_reps, workers, [&](std::size_t rep) {
    StreamRng rng(seed, rep);
    std::array<std::vector<double>, 4> data;
    for (std::size_t i = 0; i < 4; ++i) {
      data[i].resize(sizes[i]);
      for (double& v : data[i]) v = rng.uniform();
    }
    const SampleList list{data[0], data[1], data[2], data[3]};
    out.ks[rep] = ks_ksample(list);
    out.ad[rep] = ad_ksample(list);
  });
  std::sort(out.ks.begin(), out.ks.end());
  std::sort(out.ad.begin(), out.ad.end());
  return out;
}

double kolmogorov_survival(double x) {
  if (!(x > 0.0)) return 1.0;
  constexpr double pi = std::numbers::pi;
  if (x < 1.18) {
    // Theta-function form, fast for small x.
    double sum = 0.0;
    const double c = -pi * pi / (8.0 * x * x);
    for (int k = 1; k <= 50; ++k) {
      const double odd = 2.0 * k - 1.0;
      const double term = std::exp(c * odd * odd);
      sum += term;
      if (term < 1e-17 * sum) break;
    }
    return std::clamp(1.0 - std::sqrt(2.0 * pi) / x * sum, 0.0, 1.0);
  }
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * x * x);
    sum += (k % 2 == 1 ? term : -term);
    if (term < 1e-17) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

OneSampleKs ks_one_sample_normal(std::span<const double> y, double mu, double sigma) {
  if (y.empty()) throw InvalidInput("one-sample KS needs data");
  require_valid(LocScale{mu, sigma});
  std::vector<double> sorted(y.begin(), y.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = kNormal.cdf_std((sorted[i] - mu) / sigma);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return {d, kolmogorov_survival(std::sqrt(n) * d)};
}

}  // namespace lsqtl
