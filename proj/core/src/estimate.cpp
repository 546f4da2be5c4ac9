#include "lsqtl/estimate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "lsqtl/error.hpp"

namespace lsqtl {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kLogSqrt2Pi = 0.91893853320467274178;

// Weighted sample: empty `w` means unit weights.
struct Segment {
  std::span<const double> y;
  std::span<const double> w;

  double weight(std::size_t i) const { return w.empty() ? 1.0 : w[i]; }
};

// Weighted objective sum_i w_i log f(y_i; mu, e^s) and its derivatives in
// (mu, s = log sigma).
struct Derivs {
  double q = 0.0;
  double g_mu = 0.0;
  double g_s = 0.0;
  double h_mumu = 0.0;
  double h_mus = 0.0;
  double h_ss = 0.0;

  friend Derivs operator+(const Derivs& a, const Derivs& b) {
    return {a.q + b.q,         a.g_mu + b.g_mu,   a.g_s + b.g_s,
            a.h_mumu + b.h_mumu, a.h_mus + b.h_mus, a.h_ss + b.h_ss};
  }
};

Derivs accumulate(const Kernel& kernel, const Segment& seg, double mu, double sigma) {
  Derivs d;
  const double log_sigma = std::log(sigma);
  for (std::size_t i = 0; i < seg.y.size(); ++i) {
    const double w = seg.weight(i);
    if (w == 0.0) continue;
    const double z = (seg.y[i] - mu) / sigma;
    const Kernel::Derivatives k = kernel.derivatives_std(z);
    d.q += w * (k.log_pdf - log_sigma);
    d.g_mu += w * (-k.d1 / sigma);
    d.g_s += w * (-1.0 - z * k.d1);
    d.h_mumu += w * (k.d2 / (sigma * sigma));
    d.h_mus += w * ((z * k.d2 + k.d1) / sigma);
    d.h_ss += w * (z * k.d1 + z * z * k.d2);
  }
  return d;
}

// A component's data: the anchoring group plus the two mixed groups. The
// mixed groups are always combined first so mirrored layouts round alike.
struct ComponentData {
  Segment anchor;
  Segment mid2;
  Segment mid3;

  Derivs derivs(const Kernel& k, double mu, double sigma) const {
    return accumulate(k, anchor, mu, sigma) +
           (accumulate(k, mid2, mu, sigma) + accumulate(k, mid3, mu, sigma));
  }
};

struct PooledData {
  std::array<Segment, 4> seg;

  Derivs derivs(const Kernel& k, double mu, double sigma) const {
    return (accumulate(k, seg[0], mu, sigma) + accumulate(k, seg[3], mu, sigma)) +
           (accumulate(k, seg[1], mu, sigma) + accumulate(k, seg[2], mu, sigma));
  }
};

// Damped Newton ascent in (mu, log sigma). Every accepted step increases the
// objective; sigma is clamped at `floor`.
template <class Data>
LocScale maximize_location_scale(const Kernel& kernel, const Data& data, LocScale start,
                                 double floor, int max_steps, bool& on_floor) {
  double mu = start.mu;
  double sigma = std::max(start.sigma, floor);
  Derivs d = data.derivs(kernel, mu, sigma);
  for (int step = 0; step < max_steps; ++step) {
    double dmu = 0.0;
    double ds = 0.0;
    const double det = d.h_mumu * d.h_ss - d.h_mus * d.h_mus;
    if (d.h_mumu < 0.0 && det > 0.0) {
      dmu = -(d.h_ss * d.g_mu - d.h_mus * d.g_s) / det;
      ds = -(-d.h_mus * d.g_mu + d.h_mumu * d.g_s) / det;
    } else {
      // Not locally concave: scaled gradient step.
      const double scale_mu = std::max(std::fabs(d.h_mumu), 1e-12);
      const double scale_s = std::max(std::fabs(d.h_ss), 1e-12);
      dmu = d.g_mu / scale_mu;
      ds = d.g_s / scale_s;
    }
    if (std::fabs(dmu) <= 1e-12 * sigma && std::fabs(ds) <= 1e-12) break;
    ds = std::clamp(ds, -2.0, 2.0);

    bool accepted = false;
    double t = 1.0;
    for (int halving = 0; halving < 40; ++halving, t *= 0.5) {
      const double new_mu = mu + t * dmu;
      double new_sigma = sigma * std::exp(t * ds);
      bool clamped = false;
      if (new_sigma < floor) {
        new_sigma = floor;
        clamped = true;
      }
      const Derivs candidate = data.derivs(kernel, new_mu, new_sigma);
      if (candidate.q >= d.q) {
        const bool moved = new_mu != mu || new_sigma != sigma;
        mu = new_mu;
        sigma = new_sigma;
        d = candidate;
        on_floor = on_floor || clamped;
        accepted = moved;
        break;
      }
    }
    if (!accepted) break;
  }
  return {mu, sigma};
}

struct NormalStats {
  double count = 0.0;
  double mean = 0.0;
  double ss = 0.0;  // centred sum of squares
};

NormalStats normal_stats(std::span<const double> y) {
  NormalStats s;
  s.count = static_cast<double>(y.size());
  if (y.empty()) return s;
  double sum = 0.0;
  for (double v : y) sum += v;
  s.mean = sum / s.count;
  for (double v : y) s.ss += (v - s.mean) * (v - s.mean);
  return s;
}

double normal_anchor_loglik(const NormalStats& s, double mu, double sigma) {
  const double dev = s.mean - mu;
  return -s.count * (std::log(sigma) + kLogSqrt2Pi) -
         (s.ss + s.count * dev * dev) / (2.0 * sigma * sigma);
}

double median_of(std::vector<double> v) {
  const std::size_t m = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(m), v.end());
  double med = v[m];
  if (v.size() % 2 == 0) {
    const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(m));
    med = 0.5 * (med + lower);
  }
  return med;
}

// Moment-based starting value for a location-scale fit.
LocScale moment_start(const Kernel& kernel, double mean, double variance) {
  double sd = std::sqrt(std::max(variance, 0.0));
  if (kernel.id() == KernelId::logistic) sd *= std::sqrt(3.0) / 3.14159265358979323846;
  return {mean, sd};
}

// E-step and model state for one EM run.
class EmEngine {
 public:
  EmEngine(const PhenotypeGroups& groups, const Kernel& kernel, ModelKind model, ThetaPoint theta,
           const FitConfig& cfg, double floor)
      : kernel_(kernel),
        model_(model),
        floor_(floor),
        normal_(kernel.id() == KernelId::normal && cfg.closed_form_normal),
        g1_(groups.group(1)),
        g2_(groups.group(2)),
        g3_(groups.group(3)),
        g4_(groups.group(4)),
        w2_first_(g2_.size()),
        w2_second_(g2_.size()),
        w3_first_(g3_.size()),
        w3_second_(g3_.size()) {
    log_theta_ = theta.theta > 0.0 ? std::log(theta.theta) : kNegInf;
    log_complement_ = theta.complement > 0.0 ? std::log(theta.complement) : kNegInf;
    if (normal_) {
      s1_ = normal_stats(g1_);
      s4_ = normal_stats(g4_);
    }
  }

  // Computes responsibilities at `p` and returns the observed log-likelihood.
  double e_step(const MixtureParams& p) {
    double l1 = 0.0;
    double l4 = 0.0;
    if (normal_) {
      l1 = normal_anchor_loglik(s1_, p.comp1.mu, p.comp1.sigma);
      l4 = normal_anchor_loglik(s4_, p.comp2.mu, p.comp2.sigma);
    } else {
      l1 = detail::component_loglik(g1_, kernel_, p.comp1);
      l4 = detail::component_loglik(g4_, kernel_, p.comp2);
    }
    // group 2: theta on comp1; group 3: theta on comp2
    const double l2 = responsibilities(g2_, p, log_theta_, log_complement_, w2_first_, w2_second_);
    const double l3 = responsibilities(g3_, p, log_complement_, log_theta_, w3_first_, w3_second_);
    return (l1 + l4) + (l2 + l3);
  }

  MixtureParams m_step(const MixtureParams& p) {
    MixtureParams next = p;
    if (normal_) {
      m_step_normal(next);
    } else {
      m_step_generic(next);
    }
    return next;
  }

  bool on_floor() const { return on_floor_; }

 private:
  double responsibilities(std::span<const double> y, const MixtureParams& p, double log_w1,
                          double log_w2, std::vector<double>& first,
                          std::vector<double>& second) const {
    double sum = 0.0;
    const double lw1 = log_w1 - std::log(p.comp1.sigma);
    const double lw2 = log_w2 - std::log(p.comp2.sigma);
    for (std::size_t i = 0; i < y.size(); ++i) {
      const double a = lw1 + kernel_.log_pdf_std((y[i] - p.comp1.mu) / p.comp1.sigma);
      const double b = lw2 + kernel_.log_pdf_std((y[i] - p.comp2.mu) / p.comp2.sigma);
      first[i] = 1.0 / (1.0 + std::exp(b - a));
      second[i] = 1.0 / (1.0 + std::exp(a - b));
      const double hi = std::max(a, b);
      sum += hi + std::log1p(std::exp(std::min(a, b) - hi));
    }
    return sum;
  }

  // Weighted mean and centred sum of squares of anchor + mixed groups.
  struct Moments {
    double weight;
    double mean;
    double ss;
  };
  static Moments component_moments(const NormalStats& anchor, std::span<const double> ya,
                                   std::span<const double> wa, std::span<const double> yb,
                                   std::span<const double> wb) {
    double wsum_a = 0.0, wsum_b = 0.0, ysum_a = 0.0, ysum_b = 0.0;
    for (std::size_t i = 0; i < ya.size(); ++i) {
      wsum_a += wa[i];
      ysum_a += wa[i] * ya[i];
    }
    for (std::size_t i = 0; i < yb.size(); ++i) {
      wsum_b += wb[i];
      ysum_b += wb[i] * yb[i];
    }
    const double weight = anchor.count + (wsum_a + wsum_b);
    const double mean = (anchor.count * anchor.mean + (ysum_a + ysum_b)) / weight;
    double ss_a = 0.0, ss_b = 0.0;
    for (std::size_t i = 0; i < ya.size(); ++i) ss_a += wa[i] * (ya[i] - mean) * (ya[i] - mean);
    for (std::size_t i = 0; i < yb.size(); ++i) ss_b += wb[i] * (yb[i] - mean) * (yb[i] - mean);
    const double dev = anchor.mean - mean;
    const double ss = (anchor.ss + anchor.count * dev * dev) + (ss_a + ss_b);
    return {weight, mean, ss};
  }

  double floored(double sigma) {
    if (sigma < floor_) {
      on_floor_ = true;
      return floor_;
    }
    return sigma;
  }

  void m_step_normal(MixtureParams& p) {
    const Moments c1 = component_moments(s1_, g2_, w2_first_, g3_, w3_first_);
    const Moments c2 = component_moments(s4_, g3_, w3_second_, g2_, w2_second_);
    p.comp1.mu = c1.mean;
    p.comp2.mu = c2.mean;
    if (model_ == ModelKind::equal_scale) {
      const double sigma = floored(std::sqrt((c1.ss + c2.ss) / (c1.weight + c2.weight)));
      p.comp1.sigma = sigma;
      p.comp2.sigma = sigma;
    } else {
      p.comp1.sigma = floored(std::sqrt(c1.ss / c1.weight));
      p.comp2.sigma = floored(std::sqrt(c2.ss / c2.weight));
    }
  }

  ComponentData first_component() const {
    return {{g1_, {}}, {g2_, w2_first_}, {g3_, w3_first_}};
  }
  ComponentData second_component() const {
    return {{g4_, {}}, {g3_, w3_second_}, {g2_, w2_second_}};
  }

  void m_step_generic(MixtureParams& p) {
    // One safeguarded Newton step per M-step: a generalized EM, still monotone.
    constexpr int kNewtonSteps = 1;
    const ComponentData d1 = first_component();
    const ComponentData d2 = second_component();
    if (model_ == ModelKind::full) {
      p.comp1 = maximize_location_scale(kernel_, d1, p.comp1, floor_, kNewtonSteps, on_floor_);
      p.comp2 = maximize_location_scale(kernel_, d2, p.comp2, floor_, kNewtonSteps, on_floor_);
      return;
    }
    // Shared scale: Newton in (mu1, mu2, log sigma), Schur complement on s.
    double mu1 = p.comp1.mu;
    double mu2 = p.comp2.mu;
    double sigma = std::max(p.comp1.sigma, floor_);
    Derivs a = d1.derivs(kernel_, mu1, sigma);
    Derivs b = d2.derivs(kernel_, mu2, sigma);
    for (int step = 0; step < kNewtonSteps; ++step) {
      const double q_old = a.q + b.q;
      const double g_s = a.g_s + b.g_s;
      const double h_ss = a.h_ss + b.h_ss;
      double dmu1, dmu2, ds;
      const double schur =
          a.h_mumu < 0.0 && b.h_mumu < 0.0
              ? h_ss - (a.h_mus * a.h_mus / a.h_mumu + b.h_mus * b.h_mus / b.h_mumu)
              : 1.0;
      if (a.h_mumu < 0.0 && b.h_mumu < 0.0 && schur < 0.0) {
        ds = -(g_s - (a.h_mus * a.g_mu / a.h_mumu + b.h_mus * b.g_mu / b.h_mumu)) / schur;
        dmu1 = -(a.g_mu + a.h_mus * ds) / a.h_mumu;
        dmu2 = -(b.g_mu + b.h_mus * ds) / b.h_mumu;
      } else {
        dmu1 = a.g_mu / std::max(std::fabs(a.h_mumu), 1e-12);
        dmu2 = b.g_mu / std::max(std::fabs(b.h_mumu), 1e-12);
        ds = g_s / std::max(std::fabs(h_ss), 1e-12);
      }
      if (std::fabs(dmu1) <= 1e-12 * sigma && std::fabs(dmu2) <= 1e-12 * sigma &&
          std::fabs(ds) <= 1e-12) {
        break;
      }
      ds = std::clamp(ds, -2.0, 2.0);
      bool accepted = false;
      double t = 1.0;
      for (int halving = 0; halving < 40; ++halving, t *= 0.5) {
        const double n1 = mu1 + t * dmu1;
        const double n2 = mu2 + t * dmu2;
        double ns = sigma * std::exp(t * ds);
        bool clamped = false;
        if (ns < floor_) {
          ns = floor_;
          clamped = true;
        }
        const Derivs ca = d1.derivs(kernel_, n1, ns);
        const Derivs cb = d2.derivs(kernel_, n2, ns);
        if (ca.q + cb.q >= q_old) {
          accepted = n1 != mu1 || n2 != mu2 || ns != sigma;
          mu1 = n1;
          mu2 = n2;
          sigma = ns;
          a = ca;
          b = cb;
          on_floor_ = on_floor_ || clamped;
          break;
        }
      }
      if (!accepted) break;
    }
    p.comp1 = {mu1, sigma};
    p.comp2 = {mu2, sigma};
  }

  Kernel kernel_;
  ModelKind model_;
  double floor_;
  bool normal_;
  bool on_floor_ = false;
  std::span<const double> g1_, g2_, g3_, g4_;
  std::vector<double> w2_first_, w2_second_, w3_first_, w3_second_;
  double log_theta_ = 0.0;
  double log_complement_ = 0.0;
  NormalStats s1_, s4_;
};

LocScale anchor_fit(const Kernel& kernel, std::span<const double> y, const LocScale& fallback) {
  try {
    return fit_location_scale(kernel, y);
  } catch (const DegenerateData&) {
    return {y.front(), fallback.sigma};
  }
}

MixtureParams anchor_start(const PhenotypeGroups& groups, const Kernel& kernel, ModelKind model,
                           double floor, const LocScale& pooled) {
  LocScale c1 = anchor_fit(kernel, groups.group(1), pooled);
  LocScale c2 = anchor_fit(kernel, groups.group(4), pooled);
  c1.sigma = std::max(c1.sigma, floor);
  c2.sigma = std::max(c2.sigma, floor);
  if (model == ModelKind::equal_scale) {
    const double n1 = static_cast<double>(groups.size(1));
    const double n4 = static_cast<double>(groups.size(4));
    const double shared =
        std::sqrt((n1 * c1.sigma * c1.sigma + n4 * c2.sigma * c2.sigma) / (n1 + n4));
    c1.sigma = shared;
    c2.sigma = shared;
  }
  return {0.5, c1, c2};
}

struct ProfileRun {
  EmRun run;
  ThetaPoint theta;
};

// EM over the whole theta grid. `fallbacks` supplies per-grid-point
// parameters to restart from when the anchored start ends below them.
std::vector<ProfileRun> profile(const PhenotypeGroups& groups, const Kernel& kernel,
                                ModelKind model, const FitConfig& cfg, double floor,
                                const MixtureFit& null_fit,
                                const std::vector<ProfileRun>* fallbacks) {
  const MixtureParams start = anchor_start(groups, kernel, model, floor, null_fit.params.comp1);
  MixtureParams null_start = null_fit.params;
  null_start.comp1.sigma = std::max(null_start.comp1.sigma, floor);
  null_start.comp2 = null_start.comp1;

  const int grid = cfg.theta_grid_size;
  std::vector<ProfileRun> out(static_cast<std::size_t>(grid));
  for (int j = 0; j < grid; ++j) {
    const ThetaPoint theta = ThetaPoint::on_grid(j, grid);
    EmRun best = run_em(groups, kernel, model, theta, start, cfg, floor);
    if (best.loglik < null_fit.loglik) {
      EmRun alt = run_em(groups, kernel, model, theta, null_start, cfg, floor);
      if (alt.loglik > best.loglik) best = alt;
    }
    if (fallbacks != nullptr) {
      const EmRun& other = (*fallbacks)[static_cast<std::size_t>(j)].run;
      if (best.loglik < other.loglik) {
        EmRun alt = run_em(groups, kernel, model, theta, other.params, cfg, floor);
        if (alt.loglik > best.loglik) best = alt;
      }
    }
    best.params.theta = theta.theta;
    out[static_cast<std::size_t>(j)] = {best, theta};
  }
  return out;
}

MixtureFit select_best(const std::vector<ProfileRun>& runs, ModelKind model) {
  MixtureFit fit;
  fit.model = model;
  fit.theta_profile.reserve(runs.size());
  std::size_t best = 0;
  bool any_free = false;
  for (std::size_t j = 0; j < runs.size(); ++j) {
    const EmRun& r = runs[j].run;
    fit.theta_profile.push_back({runs[j].theta.theta, r.loglik, r.iterations, r.converged, r.on_floor});
    if (r.loglik > runs[best].run.loglik) best = j;  // ties keep the smaller theta
    any_free = any_free || !r.on_floor;
  }
  const EmRun& r = runs[best].run;
  fit.params = r.params;
  fit.loglik = r.loglik;
  fit.theta_index = static_cast<int>(best);
  fit.hit_sigma_floor = r.on_floor;
  fit.converged = r.converged && any_free && !r.on_floor;
  return fit;
}

void require_anchored(const PhenotypeGroups& groups) {
  if (!groups.anchored()) {
    throw InvalidInput("mixture fits need n1 >= 2 and n4 >= 2 (n1=" +
                       std::to_string(groups.size(1)) + ", n4=" + std::to_string(groups.size(4)) +
                       ")");
  }
}

}  // namespace

void FitConfig::validate() const {
  if (theta_grid_size < 2) throw InvalidInput("theta_grid_size must be >= 2");
  if (em_max_iter < 1) throw InvalidInput("em_max_iter must be >= 1");
  if (!(em_tol > 0.0)) throw InvalidInput("em_tol must be > 0");
  if (!(sigma_floor_factor > 0.0)) throw InvalidInput("sigma_floor_factor must be > 0");
}

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::null:
      return "null";
    case ModelKind::equal_scale:
      return "equal_scale";
    case ModelKind::full:
      return "full";
  }
  return "?";
}

ThetaPoint ThetaPoint::on_grid(int index, int grid_size) {
  const double denom = static_cast<double>(grid_size - 1);
  return {static_cast<double>(index) / denom, static_cast<double>(grid_size - 1 - index) / denom};
}

ThetaPoint ThetaPoint::at(double theta) {
  if (!(theta >= 0.0 && theta <= 1.0)) throw DomainError("theta must lie in [0, 1]");
  return {theta, 1.0 - theta};
}

LocScale fit_location_scale(const Kernel& kernel, std::span<const double> y) {
  if (y.empty()) throw InvalidInput("cannot fit an empty sample");
  const NormalStats s = normal_stats(y);
  if (!(s.ss > 0.0)) throw DegenerateData("sample has zero spread");
  const double variance = s.ss / s.count;
  if (kernel.id() == KernelId::normal) return {s.mean, std::sqrt(variance)};
  struct Single {
    Segment seg;
    Derivs derivs(const Kernel& k, double mu, double sigma) const {
      return accumulate(k, seg, mu, sigma);
    }
  } data{{y, {}}};
  bool on_floor = false;
  return maximize_location_scale(kernel, data, moment_start(kernel, s.mean, variance), 0.0, 200,
                                 on_floor);
}

double sigma_floor(const PhenotypeGroups& groups, const FitConfig& cfg) {
  std::vector<double> pooled = groups.pooled();
  const double med = median_of(pooled);
  for (double& v : pooled) v = std::fabs(v - med);
  double spread = median_of(pooled);
  if (!(spread > 0.0)) {
    const NormalStats s = normal_stats(groups.pooled());
    spread = std::sqrt(s.ss / s.count);
  }
  return cfg.sigma_floor_factor * spread;
}

MixtureFit fit_null(const PhenotypeGroups& groups, const Kernel& kernel) {
  // Group-wise sums combined as (g1 + g4) + (g2 + g3): invariant under
  // swapping groups 2 and 3 or relabelling 1<->4 / 2<->3.
  double part_sum[4];
  double part_n[4];
  for (int i = 0; i < 4; ++i) {
    part_sum[i] = 0.0;
    for (double v : groups.group(i + 1)) part_sum[i] += v;
    part_n[i] = static_cast<double>(groups.size(i + 1));
  }
  const double n = (part_n[0] + part_n[3]) + (part_n[1] + part_n[2]);
  const double mean = ((part_sum[0] + part_sum[3]) + (part_sum[1] + part_sum[2])) / n;
  double part_ss[4];
  for (int i = 0; i < 4; ++i) {
    part_ss[i] = 0.0;
    for (double v : groups.group(i + 1)) part_ss[i] += (v - mean) * (v - mean);
  }
  const double ss = (part_ss[0] + part_ss[3]) + (part_ss[1] + part_ss[2]);
  if (!(ss > 0.0)) throw DegenerateData("pooled sample is constant; null fit undefined");

  LocScale est{mean, std::sqrt(ss / n)};
  if (kernel.id() != KernelId::normal) {
    PooledData data{{Segment{groups.group(1), {}}, Segment{groups.group(2), {}},
                     Segment{groups.group(3), {}}, Segment{groups.group(4), {}}}};
    bool on_floor = false;
    est = maximize_location_scale(kernel, data, moment_start(kernel, mean, ss / n), 0.0, 200,
                                  on_floor);
  }
  MixtureFit fit;
  fit.model = ModelKind::null;
  fit.params = {0.5, est, est};
  fit.loglik = null_loglik(groups, kernel, est);
  return fit;
}

EmRun run_em(const PhenotypeGroups& groups, const Kernel& kernel, ModelKind model,
             ThetaPoint theta, const MixtureParams& start, const FitConfig& cfg, double floor,
             std::vector<double>* trace) {
  if (model == ModelKind::null) throw InvalidInput("EM is defined for the mixture models only");
  EmEngine engine(groups, kernel, model, theta, cfg, floor);
  EmRun out;
  MixtureParams params = start;
  params.theta = theta.theta;
  if (model == ModelKind::equal_scale && params.comp1.sigma != params.comp2.sigma) {
    const double shared = std::sqrt(0.5 * (params.comp1.sigma * params.comp1.sigma +
                                           params.comp2.sigma * params.comp2.sigma));
    params.comp1.sigma = shared;
    params.comp2.sigma = shared;
  }
  double previous = kNegInf;
  int it = 0;
  for (; it < cfg.em_max_iter; ++it) {
    const double current = engine.e_step(params);
    if (trace != nullptr) trace->push_back(current);
    if (it > 0 && current - previous < cfg.em_tol) {
      out.converged = true;
      break;
    }
    previous = current;
    params = engine.m_step(params);
  }
  out.params = params;
  out.params.theta = theta.theta;
  out.iterations = it;
  out.on_floor = engine.on_floor();
  // Report the canonical log-likelihood so every code path compares alike.
  MixtureParams eval = out.params;
  out.loglik = detail::component_loglik(groups.group(1), kernel, eval.comp1) +
               detail::component_loglik(groups.group(4), kernel, eval.comp2);
  const double l2 = detail::mixture_loglik(groups.group(2), kernel, theta.theta, eval.comp1,
                                           theta.complement, eval.comp2);
  const double l3 = detail::mixture_loglik(groups.group(3), kernel, theta.complement, eval.comp1,
                                           theta.theta, eval.comp2);
  out.loglik = out.loglik + (l2 + l3);
  return out;
}

MixtureFit fit_full(const PhenotypeGroups& groups, const Kernel& kernel, const FitConfig& cfg) {
  cfg.validate();
  require_anchored(groups);
  const MixtureFit null_fit = fit_null(groups, kernel);
  const double floor = sigma_floor(groups, cfg);
  return select_best(profile(groups, kernel, ModelKind::full, cfg, floor, null_fit, nullptr),
                     ModelKind::full);
}

MixtureFit fit_equal_scale(const PhenotypeGroups& groups, const Kernel& kernel,
                           const FitConfig& cfg) {
  cfg.validate();
  require_anchored(groups);
  const MixtureFit null_fit = fit_null(groups, kernel);
  const double floor = sigma_floor(groups, cfg);
  return select_best(
      profile(groups, kernel, ModelKind::equal_scale, cfg, floor, null_fit, nullptr),
      ModelKind::equal_scale);
}

AlternativeFits fit_alternatives(const PhenotypeGroups& groups, const Kernel& kernel,
                                 const FitConfig& cfg, const MixtureFit& null_fit) {
  cfg.validate();
  require_anchored(groups);
  const double floor = sigma_floor(groups, cfg);
  const auto equal_runs =
      profile(groups, kernel, ModelKind::equal_scale, cfg, floor, null_fit, nullptr);
  const auto full_runs = profile(groups, kernel, ModelKind::full, cfg, floor, null_fit, &equal_runs);
  return {select_best(equal_runs, ModelKind::equal_scale), select_best(full_runs, ModelKind::full)};
}

}  // namespace lsqtl
