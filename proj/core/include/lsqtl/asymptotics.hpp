#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "lsqtl/kernel.hpp"
#include "lsqtl/parallel.hpp"

namespace lsqtl {

/// Which limiting law: R = sup (Z1^2 + Z2^2) for the full test, or
/// R* = sup Z1^2 for the equal-scale test.
enum class StatKind { full, star };
std::string_view to_string(StatKind kind);
StatKind stat_kind_from_name(std::string_view name);  // "full" | "star"

enum class TableMethod { representation, oracle };
std::string_view to_string(TableMethod method);

/// Angle partition of [-pi, pi] for a given r, gamma = arccos(sqrt(1 - r)).
///   A1 = [-gamma, gamma] u [pi - gamma, pi] u [-pi, -pi + gamma]
///   A2 = [gamma, pi/2] u [-pi + gamma, -pi/2]
///   A3 = the rest ([-pi/2, -gamma] u [pi/2, pi - gamma])
struct AngleGeometry {
  double r = 0.0;
  double gamma = 0.0;

  static AngleGeometry from_r(double r);  // r in (0, 1)
};

enum class AngleSet { A1, A2, A3 };

/// Set containing eta; shared endpoints resolve A1 > A2 > A3.
/// Throws DomainError outside [-pi, pi].
AngleSet classify_angle(double eta, const AngleGeometry& geom);

/// (rho1^2 + rho2^2)/2 + rho1 rho2 c(eta) with c = 1, cos(2eta - 2gamma) or
/// cos(2eta + 2gamma) on A1, A2, A3.
double rep_full(double rho1_sq, double rho2_sq, double eta, const AngleGeometry& geom);

/// rho^2 times 1, cos^2(eta - gamma) or cos^2(eta + gamma) on A1, A2, A3.
double rep_star(double rho_sq, double eta, const AngleGeometry& geom);

/// Monte Carlo sample of a limiting null law, sorted ascending.
struct NullDistTable {
  double r = 0.0;
  StatKind kind = StatKind::full;
  TableMethod method = TableMethod::representation;
  std::uint64_t seed = 0;
  int grid_size = 0;  // oracle tables only
  std::vector<double> samples;

  std::size_t size() const { return samples.size(); }
  // Sorted, non-negative, non-empty. `min_size` is 10^4 for tables used to
  // calibrate tests.
  void validate(std::size_t min_size = 10000) const;
};

inline constexpr std::size_t kMinCalibrationSamples = 10000;

NullDistTable sample_R(double r, std::size_t n_samples, std::uint64_t seed,
                       unsigned workers = default_workers());
NullDistTable sample_Rstar(double r, std::size_t n_samples, std::uint64_t seed,
                           unsigned workers = default_workers());
NullDistTable sample_representation(double r, StatKind kind, std::size_t n_samples,
                                    std::uint64_t seed, unsigned workers = default_workers());

/// Brute force: sup over a uniform theta grid of the Gaussian process
/// Z_h(theta) = {sqrt(1-r) z_h1 + sqrt(r) (2 theta - 1) z_h2} / sqrt(tau(theta)).
NullDistTable oracle_sup_process(double r, StatKind kind, int theta_grid_size,
                                 std::size_t n_samples, std::uint64_t seed,
                                 unsigned workers = default_workers());

/// (1 + #{samples >= stat}) / (N + 1).
double pvalue(double stat, const NullDistTable& table);

/// Linearly interpolated quantile of ascending data, p in [0, 1].
double sorted_quantile(std::span<const double> sorted, double p);

/// Linearly interpolated quantile at probability p in [0, 1].
double quantile(const NullDistTable& table, double p);

/// (1 - alpha) quantile; a test rejects when the statistic exceeds it.
double critical_value(const NullDistTable& table, double alpha);

/// tau(theta) = 1 + 4 r theta (theta - 1).
double tau(double r, double theta);

/// cov(Z_h(t1), Z_h(t2)).
double process_covariance(double r, double t1, double t2);

/// Mixed second derivative of the covariance on the diagonal, by central
/// differences with step 1e-4.
double davies_psi(double r, double theta);

/// V = integral over [0, 1] of sqrt(psi), Simpson's rule on 1001 points.
double davies_total_variation(double r);

/// Upcrossing-type tail approximation for the supremum of a chi-square
/// process with s = 2 (full) or s = 1 (star) degrees of freedom, clamped to
/// [0, 1].
double davies_pvalue(double stat, double r, StatKind kind);

/// Smallest u with davies_pvalue(u) <= alpha (bisection).
double davies_critical_value(double r, StatKind kind, double alpha);

/// Local alternative at QTL position theta0: components
/// (mu0 -/+ delta_mu / sqrt(n), sigma0 -/+ delta_sigma / sqrt(n)).
struct LocalAlternative {
  double theta0 = 0.5;
  double delta_mu = 0.0;
  double delta_sigma = 0.0;
  double sigma0 = 1.0;
  Kernel kernel = kNormal;

  void validate() const;
};

/// Drift of the limiting process at theta, as a 2-vector (full) whose second
/// entry is unused for the star kind.
std::array<double, 2> local_drift(double r, const LocalAlternative& alt, StatKind kind,
                                  double theta);

struct LocalPowerConfig {
  double alpha = 0.05;
  int theta_grid_size = 201;
  std::size_t n_samples = 100000;
  std::uint64_t seed = 1;
  unsigned workers = default_workers();
};

/// Limiting rejection probability: fraction of drifted-process suprema
/// exceeding the null (1 - alpha) quantile from the representation sampler.
double local_power_limit(double r, const LocalAlternative& alt, StatKind kind,
                         const LocalPowerConfig& cfg);

/// Marginal group probabilities ((1-r)/2, r/2, r/2, (1-r)/2).
std::array<double, 4> group_probabilities(double r);

struct Component {
  Kernel kernel = kNormal;
  LocScale params;
};

struct KlResult {
  double kl = 0.0;
  LocScale null_params;  // minimising location-scale null
  int iterations = 0;
};

/// Weighted Kullback-Leibler divergence of the four-group alternative from
/// the closest member of the `kernel_null` location-scale family.
KlResult kl_information(const std::array<double, 4>& p_groups, const Component& f1,
                        const Component& f2, double theta, const Kernel& kernel_null);

/// CSV with header `sample` plus a JSON sidecar (same stem, .json) holding
/// {r, kind, N, seed, method}.
void write_table(const NullDistTable& table, const std::filesystem::path& csv_path);
NullDistTable read_table(const std::filesystem::path& csv_path);
std::filesystem::path sidecar_path(const std::filesystem::path& csv_path);

}  // namespace lsqtl
