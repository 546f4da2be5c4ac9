#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "lsqtl/asymptotics.hpp"
#include "lsqtl/estimate.hpp"
#include "lsqtl/likelihood.hpp"
#include "lsqtl/parallel.hpp"
#include "lsqtl/rng.hpp"

namespace lsqtl {

/// One simulation cell: n individuals on an interval with recombination
/// fraction r, QTL at theta, component densities f1 and f2.
struct SimScenario {
  int n = 200;
  IntervalConfig interval = IntervalConfig::from_distance(5.0);
  double theta = 0.5;
  Component f1;
  Component f2;
  double alpha = 0.05;
  std::size_t n_reps = 1000;
  std::uint64_t seed = 1;

  void validate() const;  // n >= 8, alpha in (0, 1), valid components
  bool is_null() const;   // f1 and f2 identical
};

/// Multinomial(n; (1-r)/2, r/2, r/2, (1-r)/2) by sequential binomials.
std::array<int, 4> gen_group_sizes(int n, double r, StreamRng& rng);
std::array<int, 4> gen_group_sizes(int n, double r, std::uint64_t seed);

/// One backcross dataset. Group sizes are redrawn while n1 < 2 or n4 < 2,
/// at most 100 times; `redraws` receives the number of redraws.
PhenotypeGroups gen_data(const SimScenario& scenario, StreamRng& rng, int* redraws = nullptr);

/// Scenario for data simulated under a local alternative at sample size n:
/// components (mu0 -/+ delta_mu / sqrt(n), sigma0 -/+ delta_sigma / sqrt(n)).
SimScenario local_alternative_scenario(int n, double r, const LocalAlternative& alt,
                                       double mu0 = 0.0);

struct Methods {
  bool full = true;     // R_n
  bool star = true;     // R_n*
  bool ks = false;      // k-sample Kolmogorov-Smirnov
  bool ad = false;      // k-sample Anderson-Darling
  bool davies = false;  // R_n with the Davies critical value (type I only)
};

struct MethodRate {
  std::string method;  // full | star | davies | ks | ad
  double critical_value = 0.0;
  std::size_t rejections = 0;
  double rate = 0.0;
  double std_error = 0.0;
};

struct ExperimentRow {
  SimScenario scenario;
  std::string calibration;  // how the R_n / R_n* critical values were set
  std::vector<MethodRate> rates;
  std::size_t reps = 0;
  std::size_t failures = 0;       // replicates whose fit threw
  std::size_t nonconverged = 0;   // counted as non-rejections
  std::size_t size_redraws = 0;

  const MethodRate& rate(std::string_view method) const;
};

struct CalibrationConfig {
  std::size_t table_samples = 100000;  // representation tables
  std::size_t null_reps = 10000;       // null Monte Carlo for power studies
  unsigned workers = default_workers();
};

/// Statistic values of every method on one dataset; NaN when not requested.
struct ReplicateStats {
  double full = 0.0;
  double star = 0.0;
  double ks = 0.0;
  double ad = 0.0;
  bool converged = true;
  bool failed = false;
};
ReplicateStats replicate_statistics(const PhenotypeGroups& groups, const Kernel& kernel,
                                    const FitConfig& fit, const Methods& methods);

/// Null Monte Carlo distribution of each requested statistic for a kernel
/// family, sample size and interval, simulated from `null_density`.
/// The likelihood ratio statistics and the rank tests are invariant under
/// location-scale maps, so only the family of `null_density` matters.
struct NullCalibration {
  std::vector<double> full;
  std::vector<double> star;
  std::vector<double> ks;
  std::vector<double> ad;
  std::size_t failures = 0;

  double critical(std::string_view method, double alpha) const;
};
NullCalibration calibrate_null(const Component& null_density, const Kernel& fit_kernel, int n,
                               double r, const FitConfig& fit, const Methods& methods,
                               std::size_t n_reps, std::uint64_t seed,
                               unsigned workers = default_workers());

/// Rejection rates on null data (f1 == f2). R_n / R_n* use representation
/// tables (and optionally the Davies approximation); AD uses its asymptotic
/// percentiles and KS a null Monte Carlo of `calib.null_reps` datasets.
/// Throws NumericalError when 1% or more of the replicates fail to fit.
ExperimentRow type1_experiment(const SimScenario& scenario, const Methods& methods,
                               const FitConfig& fit, const CalibrationConfig& calib);

/// The same critical values applied to any scenario, e.g. data drawn under
/// a local alternative. KS is calibrated from the KL-closest null when
/// f1 != f2.
ExperimentRow asymptotic_experiment(const SimScenario& scenario, const Methods& methods,
                                    const FitConfig& fit, const CalibrationConfig& calib);

/// Rejection rates on alternative data, every method calibrated by null
/// Monte Carlo from the KL-closest location-scale null of the scenario.
/// `shared` may supply a calibration computed earlier for the same
/// (kernel family, n, r, fit config).
ExperimentRow power_experiment(const SimScenario& scenario, const Methods& methods,
                               const FitConfig& fit, const CalibrationConfig& calib,
                               const NullCalibration* shared = nullptr);

/// Null density used to calibrate a power study: the KL minimiser for the
/// scenario's alternative within the family of f1.
Component calibration_null(const SimScenario& scenario);

/// Long-format CSV: one line per method.
void write_rows_csv(std::ostream& out, const std::vector<ExperimentRow>& rows);

}  // namespace lsqtl
